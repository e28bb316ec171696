"""Closed-form special functions of the point-interaction model.

Modified Bessel functions of the second kind, Green functions of
``(omega - Laplacian)`` in dimensions 2 and 3, the coupling constant
``c(omega)``, the bound-state energy ``e_alpha``, and the explicit
fractional Green function.

All functions are pure; complex shifts use the principal branch of
log / sqrt / powers throughout.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AccuracyWarning,
    BranchCutError,
    DomainError,
    SingularityError,
)

EULER_GAMMA = 0.5772156649015329

# evaluations closer to the origin than this refuse with SingularityError;
# callers are expected to work on the Fourier side instead
ORIGIN_RADIUS = 1e-8

_ASYMPTOTIC_Z = 50.0
_LN2 = math.log(2.0)


def _log_cosh(t):
    # stable log(cosh(t)) for large |t|
    return np.logaddexp(t, -t) - _LN2


def _bessel_k_quadrature(nu: float, z: complex, tol: float) -> complex:
    """Trapezoid evaluation of K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt.

    The integrand decays double-exponentially, so the trapezoid rule
    converges geometrically in 1/h; h is halved until two successive
    refinements agree to ``tol``.  Valid for Re z > 0.
    """
    x = z.real
    # truncation point: z.real*cosh(T) - nu*T >= z.real + 46 (integrand below ~1e-20
    # of its t=0 value); two fixed-point passes are enough
    T = 1.0
    for _ in range(3):
        T = math.log(2.0 * (46.0 + nu * T + x) / x)
    T = max(T, 4.0)

    h = 0.5
    t = np.arange(0.0, T + h, h)
    f = np.exp(-z * np.cosh(t) + _log_cosh(nu * t))
    prev = h * (np.sum(f) - 0.5 * f[0])
    for _ in range(14):
        # refine by evaluating midpoints only
        tm = t[:-1] + 0.5 * h
        fm = np.exp(-z * np.cosh(tm) + _log_cosh(nu * tm))
        cur = 0.5 * prev + 0.5 * h * np.sum(fm)
        h *= 0.5
        t = np.arange(0.0, T + h, h)
        if abs(cur - prev) <= 0.5 * tol * abs(cur):
            return complex(cur)
        prev = cur
    warnings.warn(
        f"bessel_k quadrature did not certify tolerance {tol:g} "
        f"for nu={nu}, z={z}; returning best refinement",
        AccuracyWarning,
        stacklevel=3,
    )
    return complex(prev)


def _bessel_k_asymptotic(nu: float, z: complex) -> complex:
    # K_nu(z) ~ sqrt(pi/2z) e^{-z} sum_k a_k, a_k = prod (4nu^2-(2j-1)^2)/(8z j);
    # summed to optimal truncation
    term = 1.0 + 0.0j
    acc = term
    fournu2 = 4.0 * nu * nu
    for k in range(1, 40):
        term = term * (fournu2 - (2 * k - 1) ** 2) / (8.0 * z * k)
        if abs(term) >= abs(acc) * 1e-1 and k > 4:
            break
        acc += term
        if abs(term) <= 1e-17 * abs(acc):
            break
    return cmath.sqrt(math.pi / (2.0 * z)) * cmath.exp(-z) * acc


def bessel_k(nu: float, z: float, tol: float = 1e-10) -> float:
    """Modified Bessel function of the second kind K_nu(z), z > 0.

    Direct quadrature of the cosh integral representation, uniform in
    fractional order; relative accuracy ``tol`` (default 1e-10) for
    z in [1e-6, 50], leading asymptotic branch above.
    Negative orders use the reflection K_nu = K_{-nu}.
    """
    nu = abs(float(nu))
    if not math.isfinite(nu):
        raise DomainError("bessel_k: order must be finite")
    z = float(z)
    if not z > 0.0:
        raise DomainError(f"bessel_k: z must be positive, got {z}")
    if z > _ASYMPTOTIC_Z:
        return float(_bessel_k_asymptotic(nu, z).real)
    return float(_bessel_k_quadrature(nu, complex(z), tol).real)


def _bessel_k_complex(nu: float, z: complex, tol: float = 1e-10) -> complex:
    """K_nu at complex argument with Re z > 0 (internal; used by green)."""
    nu = abs(float(nu))
    z = complex(z)
    if not z.real > 0.0:
        raise DomainError("bessel_k: need Re z > 0")
    if abs(z) > _ASYMPTOTIC_Z:
        return _bessel_k_asymptotic(nu, z)
    return _bessel_k_quadrature(nu, z, tol)


def _check_off_cut(omega: complex, what: str = "omega") -> complex:
    om = complex(omega)
    if om.imag == 0.0 and om.real <= 0.0:
        raise BranchCutError(f"{what} = {omega} lies on the branch cut (-inf, 0]")
    return om


def _radius(x) -> float:
    r = float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float))))
    if r < ORIGIN_RADIUS:
        raise SingularityError(
            f"evaluation at |x| = {r:.3e} < {ORIGIN_RADIUS:g}: the Green function "
            "is singular at the origin; use the Fourier-side representation"
        )
    return r


def c_of_omega(d: int, omega: complex) -> complex:
    """Coupling constant c(omega): the finite part of G_omega at the origin.

    d=2: (gamma - ln 2)/(2 pi) + ln(omega)/(4 pi);  d=3: sqrt(omega)/(4 pi).
    Principal branch; omega off (-inf, 0].
    """
    om = _check_off_cut(omega)
    if d == 2:
        val = (EULER_GAMMA - _LN2) / (2.0 * math.pi) + cmath.log(om) / (4.0 * math.pi)
    elif d == 3:
        val = cmath.sqrt(om) / (4.0 * math.pi)
    else:
        raise DomainError(f"dimension must be 2 or 3, got {d}")
    if isinstance(omega, (int, float)) and om.imag == 0.0:
        return val.real
    return val


def e_alpha(d: int, alpha: float):
    """Bound-state energy E_alpha, or None when no eigenvalue exists.

    d=2: 4 exp(-4 pi alpha - 2 gamma) for every alpha;
    d=3: (4 pi alpha)^2 for alpha < 0, absent for alpha >= 0.
    """
    if d == 2:
        val = 4.0 * math.exp(-4.0 * math.pi * alpha - 2.0 * EULER_GAMMA)
        # for enormous alpha the energy underflows below the representable
        # range; report it as absent rather than returning 0.0
        return val if val > 0.0 else None
    if d == 3:
        if alpha < 0.0:
            return (4.0 * math.pi * alpha) ** 2
        return None
    raise DomainError(f"dimension must be 2 or 3, got {d}")


def green(d: int, omega: complex, x) -> complex:
    """Green function G_omega(x) of (omega - Laplacian), x != 0.

    d=2: K_0(sqrt(omega)|x|)/(2 pi);  d=3: exp(-sqrt(omega)|x|)/(4 pi |x|).
    Accepts a point in R^d or a scalar radius |x|.
    """
    om = _check_off_cut(omega)
    r = _radius(x)
    sq = cmath.sqrt(om)
    if d == 2:
        val = _bessel_k_complex(0.0, sq * r) / (2.0 * math.pi)
    elif d == 3:
        val = cmath.exp(-sq * r) / (4.0 * math.pi * r)
    else:
        raise DomainError(f"dimension must be 2 or 3, got {d}")
    if isinstance(omega, (int, float)) and om.imag == 0.0:
        return val.real
    return val


def green_fourier(d: int, omega: complex, xi) -> complex:
    """Fourier symbol of G_omega: (2 pi)^{-d/2} / (omega + |xi|^2).

    Accepts a frequency vector or a scalar |xi|; broadcasts over arrays.
    """
    om = _check_off_cut(omega)
    if d not in (2, 3):
        raise DomainError(f"dimension must be 2 or 3, got {d}")
    xi = np.asarray(xi, dtype=float)
    if xi.ndim >= 1 and xi.shape[-1] == d and xi.ndim <= 2:
        ksq = np.sum(xi**2, axis=-1)
    else:
        ksq = xi**2
    out = (2.0 * math.pi) ** (-d / 2.0) / (om + ksq)
    if out.ndim == 0:
        return complex(out)
    return out


def frac_green_constant(d: int, beta: float) -> float:
    """Constant C(d, beta) = 2^{(2-beta-d)/2} / (pi^{d/2} Gamma(beta/2))."""
    return 2.0 ** ((2.0 - beta - d) / 2.0) / (math.pi ** (d / 2.0) * math.gamma(beta / 2.0))


def frac_green_closed(d: int, s: float, x) -> float:
    """Closed form of (1 - Laplacian)^{s/2} G_1 at x != 0, s in (0, 2).

    Equals C(d, 2-s) K_{(d+s-2)/2}(|x|) |x|^{(2-s-d)/2}.
    """
    if not (0.0 < s < 2.0):
        raise DomainError(f"s must lie in (0, 2), got {s}")
    if d not in (2, 3):
        raise DomainError(f"dimension must be 2 or 3, got {d}")
    r = _radius(x)
    C = frac_green_constant(d, 2.0 - s)
    return C * bessel_k((d + s - 2.0) / 2.0, r) * r ** ((2.0 - s - d) / 2.0)


@dataclass(frozen=True)
class SpectralConstants:
    """Dimension, coupling strength, and the derived bound-state energy.

    ``e_alpha`` is filled in automatically; when it exists the defining
    identity alpha + c(e_alpha) = 0 is verified to 1e-12 on construction.
    """

    d: int
    alpha: float
    e_alpha: float | None = field(default=None)
    euler_gamma: float = EULER_GAMMA

    def __post_init__(self):
        if self.d not in (2, 3):
            raise DomainError(f"dimension must be 2 or 3, got {self.d}")
        if self.e_alpha is None:
            object.__setattr__(self, "e_alpha", e_alpha(self.d, self.alpha))
        if self.e_alpha is not None:
            if not self.e_alpha > 0.0:
                raise DomainError("e_alpha must be positive when present")
            resid = abs(self.alpha + c_of_omega(self.d, self.e_alpha))
            scale = max(1.0, abs(self.alpha))
            if resid > 1e-12 * scale:
                raise DomainError(
                    f"alpha + c(e_alpha) = {resid:.3e} violates the defining identity"
                )
