"""Periodic uniform grids and complex fields with cached Fourier data.

The box is [-L/2, L/2)^d sampled at n points per axis (x_j = -L/2 + j h,
h = L/n); the frequency lattice is xi_k = 2 pi k / L, k in [-n/2, n/2)^d,
stored in FFT layout.  Transforms follow the unitary convention

    fhat(xi) = (2 pi)^{-d/2} int e^{+i x.xi} f(x) dx,
    f(x)     = (2 pi)^{-d/2} int e^{-i x.xi} fhat(xi) dxi,

discretised by the rectangle rule, so round trips are exact to roundoff and
Parseval holds in the form  sum |f|^2 h^d = sum |fhat|^2 (2 pi / L)^d.
"""

from __future__ import annotations

import json
import math
import os
from functools import cached_property

import numpy as np

from .errors import DomainError, SingularityError, TruncationWarning
from .specfun import ORIGIN_RADIUS, _check_off_cut

import warnings

__all__ = [
    "GridSpec",
    "Field",
    "lp_norm",
    "apply_multiplier",
    "sample_green",
    "point_eval_zero",
    "save_field",
    "load_field",
]


class GridSpec:
    """Uniform periodic grid over [-L/2, L/2)^d with n (power of two) per axis."""

    def __init__(self, d: int, n: int, L: float):
        if d not in (2, 3):
            raise DomainError(f"dimension must be 2 or 3, got {d}")
        if n < 8 or (n & (n - 1)) != 0:
            raise DomainError(f"n must be a power of two >= 8, got {n}")
        if not L > 0:
            raise DomainError(f"box length must be positive, got {L}")
        self.d = int(d)
        self.n = int(n)
        self.L = float(L)
        self.h = self.L / self.n
        self.dxi = 2.0 * math.pi / self.L

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def size(self):
        return self.n**self.d

    @cached_property
    def xi_1d(self):
        """Frequency values along one axis, FFT layout."""
        return 2.0 * math.pi * np.fft.fftfreq(self.n, d=1.0 / self.n) / self.L

    @cached_property
    def x_1d(self):
        return -self.L / 2.0 + self.h * np.arange(self.n)

    @cached_property
    def xi_mesh(self):
        return np.meshgrid(*([self.xi_1d] * self.d), indexing="ij")

    @cached_property
    def x_mesh(self):
        return np.meshgrid(*([self.x_1d] * self.d), indexing="ij")

    @cached_property
    def ksq(self):
        """|xi|^2 on the lattice."""
        return sum(g**2 for g in self.xi_mesh)

    @cached_property
    def radius(self):
        """|x| on the lattice."""
        return np.sqrt(sum(g**2 for g in self.x_mesh))

    @cached_property
    def _phase(self):
        # e^{+i (L/2) xi_k} per axis, outer product over axes; absorbs the
        # x_0 = -L/2 offset into the plain DFT
        p = np.exp(1j * (self.L / 2.0) * self.xi_1d)
        P = p
        for _ in range(self.d - 1):
            P = np.multiply.outer(P, p)
        return P

    @cached_property
    def radial_ksq(self):
        """(unique |xi|^2 values, multiplicities, inverse index into them).

        Rank-one quadratures only ever see |xi|^2, so collapsing the lattice
        to its distinct radii turns O(n^d)-per-node work into O(#radii).
        """
        u, inv, cnt = np.unique(
            self.ksq.ravel(), return_inverse=True, return_counts=True
        )
        return u, cnt.astype(float), inv.astype(np.int32)

    def coefficients_of(self, values: np.ndarray) -> np.ndarray:
        c = np.fft.ifftn(values) / self._phase
        c *= self.size * self.h**self.d * (2.0 * math.pi) ** (-self.d / 2.0)
        return c

    def values_of(self, coefficients: np.ndarray) -> np.ndarray:
        v = np.fft.fftn(coefficients * self._phase)
        v *= self.dxi**self.d * (2.0 * math.pi) ** (-self.d / 2.0)
        return v

    def radial_profile(self, coefficients: np.ndarray) -> np.ndarray:
        """Sum of coefficients over each distinct |xi|^2 shell."""
        _, _, inv = self.radial_ksq
        flat = coefficients.ravel()
        re = np.bincount(inv, weights=flat.real)
        im = np.bincount(inv, weights=flat.imag)
        return re + 1j * im

    def __eq__(self, other):
        return (
            isinstance(other, GridSpec)
            and (self.d, self.n, self.L) == (other.d, other.n, other.L)
        )

    def __hash__(self):
        return hash((self.d, self.n, self.L))

    def __repr__(self):
        return f"GridSpec(d={self.d}, n={self.n}, L={self.L})"


class Field:
    """Complex samples on a GridSpec together with their Fourier coefficients.

    Immutable after construction.  Either representation may be supplied;
    the other is synthesised lazily on first access (the transforms are
    exact inverses, so consistency is automatic).
    """

    __slots__ = ("grid", "_values", "_coefficients")

    def __init__(self, grid: GridSpec, values=None, coefficients=None):
        if values is None and coefficients is None:
            raise DomainError("a Field needs values or coefficients")
        self.grid = grid
        self._values = values
        self._coefficients = coefficients
        for a in (values, coefficients):
            if a is not None:
                a.flags.writeable = False

    @classmethod
    def from_values(cls, grid: GridSpec, values) -> "Field":
        v = np.array(values, dtype=complex).reshape(grid.shape)
        return cls(grid, values=v)

    @classmethod
    def from_coefficients(cls, grid: GridSpec, coefficients) -> "Field":
        c = np.array(coefficients, dtype=complex).reshape(grid.shape)
        return cls(grid, coefficients=c)

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            v = self.grid.values_of(self._coefficients)
            v.flags.writeable = False
            self._values = v
        return self._values

    @property
    def coefficients(self) -> np.ndarray:
        if self._coefficients is None:
            c = self.grid.coefficients_of(self._values)
            c.flags.writeable = False
            self._coefficients = c
        return self._coefficients

    def __add__(self, other):
        self._check(other)
        if self._coefficients is not None and other._coefficients is not None:
            return Field.from_coefficients(
                self.grid, self.coefficients + other.coefficients
            )
        return Field.from_values(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        if self._coefficients is not None and other._coefficients is not None:
            return Field.from_coefficients(
                self.grid, self.coefficients - other.coefficients
            )
        return Field.from_values(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        if self._coefficients is not None:
            return Field.from_coefficients(self.grid, self.coefficients * scalar)
        return Field.from_values(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def _check(self, other):
        if self.grid != other.grid:
            raise DomainError("fields live on different grids")

    def norm2(self) -> float:
        """L^2 norm (rectangle rule; via Parseval when only coefficients exist)."""
        if self._values is None:
            g = self.grid
            return float(
                math.sqrt(np.sum(np.abs(self._coefficients) ** 2) * g.dxi**g.d)
            )
        return lp_norm(self, 2.0)

    def inner(self, other: "Field") -> complex:
        """Sesquilinear L^2 inner product <self, other>."""
        self._check(other)
        if self._values is not None and other._values is not None:
            return complex(
                np.vdot(other.values, self.values) * self.grid.h**self.grid.d
            )
        g = self.grid
        return complex(
            np.vdot(other.coefficients, self.coefficients) * g.dxi**g.d
        )


def lp_norm(f: Field, p: float) -> float:
    """Discrete L^p norm (sum |f|^p h^d)^{1/p}; p = inf gives max |f|."""
    if p != math.inf and p < 1.0:
        raise DomainError(f"p must be >= 1, got {p}")
    a = np.abs(f.values)
    if p == math.inf:
        return float(a.max())
    hd = f.grid.h**f.grid.d
    if p == 2.0:
        return float(math.sqrt(np.sum(a * a) * hd))
    return float(np.sum(a**p) * hd) ** (1.0 / p)


def apply_multiplier(f: Field, m) -> Field:
    """Apply a Fourier multiplier: coefficients scaled by m(xi) pointwise.

    ``m`` is either an ndarray on the lattice or a callable receiving the
    d frequency meshes, e.g. ``lambda X, Y: X**2 + Y**2``.
    """
    M = m(*f.grid.xi_mesh) if callable(m) else np.asarray(m)
    M = np.broadcast_to(M, f.grid.shape)
    bad = ~np.isfinite(M)
    if bad.any():
        idx = np.unravel_index(np.argmax(bad), f.grid.shape)
        xi = tuple(float(f.grid.xi_1d[i]) for i in idx)
        raise DomainError(f"multiplier is not finite at frequency xi = {xi}")
    return Field.from_coefficients(f.grid, f.coefficients * M)


def sample_green(grid: GridSpec, omega: complex) -> Field:
    """Band-limited Green function: inverse transform of the symbol on the lattice.

    Finite at x = 0 by construction; matches the closed form for
    h << |x| << L/2 up to O(h^2) plus an exponentially small box error.
    """
    om = _check_off_cut(omega)
    if np.sqrt(complex(om)).real < 5.0 / grid.L:
        warnings.warn(
            f"Re sqrt(omega) = {np.sqrt(complex(om)).real:.3g} < 5/L = {5.0/grid.L:.3g}: "
            "the Green function does not decay inside the box",
            TruncationWarning,
            stacklevel=2,
        )
    coeff = (2.0 * math.pi) ** (-grid.d / 2.0) / (om + grid.ksq)
    return Field.from_coefficients(grid, coeff)


def point_eval_zero(f: Field) -> complex:
    """Trigonometric interpolation of f at x = 0.

    Equals (2 pi)^{-d/2} (2 pi / L)^d * sum of coefficients, which coincides
    with the grid sample when the origin is a lattice point (it always is
    for even n).  Accuracy at 0 is the caller's concern.
    """
    g = f.grid
    return complex(
        np.sum(f.coefficients)
        * g.dxi**g.d
        * (2.0 * math.pi) ** (-g.d / 2.0)
    )


def save_field(f: Field, path: str) -> None:
    """Write values as little-endian complex64, row-major, with a JSON sidecar."""
    f.values.astype("<c8").tofile(path)
    sidecar = {
        "d": f.grid.d,
        "n": f.grid.n,
        "L": f.grid.L,
        "layout": "row-major",
        "dtype": "complex64-le",
    }
    side_path = path + ".json"
    tmp = side_path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(sidecar, fh, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, side_path)


def load_field(path: str) -> Field:
    with open(path + ".json") as fh:
        meta = json.load(fh)
    grid = GridSpec(meta["d"], meta["n"], meta["L"])
    raw = np.fromfile(path, dtype="<c8").astype(complex).reshape(grid.shape)
    return Field.from_values(grid, raw)
