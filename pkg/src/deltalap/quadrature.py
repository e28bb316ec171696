"""Composite Gauss-Legendre panels on (0, inf) with a logarithmic split.

The half-line is split at ``split_point``; (0, split] is mapped by
lambda = split * exp(-v) and [split, inf) by lambda = split * exp(+v),
and unit panels in v are appended on each side until the last panel
contributes less than a safety fraction of tol times the accumulated
integral.  This handles lambda^{-s/2} endpoints and lambda^{-1-s/2}
tails uniformly in s.

The engine integrates vector-valued integrands: ``f(nodes)`` receives a
1-D array of lambda values and returns an array of shape
``(len(nodes), m)`` (or ``(len(nodes),)`` for scalar integrands).
Summation order is fixed, so results are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, QuadratureDivergenceError, QuadratureError

# stopping: a side is finished once two consecutive panel blocks each
# contribute less than _SAFETY * tol * |accumulated|; the geometric tail
# then sums to well under tol
_SAFETY = 0.02

# panels are evaluated in blocks to amortise per-call overhead; the block
# size does not affect node placement, only the stopping granularity
_BLOCK = 4

# plateau detection on the upper side: after this many blocks, block
# contributions whose ratios stay above _PLATEAU_RATIO indicate divergence
_PLATEAU_START = 10
_PLATEAU_RATIO = 0.98


@dataclass(frozen=True)
class QuadratureScheme:
    """Tolerances and panel layout for the half-line integrals."""

    tol: float = 1e-8
    panel_nodes: int = 16
    max_panels: int = 200
    split_point: float | None = None

    def __post_init__(self):
        if not (0.0 < self.tol <= 1e-4):
            raise DomainError(f"quadrature tol must lie in (0, 1e-4], got {self.tol}")
        if self.panel_nodes < 8:
            raise DomainError(f"panel_nodes must be >= 8, got {self.panel_nodes}")
        if self.max_panels < 1:
            raise DomainError("max_panels must be positive")

    def split_for(self, omega: complex) -> float:
        return self.split_point if self.split_point is not None else abs(omega)


def integrate_halfline(f, scheme: QuadratureScheme, omega: complex = 1.0):
    """Integrate f over (0, inf) with the split-log panel scheme.

    Returns the accumulated integral (scalar or vector, matching f's
    output).  Raises QuadratureError when max_panels is exhausted and
    QuadratureDivergenceError when upper-side panel contributions
    plateau instead of decaying.
    """
    split = scheme.split_for(omega)
    if not split > 0.0:
        raise DomainError("quadrature split point must be positive")
    gx, gw = np.polynomial.legendre.leggauss(scheme.panel_nodes)
    gx = 0.5 * gx + 0.5  # panel-local v in (0, 1)
    gw = 0.5 * gw

    acc = None
    acc_scale = 0.0

    for side in (-1.0, 1.0):
        prev_small = 0
        last_mag = None
        plateau_run = 0
        done = False
        blocks = range(0, scheme.max_panels, _BLOCK)
        for j0 in blocks:
            npan = min(_BLOCK, scheme.max_panels - j0)
            v = (gx[None, :] + (j0 + np.arange(npan))[:, None]).ravel()
            lam = split * np.exp(side * v)
            w = np.tile(gw, npan) * lam  # jacobian |d lambda / d v|
            vals = np.asarray(f(lam))
            contrib = np.tensordot(w, vals, axes=(0, 0))
            if acc is None:
                acc = np.zeros_like(contrib)
            acc = acc + contrib
            mag = float(np.max(np.abs(contrib)))
            acc_scale = max(acc_scale, float(np.max(np.abs(acc))))
            if mag <= _SAFETY * scheme.tol * max(acc_scale, 1e-300):
                prev_small += 1
                if prev_small >= 2:
                    done = True
                    break
            else:
                prev_small = 0
            if side > 0:
                if last_mag is not None and mag >= _PLATEAU_RATIO * last_mag:
                    plateau_run += 1
                else:
                    plateau_run = 0
                last_mag = mag
                if j0 // _BLOCK >= _PLATEAU_START and plateau_run >= 6:
                    raise QuadratureDivergenceError(
                        "upper-side panel contributions plateau; the integral "
                        "appears divergent",
                        residual=mag / max(acc_scale, 1e-300),
                    )
        if not done:
            raise QuadratureError(
                f"quadrature did not converge within {scheme.max_panels} panels "
                f"(side {'upper' if side > 0 else 'lower'})",
                residual=mag / max(acc_scale, 1e-300),
            )
    return acc
