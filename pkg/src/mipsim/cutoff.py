"""Smooth componentwise drift clamp F_A.

The scalar profile f_A is the identity on [-A, A], saturates at +-A
outside [-(A+1), A+1], and bridges (A, A+1) with the unique quintic
matching f(A) = A, f'(A) = 1, f''(A) = 0, f(A+1) = A, f'(A+1) = 0,
f''(A+1) = 0:

    f_A(A + t) = A + h(t),   h(t) = t - 6 t^3 + 8 t^4 - 3 t^5.

h has maximum 16/81 ~ 0.1975 (at t = 1/3) and derivative range
[-0.512, 1], so |f_A| <= A + 1 and |f_A'| <= 1 hold without rescaling
(validated numerically at construction). The map F_A applies f_A to each
component; oddness is exact because evaluation uses sign(v) * f_A(|v|).
A = inf yields the identity map (no clamping).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = ["CutoffFn", "eval_cutoff", "BRIDGE_COEFFS", "BRIDGE_MAX", "bridge_h", "bridge_h_prime"]

# h(t) = t - 6 t^3 + 8 t^4 - 3 t^5, ascending powers
BRIDGE_COEFFS = (0.0, 1.0, 0.0, -6.0, 8.0, -3.0)
# max_{[0,1]} h = h(1/3) = 16/81
BRIDGE_MAX = 16.0 / 81.0


def bridge_h(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return t * (1.0 + t * t * (-6.0 + t * (8.0 - 3.0 * t)))


def bridge_h_prime(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return 1.0 + t * t * (-18.0 + t * (32.0 - 15.0 * t))


@dataclass(frozen=True)
class CutoffFn:
    """Clamp level A > 0 (A = inf disables clamping)."""

    A: float
    coeffs: tuple = field(default=BRIDGE_COEFFS)

    def __post_init__(self):
        if not self.A > 0:
            raise DomainError("cutoff level A must be positive")
        if self.coeffs != BRIDGE_COEFFS:
            raise DomainError("only the frozen quintic bridge is supported")
        # |f'| <= 1 validated on a dense sample of the bridge derivative
        tt = np.linspace(0.0, 1.0, 4097)
        if float(np.max(np.abs(bridge_h_prime(tt)))) > 1.0 + 1e-12:
            raise DomainError("bridge derivative bound violated")

    @property
    def bound(self) -> float:
        """Hard bound on |f_A|: A + max h < A + 1."""
        return self.A + BRIDGE_MAX


def eval_cutoff(c: CutoffFn, v: np.ndarray) -> np.ndarray:
    """Componentwise f_A(v), exactly odd, any array shape."""
    v = np.asarray(v, dtype=float)
    if not math.isfinite(c.A):
        return v.copy()
    m = np.abs(v)
    out = np.where(m <= c.A, m, 0.0)
    mid = (m > c.A) & (m < c.A + 1.0)
    if np.any(mid):
        out[mid] = c.A + bridge_h(m[mid] - c.A)
    out[m >= c.A + 1.0] = c.A
    return np.sign(v) * out
