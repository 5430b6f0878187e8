"""Independent closed-form oracles used by the test suite.

Everything here is derived from textbook formulas with elementary
arithmetic (no imports from the package under test), so agreement is
evidence rather than tautology.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def sphere_area(d: int) -> float:
    """|S^{d-1}|, the surface measure of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def gaussian_density(x: np.ndarray, sigma2: float, mean=0.0) -> np.ndarray:
    """Isotropic Gaussian density on R^d for points of shape (..., d)."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    quad = np.sum((x - mean) ** 2, axis=-1)
    return np.exp(-quad / (2.0 * sigma2)) / (2.0 * math.pi * sigma2) ** (d / 2.0)


def heat_evolved_variance(sigma2: float, t: float) -> float:
    """Variance after time t of the heat flow ∂_t u = Δu started from an
    isotropic Gaussian of variance sigma2 (unit diffusion constant 1 in
    each coordinate of Δ means variance grows by 2t)."""
    return sigma2 + 2.0 * t


# --- kernel magnitude laws |K(x)| = c r^{-gamma} ---------------------------

def kernel_power_law(family: str, d: int, s: float = 0.0, chi: float = 1.0):
    """(c, gamma) of the radial magnitude for the monomial families."""
    if family == "riesz":
        return (1.0 if s == 0.0 else s), s + 1.0
    if family == "coulomb":
        return (float(d - 2), float(d - 1)) if d >= 3 else (1.0, 1.0)
    if family == "biot-savart":
        return 1.0 / math.pi, 1.0
    if family == "keller-segel":
        return chi / sphere_area(d), float(d - 1)
    raise ValueError(family)


def lp_ball_norm(c: float, gamma: float, d: int, p: float) -> float:
    """‖c r^{-gamma}‖_{L^p} over the unit ball; finite iff gamma p < d."""
    if gamma * p >= d:
        raise ValueError("diverges near the origin")
    return (c**p * sphere_area(d) / (d - gamma * p)) ** (1.0 / p)


def lq_tail_norm(c: float, gamma: float, d: int, q: float) -> float:
    """‖c r^{-gamma}‖_{L^q} outside the unit ball; finite iff gamma q > d."""
    if q == math.inf:
        return c  # sup over r >= 1 of c r^{-gamma}
    if gamma * q <= d:
        raise ValueError("diverges at infinity")
    return (c**q * sphere_area(d) / (gamma * q - d)) ** (1.0 / q)


def biot_savart_gaussian_speed(r: np.ndarray, sigma2: float) -> np.ndarray:
    """|(K * g)(x)| at radius r for the vortex kernel x_perp / (pi |x|^2)
    acting on a centered isotropic Gaussian: the circulation theorem gives
    the Lamb-Oseen-type tangential speed (pi r)^{-1} * (mass within r)
    = (pi r)^{-1} (1 - exp(-r^2 / (2 sigma2)))."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    nz = r > 0
    out[nz] = (1.0 - np.exp(-r[nz] ** 2 / (2.0 * sigma2))) / (math.pi * r[nz])
    return out


# --- convergence-rate formulas (plain Fraction arithmetic) ------------------

def kappa(d: int, r) -> Fraction:
    if r == math.inf:
        return Fraction(d)
    fr = Fraction(r) if not isinstance(r, Fraction) else r
    return max(Fraction(d) * (1 - Fraction(2) / fr), Fraction(0))


def rho_standard(d: int, alpha: Fraction, zeta: Fraction, r) -> tuple:
    """(rho, admissible) for the moderate-regime rate."""
    k = kappa(d, r)
    rho = min(alpha * zeta, Fraction(1, 2) * (1 - alpha * (d + k)))
    admissible = 0 < alpha < Fraction(1, d + k)
    return rho, admissible


def rho_singular(
    d: int, alpha: Fraction, zeta: Fraction, beta: Fraction, r_tilde
) -> tuple:
    k = kappa(d, r_tilde)
    rho = min(alpha * zeta, Fraction(1, 2) - alpha * d)
    admissible = 0 < alpha < Fraction(1, d + 2 * beta + k)
    return rho, admissible


def alpha_star_standard(d: int, zeta: Fraction, r) -> Fraction:
    return Fraction(1, 1) / (2 * zeta + d + kappa(d, r))


def alpha_star_singular(d: int, zeta: Fraction) -> Fraction:
    return Fraction(1, 1) / (2 * zeta + 2 * d)


def gamma_sobolev(beta: Fraction, r_tilde: Fraction, delta: Fraction) -> Fraction:
    """Embedding trade-off exponent beta * r(r-1-delta) / ((r-delta)(r-1))."""
    r = r_tilde
    return beta * r * (r - 1 - delta) / ((r - delta) * (r - 1))


# --- brute-force particle drift --------------------------------------------

def brute_force_drift(positions: np.ndarray, pair_force) -> np.ndarray:
    """O(N^2) loop evaluation of (1/N) sum_k F(x_i - x_k), with the
    self-interaction term F(0) = 0 skipped explicitly."""
    n, d = positions.shape
    out = np.zeros((n, d))
    for i in range(n):
        acc = np.zeros(d)
        for k in range(n):
            if k == i:
                continue
            acc += pair_force(positions[i] - positions[k])
        out[i] = acc / n
    return out


# --- two-atom bounded-Lipschitz distance ------------------------------------

def two_dirac_kr(x: float, y: float) -> float:
    """KR distance between unit Diracs at scalar offsets x and y along one
    axis: the transport cost |x - y| capped by the sup-norm budget 2."""
    return min(abs(x - y), 2.0)
