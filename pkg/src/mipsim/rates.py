"""Closed-form convergence-rate calculators for the moderate-interaction
scaling.

All formulas are evaluated in exact rational arithmetic whenever the
inputs are integers, Fractions, or infinities, so unit checks can
assert equality of Fractions rather than float closeness.
"""

from dataclasses import dataclass
from fractions import Fraction
import math
from typing import NamedTuple

from .errors import DeltaOutOfRange, DomainError, EmptyWindow

__all__ = [
    "RateQuery",
    "RateValue",
    "BestAlpha",
    "SobolevRate",
    "theoretical_rate",
    "theoretical_rate_singular",
    "best_alpha",
    "sobolev_rate_exponent",
]

INF = math.inf


def _exactify(x):
    """Ints and Fractions stay exact; floats stay floats; inf allowed."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    x = float(x)
    if math.isinf(x) and x > 0:
        return INF
    if not math.isfinite(x):
        raise DomainError(f"parameter {x!r} is not a number")
    return x


def _check_prob_exponent(r, name: str):
    if r is not INF and r < 1:
        raise DomainError(f"{name} must be >= 1 or infinity, got {r}")


@dataclass(frozen=True)
class RateQuery:
    """Parameters of a rate evaluation.

    d: ambient dimension; alpha: mollifier scaling exponent; zeta:
    regularity factor of the limiting density (1 for bounded classes);
    r: the integrability exponent of the error norm (may be inf). The
    optional (beta, r_tilde, delta) describe the strong-singularity
    variant: Bessel smoothing order, its integrability exponent, and
    the interpolation offset.
    """

    d: int
    alpha: object
    zeta: object
    r: object
    beta: object = None
    r_tilde: object = None
    delta: object = None

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError("dimension d must be a positive integer")
        object.__setattr__(self, "d", int(self.d))
        alpha = _exactify(self.alpha)
        if alpha is INF or alpha < 0:
            raise DomainError(f"alpha must be finite and >= 0, got {self.alpha}")
        zeta = _exactify(self.zeta)
        if zeta is INF or not (0 < zeta <= 1):
            raise DomainError(f"zeta must lie in (0, 1], got {self.zeta}")
        r = _exactify(self.r)
        _check_prob_exponent(r, "r")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "zeta", zeta)
        object.__setattr__(self, "r", r)
        for name in ("beta", "r_tilde", "delta"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, _exactify(v))
        if self.r_tilde is not None:
            _check_prob_exponent(self.r_tilde, "r_tilde")
            if self.r_tilde is not INF and self.r_tilde <= self.d:
                raise DomainError(f"r_tilde must exceed d={self.d}, got {self.r_tilde}")
        if self.beta is not None and not (0 < self.beta < 1):
            raise DomainError(f"beta must lie in (0, 1), got {self.beta}")


class RateValue(NamedTuple):
    rho: object
    admissible: bool


class BestAlpha(NamedTuple):
    alpha_star: object
    rho_star: object


class SobolevRate(NamedTuple):
    gamma: object
    factor: object
    holder: bool | None


def _kappa(d: int, r) -> object:
    """Integrability penalty d(1 - 2/r) clipped at zero; d when r = inf."""
    if r is INF:
        return Fraction(d)
    k = d * (1 - Fraction(2) / r) if isinstance(r, Fraction) else d * (1.0 - 2.0 / r)
    zero = Fraction(0) if isinstance(k, Fraction) else 0.0
    return max(k, zero)


def _half(exact: bool):
    return Fraction(1, 2) if exact else 0.5


def theoretical_rate(q: RateQuery) -> RateValue:
    """Convergence exponent of the smoothed empirical density in the
    standard (locally integrable) kernel class:

        rho = min(alpha zeta, (1 - alpha (d + kappa_r)) / 2),

    admissible iff 0 < alpha < 1/(d + kappa_r).
    """
    kappa = _kappa(q.d, q.r)
    exact = isinstance(q.alpha, Fraction) and isinstance(q.zeta, Fraction) and isinstance(kappa, Fraction)
    half = _half(exact)
    rho = min(q.alpha * q.zeta, half * (1 - q.alpha * (q.d + kappa)))
    admissible = 0 < q.alpha < Fraction(1) / (q.d + kappa)
    return RateValue(rho, bool(admissible))


def theoretical_rate_singular(q: RateQuery) -> RateValue:
    """Convergence exponent in the strongly singular class:

        rho_tilde = min(alpha zeta, 1/2 - alpha d),

    admissible iff 0 < alpha < 1/(d + 2 beta + kappa_{r_tilde}).
    """
    if q.beta is None or q.r_tilde is None:
        raise DomainError("singular rate needs beta and r_tilde")
    kappa = _kappa(q.d, q.r_tilde)
    exact = all(isinstance(v, Fraction) for v in (q.alpha, q.zeta, q.beta, kappa))
    half = _half(exact)
    rho = min(q.alpha * q.zeta, half - q.alpha * q.d)
    admissible = 0 < q.alpha < Fraction(1) / (q.d + 2 * q.beta + kappa)
    return RateValue(rho, bool(admissible))


def best_alpha(
    d: int,
    zeta,
    r=None,
    *,
    singular: bool = False,
    beta=None,
    r_tilde=None,
) -> BestAlpha:
    """Scaling exponent maximizing the rate, with the attained rate.

    Standard class: balancing alpha zeta = (1 - alpha (d + kappa_r))/2
    gives alpha* = 1/(2 zeta + d + kappa_r). Singular class: balancing
    alpha zeta = 1/2 - alpha d gives alpha* = 1/(2 zeta + 2 d); at
    zeta = 1 this is 1/(2(d+1)). Raises EmptyWindow when the optimum
    is not strictly admissible.
    """
    if int(d) != d or d < 1:
        raise DomainError("dimension d must be a positive integer")
    d = int(d)
    zeta = _exactify(zeta)
    if zeta is INF or not (0 < zeta <= 1):
        raise DomainError(f"zeta must lie in (0, 1], got {zeta}")
    if singular:
        if beta is None or r_tilde is None:
            raise DomainError("singular best_alpha needs beta and r_tilde")
        alpha_star = Fraction(1) / (2 * zeta + 2 * d)
        query = RateQuery(d, alpha_star, zeta, INF, beta=beta, r_tilde=r_tilde)
        rho_star, admissible = theoretical_rate_singular(query)
        if not admissible:
            raise EmptyWindow(
                "optimal alpha falls outside the singular admissibility window"
            )
    else:
        if r is None:
            raise DomainError("standard best_alpha needs the norm exponent r")
        r = _exactify(r)
        _check_prob_exponent(r, "r")
        kappa = _kappa(d, r)
        alpha_star = Fraction(1) / (2 * zeta + d + kappa)
        rho_star, admissible = theoretical_rate(RateQuery(d, alpha_star, zeta, r))
        if not admissible:
            raise EmptyWindow("optimal alpha falls outside the admissibility window")
    return BestAlpha(alpha_star, rho_star)


def sobolev_rate_exponent(beta, r_tilde, delta, d: int | None = None) -> SobolevRate:
    """Effective smoothing order gamma transported through the
    interpolation offset delta:

        gamma = beta * r_tilde (r_tilde - 1 - delta)
                     / ((r_tilde - delta)(r_tilde - 1)),

    returned with the multiplier gamma/beta (< 1 for delta > 0). When d
    is supplied, also flags whether gamma > d/(r_tilde - delta), the
    threshold for uniform-continuity embedding of the smoothed field.
    """
    delta = _exactify(delta)
    if delta is INF or not (0 < delta < 1):
        raise DeltaOutOfRange(f"delta must lie in (0, 1), got {delta}")
    beta = _exactify(beta)
    if beta is INF or not (0 < beta < 1):
        raise DomainError(f"beta must lie in (0, 1), got {beta}")
    r_tilde = _exactify(r_tilde)
    _check_prob_exponent(r_tilde, "r_tilde")
    if r_tilde is INF:
        raise DomainError("sobolev_rate_exponent needs a finite r_tilde")
    if r_tilde <= 1 + delta:
        raise DomainError(f"r_tilde must exceed 1 + delta, got {r_tilde}")
    factor = (r_tilde * (r_tilde - 1 - delta)) / ((r_tilde - delta) * (r_tilde - 1))
    gamma = beta * factor
    holder = None
    if d is not None:
        if int(d) != d or d < 1:
            raise DomainError("dimension d must be a positive integer")
        holder = bool(gamma > Fraction(int(d)) / (r_tilde - delta)) if isinstance(
            gamma, Fraction
        ) and isinstance(r_tilde - delta, Fraction) else bool(
            float(gamma) > float(d) / float(r_tilde - delta)
        )
    return SobolevRate(gamma, factor, holder)
