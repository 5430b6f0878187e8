"""Interaction kernel catalog.

Each kernel is an odd vector field K: R^d \\ {0} -> R^d driving the drift
term -div(u K*u) of the limiting equation and the pairwise forces of the
particle system. The catalog covers:

  * zero            K = 0 (pure heat baseline)
  * riesz           K = -+ grad V_s, V_s(x) = |x|^-s (s = 0: -log|x|);
                    repulsive K = s x/|x|^{s+2}, attractive its negative,
                    with the s factor read as 1 in the s = 0 log case
  * coulomb         K = -grad V_C, V_C = |x|^{-(d-2)} for d >= 3 and
                    -log|x| for d in {1, 2} (bare gradient, no surface
                    normalization)
  * biot-savart     K = (1/pi) x_perp/|x|^2 in d = 2, x_perp = (-x2, x1);
                    merely repulsive: x . K = 0
  * keller-segel    K = -(chi/|S^{d-1}|) x/|x|^d, the attractive chemotaxis
                    kernel normalized so the induced chemical field c
                    solves -Delta c = u; with mass-1 data in d = 2 the
                    global-existence threshold is chi = 8 pi
  * attractive-repulsive
                    K = grad V with V(r) = Va r^-a - Vb r^-b (a > b > 0),
                    a Lennard-Jones-type two-power potential

Fourier symbols use the convention F[f](xi) = int f(x) exp(-i xi.x) dx, so
convolution is a plain product and d/dx_j maps to i xi_j.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import (
    DivergentNorm,
    DomainError,
    OutOfCatalog,
    QuadratureFailure,
    UnsupportedSymbol,
)

__all__ = [
    "KernelSpec",
    "AssumptionReport",
    "KernelNorms",
    "FAMILIES",
    "eval_kernel",
    "fourier_symbol",
    "kernel_norms",
    "lemma1_constant",
    "assumption_report",
    "radial_profile",
    "sphere_area",
]

FAMILIES = (
    "zero",
    "riesz",
    "coulomb",
    "biot-savart",
    "keller-segel",
    "attractive-repulsive",
)


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^{d-1}."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


@dataclass(frozen=True)
class KernelSpec:
    """Validated kernel choice; construction rejects out-of-catalog input."""

    family: str
    d: int
    s: float | None = None
    attractive: bool = False
    chi: float | None = None
    a: float | None = None
    b: float | None = None
    va: float | None = None
    vb: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise OutOfCatalog(f"unknown kernel family {self.family!r}")
        if not isinstance(self.d, int) or self.d < 1:
            raise OutOfCatalog("dimension d must be a positive integer")
        f = self.family
        if f == "riesz":
            if self.s is None:
                raise OutOfCatalog("riesz requires the order s")
            if not 0.0 <= self.s < self.d - 1:
                # local integrability of x/|x|^{s+2} needs s + 1 < d
                raise OutOfCatalog(
                    f"riesz order s={self.s} outside [0, d-1) for d={self.d}"
                )
        elif f == "biot-savart":
            if self.d != 2:
                raise OutOfCatalog("biot-savart is only defined in d = 2")
        elif f == "keller-segel":
            if self.chi is None or self.chi <= 0:
                raise OutOfCatalog("keller-segel requires chi > 0")
        elif f == "attractive-repulsive":
            if None in (self.a, self.b, self.va, self.vb):
                raise OutOfCatalog(
                    "attractive-repulsive requires a, b, va, vb"
                )
            if not (self.a > self.b > 0):
                raise OutOfCatalog("attractive-repulsive requires a > b > 0")
            if self.va <= 0 or self.vb <= 0:
                raise OutOfCatalog("attractive-repulsive requires va, vb > 0")


@dataclass(frozen=True)
class RadialProfile:
    """Scalar radial law of a kernel: K(x) = magnitude(|x|) * direction.

    direction is x/|x| when perp is False, else the rotated unit vector
    (-x2, x1)/|x| (Biot-Savart). sing/decay are the power-law exponents of
    |magnitude| near 0 and infinity.
    """

    magnitude: Callable[[np.ndarray], np.ndarray]
    perp: bool
    sing: float
    decay: float


def radial_profile(spec: KernelSpec) -> RadialProfile:
    f, d = spec.family, spec.d
    if f == "zero":
        return RadialProfile(lambda r: np.zeros_like(r), False, 0.0, math.inf)
    if f == "riesz":
        s = spec.s
        coef = (1.0 if s == 0.0 else s) * (-1.0 if spec.attractive else 1.0)
        return RadialProfile(lambda r: coef * r ** (-(s + 1.0)), False, s + 1.0, s + 1.0)
    if f == "coulomb":
        if d >= 3:
            c, g = float(d - 2), float(d - 1)
        else:
            c, g = 1.0, 1.0
        return RadialProfile(lambda r: c * r ** (-g), False, g, g)
    if f == "biot-savart":
        return RadialProfile(lambda r: (1.0 / math.pi) / r, True, 1.0, 1.0)
    if f == "keller-segel":
        c = spec.chi / sphere_area(d)
        g = float(d - 1)
        return RadialProfile(lambda r: -c * r ** (-g) if g else -c * np.ones_like(r), False, g, g)
    # attractive-repulsive: grad of Va r^-a - Vb r^-b
    a, b, va, vb = spec.a, spec.b, spec.va, spec.vb
    return RadialProfile(
        lambda r: -a * va * r ** (-(a + 1.0)) + b * vb * r ** (-(b + 1.0)),
        False,
        a + 1.0,
        b + 1.0,
    )


def eval_kernel(spec: KernelSpec, x: np.ndarray) -> np.ndarray:
    """Evaluate K at points x of shape (..., d)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.d:
        raise DomainError(f"points have dimension {x.shape[-1]}, kernel has d={spec.d}")
    if spec.family == "zero":
        return np.zeros_like(x)
    r = np.sqrt(np.sum(x * x, axis=-1))
    if np.any(r == 0.0):
        raise DomainError("singular kernel evaluated at the origin")
    prof = radial_profile(spec)
    scale = prof.magnitude(r) / r
    if prof.perp:
        out = np.empty_like(x)
        out[..., 0] = -x[..., 1] * scale
        out[..., 1] = x[..., 0] * scale
        return out
    return x * scale[..., None]


def _riesz_potential_constant(d: int, s: float) -> float:
    """F[|x|^-s](xi) = C |xi|^{s-d} for 0 < s < d; the s = 0 value is the
    limit constant of the unit kernel x/|x|^2 = lim s^{-1} K_s."""
    if s == 0.0:
        return 2.0 ** (d - 1) * math.pi ** (d / 2.0) * math.gamma(d / 2.0)
    # gamma-function ratio in log space via Gamma(s/2) = Gamma(s/2 + 1)/(s/2):
    # s/2 itself can underflow to zero for subnormal s, log(s) cannot
    log_gamma_half_s = math.lgamma(s / 2.0 + 1.0) - (math.log(s) - math.log(2.0))
    log_ratio = math.lgamma((d - s) / 2.0) - log_gamma_half_s
    return 2.0 ** (d - s) * math.pi ** (d / 2.0) * math.exp(log_ratio)


def fourier_symbol(spec: KernelSpec, xi: np.ndarray) -> np.ndarray:
    """Symbol sigma(xi) with K*f = F^{-1}[sigma F[f]], sigma(0) = 0.

    All catalog symbols are odd, purely imaginary multiples of xi (or of
    xi_perp for Biot-Savart), which makes the zero mode vanish: every
    kernel here is mean-free in the principal-value sense.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != spec.d:
        raise DomainError(f"frequencies have dimension {xi.shape[-1]}, kernel has d={spec.d}")
    f, d = spec.family, spec.d
    if f == "attractive-repulsive":
        raise UnsupportedSymbol(
            "attractive-repulsive kernels have no Fourier symbol; only the "
            "particle drift path applies"
        )
    out = np.zeros(xi.shape, dtype=complex)
    if f == "zero":
        return out
    k2 = np.sum(xi * xi, axis=-1)
    nz = k2 > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        if f == "riesz":
            sgn = 1.0 if spec.attractive else -1.0
            C = _riesz_potential_constant(d, spec.s)
            mul = np.where(nz, sgn * 1j * C * k2 ** ((spec.s - d) / 2.0), 0.0)
            return xi * mul[..., None]
        if f == "coulomb":
            if d == 1:
                # K = 1/x, F[pv 1/x] = -i pi sgn(xi)
                out[..., 0] = np.where(nz, -1j * math.pi * np.sign(xi[..., 0]), 0.0)
                return out
            C = 2.0 * math.pi if d == 2 else _riesz_potential_constant(d, float(d - 2))
            mul = np.where(nz, -1j * C / k2, 0.0)
            return xi * mul[..., None]
        if f == "biot-savart":
            mul = np.where(nz, -2j / k2, 0.0)
            out[..., 0] = -xi[..., 1] * mul
            out[..., 1] = xi[..., 0] * mul
            return out
        # keller-segel, any d: -(chi/|S^{d-1}|) x/|x|^d  <->  +i chi xi/|xi|^2
        mul = np.where(nz, 1j * spec.chi / k2, 0.0)
        return xi * mul[..., None]


@dataclass(frozen=True)
class KernelNorms:
    inside: float   # ||K||_{L^p(B_1)}
    outside: float  # ||K||_{L^q(B_1^c)}
    p: float
    q: float


def _power_norm_inside(c: float, g: float, d: int, p: float) -> float:
    """L^p norm over B_1 of c r^-g (c > 0)."""
    if p == math.inf:
        if g > 0:
            raise DivergentNorm("kernel unbounded near the origin")
        return c
    if p * g >= d:
        raise DivergentNorm(f"L^{p} norm over B_1 diverges (p*g = {p * g} >= d = {d})")
    return (c ** p * sphere_area(d) / (d - p * g)) ** (1.0 / p)


def _power_norm_outside(c: float, g: float, d: int, q: float) -> float:
    """L^q norm over B_1^c of c r^-g (c > 0, g >= 0)."""
    if q == math.inf:
        return c
    if q * g <= d:
        raise DivergentNorm(f"L^{q} norm over B_1^c diverges (q*g = {q * g} <= d = {d})")
    return (c ** q * sphere_area(d) / (q * g - d)) ** (1.0 / q)


_QUAD_DEFAULTS = dict(limit=200, epsabs=1e-14, epsrel=1e-12)


def _radial_quad_norm(prof: RadialProfile, e: float, d: int, lo: float, hi: float, quad: dict) -> float:
    """Numerical route for (int_{lo<|x|<hi} |K|^e dx)^{1/e}, independent of
    the closed forms it is cross-checked against."""
    integrand = lambda r: abs(prof.magnitude(np.array([r]))[0]) ** e * r ** (d - 1)
    val, err = integrate.quad(integrand, lo, hi, **quad)
    if not np.isfinite(val) or err > 1e-8 * val + 1e-13:
        raise QuadratureFailure("radial norm quadrature did not converge")
    return (sphere_area(d) * val) ** (1.0 / e)


def kernel_norms(spec: KernelSpec, p: float, q: float, quad: dict | None = None) -> KernelNorms:
    """Lebesgue norms of |K| inside and outside the unit ball.

    Power-law families use closed-form radial integrals cross-checked
    against an independent adaptive quadrature (mismatch beyond 1e-8
    relative raises QuadratureFailure); two-power potentials have no
    closed form and use quadrature alone.
    """
    if p < 1 or q < 1:
        raise DomainError("Lebesgue exponents must satisfy p, q >= 1")
    quad = dict(_QUAD_DEFAULTS, **(quad or {}))
    f, d = spec.family, spec.d
    if f == "zero":
        return KernelNorms(0.0, 0.0, p, q)
    prof = radial_profile(spec)
    if f == "attractive-repulsive":
        return KernelNorms(
            _ar_norm(spec, p, inside=True),
            _ar_norm(spec, q, inside=False),
            p,
            q,
        )
    c = float(abs(prof.magnitude(np.array([1.0]))[0]))
    g = prof.sing  # single power law: sing == decay for these families
    inside = _power_norm_inside(c, g, d, p)
    outside = _power_norm_outside(c, g, d, q)
    if p != math.inf:
        check = _radial_quad_norm(prof, p, d, 0.0, 1.0, quad)
        if abs(check - inside) > 1e-8 * inside:
            raise QuadratureFailure(
                f"inside-norm quadrature {check!r} disagrees with closed form {inside!r}"
            )
    if q != math.inf:
        check = _radial_quad_norm(prof, q, d, 1.0, np.inf, quad)
        if abs(check - outside) > 1e-8 * outside:
            raise QuadratureFailure(
                f"outside-norm quadrature {check!r} disagrees with closed form {outside!r}"
            )
    return KernelNorms(inside, outside, p, q)


def _ar_norm(spec: KernelSpec, p: float, inside: bool) -> float:
    d = spec.d
    prof = radial_profile(spec)
    if p == math.inf:
        if inside:
            raise DivergentNorm("two-power kernel unbounded near the origin")
        grid = np.linspace(1.0, 50.0, 20001)
        return float(np.max(np.abs(prof.magnitude(grid))))
    if inside and p * prof.sing >= d:
        raise DivergentNorm("L^p norm over B_1 diverges for the two-power kernel")
    if not inside and p * prof.decay <= d:
        raise DivergentNorm("L^q norm over B_1^c diverges for the two-power kernel")
    integrand = lambda r: abs(prof.magnitude(np.array([r]))[0]) ** p * r ** (d - 1)
    # sign change of the magnitude at r0 = (a va / (b vb))^{1/(a-b)}
    r0 = (spec.a * spec.va / (spec.b * spec.vb)) ** (1.0 / (spec.a - spec.b))
    opts = dict(limit=200, epsabs=1e-13, epsrel=1e-10)
    if inside:
        pts = [r0] if 0.0 < r0 < 1.0 else None
        val, err = integrate.quad(integrand, 0.0, 1.0, points=pts, **opts)
    else:
        val1, err1 = (0.0, 0.0)
        lo = 1.0
        if r0 > 1.0:
            val1, err1 = integrate.quad(integrand, 1.0, r0, **opts)
            lo = r0
        val2, err2 = integrate.quad(integrand, lo, np.inf, **opts)
        val, err = val1 + val2, err1 + err2
    if not np.isfinite(val) or err > 1e-6 * val + 1e-10:
        raise QuadratureFailure("two-power norm quadrature did not converge")
    return (sphere_area(d) * val) ** (1.0 / p)


def _conjugate(p: float) -> float:
    if p == 1.0:
        return math.inf
    if p == math.inf:
        return 1.0
    return p / (p - 1.0)


def lemma1_constant(spec: KernelSpec, r: float, quad: dict | None = None) -> float:
    """Constant C with ||K*f||_inf <= C ||f||_{L^1 cap L^r}, computed as
    ||K||_{L^p(B_1)} + ||K||_{L^q(B_1^c)} by the Hoelder split.

    p is the midpoint of its admissible range [1, p_sup); the admissible
    q-range (q_inf, inf] has no midpoint so q = q_inf + 1 is used. Any
    admissible pair gives a valid (if not minimal) constant; a larger C
    only enlarges the cutoff's identity region.
    """
    if spec.family == "zero":
        return 0.0
    rep = assumption_report(spec)
    if not rep.locally_integrable:
        raise DomainError("kernel is not locally integrable; no uniform convolution bound")
    p = math.inf if rep.p_sup == math.inf else (1.0 + rep.p_sup) / 2.0
    q = math.inf if rep.q_inf == math.inf else rep.q_inf + 1.0
    need = max(_conjugate(p), _conjugate(q))
    if r < need:
        raise DomainError(
            f"r = {r} too small for the Hoelder split; need r >= {need}"
        )
    n = kernel_norms(spec, p, q, quad)
    return n.inside + n.outside


@dataclass(frozen=True)
class AssumptionReport:
    """Admissibility metadata encoding the mapping-analysis status of the
    kernel: integrability exponents, regularity class, and the widest
    scaling-exponent window the convergence theory supports."""

    family: str
    d: int
    locally_integrable: bool
    singular_class: bool
    p_sup: float           # p admissible in [1, p_sup)
    q_inf: float           # q admissible in (q_inf, inf]
    r_admissible_min: float  # reference norm L^1 cap L^r needs r > this
    alpha_sup: float       # widest open scaling window (0, alpha_sup)
    best_rho: float | None
    sigma_window: tuple[float, float] | None  # singular class: beta - d/r_tilde range
    notes: tuple[str, ...] = ()

    def zeta_of_z(self, z: float) -> float:
        """Drift regularity gain zeta = 1 - d/z for z in (d, inf]; fixed at
        1 for singular-class kernels."""
        if self.singular_class:
            return 1.0
        if z <= self.d:
            raise DomainError(f"z must exceed d = {self.d}")
        return 1.0 if z == math.inf else 1.0 - self.d / z


def assumption_report(spec: KernelSpec) -> AssumptionReport:
    f, d = spec.family, spec.d
    prof = radial_profile(spec)
    sing, dec = prof.sing, prof.decay
    integrable = sing < d
    p_sup = math.inf if sing == 0.0 else d / sing
    q_inf = math.inf if dec == 0.0 else d / dec
    notes: list[str] = []
    if f == "attractive-repulsive":
        if not integrable:
            notes.append(
                f"locally integrable only for d >= {math.ceil(sing) + 1}"
                f" (singularity exponent a+1 = {sing})"
            )
        notes.append("no Fourier symbol; particle drift path only")
    # effective Riesz order of the short-range singularity
    s_eff = sing - 1.0
    singular = integrable and (d - 2.0 < s_eff < d - 1.0) and f != "zero"
    if f == "zero":
        return AssumptionReport(f, d, True, False, math.inf, math.inf, 1.0,
                                1.0, None, None, ("trivial kernel",))
    if not integrable:
        return AssumptionReport(f, d, False, False, p_sup, q_inf, math.inf,
                                0.0, None, None, tuple(notes))
    if singular:
        # L^1(B_1) only; zeta = 1 with Sobolev data, window on beta - d/r_tilde
        sigma_lo = 2.0 - d + s_eff
        alpha_sup = 1.0 / (2.0 * (s_eff + 2.0))
        best = 1.0 / (2.0 * (d + 1.0))
        notes.append("requires Sobolev-class initial data with beta - d/r_tilde above the window floor")
        return AssumptionReport(f, d, True, True, p_sup, q_inf, float(d),
                                alpha_sup, best, (sigma_lo, 1.0), tuple(notes))
    # standard class
    if sing == 0.0:
        r_min, alpha_sup, best = 1.0, 1.0 / d, None
        notes.append("bounded kernel; convolution bound holds with r = inf")
    else:
        r_min = d / (d - sing)  # = max(p', q') at the widest (p, q)
        alpha_sup = 1.0 / max(float(d), 2.0 * s_eff + 2.0)
        best = 1.0 / (2.0 * (d + 1.0)) if s_eff == d - 2.0 else None
    return AssumptionReport(f, d, True, False, p_sup, q_inf, r_min,
                            alpha_sup, best, None, tuple(notes))
