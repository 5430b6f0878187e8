"""Compactly supported bump mollifier and the tabulated regularized force.

The mollifier is the classical smooth bump

    V(x) = norm_const * exp(-1 / (1 - |x/R|^2))   for |x| < R, else 0,

normalized to unit mass, and its moderate-interaction scaling

    V^N(x) = N^{d alpha} V(N^{alpha} x),

supported in the ball of radius R N^{-alpha}. The particle drift uses the
regularized kernel K*V^N, which is radial-profile times direction for every
catalog kernel (rotation equivariance: V is radial and K is either radial
or the rotated-radial Biot-Savart field, so the convolution inherits the
same direction law exactly). It is therefore tabulated on radii and read
back by linear interpolation, switching to the raw kernel beyond a radius
where the two are validated to agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureFailure
from .kernels import KernelSpec, assumption_report, radial_profile, sphere_area

__all__ = [
    "MollifierSpec",
    "ForceTable",
    "eval_V",
    "eval_VN",
    "build_force_table",
    "interaction_force",
    "convolved_force_magnitude",
]


def _profile_integral(d: int) -> float:
    """int_0^1 exp(-1/(1-t^2)) t^{d-1} dt, the radial factor of the bump mass."""
    val, err = integrate.quad(
        lambda t: math.exp(-1.0 / (1.0 - t * t)) * t ** (d - 1), 0.0, 1.0,
        epsabs=1e-15, epsrel=1e-13, limit=200,
    )
    if err > 1e-12 * val:
        raise QuadratureFailure("bump normalization quadrature did not converge")
    return val


@dataclass(frozen=True)
class MollifierSpec:
    """Scaled bump V^N; norm_const is the cached normalization of V."""

    d: int
    R: float
    alpha: float
    N: int
    norm_const: float = field(default=0.0)

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 1:
            raise DomainError("dimension d must be a positive integer")
        if not self.R > 0:
            raise DomainError("support radius R must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("scaling exponent alpha must lie in (0, 1)")
        if not isinstance(self.N, int) or self.N < 1:
            raise DomainError("particle count N must be a positive integer >= 1")
        if self.norm_const == 0.0:
            z = self.R ** self.d * sphere_area(self.d) * _profile_integral(self.d)
            object.__setattr__(self, "norm_const", 1.0 / z)

    @property
    def support_radius(self) -> float:
        """Support radius of V^N: R * N^{-alpha}."""
        return self.R * self.N ** (-self.alpha)

    def radial_VN(self, rho: np.ndarray) -> np.ndarray:
        """V^N as a function of radius (vectorized)."""
        rho = np.asarray(rho, dtype=float)
        t = (self.N ** self.alpha / self.R) * rho
        out = np.zeros_like(t)
        inside = t < 1.0
        with np.errstate(divide="ignore"):
            out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
        return self.N ** (self.d * self.alpha) * self.norm_const * out


def eval_V(spec: MollifierSpec, x: np.ndarray) -> np.ndarray:
    """Unscaled bump V at points x of shape (..., d)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.d:
        raise DomainError(f"points have dimension {x.shape[-1]}, mollifier has d={spec.d}")
    t2 = np.sum((x / spec.R) ** 2, axis=-1)
    out = np.zeros_like(t2)
    inside = t2 < 1.0
    with np.errstate(divide="ignore"):
        out[inside] = spec.norm_const * np.exp(-1.0 / (1.0 - t2[inside]))
    return out


def eval_VN(spec: MollifierSpec, x: np.ndarray) -> np.ndarray:
    """Scaled bump V^N(x) = N^{d alpha} V(N^{alpha} x)."""
    x = np.asarray(x, dtype=float)
    scale = spec.N ** spec.alpha
    return spec.N ** (spec.d * spec.alpha) * eval_V(spec, scale * x)


@dataclass(frozen=True)
class ForceTable:
    """Radial table of the regularized force magnitude f with
    (K*V^N)(x) = f(|x|) * xhat (or the rotated xhat_perp for Biot-Savart)."""

    kernel: KernelSpec
    mollifier: MollifierSpec
    table_radius: float
    radii: np.ndarray
    samples: np.ndarray
    far_field_switch_radius: float
    perp: bool


def _gauss_nodes(lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(n)
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return mid + half * t, half * w


def convolved_force_magnitude(
    kernel: KernelSpec, mollifier: MollifierSpec, r: float, nodes: int = 80
) -> float:
    """Quadrature value of the radial magnitude of (K*V^N) at radius r.

    Integrates in polar coordinates centered on the kernel singularity,
    z = x - y, so the radial integrand k(rho) rho^{d-1} is an integrable
    power law; a power substitution rho = t^m flattens it exactly. The
    bump factor is smooth with all derivatives vanishing at its support
    edge, so Gauss-Legendre converges spectrally.
    """
    d = kernel.d
    prof = radial_profile(kernel)
    delta = mollifier.support_radius
    if r == 0.0:
        return 0.0
    lo, hi = max(0.0, r - delta), r + delta
    a_net = d - 1.0 - prof.sing
    m = 1.0 / (1.0 + a_net) if -1.0 < a_net < 0.0 else 1.0
    t, wt = _gauss_nodes(lo ** (1.0 / m), hi ** (1.0 / m), nodes)
    rho = t ** m
    wr = wt * m * t ** (m - 1.0)
    kr = prof.magnitude(rho) * rho ** (d - 1)
    if d == 1:
        b = mollifier.radial_VN(np.abs(r - rho)) - mollifier.radial_VN(r + rho)
        return float(np.sum(wr * kr * b))
    if r <= delta:
        ang_hi = math.pi if d == 2 else -1.0
    else:
        half = math.asin(min(1.0, delta / r))
        ang_hi = half if d == 2 else math.cos(half)
    if d == 2:
        th, wth = _gauss_nodes(0.0, ang_hi, nodes)
        cos = np.cos(th)
        dist = np.sqrt(np.maximum(r * r + rho[:, None] ** 2 - 2.0 * r * rho[:, None] * cos, 0.0))
        b = mollifier.radial_VN(dist)
        return 2.0 * float(wr @ (kr[:, None] * b * cos) @ wth)
    if d == 3:
        mu, wmu = _gauss_nodes(ang_hi, 1.0, nodes)
        dist = np.sqrt(np.maximum(r * r + rho[:, None] ** 2 - 2.0 * r * rho[:, None] * mu, 0.0))
        b = mollifier.radial_VN(dist)
        return 2.0 * math.pi * float(wr @ (kr[:, None] * b * mu) @ wmu)
    raise DomainError("force tables support d in {1, 2, 3}")


_SWITCH_CANDIDATES = (1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0,
                      24.0, 32.0, 48.0, 64.0, 96.0, 128.0)


def build_force_table(
    kernel: KernelSpec, mollifier: MollifierSpec, resolution: int = 512, tol: float = 1e-4
) -> ForceTable:
    """Tabulate the regularized force magnitude on [0, switch radius].

    The far-field switch radius is the smallest candidate multiple of the
    mollifier support radius where the quadrature value of |K*V^N| agrees
    with the raw kernel magnitude to relative error < tol.
    """
    if kernel.d != mollifier.d:
        raise DomainError("kernel and mollifier dimensions differ")
    if resolution < 8:
        raise DomainError("table resolution must be at least 8")
    prof = radial_profile(kernel)
    if kernel.family == "zero":
        radii = np.linspace(0.0, mollifier.support_radius, resolution + 1)
        return ForceTable(kernel, mollifier, radii[-1], radii,
                          np.zeros_like(radii), 0.0, prof.perp)
    if not assumption_report(kernel).locally_integrable:
        raise DomainError(
            "force table requires a locally integrable kernel"
        )
    delta = mollifier.support_radius
    switch = None
    for c in _SWITCH_CANDIDATES:
        rc = c * delta
        raw = float(prof.magnitude(np.array([rc]))[0])
        val = convolved_force_magnitude(kernel, mollifier, rc)
        if abs(val - raw) <= tol * abs(raw):
            switch = rc
            break
    if switch is None:
        raise QuadratureFailure(
            f"no candidate radius up to {_SWITCH_CANDIDATES[-1]} mollifier radii "
            f"reaches relative far-field agreement {tol}"
        )
    # quadratic clustering: the profile bends on the mollifier scale near 0
    # while the switch radius can sit many support radii out
    radii = switch * (np.arange(resolution + 1) / resolution) ** 2
    samples = np.empty_like(radii)
    samples[0] = 0.0
    for j in range(1, radii.size):
        samples[j] = convolved_force_magnitude(kernel, mollifier, float(radii[j]))
    return ForceTable(kernel, mollifier, switch, radii, samples, switch, prof.perp)


def interaction_force(table: ForceTable, x: np.ndarray) -> np.ndarray:
    """Interpolated regularized force at points x of shape (..., d).

    Linear interpolation of the radial table inside table_radius, raw
    kernel beyond the switch radius; exactly odd since the magnitude
    depends only on |x| and the direction factor is linear in x.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != table.kernel.d:
        raise DomainError(f"points have dimension {x.shape[-1]}, table has d={table.kernel.d}")
    r = np.sqrt(np.sum(x * x, axis=-1))
    mag = np.zeros_like(r)
    inner = (r > 0.0) & (r <= table.table_radius)
    outer = r > table.far_field_switch_radius
    if np.any(inner):
        mag[inner] = np.interp(r[inner], table.radii, table.samples)
    if np.any(outer):
        prof = radial_profile(table.kernel)
        mag[outer] = prof.magnitude(r[outer])
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(r > 0.0, mag / np.where(r > 0.0, r, 1.0), 0.0)
    if table.perp:
        out = np.empty_like(x)
        out[..., 0] = -x[..., 1] * scale
        out[..., 1] = x[..., 0] * scale
        return out
    return x * scale[..., None]
