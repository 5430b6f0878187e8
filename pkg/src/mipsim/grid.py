"""Uniform periodic grid fields on the truncated torus [-L, L)^d.

A GridField samples a scalar density on G points per axis (G a power of
two so transforms stay fast and spectra symmetric). Fourier conventions:
the continuum transform is F[f](xi) = int f exp(-i xi.x) dx, discretized
as fftn(values) * dx^d on the frequency lattice xi = 2 pi fftfreq(G, dx).
Fourier-multiplier application needs no normalization factors:
ifftn(sigma * fftn(values)) evaluates the multiplier exactly on the
periodic extension.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

__all__ = [
    "GridField",
    "coordinate_axis",
    "coordinate_grid",
    "frequency_grid",
    "gaussian_field",
    "apply_multiplier",
]


@dataclass(frozen=True)
class GridField:
    """Scalar field sampled on the torus grid; values has shape (G,)*d."""

    d: int
    G: int
    L: float
    values: np.ndarray

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 1:
            raise DomainError("dimension d must be a positive integer")
        if not (isinstance(self.G, int) and self.G >= 2 and (self.G & (self.G - 1)) == 0):
            raise DomainError("grid size G must be a power of two >= 2")
        if not self.L > 0:
            raise DomainError("half-width L must be positive")
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.G,) * self.d:
            raise DomainError(f"values must have shape {(self.G,) * self.d}, got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.G

    @property
    def cell_volume(self) -> float:
        return self.dx ** self.d

    def with_values(self, values: np.ndarray) -> "GridField":
        return GridField(self.d, self.G, self.L, values)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def mass(self) -> float:
        """Riemann-sum integral of the field."""
        return float(np.sum(self.values) * self.cell_volume)


def coordinate_axis(G: int, L: float) -> np.ndarray:
    """Node coordinates -L, -L+dx, ..., L-dx along one axis."""
    return -L + (2.0 * L / G) * np.arange(G)


@lru_cache(maxsize=32)
def _coordinate_grid_cached(d: int, G: int, L: float) -> np.ndarray:
    ax = coordinate_axis(G, L)
    mesh = np.meshgrid(*([ax] * d), indexing="ij")
    out = np.stack(mesh, axis=-1)
    out.setflags(write=False)
    return out

def coordinate_grid(d: int, G: int, L: float) -> np.ndarray:
    """Node coordinates, shape (G,)*d + (d,); cached and read-only."""
    return _coordinate_grid_cached(d, G, float(L))


@lru_cache(maxsize=32)
def _frequency_grid_cached(d: int, G: int, L: float) -> np.ndarray:
    dx = 2.0 * L / G
    ax = 2.0 * np.pi * np.fft.fftfreq(G, d=dx)
    mesh = np.meshgrid(*([ax] * d), indexing="ij")
    out = np.stack(mesh, axis=-1)
    out.setflags(write=False)
    return out

def frequency_grid(d: int, G: int, L: float) -> np.ndarray:
    """Angular frequencies of the torus, shape (G,)*d + (d,); cached."""
    return _frequency_grid_cached(d, G, float(L))


def gaussian_field(d: int, G: int, L: float, sigma2: float, center=None) -> GridField:
    """Sampled isotropic Gaussian g_{sigma2}(x) = (2 pi sigma2)^{-d/2}
    exp(-|x - center|^2 / (2 sigma2)); under the heat flow du/dt = Lap u
    the variance parameter grows as sigma2 + 2t."""
    if sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    pts = coordinate_grid(d, G, L)
    if center is not None:
        pts = pts - np.asarray(center, dtype=float)
    q = np.sum(pts * pts, axis=-1)
    vals = (2.0 * np.pi * sigma2) ** (-d / 2.0) * np.exp(-q / (2.0 * sigma2))
    return GridField(d, G, L, vals)


def apply_multiplier(field: GridField, multiplier: np.ndarray) -> np.ndarray:
    """Real part of the Fourier-multiplier action on the field values."""
    return np.real(np.fft.ifftn(multiplier * np.fft.fftn(field.values)))


def periodic_interp(values: np.ndarray, L: float, pts: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of a (G,)*d node field at points (M, d),
    periodic across the torus seam."""
    pts = np.asarray(pts, dtype=float)
    d = pts.shape[-1]
    G = values.shape[0]
    dx = 2.0 * L / G
    s = (pts + L) / dx
    base = np.floor(s).astype(np.int64)
    frac = s - base
    out = np.zeros(pts.shape[:-1])
    for corner in range(1 << d):
        idx = []
        w = np.ones(pts.shape[:-1])
        for a in range(d):
            bit = (corner >> a) & 1
            idx.append(np.mod(base[..., a] + bit, G))
            w = w * (frac[..., a] if bit else 1.0 - frac[..., a])
        out += w * values[tuple(idx)]
    return out
