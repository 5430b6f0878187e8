"""Euler-Maruyama simulation of moderately interacting particle systems.

Positions evolve by

    X_i <- X_i + F_A((1/N) sum_k force(X_i - X_k)) dt + sqrt(2 dt) xi_i,

where the pairwise force is the mollified-kernel table, F_A the smooth
componentwise clamp, and xi_i standard Gaussians from counter-based
streams so results are independent of scheduling.
"""

from dataclasses import dataclass
import math

import numpy as np

from .cutoff import CutoffFn, eval_cutoff
from .errors import BadMixture, DomainError
from .grid import GridField, periodic_interp
from .kernels import KernelSpec
from .measures import WeightedPointSet, deposit_uN
from .mollifier import ForceTable, MollifierSpec, build_force_table, interaction_force
from .rng import box_muller, stream
from .spectral import kernel_convolution

__all__ = [
    "ParticleState",
    "SimResult",
    "drift_direct",
    "drift_grid",
    "em_step",
    "sample_initial",
    "simulate",
]


@dataclass(frozen=True)
class ParticleState:
    """Positions of an N-particle system at a point in simulated time.

    ``rng_epoch`` counts completed steps; it indexes the per-step noise
    stream so that restarts and re-partitioned drift evaluation cannot
    change the generated increments.
    """

    positions: np.ndarray
    t: float = 0.0
    rng_epoch: int = 0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[0] < 1 or pos.shape[1] < 1:
            raise DomainError("positions must be a nonempty N x d array")
        if not np.all(np.isfinite(pos)):
            raise DomainError("positions must be finite")
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def d(self) -> int:
        return self.positions.shape[1]


def drift_direct(
    state: ParticleState,
    table: ForceTable,
    cutoff: CutoffFn | None = None,
) -> np.ndarray:
    """Pairwise O(N^2) drift: F_A((1/N) sum_k force(X_i - X_k)).

    The k = i self term is exactly zero by the table's zero-at-origin
    invariant, so it is simply included in the sum.
    """
    pos = state.positions
    n = pos.shape[0]
    out = np.empty_like(pos)
    block = max(1, (1 << 21) // n)
    for i0 in range(0, n, block):
        diffs = pos[i0 : i0 + block, None, :] - pos[None, :, :]
        out[i0 : i0 + block] = interaction_force(table, diffs).mean(axis=1)
    if cutoff is not None:
        out = eval_cutoff(cutoff, out)
    return out


def drift_grid(
    state: ParticleState,
    mollifier: MollifierSpec,
    kernel: KernelSpec,
    G: int,
    L: float,
    cutoff: CutoffFn | None = None,
) -> np.ndarray:
    """Grid-accelerated drift via the identity
    (1/N) sum_k force(x - X_k) = (K * u^N)(x):

    deposit u^N, convolve with the kernel spectrally, interpolate the
    velocity field at the particles, then clamp. Agrees with
    drift_direct up to grid-discretization error.
    """
    n = state.n
    points = WeightedPointSet(state.positions, np.full(n, 1.0 / n))
    u_n = deposit_uN(points, mollifier, G, L)
    velocity = kernel_convolution(u_n, kernel)
    drift = np.stack(
        [periodic_interp(velocity[a], L, state.positions) for a in range(state.d)],
        axis=-1,
    )
    if cutoff is not None:
        drift = eval_cutoff(cutoff, drift)
    return drift


def em_step(
    state: ParticleState,
    dt: float,
    drift: np.ndarray,
    rng: np.random.Generator | None,
) -> ParticleState:
    """One Euler-Maruyama step X <- X + drift dt + sqrt(2 dt) xi.

    ``rng = None`` disables the noise (deterministic test mode). The
    sqrt(2) factor matches a unit Laplacian in the limiting equation.
    """
    if dt <= 0.0:
        raise DomainError("dt must be positive")
    drift = np.asarray(drift, dtype=float)
    if drift.shape != state.positions.shape:
        raise DomainError("drift must match the positions array shape")
    new_pos = state.positions + drift * dt
    if rng is not None:
        new_pos = new_pos + math.sqrt(2.0 * dt) * box_muller(rng, state.n, state.d)
    return ParticleState(new_pos, state.t + dt, state.rng_epoch + 1)


def _normalized_mixture(components, d: int):
    comps = []
    for item in components:
        if len(item) != 3:
            raise BadMixture("each mixture component must be (weight, mean, sigma2)")
        w, mean, s2 = item
        w = float(w)
        s2 = float(s2)
        mean_vec = np.broadcast_to(np.asarray(mean, dtype=float), (d,)).copy()
        if not math.isfinite(w) or w < 0.0:
            raise BadMixture(f"component weight {w} must be finite and >= 0")
        if not math.isfinite(s2) or s2 <= 0.0:
            raise BadMixture(f"component variance {s2} must be positive (point masses excluded)")
        if not np.all(np.isfinite(mean_vec)):
            raise BadMixture("component mean must be finite")
        comps.append((w, mean_vec, s2))
    total = sum(c[0] for c in comps)
    if not comps or abs(total - 1.0) > 1e-9:
        raise BadMixture(f"mixture weights must sum to 1, got {total!r}")
    return comps


def sample_initial(components, n: int, rng: np.random.Generator, d: int | None = None) -> np.ndarray:
    """Draw n i.i.d. samples from an isotropic Gaussian mixture.

    ``components`` is a sequence of (weight, mean, sigma2) triples whose
    weights sum to 1; a single triple means a plain Gaussian. Scalar
    means broadcast to the ambient dimension ``d`` (inferred from vector
    means when omitted). Gaussians are generated by the explicit
    Box-Muller transform so the draw is a fixed function of the
    underlying uniform stream.
    """
    if n < 1:
        raise DomainError("need at least one sample")
    for item in components:
        m = np.asarray(item[1], dtype=float)
        if m.ndim > 0:
            d = m.shape[0] if d is None else d
            if m.shape != (d,):
                raise BadMixture("component means must share one dimension")
    if d is None:
        d = 1
    comps = _normalized_mixture(components, d)
    normals = box_muller(rng, n, d)
    if len(comps) == 1:
        w, mean, s2 = comps[0]
        return mean + math.sqrt(s2) * normals
    edges = np.cumsum([c[0] for c in comps])
    labels = np.searchsorted(edges, rng.random(n), side="right")
    labels = np.minimum(labels, len(comps) - 1)
    means = np.stack([c[1] for c in comps])
    sigmas = np.sqrt([c[2] for c in comps])
    return means[labels] + sigmas[labels, None] * normals


@dataclass(frozen=True)
class SimResult:
    """Trajectory snapshots of one particle run.

    ``snapshots`` is ((t, positions), ...); ``fields`` carries the
    deposited smoothed empirical density u^N at the same times when a
    deposition grid was configured, else None. ``clip_fraction`` is the
    fraction of drift components that landed outside [-A, A] before
    clamping (diagnostic for the cutoff level).
    """

    kernel: KernelSpec
    mollifier: MollifierSpec | None
    dt: float
    drift_path: str
    snapshots: tuple
    fields: tuple | None
    final: ParticleState
    clip_fraction: float


def _resolve_drift_path(path: str, kernel: KernelSpec, n: int) -> str:
    if path not in ("direct", "grid", "auto"):
        raise DomainError(f"drift_path must be direct, grid or auto, got {path!r}")
    if path != "auto":
        return path
    has_symbol = kernel.family != "attractive-repulsive"
    return "grid" if (has_symbol and n > 2048) else "direct"


def simulate(
    kernel: KernelSpec,
    mollifier: MollifierSpec | None,
    n: int,
    t_final: float,
    dt: float,
    seed: int,
    *,
    rep: int = 0,
    init=((1.0, 0.0, 1.0),),
    cutoff: CutoffFn | None = None,
    drift_path: str = "auto",
    G: int = 256,
    L: float = 4.0,
    snapshot_times=None,
    deposit_fields: bool = True,
    table: ForceTable | None = None,
) -> SimResult:
    """Run one particle system and record snapshots.

    Deterministic function of (all arguments, seed, rep): initial
    positions come from the (seed, rep, "init") stream and step noise
    from (seed, rep, "em", step), so any scheduling of the work
    reproduces the same trajectory bit-for-bit.

    ``mollifier = None`` is allowed for the zero kernel only (no force
    to mollify); fields are then deposited with a default unit-radius
    bump of matching scaling when requested.
    """
    if t_final <= 0.0 or dt <= 0.0:
        raise DomainError("horizon and step must be positive")
    if mollifier is None and kernel.family != "zero":
        raise DomainError("a mollifier is required for interacting kernels")
    d = kernel.d
    n_steps = max(1, int(math.ceil(t_final / dt - 1e-12)))
    dt = t_final / n_steps
    if snapshot_times is None:
        snapshot_times = [0.0, t_final]
    snap_steps = sorted({min(n_steps, max(0, int(round(s / dt)))) for s in snapshot_times})

    path = _resolve_drift_path(drift_path, kernel, n)
    if kernel.family == "zero":
        path = "direct"
        table = None
    elif path == "direct" and table is None:
        table = build_force_table(kernel, mollifier)

    positions = sample_initial(init, n, stream(seed, rep, "init"), d)
    state = ParticleState(positions, 0.0, 0)

    dep_moll = mollifier
    if deposit_fields and dep_moll is None:
        dep_moll = MollifierSpec(d=d, R=1.0, alpha=0.25, N=n)

    snaps = []
    fields = [] if deposit_fields else None
    clipped = 0
    evaluated = 0

    def record(st: ParticleState):
        snaps.append((st.t, st.positions.copy()))
        if deposit_fields:
            pts = WeightedPointSet(st.positions, np.full(n, 1.0 / n))
            fields.append((st.t, deposit_uN(pts, dep_moll, G, L)))

    if snap_steps and snap_steps[0] == 0:
        record(state)
        snap_steps = snap_steps[1:]

    for step in range(n_steps):
        if kernel.family == "zero":
            drift = np.zeros_like(state.positions)
        elif path == "grid":
            drift = drift_grid(state, mollifier, kernel, G, L, None)
        else:
            drift = drift_direct(state, table, None)
        if cutoff is not None and math.isfinite(cutoff.A):
            clipped += int(np.count_nonzero(np.abs(drift) > cutoff.A))
            evaluated += drift.size
            drift = eval_cutoff(cutoff, drift)
        state = em_step(state, dt, drift, stream(seed, rep, "em", step))
        if snap_steps and snap_steps[0] == step + 1:
            record(state)
            snap_steps = snap_steps[1:]

    return SimResult(
        kernel=kernel,
        mollifier=mollifier,
        dt=dt,
        drift_path=path,
        snapshots=tuple(snaps),
        fields=tuple(fields) if fields is not None else None,
        final=state,
        clip_fraction=(clipped / evaluated) if evaluated else 0.0,
    )
