"""Monte-Carlo experiment drivers: convergence-rate sweeps over the
particle count and the coupled McKean-Vlasov gap.

Replications are embarrassingly parallel; every replication is a pure
function of (configuration, seed, rep), so running them on 1 or many
threads produces bit-identical reports.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

from .cutoff import CutoffFn
from .errors import DomainError, NotCompleted
from .grid import GridField, gaussian_field, periodic_interp
from .kernels import KernelSpec, assumption_report, lemma1_constant
from .measures import WeightedPointSet, kr_distance, l1_cap_lr, lp_norm
from .mollifier import MollifierSpec, build_force_table
from .particles import ParticleState, drift_direct, drift_grid, em_step, sample_initial, simulate
from .rates import RateQuery, theoretical_rate, theoretical_rate_singular
from .rng import box_muller, stream
from .spectral import PdeRun, compute_cutoff_A, kernel_convolution, solve_pde

__all__ = [
    "RateReport",
    "ChaosReport",
    "grid_mixture",
    "reference_run",
    "auto_cutoff",
    "rate_sweep",
    "chaos_coupling",
]


def grid_mixture(d: int, G: int, L: float, components) -> GridField:
    """Gaussian-mixture density sampled on the grid."""
    total = None
    wsum = 0.0
    for w, mean, s2 in components:
        wsum += float(w)
        part = gaussian_field(d, G, L, float(s2), center=mean)
        vals = float(w) * part.values
        total = vals if total is None else total + vals
    if total is None or abs(wsum - 1.0) > 1e-9:
        raise DomainError(f"mixture weights must sum to 1, got {wsum}")
    return GridField(d, G, L, total)


def reference_run(
    kernel: KernelSpec,
    init,
    t_final: float,
    dt: float,
    G: int,
    L: float,
    *,
    snapshot_times=None,
    r: float | None = None,
    guard: float = 1e6,
) -> PdeRun:
    """Limiting-PDE solve matching a particle experiment's initial law."""
    u0 = grid_mixture(kernel.d, G, L, init)
    return solve_pde(
        u0, t_final, dt, kernel, snapshot_times=snapshot_times, r=r, guard=guard
    )


def _cutoff_norm_exponent(kernel: KernelSpec) -> float:
    """Integrability exponent used for the drift-bound constant: large
    enough for both the kernel-splitting constant and the admissible
    range of the density norms."""
    if kernel.family == "zero":
        return 2.0
    report = assumption_report(kernel)
    candidates = [Fraction(2)]
    if math.isfinite(report.r_admissible_min):
        candidates.append(Fraction(report.r_admissible_min).limit_denominator(10**9))
    p_sup, q_inf = report.p_sup, report.q_inf
    if math.isfinite(p_sup):
        p = (1 + Fraction(p_sup).limit_denominator(10**9)) / 2
        if p > 1:
            candidates.append(p / (p - 1))
    if math.isfinite(q_inf):
        q = Fraction(q_inf).limit_denominator(10**9) + 1
        candidates.append(q / (q - 1))
    return float(max(candidates))


def auto_cutoff(kernel: KernelSpec, run: PdeRun, *, margin: float = 1.0) -> CutoffFn | None:
    """Cutoff level derived from the reference solve: the kernel-splitting
    constant times the largest L1+Lr norm along the run, scaled by
    ``margin``. None for the zero kernel (no drift to clamp)."""
    if kernel.family == "zero":
        return None
    c_kd = lemma1_constant(kernel, run.r)
    level = margin * compute_cutoff_A(run, c_kd)
    if level <= 0.0:
        raise DomainError(f"cutoff level {level} must be positive")
    return CutoffFn(A=level)


@dataclass(frozen=True)
class RateReport:
    """Per-N error statistics of a sweep plus the fitted trend.

    ``rows`` holds (n, reps, mean_err, std_err) sorted by n. ``slope``
    is the negated least-squares slope of log(mean_err) against log(n),
    so a positive slope means the error decreases in N; ``slope_ci`` is
    a 95% jackknife half-width over replications. ``rho_theory`` and
    ``admissible`` echo the closed-form exponent for the configured
    scaling.
    """

    rows: tuple
    slope: float
    slope_ci: float
    rho_theory: object
    admissible: bool | None
    norm: str
    per_rep: tuple  # ((n, rep, err), ...) in deterministic order


def _fit_slope(ns, means) -> float:
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(means, dtype=float))
    coef = np.polyfit(x, y, 1)[0]
    return float(-coef)


def _jackknife_ci(ns, err_matrix: np.ndarray) -> float:
    reps = err_matrix.shape[1]
    if reps < 2:
        return math.inf
    thetas = []
    for j in range(reps):
        keep = np.delete(err_matrix, j, axis=1)
        thetas.append(_fit_slope(ns, keep.mean(axis=1)))
    thetas = np.asarray(thetas)
    se = math.sqrt((reps - 1) / reps * float(np.sum((thetas - thetas.mean()) ** 2)))
    return 1.96 * se


def _coarsen(field: GridField, G_out: int) -> GridField:
    """Block-average onto a coarser power-of-two grid (mass preserving)."""
    if field.G == G_out:
        return field
    if field.G % G_out != 0:
        raise DomainError(f"cannot coarsen G={field.G} to {G_out}")
    f = field.G // G_out
    v = field.values
    for axis in range(field.d):
        shape = v.shape[:axis] + (G_out, f) + v.shape[axis + 1 :]
        v = v.reshape(shape).mean(axis=axis + 1)
    return GridField(field.d, G_out, field.L, v)


def _sweep_error(
    sim, reference: PdeRun, norm: str, r: float, kr_grid: int, kr_tol: float
) -> float:
    """Sup over snapshot times of the selected distance between the
    smoothed empirical measure and the PDE reference."""
    ref_by_time = {round(t, 12): f for t, f in reference.snapshots}
    worst = 0.0
    for k, (t, field) in enumerate(sim.fields):
        ref = ref_by_time.get(round(t, 12))
        if ref is None:
            raise DomainError(f"no PDE snapshot at particle snapshot time {t}")
        if norm == "l1":
            err = lp_norm(field.with_values(field.values - ref.values), 1)
        elif norm == "l1-cap-lr":
            err = l1_cap_lr(field.with_values(field.values - ref.values), r)
        elif norm == "kr":
            _, positions = sim.snapshots[k]
            n = positions.shape[0]
            atoms = WeightedPointSet(positions, np.full(n, 1.0 / n))
            err = kr_distance(atoms, _coarsen(ref, kr_grid), tol=kr_tol)
        else:
            raise DomainError(f"unknown norm selector {norm!r}")
        worst = max(worst, err)
    return worst


def _theory(kernel: KernelSpec, alpha, zeta, r) -> tuple:
    report = assumption_report(kernel)
    if kernel.family == "zero":
        return theoretical_rate(RateQuery(kernel.d, alpha, zeta, r))
    if report.singular_class:
        lo, hi = report.sigma_window
        beta = (Fraction(lo) + Fraction(hi)) / 2 if hi > lo else Fraction(1, 2)
        q = RateQuery(kernel.d, alpha, zeta, r, beta=beta, r_tilde=max(kernel.d + 1, 2 * kernel.d))
        return theoretical_rate_singular(q)
    return theoretical_rate(RateQuery(kernel.d, alpha, zeta, r))


def rate_sweep(
    kernel: KernelSpec,
    *,
    alpha: float,
    n_list,
    reps: int,
    t_final: float,
    dt: float,
    seed: int,
    R: float = 1.0,
    init=((1.0, 0.0, 0.25),),
    G: int = 256,
    L: float = 4.0,
    snapshot_times=None,
    norm: str = "l1",
    r: float = 2.0,
    zeta=1,
    cutoff="auto",
    threads: int = 1,
    drift_path: str = "auto",
    pde_dt: float | None = None,
    kr_grid: int = 32,
    kr_tol: float = 1e-3,
    reference: PdeRun | None = None,
) -> RateReport:
    """Monte-Carlo convergence sweep of the smoothed empirical density
    against the limiting PDE.

    For each particle count in ``n_list`` the experiment runs ``reps``
    independent replications (seeded by rep index, parallelizable over
    threads without changing results) and records the sup-in-time error
    in the selected norm: "l1", "l1-cap-lr", or "kr" (the
    bounded-Lipschitz distance of the raw empirical measure against the
    reference density, evaluated on a coarsened grid of ``kr_grid``
    cells per axis).
    """
    n_list = sorted(int(n) for n in n_list)
    if len(n_list) < 2 or reps < 1:
        raise DomainError("need at least two particle counts and one replication")
    if snapshot_times is None:
        snapshot_times = [t_final * k / 4 for k in range(5)]
    if reference is None:
        reference = reference_run(
            kernel,
            init,
            t_final,
            pde_dt if pde_dt is not None else dt,
            G,
            L,
            snapshot_times=snapshot_times,
            r=_cutoff_norm_exponent(kernel) if cutoff == "auto" else None,
        )
    if reference.status != "completed":
        raise NotCompleted("rate sweep needs a completed PDE reference")
    cut = auto_cutoff(kernel, reference) if cutoff == "auto" else (
        CutoffFn(A=float(cutoff)) if cutoff is not None else None
    )

    tables = {}
    for n in n_list:
        moll = MollifierSpec(d=kernel.d, R=R, alpha=float(alpha), N=n)
        needs_table = kernel.family != "zero" and (
            drift_path == "direct"
            or (drift_path == "auto" and not (kernel.family != "attractive-repulsive" and n > 2048))
        )
        tables[n] = (moll, build_force_table(kernel, moll) if needs_table else None)

    def one(n: int, rep: int) -> float:
        moll, table = tables[n]
        sim = simulate(
            kernel, moll, n, t_final, dt, seed,
            rep=rep, init=init, cutoff=cut, drift_path=drift_path,
            G=G, L=L, snapshot_times=snapshot_times, table=table,
        )
        return _sweep_error(sim, reference, norm, reference.r, kr_grid, kr_tol)

    jobs = [(n, rep) for n in n_list for rep in range(reps)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            errs = list(pool.map(lambda nr: one(*nr), jobs))
    else:
        errs = [one(*nr) for nr in jobs]

    per_rep = tuple((n, rep, float(e)) for (n, rep), e in zip(jobs, errs))
    err_matrix = np.asarray(errs, dtype=float).reshape(len(n_list), reps)
    means = err_matrix.mean(axis=1)
    stds = err_matrix.std(axis=1, ddof=1) if reps > 1 else np.zeros(len(n_list))
    rows = tuple(
        (n, reps, float(m), float(s)) for n, m, s in zip(n_list, means, stds)
    )
    rho, admissible = _theory(kernel, alpha, zeta, 1 if norm != "l1-cap-lr" else r)
    return RateReport(
        rows=rows,
        slope=_fit_slope(n_list, means),
        slope_ci=_jackknife_ci(n_list, err_matrix),
        rho_theory=rho,
        admissible=admissible,
        norm=norm,
        per_rep=per_rep,
    )


@dataclass(frozen=True)
class ChaosReport:
    """Coupling gap between the interacting system and its McKean-Vlasov
    copy driven by identical noise: rows (n, rep, gap) with the gap
    max_i sup over steps of |X_i - X_tilde_i|."""

    rows: tuple
    medians: tuple  # (n, median gap) sorted by n


def _mv_velocity_stack(reference: PdeRun, kernel: KernelSpec):
    times = np.asarray([t for t, _ in reference.snapshots])
    if kernel.family == "zero":
        return times, None
    fields = [kernel_convolution(f, kernel) for _, f in reference.snapshots]
    return times, np.stack(fields)  # (snap, d, G, ..., G)


def chaos_coupling(
    kernel: KernelSpec,
    reference: PdeRun,
    *,
    alpha: float,
    n_list,
    reps: int,
    dt: float,
    seed: int,
    R: float = 1.0,
    init=((1.0, 0.0, 0.25),),
    G: int = 256,
    L: float = 4.0,
    cutoff="auto",
    threads: int = 1,
    drift_path: str = "auto",
) -> ChaosReport:
    """Shared-noise coupling experiment.

    Simulates the interacting system X and the McKean-Vlasov copy
    X_tilde from the same initial positions and the same Gaussian
    increments; X_tilde is driven by the reference-PDE velocity field
    (K * u_t), interpolated linearly in time between snapshots and
    multilinearly in space. Requires reference snapshots no farther
    apart than 8 time steps.
    """
    if reference.status != "completed":
        raise NotCompleted("coupling needs a completed PDE reference")
    times, velocities = _mv_velocity_stack(reference, kernel)
    t_final = float(times[-1])
    n_steps = max(1, int(math.ceil(t_final / dt - 1e-12)))
    dt = t_final / n_steps
    if len(times) > 1:
        spacing = float(np.max(np.diff(times)))
        if spacing > 8.0 * dt + 1e-12:
            raise DomainError(
                f"PDE snapshot spacing {spacing} exceeds 8 dt = {8 * dt}"
            )
    cut = auto_cutoff(kernel, reference) if cutoff == "auto" else (
        CutoffFn(A=float(cutoff)) if cutoff is not None else None
    )
    n_list = sorted(int(n) for n in n_list)
    d = kernel.d

    tables = {}
    for n in n_list:
        moll = MollifierSpec(d=d, R=R, alpha=float(alpha), N=n)
        needs_table = kernel.family != "zero" and (
            drift_path == "direct"
            or (drift_path == "auto" and not (kernel.family != "attractive-repulsive" and n > 2048))
        )
        tables[n] = (moll, build_force_table(kernel, moll) if needs_table else None)

    def mv_drift(positions: np.ndarray, t: float) -> np.ndarray:
        if velocities is None:
            return np.zeros_like(positions)
        j = int(np.searchsorted(times, t, side="right") - 1)
        j = min(max(j, 0), len(times) - 2) if len(times) > 1 else 0
        if len(times) == 1:
            blend = velocities[0]
        else:
            theta = (t - times[j]) / (times[j + 1] - times[j])
            theta = min(max(theta, 0.0), 1.0)
            blend = (1.0 - theta) * velocities[j] + theta * velocities[j + 1]
        return np.stack(
            [periodic_interp(blend[a], L, positions) for a in range(d)], axis=-1
        )

    def one(n: int, rep: int) -> float:
        moll, table = tables[n]
        path = "direct" if kernel.family == "zero" else (
            drift_path if drift_path != "auto"
            else ("grid" if (kernel.family != "attractive-repulsive" and n > 2048) else "direct")
        )
        positions = sample_initial(init, n, stream(seed, rep, "init"), d)
        state = ParticleState(positions)
        shadow = positions.copy()
        gap = 0.0
        for step in range(n_steps):
            t = step * dt
            if kernel.family == "zero":
                drift = np.zeros_like(state.positions)
            elif path == "grid":
                drift = drift_grid(state, moll, kernel, G, L, cut)
            else:
                drift = drift_direct(state, table, cut)
            shadow_drift = mv_drift(shadow, t)
            gen = stream(seed, rep, "em", step)
            noise = math.sqrt(2.0 * dt) * box_muller(gen, n, d)
            state = ParticleState(
                state.positions + drift * dt + noise, state.t + dt, state.rng_epoch + 1
            )
            shadow = shadow + shadow_drift * dt + noise
            gap = max(gap, float(np.max(np.linalg.norm(state.positions - shadow, axis=1))))
        return gap

    jobs = [(n, rep) for n in n_list for rep in range(reps)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            gaps = list(pool.map(lambda nr: one(*nr), jobs))
    else:
        gaps = [one(*nr) for nr in jobs]
    rows = tuple((n, rep, float(g)) for (n, rep), g in zip(jobs, gaps))
    arr = np.asarray(gaps, dtype=float).reshape(len(n_list), reps)
    medians = tuple((n, float(np.median(arr[i]))) for i, n in enumerate(n_list))
    return ChaosReport(rows=rows, medians=medians)
