"""Command-line front end.

Subcommands:
  kernels    print the admissibility report for a kernel
  pde        solve the limiting PDE and dump trace + snapshots
  simulate   one particle run: position snapshots + smoothed densities
  rate       Monte-Carlo convergence sweep over particle counts
  chaos      shared-noise coupling gap experiment
  distance   bounded-Lipschitz distance between two snapshot files
  rates calc closed-form rate/exponent calculator

Global flags: ``--config <file>``, ``--seed``, ``--out``, ``--threads``
(environment variable ``MC_THREADS`` is the fallback for the latter).
Exit codes: 0 success, 1 validation error, 2 runtime error. A detected
blow-up is a *successful* outcome: the run's status is recorded in the
summary JSON.

Every experiment writes deterministic artifacts (see the io module for
schemas) plus a ``summary.json`` embedding a config echo that re-parses
to the exact ExperimentConfig used; the same JSON text is printed to
stdout.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from pathlib import Path

from . import io as mio
from .config import (
    ExperimentConfig,
    config_echo,
    parse_config_text,
)
from .config import _parse_exponent  # shared value grammar for rational flags
from .cutoff import CutoffFn
from .errors import (
    BadMixture,
    ConfigError,
    DeltaOutOfRange,
    DomainError,
    EmptyWindow,
    MipsimError,
    OutOfCatalog,
)
from .harness import (
    _cutoff_norm_exponent,
    chaos_coupling,
    grid_mixture,
    rate_sweep,
    reference_run,
)
from .kernels import KernelSpec, assumption_report
from .measures import kr_distance
from .mollifier import MollifierSpec
from .particles import simulate
from .rates import (
    BestAlpha,
    RateQuery,
    best_alpha,
    sobolev_rate_exponent,
    theoretical_rate,
    theoretical_rate_singular,
)
from .spectral import solve_pde

__all__ = ["main"]

_VALIDATION_ERRORS = (
    ConfigError,
    OutOfCatalog,
    DomainError,
    BadMixture,
    DeltaOutOfRange,
    EmptyWindow,
)


def _add_kernel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", help="kernel family name")
    p.add_argument("--d", type=int, help="ambient dimension")
    p.add_argument("--s", type=float, help="Riesz exponent")
    p.add_argument("--attractive", action="store_true", help="attractive Riesz sign")
    p.add_argument("--chi", type=float, help="chemotaxis sensitivity")
    p.add_argument("--a", type=float, help="attractive-repulsive outer exponent")
    p.add_argument("--b", type=float, help="attractive-repulsive inner exponent")
    p.add_argument("--va", type=float, help="attractive-repulsive outer weight")
    p.add_argument("--vb", type=float, help="attractive-repulsive inner weight")


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="mipsim",
        description="simulation laboratory for moderately interacting particle systems",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat section.key = value config file")
        p.add_argument("--seed", type=int, help="override particles.seed")
        p.add_argument("--out", help="override output.dir")
        p.add_argument("--threads", type=int, help="worker threads (or MC_THREADS)")

    pk = sub.add_parser("kernels", help="print a kernel admissibility report")
    common(pk)
    _add_kernel_flags(pk)

    for name, desc in (
        ("pde", "solve the limiting PDE"),
        ("simulate", "run one particle system"),
        ("rate", "convergence-rate sweep"),
        ("chaos", "coupling-gap experiment"),
    ):
        p = sub.add_parser(name, help=desc)
        common(p)

    pd = sub.add_parser("distance", help="distance between two snapshot files")
    common(pd)
    pd.add_argument("file_a", help="particle CSV or grid container")
    pd.add_argument("file_b", help="particle CSV or grid container")
    pd.add_argument("--grid-n", type=int, default=65, help="dual grid nodes per axis")
    pd.add_argument(
        "--box",
        nargs=2,
        type=float,
        metavar=("LO", "HI"),
        help="common axis-aligned bounding box",
    )
    pd.add_argument(
        "--tol", type=float, default=1e-4, help="duality-gap stopping tolerance"
    )
    pd.add_argument(
        "--max-iter", type=int, default=2_000_000, help="ascent iteration budget"
    )
    pd.add_argument(
        "--coarsen",
        type=int,
        default=1,
        help="block-average grid-field inputs by this factor first "
        "(they otherwise keep their native resolution, which can be slow)",
    )

    pr = sub.add_parser("rates", help="closed-form rate calculators")
    rsub = pr.add_subparsers(dest="rates_command", required=True)
    pc = rsub.add_parser("calc", help="evaluate rate formulas from flags")
    pc.add_argument("--d", type=int, help="ambient dimension")
    pc.add_argument("--zeta", default="1", help="regularization exponent (rational ok)")
    pc.add_argument("--r", default="inf", help="norm exponent, inf accepted")
    pc.add_argument("--alpha", help="scaling exponent (rational ok)")
    pc.add_argument("--best-alpha", action="store_true", help="optimize the exponent")
    pc.add_argument("--singular", action="store_true", help="singular-class formulas")
    pc.add_argument("--beta", help="kernel regularity margin (rational ok)")
    pc.add_argument("--r-tilde", help="singular-class norm exponent (rational ok)")
    pc.add_argument("--sobolev", action="store_true", help="embedding trade-off exponent")
    pc.add_argument("--delta", help="embedding trade-off parameter (rational ok)")
    return top


def _resolve_threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        threads = args.threads
    else:
        env = os.environ.get("MC_THREADS", "").strip()
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigError([f"MC_THREADS must be an integer, got {env!r}"])
        else:
            threads = 1
    if threads < 1:
        raise ConfigError([f"--threads must be >= 1, got {threads}"])
    return threads


def _load_config(args, kind: str) -> ExperimentConfig:
    if not getattr(args, "config", None):
        raise ConfigError([f"{kind} requires --config <file>"])
    path = Path(args.config)
    if not path.is_file():
        raise ConfigError([f"config file not found: {path}"])
    cfg = parse_config_text(path.read_text())
    cfg = cfg.with_experiment(kind)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    if getattr(args, "out", None):
        cfg = dataclasses.replace(cfg, out_dir=args.out)
    cfg.validate()
    return cfg


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _summary(cfg: ExperimentConfig, body: dict) -> dict:
    body["config"] = config_echo(cfg)
    body["version"] = mio.version_string()
    return body


def _emit(out: Path | None, cfg: ExperimentConfig, body: dict) -> str:
    text = (
        mio.write_json(out / "summary.json", _summary(cfg, body))
        if out is not None
        else mio.json_text(_summary(cfg, body))
    )
    sys.stdout.write(text)
    return text


def _kernel_from_args(args) -> KernelSpec:
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError([f"config file not found: {path}"])
        return parse_config_text(path.read_text()).kernel
    if not args.family or args.d is None:
        raise ConfigError(["kernels needs --family and --d (or --config)"])
    params = {}
    for name in ("s", "chi", "a", "b", "va", "vb"):
        v = getattr(args, name)
        if v is not None:
            params[name] = v
    if args.attractive:
        params["attractive"] = True
    return KernelSpec(args.family, args.d, **params)


def _cmd_kernels(args) -> int:
    kernel = _kernel_from_args(args)
    report = assumption_report(kernel)
    sys.stdout.write(mio.json_text(dataclasses.asdict(report)))
    return 0


def _pde_cutoff(cfg: ExperimentConfig) -> CutoffFn | None:
    # "auto" needs a completed reference, which *is* this run; solve uncut
    if isinstance(cfg.cutoff_a, float):
        return CutoffFn(A=cfg.cutoff_a)
    return None


def _cmd_pde(args) -> int:
    cfg = _load_config(args, "pde")
    out = _out_dir(cfg)
    u0 = grid_mixture(cfg.kernel.d, cfg.G, cfg.L, cfg.init)
    dt = cfg.pde_dt if cfg.pde_dt is not None else cfg.dt
    run = solve_pde(
        u0,
        cfg.t_final,
        dt,
        cfg.kernel,
        _pde_cutoff(cfg),
        r=cfg.r,
        snapshot_times=cfg.snapshot_times,
        guard=cfg.guard,
        heun=cfg.heun,
    )
    mio.write_norm_trace(out / "trace.csv", run)
    files = []
    for k, (t, field) in enumerate(run.snapshots):
        name = f"field_{k:03d}.bin"
        mio.write_grid_field(out / name, field, t, cfg.kernel)
        files.append({"t": t, "file": name})
    _emit(
        out,
        cfg,
        {
            "experiment": "pde",
            "status": run.status,
            "t_blow": run.t_blow,
            "r": run.r,
            "dt": run.dt,
            "snapshots": files,
            "trace": "trace.csv",
        },
    )
    return 0


def _sim_cutoff(cfg: ExperimentConfig, t_final: float, dt: float):
    """Resolve particles.cutoff_a for particle experiments: a fixed level,
    None, or 'auto' (threshold from the limiting PDE's norm trace)."""
    if cfg.cutoff_a is None or cfg.kernel.family == "zero":
        return None
    if isinstance(cfg.cutoff_a, float):
        return CutoffFn(A=cfg.cutoff_a)
    from .harness import auto_cutoff

    reference = reference_run(
        cfg.kernel,
        cfg.init,
        t_final,
        cfg.pde_dt if cfg.pde_dt is not None else dt,
        cfg.G,
        cfg.L,
        snapshot_times=cfg.snapshot_times,
        r=_cutoff_norm_exponent(cfg.kernel),
        guard=cfg.guard,
    )
    return auto_cutoff(cfg.kernel, reference)


def _cmd_simulate(args) -> int:
    cfg = _load_config(args, "simulate")
    out = _out_dir(cfg)
    n = cfg.n_list[0]
    mollifier = (
        MollifierSpec(d=cfg.kernel.d, R=cfg.radius, alpha=float(cfg.alpha), N=n)
        if cfg.alpha is not None
        else None
    )
    cut = _sim_cutoff(cfg, cfg.t_final, cfg.dt)
    result = simulate(
        cfg.kernel,
        mollifier,
        n,
        cfg.t_final,
        cfg.dt,
        cfg.seed,
        init=cfg.init,
        cutoff=cut,
        drift_path=cfg.drift_path,
        G=cfg.G,
        L=cfg.L,
        snapshot_times=cfg.snapshot_times,
    )
    files = []
    for k, (t, positions) in enumerate(result.snapshots):
        name = f"snapshot_{k:03d}.csv"
        mio.write_snapshot_csv(out / name, positions)
        entry = {"t": t, "positions": name}
        if result.fields is not None:
            fname = f"field_{k:03d}.bin"
            mio.write_grid_field(out / fname, result.fields[k][1], t, cfg.kernel)
            entry["density"] = fname
        files.append(entry)
    _emit(
        out,
        cfg,
        {
            "experiment": "simulate",
            "n": n,
            "drift_path": result.drift_path,
            "cutoff_a": None if cut is None else cut.A,
            "clip_fraction": result.clip_fraction,
            "snapshots": files,
        },
    )
    return 0


def _cmd_rate(args, threads: int) -> int:
    cfg = _load_config(args, "rate")
    out = _out_dir(cfg)
    report = rate_sweep(
        cfg.kernel,
        alpha=cfg.alpha,
        n_list=cfg.n_list,
        reps=cfg.reps,
        t_final=cfg.t_final,
        dt=cfg.dt,
        seed=cfg.seed,
        R=cfg.radius,
        init=cfg.init,
        G=cfg.G,
        L=cfg.L,
        snapshot_times=cfg.snapshot_times,
        norm=cfg.norm,
        r=cfg.r if cfg.r is not None else 2.0,
        zeta=cfg.zeta,
        cutoff=cfg.cutoff_a,
        threads=threads,
        drift_path=cfg.drift_path,
        pde_dt=cfg.pde_dt,
        kr_grid=cfg.kr_grid,
        kr_tol=cfg.kr_tol,
    )
    mio.write_rate_csv(out / "rate.csv", report.rows)
    _emit(
        out,
        cfg,
        {
            "experiment": "rate",
            "slope": report.slope,
            "slope_ci": report.slope_ci,
            "rho_theory": report.rho_theory,
            "admissible": report.admissible,
            "norm": report.norm,
            "rows": [list(row) for row in report.rows],
            "per_rep": [list(row) for row in report.per_rep],
            "table": "rate.csv",
        },
    )
    return 0


def _chaos_snapshot_times(cfg: ExperimentConfig) -> list:
    if cfg.snapshot_times is not None:
        return sorted(cfg.snapshot_times)
    n_steps = max(1, int(math.ceil(cfg.t_final / cfg.dt - 1e-12)))
    dt = cfg.t_final / n_steps
    times = [k * dt for k in range(0, n_steps + 1, 8)]
    if times[-1] < cfg.t_final:
        times.append(cfg.t_final)
    return times


def _cmd_chaos(args, threads: int) -> int:
    cfg = _load_config(args, "chaos")
    out = _out_dir(cfg)
    reference = reference_run(
        cfg.kernel,
        cfg.init,
        cfg.t_final,
        cfg.pde_dt if cfg.pde_dt is not None else cfg.dt,
        cfg.G,
        cfg.L,
        snapshot_times=_chaos_snapshot_times(cfg),
        r=_cutoff_norm_exponent(cfg.kernel) if cfg.cutoff_a == "auto" else None,
        guard=cfg.guard,
    )
    report = chaos_coupling(
        cfg.kernel,
        reference,
        alpha=cfg.alpha,
        n_list=cfg.n_list,
        reps=cfg.reps,
        dt=cfg.dt,
        seed=cfg.seed,
        R=cfg.radius,
        init=cfg.init,
        G=cfg.G,
        L=cfg.L,
        cutoff=cfg.cutoff_a,
        threads=threads,
        drift_path=cfg.drift_path,
    )
    mio.write_chaos_csv(out / "chaos.csv", report.rows)
    _emit(
        out,
        cfg,
        {
            "experiment": "chaos",
            "medians": [list(row) for row in report.medians],
            "rows": [list(row) for row in report.rows],
            "table": "chaos.csv",
        },
    )
    return 0


def _cmd_distance(args) -> int:
    for f in (args.file_a, args.file_b):
        if not Path(f).is_file():
            raise ConfigError([f"snapshot file not found: {f}"])
    if args.coarsen < 1:
        raise ConfigError([f"--coarsen must be >= 1, got {args.coarsen}"])
    mu = mio.read_measure(args.file_a)
    nu = mio.read_measure(args.file_b)
    if args.coarsen > 1:
        from .grid import GridField
        from .harness import _coarsen

        mu = _coarsen(mu, mu.G // args.coarsen) if isinstance(mu, GridField) else mu
        nu = _coarsen(nu, nu.G // args.coarsen) if isinstance(nu, GridField) else nu
    box = tuple(args.box) if args.box else None
    value = kr_distance(
        mu, nu, grid_n=args.grid_n, box=box, tol=args.tol, max_iter=args.max_iter
    )
    sys.stdout.write(
        mio.json_text(
            {
                "distance": value,
                "grid_n": args.grid_n,
                "files": [args.file_a, args.file_b],
                "version": mio.version_string(),
            }
        )
    )
    return 0


def _require(args, names) -> list:
    missing = [flag for flag, value in names if value is None]
    if missing:
        raise ConfigError([f"rates calc needs {flag}" for flag in missing])
    return [value for _, value in names]


def _cmd_rates_calc(args) -> int:
    zeta = _parse_exponent(args.zeta)
    r = _parse_exponent(args.r)
    body = {}
    if args.sobolev:
        (beta, r_tilde, delta) = _require(
            args,
            [("--beta", args.beta), ("--r-tilde", args.r_tilde), ("--delta", args.delta)],
        )
        gamma = sobolev_rate_exponent(
            _parse_exponent(beta),
            _parse_exponent(r_tilde),
            _parse_exponent(delta),
            d=args.d,
        )
        body.update(
            {"gamma": gamma.gamma, "factor": gamma.factor, "holder": gamma.holder}
        )
    elif args.best_alpha:
        (d,) = _require(args, [("--d", args.d)])
        kwargs = {}
        if args.singular:
            (beta, r_tilde) = _require(
                args, [("--beta", args.beta), ("--r-tilde", args.r_tilde)]
            )
            kwargs = {
                "singular": True,
                "beta": _parse_exponent(beta),
                "r_tilde": _parse_exponent(r_tilde),
            }
            best: BestAlpha = best_alpha(d, zeta, **kwargs)
        else:
            best = best_alpha(d, zeta, r)
        body.update({"alpha_star": best.alpha_star, "rho_star": best.rho_star})
    else:
        (d, alpha) = _require(args, [("--d", args.d), ("--alpha", args.alpha)])
        alpha = _parse_exponent(alpha)
        if args.singular:
            (beta, r_tilde) = _require(
                args, [("--beta", args.beta), ("--r-tilde", args.r_tilde)]
            )
            query = RateQuery(
                d,
                alpha,
                zeta,
                r,
                beta=_parse_exponent(beta),
                r_tilde=_parse_exponent(r_tilde),
            )
            value = theoretical_rate_singular(query)
        else:
            value = theoretical_rate(RateQuery(d, alpha, zeta, r))
        body.update({"rho": value.rho, "admissible": value.admissible})
    body["version"] = mio.version_string()
    sys.stdout.write(mio.json_text(body))
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        if args.command == "kernels":
            return _cmd_kernels(args)
        if args.command == "pde":
            return _cmd_pde(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "rate":
            return _cmd_rate(args, _resolve_threads(args))
        if args.command == "chaos":
            return _cmd_chaos(args, _resolve_threads(args))
        if args.command == "distance":
            return _cmd_distance(args)
        if args.command == "rates":
            return _cmd_rates_calc(args)
        raise ConfigError([f"unknown command {args.command!r}"])
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (MipsimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
