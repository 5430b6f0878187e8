"""Experiment configuration: flat ``section.key = value`` text files.

The grammar is line oriented and dependency free: blank lines and
``#`` comments are skipped, every other line must read
``section.key = value``. Values are typed per key (ints, floats with
``inf`` accepted, ``p/q`` rationals for scaling exponents, comma
lists). Parsing collects *all* problems before raising ConfigError,
and :meth:`ExperimentConfig.validate` does the same for cross-field
constraints, so a user sees every violation at once.

``config_echo`` renders a config back to the flat key/value mapping
(floats at 17 significant digits); re-parsing an echo reproduces an
identical ExperimentConfig, which is the round-trip contract relied on
by the JSON summaries.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import ConfigError, OutOfCatalog
from .kernels import KernelSpec

__all__ = [
    "ExperimentConfig",
    "parse_config",
    "parse_config_text",
    "config_echo",
    "format_float",
]

_EXPERIMENTS = ("kernels", "pde", "simulate", "rate", "chaos", "distance")
_NORMS = ("l1", "l1-cap-lr", "kr")
_DRIFT_PATHS = ("direct", "grid", "auto")
_INT_RE = re.compile(r"^[+-]?\d+$")
_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def format_float(x: float) -> str:
    """Render a float with 17 significant digits (binary64 round-trip)."""
    return f"{float(x):.17g}"


def _fmt_exponent(x) -> str:
    """Echo a scaling exponent preserving its parsed type (Fraction vs
    float): rationals print as p/q (or a bare integer), floats always
    carry a decimal point or exponent so they re-parse as floats."""
    if isinstance(x, Fraction):
        return str(x)
    s = format_float(x)
    return s + ".0" if _INT_RE.match(s) else s


def _parse_exponent(s: str):
    if _RATIONAL_RE.match(s):
        return Fraction(s)
    return _parse_float(s)


def _parse_int(s: str) -> int:
    if not _INT_RE.match(s):
        raise ValueError(f"expected an integer, got {s!r}")
    return int(s)


def _parse_float(s: str) -> float:
    v = float(s)
    if math.isnan(v):
        raise ValueError("nan is not a valid value")
    return v


def _parse_bool(s: str) -> bool:
    low = s.lower()
    if low in ("true", "false"):
        return low == "true"
    raise ValueError(f"expected true or false, got {s!r}")


def _parse_int_list(s: str) -> tuple:
    return tuple(_parse_int(p.strip()) for p in s.split(","))


def _parse_float_list(s: str) -> tuple:
    return tuple(_parse_float(p.strip()) for p in s.split(","))


def _parse_cutoff(s: str):
    low = s.lower()
    if low == "auto":
        return "auto"
    if low == "none":
        return None
    return _parse_float(s)


def _parse_enum(options):
    def parse(s: str) -> str:
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {s!r}")
        return s

    return parse


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description.

    ``kernel`` is a validated KernelSpec; the mollifier is stored as its
    parameters (radius, scaling exponent alpha, force-table knobs)
    because its bandwidth depends on the particle count of each run.
    ``n_list`` holds one entry for single runs and the sweep counts for
    rate/chaos experiments. ``cutoff_a`` is a positive level, the string
    "auto" (derive from the PDE reference), or None (no cutoff).
    """

    kernel: KernelSpec
    experiment: str | None = None
    # mollifier
    radius: float = 1.0
    alpha: object | None = None  # float or Fraction
    table_resolution: int = 512
    table_tol: float = 1e-4
    # grid
    G: int = 256
    L: float = 4.0
    # particles
    n_list: tuple = ()
    dt: float | None = None
    t_final: float | None = None
    seed: int = 0
    cutoff_a: object = "auto"  # float | "auto" | None
    drift_path: str = "auto"
    reps: int = 1
    # initial mixture (parallel lists)
    init_weights: tuple = (1.0,)
    init_means: tuple = (0.0,)
    init_sigma2: tuple = (0.25,)
    # pde
    pde_dt: float | None = None
    snapshot_times: tuple | None = None
    r: float | None = None
    guard: float = 1e6
    heun: bool = False
    # experiment extras
    norm: str = "l1"
    kr_grid: int = 32
    kr_tol: float = 1e-3
    zeta: object = Fraction(1)
    out_dir: str = "out"

    @property
    def init(self) -> tuple:
        """Mixture components as (weight, mean, sigma2) triples."""
        return tuple(zip(self.init_weights, self.init_means, self.init_sigma2))

    def with_experiment(self, kind: str) -> "ExperimentConfig":
        return replace(self, experiment=kind)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=seed)

    def validate(self, experiment: str | None = None) -> None:
        """Check every cross-field constraint for the selected experiment
        and raise ConfigError listing all violations."""
        kind = experiment or self.experiment
        bad = []
        if kind is not None and kind not in _EXPERIMENTS:
            bad.append(
                f"experiment.kind must be one of {', '.join(_EXPERIMENTS)}, got {kind!r}"
            )
            kind = None
        if self.G < 8 or self.G & (self.G - 1):
            bad.append(f"grid.g must be a power of two >= 8, got {self.G}")
        if not (self.L > 0 and math.isfinite(self.L)):
            bad.append(f"grid.l must be positive and finite, got {self.L}")
        for label, v in (
            ("particles.dt", self.dt),
            ("particles.t_final", self.t_final),
            ("pde.dt", self.pde_dt),
        ):
            if v is not None and not math.isfinite(v):
                bad.append(f"{label} must be finite, got {v}")
        if not (self.radius > 0):
            bad.append(f"mollifier.radius must be positive, got {self.radius}")
        if self.table_resolution < 16:
            bad.append(
                f"mollifier.table_resolution must be >= 16, got {self.table_resolution}"
            )
        if not (self.table_tol > 0):
            bad.append(f"mollifier.table_tol must be positive, got {self.table_tol}")
        if self.seed < 0:
            bad.append(f"particles.seed must be >= 0, got {self.seed}")
        if self.reps < 1:
            bad.append(f"particles.reps must be >= 1, got {self.reps}")
        if self.kr_grid < 2:
            bad.append(f"experiment.kr_grid must be >= 2, got {self.kr_grid}")
        if not (self.kr_tol > 0):
            bad.append(f"experiment.kr_tol must be positive, got {self.kr_tol}")
        if isinstance(self.cutoff_a, float) and not (self.cutoff_a > 0):
            bad.append(
                f"particles.cutoff_a must be positive, 'auto' or 'none', got {self.cutoff_a}"
            )
        if any(n < 1 for n in self.n_list):
            bad.append(f"particles.n entries must be >= 1, got {self.n_list}")
        if len(set(self.n_list)) != len(self.n_list):
            bad.append(f"particles.n entries must be distinct, got {self.n_list}")
        if not (
            len(self.init_weights) == len(self.init_means) == len(self.init_sigma2)
        ):
            bad.append(
                "init.weights, init.means and init.sigma2 must have equal length"
            )
        else:
            if abs(sum(self.init_weights) - 1.0) > 1e-9:
                bad.append(
                    f"init.weights must sum to 1, got {sum(self.init_weights)!r}"
                )
            if any(s2 <= 0 for s2 in self.init_sigma2):
                bad.append("init.sigma2 entries must be positive")
        if self.alpha is not None and not (0 < float(self.alpha) < 1):
            bad.append(f"mollifier.alpha must lie in (0, 1), got {self.alpha}")
        zeta = float(self.zeta)
        if not (0 < zeta <= 1):
            bad.append(f"experiment.zeta must lie in (0, 1], got {self.zeta}")
        if self.r is not None and self.r < 1:
            bad.append(f"pde.r must be >= 1 (inf allowed), got {self.r}")
        if not (self.guard > 0):
            bad.append(f"pde.guard must be positive, got {self.guard}")

        needs_dynamics = kind in ("pde", "simulate", "rate", "chaos")
        if needs_dynamics:
            if self.t_final is None or not (self.t_final > 0):
                bad.append("particles.t_final must be set and positive")
            step = self.pde_dt if kind == "pde" and self.pde_dt is not None else self.dt
            if kind == "pde":
                if step is None or not (step > 0):
                    bad.append("pde.dt (or particles.dt) must be set and positive")
            elif self.dt is None or not (self.dt > 0):
                bad.append("particles.dt must be set and positive")
            if self.snapshot_times is not None and self.t_final is not None:
                eps = 1e-12
                outside = [
                    t
                    for t in self.snapshot_times
                    if t < -eps or t > self.t_final + eps
                ]
                if outside:
                    bad.append(
                        f"pde.snapshot_times must lie in [0, t_final], got {outside}"
                    )

        if kind in ("simulate", "rate", "chaos"):
            if not self.n_list:
                bad.append("particles.n must be set")
            if kind == "simulate" and len(self.n_list) > 1:
                bad.append(
                    f"simulate takes a single particles.n, got {len(self.n_list)} values"
                )
            if kind == "rate" and len(self.n_list) < 2:
                bad.append("rate needs at least two particles.n values")
            if self.alpha is None:
                bad.append(
                    "mollifier.alpha must be set for particle experiments"
                )
            if self.drift_path == "grid" and self.kernel.family == "attractive-repulsive":
                bad.append(
                    "drift_path = grid needs a Fourier symbol; "
                    "attractive-repulsive kernels must use the direct path"
                )
            # bump resolution: the widest run (largest n) must still cover
            # two grid cells, or deposition would fail mid-experiment
            if self.alpha is not None and self.n_list and 0 < float(self.alpha) < 1:
                n_max = max(self.n_list)
                delta = self.radius * n_max ** (-float(self.alpha))
                dx = 2.0 * self.L / self.G
                if delta < 2.0 * dx:
                    bad.append(
                        f"mollifier support {delta:.6g} at n = {n_max} covers fewer "
                        f"than two grid cells (dx = {dx:.6g}); refine grid.g, grow "
                        "mollifier.radius or lower mollifier.alpha"
                    )

        if kind == "rate" and self.alpha is not None and not bad:
            from .harness import _theory

            norm_r = 1 if self.norm != "l1-cap-lr" else (self.r if self.r else 2.0)
            _, admissible = _theory(self.kernel, self.alpha, self.zeta, norm_r)
            if not admissible:
                bad.append(
                    f"mollifier.alpha = {self.alpha} is outside the admissible "
                    "scaling window for this kernel and norm"
                )

        if kind == "chaos" and self.snapshot_times is not None and self.dt:
            times = sorted(self.snapshot_times)
            gaps = [b - a for a, b in zip(times, times[1:])]
            if gaps and max(gaps) > 8.0 * self.dt + 1e-12:
                bad.append(
                    f"pde.snapshot_times spacing {max(gaps):.6g} exceeds 8 * dt "
                    f"= {8 * self.dt:.6g} required by the coupling experiment"
                )

        if bad:
            raise ConfigError(bad)


def _kernel_from_keys(values: dict, bad: list) -> KernelSpec | None:
    family = values.pop("kernel.family", None)
    d = values.pop("kernel.d", None)
    if family is None:
        bad.append("kernel.family is required")
    if d is None:
        bad.append("kernel.d is required")
    if family is None or d is None:
        for k in list(values):
            if k.startswith("kernel."):
                values.pop(k)
        return None
    params = {}
    for name in ("s", "attractive", "chi", "a", "b", "va", "vb"):
        key = f"kernel.{name}"
        if key in values:
            params[name] = values.pop(key)
    try:
        return KernelSpec(family, d, **params)
    except OutOfCatalog as exc:
        bad.append(f"kernel: {exc}")
        return None


# key -> (config field, value parser); kernel.* handled separately
_KEYS = {
    "kernel.family": ("", str),
    "kernel.d": ("", _parse_int),
    "kernel.s": ("", _parse_float),
    "kernel.attractive": ("", _parse_bool),
    "kernel.chi": ("", _parse_float),
    "kernel.a": ("", _parse_float),
    "kernel.b": ("", _parse_float),
    "kernel.va": ("", _parse_float),
    "kernel.vb": ("", _parse_float),
    "mollifier.radius": ("radius", _parse_float),
    "mollifier.alpha": ("alpha", _parse_exponent),
    "mollifier.table_resolution": ("table_resolution", _parse_int),
    "mollifier.table_tol": ("table_tol", _parse_float),
    "grid.g": ("G", _parse_int),
    "grid.l": ("L", _parse_float),
    "particles.n": ("n_list", _parse_int_list),
    "particles.dt": ("dt", _parse_float),
    "particles.t_final": ("t_final", _parse_float),
    "particles.seed": ("seed", _parse_int),
    "particles.cutoff_a": ("cutoff_a", _parse_cutoff),
    "particles.drift_path": ("drift_path", _parse_enum(_DRIFT_PATHS)),
    "particles.reps": ("reps", _parse_int),
    "init.weights": ("init_weights", _parse_float_list),
    "init.means": ("init_means", _parse_float_list),
    "init.sigma2": ("init_sigma2", _parse_float_list),
    "pde.dt": ("pde_dt", _parse_float),
    "pde.snapshot_times": ("snapshot_times", _parse_float_list),
    "pde.r": ("r", _parse_float),
    "pde.guard": ("guard", _parse_float),
    "pde.heun": ("heun", _parse_bool),
    "experiment.kind": ("experiment", _parse_enum(_EXPERIMENTS)),
    "experiment.norm": ("norm", _parse_enum(_NORMS)),
    "experiment.kr_grid": ("kr_grid", _parse_int),
    "experiment.kr_tol": ("kr_tol", _parse_float),
    "experiment.zeta": ("zeta", _parse_exponent),
    "output.dir": ("out_dir", str),
}


def _strip_comment(line: str) -> str:
    for i, ch in enumerate(line):
        if ch == "#" and (i == 0 or line[i - 1].isspace()):
            return line[:i]
    return line


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse the flat key/value grammar; raises ConfigError listing every
    syntax problem, unknown or duplicate key, and bad value at once."""
    bad = []
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = _strip_comment(line).strip()
        if not body:
            continue
        if "=" not in body:
            bad.append(f"line {lineno}: expected 'section.key = value', got {body!r}")
            continue
        key, _, value = body.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key not in _KEYS:
            bad.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in raw:
            bad.append(f"line {lineno}: duplicate key {key!r}")
            continue
        if not value:
            bad.append(f"line {lineno}: empty value for {key!r}")
            continue
        raw[key] = (lineno, value)
    return _build(raw, bad)


def parse_config(mapping: dict) -> ExperimentConfig:
    """Build a config from an already-flat key/value string mapping (the
    JSON config-echo form)."""
    raw = {str(k).lower(): (None, str(v)) for k, v in mapping.items()}
    bad = [f"unknown key {k!r}" for k in raw if k not in _KEYS]
    for k in list(raw):
        if k not in _KEYS:
            raw.pop(k)
    return _build(raw, bad)


def _build(raw: dict, bad: list) -> ExperimentConfig:
    values = {}
    for key, (lineno, text) in raw.items():
        _, parser = _KEYS[key]
        where = f"line {lineno}: " if lineno is not None else ""
        try:
            values[key] = parser(text)
        except ValueError as exc:
            bad.append(f"{where}{key}: {exc}")
    kernel = _kernel_from_keys(values, bad)
    if bad:
        raise ConfigError(bad)
    fields = {_KEYS[k][0]: v for k, v in values.items()}
    return ExperimentConfig(kernel=kernel, **fields)


def config_echo(cfg: ExperimentConfig) -> dict:
    """Flat key -> value-string mapping that re-parses to an identical
    config (floats printed with 17 significant digits)."""
    k = cfg.kernel
    out = {"kernel.family": k.family, "kernel.d": str(k.d)}
    if k.s is not None:
        out["kernel.s"] = format_float(k.s)
    if k.attractive:
        out["kernel.attractive"] = "true"
    if k.chi is not None:
        out["kernel.chi"] = format_float(k.chi)
    for name in ("a", "b", "va", "vb"):
        v = getattr(k, name)
        if v is not None:
            out[f"kernel.{name}"] = format_float(v)
    if cfg.experiment is not None:
        out["experiment.kind"] = cfg.experiment
    out["mollifier.radius"] = format_float(cfg.radius)
    if cfg.alpha is not None:
        out["mollifier.alpha"] = _fmt_exponent(cfg.alpha)
    out["mollifier.table_resolution"] = str(cfg.table_resolution)
    out["mollifier.table_tol"] = format_float(cfg.table_tol)
    out["grid.g"] = str(cfg.G)
    out["grid.l"] = format_float(cfg.L)
    if cfg.n_list:
        out["particles.n"] = ", ".join(str(n) for n in cfg.n_list)
    if cfg.dt is not None:
        out["particles.dt"] = format_float(cfg.dt)
    if cfg.t_final is not None:
        out["particles.t_final"] = format_float(cfg.t_final)
    out["particles.seed"] = str(cfg.seed)
    if cfg.cutoff_a is None:
        out["particles.cutoff_a"] = "none"
    elif cfg.cutoff_a == "auto":
        out["particles.cutoff_a"] = "auto"
    else:
        out["particles.cutoff_a"] = format_float(cfg.cutoff_a)
    out["particles.drift_path"] = cfg.drift_path
    out["particles.reps"] = str(cfg.reps)
    out["init.weights"] = ", ".join(format_float(w) for w in cfg.init_weights)
    out["init.means"] = ", ".join(format_float(m) for m in cfg.init_means)
    out["init.sigma2"] = ", ".join(format_float(s) for s in cfg.init_sigma2)
    if cfg.pde_dt is not None:
        out["pde.dt"] = format_float(cfg.pde_dt)
    if cfg.snapshot_times is not None:
        out["pde.snapshot_times"] = ", ".join(
            format_float(t) for t in cfg.snapshot_times
        )
    if cfg.r is not None:
        out["pde.r"] = format_float(cfg.r)
    out["pde.guard"] = format_float(cfg.guard)
    if cfg.heun:
        out["pde.heun"] = "true"
    out["experiment.norm"] = cfg.norm
    out["experiment.kr_grid"] = str(cfg.kr_grid)
    out["experiment.kr_tol"] = format_float(cfg.kr_tol)
    out["experiment.zeta"] = _fmt_exponent(cfg.zeta)
    out["output.dir"] = cfg.out_dir
    return out
