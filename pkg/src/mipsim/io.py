"""Deterministic result persistence.

CSV schemas:
  * norm trace        ``t,l1,lr,mass,min`` (one row per time step)
  * rate report       ``n,reps,mean_err,std_err``
  * coupling gaps     ``n,rep,gap``
  * particle snapshot ``i,x1,...,xd``

Grid fields travel in a self-describing binary container: a single-line
JSON header (d, G, L, t, kernel spec) terminated by a newline, followed
by the values as little-endian 64-bit floats in row-major order.

All floating-point text output is printed with 17 significant digits so
reruns can be compared byte for byte; JSON summaries carry floats as
such strings (which also covers ``inf`` cleanly) and are serialized
with sorted keys.
"""

from __future__ import annotations

import json
import subprocess
from fractions import Fraction
from pathlib import Path

import numpy as np

from .config import format_float
from .errors import DomainError
from .grid import GridField
from .kernels import KernelSpec

__all__ = [
    "write_norm_trace",
    "write_rate_csv",
    "write_chaos_csv",
    "write_snapshot_csv",
    "read_snapshot_csv",
    "write_grid_field",
    "read_grid_field",
    "read_measure",
    "kernel_to_mapping",
    "kernel_from_mapping",
    "json_text",
    "write_json",
    "format_quantity",
    "version_string",
]


def format_quantity(x) -> str:
    """17-significant-digit text for floats; exact text for rationals
    and integers."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format_float(x)


def _write_text(path, header: str, rows) -> str:
    lines = [header]
    lines.extend(",".join(cells) for cells in rows)
    text = "\n".join(lines) + "\n"
    Path(path).write_text(text)
    return text


def write_norm_trace(path, run) -> str:
    """Per-step norm trace of a PDE run: ``t,l1,lr,mass,min``."""
    rows = (
        (
            format_float(t),
            format_float(l1),
            format_float(lr),
            format_float(mass),
            format_float(mn),
        )
        for t, l1, lr, mass, mn in zip(
            run.times, run.l1_trace, run.lr_trace, run.mass_trace, run.min_trace
        )
    )
    return _write_text(path, "t,l1,lr,mass,min", rows)


def write_rate_csv(path, rows) -> str:
    """Rate-sweep rows ``(n, reps, mean_err, std_err)``."""
    body = (
        (str(n), str(reps), format_float(mean), format_float(std))
        for n, reps, mean, std in rows
    )
    return _write_text(path, "n,reps,mean_err,std_err", body)


def write_chaos_csv(path, rows) -> str:
    """Coupling-gap rows ``(n, rep, gap)``."""
    body = ((str(n), str(rep), format_float(gap)) for n, rep, gap in rows)
    return _write_text(path, "n,rep,gap", body)


def write_snapshot_csv(path, positions: np.ndarray) -> str:
    """Particle positions as ``i,x1,...,xd``."""
    positions = np.asarray(positions, dtype=float)
    if positions.ndim != 2:
        raise DomainError("positions must be an (n, d) array")
    d = positions.shape[1]
    header = ",".join(["i"] + [f"x{a + 1}" for a in range(d)])
    body = (
        [str(i)] + [format_float(v) for v in row]
        for i, row in enumerate(positions)
    )
    return _write_text(path, header, body)


def read_snapshot_csv(path) -> np.ndarray:
    """Read an ``i,x1,...,xd`` snapshot back into an (n, d) array."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise DomainError(f"{path}: empty snapshot file")
    header = lines[0].split(",")
    if header[0] != "i" or any(
        h != f"x{a + 1}" for a, h in enumerate(header[1:])
    ):
        raise DomainError(f"{path}: expected header i,x1,...,xd, got {lines[0]!r}")
    d = len(header) - 1
    if d < 1:
        raise DomainError(f"{path}: snapshot has no coordinate columns")
    rows = []
    for line in lines[1:]:
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != d + 1:
            raise DomainError(f"{path}: malformed row {line!r}")
        rows.append([float(c) for c in cells[1:]])
    if not rows:
        raise DomainError(f"{path}: snapshot contains no particles")
    return np.asarray(rows, dtype=float)


def kernel_to_mapping(kernel: KernelSpec) -> dict:
    out = {"family": kernel.family, "d": kernel.d}
    if kernel.s is not None:
        out["s"] = kernel.s
    if kernel.attractive:
        out["attractive"] = True
    if kernel.chi is not None:
        out["chi"] = kernel.chi
    for name in ("a", "b", "va", "vb"):
        v = getattr(kernel, name)
        if v is not None:
            out[name] = v
    return out


def kernel_from_mapping(mapping: dict) -> KernelSpec:
    allowed = {"family", "d", "s", "attractive", "chi", "a", "b", "va", "vb"}
    unknown = set(mapping) - allowed
    if unknown:
        raise DomainError(f"unknown kernel fields {sorted(unknown)}")
    params = dict(mapping)
    family = params.pop("family")
    d = params.pop("d")
    return KernelSpec(family, d, **params)


def write_grid_field(path, field: GridField, t: float, kernel: KernelSpec) -> None:
    """Self-describing container: one JSON header line, then the values
    as little-endian float64 in row-major order."""
    header = {
        "d": field.d,
        "G": field.G,
        "L": field.L,
        "t": float(t),
        "kernel": kernel_to_mapping(kernel),
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_grid_field(path):
    """Inverse of write_grid_field: returns (field, t, kernel)."""
    blob = Path(path).read_bytes()
    nl = blob.find(b"\n")
    if nl < 0:
        raise DomainError(f"{path}: missing container header")
    try:
        header = json.loads(blob[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DomainError(f"{path}: bad container header: {exc}") from exc
    for key in ("d", "G", "L", "t", "kernel"):
        if key not in header:
            raise DomainError(f"{path}: container header missing {key!r}")
    d, G = int(header["d"]), int(header["G"])
    payload = blob[nl + 1 :]
    expected = G**d * 8
    if len(payload) != expected:
        raise DomainError(
            f"{path}: payload holds {len(payload)} bytes, expected {expected}"
        )
    values = np.frombuffer(payload, dtype="<f8").reshape((G,) * d).astype(float)
    field = GridField(d, G, float(header["L"]), values)
    return field, float(header["t"]), kernel_from_mapping(header["kernel"])


def read_measure(path):
    """Read a snapshot file as a measure for distance computations: a
    particle CSV becomes a uniformly weighted point set, a binary grid
    container becomes the stored field."""
    from .measures import WeightedPointSet

    head = Path(path).read_bytes()[:1]
    if head == b"{":
        field, _, _ = read_grid_field(path)
        return field
    positions = read_snapshot_csv(path)
    n = positions.shape[0]
    return WeightedPointSet(positions, np.full(n, 1.0 / n))


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating, Fraction)):
        return format_quantity(obj)
    return obj


def json_text(obj) -> str:
    """Deterministic JSON: sorted keys, floats rendered as
    17-significant-digit strings (rationals exactly)."""
    return json.dumps(_jsonify(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> str:
    text = json_text(obj)
    Path(path).write_text(text)
    return text


def version_string() -> str:
    """git-describe-style version of the running code; falls back to the
    packaged version when the source tree is not a git checkout."""
    root = Path(__file__).resolve().parent.parent.parent
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=root,
            capture_output=True,
            text=True,
            timeout=10,
        )
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    try:
        from importlib.metadata import version

        return "v" + version("mipsim")
    except Exception:
        return "v0.1.0"
