"""Counter-based random streams.

All randomness flows through Philox (a counter-based generator) keyed by a
master seed plus a tuple of integer context indices, e.g. (rep, step). Two
properties matter for the experiment harness:

  * determinism: the same (seed, context) always yields the same stream, on
    any machine and regardless of how many worker threads are active,
    because a stream is always consumed in one ordered block by the task
    that owns its context;
  * disjointness: distinct contexts map to distinct Philox keys through
    SeedSequence, so streams for different (rep, step) pairs never overlap.

String tags are folded to integers with crc32 so contexts read naturally at
call sites, e.g. stream(seed, rep, "em", step).
"""
from __future__ import annotations

import zlib

import numpy as np

__all__ = ["stream", "box_muller"]


def _as_key(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    i = int(part)
    if i < 0:
        raise ValueError("stream context indices must be non-negative")
    return i


def stream(seed: int, *context) -> np.random.Generator:
    """Return the generator for the given (seed, context) address."""
    key = tuple(_as_key(p) for p in context)
    ss = np.random.SeedSequence(int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def box_muller(gen: np.random.Generator, n: int, d: int) -> np.ndarray:
    """Draw n i.i.d. standard d-dimensional Gaussians via Box-Muller.

    Uses exactly ceil(d/2) uniform pairs per sample so the draw count per
    particle is fixed, which keeps streams aligned across code paths.
    """
    m = (d + 1) // 2
    u = gen.random((n, 2 * m))
    u1 = np.clip(u[:, :m], np.finfo(float).tiny, None)  # log(0) guard
    u2 = u[:, m:]
    rad = np.sqrt(-2.0 * np.log(u1))
    ang = 2.0 * np.pi * u2
    z = np.empty((n, 2 * m))
    z[:, 0::2] = rad * np.cos(ang)
    z[:, 1::2] = rad * np.sin(ang)
    return z[:, :d]
