"""Deterministic random streams.

Every random decision in a run is drawn from a numpy ``PCG64`` generator
seeded by ``SeedSequence(entropy=root_seed, spawn_key=(stream_id,))``. The
stream ids below are part of the reproducibility contract: changing one
changes every result produced under that seed.

==========  ==  ==============================================
stream      id  consumer
==========  ==  ==============================================
topology    0   preferential-attachment generator
placement   1   Home-Box attachment routers
workload    2   request stream (requester, video)
push        3   random push targets
metrics     4   synthetic distance-vector / resource profiles
radius      5   radius-estimation source sample
==========  ==  ==============================================

Sweep rows derive their own root seed with :func:`row_seed`.
"""
from __future__ import annotations

import numpy as np

STREAMS = {
    "topology": 0,
    "placement": 1,
    "workload": 2,
    "push": 3,
    "metrics": 4,
    "radius": 5,
}

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def make_rng(seed: int, stream: str, *extra: int) -> np.random.Generator:
    """Return the generator for ``stream`` under root ``seed``.

    ``extra`` integers extend the spawn key, giving independent sub-streams
    (used e.g. for per-pair synthetic link metrics).
    """
    if stream not in STREAMS:
        raise KeyError(f"unknown random stream {stream!r}")
    ss = np.random.SeedSequence(
        entropy=int(seed) & MASK64, spawn_key=(STREAMS[stream], *extra)
    )
    return np.random.Generator(np.random.PCG64(ss))


def splitmix64(x: int) -> int:
    """One round of the SplitMix64 finalizer."""
    x = (x + _GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def row_seed(root: int, repetition: int) -> int:
    """Seed for one sweep row.

    Repetition 0 runs under the root seed itself, so a one-repetition sweep
    reproduces plain ``run`` calls. Later repetitions get
    ``splitmix64(root ^ (repetition * 0x9E3779B97F4A7C15 mod 2**64))``.
    The axis value is deliberately not mixed in: every point of a sweep sees
    the same topology, placement and request stream (common random numbers).
    """
    if repetition == 0:
        return int(root) & MASK64
    return splitmix64((int(root) ^ (repetition * _GOLDEN)) & MASK64)
