"""Home-Box overlay state: LRU caches, link metrics and peer selection."""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidParameter
from .rng import make_rng
from .topology import Topology, hop_count

__all__ = [
    "LruCache",
    "DistanceVector",
    "ResourceMetrics",
    "HomeBox",
    "lru_lookup",
    "lru_insert",
    "place_homeboxes",
    "hb_distance_matrix",
    "build_neighbor_lists",
    "distance_vector",
    "rank_peers",
    "filter_overloaded",
    "synthetic_resources",
]


class LruCache:
    """Fixed-capacity least-recently-used set of video ids."""

    __slots__ = ("capacity", "_data")

    def __init__(self, capacity: int):
        if capacity < 1:
            raise InvalidParameter(f"cache capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        # insertion order = recency order, least recent first
        self._data: OrderedDict[int, None] = OrderedDict()

    @property
    def entries(self) -> list[int]:
        """Resident videos, most recent first."""
        return list(reversed(self._data))

    def __contains__(self, video) -> bool:
        return video in self._data

    def __len__(self) -> int:
        return len(self._data)

    def lookup(self, video: int) -> bool:
        if video in self._data:
            self._data.move_to_end(video)
            return True
        return False

    def insert(self, video: int) -> int | None:
        data = self._data
        if video in data:
            data.move_to_end(video)
            return None
        data[video] = None
        if len(data) > self.capacity:
            return data.popitem(last=False)[0]
        return None

    def __repr__(self):
        return f"LruCache(capacity={self.capacity}, entries={self.entries})"


def lru_lookup(cache: LruCache, video: int) -> bool:
    """Report a hit and refresh recency; a miss leaves the cache untouched."""
    return cache.lookup(video)


def lru_insert(cache: LruCache, video: int) -> int | None:
    """Make ``video`` most recent, returning the evicted video if any."""
    return cache.insert(video)


@dataclass(frozen=True)
class DistanceVector:
    """Network cost between two endpoints.

    hops, delay_us, loss, jitter_us, duplicates. Loss and duplicates are
    fractions in [0, 1].
    """

    hops: float
    delay_us: float = 0.0
    loss: float = 0.0
    jitter_us: float = 0.0
    duplicates: float = 0.0

    def __post_init__(self):
        values = self.as_tuple()
        if any(v < 0 for v in values):
            raise InvalidParameter(f"distance vector components must be >= 0: {values}")
        if self.loss > 1 or self.duplicates > 1:
            raise InvalidParameter("loss and duplicates are fractions and must be <= 1")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.hops, self.delay_us, self.loss, self.jitter_us, self.duplicates)

    def score(self, weights: Sequence[float]) -> float:
        return sum(w * c for w, c in zip(weights, self.as_tuple()))


@dataclass(frozen=True)
class ResourceMetrics:
    cpu_utilization: float = 0.0
    access_capacity: float = 100.0  # Mbit/s
    access_utilization: float = 0.0

    def __post_init__(self):
        if not 0 <= self.cpu_utilization <= 1 or not 0 <= self.access_utilization <= 1:
            raise InvalidParameter("utilizations must lie in [0, 1]")
        if not self.access_capacity > 0:
            raise InvalidParameter("access capacity must be positive")


@dataclass
class HomeBox:
    id: int
    router: int
    cache: LruCache | None = None
    neighbors: list[tuple[int, int]] = field(default_factory=list)
    resources: ResourceMetrics = field(default_factory=ResourceMetrics)


def place_homeboxes(t: Topology, n: int, seed: int, cache_size: int | None = None
                    ) -> list[HomeBox]:
    """Attach ``n`` HBs to routers drawn uniformly with replacement.

    Caches are created empty when ``cache_size`` is given.
    """
    if n < 1:
        raise InvalidParameter(f"need at least one Home-Box, got {n}")
    if t.node_count < 1:
        raise InvalidParameter("cannot place Home-Boxes on an empty topology")
    routers = make_rng(seed, "placement").integers(t.node_count, size=n)
    return [
        HomeBox(i, int(r), LruCache(cache_size) if cache_size else None)
        for i, r in enumerate(routers.tolist())
    ]


def hb_distance_matrix(t: Topology, routers: Sequence[int]) -> np.ndarray:
    """Pairwise HB hop counts from their attachment routers (int16)."""
    routers = np.asarray(routers, dtype=np.int64)
    uniq, inverse = np.unique(routers, return_inverse=True)
    rows = np.empty((len(uniq), len(routers)), dtype=np.int16)
    for i, r in enumerate(uniq):
        rows[i] = t.distances_from(int(r))[routers]
    return rows[inverse]


def build_neighbor_lists(t: Topology, hbs: list[HomeBox], d: int,
                         distances: np.ndarray | None = None) -> list[HomeBox]:
    """Give every HB its ``d`` nearest other HBs as ``(hb_id, hops)``.

    Selection is directed and ties break by ascending HB id. ``distances``
    may carry a precomputed :func:`hb_distance_matrix` to skip the BFS work.
    """
    if d < 0:
        raise InvalidParameter(f"degree must be >= 0, got {d}")
    n = len(hbs)
    k = min(d, n - 1)
    if k == 0:
        for hb in hbs:
            hb.neighbors = []
        return hbs
    if distances is None:
        distances = hb_distance_matrix(t, [hb.router for hb in hbs])
    ids = np.arange(n, dtype=np.int64)
    for i, hb in enumerate(hbs):
        # one sortable key per candidate: hops first, id second
        key = distances[i].astype(np.int64) * n + ids
        key[i] = np.iinfo(np.int64).max
        if k < n - 1:
            part = np.argpartition(key, k)[:k]
        else:
            part = np.delete(ids, i)
        chosen = part[np.argsort(key[part])]
        hb.neighbors = [(int(j), int(distances[i, j])) for j in chosen]
    return hbs


def _synthetic_link(seed: int, a: int, b: int, hops: int) -> DistanceVector:
    lo, hi = min(a, b), max(a, b)
    rng = make_rng(seed, "metrics", 1, lo, hi)
    per_hop_delay, loss, jitter_frac, dup = rng.random(4)
    delay = hops * (200.0 + 1800.0 * per_hop_delay)
    return DistanceVector(
        hops=hops,
        delay_us=delay,
        loss=0.02 * loss,
        jitter_us=0.1 * jitter_frac * delay,
        duplicates=0.01 * dup,
    )


def distance_vector(t: Topology, a: HomeBox, b: HomeBox, profile: str = "default",
                    seed: int = 0) -> DistanceVector:
    """Distance vector between two HBs' attachment routers.

    The ``default`` profile fills hops only. The ``synthetic`` profile also
    derives delay, loss, jitter and duplicates from ``seed`` and the HB pair;
    the result is symmetric in ``a`` and ``b``.
    """
    hops = hop_count(t, a.router, b.router)
    if profile == "default":
        return DistanceVector(hops)
    if profile == "synthetic":
        return _synthetic_link(seed, a.id, b.id, hops)
    raise InvalidParameter(f"unknown distance profile {profile!r}")


def rank_peers(requester: HomeBox, candidates: Sequence[HomeBox],
               vectors: Sequence[DistanceVector], weights: Sequence[float]) -> list[int]:
    """Order candidate HB ids by weighted distance-vector score, then id."""
    weights = tuple(float(w) for w in weights)
    if len(weights) != 5 or any(w < 0 for w in weights):
        raise InvalidParameter(f"need 5 non-negative weights, got {weights}")
    if not any(weights):
        raise InvalidParameter("ranking weights must not all be zero")
    if len(vectors) != len(candidates):
        raise InvalidParameter("one distance vector per candidate required")
    scored = sorted((v.score(weights), hb.id) for hb, v in zip(candidates, vectors))
    return [hb_id for _, hb_id in scored]


def filter_overloaded(candidates: Iterable[HomeBox], cpu_threshold: float,
                      access_threshold: float) -> list[HomeBox]:
    """Drop candidates above either utilization threshold.

    If that would drop everyone the input is returned unchanged.
    """
    if not 0 <= cpu_threshold <= 1 or not 0 <= access_threshold <= 1:
        raise InvalidParameter("thresholds must lie in [0, 1]")
    candidates = list(candidates)
    kept = [
        hb for hb in candidates
        if hb.resources.cpu_utilization <= cpu_threshold
        and hb.resources.access_utilization <= access_threshold
    ]
    return kept or candidates


def synthetic_resources(seed: int, hb_id: int) -> ResourceMetrics:
    rng = make_rng(seed, "metrics", 0, hb_id)
    cpu, cap, access = rng.random(3)
    return ResourceMetrics(
        cpu_utilization=float(cpu),
        access_capacity=float(10.0 + 990.0 * cap),
        access_utilization=float(access),
    )
