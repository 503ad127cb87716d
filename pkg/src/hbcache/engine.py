"""Request resolution and the simulation run loop.

A request is served from the requester's own cache (local hit, cost 0), else
from the nearest neighbor holding the video (peering hit, cost = hops to that
neighbor), else from the origin server (miss, cost = ``h_miss``). The
requester caches every video it had to fetch.
"""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .config import PopularitySource, SimConfig, TopologySource
from .errors import EmptyRunError, InvalidParameter
from .overlay import (
    HomeBox,
    LruCache,
    build_neighbor_lists,
    distance_vector,
    filter_overloaded,
    hb_distance_matrix,
    place_homeboxes,
    rank_peers,
    synthetic_resources,
)
from .rng import make_rng
from .topology import Topology, estimate_radius, generate_power_law, load_edge_list
from .workload import (
    PopularityModel,
    Request,
    RequestStream,
    load_empirical,
    parse_counts,
    zipf_popularity,
)

__all__ = [
    "LOCAL",
    "PEERING",
    "MISS",
    "ServeOutcome",
    "RunMetrics",
    "SimState",
    "build_state",
    "serve_request",
    "push_content",
    "run",
    "overall_cost",
    "write_outcome_log",
]

LOCAL, PEERING, MISS = "local", "peering", "miss"


class ServeOutcome(NamedTuple):
    seq: int
    requester: int
    video: int
    kind: str
    server: int | None
    hops: int | Fraction


@dataclass
class RunMetrics:
    """Counters for the measured part of a run.

    Ratios and costs are exposed twice: as exact ``Fraction`` values
    (``exact_*``) and as the floats that get emitted. ``avg_cost`` is
    computed from the emitted floats, so recomputing it from an output row
    reproduces it bit for bit.
    """

    n_requests: int = 0
    n_local: int = 0
    n_peering: int = 0
    n_miss: int = 0
    sum_peering_hops: int = 0
    h_miss: Fraction = Fraction(0)
    outcomes: list[ServeOutcome] | None = field(default=None, repr=False, compare=False)

    def record(self, outcome: ServeOutcome) -> None:
        self.n_requests += 1
        if outcome.kind == LOCAL:
            self.n_local += 1
        elif outcome.kind == PEERING:
            self.n_peering += 1
            self.sum_peering_hops += outcome.hops
        else:
            self.n_miss += 1

    def _ratio(self, count) -> Fraction:
        return Fraction(count, self.n_requests) if self.n_requests else Fraction(0)

    @property
    def exact_ratios(self) -> tuple[Fraction, Fraction, Fraction]:
        return self._ratio(self.n_local), self._ratio(self.n_peering), self._ratio(self.n_miss)

    @property
    def exact_h_peering(self) -> Fraction:
        return Fraction(self.sum_peering_hops, self.n_peering) if self.n_peering else Fraction(0)

    @property
    def exact_cost(self) -> Fraction:
        """Total hops over measured requests divided by their count."""
        if not self.n_requests:
            raise EmptyRunError("no measured requests")
        return (self.sum_peering_hops + self.n_miss * self.h_miss) / self.n_requests

    @property
    def r_local(self) -> float:
        return float(self._ratio(self.n_local))

    @property
    def r_peering(self) -> float:
        return float(self._ratio(self.n_peering))

    @property
    def r_miss(self) -> float:
        return float(self._ratio(self.n_miss))

    @property
    def h_peering(self) -> float:
        return float(self.exact_h_peering)

    @property
    def avg_cost(self) -> float:
        return overall_cost(self)

    def to_dict(self) -> dict:
        return {
            "n_requests": self.n_requests,
            "n_local": self.n_local,
            "n_peering": self.n_peering,
            "n_miss": self.n_miss,
            "sum_peering_hops": self.sum_peering_hops,
            "h_miss": float(self.h_miss),
            "r_local": self.r_local,
            "r_peering": self.r_peering,
            "r_miss": self.r_miss,
            "h_peering": self.h_peering,
            "avg_cost": self.avg_cost,
        }


def overall_cost(m: RunMetrics) -> float:
    """Average delivery cost per measured request, in hops.

    Local hits cost nothing, so this is
    ``r_peering * h_peering + r_miss * h_miss``.
    """
    if m.n_requests < 1:
        raise EmptyRunError("overall cost of a run without measured requests")
    return m.r_peering * m.h_peering + m.r_miss * float(m.h_miss)


@dataclass
class SimState:
    """Mutable state of one run.

    ``scan[i]`` is the peer-probe order of HB ``i``: its neighbor list after
    optional resource filtering and ranking.
    """

    topology: Topology
    hbs: list[HomeBox]
    catalog_size: int
    h_miss: Fraction
    refresh_server: bool = True
    scan: list[list[tuple[int, int]]] = field(default_factory=list)
    model: PopularityModel | None = None

    def __post_init__(self):
        if not self.scan:
            self.scan = [list(hb.neighbors) for hb in self.hbs]
        self.caches = [hb.cache for hb in self.hbs]
        # direct dict views for the hot path
        self.stores = [c._data for c in self.caches]


def serve_request(state: SimState, req: Request) -> ServeOutcome:
    r, v = req.requester, req.video
    if not 0 <= r < len(state.hbs):
        raise InvalidParameter(f"requester {r} is not a Home-Box id")
    if not 0 <= v < state.catalog_size:
        raise InvalidParameter(f"video {v} outside catalog of {state.catalog_size}")
    stores = state.stores
    own = stores[r]
    if v in own:
        own.move_to_end(v)
        return ServeOutcome(req.sequence, r, v, LOCAL, None, 0)
    for j, hops in state.scan[r]:
        peer = stores[j]
        if v in peer:
            if state.refresh_server:
                peer.move_to_end(v)
            state.caches[r].insert(v)
            return ServeOutcome(req.sequence, r, v, PEERING, j, hops)
    state.caches[r].insert(v)
    return ServeOutcome(req.sequence, r, v, MISS, None, state.h_miss)


def push_content(state: SimState, video: int, k: int, strategy: str, seed: int) -> list[int]:
    """Pre-place ``video`` in ``k`` Home-Box caches.

    ``random`` picks HBs uniformly without replacement; ``top-degree`` picks
    HBs whose attachment routers have the highest degree, ties by HB id.
    Returns the seeded HB ids in selection order.
    """
    n = len(state.hbs)
    if not 0 <= k <= n:
        raise InvalidParameter(f"push k must lie in [0, {n}], got {k}")
    if not 0 <= video < state.catalog_size:
        raise InvalidParameter(f"video {video} outside catalog of {state.catalog_size}")
    if strategy == "random":
        rng = make_rng(seed, "push", video)
        chosen = [int(x) for x in rng.choice(n, size=k, replace=False)]
    elif strategy == "top-degree":
        degrees = state.topology.degrees
        chosen = sorted(range(n), key=lambda i: (-int(degrees[state.hbs[i].router]), i))[:k]
    else:
        raise InvalidParameter(f"unknown push strategy {strategy!r}")
    for i in chosen:
        state.caches[i].insert(video)
    return chosen


# --- run setup ---------------------------------------------------------------

def _file_key(path: str) -> tuple[str, float]:
    return os.path.abspath(path), os.path.getmtime(path)


@lru_cache(maxsize=4)
def _cached_topology(source: TopologySource, seed: int, file_key=None) -> Topology:
    if source.kind == "file":
        with open(source.path, encoding="utf-8") as fh:
            return load_edge_list(fh.read())
    return generate_power_law(source.n_routers, source.edges_per_new_node, seed)


def load_topology(config: SimConfig) -> Topology:
    src = config.topology
    if src.kind == "file":
        # the seed plays no part in a loaded map
        return _cached_topology(src, 0, _file_key(src.path))
    return _cached_topology(src, config.seed)


@lru_cache(maxsize=2)
def _cached_placement(topology: Topology, n_hbs: int, seed: int):
    routers = tuple(hb.router for hb in place_homeboxes(topology, n_hbs, seed))
    return routers, hb_distance_matrix(topology, routers)


@lru_cache(maxsize=8)
def _cached_radius(topology: Topology, sample_size: int, seed: int) -> int:
    return estimate_radius(topology, sample_size, seed)


def load_popularity(config: SimConfig) -> PopularityModel:
    src: PopularitySource = config.popularity
    if src.kind == "empirical":
        with open(src.path, encoding="utf-8") as fh:
            return load_empirical(parse_counts(fh.read()))
    return zipf_popularity(config.catalog_size, src.alpha)


def miss_cost(config: SimConfig, topology: Topology) -> Fraction:
    if config.h_miss_override is not None:
        return Fraction(config.h_miss_override)
    return Fraction(_cached_radius(topology, config.radius_samples, config.seed))


def _scan_order(state_hbs: list[HomeBox], topology: Topology, config: SimConfig):
    cpu_t, access_t = config.resource_thresholds
    filtering = cpu_t < 1 or access_t < 1
    reranking = tuple(config.rank_weights) != (1.0, 0.0, 0.0, 0.0, 0.0)
    scan = []
    for hb in state_hbs:
        order = list(hb.neighbors)
        if filtering and order:
            hops = dict(order)
            kept = filter_overloaded([state_hbs[j] for j, _ in order], cpu_t, access_t)
            order = [(p.id, hops[p.id]) for p in kept]
        if reranking and order:
            hops = dict(order)
            peers = [state_hbs[j] for j, _ in order]
            vectors = [distance_vector(topology, hb, p, config.distance_profile, config.seed)
                       for p in peers]
            order = [(j, hops[j]) for j in rank_peers(hb, peers, vectors, config.rank_weights)]
        scan.append(order)
    return scan


def build_state(config: SimConfig) -> SimState:
    """Topology, placement, neighbor lists and empty caches for ``config``."""
    topology = load_topology(config)
    model = load_popularity(config)
    routers, distances = _cached_placement(topology, config.n_hbs, config.seed)
    hbs = [HomeBox(i, r, LruCache(config.cache_size)) for i, r in enumerate(routers)]
    if config.resource_profile == "synthetic":
        for hb in hbs:
            hb.resources = synthetic_resources(config.seed, hb.id)
    build_neighbor_lists(topology, hbs, config.degree, distances)
    state = SimState(
        topology=topology,
        hbs=hbs,
        catalog_size=model.catalog_size,
        h_miss=miss_cost(config, topology),
        refresh_server=config.refresh_server,
        scan=_scan_order(hbs, topology, config),
        model=model,
    )
    return state


def run(config: SimConfig) -> RunMetrics:
    """Execute one simulation run.

    The first ``floor(warmup_fraction * n_requests)`` requests are served
    (their cache side effects apply) but not counted. With
    ``config.log_outcomes`` the returned metrics carry every outcome,
    warm-up included, in ``.outcomes``.
    """
    state = build_state(config)
    if config.push is not None:
        for video in config.push.videos:
            push_content(state, video, config.push.k, config.push.strategy, config.seed)
    stream = RequestStream(state.model, config.n_hbs, config.seed)
    warmup = int(config.warmup_fraction * config.n_requests)
    metrics = RunMetrics(h_miss=state.h_miss)
    log: list[ServeOutcome] | None = [] if config.log_outcomes else None
    record = metrics.record
    next_req = stream.next
    for seq in range(config.n_requests):
        outcome = serve_request(state, next_req())
        if seq >= warmup:
            record(outcome)
        if log is not None:
            log.append(outcome)
    metrics.outcomes = log
    return metrics


def write_outcome_log(outcomes: Sequence[ServeOutcome], fh: io.TextIOBase | None = None) -> str | None:
    """Write outcomes as CSV (``seq,requester,video,kind,server,hops``).

    Returns the text when ``fh`` is None.
    """
    buf = fh if fh is not None else io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["seq", "requester", "video", "kind", "server", "hops"])
    for o in outcomes:
        hops = o.hops
        if isinstance(hops, Fraction):
            hops = hops.numerator if hops.denominator == 1 else float(hops)
        writer.writerow([o.seq, o.requester, o.video, o.kind,
                         "" if o.server is None else o.server, hops])
    return buf.getvalue() if fh is None else None
