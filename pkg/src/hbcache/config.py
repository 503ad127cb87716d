"""Simulation and sweep configuration.

Configuration documents are YAML (JSON is accepted as a YAML subset). Every
key is optional; omitted keys take the defaults below.

.. code-block:: yaml

    seed: 1
    topology:
      generated: {n_routers: 47000, edges_per_new_node: 2}
      # file: path/to/edges.txt
    n_hbs: 5000
    catalog_size: 500
    popularity:
      zipf: {alpha: 0.8}
      # empirical: path/to/counts.txt
    degree: 25
    cache_size: 10
    n_requests: 1000000
    warmup_fraction: 0.0
    h_miss_override: null        # e.g. 5.5 or "11/2"; null = estimated radius
    radius_samples: 64
    rank_weights: [1, 0, 0, 0, 0]
    resource_thresholds: [1.0, 1.0]
    distance_profile: default    # or synthetic
    resource_profile: idle       # or synthetic
    refresh_server: true
    push: null                   # {videos: [0], k: 500, strategy: top-degree}
    log_outcomes: false

A sweep document is a configuration document plus a ``sweep`` block::

    sweep: {axis: degree, values: [5, 10, 20, 40], repetitions: 1}
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import yaml

from .errors import ParseError, ValidationError

__all__ = [
    "TopologySource",
    "PopularitySource",
    "PushSpec",
    "SimConfig",
    "SweepSpec",
    "parse_config",
    "parse_sweep",
    "config_to_dict",
    "serialize_config",
    "serialize_sweep",
]

AXES = ("degree", "cache_size")
PUSH_STRATEGIES = ("random", "top-degree")


@dataclass(frozen=True)
class TopologySource:
    kind: str = "generated"
    n_routers: int = 47000
    edges_per_new_node: int = 2
    path: str | None = None


@dataclass(frozen=True)
class PopularitySource:
    kind: str = "zipf"
    alpha: float = 0.8
    path: str | None = None


@dataclass(frozen=True)
class PushSpec:
    videos: tuple[int, ...]
    k: int
    strategy: str = "top-degree"


@dataclass(frozen=True)
class SimConfig:
    seed: int = 1
    topology: TopologySource = field(default_factory=TopologySource)
    n_hbs: int = 5000
    catalog_size: int = 500
    popularity: PopularitySource = field(default_factory=PopularitySource)
    degree: int = 25
    cache_size: int = 10
    n_requests: int = 1_000_000
    warmup_fraction: float = 0.0
    h_miss_override: Fraction | None = None
    radius_samples: int = 64
    rank_weights: tuple[float, ...] = (1.0, 0.0, 0.0, 0.0, 0.0)
    resource_thresholds: tuple[float, float] = (1.0, 1.0)
    distance_profile: str = "default"
    resource_profile: str = "idle"
    refresh_server: bool = True
    push: PushSpec | None = None
    log_outcomes: bool = False

    def __post_init__(self):
        validate_config(self)

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class SweepSpec:
    base: SimConfig
    axis: str
    values: tuple[int, ...]
    repetitions: int = 1

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValidationError(f"sweep.axis must be one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise ValidationError("sweep.values must be non-empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValidationError("sweep.values must be strictly ascending")
        if self.repetitions < 1:
            raise ValidationError("sweep.repetitions must be >= 1")
        # every point must itself be a valid configuration
        for v in self.values:
            self.base.replace(**{self.axis: v})


def validate_config(c: SimConfig) -> None:
    def need(ok, message):
        if not ok:
            raise ValidationError(message)

    need(0 <= c.seed < 2**64, "seed must be an unsigned 64-bit integer")
    t = c.topology
    need(t.kind in ("generated", "file"), f"topology kind must be generated or file, got {t.kind!r}")
    if t.kind == "generated":
        need(t.edges_per_new_node >= 1, "topology.edges_per_new_node must be >= 1")
        need(t.n_routers >= t.edges_per_new_node + 1,
             "topology.n_routers must be >= edges_per_new_node + 1")
    else:
        need(bool(t.path), "topology.file requires a path")
    need(c.n_hbs >= 1, "n_hbs must be >= 1")
    need(c.catalog_size >= 1, "catalog_size must be >= 1")
    p = c.popularity
    need(p.kind in ("zipf", "empirical"), f"popularity kind must be zipf or empirical, got {p.kind!r}")
    if p.kind == "zipf":
        need(p.alpha >= 0, "popularity.zipf.alpha must be >= 0")
    else:
        need(bool(p.path), "popularity.empirical requires a path")
    need(c.degree >= 0, "degree must be >= 0")
    need(c.degree < c.n_hbs, f"degree ({c.degree}) must be < n_hbs ({c.n_hbs})")
    need(c.cache_size >= 1, "cache_size must be >= 1")
    need(c.n_requests >= 1, "n_requests must be >= 1")
    need(0 <= c.warmup_fraction < 1, "warmup_fraction must lie in [0, 1)")
    need(int(c.warmup_fraction * c.n_requests) < c.n_requests,
         "warmup must leave at least one measured request")
    need(c.h_miss_override is None or c.h_miss_override > 0, "h_miss_override must be positive")
    need(c.radius_samples >= 1, "radius_samples must be >= 1")
    need(len(c.rank_weights) == 5 and all(w >= 0 for w in c.rank_weights),
         "rank_weights must be 5 non-negative reals")
    need(any(c.rank_weights), "rank_weights must not all be zero")
    need(len(c.resource_thresholds) == 2 and all(0 <= x <= 1 for x in c.resource_thresholds),
         "resource_thresholds must be two fractions in [0, 1]")
    need(c.distance_profile in ("default", "synthetic"), "distance_profile must be default or synthetic")
    need(c.resource_profile in ("idle", "synthetic"), "resource_profile must be idle or synthetic")
    if c.push is not None:
        need(c.push.strategy in PUSH_STRATEGIES, f"push.strategy must be one of {PUSH_STRATEGIES}")
        need(0 <= c.push.k <= c.n_hbs, "push.k must lie in [0, n_hbs]")
        need(all(0 <= v for v in c.push.videos), "push.videos must be non-negative video ids")


# --- parsing -----------------------------------------------------------------

_SCALARS = {
    "seed": int, "n_hbs": int, "catalog_size": int, "degree": int, "cache_size": int,
    "n_requests": int, "warmup_fraction": float, "radius_samples": int,
    "distance_profile": str, "resource_profile": str, "refresh_server": bool,
    "log_outcomes": bool,
}


def _typed(value, kind, path):
    if kind is bool:
        if isinstance(value, bool):
            return value
        raise ParseError(f"expected a boolean, got {value!r}", path)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"expected an integer, got {value!r}", path)
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"expected a number, got {value!r}", path)
        return float(value)
    if not isinstance(value, str):
        raise ParseError(f"expected a string, got {value!r}", path)
    return value


def _mapping(value, path):
    if not isinstance(value, dict):
        raise ParseError(f"expected a mapping, got {value!r}", path)
    return value


def _reject_unknown(doc, allowed, path):
    for key in doc:
        if key not in allowed:
            where = f"{path}.{key}" if path else str(key)
            raise ParseError("unknown key", where)


def _one_of(doc, path, choices):
    doc = _mapping(doc, path)
    if len(doc) != 1 or next(iter(doc)) not in choices:
        raise ParseError(f"expected exactly one of {choices}", path)
    return next(iter(doc.items()))


def _topology(doc) -> TopologySource:
    kind, body = _one_of(doc, "topology", ("generated", "file"))
    if kind == "file":
        return TopologySource(kind="file", path=_typed(body, str, "topology.file"))
    body = _mapping(body or {}, "topology.generated")
    _reject_unknown(body, ("n_routers", "edges_per_new_node"), "topology.generated")
    defaults = TopologySource()
    return TopologySource(
        n_routers=_typed(body.get("n_routers", defaults.n_routers), int,
                         "topology.generated.n_routers"),
        edges_per_new_node=_typed(body.get("edges_per_new_node", defaults.edges_per_new_node),
                                  int, "topology.generated.edges_per_new_node"),
    )


def _popularity(doc) -> PopularitySource:
    kind, body = _one_of(doc, "popularity", ("zipf", "empirical"))
    if kind == "empirical":
        return PopularitySource(kind="empirical", path=_typed(body, str, "popularity.empirical"))
    body = _mapping(body or {}, "popularity.zipf")
    _reject_unknown(body, ("alpha",), "popularity.zipf")
    return PopularitySource(alpha=_typed(body.get("alpha", 0.8), float, "popularity.zipf.alpha"))


def _fraction(value, path) -> Fraction:
    if isinstance(value, bool):
        raise ParseError(f"expected a rational number, got {value!r}", path)
    try:
        if isinstance(value, float):
            # decimal text round-trips; 5.5 must become 11/2, not a binary approximation
            return Fraction(repr(value))
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ParseError(f"expected a rational number, got {value!r}", path) from None


def _number_list(value, length, path):
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise ParseError(f"expected a list of {length} numbers", path)
    return tuple(_typed(x, float, f"{path}[{i}]") for i, x in enumerate(value))


def _push(doc) -> PushSpec | None:
    if doc is None:
        return None
    doc = _mapping(doc, "push")
    _reject_unknown(doc, ("videos", "k", "strategy"), "push")
    videos = doc.get("videos", [0])
    if not isinstance(videos, list):
        raise ParseError("expected a list of video ids", "push.videos")
    if "k" not in doc:
        raise ParseError("missing required key", "push.k")
    return PushSpec(
        videos=tuple(_typed(v, int, f"push.videos[{i}]") for i, v in enumerate(videos)),
        k=_typed(doc["k"], int, "push.k"),
        strategy=_typed(doc.get("strategy", "top-degree"), str, "push.strategy"),
    )


_CONFIG_KEYS = set(_SCALARS) | {
    "topology", "popularity", "h_miss_override", "rank_weights", "resource_thresholds", "push",
}


def _config_from_dict(doc: dict[str, Any]) -> SimConfig:
    _reject_unknown(doc, _CONFIG_KEYS, "")
    kwargs: dict[str, Any] = {}
    for key, kind in _SCALARS.items():
        if key in doc:
            kwargs[key] = _typed(doc[key], kind, key)
    if "topology" in doc:
        kwargs["topology"] = _topology(doc["topology"])
    if "popularity" in doc:
        kwargs["popularity"] = _popularity(doc["popularity"])
    if doc.get("h_miss_override") is not None:
        kwargs["h_miss_override"] = _fraction(doc["h_miss_override"], "h_miss_override")
    if "rank_weights" in doc:
        kwargs["rank_weights"] = _number_list(doc["rank_weights"], 5, "rank_weights")
    if "resource_thresholds" in doc:
        kwargs["resource_thresholds"] = _number_list(doc["resource_thresholds"], 2,
                                                     "resource_thresholds")
    if "push" in doc:
        kwargs["push"] = _push(doc["push"])
    return SimConfig(**kwargs)


def _load(text: str) -> dict:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}" if mark is not None else None
        raise ParseError(f"malformed document: {exc}", where) from None
    if doc is None:
        return {}
    return _mapping(doc, "<document>")


def parse_config(text: str) -> SimConfig:
    """Parse a YAML configuration document into a validated :class:`SimConfig`."""
    return _config_from_dict(_load(text))


def parse_sweep(text: str) -> SweepSpec:
    doc = dict(_load(text))
    if "sweep" not in doc:
        raise ParseError("missing required key", "sweep")
    block = _mapping(doc.pop("sweep"), "sweep")
    _reject_unknown(block, ("axis", "values", "repetitions"), "sweep")
    values = block.get("values")
    if not isinstance(values, list):
        raise ParseError("expected a list of counts", "sweep.values")
    return SweepSpec(
        base=_config_from_dict(doc),
        axis=_typed(block.get("axis", "degree"), str, "sweep.axis"),
        values=tuple(_typed(v, int, f"sweep.values[{i}]") for i, v in enumerate(values)),
        repetitions=_typed(block.get("repetitions", 1), int, "sweep.repetitions"),
    )


# --- serialization -----------------------------------------------------------

def config_to_dict(c: SimConfig) -> dict[str, Any]:
    if c.topology.kind == "file":
        topology: dict[str, Any] = {"file": c.topology.path}
    else:
        topology = {"generated": {"n_routers": c.topology.n_routers,
                                  "edges_per_new_node": c.topology.edges_per_new_node}}
    if c.popularity.kind == "empirical":
        popularity: dict[str, Any] = {"empirical": c.popularity.path}
    else:
        popularity = {"zipf": {"alpha": c.popularity.alpha}}
    out: dict[str, Any] = {key: getattr(c, key) for key in _SCALARS}
    out.update(
        topology=topology,
        popularity=popularity,
        h_miss_override=None if c.h_miss_override is None else str(c.h_miss_override),
        rank_weights=list(c.rank_weights),
        resource_thresholds=list(c.resource_thresholds),
        push=None if c.push is None else {
            "videos": list(c.push.videos), "k": c.push.k, "strategy": c.push.strategy},
    )
    return out


def serialize_config(c: SimConfig) -> str:
    return yaml.safe_dump(config_to_dict(c), sort_keys=False)


def serialize_sweep(s: SweepSpec) -> str:
    doc = config_to_dict(s.base)
    doc["sweep"] = {"axis": s.axis, "values": list(s.values), "repetitions": s.repetitions}
    return yaml.safe_dump(doc, sort_keys=False)
