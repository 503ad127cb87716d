"""Video popularity models and the randomized request stream."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import InvalidParameter, ParseError
from .rng import make_rng

__all__ = [
    "PopularityModel",
    "Request",
    "RequestStream",
    "zipf_popularity",
    "load_empirical",
    "parse_counts",
    "next_request",
]


@dataclass(frozen=True, eq=False)
class PopularityModel:
    """Per-video request probabilities; video 0 is the most popular."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=np.float64)
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)
        cdf = np.cumsum(p)
        cdf.setflags(write=False)
        object.__setattr__(self, "_cdf", cdf)

    @property
    def catalog_size(self) -> int:
        return len(self.probabilities)

    @property
    def cdf(self) -> np.ndarray:
        return self._cdf

    def sample(self, uniforms: np.ndarray) -> np.ndarray:
        """Inverse-CDF lookup of video ids for uniforms in [0, 1)."""
        idx = np.searchsorted(self._cdf, uniforms, side="right")
        # the cdf tail can sit a few ulps under 1.0
        return np.minimum(idx, self.catalog_size - 1)

    def __eq__(self, other):
        return (isinstance(other, PopularityModel)
                and np.array_equal(self.probabilities, other.probabilities))

    def __hash__(self):
        return hash(self.probabilities.tobytes())


class Request(NamedTuple):
    sequence: int
    requester: int
    video: int


def zipf_popularity(c: int, alpha: float) -> PopularityModel:
    """Zipf law over ``c`` videos: ``p[i] = (i+1)**-alpha / H(c, alpha)``."""
    if c < 1:
        raise InvalidParameter(f"catalog size must be >= 1, got {c}")
    if not alpha >= 0:
        raise InvalidParameter(f"alpha must be >= 0, got {alpha}")
    weights = np.arange(1, c + 1, dtype=np.float64) ** -float(alpha)
    # summing smallest-first keeps the normalizer accurate for long tails
    total = np.sum(weights[::-1])
    return PopularityModel(weights / total)


def load_empirical(counts: Iterable[int]) -> PopularityModel:
    """Normalize raw request counts into a popularity model.

    Counts are sorted descending and zero entries dropped.
    """
    counts = [int(x) for x in counts]
    if any(x < 0 for x in counts):
        raise InvalidParameter("request counts must be non-negative")
    positive = sorted((x for x in counts if x > 0), reverse=True)
    if not positive:
        raise InvalidParameter("empirical popularity needs at least one positive count")
    arr = np.array(positive, dtype=np.float64)
    return PopularityModel(arr / arr.sum())


def parse_counts(text: str) -> list[int]:
    """Read one non-negative integer count per line; ``#`` lines are skipped."""
    counts = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            value = int(s)
        except ValueError:
            raise ParseError(f"expected an integer count, got {s!r}", f"line {lineno}") from None
        if value < 0:
            raise ParseError(f"negative count {value}", f"line {lineno}")
        counts.append(value)
    return counts


class RequestStream:
    """Deterministic request generator over ``n_hbs`` Home-Boxes.

    Requesters are uniform over HB ids and videos are drawn by inverse CDF.
    Randomness is generated in blocks for speed; the sequence of requests
    depends only on ``(model, n_hbs, seed, block)``.
    """

    def __init__(self, model: PopularityModel, n_hbs: int, seed: int, block: int = 65536):
        if n_hbs < 1:
            raise InvalidParameter(f"n_hbs must be >= 1, got {n_hbs}")
        self.model = model
        self.n_hbs = n_hbs
        self.rng = make_rng(seed, "workload")
        self.block = block
        self.sequence = 0
        self._requesters: list[int] = []
        self._videos: list[int] = []
        self._pos = 0

    def _refill(self):
        requesters = self.rng.integers(self.n_hbs, size=self.block)
        videos = self.model.sample(self.rng.random(self.block))
        self._requesters = requesters.tolist()
        self._videos = videos.tolist()
        self._pos = 0

    def next(self) -> Request:
        if self._pos >= len(self._videos):
            self._refill()
        i = self._pos
        self._pos += 1
        req = Request(self.sequence, self._requesters[i], self._videos[i])
        self.sequence += 1
        return req

    def take(self, count: int) -> list[Request]:
        return [self.next() for _ in range(count)]

    def __iter__(self):
        while True:
            yield self.next()


def next_request(model: PopularityModel, n_hbs: int, stream: RequestStream) -> Request:
    """Draw the next request from ``stream``.

    ``model`` and ``n_hbs`` must match the ones the stream was built with.
    """
    if stream.model is not model and stream.model != model or stream.n_hbs != n_hbs:
        raise InvalidParameter("request stream was built for a different model or HB count")
    return stream.next()
