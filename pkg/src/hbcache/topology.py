"""Router-level network graph: construction, loading and hop-count queries.

All distances in the simulator are unweighted shortest-path hop counts
computed by breadth-first search over an immutable adjacency structure.
"""
from __future__ import annotations

from collections import OrderedDict
from threading import Lock
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidNode, InvalidParameter, ParseError
from .rng import make_rng

__all__ = [
    "Topology",
    "generate_power_law",
    "load_edge_list",
    "dump_edge_list",
    "hop_count",
    "nearest_k",
    "estimate_radius",
    "validate_topology",
]

UNREACHABLE = -1


class Topology:
    """Undirected, connected router graph with dense node ids.

    Parameters
    ----------
    adjacency : sequence of sequences of int
        ``adjacency[a]`` lists the neighbors of node ``a``. Lists are sorted
        and stored as tuples; the caller is responsible for symmetry (see
        :func:`validate_topology`).
    row_cache : int
        Maximum number of memoized BFS distance rows.
    """

    def __init__(self, adjacency: Sequence[Iterable[int]], row_cache: int = 4096):
        self.adjacency = tuple(tuple(sorted(nbrs)) for nbrs in adjacency)
        self.node_count = len(self.adjacency)
        degrees = np.fromiter((len(n) for n in self.adjacency), dtype=np.int64,
                              count=self.node_count)
        self.indptr = np.zeros(self.node_count + 1, dtype=np.int64)
        np.cumsum(degrees, out=self.indptr[1:])
        self.indices = np.fromiter(
            (b for nbrs in self.adjacency for b in nbrs), dtype=np.int64,
            count=int(self.indptr[-1]),
        )
        self.degrees = degrees
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        self.degrees.setflags(write=False)
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()
        self._row_cache = row_cache
        self._lock = Lock()
        self._hash = None

    @property
    def edge_count(self) -> int:
        return int(self.indptr[-1]) // 2

    def edges(self):
        """Yield each undirected edge once as ``(a, b)`` with ``a < b``."""
        for a, nbrs in enumerate(self.adjacency):
            for b in nbrs:
                if a < b:
                    yield a, b

    def degree(self, node: int) -> int:
        return int(self.degrees[self._check(node)])

    def _check(self, node) -> int:
        if not isinstance(node, (int, np.integer)) or not 0 <= node < self.node_count:
            raise InvalidNode(f"node {node!r} not in 0..{self.node_count - 1}")
        return int(node)

    def distances_from(self, source: int) -> np.ndarray:
        """Hop counts from ``source`` to every node (read-only, memoized)."""
        source = self._check(source)
        with self._lock:
            row = self._rows.get(source)
            if row is not None:
                self._rows.move_to_end(source)
                return row
        row = bfs(self.indptr, self.indices, source)
        row.setflags(write=False)
        with self._lock:
            self._rows[source] = row
            if len(self._rows) > self._row_cache:
                self._rows.popitem(last=False)
        return row

    def __eq__(self, other):
        return isinstance(other, Topology) and self.adjacency == other.adjacency

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.adjacency)
        return self._hash

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_lock"] = None
        state["_rows"] = OrderedDict()
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = Lock()

    def __repr__(self):
        return f"Topology(node_count={self.node_count}, edge_count={self.edge_count})"


def bfs(indptr: np.ndarray, indices: np.ndarray, source: int) -> np.ndarray:
    """Level-synchronous BFS over a CSR adjacency.

    Returns an int32 array of hop counts, ``-1`` for unreachable nodes.
    """
    n = len(indptr) - 1
    dist = np.full(n, UNREACHABLE, dtype=np.int32)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    level = 0
    while frontier.size:
        level += 1
        starts = indptr[frontier]
        lengths = indptr[frontier + 1] - starts
        total = int(lengths.sum())
        if total == 0:
            break
        # gather all neighbor slices of the frontier in one shot
        offsets = np.repeat(starts - np.cumsum(lengths) + lengths, lengths)
        nbrs = indices[offsets + np.arange(total)]
        nbrs = nbrs[dist[nbrs] == UNREACHABLE]
        if nbrs.size == 0:
            break
        frontier = np.unique(nbrs)
        dist[frontier] = level
    return dist


def _largest_component(adjacency: dict[int, set[int]]) -> list[int]:
    """Nodes of the largest connected component, sorted ascending.

    Ties go to the component containing the smallest node id.
    """
    seen: set[int] = set()
    best: list[int] = []
    for start in sorted(adjacency):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        i = 0
        while i < len(comp):
            for b in adjacency[comp[i]]:
                if b not in seen:
                    seen.add(b)
                    comp.append(b)
            i += 1
        if len(comp) > len(best):
            best = comp
    return sorted(best)


def _from_edges(edges: Iterable[tuple[int, int]]) -> Topology:
    adj: dict[int, set[int]] = {}
    for u, v in edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    if not adj:
        return Topology([])
    keep = _largest_component(adj)
    relabel = {old: new for new, old in enumerate(keep)}
    return Topology([[relabel[b] for b in adj[old]] for old in keep])


def generate_power_law(n_routers: int, edges_per_new_node: int, seed: int) -> Topology:
    """Grow a preferential-attachment (Barabasi-Albert style) router graph.

    Construction starts from two nodes joined by one edge. Each arriving
    node ``t`` attaches ``min(edges_per_new_node, t)`` edges to distinct
    existing nodes, each target drawn with probability proportional to its
    current degree; a draw that repeats a target is retried. The result has
    ``1 + sum(min(m, t) for t in 2..n-1)`` edges.
    """
    n, m = n_routers, edges_per_new_node
    if m < 1 or n < m + 1:
        raise InvalidParameter(
            f"need edges_per_new_node >= 1 and n_routers >= edges_per_new_node + 1 "
            f"(got n_routers={n}, edges_per_new_node={m})"
        )
    rng = make_rng(seed, "topology")
    adj: list[list[int]] = [[1], [0]]
    # every edge endpoint appears once, so uniform picks are degree-weighted
    endpoints = [0, 1]
    for t in range(2, n):
        want = min(m, t)
        targets: list[int] = []
        while len(targets) < want:
            # batch draws, consumed in order; leftovers are discarded
            for idx in rng.integers(len(endpoints), size=2 * want):
                b = endpoints[idx]
                if b not in targets:
                    targets.append(b)
                    if len(targets) == want:
                        break
        adj.append(targets)
        for b in targets:
            adj[b].append(t)
            endpoints.append(b)
            endpoints.append(t)
    return Topology(adj)


def load_edge_list(text: str) -> Topology:
    """Parse a whitespace-separated ``u v`` edge list.

    Blank lines and lines starting with ``#`` are skipped. Duplicate and
    reversed edges collapse. Only the largest connected component is kept,
    renumbered densely in ascending order of original id.
    """
    edges = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'u v', got {stripped!r}", f"line {lineno}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer node id in {stripped!r}", f"line {lineno}") from None
        if u < 0 or v < 0 or u >= 2**32 or v >= 2**32:
            raise ParseError(f"node id out of unsigned 32-bit range in {stripped!r}",
                             f"line {lineno}")
        if u == v:
            raise ParseError(f"self-loop on node {u}", f"line {lineno}")
        edges.append((u, v))
    return _from_edges(edges)


def dump_edge_list(t: Topology, header: str | None = None) -> str:
    lines = [f"# {header}"] if header else []
    lines.extend(f"{a} {b}" for a, b in t.edges())
    return "\n".join(lines) + "\n"


def hop_count(t: Topology, a: int, b: int) -> int:
    """Shortest-path hop count between routers ``a`` and ``b``."""
    b = t._check(b)
    return int(t.distances_from(a)[b])


def nearest_k(t: Topology, source: int, candidates: Sequence[int], k: int
              ) -> list[tuple[int, int]]:
    """The ``k`` candidates closest to ``source`` as ``(node, hops)`` pairs.

    Ordered by hops, then node id.
    """
    if k < 0:
        raise InvalidParameter(f"k must be >= 0, got {k}")
    row = t.distances_from(source)
    ranked = sorted((int(row[t._check(c)]), int(c)) for c in candidates)
    return [(c, h) for h, c in ranked[:k]]


def eccentricity(t: Topology, node: int) -> int:
    return int(t.distances_from(node).max())


def estimate_radius(t: Topology, sample_size: int, seed: int) -> int:
    """Minimum eccentricity over a uniform sample of source nodes.

    With ``sample_size >= node_count`` every node is a source and the exact
    radius is returned. Sampled estimates are upper bounds on the radius.
    """
    if sample_size < 1:
        raise InvalidParameter(f"sample_size must be >= 1, got {sample_size}")
    if t.node_count == 0:
        raise InvalidParameter("empty topology has no radius")
    if sample_size >= t.node_count:
        sources = range(t.node_count)
    else:
        rng = make_rng(seed, "radius")
        sources = sorted(int(x) for x in rng.choice(t.node_count, sample_size, replace=False))
    # bypass the row memo; radius sources are not query hot spots
    return min(int(bfs(t.indptr, t.indices, s).max()) for s in sources)


def validate_topology(t: Topology) -> None:
    """Raise ``InvalidParameter`` if any graph invariant is violated."""
    for a, nbrs in enumerate(t.adjacency):
        if list(nbrs) != sorted(set(nbrs)):
            raise InvalidParameter(f"node {a}: adjacency unsorted or has duplicates")
        for b in nbrs:
            if b == a:
                raise InvalidParameter(f"node {a}: self-loop")
            if not 0 <= b < t.node_count:
                raise InvalidParameter(f"node {a}: neighbor {b} out of range")
            if a not in t.adjacency[b]:
                raise InvalidParameter(f"edge {a}-{b} is not symmetric")
    if t.node_count and (bfs(t.indptr, t.indices, 0) == UNREACHABLE).any():
        raise InvalidParameter("graph is not connected")
