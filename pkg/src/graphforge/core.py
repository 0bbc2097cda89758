"""Graph containers, degree sequences and the statistics used to check
generator output."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize, sparse, special
from scipy.sparse import csgraph

from .errors import (
    DisconnectedGraphError,
    InvalidParameterError,
    UnsupportedInputError,
)
from .rand import RngStream

EMPTY_EDGES = np.zeros((0, 2), dtype=np.int64)


def as_edge_array(edges) -> np.ndarray:
    a = np.asarray(edges, dtype=np.int64)
    if a.size == 0:
        return EMPTY_EDGES.copy()
    return a.reshape(-1, 2)


@dataclass(frozen=True, eq=False)
class Graph:
    """Node count plus an ordered edge list.

    Undirected simple graphs store each edge once with ``u < v``; generators
    that produce multigraphs say so through ``allow_loops``/``allow_multi``.
    ``weights`` carries integer multiplicities for weighted models.
    """

    n: int
    edges: np.ndarray = field(default_factory=lambda: EMPTY_EDGES.copy())
    directed: bool = False
    allow_loops: bool = False
    allow_multi: bool = False
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        e = as_edge_array(self.edges)
        object.__setattr__(self, "edges", e)
        if len(e) and (e.min() < 0 or e.max() >= self.n):
            raise InvalidParameterError("edge endpoint out of range")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=np.int64)
            if len(w) != len(e):
                raise InvalidParameterError("one weight per edge required")
            object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return len(self.edges)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        same_w = (self.weights is None and other.weights is None) or (
            self.weights is not None
            and other.weights is not None
            and np.array_equal(self.weights, other.weights)
        )
        return (
            self.n == other.n
            and self.directed == other.directed
            and np.array_equal(self.edges, other.edges)
            and same_w
        )

    def has_loops(self) -> bool:
        return bool(np.any(self.edges[:, 0] == self.edges[:, 1]))

    def has_multi_edges(self) -> bool:
        keys = _edge_keys(self.edges, self.n, self.directed)
        return len(np.unique(keys)) != len(keys)

    def is_simple(self) -> bool:
        return not (self.has_loops() or self.has_multi_edges())

    def edge_set(self) -> set:
        if self.directed:
            return set(map(tuple, self.edges.tolist()))
        return {(min(u, v), max(u, v)) for u, v in self.edges.tolist()}

    def canonical(self) -> "Graph":
        """Same graph with edges sorted (``u < v`` first for undirected)."""
        e = self.edges.copy()
        if not self.directed:
            e.sort(axis=1)
        order = np.lexsort((e[:, 1], e[:, 0]))
        w = None if self.weights is None else self.weights[order]
        return Graph(self.n, e[order], self.directed, self.allow_loops, self.allow_multi, w)


def _edge_keys(edges: np.ndarray, n: int, directed: bool) -> np.ndarray:
    u, v = edges[:, 0], edges[:, 1]
    if not directed:
        u, v = np.minimum(u, v), np.maximum(u, v)
    return u * max(n, 1) + v


class AdjacencyGraph:
    """Neighbour sets per node, for the degree-preserving Markov chains.

    Simple undirected graphs only.  Also keeps an edge array so a uniform
    random edge costs O(1).
    """

    __slots__ = ("n", "adj", "edges")

    def __init__(self, n: int, edges=()):
        self.n = int(n)
        self.adj = [set() for _ in range(self.n)]
        self.edges = []
        for u, v in as_edge_array(edges).tolist():
            if u == v:
                raise UnsupportedInputError("adjacency graphs must be loop-free")
            if not 0 <= u < self.n or not 0 <= v < self.n:
                raise InvalidParameterError("edge endpoint out of range")
            if v in self.adj[u]:
                raise UnsupportedInputError(f"duplicate edge {{{u}, {v}}}")
            self.adj[u].add(v)
            self.adj[v].add(u)
            self.edges.append((min(u, v), max(u, v)))

    @classmethod
    def from_graph(cls, g: Graph) -> "AdjacencyGraph":
        if g.directed:
            raise UnsupportedInputError("undirected graph required")
        return cls(g.n, g.edges)

    def copy(self) -> "AdjacencyGraph":
        out = AdjacencyGraph.__new__(AdjacencyGraph)
        out.n = self.n
        out.adj = [set(s) for s in self.adj]
        out.edges = list(self.edges)
        return out

    @property
    def m(self) -> int:
        return len(self.edges)

    def degrees(self) -> list:
        return [len(s) for s in self.adj]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def to_graph(self) -> Graph:
        e = sorted((min(u, v), max(u, v)) for u, v in self.edges)
        return Graph(self.n, np.array(e, dtype=np.int64).reshape(-1, 2))

    def edge_set(self) -> frozenset:
        return frozenset((min(u, v), max(u, v)) for u, v in self.edges)


@dataclass(frozen=True)
class DegreeSequence:
    degrees: tuple

    def __init__(self, degrees):
        d = tuple(int(x) for x in degrees)
        if any(x < 0 for x in d):
            raise InvalidParameterError("degrees must be non-negative")
        object.__setattr__(self, "degrees", d)

    def __len__(self):
        return len(self.degrees)

    def __iter__(self):
        return iter(self.degrees)

    def __getitem__(self, i):
        return self.degrees[i]

    @property
    def total(self) -> int:
        return sum(self.degrees)

    @property
    def n(self) -> int:
        return len(self.degrees)


def _require_simple_undirected(g: Graph) -> None:
    if g.directed:
        raise UnsupportedInputError("operation needs an undirected graph")
    if not g.is_simple():
        raise UnsupportedInputError("operation needs a simple graph")


def density(g: Graph) -> float:
    _require_simple_undirected(g)
    if g.n <= 1:
        return 0.0
    return g.m / (g.n * (g.n - 1) / 2)


def _as_adjacency(g) -> AdjacencyGraph:
    if isinstance(g, AdjacencyGraph):
        return g
    _require_simple_undirected(g)
    return AdjacencyGraph.from_graph(g)


def clustering_local(g, v: int) -> float:
    a = _as_adjacency(g)
    if not 0 <= v < a.n:
        raise InvalidParameterError(f"node {v} out of range [0, {a.n})")
    nb = list(a.adj[v])
    k = len(nb)
    if k <= 1:
        return 0.0
    links = sum(1 for i in range(k) for j in range(i + 1, k) if nb[j] in a.adj[nb[i]])
    return links / (k * (k - 1) / 2)


def _csr(g: Graph) -> sparse.csr_matrix:
    e = g.edges
    data = np.ones(len(e), dtype=np.int64)
    a = sparse.coo_matrix((data, (e[:, 0], e[:, 1])), shape=(g.n, g.n)).tocsr()
    if not g.directed:
        a = a + a.T
    a.data[:] = 1
    return a


def local_clustering_all(g) -> np.ndarray:
    """cc(v) for every node, via triangle counts on the sparse adjacency."""
    if isinstance(g, AdjacencyGraph):
        g = g.to_graph()
    _require_simple_undirected(g)
    a = _csr(g)
    deg = np.asarray(a.sum(axis=1)).ravel().astype(np.float64)
    tri2 = np.asarray((a @ a).multiply(a).sum(axis=1)).ravel().astype(np.float64)
    cc = np.zeros(g.n)
    ok = deg > 1
    cc[ok] = tri2[ok] / (deg[ok] * (deg[ok] - 1))
    return cc


def clustering_global(g) -> float:
    """Mean of cc(v) over all nodes, degree <= 1 nodes contributing 0."""
    n = g.n
    if n == 0:
        return 0.0
    return float(local_clustering_all(g).mean())


def degree_sequence_of(g: Graph) -> DegreeSequence:
    """Degrees; a loop adds 2.  Directed graphs report in + out."""
    if g.m == 0:
        return DegreeSequence([0] * g.n)
    d = np.bincount(g.edges.ravel(), minlength=g.n)
    return DegreeSequence(d.tolist())


def in_out_degrees(g: Graph):
    indeg = np.bincount(g.edges[:, 1], minlength=g.n)
    outdeg = np.bincount(g.edges[:, 0], minlength=g.n)
    return DegreeSequence(indeg.tolist()), DegreeSequence(outdeg.tolist())


@dataclass(frozen=True)
class Components:
    labels: np.ndarray
    sizes: np.ndarray

    @property
    def count(self) -> int:
        return len(self.sizes)


def connected_components(g: Graph) -> Components:
    """Components labelled 0, 1, ... in order of their smallest node id."""
    if g.n == 0:
        return Components(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
    if g.directed:
        raise UnsupportedInputError("components need an undirected graph")
    _, raw = csgraph.connected_components(_csr(g), directed=False)
    # Relabel by first appearance when scanning node ids upward.
    _, first = np.unique(raw, return_index=True)
    order = np.argsort(first)
    remap = np.empty(len(order), dtype=np.int64)
    remap[order] = np.arange(len(order))
    labels = remap[raw]
    return Components(labels, np.bincount(labels))


def _bfs_distances(adj: list, s: int) -> dict:
    dist = {s: 0}
    q = deque([s])
    while q:
        u = q.popleft()
        du = dist[u] + 1
        for w in adj[u]:
            if w not in dist:
                dist[w] = du
                q.append(w)
    return dist


DISTANCE_EXACT_LIMIT = 10_000
DISTANCE_DEFAULT_SAMPLES = 256


def avg_distance(g, sample_size: Optional[int] = None, rng: Optional[RngStream] = None) -> float:
    """Mean shortest-path length over node pairs.

    Exact by all-pairs BFS unless ``sample_size`` is given (or the graph
    exceeds ``DISTANCE_EXACT_LIMIT`` nodes), in which case BFS runs from
    uniformly drawn sources and the per-source means are averaged.
    """
    a = _as_adjacency(g)
    n = a.n
    if n <= 1:
        raise DisconnectedGraphError("average distance undefined for n <= 1")
    if sample_size is None and n > DISTANCE_EXACT_LIMIT:
        sample_size = DISTANCE_DEFAULT_SAMPLES
    if sample_size is None:
        sources = range(n)
    else:
        rng = rng if rng is not None else RngStream(0, (("avg_distance", 0),))
        sources = rng.integers(0, n, size=int(sample_size)).tolist()
    total = 0.0
    count = 0
    for s in sources:
        dist = _bfs_distances(a.adj, s)
        if len(dist) != n:
            raise DisconnectedGraphError("graph is not connected")
        total += sum(dist.values()) / (n - 1)
        count += 1
    return total / count


@dataclass(frozen=True)
class GraphStats:
    n: int
    m: int
    density: float
    avg_degree: float
    global_cc: float
    degree_histogram: dict
    component_count: int
    largest_component_size: int
    avg_distance: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "density": self.density,
            "avg_degree": self.avg_degree,
            "global_cc": self.global_cc,
            "components": self.component_count,
            "largest_component": self.largest_component_size,
            "avg_distance": self.avg_distance,
        }


def degree_histogram(g: Graph) -> dict:
    d = np.bincount(g.edges.ravel(), minlength=g.n) if g.m else np.zeros(g.n, dtype=np.int64)
    vals, counts = np.unique(d, return_counts=True)
    return {int(k): int(c) for k, c in zip(vals, counts)}


def graph_stats(g: Graph, distance: bool = False, sample_size: Optional[int] = None,
                rng: Optional[RngStream] = None) -> GraphStats:
    comps = connected_components(g)
    avg_dist = None
    if distance and comps.count == 1 and g.n > 1:
        avg_dist = avg_distance(g, sample_size, rng)
    return GraphStats(
        n=g.n,
        m=g.m,
        density=density(g),
        avg_degree=(2 * g.m / g.n) if g.n else 0.0,
        global_cc=clustering_global(g),
        degree_histogram=degree_histogram(g),
        component_count=comps.count,
        largest_component_size=int(comps.sizes.max()) if comps.count else 0,
        avg_distance=avg_dist,
    )


@dataclass(frozen=True)
class TailFit:
    exponent: float
    xmin: int
    tail_size: int
    ks_distance: float


def _tail_mle(x: np.ndarray, xmin: int) -> float:
    """Discrete maximum likelihood: maximise ``-n log zeta(a, xmin) - a sum log x``."""
    n = len(x)
    slog = float(np.sum(np.log(x)))
    res = optimize.minimize_scalar(lambda a: n * math.log(special.zeta(a, xmin)) + a * slog,
                                   bounds=(1.0001, 8.0), method="bounded",
                                   options={"xatol": 1e-6})
    return float(res.x)


def fit_power_law_tail(values, xmin: Optional[int] = None, min_tail: int = 50) -> TailFit:
    """Exponent of ``P[X = x] ~ x^-gamma`` for ``x >= xmin``.

    Without ``xmin`` every observed value (with at least ``min_tail``
    samples above it) is tried and the one minimising the Kolmogorov-Smirnov
    distance between tail and fitted law is kept.
    """
    x = np.sort(np.asarray(values, dtype=np.float64))
    x = x[x >= 1]
    if xmin is not None:
        cands = [int(xmin)]
    else:
        uniq = np.unique(x)
        cands = [int(v) for v in uniq if np.sum(x >= v) >= min_tail]
    if not cands:
        raise InvalidParameterError("not enough samples for a tail fit")
    best = None
    for xm in cands:
        tail = x[np.searchsorted(x, xm):]
        if len(tail) < 2:
            continue
        a = _tail_mle(tail, xm)
        vals, counts = np.unique(tail, return_counts=True)
        emp = np.cumsum(counts) / len(tail)
        model = 1.0 - special.zeta(a, vals + 1.0) / special.zeta(a, xm)
        ks = float(np.max(np.abs(emp - model)))
        if best is None or ks < best.ks_distance:
            best = TailFit(a, xm, len(tail), ks)
    if best is None:
        raise InvalidParameterError("not enough samples for a tail fit")
    return best
