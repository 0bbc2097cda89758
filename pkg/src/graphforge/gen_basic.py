"""Erdos-Renyi family, preferential attachment, node copying, threshold
graphs and the weighted random graph.

Matrix-region linearisation (partitioned reproducibility depends on it):

* ``undirected``: row-major upper triangle without diagonal.  Row ``u``
  starts at ``off(u) = u (2n - u - 1) / 2``; an index ``e`` maps to
  ``u = floor(((2n - 1) - sqrt((2n - 1)^2 - 8e)) / 2)`` (then corrected by
  one step in integer arithmetic) and ``v = e - off(u) + u + 1``.
* ``directed``: row-major without diagonal, ``u = e // (n-1)``,
  ``j = e % (n-1)``, ``v = j + (j >= u)``.
* ``directed-loops``: full matrix, ``u = e // n``, ``v = e % n``.
* ``bipartite``: ``u = e // n2``, ``v = n1 + e % n2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Graph
from .errors import InfeasibleError, InvalidParameterError
from .parallel import ChunkedJob, chunk_count, partition_range
from .rand import MASK64, RngStream, _derive_key, _mix64, _check_prob, geometric, hash_prior_index
from .sampling import IndexRange, bernoulli_skip, equal_bounds, sample_k_of_n, split_sample_counts

VARIANTS = ("undirected", "directed", "directed-loops", "bipartite")


def _check_variant(variant, n, n1, n2):
    if variant not in VARIANTS:
        raise InvalidParameterError(f"unknown variant {variant!r}")
    if variant == "bipartite":
        if n1 is None or n2 is None or n1 < 1 or n2 < 1:
            raise InvalidParameterError("bipartite variant needs positive n1 and n2")
        if n is not None and n != n1 + n2:
            raise InvalidParameterError("n must equal n1 + n2")
    elif n is None or n < 0:
        raise InvalidParameterError("n must be a non-negative integer")


@dataclass(frozen=True)
class GnpParams:
    n: Optional[int]
    p: float
    variant: str = "undirected"
    n1: Optional[int] = None
    n2: Optional[int] = None

    def __post_init__(self):
        _check_variant(self.variant, self.n, self.n1, self.n2)
        _check_prob(self.p)

    @property
    def nodes(self) -> int:
        return self.n1 + self.n2 if self.variant == "bipartite" else self.n


@dataclass(frozen=True)
class GnmParams:
    n: Optional[int]
    m: int
    variant: str = "undirected"
    n1: Optional[int] = None
    n2: Optional[int] = None

    def __post_init__(self):
        _check_variant(self.variant, self.n, self.n1, self.n2)
        cap = region_size(self.variant, self.nodes, self.n1, self.n2)
        if not 0 <= self.m <= cap:
            raise InfeasibleError(f"m exceeds capacity {cap}")

    @property
    def nodes(self) -> int:
        return self.n1 + self.n2 if self.variant == "bipartite" else self.n


def region_size(variant: str, n: int, n1=None, n2=None) -> int:
    if variant == "undirected":
        return n * (n - 1) // 2
    if variant == "directed":
        return n * (n - 1)
    if variant == "directed-loops":
        return n * n
    return n1 * n2


def _row_offset(u: np.ndarray, n: int) -> np.ndarray:
    return u * (2 * n - u - 1) // 2


def triangle_index_to_edge(e: np.ndarray, n: int) -> np.ndarray:
    e = np.asarray(e, dtype=np.int64)
    b = 2.0 * n - 1.0
    u = np.floor((b - np.sqrt(np.maximum(b * b - 8.0 * e.astype(np.float64), 0.0))) / 2.0)
    u = np.clip(u.astype(np.int64), 0, max(n - 2, 0))
    # Float rounding can put u one row off either way.
    for _ in range(2):
        u = np.where(_row_offset(u, n) > e, u - 1, u)
        u = np.where((u + 1 <= n - 2) & (_row_offset(u + 1, n) <= e), u + 1, u)
    v = e - _row_offset(u, n) + u + 1
    return np.stack([u, v], axis=1)


def edge_to_triangle_index(u, v, n: int):
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    return _row_offset(u, n) + (v - u - 1)


def index_to_edge(variant: str, e: np.ndarray, n: int, n1=None, n2=None) -> np.ndarray:
    e = np.asarray(e, dtype=np.int64)
    if variant == "undirected":
        return triangle_index_to_edge(e, n)
    if variant == "directed":
        u = e // (n - 1)
        j = e % (n - 1)
        return np.stack([u, j + (j >= u)], axis=1)
    if variant == "directed-loops":
        return np.stack([e // n, e % n], axis=1)
    return np.stack([e // n2, n1 + e % n2], axis=1)


def _graph_for(variant, n, edges, weights=None) -> Graph:
    directed = variant in ("directed", "directed-loops")
    return Graph(n, edges, directed=directed, allow_loops=variant == "directed-loops",
                 weights=weights)


def gnp_job(params: GnpParams, r: RngStream) -> ChunkedJob:
    n = params.nodes
    N = region_size(params.variant, n, params.n1, params.n2)
    chunks = chunk_count(N * params.p, limit=N)
    bounds = equal_bounds(N, chunks)

    def chunk(c):
        idx = bernoulli_skip(IndexRange(bounds[c], bounds[c + 1]), params.p, r.child("gnp", c))
        return index_to_edge(params.variant, idx, n, params.n1, params.n2)

    return ChunkedJob(chunks, chunk)


def gnp(params: GnpParams, r: RngStream, partition: Optional[tuple] = None,
        threads: int = 1) -> Graph:
    """Each cell of the variant's matrix region independently with prob. ``p``."""
    edges, _ = gnp_job(params, r).collect(partition, threads)
    return _graph_for(params.variant, params.nodes, edges)


def gnm_job(params: GnmParams, r: RngStream, partition: Optional[tuple] = None) -> ChunkedJob:
    n = params.nodes
    N = region_size(params.variant, n, params.n1, params.n2)
    chunks = chunk_count(params.m, limit=N)
    bounds = equal_bounds(N, chunks)
    wanted = partition_range(chunks, partition)
    counts = split_sample_counts(params.m, bounds, r.child("gnm-split"),
                                 wanted=(wanted.start, wanted.stop))

    def chunk(c):
        if counts[c] is None:
            counts[c] = split_sample_counts(params.m, bounds, r.child("gnm-split"),
                                            wanted=(c, c + 1))[c]
        idx = sample_k_of_n(counts[c], IndexRange(bounds[c], bounds[c + 1]), r.child("gnm", c))
        return index_to_edge(params.variant, idx, n, params.n1, params.n2)

    return ChunkedJob(chunks, chunk)


def gnm(params: GnmParams, r: RngStream, partition: Optional[tuple] = None,
        threads: int = 1) -> Graph:
    """Uniform ``m``-subset of the variant's matrix region."""
    edges, _ = gnm_job(params, r, partition).collect(partition, threads)
    return _graph_for(params.variant, params.nodes, edges)


# --- preferential attachment -------------------------------------------------

@dataclass(frozen=True)
class BaParams:
    """``n`` nodes, ``d`` edges per new node, seed of ``n0`` nodes.

    The seed is a clique on ``n0`` nodes unless ``seed_edges`` is given.
    ``simple`` forbids loops and multi-edges (the new node resamples until
    it has ``d`` distinct earlier neighbours); otherwise ``loops`` decides
    whether a head may copy from the node's own, already written entries.
    """

    n: int
    d: int
    n0: int = 0
    simple: bool = False
    loops: bool = True
    seed_edges: Optional[tuple] = None

    def __post_init__(self):
        if self.d < 1:
            raise InvalidParameterError("d must be >= 1")
        if self.n0 < 0 or self.n < self.n0:
            raise InvalidParameterError("need 0 <= n0 <= n")
        if self.simple and (self.n0 == 0 or self.d >= self.n0) and self.n > self.n0:
            raise InfeasibleError("simple mode needs a seed with n0 > d nodes")

    def seed_edge_array(self) -> np.ndarray:
        if self.seed_edges is not None:
            e = np.asarray(self.seed_edges, dtype=np.int64).reshape(-1, 2)
            if len(e) and e.max() >= self.n0:
                raise InvalidParameterError("seed edge endpoint outside the seed")
            return e
        iu = np.triu_indices(self.n0, k=1)
        return np.stack(iu, axis=1).astype(np.int64)


def ba_sequential(params: BaParams, r: RngStream) -> Graph:
    """Sequential: the head of every new edge copies a uniformly
    chosen entry of the edge array written so far."""
    seed = params.seed_edge_array()
    m0 = len(seed)
    d, n0, n = params.d, params.n0, params.n
    total = m0 + d * (n - n0)
    arr = [0] * (2 * total)
    arr[: 2 * m0] = seed.ravel().tolist()
    pos = 2 * m0
    rand = r.random
    for v in range(n0, n):
        start = pos
        chosen = set()
        for _ in range(d):
            arr[pos] = v
            if params.simple:
                while True:
                    t = arr[int(rand() * start)]
                    if t not in chosen:
                        break
                chosen.add(t)
            else:
                limit = pos + 1 if params.loops else start
                if limit == 0:
                    t = v
                else:
                    t = arr[int(rand() * limit)]
            arr[pos + 1] = t
            pos += 2
    edges = np.asarray(arr, dtype=np.int64).reshape(-1, 2)
    return Graph(n, edges, allow_loops=not params.simple and params.loops,
                 allow_multi=not params.simple)


def ba_resolve(pos, d: int, h, offset: int = 0, n0: int = 0, seed_values=None):
    """Value of the (1-based) edge-array position ``pos`` without reading
    the array: follow ``h`` while the position is a copied (even) one.

    Returns a 1-based node id.  ``h`` maps positions to earlier positions.
    """
    x = pos
    while x > offset and (x - offset) % 2 == 0:
        x = h(x)
    if x <= offset:
        return seed_values[x - 1] + 1
    j = x - offset
    return n0 + -(-j // (2 * d))


def _ba_hash_seed(r: RngStream) -> int:
    return _derive_key(r.seed, r.path + (("ba_hash", 0),)) & MASK64


def ba_hash_positions(params: BaParams, r: RngStream, positions: np.ndarray) -> np.ndarray:
    """Vectorised :func:`ba_resolve` for an array of 1-based positions;
    returns 0-based node ids."""
    seed = params.seed_edge_array()
    offset = 2 * len(seed)
    seed_vals = seed.ravel()
    key = _ba_hash_seed(r)
    x = np.asarray(positions, dtype=np.int64).copy()
    todo = (x > offset) & ((x - offset) % 2 == 0)
    while np.any(todo):
        x[todo] = hash_prior_index(key, x[todo])
        todo = (x > offset) & ((x - offset) % 2 == 0)
    out = np.empty_like(x)
    in_seed = x <= offset
    out[in_seed] = seed_vals[x[in_seed] - 1]
    j = x[~in_seed] - offset
    out[~in_seed] = params.n0 + (j + 2 * params.d - 1) // (2 * params.d) - 1
    return out


def ba_hash_job(params: BaParams, r: RngStream) -> ChunkedJob:
    if params.simple:
        raise InvalidParameterError("ba_hash emits loops/multi-edges; simplify afterwards")
    m0 = len(params.seed_edge_array())
    total = m0 + params.d * (params.n - params.n0)
    chunks = chunk_count(total, limit=max(total, 1))
    bounds = equal_bounds(total, chunks)

    def chunk(c):
        e = np.arange(bounds[c], bounds[c + 1], dtype=np.int64)
        pos = np.stack([2 * e + 1, 2 * e + 2], axis=1).ravel()
        return ba_hash_positions(params, r, pos).reshape(-1, 2)

    return ChunkedJob(chunks, chunk)


def ba_hash(params: BaParams, r: RngStream, partition: Optional[tuple] = None,
            threads: int = 1) -> Graph:
    """Hash-based variant: ``h(i) < i`` is a pure hash, so every
    position is computable independently and in any order."""
    edges, _ = ba_hash_job(params, r).collect(partition, threads)
    return Graph(params.n, edges, allow_loops=True, allow_multi=True)


@dataclass(frozen=True)
class CopyParams:
    n: int
    d: int
    p: float
    seed_n: int = 0
    seed_edges: Optional[tuple] = None
    simple: bool = False
    copy_mode: str = "links"

    def __post_init__(self):
        _check_prob(self.p)
        if self.d < 1:
            raise InvalidParameterError("d must be >= 1")
        if self.copy_mode not in ("links", "neighbors"):
            raise InvalidParameterError("copy_mode is 'links' or 'neighbors'")
        if self.seed_n < 1:
            raise InfeasibleError("node copy needs a non-empty seed graph")
        if self.n < self.seed_n:
            raise InvalidParameterError("n must be >= seed size")


def node_copy(params: CopyParams, r: RngStream) -> Graph:
    """Each new node makes ``d`` picks of a uniform earlier node ``j``; with
    probability ``p`` it links to ``j``, otherwise it copies one of ``j``'s
    links.

    ``copy_mode="links"`` copies a uniform entry of the links ``j`` made when
    it arrived (seed nodes: their seed neighbours); with ``p = 1/2`` this is
    exactly linear preferential attachment.  ``"neighbors"`` copies a
    uniform current neighbour instead.  A pick with nothing to copy is
    redrawn.
    """
    n0 = params.seed_n
    if params.seed_edges is None:
        seed = np.stack(np.triu_indices(n0, k=1), axis=1).astype(np.int64)
    else:
        seed = np.asarray(params.seed_edges, dtype=np.int64).reshape(-1, 2)
    links = [[] for _ in range(params.n)]
    nbrs = [[] for _ in range(params.n)]
    for u, v in seed.tolist():
        links[u].append(v)
        links[v].append(u)
        nbrs[u].append(v)
        nbrs[v].append(u)
    source = links if params.copy_mode == "links" else nbrs
    if not any(source[:n0]) and params.p < 1.0 and params.n > n0:
        raise InfeasibleError("seed graph has no edges to copy")
    out = [seed]
    rand = r.random
    p = params.p
    for i in range(n0, params.n):
        chosen = []
        seen = set()
        while len(chosen) < params.d:
            j = int(rand() * i)
            if rand() < p:
                t = j
            else:
                pool = source[j]
                if not pool:
                    continue
                t = pool[int(rand() * len(pool))]
            if params.simple and t in seen:
                continue
            seen.add(t)
            chosen.append(t)
        for t in chosen:
            links[i].append(t)
            nbrs[i].append(t)
            nbrs[t].append(i)
        out.append(np.array([[i, t] for t in chosen], dtype=np.int64))
    edges = np.concatenate(out) if out else np.zeros((0, 2), dtype=np.int64)
    return Graph(params.n, edges, allow_multi=not params.simple)


# --- threshold graphs ---------------------------------------------------------

def _coin_uniforms(key: int, ids: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        k = _mix64(np.array([key], dtype=np.uint64))
        h = _mix64(k + _mix64(ids.astype(np.uint64) + np.uint64(1)))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def threshold_coins(n: int, p_dominating: float, r: RngStream, ids=None) -> np.ndarray:
    """Dominating flag per node, a pure function of (stream, node id)."""
    _check_prob(p_dominating)
    key = _derive_key(r.seed, r.path + (("threshold", 0),)) & MASK64
    ids = np.arange(n, dtype=np.int64) if ids is None else np.asarray(ids, dtype=np.int64)
    return _coin_uniforms(key, ids) < p_dominating


def threshold_job(n: int, p_dominating: float, r: RngStream) -> ChunkedJob:
    _check_prob(p_dominating)
    chunks = chunk_count(p_dominating * n * n / 2.0, limit=max(n, 1))
    bounds = equal_bounds(n, chunks)
    cache = {}

    def dominating():
        # Every worker recomputes the coins it needs from the pure hash.
        if "d" not in cache:
            cache["d"] = np.flatnonzero(threshold_coins(n, p_dominating, r))
        return cache["d"]

    def chunk(c):
        dom = dominating()
        parts = []
        for u in range(bounds[c], bounds[c + 1]):
            vs = dom[np.searchsorted(dom, u, side="right"):]
            if len(vs):
                parts.append(np.stack([np.full(len(vs), u, dtype=np.int64), vs], axis=1))
        return np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)

    return ChunkedJob(chunks, chunk)


def threshold_graph(n: int, p_dominating: float, r: RngStream,
                    partition: Optional[tuple] = None, threads: int = 1) -> Graph:
    """Node ``v`` is dominating (adjacent to all ``u < v``) with probability
    ``p_dominating``, otherwise isolated at insertion time."""
    edges, _ = threshold_job(n, p_dominating, r).collect(partition, threads)
    return Graph(n, edges)


# --- weighted random graph ----------------------------------------------------

def wrg_job(n: int, p_prime: float, r: RngStream) -> ChunkedJob:
    p_prime = _check_prob(p_prime, allow_zero=False)
    N = n * (n - 1) // 2
    p = 1.0 - p_prime
    chunks = chunk_count(N * p, limit=max(N, 1))
    bounds = equal_bounds(N, chunks)

    def chunk(c):
        sub = r.child("wrg", c)
        idx = bernoulli_skip(IndexRange(bounds[c], bounds[c + 1]), p, sub)
        # Given w > 0, w - 1 is again Geom(p').
        w = 1 + geometric(sub, p_prime, size=len(idx)) if len(idx) else np.zeros(0, dtype=np.int64)
        return triangle_index_to_edge(idx, n), w

    return ChunkedJob(chunks, chunk)


def wrg(n: int, p_prime: float, r: RngStream, partition: Optional[tuple] = None,
        threads: int = 1) -> Graph:
    """Every pair gets multiplicity ``w ~ Geom(p')``; pairs with ``w = 0``
    are absent, so the topology is G(n, 1 - p')."""
    edges, w = wrg_job(n, p_prime, r).collect(partition, threads)
    if w is None:
        w = np.zeros(0, dtype=np.int64)
    return Graph(n, edges, weights=w)
