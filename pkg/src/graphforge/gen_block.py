"""Stochastic block model, R-MAT and BTER."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .core import Graph
from .errors import InvalidParameterError
from .gen_basic import triangle_index_to_edge
from .gen_degree import ClampCounter, chung_lu, simplify_edges
from .parallel import ChunkedJob, chunk_count
from .rand import AliasTable, RngStream, alias_build, alias_sample_many
from .sampling import IndexRange, bernoulli_skip, equal_bounds

EMPTY = np.zeros((0, 2), dtype=np.int64)


# --- stochastic block model -----------------------------------------------------

@dataclass(frozen=True)
class SbmParams:
    n: int
    probs: tuple
    P: tuple

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        M = np.asarray(self.P, dtype=np.float64)
        k = len(p)
        if self.n < 0 or k < 1:
            raise InvalidParameterError("need n >= 0 and at least one community")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise InvalidParameterError("community probabilities must form a simplex")
        if M.shape != (k, k) or not np.array_equal(M, M.T):
            raise InvalidParameterError("P must be a symmetric k x k matrix")
        if np.any(M < 0) or np.any(M > 1) or np.any(np.isnan(M)):
            raise InvalidParameterError("P entries must lie in [0, 1]")

    @property
    def k(self) -> int:
        return len(self.probs)


def sbm_labels(params: SbmParams, r: RngStream) -> np.ndarray:
    if params.n == 0:
        return np.zeros(0, dtype=np.int64)
    t = alias_build(params.probs)
    return alias_sample_many(t, r.child("sbm-labels"), params.n).astype(np.int64)


def sbm_job(params: SbmParams, r: RngStream):
    labels = sbm_labels(params, r)
    k = params.k
    members = [np.flatnonzero(labels == i) for i in range(k)]
    sizes = [len(m) for m in members]
    P = np.asarray(params.P, dtype=np.float64)
    tasks = []  # (i, j, lo, hi, sub-index)
    for i in range(k):
        for j in range(i, k):
            N = sizes[i] * (sizes[i] - 1) // 2 if i == j else sizes[i] * sizes[j]
            p = float(P[i, j])
            parts = chunk_count(N * p, limit=max(N, 1))
            b = equal_bounds(N, parts)
            for s in range(parts):
                tasks.append((i, j, b[s], b[s + 1], s))

    def chunk(t):
        i, j, lo, hi, s = tasks[t]
        p = float(P[i, j])
        idx = bernoulli_skip(IndexRange(lo, hi), p, r.child("sbm-block", i * k + j).child("part", s))
        if len(idx) == 0:
            return EMPTY
        if i == j:
            loc = triangle_index_to_edge(idx, sizes[i])
            u, v = members[i][loc[:, 0]], members[i][loc[:, 1]]
        else:
            u, v = members[i][idx // sizes[j]], members[j][idx % sizes[j]]
        return np.stack([np.minimum(u, v), np.maximum(u, v)], axis=1)

    return ChunkedJob(len(tasks), chunk), labels


def sbm(params: SbmParams, r: RngStream, partition: Optional[tuple] = None, threads: int = 1):
    """Communities by alias sampling, then every block region Bernoulli
    sampled on its own substream.  Returns ``(Graph, labels)``."""
    job, labels = sbm_job(params, r)
    edges, _ = job.collect(partition, threads)
    return Graph(params.n, edges), labels


# --- R-MAT -----------------------------------------------------------------------

@dataclass(frozen=True)
class RmatParams:
    """Quadrants are ordered ``a`` (top-left), ``b`` (top-right), ``c``
    (bottom-left), ``d`` (bottom-right)."""

    scale: int
    m: int
    a: float = 0.57
    b: float = 0.19
    c: float = 0.19
    d: float = 0.05
    noise: float = 0.0
    dedup: bool = False
    undirected: bool = False
    drop_loops: bool = False
    block_levels: int = 0

    def __post_init__(self):
        if self.scale < 0 or self.scale > 62 or self.m < 0:
            raise InvalidParameterError("need 0 <= scale <= 62 and m >= 0")
        w = (self.a, self.b, self.c, self.d)
        if any(not (0.0 <= x <= 1.0) for x in w) or abs(sum(w) - 1.0) > 1e-12:
            raise InvalidParameterError("quadrant weights must be in [0, 1] and sum to 1")
        if not 0.0 <= self.noise < 0.5:
            raise InvalidParameterError("noise amplitude must lie in [0, 0.5)")
        if self.undirected and abs(self.b - self.c) > 1e-12:
            raise InvalidParameterError("undirected R-MAT needs b == c")
        if self.block_levels < 0 or self.block_levels > 8:
            raise InvalidParameterError("block_levels must be in [0, 8]")

    @property
    def weights(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])


def block_alias(weights, L: int) -> AliasTable:
    """Alias table over all ``4^L`` sequences of ``L`` quadrant choices;
    entry ``q_1 q_2 ... q_L`` (base 4, first level most significant) has the
    product probability."""
    w = np.asarray(weights, dtype=np.float64)
    probs = np.ones(1)
    for _ in range(L):
        probs = np.outer(probs, w).ravel()
    return alias_build(probs)


def _spread_bits(q: np.ndarray, L: int):
    """Row and column bit strings of base-4 quadrant sequences."""
    row = np.zeros_like(q)
    col = np.zeros_like(q)
    for lvl in range(L):
        digit = (q >> (2 * (L - 1 - lvl))) & 3
        row = (row << 1) | (digit >> 1)
        col = (col << 1) | (digit & 1)
    return row, col


def _rmat_naive(params: RmatParams, k: int, r: RngStream):
    t = alias_build(params.weights)
    u = np.zeros(k, dtype=np.int64)
    v = np.zeros(k, dtype=np.int64)
    for _ in range(params.scale):
        q = alias_sample_many(t, r, k)
        u = (u << 1) | (q >> 1)
        v = (v << 1) | (q & 1)
    return u, v


def _rmat_blocked(params: RmatParams, k: int, r: RngStream):
    L = params.block_levels
    u = np.zeros(k, dtype=np.int64)
    v = np.zeros(k, dtype=np.int64)
    full, rest = divmod(params.scale, L)
    tables = {}
    for lv in [L] * full + ([rest] if rest else []):
        if lv not in tables:
            tables[lv] = block_alias(params.weights, lv)
        q = alias_sample_many(tables[lv], r, k)
        ru, rv = _spread_bits(q, lv)
        u = (u << lv) | ru
        v = (v << lv) | rv
    return u, v


def noisy_weights(w, u: np.ndarray) -> np.ndarray:
    """Per-draw perturbed quadrant weights: ``a, d`` scaled by ``1 + u``,
    ``b, c`` by ``1 - u (a + d) / (b + c)``, then renormalised."""
    a, b, c, d = (float(x) for x in w)
    ad, bc = a + d, b + c
    up = 1.0 + u
    down = 1.0 - u * ad / bc if bc > 0 else np.ones_like(u)
    out = np.stack([a * up, b * down, c * down, d * up], axis=-1)
    out = np.maximum(out, 0.0)
    return out / out.sum(axis=-1, keepdims=True)


def _rmat_noisy(params: RmatParams, k: int, r: RngStream):
    u = np.zeros(k, dtype=np.int64)
    v = np.zeros(k, dtype=np.int64)
    for _ in range(params.scale):
        eps = (2.0 * r.uniform(k) - 1.0) * params.noise
        cum = np.cumsum(noisy_weights(params.weights, eps), axis=1)
        x = r.uniform(k)
        q = np.minimum((x[:, None] >= cum[:, :3]).sum(axis=1), 3)
        u = (u << 1) | (q >> 1)
        v = (v << 1) | (q & 1)
    return u, v


def rmat_job(params: RmatParams, r: RngStream) -> ChunkedJob:
    chunks = chunk_count(params.m, limit=max(params.m, 1))
    bounds = equal_bounds(params.m, chunks)

    def chunk(c):
        k = bounds[c + 1] - bounds[c]
        sub = r.child("rmat", c)
        if params.noise > 0:
            u, v = _rmat_noisy(params, k, sub)
        elif params.block_levels > 0:
            u, v = _rmat_blocked(params, k, sub)
        else:
            u, v = _rmat_naive(params, k, sub)
        if params.undirected:
            u, v = np.minimum(u, v), np.maximum(u, v)
        e = np.stack([u, v], axis=1)
        if params.drop_loops:
            e = e[e[:, 0] != e[:, 1]]
        return e

    return ChunkedJob(chunks, chunk)


def rmat(params: RmatParams, r: RngStream, partition: Optional[tuple] = None,
         threads: int = 1) -> Graph:
    """``m`` edges on ``2^scale`` nodes, each chosen by ``scale`` recursive
    quadrant decisions.  With ``dedup`` the first occurrence of every edge
    is kept, so fewer than ``m`` edges may come out."""
    if params.dedup and partition is not None:
        raise InvalidParameterError("dedup needs the full edge list; generate unpartitioned")
    edges, _ = rmat_job(params, r).collect(partition, threads)
    if params.dedup and len(edges):
        _, first = np.unique(edges, axis=0, return_index=True)
        edges = edges[np.sort(first)]
    return Graph(1 << params.scale, edges, directed=not params.undirected,
                 allow_loops=not params.drop_loops, allow_multi=not params.dedup)


# --- BTER ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BterParams:
    degree_counts: Mapping
    cc: Mapping
    beta: float = 1.0

    def __post_init__(self):
        for d, cnt in self.degree_counts.items():
            if int(d) < 0 or int(cnt) < 0:
                raise InvalidParameterError("degrees and counts must be non-negative")
        for d, c in self.cc.items():
            if not 0.0 <= float(c) <= 1.0:
                raise InvalidParameterError(f"clustering target for degree {d} outside [0, 1]")
        if self.beta < 1.0:
            raise InvalidParameterError("beta must be >= 1")

    def target_degrees(self) -> np.ndarray:
        """Targets in ascending order, degree-1 count inflated by beta."""
        out = []
        for d in sorted(int(x) for x in self.degree_counts):
            cnt = int(self.degree_counts[d])
            if d == 1:
                cnt = int(math.ceil(self.beta * cnt))
            out.extend([d] * cnt)
        return np.asarray(out, dtype=np.int64)


@dataclass(frozen=True)
class BterBlock:
    lo: int
    hi: int
    rho: float


def bter_blocks(params: BterParams, deg: np.ndarray) -> list:
    """Greedy affinity blocks over nodes sorted by degree.  Degree 0 and 1
    nodes stay out of blocks.  A block starting at degree ``d`` holds up to
    ``d + 1`` consecutive nodes and uses ``rho = c_d^(1/3)``."""
    blocks = []
    i = int(np.searchsorted(deg, 2))
    n = len(deg)
    while i < n:
        d = int(deg[i])
        hi = min(n, i + d + 1)
        rho = float(params.cc.get(d, 0.0)) ** (1.0 / 3.0)
        blocks.append(BterBlock(i, hi, rho))
        i = hi
    return blocks


def bter_excess(deg: np.ndarray, blocks: list) -> np.ndarray:
    """Target degree minus expected in-block degree, floored at 0."""
    ex = deg.astype(np.float64).copy()
    for b in blocks:
        s = b.hi - b.lo
        ex[b.lo:b.hi] = np.maximum(0.0, deg[b.lo:b.hi] - b.rho * (s - 1))
    return ex


def bter(params: BterParams, r: RngStream, counter: Optional[ClampCounter] = None) -> Graph:
    """Dense Erdos-Renyi affinity blocks for clustering, then Chung-Lu on
    the excess degrees for the rest.  Node ids follow ascending target
    degree."""
    deg = params.target_degrees()
    n = len(deg)
    blocks = bter_blocks(params, deg)
    parts = []
    for bi, b in enumerate(blocks):
        s = b.hi - b.lo
        N = s * (s - 1) // 2
        if N == 0 or b.rho == 0.0:
            continue
        idx = bernoulli_skip(IndexRange(0, N), b.rho, r.child("bter-block", bi))
        if len(idx):
            parts.append(triangle_index_to_edge(idx, s) + b.lo)
    ex = bter_excess(deg, blocks)
    if n and ex.sum() > 0:
        cl = chung_lu(ex, r.child("bter-cl"), mode="clamp", counter=counter)
        parts.append(cl.edges)
    edges = simplify_edges(np.concatenate(parts)) if parts else EMPTY
    return Graph(n, edges)
