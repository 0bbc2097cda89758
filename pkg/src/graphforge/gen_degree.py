"""Prescribed-degree models: graphicality, Havel-Hakimi, Chung-Lu, the
configuration model family, and the degree-preserving Markov chains
(edge switching, Curveball, Global Curveball)."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sortedcontainers import SortedList

from .core import AdjacencyGraph, DegreeSequence, Graph
from .errors import (BudgetExceededError, InfeasibleError, InvalidParameterError,
                     InvalidWeightsError, NonGraphicalError)
from .parallel import ChunkedJob, chunk_count
from .rand import RngStream, permute_array
from .sampling import equal_bounds


def _degrees(D) -> np.ndarray:
    if isinstance(D, DegreeSequence):
        return np.asarray(D.degrees, dtype=np.int64)
    return np.asarray(DegreeSequence(D).degrees, dtype=np.int64)


def is_graphical(D) -> bool:
    """Erdos-Gallai test on the sorted sequence."""
    d = np.sort(_degrees(D))[::-1]
    n = len(d)
    if n == 0:
        return True
    if d.sum() % 2 or d[0] >= n:
        return False
    prefix = np.cumsum(d)
    k = np.arange(1, n + 1)
    asc = d[::-1]
    # entries >= k form a prefix of the non-increasing order
    p = n - np.searchsorted(asc, k, side="left")
    start = np.maximum(p, k)
    suffix = np.concatenate([np.cumsum(asc)[::-1], [0]])
    tail = k * np.maximum(p - k, 0) + suffix[start]
    return bool(np.all(prefix <= k * (k - 1) + tail))


def havel_hakimi(D) -> Graph:
    """Deterministic realisation: repeatedly take the node with the largest
    residual degree (ties: smaller id) and join it to the next largest."""
    d = _degrees(D)
    if not is_graphical(d):
        raise NonGraphicalError("degree sequence is not graphical")
    n = len(d)
    order = SortedList((-int(x), i) for i, x in enumerate(d) if x > 0)
    res = d.copy()
    edges = []
    while order:
        negd, v = order.pop(0)
        k = -negd
        targets = list(order.islice(0, k))
        if len(targets) < k:
            raise NonGraphicalError("degree sequence is not graphical")
        for key in targets:
            order.remove(key)
        for negw, w in targets:
            edges.append((min(v, w), max(v, w)))
            res[w] -= 1
            if res[w] > 0:
                order.add((negw + 1, w))
        res[v] = 0
    edges.sort()
    return Graph(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2))


# --- Chung-Lu ----------------------------------------------------------------

@dataclass
class ClampCounter:
    """Pairs whose ``w_i w_j / W`` exceeded one and was clamped."""

    clamped: int = 0


def check_weights(w, mode: str = "strict") -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or len(w) < 1:
        raise InvalidWeightsError("need a non-empty weight vector")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvalidWeightsError("weights must be finite and non-negative")
    if mode not in ("strict", "clamp"):
        raise InvalidParameterError("mode is 'strict' or 'clamp'")
    W = w.sum()
    if mode == "strict" and w.max() ** 2 > W * (1 + 1e-12):
        raise InvalidWeightsError("max weight squared exceeds the weight total")
    return w


def chung_lu_job(w, r: RngStream, mode: str = "strict", counter: Optional[ClampCounter] = None):
    w = check_weights(w, mode)
    n = len(w)
    W = float(w.sum())
    perm = np.argsort(-w, kind="stable")
    ws = w[perm].tolist()
    chunks = chunk_count(W / 2.0, limit=n)
    bounds = equal_bounds(n, chunks)
    labels = perm.tolist()

    def chunk(c):
        sub = r.child("chung-lu", c)
        rand = sub.random
        out = []
        clamped = 0
        for i in range(bounds[c], bounds[c + 1]):
            wi = ws[i]
            if wi == 0 or W == 0:
                break
            v = i + 1
            p = wi * ws[v] / W if v < n else 0.0
            if p > 1.0:
                p = 1.0
            while v < n and p > 0.0:
                if p < 1.0:
                    v += int(math.log(1.0 - rand()) / math.log1p(-p))
                if v >= n:
                    break
                q = wi * ws[v] / W
                if q > 1.0:
                    clamped += 1
                    q = 1.0
                if rand() * p < q:
                    a, b = labels[i], labels[v]
                    out.append((a, b) if a < b else (b, a))
                p = q
                v += 1
        if counter is not None:
            counter.clamped += clamped
        return np.asarray(out, dtype=np.int64).reshape(-1, 2)

    return ChunkedJob(chunks, chunk)


def chung_lu(w, r: RngStream, partition: Optional[tuple] = None, threads: int = 1,
             mode: str = "strict", counter: Optional[ClampCounter] = None) -> Graph:
    """Independent edges with probability ``min(1, w_i w_j / W)``.

    Rows run over the weights sorted in decreasing order, skipping by a
    geometric distance at the current row probability and thinning by the
    ratio of the true to the proposal probability.  ``mode="clamp"`` accepts
    weight vectors with ``max w^2 > W``.
    """
    edges, _ = chung_lu_job(w, r, mode, counter).collect(partition, threads)
    return Graph(len(np.asarray(w)), edges)


def expected_degrees(w) -> np.ndarray:
    """``sum_{j != i} min(1, w_i w_j / W)`` per node (O(n^2) memory-light)."""
    w = np.asarray(w, dtype=np.float64)
    W = w.sum()
    out = np.empty(len(w))
    for i in range(len(w)):
        p = np.minimum(1.0, w[i] * w / W)
        out[i] = p.sum() - p[i]
    return out


# --- configuration models ----------------------------------------------------

def _balls(d: np.ndarray) -> np.ndarray:
    return np.repeat(np.arange(len(d), dtype=np.int64), d)


def configuration_model(D, r: RngStream) -> Graph:
    """Random pairing of degree stubs; loops count twice toward degree."""
    d = _degrees(D)
    if d.sum() % 2:
        raise InfeasibleError("degree sum must be even")
    s = permute_array(r, _balls(d)).reshape(-1, 2)
    return Graph(len(d), s, allow_loops=True, allow_multi=True)


def simplify_edges(edges: np.ndarray) -> np.ndarray:
    """Drop loops, merge parallel edges; ``u < v``, sorted."""
    e = np.sort(np.asarray(edges, dtype=np.int64).reshape(-1, 2), axis=1)
    e = e[e[:, 0] != e[:, 1]]
    return np.unique(e, axis=0) if len(e) else e


def erased_cm(D, r: RngStream) -> Graph:
    g = configuration_model(D, r)
    return Graph(g.n, simplify_edges(g.edges))


def cm_simple_rejection(D, r: RngStream, max_tries: int = 1000) -> Graph:
    """Resample whole pairings until one is simple."""
    d = _degrees(D)
    if not is_graphical(d):
        raise NonGraphicalError("degree sequence is not graphical")
    for t in range(max_tries):
        g = configuration_model(d, r.child("cm-try", t))
        if g.is_simple():
            e = np.sort(g.edges, axis=1)
            e = e[np.lexsort((e[:, 1], e[:, 0]))]
            return Graph(g.n, e)
    raise BudgetExceededError(f"no simple pairing within {max_tries} tries")


def cm_directed(d_in, d_out, r: RngStream) -> Graph:
    """Out-stubs shuffled against in-stubs in node order."""
    di, do = _degrees(d_in), _degrees(d_out)
    if len(di) != len(do):
        raise InvalidParameterError("in- and out-sequences need equal length")
    if di.sum() != do.sum():
        raise InfeasibleError("in- and out-degree sums differ")
    tails = permute_array(r, _balls(do))
    heads = _balls(di)
    return Graph(len(di), np.stack([tails, heads], axis=1), directed=True,
                 allow_loops=True, allow_multi=True)


def random_regular(n: int, degree: int, r: RngStream, max_tries: int = 1000) -> Graph:
    """Uniform simple ``degree``-regular graph by rejection over pairings.
    Practical for small degrees (about 7 or less at n >= 100)."""
    if n < 1 or degree < 0 or degree >= n or (n * degree) % 2:
        raise InfeasibleError(f"no {degree}-regular graph on {n} nodes")
    return cm_simple_rejection([degree] * n, r, max_tries)


# --- degree-preserving Markov chains -------------------------------------------

def joint_degree_counts(g) -> Counter:
    """Multiset of sorted endpoint-degree pairs over the edges."""
    if isinstance(g, Graph):
        g = AdjacencyGraph.from_graph(g)
    deg = g.degrees()
    return Counter(tuple(sorted((deg[u], deg[v]))) for u, v in g.edges)


@dataclass
class SwitchStats:
    attempted: int = 0
    accepted: int = 0


def try_switch(g: AdjacencyGraph, e1: int, e2: int, orientation: int,
               dk2: bool = False, deg: Optional[list] = None) -> bool:
    """Apply one switch in place if it keeps the graph simple.

    Edges ``{u, v}`` and ``{x, y}`` become ``{u, y}, {x, v}`` for
    orientation 0 and ``{u, x}, {v, y}`` for orientation 1.
    """
    u, v = g.edges[e1]
    x, y = g.edges[e2]
    if orientation:
        a, b, c, d = u, x, v, y
    else:
        a, b, c, d = u, y, x, v
    if a == b or c == d:
        return False
    adj = g.adj
    if b in adj[a] or d in adj[c]:
        return False
    if dk2:
        deg = deg if deg is not None else g.degrees()
        old = sorted([tuple(sorted((deg[u], deg[v]))), tuple(sorted((deg[x], deg[y])))])
        new = sorted([tuple(sorted((deg[a], deg[b]))), tuple(sorted((deg[c], deg[d])))])
        if old != new:
            return False
    adj[u].discard(v)
    adj[v].discard(u)
    adj[x].discard(y)
    adj[y].discard(x)
    adj[a].add(b)
    adj[b].add(a)
    adj[c].add(d)
    adj[d].add(c)
    g.edges[e1] = (a, b) if a < b else (b, a)
    g.edges[e2] = (c, d) if c < d else (d, c)
    return True


def edge_switch(g, num_swaps: int, r: RngStream, dk2_restricted: bool = False,
                stats: Optional[SwitchStats] = None) -> AdjacencyGraph:
    """``num_swaps`` switch attempts on a copy of ``g``; rejected attempts
    still count.  Graphs with fewer than two edges are returned unchanged."""
    if isinstance(g, Graph):
        g = AdjacencyGraph.from_graph(g)
    g = g.copy()
    m = g.m
    if m < 2 or num_swaps <= 0:
        return g
    deg = g.degrees() if dk2_restricted else None
    done = 0
    block = 1 << 16
    while done < num_swaps:
        k = min(block, num_swaps - done)
        gen = r.generator
        e1 = gen.integers(0, m, size=k)
        e2 = gen.integers(0, m - 1, size=k)
        e2 = e2 + (e2 >= e1)
        orient = gen.integers(0, 2, size=k)
        acc = 0
        for a, b, o in zip(e1.tolist(), e2.tolist(), orient.tolist()):
            acc += try_switch(g, a, b, o, dk2_restricted, deg)
        if stats is not None:
            stats.attempted += k
            stats.accepted += acc
        done += k
    return g


def _shuffle_small(a: list, r: RngStream) -> None:
    rand = r.random
    for i in range(len(a) - 1, 0, -1):
        j = int(rand() * (i + 1))
        a[i], a[j] = a[j], a[i]


def _shuffle(a: list, r: RngStream) -> list:
    if len(a) < 64:
        _shuffle_small(a, r)
        return a
    return permute_array(r, np.asarray(a, dtype=np.int64)).tolist()


def _trade_inplace(adj: list, u: int, v: int, r: RngStream) -> None:
    nu, nv = adj[u], adj[v]
    only_u = [x for x in nu if x not in nv and x != v]
    only_v = [x for x in nv if x not in nu and x != u]
    pool = len(only_u) + len(only_v)
    if pool == 0 or not only_u or not only_v:
        return
    only_u.sort()
    only_v.sort()
    q = len(only_u)
    mixed = _shuffle(only_u + only_v, r)
    new_u, new_v = mixed[:q], mixed[q:]
    for x in only_u:
        nu.discard(x)
        adj[x].discard(u)
    for x in only_v:
        nv.discard(x)
        adj[x].discard(v)
    for x in new_u:
        nu.add(x)
        adj[x].add(u)
    for x in new_v:
        nv.add(x)
        adj[x].add(v)


def _rebuild_edges(g: AdjacencyGraph) -> None:
    g.edges = [(u, v) for u in range(g.n) for v in sorted(g.adj[u]) if u < v]


def curveball_trade(g, u: int, v: int, r: RngStream) -> AdjacencyGraph:
    """Redistribute the non-shared neighbours of ``u`` and ``v`` uniformly,
    each keeping its own count."""
    if u == v:
        raise InvalidParameterError("a trade needs two distinct nodes")
    if isinstance(g, Graph):
        g = AdjacencyGraph.from_graph(g)
    g = g.copy()
    _trade_inplace(g.adj, u, v, r)
    _rebuild_edges(g)
    return g


def curveball(g, trades: int, r: RngStream) -> AdjacencyGraph:
    """``trades`` single trades between uniformly drawn node pairs
    ``u != v``, on a copy of ``g``."""
    if isinstance(g, Graph):
        g = AdjacencyGraph.from_graph(g)
    g = g.copy()
    n = g.n
    if n < 2 or trades <= 0:
        return g
    u = r.integers(0, n, size=trades)
    v = r.integers(0, n - 1, size=trades)
    v = v + (v >= u)
    for a, b in zip(u.tolist(), v.tolist()):
        _trade_inplace(g.adj, a, b, r)
    _rebuild_edges(g)
    return g


def global_curveball(g, rounds: int, r: RngStream) -> AdjacencyGraph:
    """Each round trades along a uniform random perfect matching of the
    nodes (one node sits out when ``n`` is odd)."""
    if isinstance(g, Graph):
        g = AdjacencyGraph.from_graph(g)
    g = g.copy()
    n = g.n
    if n < 2:
        return g
    ids = list(range(n))
    for _ in range(rounds):
        perm = _shuffle(list(ids), r)
        for k in range(0, n - 1, 2):
            _trade_inplace(g.adj, perm[k], perm[k + 1], r)
    _rebuild_edges(g)
    return g


def fdsm(D, r: RngStream, swaps_per_edge: float = 10.0) -> Graph:
    """Havel-Hakimi realisation followed by ``ceil(swaps_per_edge * m)``
    edge switches."""
    if swaps_per_edge < 0:
        raise InvalidParameterError("swaps_per_edge must be non-negative")
    g0 = havel_hakimi(D)
    k = math.ceil(swaps_per_edge * g0.m)
    if k == 0:
        return g0
    return edge_switch(g0, k, r).to_graph()
