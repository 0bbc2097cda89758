"""Post-processing: simplification, direction changes and three ways to
end up with a connected graph."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import Graph, connected_components
from .errors import BudgetExceededError, InvalidParameterError, UnsupportedInputError
from .rand import RngStream, permute_array


def simplify(g: Graph) -> Graph:
    """Drop loops and repeated edges, keeping first occurrences in order."""
    e = g.edges
    if len(e) == 0:
        return Graph(g.n, e, g.directed)
    keep = e[:, 0] != e[:, 1]
    key = e if g.directed else np.sort(e, axis=1)
    _, first = np.unique(key[keep], axis=0, return_index=True)
    idx = np.flatnonzero(keep)[np.sort(first)]
    w = None if g.weights is None else g.weights[idx]
    return Graph(g.n, e[idx], g.directed, weights=w)


@dataclass(frozen=True)
class ConnectPolicy:
    kind: str = "reject"
    max_tries: int = 100

    def __post_init__(self):
        if self.kind not in ("reject", "giant", "tree"):
            raise InvalidParameterError("policy is 'reject', 'giant' or 'tree'")
        if self.max_tries < 1:
            raise InvalidParameterError("max_tries must be >= 1")


def is_connected(g: Graph) -> bool:
    return g.n <= 1 or connected_components(g).count == 1


def rejection_connected(generator: Callable[[RngStream], Graph], max_tries: int,
                        r: RngStream):
    """First connected sample of ``generator`` over substreams ``try/i``.
    Returns ``(graph, tries)``."""
    if max_tries < 1:
        raise InvalidParameterError("max_tries must be >= 1")
    for t in range(max_tries):
        g = generator(r.child("try", t))
        if is_connected(g):
            return g, t + 1
    raise BudgetExceededError(f"no connected sample within {max_tries} tries")


def _require_undirected(g: Graph):
    if g.directed:
        raise UnsupportedInputError("undirected graph required")


def extract_giant(g: Graph):
    """Induced subgraph of the largest component (ties: the one holding the
    smallest id), relabelled densely in id order.

    Returns ``(graph, old_to_new)`` with ``-1`` for dropped nodes.
    """
    _require_undirected(g)
    if g.n == 0:
        return Graph(0), np.zeros(0, dtype=np.int64)
    comps = connected_components(g)
    # argmax returns the first maximum; labels follow smallest node id.
    big = int(np.argmax(comps.sizes))
    keep = comps.labels == big
    mapping = np.full(g.n, -1, dtype=np.int64)
    mapping[keep] = np.arange(int(keep.sum()))
    e = g.edges
    sel = keep[e[:, 0]] if len(e) else np.zeros(0, dtype=bool)
    w = None if g.weights is None else g.weights[sel]
    return Graph(int(keep.sum()), mapping[e[sel]], allow_loops=g.allow_loops,
                 allow_multi=g.allow_multi, weights=w), mapping


def spanning_tree_augment(g: Graph, r: RngStream) -> Graph:
    """Connect the components in random order: each one is joined by one
    edge between a uniform node of it and a uniform node of the part merged
    so far."""
    _require_undirected(g)
    if g.n <= 1:
        return g
    comps = connected_components(g)
    if comps.count == 1:
        return g
    order = permute_array(r, np.arange(comps.count))
    groups = np.split(np.argsort(comps.labels, kind="stable"),
                      np.cumsum(comps.sizes)[:-1])
    merged = list(groups[order[0]])
    added = []
    for c in order[1:].tolist():
        members = groups[c]
        a = int(members[int(r.random() * len(members))])
        b = int(merged[int(r.random() * len(merged))])
        added.append((min(a, b), max(a, b)))
        merged.extend(members.tolist())
    e = np.concatenate([g.edges, np.asarray(added, dtype=np.int64)])
    return Graph(g.n, e, allow_loops=g.allow_loops, allow_multi=g.allow_multi)


def to_undirected(g: Graph) -> Graph:
    """Forget directions; ``(u, v)`` and ``(v, u)`` collapse to one edge."""
    e = np.sort(g.edges, axis=1)
    if len(e):
        _, first = np.unique(e, axis=0, return_index=True)
        e = e[np.sort(first)]
    return Graph(g.n, e, allow_loops=g.allow_loops)


def orient(g: Graph, rule: str = "by-id", r: Optional[RngStream] = None) -> Graph:
    """Direct every edge: ``by-id`` points from the smaller id, ``random``
    flips a fair coin per edge."""
    e = g.edges.copy()
    if rule == "by-id":
        e.sort(axis=1)
    elif rule == "random":
        if r is None:
            raise InvalidParameterError("random orientation needs a stream")
        flip = r.uniform(len(e)) < 0.5
        e[flip] = e[flip][:, ::-1]
    else:
        raise InvalidParameterError("rule is 'by-id' or 'random'")
    return Graph(g.n, e, directed=True, allow_loops=g.allow_loops,
                 allow_multi=g.allow_multi, weights=g.weights)


def connect(g_or_gen, policy: ConnectPolicy, r: RngStream) -> Graph:
    """Apply ``policy``; ``reject`` expects a generator callable."""
    if policy.kind == "reject":
        return rejection_connected(g_or_gen, policy.max_tries, r)[0]
    g = g_or_gen(r.child("base")) if callable(g_or_gen) else g_or_gen
    if policy.kind == "giant":
        return extract_giant(g)[0]
    return spanning_tree_augment(g, r.child("tree"))
