import math
from collections import Counter
from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from conftest import ALPHA, chi2_pmf, chi2_uniform, within_sigma
from graphforge import parallel
from graphforge.core import AdjacencyGraph, degree_sequence_of, in_out_degrees
from graphforge.errors import (BudgetExceededError, InfeasibleError, InvalidParameterError,
                               InvalidWeightsError, NonGraphicalError)
from graphforge.gen_basic import GnpParams, gnp
from graphforge.gen_degree import (ClampCounter, SwitchStats, chung_lu, cm_directed, curveball,
                                   cm_simple_rejection, configuration_model, curveball_trade,
                                   edge_switch, erased_cm, expected_degrees, fdsm,
                                   global_curveball, havel_hakimi, is_graphical,
                                   joint_degree_counts, random_regular, try_switch)
from graphforge.rand import RngStream


def _all_graphs(n):
    """Every labelled simple graph on n nodes as an edge tuple."""
    pairs = list(combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        yield tuple(p for k, p in enumerate(pairs) if mask >> k & 1)


def _degree_tuple(n, edges):
    d = [0] * n
    for u, v in edges:
        d[u] += 1
        d[v] += 1
    return tuple(d)


GRAPHICAL = {n: {_degree_tuple(n, e) for e in _all_graphs(n)} for n in range(1, 6)}


def _key(g):
    e = np.sort(np.asarray(g.edges if not isinstance(g, AdjacencyGraph) else g.edges,
                           dtype=np.int64).reshape(-1, 2), axis=1)
    return tuple(sorted(map(tuple, e.tolist())))


# --- graphicality and Havel-Hakimi ---------------------------------------------

def test_graphical_examples():
    assert is_graphical((3, 3, 3, 3))
    assert not is_graphical((3, 1, 1))
    assert not is_graphical((3, 3, 1, 1))
    assert is_graphical(()) and is_graphical((0,))


def test_graphicality_against_enumeration():
    for n in range(1, 6):
        for d in product(range(n), repeat=n):
            assert is_graphical(d) == (d in GRAPHICAL[n]), d


def test_havel_hakimi_examples():
    assert _key(havel_hakimi((2, 2, 2))) == ((0, 1), (0, 2), (1, 2))
    assert _key(havel_hakimi((1, 1))) == ((0, 1),)
    assert _key(havel_hakimi((4, 1, 1, 1, 1))) == ((0, 1), (0, 2), (0, 3), (0, 4))
    with pytest.raises(NonGraphicalError):
        havel_hakimi((3, 3, 1, 1))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 60), st.floats(0.0, 1.0), st.integers(0, 2 ** 32))
def test_havel_hakimi_realises_graph_degrees(n, p, seed):
    g = gnp(GnpParams(n, p), RngStream(seed))
    D = degree_sequence_of(g).degrees
    h = havel_hakimi(D)
    assert h.is_simple() and degree_sequence_of(h).degrees == D
    assert h == havel_hakimi(D)


# --- Chung-Lu -----------------------------------------------------------------

def test_chung_lu_pair_probabilities():
    w = np.array([4.0, 3.0, 2.0, 2.0, 1.0, 1.0, 0.5, 0.5])
    W = w.sum()
    runs = 6000
    hits = Counter()
    for s in range(runs):
        hits.update(_key(chung_lu(w, RngStream(s), mode="clamp")))
    for i, j in combinations(range(len(w)), 2):
        p = min(1.0, w[i] * w[j] / W)
        assert within_sigma(hits[(i, j)] / runs, p, math.sqrt(p * (1 - p) / runs) + 1e-12, 4)


def test_chung_lu_two_nodes():
    runs = 10_000
    k = sum(chung_lu([1.0, 1.0], RngStream(s)).m for s in range(runs))
    assert within_sigma(k / runs, 0.5, math.sqrt(0.25 / runs), 4)


def test_chung_lu_constant_weights_is_gnp():
    n, c = 300, 6.0
    a = [chung_lu(np.full(n, c), RngStream(s)).m for s in range(60)]
    b = [gnp(GnpParams(n, c / n), RngStream(1000 + s)).m for s in range(60)]
    assert stats.ttest_ind(a, b).pvalue > ALPHA


def test_chung_lu_unsorted_labels_and_partitions(monkeypatch):
    monkeypatch.setattr(parallel, "TARGET_CHUNK_OUTPUT", 32)
    rng = np.random.default_rng(3)
    w = rng.pareto(2.5, 500) + 1
    w = np.minimum(w, math.sqrt(w.sum()))
    full = chung_lu(w, RngStream(1))
    parts = [chung_lu(w, RngStream(1), partition=(i, 5)).edges for i in range(5)]
    assert np.concatenate(parts).tobytes() == full.edges.tobytes()
    assert full.is_simple()
    exp = expected_degrees(w)
    deg = np.zeros(500)
    for s in range(40):
        deg += np.asarray(degree_sequence_of(chung_lu(w, RngStream(s))).degrees)
    # heavy nodes keep their identity after the internal sort
    top = np.argsort(-w)[:5]
    assert np.all(deg[top] / 40 > 0.7 * exp[top])


def test_chung_lu_weight_checks():
    with pytest.raises(InvalidWeightsError):
        chung_lu([10.0, 1.0, 1.0], RngStream(0))
    counter = ClampCounter()
    g = chung_lu([10.0, 10.0, 1.0], RngStream(0), mode="clamp", counter=counter)
    assert counter.clamped > 0 and g.is_simple() and (0, 1) in _key(g)
    with pytest.raises(InvalidWeightsError):
        chung_lu([-1.0, 2.0], RngStream(0))


# --- configuration model ------------------------------------------------------

def _pairing_pmf(D):
    """Outcome law of the stub pairing by enumerating perfect matchings."""
    balls = [i for i, d in enumerate(D) for _ in range(d)]
    out = Counter()

    def rec(rest, acc):
        if not rest:
            out[tuple(sorted(acc))] += 1
            return
        a = rest[0]
        for k in range(1, len(rest)):
            pair = tuple(sorted((balls[a], balls[rest[k]])))
            rec(rest[1:k] + rest[k + 1:], acc + [pair])

    rec(list(range(len(balls))), [])
    tot = sum(out.values())
    return {k: v / tot for k, v in out.items()}, tot


def test_cm_trivial():
    assert _key(configuration_model((1, 1), RngStream(0))) == ((0, 1),)
    g = configuration_model((2,), RngStream(0))
    assert _key(g) == ((0, 0),) and degree_sequence_of(g).degrees == (2,)
    with pytest.raises(InfeasibleError):
        configuration_model((1, 2), RngStream(0))


def test_cm_pairing_law():
    pmf, total = _pairing_pmf((2, 2, 2))
    assert total == 15
    runs = 30_000
    outcomes = [_key(configuration_model((2, 2, 2), RngStream(s))) for s in range(runs)]
    index = {k: i for i, k in enumerate(pmf)}
    assert chi2_pmf([index[o] for o in outcomes], {index[k]: p for k, p in pmf.items()}) > ALPHA


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 8), min_size=1, max_size=60), st.integers(0, 2 ** 32))
def test_cm_degrees_exact(D, seed):
    if sum(D) % 2:
        D = D + [1]
    g = configuration_model(D, RngStream(seed))
    assert degree_sequence_of(g).degrees == tuple(D)
    e = erased_cm(D, RngStream(seed))
    assert e.is_simple()
    assert np.all(np.asarray(degree_sequence_of(e).degrees) <= np.asarray(D))


def test_erased_cm_trivial():
    assert _key(erased_cm((1, 1), RngStream(0))) == ((0, 1),)
    assert erased_cm((2,), RngStream(0)).m == 0


def test_cm_rejection():
    assert _key(cm_simple_rejection((1, 1), RngStream(0))) == ((0, 1),)
    assert _key(cm_simple_rejection((2, 2, 2), RngStream(0))) == ((0, 1), (0, 2), (1, 2))
    with pytest.raises(NonGraphicalError):
        cm_simple_rejection((3, 3, 1, 1), RngStream(0))
    with pytest.raises(BudgetExceededError):
        cm_simple_rejection([5] * 6, RngStream(0), max_tries=1)


def test_cm_rejection_acceptance_rate():
    D = [3] * 30 + [2] * 20
    simple = sum(configuration_model(D, RngStream(s)).is_simple() for s in range(400))
    assert simple / 400 > 0.1


def test_cm_rejection_uniform_on_simple_graphs():
    D = (2, 2, 1, 1)
    runs = 6000
    c = Counter(_key(cm_simple_rejection(D, RngStream(s))) for s in range(runs))
    assert len(c) == 2 and chi2_uniform(list(c.values())) > ALPHA


def test_cm_directed():
    g = cm_directed((1, 0), (0, 1), RngStream(0))
    assert g.edges.tolist() == [[1, 0]]
    runs = 10_000
    loops = sum(int(np.all(cm_directed((1, 1), (1, 1), RngStream(s)).edges[:, 0]
                           == cm_directed((1, 1), (1, 1), RngStream(s)).edges[:, 1]))
                for s in range(runs))
    assert within_sigma(loops / runs, 0.5, math.sqrt(0.25 / runs), 4)
    rng = np.random.default_rng(1)
    for s in range(100):
        di = rng.integers(0, 5, 30)
        do = rng.permutation(di)
        g = cm_directed(di, do, RngStream(s))
        a, b = in_out_degrees(g)
        assert np.array_equal(a, di) and np.array_equal(b, do)
    with pytest.raises(InfeasibleError):
        cm_directed((1, 1), (1, 0), RngStream(0))


def test_random_regular():
    assert _key(random_regular(2, 1, RngStream(0))) == ((0, 1),)
    with pytest.raises(InfeasibleError):
        random_regular(3, 1, RngStream(0))
    with pytest.raises(InfeasibleError):
        random_regular(4, 4, RngStream(0))
    for s in range(20):
        g = random_regular(8, 2, RngStream(s))
        assert g.is_simple() and set(degree_sequence_of(g).degrees) == {2}
        # 2-regular simple graph: every component is a cycle
        a = AdjacencyGraph.from_graph(g)
        seen = set()
        for v in range(8):
            if v in seen:
                continue
            cyc, prev, cur = [v], None, v
            while True:
                nxt = next(x for x in sorted(a.adj[cur]) if x != prev)
                if nxt == v:
                    break
                cyc.append(nxt)
                prev, cur = cur, nxt
            assert len(cyc) >= 3
            seen.update(cyc)
        assert len(seen) == 8


# --- edge switching -----------------------------------------------------------

def test_switch_rejects_duplicates():
    # a=0, b=1, c=2, d=3 with edges {a,b}, {c,d} and existing {a,d}
    g = AdjacencyGraph(4, [(0, 1), (2, 3), (0, 3)])
    h = g.copy()
    assert try_switch(h, 0, 1, 1)  # {a,c}, {b,d}
    assert _key(h) == ((0, 2), (0, 3), (1, 3))
    h = g.copy()
    assert not try_switch(h, 0, 1, 0)  # {a,d} exists
    assert _key(h) == _key(g)


def test_edge_switch_small_graphs_are_noop():
    g = AdjacencyGraph(3, [(0, 1)])
    assert _key(edge_switch(g, 100, RngStream(0))) == ((0, 1),)


def _chain_states(fn, D, chains, steps):
    base = havel_hakimi(D)
    return Counter(_key(fn(base, steps, RngStream(s))) for s in range(chains))


def test_edge_switch_matchings_uniform():
    c = _chain_states(edge_switch, (1, 1, 1, 1), 6000, 100)
    assert len(c) == 3 and chi2_uniform(list(c.values())) > ALPHA


def test_edge_switch_preserves_degrees_and_simplicity():
    rng = RngStream(4)
    g = AdjacencyGraph.from_graph(gnp(GnpParams(200, 0.05), rng.child("g")))
    stats_ = SwitchStats()
    h = edge_switch(g, 20_000, rng.child("es"), stats=stats_)
    assert h.degrees() == g.degrees()
    assert h.to_graph().is_simple()
    assert stats_.attempted == 20_000 and 0 < stats_.accepted <= 20_000
    assert _key(h) != _key(g)


def test_dk2_switching_preserves_joint_degrees():
    rng = RngStream(8)
    g = AdjacencyGraph.from_graph(gnp(GnpParams(150, 0.06), rng.child("g")))
    st_ = SwitchStats()
    h = edge_switch(g, 10_000, rng.child("es"), dk2_restricted=True, stats=st_)
    assert joint_degree_counts(h) == joint_degree_counts(g)
    assert h.degrees() == g.degrees() and st_.accepted > 0


# --- Curveball ----------------------------------------------------------------

def test_trade_identical_neighbourhoods():
    g = AdjacencyGraph(4, [(0, 2), (0, 3), (1, 2), (1, 3)])
    assert _key(curveball_trade(g, 0, 1, RngStream(0))) == _key(g)
    with pytest.raises(InvalidParameterError):
        curveball_trade(g, 1, 1, RngStream(0))


def test_trade_two_outcomes():
    g = AdjacencyGraph(4, [(0, 2), (1, 3)])
    runs = 10_000
    c = Counter(_key(curveball_trade(g, 0, 1, RngStream(s))) for s in range(runs))
    assert set(c) == {((0, 2), (1, 3)), ((0, 3), (1, 2))}
    assert chi2_uniform(list(c.values())) > ALPHA


def test_trade_keeps_common_neighbours_and_shared_edge():
    g = AdjacencyGraph(6, [(0, 1), (0, 2), (1, 2), (0, 3), (1, 4), (1, 5)])
    for s in range(50):
        h = curveball_trade(g, 0, 1, RngStream(s))
        assert h.has_edge(0, 1) and h.has_edge(0, 2) and h.has_edge(1, 2)
        assert h.degrees() == g.degrees()


def test_curveball_chain():
    g = AdjacencyGraph.from_graph(gnp(GnpParams(80, 0.1), RngStream(1)))
    h = curveball(g, 3000, RngStream(2))
    assert h.degrees() == g.degrees() and h.to_graph().is_simple() and _key(h) != _key(g)
    assert _key(curveball(g, 0, RngStream(2))) == _key(g)
    c = Counter(_key(curveball(havel_hakimi((1, 1, 1, 1)), 50, RngStream(s))) for s in range(3000))
    assert len(c) == 3 and chi2_uniform(list(c.values())) > ALPHA


def test_global_curveball():
    assert global_curveball(AdjacencyGraph(1), 5, RngStream(0)).m == 0
    k5 = AdjacencyGraph(5, list(combinations(range(5), 2)))
    assert _key(global_curveball(k5, 3, RngStream(0))) == _key(k5)
    for s in range(10):
        g = AdjacencyGraph.from_graph(gnp(GnpParams(61, 0.1), RngStream(s)))
        h = global_curveball(g, 20, RngStream(100 + s))
        assert h.degrees() == g.degrees() and h.to_graph().is_simple()


@pytest.mark.parametrize("D,states", [((1, 1, 1, 1), 3), ((2, 2, 1, 1), 2)])
def test_global_curveball_uniform(D, states):
    c = _chain_states(global_curveball, D, 6000, 100)
    assert len(c) == states and chi2_uniform(list(c.values())) > ALPHA


# --- FDSM ---------------------------------------------------------------------

def test_fdsm():
    D = (3, 2, 2, 2, 1)
    assert fdsm(D, RngStream(0), swaps_per_edge=0) == havel_hakimi(D)
    c = Counter(_key(fdsm((1, 1, 1, 1), RngStream(s))) for s in range(6000))
    assert len(c) == 3 and chi2_uniform(list(c.values())) > ALPHA
    for s in range(20):
        assert degree_sequence_of(fdsm(D, RngStream(s))).degrees == D
    with pytest.raises(NonGraphicalError):
        fdsm((3, 3, 1, 1), RngStream(0))
