import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from conftest import ALPHA, chi2_uniform, within_sigma
from graphforge import parallel
from graphforge.errors import InvalidParameterError
from graphforge.gen_spatial import (RggParams, RhgParams, band_bounds, empirical_average_degree,
                                    hyperbolic_distance, rgg, rgg_edges, rgg_oracle, rhg_edges,
                                    rhg_oracle, rhg_threshold, _radial_cdf)
from graphforge.rand import RngStream


def _sorted(e):
    e = np.sort(np.asarray(e, dtype=np.int64).reshape(-1, 2), axis=1)
    return e[np.lexsort((e[:, 1], e[:, 0]))] if len(e) else e


def _scalar_rhg_oracle(rad, ang, R, tol=1e-9):
    """Loop over pairs with the closed-form distance; returns (sure, borderline)."""
    sure, border = set(), set()
    for i in range(len(rad)):
        for j in range(i + 1, len(rad)):
            d = hyperbolic_distance((rad[i], ang[i]), (rad[j], ang[j]))
            if abs(d - R) <= tol * max(1.0, R):
                border.add((i, j))
            elif d < R:
                sure.add((i, j))
    return sure, border


# --- fixed point sets ---------------------------------------------------------

def test_rgg_fixed_points():
    pts = [(0.0, 0.0), (0.05, 0.0), (0.9, 0.9)]
    assert rgg_edges(pts, 0.1).tolist() == [[0, 1]]
    assert rgg_oracle(pts, 0.1).tolist() == [[0, 1]]
    assert rgg_edges(pts, 0.15, torus=True).tolist() == [[0, 1], [0, 2]]
    assert rgg_oracle(pts, 0.15, torus=True).tolist() == [[0, 1], [0, 2]]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 120), st.floats(0.01, 0.7), st.booleans(), st.sampled_from([2, 3]),
       st.integers(0, 2 ** 32))
def test_rgg_grid_matches_all_pairs(n, radius, torus, dim, seed):
    pts = np.random.default_rng(seed).random((n, dim))
    assert np.array_equal(rgg_edges(pts, radius, torus), rgg_oracle(pts, radius, torus))


# --- sampled random geometric graphs ------------------------------------------

@pytest.mark.parametrize("torus", [False, True])
def test_rgg_matches_oracle(torus):
    for s in range(10):
        g, pts = rgg(RggParams(200, 0.08, torus=torus), RngStream(s))
        assert pts.n == 200 and np.all(pts.coords >= 0) and np.all(pts.coords < 1)
        assert np.array_equal(_sorted(g.edges), rgg_oracle(pts.coords, 0.08, torus))
        assert g.is_simple()


def test_rgg_three_dimensions():
    g, pts = rgg(RggParams(300, 0.15, dim=3, torus=True), RngStream(2))
    assert np.array_equal(_sorted(g.edges), rgg_oracle(pts.coords, 0.15, True))


def test_rgg_points_are_uniform():
    _, pts = rgg(RggParams(20_000, 0.01), RngStream(5))
    for axis in range(2):
        assert stats.kstest(pts.coords[:, axis], "uniform").pvalue > ALPHA
    counts = np.histogram2d(pts.coords[:, 0], pts.coords[:, 1], bins=8)[0].ravel()
    assert chi2_uniform(counts) > ALPHA


def test_rgg_ids_are_cell_major():
    params = RggParams(500, 0.1)
    _, pts = rgg(params, RngStream(1))
    g = params.grid_side()
    cc = np.minimum((pts.coords * g).astype(int), g - 1)
    cell = cc[:, 0] * g + cc[:, 1]
    assert np.all(np.diff(cell) >= 0)


def test_rgg_partitions(monkeypatch):
    monkeypatch.setattr(parallel, "TARGET_CHUNK_OUTPUT", 50)
    for params in (RggParams(600, 0.05), RggParams(400, 0.1, torus=True),
                   RggParams(400, 0.2, waxman=(0.3, 0.8))):
        full, _ = rgg(params, RngStream(4))
        for P in (3, 7):
            parts = [rgg(params, RngStream(4), partition=(i, P))[0].edges for i in range(P)]
            assert np.concatenate(parts).tobytes() == full.edges.tobytes()
        assert rgg(params, RngStream(4), threads=4)[0].edges.tobytes() == full.edges.tobytes()


def test_rgg_bad_params():
    with pytest.raises(InvalidParameterError):
        RggParams(10, 0.0)
    with pytest.raises(InvalidParameterError):
        RggParams(10, 0.1, dim=4)
    with pytest.raises(InvalidParameterError):
        RggParams(10, 0.1, waxman=(0.0, 0.5))


def test_waxman_acceptance_by_distance():
    alpha, beta = 0.4, 0.9
    params = RggParams(300, 1.0, waxman=(alpha, beta))
    L = math.sqrt(2)
    bins = np.linspace(0, L, 8)
    hit = np.zeros(len(bins) - 1)
    tot = np.zeros(len(bins) - 1)
    expect = np.zeros(len(bins) - 1)
    for s in range(8):
        g, pts = rgg(params, RngStream(s))
        x = pts.coords
        iu, ju = np.triu_indices(len(x), k=1)
        d = np.linalg.norm(x[iu] - x[ju], axis=1)
        b = np.clip(np.digitize(d, bins) - 1, 0, len(bins) - 2)
        tot += np.bincount(b, minlength=len(bins) - 1)
        expect += np.bincount(b, weights=beta * np.exp(-d / (L * alpha)), minlength=len(bins) - 1)
        e = _sorted(g.edges)
        de = np.linalg.norm(x[e[:, 0]] - x[e[:, 1]], axis=1)
        hit += np.bincount(np.clip(np.digitize(de, bins) - 1, 0, len(bins) - 2),
                           minlength=len(bins) - 1)
    for h, t, ex in zip(hit, tot, expect):
        if t > 100:
            p = ex / t
            assert within_sigma(h / t, p, math.sqrt(p * (1 - p) / t), 4)


# --- hyperbolic ---------------------------------------------------------------

def test_hyperbolic_distance_basics():
    assert hyperbolic_distance((3.0, 1.0), (3.0, 1.0)) == 0.0
    assert math.isclose(hyperbolic_distance((5.0, 2.0), (2.0, 2.0)), 3.0, rel_tol=1e-12)
    R = 10.0
    assert hyperbolic_distance((R, 0.0), (R, math.pi)) > R
    assert math.isclose(hyperbolic_distance((R, 0.0), (R, math.pi)), 2 * R, abs_tol=1e-6)
    rng = np.random.default_rng(0)
    a = rng.random((10_000, 2)) * [12, 2 * math.pi]
    b = rng.random((10_000, 2)) * [12, 2 * math.pi]
    for x, y in zip(a, b):
        assert hyperbolic_distance(x, y) == hyperbolic_distance(y, x)
    # same angles, both radii scaled towards the centre: distance shrinks
    assert hyperbolic_distance((4, 0), (5, 1)) < hyperbolic_distance((6, 0), (7, 1))


def test_hyperbolic_distance_matches_law_of_cosines():
    rng = np.random.default_rng(1)
    for _ in range(500):
        ra, rb = rng.random(2) * 6
        dt = rng.random() * math.pi
        naive = math.acosh(max(1.0, math.cosh(ra) * math.cosh(rb)
                               - math.sinh(ra) * math.sinh(rb) * math.cos(dt)))
        assert math.isclose(hyperbolic_distance((ra, 0), (rb, dt)), naive, rel_tol=1e-6,
                            abs_tol=1e-6)


def test_rhg_tiny_cases():
    assert rhg_edges([2.0, 2.0], [1.0, 1.0], 5.0).tolist() == [[0, 1]]
    assert rhg_oracle([2.0, 2.0], [1.0, 1.0], 5.0).tolist() == [[0, 1]]
    assert len(rhg_edges([5.0, 5.0], [0.0, math.pi], 5.0)) == 0


def test_band_bounds():
    b = band_bounds(1000, 20.0)
    assert len(b) == 11 and b[0] == 0 and b[-1] == 20.0
    assert np.all(np.diff(b) > 0)


def test_rhg_radial_law():
    params = RhgParams(20_000, 0.8, 14.0)
    g, pts = rhg_threshold(params, RngStream(7))
    rad, ang = pts.coords[:, 0], pts.coords[:, 1]
    assert stats.kstest(rad, lambda x: _radial_cdf(x, 0.8, 14.0)).pvalue > ALPHA
    assert stats.kstest(ang / (2 * math.pi), "uniform").pvalue > ALPHA


def test_rhg_matches_oracles():
    for s in range(6):
        params = RhgParams(400, 0.7 + 0.05 * s, 9.0 + s)
        g, pts = rhg_threshold(params, RngStream(s))
        rad, ang = pts.coords[:, 0], pts.coords[:, 1]
        e = _sorted(g.edges)
        assert np.array_equal(e, rhg_oracle(rad, ang, params.R))
        assert np.array_equal(e, rhg_edges(rad, ang, params.R))
        if s < 2:
            sure, border = _scalar_rhg_oracle(rad, ang, params.R)
            got = set(map(tuple, e.tolist()))
            assert sure <= got and got - sure <= border


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 150), st.floats(0.55, 2.0), st.floats(1.0, 16.0), st.integers(0, 2 ** 32))
def test_band_generator_matches_all_pairs_on_arbitrary_points(n, alpha, R, seed):
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    rad = np.arccosh(1 + u * (math.cosh(alpha * R) - 1)) / alpha
    ang = rng.random(n) * 2 * math.pi
    assert np.array_equal(rhg_edges(rad, ang, R), rhg_oracle(rad, ang, R))


def test_rhg_partitions(monkeypatch):
    monkeypatch.setattr(parallel, "TARGET_CHUNK_OUTPUT", 64)
    params = RhgParams(1500, 0.75, 11.0)
    full, _ = rhg_threshold(params, RngStream(2))
    for P in (2, 5, 13):
        parts = [rhg_threshold(params, RngStream(2), partition=(i, P))[0].edges for i in range(P)]
        assert np.concatenate(parts).tobytes() == full.edges.tobytes()
    assert rhg_threshold(params, RngStream(2), threads=4)[0].edges.tobytes() == full.edges.tobytes()


def test_rhg_params_and_calibration():
    with pytest.raises(InvalidParameterError):
        RhgParams(10, 0.5, 3.0)
    with pytest.raises(InvalidParameterError):
        RhgParams(10, 0.7, 0.0)
    lo = empirical_average_degree(RhgParams(2000, 0.75, 12.0), RngStream(0), runs=2)
    hi = empirical_average_degree(RhgParams(2000, 0.75, 10.0), RngStream(0), runs=2)
    assert 0 < lo < hi
