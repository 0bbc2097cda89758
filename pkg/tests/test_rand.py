import itertools
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import ALPHA, binom_pmf, chi2_pmf, chi2_uniform, hyper_pmf, within_sigma
from graphforge.errors import InvalidParameterError, InvalidProbabilityError, InvalidWeightsError
from graphforge.rand import (RngStream, alias_build, alias_sample, alias_sample_many, binomial,
                             fisher_yates, geometric, hash_prior_index, hypergeometric,
                             parallel_permutation, uniform_int)


def test_stream_replays_identically():
    a, b = RngStream(7, (("x", 1),)), RngStream(7, (("x", 1),))
    assert [a.random() for _ in range(1000)] == [b.random() for _ in range(1000)]


def test_children_are_distinct_and_order_free():
    r = RngStream(3)
    c1 = r.child("chunk", 1)
    c2 = r.child("chunk", 2)
    assert c1.random() != c2.random()
    # Deriving a child does not consume the parent.
    r2 = RngStream(3)
    _ = r2.child("chunk", 5)
    assert RngStream(3).random() == r2.random()


def test_seed_bounds():
    with pytest.raises(InvalidParameterError):
        RngStream(-1)
    with pytest.raises(InvalidParameterError):
        RngStream(1 << 64)


def test_uniform_int():
    r = RngStream(1)
    assert all(uniform_int(r, 0, 1) == 0 for _ in range(100))
    counts = np.bincount([uniform_int(r, 0, 6) for _ in range(60000)], minlength=6)
    sigma = math.sqrt(60000 * (1 / 6) * (5 / 6))
    assert all(within_sigma(c, 10000, sigma) for c in counts)
    with pytest.raises(InvalidParameterError):
        uniform_int(r, 3, 3)


def test_geometric_edge_cases_and_mean():
    r = RngStream(2)
    assert all(geometric(r, 1.0) == 0 for _ in range(50))
    x = geometric(r, 0.5, size=100000)
    sigma = math.sqrt((1 - 0.5) / 0.25 / 100000)
    assert within_sigma(x.mean(), 1.0, sigma, 3)
    y = geometric(r, 0.25, size=100000)
    assert within_sigma((y == 0).mean(), 0.25, math.sqrt(0.25 * 0.75 / 100000), 3)
    with pytest.raises(InvalidProbabilityError):
        geometric(r, 0.0)
    with pytest.raises(InvalidProbabilityError):
        geometric(r, 1.5)


def test_geometric_scalar_matches_law():
    r = RngStream(22)
    p = 0.3
    xs = np.array([geometric(r, p) for _ in range(20000)])
    pmf = {k: (1 - p) ** k * p for k in range(60)}
    pmf[60] = 1 - sum(pmf.values())
    xs = np.minimum(xs, 60)
    assert chi2_pmf(xs, pmf) > ALPHA


def test_binomial():
    r = RngStream(3)
    assert binomial(r, 0, 0.4) == 0
    assert binomial(r, 17, 1.0) == 17
    xs = binomial(r, 10, 0.3, size=100000)
    assert chi2_pmf(xs, binom_pmf(10, 0.3)) > ALPHA


def test_hypergeometric_small():
    r = RngStream(4)
    assert hypergeometric(r, 10, 4, 10) == 4
    assert hypergeometric(r, 0, 4, 10) == 0
    xs = [hypergeometric(r, 5, 4, 10) for _ in range(100000)]
    assert chi2_pmf(xs, hyper_pmf(5, 4, 10)) > ALPHA


@pytest.mark.parametrize("k,K,N", [(40, 300, 1000), (700, 300, 1000), (30, 980, 1000)])
def test_hypergeometric_ratio_of_uniforms_branch(k, K, N):
    r = RngStream(5)
    xs = [hypergeometric(r, k, K, N) for _ in range(30000)]
    assert chi2_pmf(xs, hyper_pmf(k, K, N)) > ALPHA


def test_hypergeometric_huge_population_mean():
    r = RngStream(6)
    k, K, N = 10 ** 8, 10 ** 13, 5 * 10 ** 13
    xs = np.array([hypergeometric(r, k, K, N) for _ in range(300)], dtype=float)
    mean = k * K / N
    var = k * (K / N) * (1 - K / N) * (N - k) / (N - 1)
    assert within_sigma(xs.mean(), mean, math.sqrt(var / len(xs)))


def test_fisher_yates():
    r = RngStream(7)
    assert fisher_yates(r, []) == []
    assert fisher_yates(r, ["a"]) == ["a"]
    perms = {p: i for i, p in enumerate(itertools.permutations(range(3)))}
    counts = np.zeros(6)
    for _ in range(60000):
        counts[perms[tuple(fisher_yates(r, range(3)))]] += 1
    sigma = math.sqrt(60000 * (1 / 6) * (5 / 6))
    assert all(within_sigma(c, 10000, sigma) for c in counts)


def test_parallel_permutation_is_permutation_and_uniform():
    r = RngStream(8)
    perms = {p: i for i, p in enumerate(itertools.permutations(range(3)))}
    counts = np.zeros(6)
    for t in range(12000):
        out = parallel_permutation(r.child("t", t), range(3), 2)
        counts[perms[tuple(out)]] += 1
    assert chi2_uniform(counts) > ALPHA


def test_alias_table_from_worked_example():
    t = alias_build([1, 2, 3, 4])
    # Every bucket carries mass 1/4 and the masses recombine to the weights.
    assert t.n == 4
    np.testing.assert_allclose(t.masses(), [0.1, 0.2, 0.3, 0.4])
    r = RngStream(9)
    xs = alias_sample_many(t, r, 10 ** 6)
    freq = np.bincount(xs, minlength=4) / 1e6
    for f, p in zip(freq, [0.1, 0.2, 0.3, 0.4]):
        assert within_sigma(f, p, math.sqrt(p * (1 - p) / 1e6), 3)


def test_alias_degenerate_tables():
    r = RngStream(10)
    t = alias_build([5.0])
    assert all(alias_sample(t, r) == 0 for _ in range(100))
    u = alias_build([1, 1, 1])
    assert np.all(u.threshold == 1.0)
    h = alias_build([0.5, 0.5])
    xs = alias_sample_many(h, r, 10000)
    assert within_sigma(xs.mean(), 0.5, 0.005)
    a, b = RngStream(11), RngStream(11)
    assert [alias_sample(h, a) for _ in range(50)] == [alias_sample(h, b) for _ in range(50)]
    with pytest.raises(InvalidWeightsError):
        alias_build([0, 0])
    with pytest.raises(InvalidWeightsError):
        alias_build([1, -1])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=40).filter(lambda w: sum(w) > 0))
def test_alias_masses_recover_weights(w):
    t = alias_build(w)
    np.testing.assert_allclose(t.masses(), np.asarray(w) / sum(w), atol=1e-12)


def test_hash_prior_index():
    assert all(hash_prior_index(s, 2) == 1 for s in range(100))
    with ThreadPoolExecutor(8) as pool:
        vals = set(pool.map(lambda _: hash_prior_index(12345, 16), range(8)))
    assert len(vals) == 1
    xs = hash_prior_index(np.arange(10 ** 6, dtype=np.uint64), 100)
    assert xs.min() >= 1 and xs.max() < 100
    assert chi2_uniform(np.bincount(xs, minlength=100)[1:]) > ALPHA
    assert hash_prior_index(77, 100) == xs[77]
    with pytest.raises(InvalidParameterError):
        hash_prior_index(1, 1)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, (1 << 64) - 1), st.integers(2, 1 << 40))
def test_hash_prior_index_range(seed, i):
    x = hash_prior_index(seed, i)
    assert 1 <= x < i
