import math

import numpy as np
import pytest
from scipy import stats

from graphforge.rand import RngStream

ALPHA = 0.001


def chi2_uniform(counts):
    """p-value of a chi-square test against equal frequencies."""
    return stats.chisquare(np.asarray(counts, dtype=float)).pvalue


def chi2_pmf(samples, pmf):
    """p-value of a chi-square test of integer ``samples`` against ``pmf``
    (dict value -> probability).  Cells with expectation < 5 are pooled
    into their neighbour so the approximation holds."""
    samples = np.asarray(samples)
    n = len(samples)
    keys = sorted(pmf)
    obs = np.array([np.sum(samples == k) for k in keys], dtype=float)
    exp = np.array([pmf[k] * n for k in keys], dtype=float)
    outside = n - obs.sum()
    assert outside == 0, f"{outside} samples outside the support"
    o, e = [], []
    acc_o = acc_e = 0.0
    for oi, ei in zip(obs, exp):
        acc_o += oi
        acc_e += ei
        if acc_e >= 5:
            o.append(acc_o)
            e.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0:
        o[-1] += acc_o
        e[-1] += acc_e
    e = np.asarray(e)
    return stats.chisquare(o, e * (sum(o) / e.sum())).pvalue


def within_sigma(observed, expected, sigma, k=4.0):
    return abs(observed - expected) <= k * sigma


def binom_pmf(n, p):
    return {x: math.comb(n, x) * p ** x * (1 - p) ** (n - x) for x in range(n + 1)}


def hyper_pmf(k, K, N):
    tot = math.comb(N, k)
    return {x: math.comb(K, x) * math.comb(N - K, k - x) / tot
            for x in range(max(0, k - (N - K)), min(k, K) + 1)}


@pytest.fixture
def rng():
    return RngStream(20240601)


_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    num, title = mark.args
    if rep.when == "call" or rep.failed:
        prev = _CRITERIA.get(num, (title, True, 0.0))
        _CRITERIA[num] = (title, prev[1] and rep.passed, prev[2] + rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, ok, secs = _CRITERIA[num]
        terminalreporter.write_line(f"{num:>2}. {'PASS' if ok else 'FAIL'}  {title}  ({secs:.1f}s)")
