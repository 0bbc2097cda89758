"""Output-sensitive sampling from index ranges.

All routines return ascending ``int64`` arrays.  Work is proportional to
the output size, never to the size of the range being sampled from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    BudgetExceededError,
    InfeasibleError,
    InvalidParameterError,
)
from .rand import RngStream, binomial, geometric, hypergeometric, _check_prob

EMPTY = np.zeros(0, dtype=np.int64)


@dataclass(frozen=True)
class IndexRange:
    lo: int
    hi: int

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi:
            raise InvalidParameterError(f"bad range [{self.lo}, {self.hi})")

    def __len__(self):
        return self.hi - self.lo

    @property
    def size(self) -> int:
        return self.hi - self.lo


def _as_range(rng_or_tuple) -> IndexRange:
    if isinstance(rng_or_tuple, IndexRange):
        return rng_or_tuple
    lo, hi = rng_or_tuple
    return IndexRange(int(lo), int(hi))


@dataclass
class SkipCounter:
    """Instrumentation: skip distances consumed vs. indices emitted."""

    skips: int = 0
    emitted: int = 0


def bernoulli_skip(rng_range, p: float, r: RngStream,
                   counter: Optional[SkipCounter] = None) -> np.ndarray:
    """Every index of the range independently with probability ``p``.

    Skip distances are geometric; they are drawn in vectorised batches
    sized from the expected output, and only the skips that land inside
    the range (plus the one that leaves it) are counted as consumed.
    """
    rr = _as_range(rng_range)
    p = _check_prob(p)
    n = rr.size
    if n == 0 or p == 0.0:
        return EMPTY.copy()
    if p == 1.0:
        if counter is not None:
            counter.emitted += n
        return np.arange(rr.lo, rr.hi, dtype=np.int64)
    expected = n * p
    batch = int(expected + 4.0 * math.sqrt(expected) + 16)
    batch = min(batch, 1 << 22)
    out = []
    pos = rr.lo - 1
    consumed = 0
    while True:
        gaps = geometric(r, p, size=batch)
        steps = np.cumsum(gaps + 1, dtype=np.int64)
        # Large gaps can overflow the cumulative sum; cap it.
        steps = np.where(steps < 0, np.int64(1 << 62), steps)
        idx = pos + steps
        inside = int(np.searchsorted(idx, rr.hi, side="left"))
        out.append(idx[:inside])
        consumed += inside
        if inside < batch:
            consumed += 1
            break
        pos = int(idx[-1])
    res = np.concatenate(out) if len(out) > 1 else out[0]
    if counter is not None:
        counter.skips += consumed
        counter.emitted += len(res)
    return res


# k at or above this uses the vectorised draw-and-deduplicate sampler.
VECTOR_MIN = 2048
# Vitter's method D switches to method A when N <= ALPHA_INV * k.
ALPHA_INV = 13


def _vitter_a(k: int, N: int, r: RngStream) -> list:
    out = []
    cur = -1
    top = N - k
    nreal = float(N)
    while k >= 2:
        v = r.random()
        s = 0
        quot = top / nreal
        while quot > v:
            s += 1
            top -= 1
            nreal -= 1.0
            quot = quot * top / nreal
        cur += s + 1
        out.append(cur)
        nreal -= 1.0
        k -= 1
    s = int(round(nreal) * r.random())
    cur += s + 1
    out.append(cur)
    return out


def _vitter_d(k: int, N: int, r: RngStream, alpha_inv: int = ALPHA_INV) -> list:
    """Sequential k-of-N sampling with skip distances (Vitter's method D)."""
    out = []
    cur = -1
    nreal = float(k)
    ninv = 1.0 / nreal
    Nreal = float(N)
    vprime = math.exp(math.log(1.0 - r.random()) * ninv)
    qu1 = N - k + 1
    qu1real = Nreal - nreal + 1.0
    threshold = alpha_inv * k
    while k > 1 and threshold < N:
        nmin1inv = 1.0 / (nreal - 1.0)
        while True:
            while True:
                x = Nreal * (1.0 - vprime)
                s = int(x)
                if s < qu1:
                    break
                vprime = math.exp(math.log(1.0 - r.random()) * ninv)
            u = 1.0 - r.random()
            negs = -float(s)
            y1 = math.exp(math.log(u * Nreal / qu1real) * nmin1inv)
            vprime = y1 * (1.0 - x / Nreal) * (qu1real / (negs + qu1real))
            if vprime <= 1.0:
                break
            y2 = 1.0
            top = Nreal - 1.0
            if k - 1 > s:
                bottom = Nreal - nreal
                limit = N - s
            else:
                bottom = Nreal + negs - 1.0
                limit = qu1
            t = N - 1
            while t >= limit:
                y2 = (y2 * top) / bottom
                top -= 1.0
                bottom -= 1.0
                t -= 1
            if Nreal / (Nreal - x) >= y1 * math.exp(math.log(y2) * nmin1inv):
                vprime = math.exp(math.log(1.0 - r.random()) * nmin1inv)
                break
            vprime = math.exp(math.log(1.0 - r.random()) * ninv)
        cur += s + 1
        out.append(cur)
        N = N - s - 1
        Nreal = Nreal + negs - 1.0
        k -= 1
        nreal -= 1.0
        ninv = nmin1inv
        qu1 -= s
        qu1real += negs
        threshold -= alpha_inv
    if k > 1:
        rest = _vitter_a(k, N, r)
        out.extend(cur + 1 + x for x in rest)
    elif k == 1:
        s = int(N * vprime)
        out.append(cur + s + 1)
    return out


def _hashset_sample(k: int, N: int, r: RngStream) -> np.ndarray:
    seen = set()
    while len(seen) < k:
        seen.add(int(r.integers(0, N)))
    return np.fromiter(sorted(seen), dtype=np.int64, count=k)


def _batch_sample(k: int, N: int, r: RngStream) -> np.ndarray:
    # Distinct values of an i.i.d. uniform sequence form a uniform subset
    # given their count; trimming the overshoot uniformly keeps it uniform.
    chosen = EMPTY
    while len(chosen) < k:
        need = k - len(chosen)
        draw = r.integers(0, N, size=need + need // 50 + 16)
        chosen = np.union1d(chosen, draw)
    excess = len(chosen) - k
    if excess:
        drop = sample_k_of_n(excess, IndexRange(0, len(chosen)), r)
        chosen = np.delete(chosen, drop)
    return chosen.astype(np.int64, copy=False)


def sample_k_of_n(k: int, rng_range, r: RngStream) -> np.ndarray:
    """Uniform ``k``-subset of the range, ascending, no repeats."""
    rr = _as_range(rng_range)
    N = rr.size
    k = int(k)
    if k < 0 or k > N:
        raise InfeasibleError(f"cannot sample {k} of {N} items")
    if k == 0:
        return EMPTY.copy()
    if k == N:
        return np.arange(rr.lo, rr.hi, dtype=np.int64)
    if 2 * k > N:
        rest = sample_k_of_n(N - k, IndexRange(0, N), r)
        mask = np.ones(N, dtype=bool)
        mask[rest] = False
        return np.flatnonzero(mask).astype(np.int64) + rr.lo
    if k >= VECTOR_MIN:
        return _batch_sample(k, N, r) + rr.lo
    if 8 * k > N:
        return _hashset_sample(k, N, r) + rr.lo
    return np.asarray(_vitter_d(k, N, r), dtype=np.int64) + rr.lo


@dataclass(frozen=True)
class PartitionPlan:
    """Universe ``[0, N)`` cut into parts at ``bounds``; ``counts`` per part."""

    N: int
    bounds: tuple
    counts: tuple = field(default=())

    @property
    def parts(self) -> int:
        return len(self.bounds) - 1


def equal_bounds(N: int, parts: int, lo: int = 0) -> list:
    if parts < 1:
        raise InvalidParameterError("need at least one part")
    return [lo + (i * N) // parts for i in range(parts + 1)]


def _check_bounds(bounds: Sequence[int]) -> list:
    b = [int(x) for x in bounds]
    if len(b) < 2 or any(b[i] > b[i + 1] for i in range(len(b) - 1)):
        raise InvalidParameterError("part boundaries must be monotone with >= 2 cut points")
    return b


def _split(k, a, b, draw, r, out, wanted):
    if b - a == 1:
        out[a] = k
        return
    if wanted is not None and (wanted[1] <= a or wanted[0] >= b):
        return
    mid = (a + b) // 2
    x = draw(r.child("split", a).child("to", b), k, a, mid, b)
    _split(x, a, mid, draw, r, out, wanted)
    _split(k - x, mid, b, draw, r, out, wanted)


def split_sample_counts(k: int, bounds: Sequence[int], r: RngStream,
                        wanted: Optional[tuple] = None) -> list:
    """Per-part sample counts for a without-replacement sample of ``k``.

    Recursive halving over the parts; at each node the left count is
    ``Hypergeometric(k, N_left, N)`` drawn from a substream keyed by the
    node, so any worker can recompute just the counts for its own parts
    (``wanted`` = half-open part-index range; other entries stay ``None``).
    """
    b = _check_bounds(bounds)
    N = b[-1] - b[0]
    if not 0 <= k <= N:
        raise InfeasibleError(f"cannot sample {k} of {N} items")

    def draw(sub, kk, lo, mid, hi):
        return hypergeometric(sub, kk, b[mid] - b[lo], b[hi] - b[lo])

    out = [None] * (len(b) - 1)
    _split(int(k), 0, len(b) - 1, draw, r, out, wanted)
    return out


def sample_with_replacement_split(k: int, bounds: Sequence[int], r: RngStream,
                                  wanted: Optional[tuple] = None,
                                  masses: Optional[Sequence[float]] = None) -> list:
    """Per-part counts for ``k`` draws with replacement.

    The left count at each node is ``Binomial(k, mass_left / mass)``; mass
    defaults to the part sizes given by ``bounds``.
    """
    b = _check_bounds(bounds)
    parts = len(b) - 1
    if masses is None:
        w = np.diff(np.asarray(b, dtype=np.float64))
    else:
        w = np.asarray(masses, dtype=np.float64)
        if len(w) != parts or np.any(w < 0):
            raise InvalidParameterError("need one non-negative mass per part")
    if k < 0:
        raise InvalidParameterError("negative sample size")
    cum = np.concatenate([[0.0], np.cumsum(w)])
    if k > 0 and cum[-1] <= 0:
        raise InfeasibleError("all parts have zero mass")

    def draw(sub, kk, lo, mid, hi):
        total = cum[hi] - cum[lo]
        if kk == 0 or total <= 0:
            return 0
        left = cum[mid] - cum[lo]
        return binomial(sub, kk, min(1.0, max(0.0, left / total)))

    out = [None] * parts
    _split(int(k), 0, parts, draw, r, out, wanted)
    return out


def make_plan(k: int, N: int, parts: int, r: RngStream) -> PartitionPlan:
    bounds = equal_bounds(N, parts)
    return PartitionPlan(N, tuple(bounds), tuple(split_sample_counts(k, bounds, r)))


def rejection_sample(propose: Callable, accept_prob: Callable, r: RngStream,
                     max_attempts: int = 10**6):
    """Draw from ``propose`` until a proposal passes its acceptance coin."""
    for _ in range(int(max_attempts)):
        x = propose(r)
        q = accept_prob(x)
        if q >= 1.0 or r.random() < q:
            return x
    raise BudgetExceededError(f"no proposal accepted in {max_attempts} attempts")


def probability_groups(p: np.ndarray) -> list:
    """Bucket positive probabilities by binary exponent.

    Returns ``(key, indices, bound)``: members satisfy
    ``2^(e-1) <= p < 2^e`` and ``bound = min(1, 2^e)``, so bound/min <= 2.
    """
    p = np.asarray(p, dtype=np.float64)
    pos = np.flatnonzero(p > 0)
    if len(pos) == 0:
        return []
    _, e = np.frexp(p[pos])  # p = mant * 2^e, mant in [0.5, 1)
    groups = []
    for key in np.unique(e):
        idx = pos[e == key]
        groups.append((int(key), idx, min(1.0, math.ldexp(1.0, int(key)))))
    return groups


def weighted_subset_sample(p, r: RngStream, groups: Optional[list] = None) -> np.ndarray:
    """Include index ``i`` independently with probability ``p[i]``.

    Within a group whose probabilities lie within a factor two of a bound,
    Bernoulli-skip at the bound and accept with ``p[i] / bound``.
    ``groups`` may be a list of index arrays; by default probabilities are
    bucketed by binary exponent.
    """
    p = np.asarray(p, dtype=np.float64)
    if np.any(p < 0) or np.any(p > 1) or not np.all(np.isfinite(p)):
        raise InvalidParameterError("probabilities must lie in [0, 1]")
    if groups is None:
        plan = probability_groups(p)
    else:
        plan = []
        for gi, idx in enumerate(groups):
            idx = np.asarray(idx, dtype=np.int64)
            if len(idx) == 0:
                continue
            vals = p[idx]
            bound = float(vals.max())
            if bound == 0.0:
                continue
            if bound > 2.0 * float(vals.min()):
                raise InvalidParameterError(
                    f"group {gi}: max/min probability ratio exceeds 2")
            plan.append((gi, idx, bound))
    picked = []
    for key, idx, bound in plan:
        pos = bernoulli_skip(IndexRange(0, len(idx)), bound, r)
        if len(pos) == 0:
            continue
        cand = idx[pos]
        coins = r.uniform(len(cand))
        picked.append(cand[coins * bound < p[cand]])
    if not picked:
        return EMPTY.copy()
    return np.sort(np.concatenate(picked))
