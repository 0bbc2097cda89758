"""Deterministic hierarchical randomness and standard deviates.

An :class:`RngStream` is identified by a 64-bit seed plus a *path* of
``(tag, index)`` pairs.  The pair is hashed (BLAKE2b, 128-bit digest) into
the key of a Philox4x64 counter-based generator, so a stream is a keyed
pseudorandom function of ``(seed, path, counter)``.  Two handles with equal
``(seed, path)`` replay the same sequence no matter which thread or process
creates them, which is what lets partitions recompute each other's
randomness instead of communicating it.

Key construction (kept stable, other implementations must match it
bit-for-bit to share streams)::

    h = blake2b(digest_size=16, person=b"graphforge.rng1")
    h.update(seed as 8 bytes little-endian)
    for tag, index in path:
        h.update(len(tag) as 4 bytes LE); h.update(tag utf-8)
        h.update(index as 16 bytes LE two's complement)
    key = int.from_bytes(h.digest(), "little")
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidParameterError,
    InvalidProbabilityError,
    InvalidWeightsError,
)

MASK64 = (1 << 64) - 1
_BUFFER = 512


def _derive_key(seed: int, path: tuple) -> int:
    h = hashlib.blake2b(digest_size=16, person=b"graphforge.rng1")
    h.update(int(seed & MASK64).to_bytes(8, "little"))
    for tag, index in path:
        tb = tag.encode("utf-8")
        h.update(len(tb).to_bytes(4, "little"))
        h.update(tb)
        h.update(int(index).to_bytes(16, "little", signed=True))
    return int.from_bytes(h.digest(), "little")


class RngStream:
    """Handle on one deterministic substream.

    Drawing advances a private counter; derive independent substreams
    with :meth:`child` rather than sharing a handle between workers.
    """

    __slots__ = ("seed", "path", "_gen", "_buf", "_pos")

    def __init__(self, seed: int = 0, path: tuple = ()):
        if not 0 <= int(seed) <= MASK64:
            raise InvalidParameterError(f"seed must fit in 64 bits, got {seed}")
        self.seed = int(seed)
        self.path = tuple((str(t), int(i)) for t, i in path)
        self._gen = np.random.Generator(
            np.random.Philox(key=_derive_key(self.seed, self.path))
        )
        self._buf = None
        self._pos = _BUFFER

    def child(self, tag: str, index: int = 0) -> "RngStream":
        return RngStream(self.seed, self.path + ((tag, int(index)),))

    def fresh(self) -> "RngStream":
        """A new handle on the same substream, rewound to its start."""
        return RngStream(self.seed, self.path)

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def random(self) -> float:
        """One double in [0, 1)."""
        if self._pos >= _BUFFER:
            self._buf = self._gen.random(_BUFFER).tolist()
            self._pos = 0
        x = self._buf[self._pos]
        self._pos += 1
        return x

    def uniform(self, size) -> np.ndarray:
        return self._gen.random(size)

    def integers(self, lo, hi, size=None):
        return self._gen.integers(lo, hi, size=size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, path={self.path!r})"


def _check_prob(p: float, *, allow_zero: bool = True) -> float:
    p = float(p)
    if not (p == p) or p > 1.0 or p < 0.0 or (p == 0.0 and not allow_zero):
        raise InvalidProbabilityError(f"invalid probability {p}")
    return p


def uniform_int(r: RngStream, lo: int, hi: int) -> int:
    """Uniform integer in ``[lo, hi)`` without modulo bias."""
    if lo >= hi:
        raise InvalidParameterError(f"empty range [{lo}, {hi})")
    if hi - lo == 1:
        return int(lo)
    return int(r.integers(lo, hi))


# Skips longer than this are reported as "beyond any range we index".
GEOM_CAP = 1 << 62


def geometric(r: RngStream, p: float, size=None):
    """Failures before the first success, ``P[S=k] = (1-p)^k p``.

    Uses ``floor(log U / log1p(-p))`` with ``U`` in (0, 1].
    """
    p = _check_prob(p, allow_zero=False)
    if size is None:
        if p == 1.0:
            return 0
        u = 1.0 - r.random()
        q = math.log1p(-p)
        if q == 0.0:
            return GEOM_CAP
        s = math.floor(math.log(u) / q)
        return min(s, GEOM_CAP)
    if p == 1.0:
        return np.zeros(size, dtype=np.int64)
    u = 1.0 - r.uniform(size)
    with np.errstate(divide="ignore", over="ignore"):
        s = np.floor(np.log(u) / math.log1p(-p))
    return np.minimum(s, float(GEOM_CAP)).astype(np.int64)


def binomial(r: RngStream, trials: int, p: float, size=None):
    if trials < 0:
        raise InvalidParameterError(f"negative trial count {trials}")
    p = _check_prob(p)
    if size is None:
        if trials == 0 or p == 0.0:
            return 0
        if p == 1.0:
            return int(trials)
        return int(r.generator.binomial(int(trials), p))
    return r.generator.binomial(int(trials), p, size=size).astype(np.int64)


def _hyp_log_ratio(x: int, m: int, k: int, K: int, N: int) -> float:
    """log f(x)/f(m) for f(x) = C(K, x) C(N-K, k-x), as a sum of step ratios."""
    if x == m:
        return 0.0
    lo, hi, sign = (m + 1, x, 1.0) if x > m else (x + 1, m, -1.0)
    t = np.arange(lo, hi + 1, dtype=np.float64)
    terms = (
        np.log(K - t + 1.0)
        + np.log(k - t + 1.0)
        - np.log(t)
        - np.log(float(N - K - k) + t)
    )
    return sign * float(terms.sum())


_D1 = 1.7155277699214135  # 2 sqrt(2/e)
_D2 = 0.8989161620588988  # 3 - 2 sqrt(3/e)


def _hyp_reduced(r: RngStream, k: int, K: int, N: int) -> int:
    # Assumes 0 < k <= N/2 and 0 < K <= N/2.
    if k < 10:
        # Inversion from zero.  pmf(0) >= 2^-k here, no underflow.
        p = 1.0
        for i in range(k):
            p *= (N - K - i) / (N - i)
        while True:
            u = r.random()
            x = 0
            f = p
            top = min(k, K)
            while u > f and x < top:
                u -= f
                f *= ((K - x) * (k - x)) / ((x + 1) * (N - K - k + x + 1))
                x += 1
            if u <= f:
                return x
            # Accumulated rounding left mass unassigned; redraw.
    # Ratio of uniforms (Stadlober's HRUA) with exact log pmf ratios.
    mu = k * K / N
    a = mu + 0.5
    var = (N - k) * k * (K / N) * ((N - K) / N) / (N - 1)
    c = math.sqrt(var + 0.5)
    h = _D1 * c + _D2
    m = ((k + 1) * (K + 1)) // (N + 2)
    b = min(min(k, K) + 1, math.floor(a + 16.0 * c))
    while True:
        u = r.random()
        v = r.random()
        if u == 0.0:
            continue
        x = a + h * (v - 0.5) / u
        if x < 0.0 or x >= b:
            continue
        xi = int(x)
        t = _hyp_log_ratio(xi, m, k, K, N)
        if u * (4.0 - u) - 3.0 <= t:
            return xi
        if u * (u - t) >= 1.0:
            continue
        if 2.0 * math.log(u) <= t:
            return xi


def hypergeometric(r: RngStream, k: int, K: int, N: int) -> int:
    """Successes among ``k`` draws without replacement from ``N`` items
    of which ``K`` are successes."""
    k, K, N = int(k), int(K), int(N)
    if N < 0 or not (0 <= k <= N) or not (0 <= K <= N):
        raise InvalidParameterError(f"invalid hypergeometric parameters k={k} K={K} N={N}")
    if k == 0 or K == 0:
        return 0
    if k == N:
        return K
    if K == N:
        return k
    if 2 * k > N:
        return K - hypergeometric(r, N - k, K, N)
    if 2 * K > N:
        return k - hypergeometric(r, k, N - K, N)
    return _hyp_reduced(r, k, K, N)


def fisher_yates(r: RngStream, items: Iterable) -> list:
    """Uniform random permutation; returns a new list.

    Position ``i`` is fixed by swapping with a uniform ``j`` in ``[i, n)``.
    """
    a = list(items)
    n = len(a)
    if n < 2:
        return a
    js = r.integers(np.arange(n - 1), n).tolist()
    for i, j in enumerate(js):
        a[i], a[j] = a[j], a[i]
    return a


def permute_array(r: RngStream, arr: np.ndarray) -> np.ndarray:
    """Shuffled copy of a numpy array (Fisher-Yates in compiled code)."""
    out = np.array(arr, copy=True)
    r.generator.shuffle(out)
    return out


def parallel_permutation(r: RngStream, items: Sequence, parts: int) -> list:
    """Bucket-then-shuffle permutation: each item goes to a uniform bucket,
    each bucket is shuffled independently, buckets are concatenated."""
    if parts < 1:
        raise InvalidParameterError("parts must be >= 1")
    items = list(items)
    if not items:
        return []
    buckets = r.child("bucket").integers(0, parts, size=len(items))
    out = []
    for b in range(parts):
        members = [items[i] for i in np.flatnonzero(buckets == b)]
        out.extend(fisher_yates(r.child("perm", b), members))
    return out


@dataclass(frozen=True)
class AliasTable:
    """``n`` buckets of mass ``1/n``; bucket ``i`` returns ``i`` with
    probability ``threshold[i]`` and ``alias[i]`` otherwise."""

    threshold: np.ndarray
    alias: np.ndarray

    @property
    def n(self) -> int:
        return len(self.threshold)

    @property
    def primary(self) -> np.ndarray:
        return np.arange(self.n)

    def masses(self) -> np.ndarray:
        """Probability mass each element receives, summed over buckets."""
        n = self.n
        out = self.threshold / n
        np.add.at(out, self.alias, (1.0 - self.threshold) / n)
        return out


def alias_build(weights: Sequence[float]) -> AliasTable:
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or len(w) == 0:
        raise InvalidWeightsError("need a non-empty 1-d weight vector")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise InvalidWeightsError("weights must be finite and non-negative")
    total = w.sum()
    if total <= 0:
        raise InvalidWeightsError("at least one weight must be positive")
    n = len(w)
    scaled = (w / total * n).tolist()
    threshold = [1.0] * n
    alias = list(range(n))
    small = [i for i, s in enumerate(scaled) if s < 1.0]
    large = [i for i, s in enumerate(scaled) if s >= 1.0]
    while small and large:
        s = small.pop()
        g = large[-1]
        threshold[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            large.pop()
            small.append(g)
    # Leftovers are 1 up to rounding.
    return AliasTable(np.asarray(threshold), np.asarray(alias, dtype=np.int64))


def alias_sample(t: AliasTable, r: RngStream) -> int:
    i = uniform_int(r, 0, t.n)
    if r.random() < t.threshold[i]:
        return i
    return int(t.alias[i])


def alias_sample_many(t: AliasTable, r: RngStream, size: int) -> np.ndarray:
    i = r.integers(0, t.n, size=size)
    coin = r.uniform(size)
    return np.where(coin < t.threshold[i], i, t.alias[i])


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def hash_prior_index(seed, i):
    """Pure pseudorandom ``x`` uniform on ``[1, i)`` for ``i >= 2``.

    ``x = 1 + floor(u * (i - 1))`` where ``u`` is the top 53 bits of
    ``splitmix64(splitmix64(seed) + splitmix64(i * golden))`` scaled to
    [0, 1).  ``seed`` and ``i`` may be scalars or broadcastable arrays.
    """
    arr = np.asarray(i, dtype=np.int64)
    if np.any(arr < 2):
        raise InvalidParameterError("hash_prior_index needs positions >= 2")
    seeds = np.asarray(seed & MASK64 if np.ndim(seed) == 0 else seed, dtype=np.uint64)
    with np.errstate(over="ignore"):
        key = _mix64(np.atleast_1d(seeds))
        h = _mix64(key + _mix64(np.atleast_1d(arr).astype(np.uint64) * _GOLDEN))
    u = (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
    lim = np.atleast_1d(arr)
    x = np.minimum(np.floor(u * (lim - 1)).astype(np.int64), lim - 2) + 1
    if np.ndim(i) == 0 and np.ndim(seed) == 0:
        return int(x[0])
    return x
