"""Random geometric graphs on a cell grid and threshold random hyperbolic
graphs on concentric bands, each paired with an all-pairs oracle.

Node ids are cell-major (RGG) or band-major with angular order inside a
band (RHG), so every partition of the canonical chunk grid agrees on the
labelling.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Graph
from .gen_basic import triangle_index_to_edge
from .errors import InvalidParameterError
from .parallel import ChunkedJob, chunk_count
from .rand import RngStream
from .sampling import IndexRange, bernoulli_skip, equal_bounds, sample_with_replacement_split

EMPTY = np.zeros((0, 2), dtype=np.int64)


@dataclass(frozen=True)
class PointSet:
    """Coordinates per node: ``(n, d)`` in the unit cube, or ``(n, 2)``
    holding (radius, angle) on the hyperbolic disk."""

    coords: np.ndarray
    kind: str = "euclidean"

    @property
    def n(self) -> int:
        return len(self.coords)

    def lines(self):
        for i, row in enumerate(self.coords):
            yield f"{i} " + " ".join(repr(float(x)) for x in row)


# --- random geometric graphs --------------------------------------------------

@dataclass(frozen=True)
class RggParams:
    n: int
    radius: float
    dim: int = 2
    torus: bool = False
    waxman: Optional[tuple] = None  # (alpha, beta)

    def __post_init__(self):
        if self.n < 0:
            raise InvalidParameterError("n must be non-negative")
        if not (self.radius > 0) or not math.isfinite(self.radius):
            raise InvalidParameterError("radius must be positive")
        if self.dim not in (2, 3):
            raise InvalidParameterError("dimension must be 2 or 3")
        if self.waxman is not None:
            a, b = self.waxman
            if not (0 < a <= 1 and 0 < b <= 1):
                raise InvalidParameterError("Waxman alpha and beta must lie in (0, 1]")

    def grid_side(self) -> int:
        """Cells per axis.  Cells are at least ``radius`` wide so only
        neighbouring cells can hold partners; the count is also capped near
        ``n`` cells to keep empty-cell overhead bounded."""
        cap = max(1, int((max(self.n, 1) / 2.0) ** (1.0 / self.dim)))
        if self.waxman is not None:
            cap = max(1, int((max(self.n, 1) / 32.0) ** (1.0 / self.dim)))
            return cap
        return max(1, min(int(math.floor(1.0 / self.radius)), cap))

    @property
    def diameter(self) -> float:
        return math.sqrt(self.dim) / (2.0 if self.torus else 1.0)


def _cell_coords(cells: np.ndarray, g: int, dim: int) -> np.ndarray:
    out = np.empty((len(cells), dim), dtype=np.int64)
    rest = cells.copy()
    for ax in range(dim - 1, -1, -1):
        out[:, ax] = rest % g
        rest //= g
    return out


def _cell_index(cc: np.ndarray, g: int) -> np.ndarray:
    idx = np.zeros(len(cc), dtype=np.int64)
    for ax in range(cc.shape[1]):
        idx = idx * g + cc[:, ax]
    return idx


def _neighbor_pairs(cells: np.ndarray, g: int, dim: int, torus: bool) -> np.ndarray:
    """Unordered neighbouring cell pairs ``(c, c2)`` with ``c <= c2`` owned
    by ``c`` for every ``c`` in ``cells``."""
    cc = _cell_coords(cells, g, dim)
    out = []
    for off in itertools.product((-1, 0, 1), repeat=dim):
        nc = cc + np.asarray(off, dtype=np.int64)
        if torus:
            nc %= g
            ok = np.ones(len(nc), dtype=bool)
        else:
            ok = np.all((nc >= 0) & (nc < g), axis=1)
        c2 = _cell_index(nc[ok], g)
        c1 = cells[ok]
        keep = c1 <= c2
        out.append(np.stack([c1[keep], c2[keep]], axis=1))
    pairs = np.concatenate(out)
    return np.unique(pairs, axis=0)


def _expand_pairs(pairs: np.ndarray, start: np.ndarray, count: np.ndarray) -> np.ndarray:
    """All point pairs ``(i, j)``, ``i < j``, between the cells of each pair."""
    if len(pairs) == 0:
        return EMPTY
    a, b = pairs[:, 0], pairs[:, 1]
    na, nb = count[a], count[b]
    tot = na * nb
    nz = tot > 0
    a, b, na, nb, tot = a[nz], b[nz], na[nz], nb[nz], tot[nz]
    if len(tot) == 0:
        return EMPTY
    pi = np.repeat(np.arange(len(tot)), tot)
    base = np.concatenate([[0], np.cumsum(tot)[:-1]])
    local = np.arange(int(tot.sum()), dtype=np.int64) - base[pi]
    i = start[a][pi] + local // nb[pi]
    j = start[b][pi] + local % nb[pi]
    keep = i < j
    return np.stack([i[keep], j[keep]], axis=1)


def _sq_dist(x: np.ndarray, y: np.ndarray, torus: bool) -> np.ndarray:
    diff = np.abs(x - y)
    if torus:
        diff = np.minimum(diff, 1.0 - diff)
    return np.sum(diff * diff, axis=1)


def _threshold_filter(pairs, pts, radius, torus):
    if len(pairs) == 0:
        return EMPTY
    d2 = _sq_dist(pts[pairs[:, 0]], pts[pairs[:, 1]], torus)
    return pairs[d2 <= radius * radius]


def _cell_gap(c1: np.ndarray, c2: np.ndarray, g: int, dim: int, torus: bool) -> np.ndarray:
    """Lower bound on the distance between points of two cells."""
    d = np.abs(_cell_coords(c1, g, dim) - _cell_coords(c2, g, dim))
    if torus:
        d = np.minimum(d, g - d)
    gap = np.maximum(d - 1, 0) / g
    return np.sqrt(np.sum(gap * gap, axis=1))


def _waxman_cell(c, start, count, pts, g, params, r):
    alpha, beta = params.waxman
    L = params.diameter
    C = len(count)
    others = np.arange(c, C, dtype=np.int64)
    gaps = _cell_gap(np.full(len(others), c, dtype=np.int64), others, g, params.dim, params.torus)
    found = []
    for c2, gap in zip(others.tolist(), gaps.tolist()):
        na, nb = int(count[c]), int(count[c2])
        size = na * (na - 1) // 2 if c2 == c else na * nb
        if size == 0:
            continue
        bound = beta * math.exp(-gap / (L * alpha))
        idx = bernoulli_skip(IndexRange(0, size), bound, r)
        if len(idx) == 0:
            continue
        if c2 == c:
            loc = triangle_index_to_edge(idx, na)
            i, j = start[c] + loc[:, 0], start[c] + loc[:, 1]
        else:
            i, j = start[c] + idx // nb, start[c2] + idx % nb
        dist = np.sqrt(_sq_dist(pts[i], pts[j], params.torus))
        p = beta * np.exp(-dist / (L * alpha))
        u = r.uniform(len(i))
        ok = u * bound < p
        found.append(np.stack([i[ok], j[ok]], axis=1))
    if not found:
        return EMPTY
    e = np.concatenate(found)
    return e[np.lexsort((e[:, 1], e[:, 0]))]


class _RggLayout:
    """Per-chunk cell counts and node-id offsets, all from pure substreams."""

    def __init__(self, params: RggParams, r: RngStream):
        self.params = params
        self.g = params.grid_side()
        self.C = self.g ** params.dim
        d = params.dim
        if params.waxman is not None:
            exp_edges = params.n * params.n * params.waxman[1] / 2.0
        else:
            vol = (math.pi * params.radius ** 2) if d == 2 else (4.0 / 3.0 * math.pi * params.radius ** 3)
            exp_edges = params.n * params.n * min(vol, 1.0) / 2.0
        self.chunks = chunk_count(exp_edges, limit=self.C)
        self.cell_bounds = equal_bounds(self.C, self.chunks)
        chunk_counts = sample_with_replacement_split(params.n, self.cell_bounds, r.child("rgg-chunks"))
        self.chunk_start = np.concatenate([[0], np.cumsum(chunk_counts)]).astype(np.int64)
        self.chunk_counts = chunk_counts
        self.r = r
        self._cache = {}

    def chunk_points(self, k: int):
        """(cell counts, points) of chunk ``k`` recomputed from its stream."""
        if k in self._cache:
            return self._cache[k]
        lo, hi = self.cell_bounds[k], self.cell_bounds[k + 1]
        sub = self.r.child("rgg-cells", k)
        cnt = sub.generator.multinomial(self.chunk_counts[k], np.full(hi - lo, 1.0 / (hi - lo)))
        cnt = cnt.astype(np.int64)
        cells = np.repeat(np.arange(lo, hi, dtype=np.int64), cnt)
        corner = _cell_coords(cells, self.g, self.params.dim).astype(np.float64)
        pts = (corner + sub.uniform((len(cells), self.params.dim))) / self.g
        # Rounding must not push a coordinate to 1.0.
        np.minimum(pts, np.nextafter(1.0, 0.0), out=pts)
        self._cache[k] = (cnt, pts)
        return cnt, pts

    def all_points(self):
        cnts, pts = zip(*(self.chunk_points(k) for k in range(self.chunks)))
        count = np.concatenate(cnts)
        start = np.concatenate([[0], np.cumsum(count)[:-1]]).astype(np.int64)
        return start, count, np.concatenate(pts) if pts else np.zeros((0, self.params.dim))


def rgg_job(params: RggParams, r: RngStream):
    lay = _RggLayout(params, r)
    state = {}

    def points():
        # A partition recomputes every point it may compare against; the
        # grid is small next to the edge output, so the whole set is rebuilt.
        if "p" not in state:
            state["p"] = lay.all_points()
        return state["p"]

    def chunk(k):
        start, count, pts = points()
        cells = np.arange(lay.cell_bounds[k], lay.cell_bounds[k + 1], dtype=np.int64)
        if params.waxman is not None:
            sub = r.child("rgg-waxman", k)
            parts = [_waxman_cell(int(c), start, count, pts, lay.g, params, sub) for c in cells]
            return np.concatenate(parts) if parts else EMPTY
        pairs = _neighbor_pairs(cells, lay.g, params.dim, params.torus)
        e = _threshold_filter(_expand_pairs(pairs, start, count), pts, params.radius, params.torus)
        return e[np.lexsort((e[:, 1], e[:, 0]))]

    return ChunkedJob(lay.chunks, chunk), lay, points


def rgg(params: RggParams, r: RngStream, partition: Optional[tuple] = None,
        threads: int = 1):
    """Uniform points in the unit cube (or torus); threshold edges at
    ``radius`` or Waxman edges with probability ``beta exp(-dist/(L alpha))``.

    Returns ``(Graph, PointSet)``.
    """
    job, lay, points = rgg_job(params, r)
    edges, _ = job.collect(partition, threads)
    return Graph(params.n, edges), PointSet(points()[2])


def rgg_edges(points, radius: float, torus: bool = False) -> np.ndarray:
    """Threshold edges of a fixed point set via the cell grid, in the
    points' own ids, sorted."""
    pts = np.asarray(points, dtype=np.float64)
    n, dim = pts.shape
    if not radius > 0:
        raise InvalidParameterError("radius must be positive")
    g = max(1, min(int(math.floor(1.0 / radius)), max(1, int((max(n, 1) / 2.0) ** (1.0 / dim)))))
    cell_cc = np.minimum((pts * g).astype(np.int64), g - 1)
    cell = _cell_index(cell_cc, g)
    order = np.argsort(cell, kind="stable")
    count = np.bincount(cell, minlength=g ** dim).astype(np.int64)
    start = np.concatenate([[0], np.cumsum(count)[:-1]]).astype(np.int64)
    spts = pts[order]
    pairs = _neighbor_pairs(np.arange(g ** dim, dtype=np.int64), g, dim, torus)
    e = _threshold_filter(_expand_pairs(pairs, start, count), spts, radius, torus)
    e = order[e]
    e = np.sort(e, axis=1)
    return e[np.lexsort((e[:, 1], e[:, 0]))]


def rgg_oracle(points, radius: float, torus: bool = False) -> np.ndarray:
    """All-pairs threshold edges, sorted."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    iu, ju = np.triu_indices(n, k=1)
    d2 = _sq_dist(pts[iu], pts[ju], torus)
    ok = d2 <= radius * radius
    return np.stack([iu[ok], ju[ok]], axis=1).astype(np.int64)


# --- threshold random hyperbolic graphs ---------------------------------------

@dataclass(frozen=True)
class RhgParams:
    n: int
    alpha: float
    R: float

    def __post_init__(self):
        if self.n < 0:
            raise InvalidParameterError("n must be non-negative")
        if not self.alpha > 0.5:
            raise InvalidParameterError("dispersion alpha must exceed 1/2")
        if not (self.R > 0 and math.isfinite(self.R)):
            raise InvalidParameterError("disk radius R must be positive")


def hyperbolic_distance(a, b) -> float:
    """Distance between points given as (radius, angle) on the hyperbolic
    plane of curvature -1."""
    ra, ta = float(a[0]), float(a[1])
    rb, tb = float(b[0]), float(b[1])
    s = math.sin((ta - tb) / 2.0)
    # cosh d = cosh(ra - rb) + 2 sinh ra sinh rb sin^2(dtheta / 2)
    c = math.cosh(ra - rb) + 2.0 * math.sinh(ra) * math.sinh(rb) * s * s
    return math.acosh(max(1.0, c))


def band_bounds(n: int, R: float) -> np.ndarray:
    """``ceil(log2 n)`` bands with inner radii ``R (1 - 2^-i)``."""
    B = max(1, math.ceil(math.log2(max(n, 2))))
    b = R * (1.0 - np.power(2.0, -np.arange(B, dtype=np.float64)))
    return np.concatenate([b, [R]])


def _radial_cdf(r, alpha, R):
    # cosh(x) - 1 = 2 sinh(x/2)^2 without cancellation near 0
    return np.sinh(alpha * np.asarray(r) / 2.0) ** 2 / math.sinh(alpha * R / 2.0) ** 2


def _sample_radii(u: np.ndarray, lo: float, hi: float, alpha: float, R: float) -> np.ndarray:
    f_lo, f_hi = _radial_cdf(lo, alpha, R), _radial_cdf(hi, alpha, R)
    v = f_lo + u * (f_hi - f_lo)
    r = np.arccosh(1.0 + v * (math.cosh(alpha * R) - 1.0)) / alpha
    return np.clip(r, lo, hi)


class _HypPoints:
    """Points with cached ``cosh r, sinh r, cos t, sin t``."""

    def __init__(self, radius, angle):
        self.radius = radius
        self.angle = angle
        self.cr = np.cosh(radius)
        self.sr = np.sinh(radius)
        self.ct = np.cos(angle)
        self.st = np.sin(angle)

    def cosh_dist(self, i, j):
        a = self.cr[i] * self.cr[j]
        b = self.sr[i] * self.sr[j]
        c = self.ct[i] * self.ct[j] + self.st[i] * self.st[j]
        return a - b * c


def rhg_points(params: RhgParams, r: RngStream):
    """Band layout and points: ``(bounds, band_start, radius, angle)``."""
    bounds = band_bounds(params.n, params.R)
    B = len(bounds) - 1
    F = _radial_cdf(bounds, params.alpha, params.R)
    masses = np.diff(F)
    counts = sample_with_replacement_split(params.n, list(range(B + 1)), r.child("rhg-bands"),
                                           masses=masses)
    radii, angles = [], []
    for i in range(B):
        sub = r.child("rhg-band", i)
        k = counts[i]
        rad = _sample_radii(sub.uniform(k), bounds[i], bounds[i + 1], params.alpha, params.R)
        ang = sub.uniform(k) * (2.0 * math.pi)
        order = np.argsort(ang, kind="stable")
        radii.append(rad[order])
        angles.append(ang[order])
    start = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return bounds, start, np.concatenate(radii), np.concatenate(angles)


def _envelope(r_u: np.ndarray, inner: float, R: float) -> np.ndarray:
    """Largest angular gap at which ``u`` can reach any point with radius
    at least ``inner``; a slight overestimate is harmless."""
    s = np.sinh(r_u) * math.sinh(inner)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (np.cosh(r_u) * math.cosh(inner) - math.cosh(R)) / s
    f = np.where(s > 0, f, -1.0)
    th = np.arccos(np.clip(f, -1.0, 1.0))
    return np.where(th > math.pi - 1e-6, math.pi, th + 1e-9 * (1.0 + th))


def _ranges_to_pairs(us, lo, hi):
    cnt = hi - lo
    tot = int(cnt.sum())
    if tot == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    pi = np.repeat(np.arange(len(us)), cnt)
    base = np.concatenate([[0], np.cumsum(cnt)[:-1]])
    v = lo[pi] + np.arange(tot, dtype=np.int64) - base[pi]
    return us[pi], v


def _band_candidates(u_ids, pts, band_lo, band_hi, inner, R):
    """Candidate ``(u, v)`` with ``v`` in band ``[band_lo, band_hi)``
    inside the angular envelope of each ``u``."""
    if band_hi == band_lo or len(u_ids) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    ang = pts.angle[band_lo:band_hi]
    tu = pts.angle[u_ids]
    env = _envelope(pts.radius[u_ids], inner, R)
    full = env >= math.pi
    us, vs = [], []
    if np.any(full):
        uf = u_ids[full]
        lo = np.full(len(uf), band_lo, dtype=np.int64)
        hi = np.full(len(uf), band_hi, dtype=np.int64)
        a, b = _ranges_to_pairs(uf, lo, hi)
        us.append(a)
        vs.append(b)
    part = ~full
    if np.any(part):
        up, t, e = u_ids[part], tu[part], env[part]
        two_pi = 2.0 * math.pi
        left, right = t - e, t + e
        # Main window clipped to [0, 2pi), plus wrapped remainders.
        wins = [(np.maximum(left, 0.0), np.minimum(right, two_pi)),
                (np.where(left < 0, left + two_pi, two_pi), np.where(left < 0, two_pi, two_pi)),
                (np.zeros_like(right), np.where(right > two_pi, right - two_pi, 0.0))]
        for wl, wr in wins:
            lo = band_lo + np.searchsorted(ang, wl, side="left")
            hi = band_lo + np.searchsorted(ang, wr, side="right")
            hi = np.maximum(hi, lo)
            a, b = _ranges_to_pairs(up, lo, hi)
            us.append(a)
            vs.append(b)
    return np.concatenate(us), np.concatenate(vs)


def rhg_job(params: RhgParams, r: RngStream):
    state = {}

    def layout():
        if "l" not in state:
            bounds, start, rad, ang = rhg_points(params, r)
            state["l"] = (bounds, start, _HypPoints(rad, ang))
        return state["l"]

    chunks = chunk_count(params.n * 8.0, limit=max(params.n, 1))
    node_bounds = equal_bounds(params.n, chunks)
    cosh_R = math.cosh(params.R)

    def chunk(k):
        bounds, start, pts = layout()
        B = len(bounds) - 1
        lo_id, hi_id = node_bounds[k], node_bounds[k + 1]
        out = []
        for i in range(B):
            a, b = max(lo_id, start[i]), min(hi_id, start[i + 1])
            if a >= b:
                continue
            u_ids = np.arange(a, b, dtype=np.int64)
            for j in range(i, B):
                us, vs = _band_candidates(u_ids, pts, int(start[j]), int(start[j + 1]),
                                          float(bounds[j]), params.R)
                if j == i:
                    keep = vs > us
                    us, vs = us[keep], vs[keep]
                if len(us) == 0:
                    continue
                ok = pts.cosh_dist(us, vs) <= cosh_R
                out.append(np.stack([us[ok], vs[ok]], axis=1))
        if not out:
            return EMPTY
        e = np.unique(np.concatenate(out), axis=0)
        return e

    return ChunkedJob(chunks, chunk), layout


def rhg_threshold(params: RhgParams, r: RngStream, partition: Optional[tuple] = None,
                  threads: int = 1):
    """Threshold hyperbolic random graph: points on a disk of radius ``R``
    with radial density ``alpha sinh(alpha r) / (cosh(alpha R) - 1)``,
    uniform angles, edges at distance ``<= R``.

    Returns ``(Graph, PointSet)`` with (radius, angle) coordinates.
    """
    job, layout = rhg_job(params, r)
    edges, _ = job.collect(partition, threads)
    _, _, pts = layout()
    return Graph(params.n, edges), PointSet(np.stack([pts.radius, pts.angle], axis=1), "hyperbolic")


def rhg_oracle(radius, angle, R: float) -> np.ndarray:
    """All-pairs ``d <= R`` test with the generator's arithmetic."""
    pts = _HypPoints(np.asarray(radius, dtype=np.float64), np.asarray(angle, dtype=np.float64))
    iu, ju = np.triu_indices(len(pts.radius), k=1)
    ok = pts.cosh_dist(iu, ju) <= math.cosh(R)
    return np.stack([iu[ok], ju[ok]], axis=1).astype(np.int64)


def rhg_edges(radius, angle, R: float) -> np.ndarray:
    """Band-partitioned threshold edges of a fixed point set (ids as given)."""
    radius = np.asarray(radius, dtype=np.float64)
    angle = np.asarray(angle, dtype=np.float64)
    n = len(radius)
    bounds = band_bounds(n, R)
    band = np.clip(np.searchsorted(bounds, radius, side="right") - 1, 0, len(bounds) - 2)
    order = np.lexsort((angle, band))
    pts = _HypPoints(radius[order], angle[order])
    counts = np.bincount(band, minlength=len(bounds) - 1)
    start = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    out = []
    cosh_R = math.cosh(R)
    for i in range(len(bounds) - 1):
        u_ids = np.arange(start[i], start[i + 1], dtype=np.int64)
        for j in range(i, len(bounds) - 1):
            us, vs = _band_candidates(u_ids, pts, int(start[j]), int(start[j + 1]), float(bounds[j]), R)
            if j == i:
                keep = vs > us
                us, vs = us[keep], vs[keep]
            ok = pts.cosh_dist(us, vs) <= cosh_R
            out.append(np.stack([us[ok], vs[ok]], axis=1))
    e = np.concatenate(out) if out else EMPTY
    e = np.sort(order[e], axis=1) if len(e) else EMPTY
    return np.unique(e, axis=0) if len(e) else EMPTY


def empirical_average_degree(params: RhgParams, r: RngStream, runs: int = 1) -> float:
    """Mean degree over ``runs`` samples, for calibrating ``R`` by hand."""
    tot = 0.0
    for i in range(runs):
        g, _ = rhg_threshold(params, r.child("calibrate", i))
        tot += 2.0 * g.m / max(params.n, 1)
    return tot / runs
