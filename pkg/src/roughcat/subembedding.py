"""Rough subembeddings of ordered tuples into the plane.

An ordered tuple ``(x_1, ..., x_n)`` with distance table ``d`` has a
``C``-rough subembedding ``(o_1, ..., o_n)`` in the plane when

* consecutive distances are matched exactly, cyclically
  (``|o_i - o_{i-1}| = d(x_i, x_{i-1})`` with ``o_0 = o_n``),
* distances from the first point are not shrunk
  (``d(x_1, x_i) <= |o_1 - o_i|``), and
* all other distances shrink by at most ``C``
  (``d(x_i, x_j) <= |o_i - o_j| + C`` for ``i, j >= 2``).

Configurations are parameterized as a fan of triangles around ``o_1``: the
radii ``r_i = |o_1 - o_i|`` (``r_2`` and ``r_n`` are forced by the chain)
plus one fold sign per fan triangle.  Chain equalities then hold by
construction and the search runs over the free radii only.

Positions inside a tuple are 0-based throughout: position 0 is ``x_1``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import (
    ChainMismatch,
    FanTriangleInfeasible,
    RoughCatError,
    TooLarge,
    TooManyOrderings,
)
from .metric_core import FiniteMetric, tuple_distances, validate_metric
from .plane_geometry import canonical_pose
from .polygon_gluing import _embed

TOL = 1e-9
RESTARTS = 16
XATOL = 1e-9
FATOL = 1e-8
# a search stops once a configuration with this little violation is found
STOP_BELOW = 1e-12


@dataclass(frozen=True, eq=False)
class ChainConfig:
    """Planar points for an ordered tuple, with the fan data that produced them.

    ``radii`` are ``|o_1 - o_i|`` for positions ``1..n-1``; ``folds`` has one
    sign per fan triangle of the (collapsed) chain: the first is the
    orientation of the first triangle (+1 counterclockwise), each later one
    is -1 when the fan keeps turning the same way and +1 when it folds back
    across the shared diagonal.
    """

    points: np.ndarray
    radii: np.ndarray
    folds: tuple


@dataclass(frozen=True, eq=False)
class SubembeddingCertificate:
    config: ChainConfig
    C: float  # tested constant
    achieved: float  # smallest C this configuration certifies
    cond1: np.ndarray  # chain residuals |o_i - o_{i-1}| - d(x_i, x_{i-1}), i = 0..n-1
    cond2: np.ndarray  # |o_1 - o_i| - d(x_1, x_i), i = 1..n-1
    cond3: list  # (i, j, |o_i - o_j| + C - d(x_i, x_j)) for 1 <= i < j
    ordering: tuple
    tol: float = TOL

    @property
    def passed(self) -> bool:
        worst3 = min((s for _, _, s in self.cond3), default=0.0)
        return bool(self.cond2.min(initial=0.0) >= -self.tol and worst3 >= -self.tol)

    def to_json(self) -> dict:
        return {
            "ordering": list(self.ordering),
            "C": float(self.achieved),
            "points": self.config.points.tolist(),
            "slacks": {
                "cond2": [float(s) for s in self.cond2],
                "cond3": [[int(i), int(j), float(s)] for i, j, s in self.cond3],
            },
        }


def _as_table(table) -> np.ndarray:
    t = np.asarray(getattr(table, "table", table), dtype=float)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise ValueError(f"expected a square distance table, got shape {t.shape}")
    return t


def _apex(r_prev, r_next, chain):
    """Apex coordinates of fan triangles (0, o_k, o_{k+1}) in the frame of o_k.

    Returns ``(along, across)``: the component along ``o_k`` and the height.
    The height uses Kahan's stable area formula so near-degenerate
    triangles keep their chain lengths to rounding accuracy.
    """
    s = np.sort(np.stack([r_prev, r_next, chain]), axis=0)[::-1]
    x, y, z = s
    prod = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z))
    area2 = 0.5 * np.sqrt(np.clip(prod, 0.0, None))  # twice the area
    safe = np.where(r_prev > 0, r_prev, 1.0)
    along = np.where(r_prev > 0, (r_prev ** 2 + r_next ** 2 - chain ** 2) / (2.0 * safe), r_next)
    across = np.where(r_prev > 0, area2 / safe, 0.0)
    return along, across


def rotation_signs(folds) -> np.ndarray:
    """Absolute turning direction of each fan triangle from the fold signs."""
    folds = np.atleast_2d(np.asarray(folds, dtype=float))
    rho = np.empty_like(folds)
    rho[:, 0] = folds[:, 0]
    for k in range(1, folds.shape[1]):
        rho[:, k] = -rho[:, k - 1] * folds[:, k]
    return rho


def fan_points(radii: np.ndarray, chain: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Vectorised fan realization.

    ``radii`` is ``(K, m-1)`` (radii of positions 1..m-1), ``chain`` the
    ``m-2`` lengths between consecutive positions 1..m-1, ``rho`` the
    ``(K, m-2)`` (or broadcastable) turning directions.  Returns ``(K, m, 2)``.
    """
    K, m1 = radii.shape
    pts = np.zeros((K, m1 + 1, 2))
    pts[:, 1, 0] = radii[:, 0]
    e = np.zeros((K, 2))
    e[:, 0] = 1.0
    rho = np.broadcast_to(rho, (K, m1 - 1))
    for k in range(m1 - 1):
        r0, r1 = radii[:, k], radii[:, k + 1]
        along, across = _apex(r0, r1, np.full(K, chain[k]))
        perp = np.stack([-e[:, 1], e[:, 0]], axis=1)
        p = along[:, None] * e + (rho[:, k] * across)[:, None] * perp
        pts[:, k + 2] = p
        norm = np.hypot(p[:, 0], p[:, 1])
        # a point at the origin carries no direction; keep the previous one
        e = np.where(norm[:, None] > 0, p / np.where(norm > 0, norm, 1.0)[:, None], e)
    return pts


class _Fan:
    """Search problem for one collapsed, normalized tuple of length m >= 4."""

    def __init__(self, T: np.ndarray):
        self.T = T
        m = self.m = T.shape[0]
        self.a = T[0, 1:].copy()  # lower bounds on radii of positions 1..m-1
        self.chain = np.array([T[k, k + 1] for k in range(1, m - 1)])
        # backward-feasible radius intervals for positions 1..m-1
        lo = np.empty(m - 1)
        hi = np.empty(m - 1)
        lo[-1] = hi[-1] = self.a[-1]
        for k in range(m - 3, -1, -1):
            lo[k] = max(self.a[k], lo[k + 1] - self.chain[k])
            hi[k] = hi[k + 1] + self.chain[k]
        self.lo, self.hi = lo.tolist(), hi.tolist()
        self.chain_list = self.chain.tolist()
        self.dim = m - 3
        pairs = [(i, j) for i in range(1, m) for j in range(i + 2, m)]
        self.pi = np.array([p[0] for p in pairs])
        self.pj = np.array([p[1] for p in pairs])
        self.dij = T[self.pi, self.pj]
        self.pi_list, self.pj_list = self.pi.tolist(), self.pj.tolist()
        self.dij_list = self.dij.tolist()

    def radii(self, U: np.ndarray) -> np.ndarray:
        """Map points of the unit cube ``(K, m-3)`` to feasible radii ``(K, m-1)``."""
        U = np.atleast_2d(U)
        K = U.shape[0]
        R = np.empty((K, self.m - 1))
        R[:, 0] = self.a[0]
        R[:, -1] = self.a[-1]
        for k in range(1, self.m - 2):
            c = self.chain[k - 1]
            L = np.maximum(self.lo[k], R[:, k - 1] - c)
            H = np.minimum(self.hi[k], R[:, k - 1] + c)
            H = np.maximum(H, L)
            R[:, k] = L + np.clip(U[:, k - 1], 0.0, 1.0) * (H - L)
        return R

    def objective(self, U: np.ndarray, rho: np.ndarray) -> np.ndarray:
        """Largest shrink over non-adjacent pairs of positions 1..m-1 (may be < 0)."""
        P = fan_points(self.radii(U), self.chain, rho)
        diff = P[:, self.pi] - P[:, self.pj]
        return (self.dij - np.hypot(diff[..., 0], diff[..., 1])).max(axis=1)

    def encode(self, P):
        """Unit-cube coordinates and fold signs reproducing a chain configuration ``P``."""
        P = canonical_pose(P)
        r = np.hypot(P[1:, 0], P[1:, 1]).tolist()
        u, prev = [], float(self.a[0])
        for k in range(1, self.m - 2):
            c = self.chain_list[k - 1]
            L = max(self.lo[k], prev - c)
            H = max(min(self.hi[k], prev + c), L)
            t = 0.0 if H <= L else min(max((r[k] - L) / (H - L), 0.0), 1.0)
            u.append(t)
            prev = L + t * (H - L)
        rho = [float(np.sign(P[k + 1, 0] * P[k + 2, 1] - P[k + 1, 1] * P[k + 2, 0])) or 1.0
               for k in range(self.m - 2)]
        if rho[0] < 0:
            rho = [-v for v in rho]
        folds = (1,) + tuple(int(-a * b) for a, b in zip(rho[:-1], rho[1:]))
        return np.array(u), folds, rho

    def scalar(self, u, rho) -> float:
        """Same as :meth:`objective` for one point; plain floats for the simplex loop."""
        xs, ys = self.place(u, rho)
        worst = -math.inf
        for i, j, dij in zip(self.pi_list, self.pj_list, self.dij_list):
            v = dij - math.hypot(xs[i] - xs[j], ys[i] - ys[j])
            if v > worst:
                worst = v
        return worst

    def place(self, u, rho):
        """Coordinate lists ``(xs, ys)`` of the fan for one parameter vector."""
        m, chain, lo, hi = self.m, self.chain_list, self.lo, self.hi
        r = [float(self.a[0])]
        for k in range(1, m - 2):
            c = chain[k - 1]
            L = max(lo[k], r[-1] - c)
            H = max(min(hi[k], r[-1] + c), L)
            t = min(max(u[k - 1], 0.0), 1.0)
            r.append(L + t * (H - L))
        r.append(float(self.a[-1]))
        xs, ys = [0.0, r[0]], [0.0, 0.0]
        ex, ey = 1.0, 0.0
        for k in range(m - 2):
            r0, r1, c = r[k], r[k + 1], chain[k]
            if r0 > 0.0:
                x, y, z = sorted((r0, r1, c), reverse=True)
                prod = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z))
                across = 0.5 * math.sqrt(prod) / r0 if prod > 0.0 else 0.0
                along = (r0 * r0 + r1 * r1 - c * c) / (2.0 * r0)
            else:
                along, across = r1, 0.0
            s = rho[k] * across
            px, py = along * ex - s * ey, along * ey + s * ex
            xs.append(px)
            ys.append(py)
            nrm = math.hypot(px, py)
            if nrm > 0.0:
                ex, ey = px / nrm, py / nrm
        return xs, ys


def _collapse(T: np.ndarray, eps: float = 1e-14):
    """Positions kept after merging zero-length chain sides, and each position's representative."""
    n = T.shape[0]
    keep = [0]
    rep = [0] * n
    for p in range(1, n):
        if T[p, keep[-1]] <= eps:
            rep[p] = keep[-1]
        else:
            keep.append(p)
            rep[p] = p
    while len(keep) > 1 and T[keep[-1], 0] <= eps:
        gone = keep.pop()
        rep = [0 if r == gone else r for r in rep]
    return keep, rep


def _normalize(T: np.ndarray):
    scale = float(T.max(initial=0.0))
    if scale <= 0.0:
        return T * 0.0, 0.0
    # rounding makes the search see identical inputs for rescaled tuples
    return np.round(T / scale, 14), scale


def fold_patterns(m: int):
    """Fold sign patterns for a fan of m points, first sign fixed to +1."""
    for tail in itertools.product((1, -1), repeat=max(m - 3, 0)):
        yield (1,) + tail


def realize_chain(table, diagonals, folds, tol: float = TOL) -> ChainConfig:
    """Planar points for a tuple from its free fan radii and fold signs.

    ``diagonals`` are ``r_3 .. r_{n-1}`` (the radii of positions 2..n-2),
    ``folds`` the ``n-2`` fold signs.  Every fan triangle must satisfy the
    triangle inequality.
    """
    T = _as_table(table)
    n = T.shape[0]
    diagonals = np.asarray(diagonals, dtype=float).reshape(-1)
    folds = tuple(int(np.sign(f)) or 1 for f in folds)
    if n < 3:
        pts = np.zeros((n, 2))
        if n == 2:
            pts[1, 0] = T[0, 1]
        return ChainConfig(pts, T[0, 1:].copy(), ())
    if len(diagonals) != n - 3:
        raise ValueError(f"expected {n - 3} diagonals, got {len(diagonals)}")
    if len(folds) != n - 2:
        raise ValueError(f"expected {n - 2} fold signs, got {len(folds)}")
    radii = np.concatenate([[T[0, 1]], diagonals, [T[0, n - 1]]])
    chain = np.array([T[k, k + 1] for k in range(1, n - 1)])
    scale = max(1.0, float(T.max()))
    for k in range(n - 2):
        a, b, c = radii[k], radii[k + 1], chain[k]
        if a < -tol or b < -tol or max(a, b, c) > (a + b + c - max(a, b, c)) + tol * scale:
            raise FanTriangleInfeasible(k + 1, f"sides ({a:.6g}, {b:.6g}, {c:.6g})")
    pts = fan_points(radii[None, :], chain, rotation_signs(folds))[0]
    return ChainConfig(pts, radii, folds)


def subembedding_slack(table, config: ChainConfig, C: float, tol: float = TOL,
                       ordering=None) -> SubembeddingCertificate:
    """Signed slack of every defining inequality for a configuration and constant C."""
    T = _as_table(table)
    P = np.asarray(config.points, dtype=float)
    n = T.shape[0]
    if P.shape != (n, 2):
        raise ChainMismatch(f"{P.shape[0]} points for a {n}-tuple")
    D = np.hypot(*(P[:, None, :] - P[None, :, :]).transpose(2, 0, 1))
    idx = np.arange(n)
    cond1 = D[idx, idx - 1] - T[idx, idx - 1]
    scale = max(1.0, float(T.max(initial=0.0)))
    if n > 1 and np.abs(cond1).max() > tol * scale:
        k = int(np.abs(cond1).argmax())
        raise ChainMismatch(f"chain side {k - 1}->{k} has length {D[k, k - 1]}, expected {T[k, k - 1]}")
    cond2 = D[0, 1:] - T[0, 1:]
    cond3 = [(i, j, float(D[i, j] + C - T[i, j])) for i in range(1, n) for j in range(i + 1, n)]
    # chain neighbours are equal by condition 1; only rounding would show there
    shrink = [T[i, j] - D[i, j] for i in range(1, n) for j in range(i + 2, n)]
    achieved = max(0.0, max(shrink, default=0.0))
    order = tuple(range(n)) if ordering is None else tuple(ordering)
    return SubembeddingCertificate(config, float(C), float(achieved), cond1, cond2,
                                   cond3, order, tol)


@dataclass(frozen=True, eq=False)
class SearchResult:
    C: float
    certificate: SubembeddingCertificate
    value: float  # signed largest shrink over non-adjacent pairs at the optimum
    evaluations: int = 0


def _stop_at_zero(intermediate_result):
    # ends the simplex loop once C = 0 is certified
    if intermediate_result.fun <= STOP_BELOW:
        raise StopIteration


def _local_search(fan: _Fan, rho, u0, maxfev, early: bool = False):
    k = fan.dim
    step = 0.25
    simplex = np.vstack([u0] + [np.clip(u0 + step * np.eye(k)[i] * (1 if u0[i] < 0.5 else -1), 0, 1)
                                for i in range(k)])
    rho_list = [float(v) for v in np.ravel(rho)]
    res = minimize(lambda u: fan.scalar(u, rho_list), u0,
                   method="Nelder-Mead", bounds=[(0.0, 1.0)] * k,
                   callback=_stop_at_zero if early else None,
                   options=dict(xatol=XATOL, fatol=FATOL, maxfev=maxfev,
                                initial_simplex=simplex))
    u = np.clip(res.x, 0.0, 1.0)
    return float(fan.objective(u[None, :], rho)[0]), u, res.nfev


@functools.lru_cache(maxsize=None)
def _patterns(m: int):
    patterns = list(fold_patterns(m))
    return patterns, [rotation_signs(f) for f in patterns]


def _search(fan: _Fan, restarts: int, seed: int, grid_budget: int, exhaustive: bool):
    """Best (value, u, folds) over fold patterns and starts; deterministic."""
    k = fan.dim
    patterns, rhos = _patterns(fan.m)
    best = None
    nfev = 0

    def radii_key(u):
        return tuple(np.round(fan.radii(u[None, :])[0], 12))

    def consider(val, u, f):
        # radii only enter the key to break exact ties, so compute them lazily
        nonlocal best
        rv = round(val, 15)
        if best is not None:
            if rv > best[0][0]:
                return
            if rv == best[0][0]:
                if best[0][1] is None:
                    best = ((rv, radii_key(best[2])),) + best[1:]
                rk = radii_key(u)
                if rk >= best[0][1]:
                    return
                best = ((rv, rk), val, u.copy(), f)
                return
        best = ((rv, None), val, u.copy(), f)

    def done():
        return not exhaustive and best is not None and best[1] <= STOP_BELOW

    # tight fan under every fold pattern
    u0 = np.zeros(k)
    tight = []
    for f, rho in zip(patterns, rhos):
        val = fan.scalar(u0, [float(v) for v in rho.ravel()])
        tight.append((val, f, rho))
        consider(val, u0, f)
        nfev += 1
        if done():
            return best, nfev

    # the convex polygon construction; certifies C = 0 for tuples from CAT(0) spaces
    try:
        u, f, rho = fan.encode(_embed(fan.T))
    except RoughCatError:
        pass
    else:
        consider(fan.scalar(u, rho), u, f)
        nfev += 1
        if done():
            return best, nfev

    # small grid over all patterns in one vectorised call
    g = max(3, int(round(81 ** (1.0 / k))))
    G = np.array(list(itertools.product(np.linspace(0.0, 1.0, g), repeat=k)))
    U = np.tile(G, (len(patterns), 1))
    vals = fan.objective(U, np.repeat(np.vstack(rhos), len(G), axis=0))
    i = int(vals.argmin())
    consider(float(vals[i]), U[i], patterns[i // len(G)])
    nfev += len(U)
    if done():
        return best, nfev

    # cheap descent from the tight fan, most promising pattern first
    maxfev = 400 * k
    for _, f, rho in sorted(tight, key=lambda s: s[0]):
        val, u1, ev = _local_search(fan, rho, u0, maxfev, not exhaustive)
        nfev += ev
        consider(val, u1, f)
        if done():
            return best, nfev

    # coarse grid screen, all patterns
    g = max(3, int(round(grid_budget ** (1.0 / k))))
    axis = np.linspace(0.0, 1.0, g)
    G = np.array(list(itertools.product(axis, repeat=k)))
    seeds = []
    for f, rho in zip(patterns, rhos):
        vals = fan.objective(G, rho)
        i = int(vals.argmin())
        seeds.append((float(vals[i]), G[i], f, rho))
        consider(float(vals[i]), G[i], f)
        nfev += len(G)
    if done():
        return best, nfev

    seeds.sort(key=lambda s: s[0])
    for _, u, f, rho in seeds:
        val, u1, ev = _local_search(fan, rho, u, maxfev, not exhaustive)
        nfev += ev
        consider(val, u1, f)
        if done():
            return best, nfev
    rng = np.random.default_rng(seed)
    for f, rho in zip(patterns, rhos):
        for start in [rng.random(k) for _ in range(restarts)]:
            val, u1, ev = _local_search(fan, rho, start, maxfev, not exhaustive)
            nfev += ev
            consider(val, u1, f)
            if done():
                return best, nfev
    return best, nfev


def minimal_defect_ordered(table, restarts: int = RESTARTS, seed: int = 0,
                           grid_budget: int = 2048, exhaustive: bool = False,
                           tol: float = TOL, validate: bool = True) -> SearchResult:
    """Smallest C for which the ordered tuple has a C-rough subembedding.

    Multi-start search: tight fan under every fold pattern, the convex
    polygon construction, a small grid, simplex descent from the tight fan,
    a finer grid screen, descent from the grid seeds, then ``restarts``
    random starts per fold pattern.  Unless ``exhaustive``, the search
    stops as soon as a configuration certifies C = 0.  Otherwise the
    reversed chain (a mirror image) is searched as well and the better
    optimum kept, so the constant does not depend on the chain direction.
    Ties are broken by the larger minimum slack, then lexicographically
    smaller radii.
    """
    T = _as_table(table)
    n = T.shape[0]
    if n < 3:
        raise ValueError("need at least 3 points")
    if n > 8:
        raise TooLarge(f"n={n} > 8")
    if validate:
        validate_metric(T, tol=1e-9)
    ordering = tuple(getattr(table, "indices", range(n)))
    Tn, scale = _normalize(T)
    keep, rep = _collapse(Tn)
    m = len(keep)
    Tk = Tn[keep, :][:, keep]

    nfev = 0
    if m <= 3:
        cfg = realize_chain(Tk, [], [1] * max(m - 2, 0)) if m >= 3 else realize_chain(Tk, [], [])
        value = -math.inf
        folds = cfg.folds
        pts = cfg.points
    else:
        fan = _Fan(Tk)
        best, nfev = _search(fan, restarts, seed, grid_budget, exhaustive)
        if best[1] > STOP_BELOW:
            # reversing positions 1..m-1 is a reflection; search that chain too and map its optimum back
            rev = [0] + list(range(m - 1, 0, -1))
            rfan = _Fan(Tk[rev, :][:, rev])
            rbest, rn = _search(rfan, restarts, seed, grid_budget, exhaustive)
            nfev += rn
            rx, ry = rfan.place(rbest[2], [float(v) for v in rotation_signs(rbest[3]).ravel()])
            u, f, rho = fan.encode(np.column_stack([rx, ry])[rev])
            val = fan.scalar(u, rho)
            if val < best[1]:
                best = (None, val, u, f)
        _, value, u, folds = best
        xs, ys = fan.place(u, [float(v) for v in rotation_signs(folds).ravel()])
        pts = np.column_stack([xs, ys])

    full = pts[[keep.index(r) for r in rep]] * scale
    radii_full = np.hypot(full[1:, 0], full[1:, 1])
    cfg = ChainConfig(full, radii_full, tuple(folds))
    F, Tl = full.tolist(), T.tolist()
    C = max(0.0, max((Tl[i][j] - math.hypot(F[i][0] - F[j][0], F[i][1] - F[j][1])
                      for i in range(1, n) for j in range(i + 2, n)), default=0.0))
    cert = subembedding_slack(T, cfg, C, tol=tol, ordering=ordering)
    return SearchResult(C, cert, value * scale if math.isfinite(value) else value, nfev)


@dataclass(frozen=True, eq=False)
class SetDefect:
    C: float
    worst_ordering: tuple
    results: dict = field(repr=False)  # ordering -> SearchResult


def orderings(indices, n: int | None = None):
    """Ordered n-tuples of distinct points, one per chain reversal class.

    Reversing positions ``2..n`` (keeping the first point) is a reflection
    of the plane and leaves the minimal constant unchanged, so only the
    representative with ``tuple[1] < tuple[-1]`` is produced.
    """
    idx = list(indices)
    n = len(idx) if n is None else n
    for perm in itertools.permutations(idx, n):
        if n < 3 or idx.index(perm[1]) < idx.index(perm[-1]):
            yield perm


def minimal_defect_set(m: FiniteMetric, indices, n: int | None = None,
                       sample: int | None = None, seed: int = 0, **search) -> SetDefect:
    """Worst minimal constant over all orderings of n points drawn from ``indices``."""
    idx = [m.index(i) for i in indices]
    n = len(idx) if n is None else n
    if n > 6 and sample is None:
        raise TooManyOrderings(f"n={n} needs a sample size")
    all_orders = list(orderings(idx, n))
    if sample is not None and sample < len(all_orders):
        rng = np.random.default_rng(seed)
        pick = sorted(rng.choice(len(all_orders), size=sample, replace=False))
        all_orders = [all_orders[i] for i in pick]
    results = {}
    worst, worst_C = None, -1.0
    for order in all_orders:
        if len(set(order)) < 3:
            continue
        res = minimal_defect_ordered(tuple_distances(m, order), seed=seed, validate=False, **search)
        results[order] = res
        if res.C > worst_C:
            worst, worst_C = order, res.C
    if worst is None:
        worst, worst_C = tuple(all_orders[0]) if all_orders else (), 0.0
    return SetDefect(float(max(worst_C, 0.0)), tuple(worst), results)


# independent oracle

@dataclass(frozen=True, eq=False)
class OracleResult:
    C: float
    radii: np.ndarray  # radii of positions 1..n-1
    sides: tuple  # absolute orientation of each fan triangle
    grid_error: float


def _oracle_place(T, R, sides):
    """Place points by intersecting circles about the origin and the previous point."""
    K, n1 = R.shape
    pts = np.zeros((K, n1 + 1, 2))
    pts[:, 1, 0] = R[:, 0]
    for k in range(1, n1):
        p = pts[:, k]
        r = R[:, k]
        c = T[k, k + 1]
        dd = np.hypot(p[:, 0], p[:, 1])
        # intersection of |z| = r and |z - p| = c
        with np.errstate(invalid="ignore", divide="ignore"):
            a = (dd ** 2 + r ** 2 - c ** 2) / (2 * dd)
            hgt = np.sqrt(np.clip(r ** 2 - a ** 2, 0.0, None))
            ux, uy = p[:, 0] / dd, p[:, 1] / dd
        degenerate = dd == 0
        ux = np.where(degenerate, 1.0, ux)
        uy = np.where(degenerate, 0.0, uy)
        a = np.where(degenerate, r, a)
        hgt = np.where(degenerate, 0.0, hgt)
        sgn = sides[k - 1]
        pts[:, k + 1, 0] = a * ux - sgn * hgt * uy
        pts[:, k + 1, 1] = a * uy + sgn * hgt * ux
    return pts


def _oracle_value(T, R, sides):
    n = T.shape[0]
    P = _oracle_place(T, R, sides)
    vals = np.full(R.shape[0], -np.inf)
    for i in range(1, n):
        for j in range(i + 2, n):
            dij = np.hypot(*(P[:, i] - P[:, j]).T)
            vals = np.maximum(vals, T[i, j] - dij)
    return vals


def brute_force_oracle(table, grid: int = 201, refine: int = 8, keep: int = 4,
                       zoom_grid: int = 21) -> OracleResult:
    """Grid minimum of the subembedding constant for n <= 5.

    Free radii range over ``[d(x_1, x_i), reach_i]`` on a regular grid,
    points violating the fan triangle inequalities are dropped, and every
    orientation pattern of the fan triangles is tried.  The best ``keep``
    cells are then zoomed ``refine`` times on a ``zoom_grid`` lattice.  ``grid_error`` is the largest
    change of the objective between the final best point and its grid
    neighbours.
    """
    T = _as_table(table)
    n = T.shape[0]
    if n > 5:
        raise TooLarge(f"oracle limited to n <= 5, got {n}")
    if n <= 3:
        return OracleResult(0.0, T[0, 1:].copy(), (1,) * max(n - 2, 0), 0.0)
    r_first, r_last = T[0, 1], T[0, n - 1]
    free = list(range(2, n - 1))
    box = []
    for p in free:
        reach_front = r_first + sum(T[q, q + 1] for q in range(1, p))
        reach_back = r_last + sum(T[q, q + 1] for q in range(p, n - 1))
        box.append((T[0, p], max(T[0, p], min(reach_front, reach_back))))
    scale = max(1.0, float(T.max()))
    slack = 1e-12 * scale

    def feasible(R):
        ok = np.ones(R.shape[0], bool)
        for k in range(n - 2):
            ok &= np.abs(R[:, k] - R[:, k + 1]) <= T[k + 1, k + 2] + slack
        return ok

    def full_radii(X):
        R = np.empty((X.shape[0], n - 1))
        R[:, 0], R[:, -1] = r_first, r_last
        R[:, 1:-1] = X
        return R

    patterns = list(itertools.product((1, -1), repeat=n - 2))
    best = (math.inf, None, None)
    err = 0.0
    for sides in patterns:
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
        cells = [(lo, hi)]
        level_best = None
        for level in range(refine + 1):
            cand = []
            g = grid if level == 0 else zoom_grid
            for clo, chi in cells:
                axes = [np.linspace(a, b, g) for a, b in zip(clo, chi)]
                X = np.array(list(itertools.product(*axes)))
                R = full_radii(X)
                ok = feasible(R)
                if not ok.any():
                    continue
                vals = np.where(ok, _oracle_value(T, R, sides), np.inf)
                order = np.argsort(vals, kind="stable")[:keep]
                step = (chi - clo) / (g - 1)
                for i in order:
                    if np.isfinite(vals[i]):
                        cand.append((float(vals[i]), X[i], step, axes, vals, ok))
            if not cand:
                break
            cand.sort(key=lambda c: c[0])
            level_best = cand[0]
            cells = [(np.maximum(x - 2 * st, lo), np.minimum(x + 2 * st, hi))
                     for _, x, st, *_ in cand[:keep]]
        if level_best is None:
            continue
        val, x, step, axes, vals, ok = level_best
        if val < best[0]:
            # local variation around the best point on its final grid
            nb = []
            for delta in itertools.product((-1, 0, 1), repeat=len(x)):
                if not any(delta):
                    continue
                y = np.clip(x + np.array(delta) * step, lo, hi)
                Ry = full_radii(y[None, :])
                if feasible(Ry)[0]:
                    nb.append(abs(float(_oracle_value(T, Ry, sides)[0]) - val))
            err = max(nb, default=0.0)
            best = (val, full_radii(x[None, :])[0], sides)
    val, R, sides = best
    return OracleResult(max(0.0, val), R, sides, err)
