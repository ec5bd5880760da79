"""Euclidean-plane primitives used by the comparison-geometry checks.

Conventions: points are length-2 numpy arrays; every constructed planar
configuration is put in canonical pose (first point at the origin, second on
the nonnegative x-axis, third with nonnegative y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    HypothesisViolated,
    LengthsShorterThanSide,
    NotHShort,
    RatioOutOfRange,
    TriangleInequalityViolation,
    ZeroBaseSegment,
)

GEOM_TOL = 1e-9


def point(x, y=None) -> np.ndarray:
    if y is None:
        x, y = x
    return np.array([float(x), float(y)])


def dist(p, q) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def cross(o, a, b) -> float:
    """z-component of (a - o) x (b - o); positive for a left turn."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def third_vertex(d_base: float, d_from_first: float, d_from_second: float) -> np.ndarray:
    """Apex of a triangle on the base (0,0)-(d_base,0), in the upper half plane.

    Lengths are assumed to satisfy the triangle inequality up to rounding;
    the height is clamped at zero.
    """
    if d_base == 0.0:
        return np.array([d_from_first, 0.0])
    # difference of squares and Kahan's area formula keep short bases accurate
    x = 0.5 * (d_base + (d_from_first - d_from_second) * (d_from_first + d_from_second) / d_base)
    p, q, r = sorted((d_base, d_from_first, d_from_second), reverse=True)
    factors = (p + (q + r), r - (p - q), r + (p - q), p + (q - r))
    # the two small factors are divided by sqrt(d_base) before multiplying, so tiny sides do not underflow
    y = 0.0
    if min(factors) > 0.0:
        sb = math.sqrt(d_base)
        big = math.sqrt(factors[0]) * math.sqrt(factors[3])
        y = 0.5 * big * (math.sqrt(factors[1]) / sb) * (math.sqrt(factors[2]) / sb)
    if abs(x) >= y:
        # apex near the base line: the height is the well-conditioned coordinate
        y = min(y, d_from_first)
        x = math.copysign(math.sqrt((d_from_first - y) * (d_from_first + y)), x)
    return np.array([x, y])


def check_triangle_inequality(a: float, b: float, c: float, tol: float = GEOM_TOL):
    scale = max(1.0, a, b, c)
    for name, v in (("a", a), ("b", b), ("c", c)):
        if not math.isfinite(v) or v < -tol * scale:
            raise TriangleInequalityViolation(f"side {name}={v!r} must be finite and nonnegative")
    if a > b + c + tol * scale or b > a + c + tol * scale or c > a + b + tol * scale:
        raise TriangleInequalityViolation(f"lengths ({a}, {b}, {c}) violate the triangle inequality")


@dataclass(frozen=True, eq=False)
class ComparisonTriangle:
    """Euclidean triangle with prescribed side lengths, in canonical pose.

    ``vertices[0]`` is at the origin, ``vertices[1]`` on the +x axis and
    ``vertices[2]`` has y >= 0.  ``sides`` holds ``(d12, d13, d23)``.
    """

    vertices: np.ndarray
    sides: tuple

    def side_length(self, i: int, j: int) -> float:
        key = tuple(sorted((i, j)))
        return {(0, 1): self.sides[0], (0, 2): self.sides[1], (1, 2): self.sides[2]}[key]

    def measured_sides(self) -> tuple:
        v = self.vertices
        return dist(v[0], v[1]), dist(v[0], v[2]), dist(v[1], v[2])


def comparison_triangle(d12: float, d13: float, d23: float,
                        tol: float = GEOM_TOL) -> ComparisonTriangle:
    """Comparison triangle for three pairwise distances (degenerate allowed)."""
    check_triangle_inequality(d12, d13, d23, tol)
    d12, d13, d23 = max(d12, 0.0), max(d13, 0.0), max(d23, 0.0)
    v = np.array([[0.0, 0.0], [d12, 0.0], third_vertex(d12, d13, d23)])
    return ComparisonTriangle(v, (d12, d13, d23))


def comparison_point(tri: ComparisonTriangle, side: tuple, len_before: float,
                     len_after: float, tol: float = GEOM_TOL) -> np.ndarray:
    """Comparison point on side ``(i, j)`` for a point splitting an h-short side.

    ``len_before`` and ``len_after`` are the lengths of the sub-paths from
    vertex ``i`` and to vertex ``j``.  The point is placed at the proportional
    position ``len_before * |ij| / (len_before + len_after)`` from vertex ``i``,
    which satisfies both ``|x_i - u| <= len_before`` and
    ``|u - x_j| <= len_after``.
    """
    i, j = side
    L = tri.side_length(i, j)
    if len_before < 0 or len_after < 0:
        raise LengthsShorterThanSide("sub-path lengths must be nonnegative")
    total = len_before + len_after
    if total < L - tol * max(1.0, L):
        raise LengthsShorterThanSide(f"sub-paths of total length {total} cannot span a side of length {L}")
    frac = 0.0 if total == 0.0 else len_before / total
    a, b = tri.vertices[i], tri.vertices[j]
    return a + frac * (b - a)


def comparison_fraction(len_before, len_after):
    """Vectorised proportional rule: fraction of the side from its first endpoint."""
    len_before = np.asarray(len_before, dtype=float)
    total = len_before + np.asarray(len_after, dtype=float)
    return np.divide(len_before, total, out=np.zeros_like(total), where=total > 0)


def parallelogram_point(x, y, z, r: float):
    """Point ``w = y + r (z - y)`` with both sides of the parallelogram-law identity.

    Returns ``(w, lhs, rhs)`` where ``lhs = |x - w|^2`` is measured directly and
    ``rhs = (1-r)|x-y|^2 + r|x-z|^2 - r(1-r)|y-z|^2``.
    """
    if not 0.0 <= r <= 1.0:
        raise RatioOutOfRange(f"r={r!r} outside [0, 1]")
    x, y, z = (np.asarray(p, dtype=float) for p in (x, y, z))
    w = y + r * (z - y)
    lhs = float(np.sum((x - w) ** 2))
    rhs = ((1 - r) * float(np.sum((x - y) ** 2)) + r * float(np.sum((x - z) ** 2))
           - r * (1 - r) * float(np.sum((y - z) ** 2)))
    return w, lhs, rhs


def deviation_bound(l: float, h: float) -> float:
    """Maximal distance of an h-short path from its chord of length ``l``."""
    return 0.5 * math.sqrt(2.0 * l * h + h * h)


@dataclass(frozen=True, eq=False)
class ProjectionReport:
    """Deviation of a planar h-short polyline from its chord.

    ``arclength`` are the sample parameters t, ``curve`` the points gamma(t),
    ``projected`` their nearest points lambda(t) on the chord and
    ``deviation`` the distances delta(t).
    """

    arclength: np.ndarray
    curve: np.ndarray
    projected: np.ndarray
    deviation: np.ndarray
    l: float
    h: float
    bound: float
    eps: float | None
    eps_bound: float | None
    slack_x: float  # min over t of |gamma(t)-x| - |lambda(t)-x|
    slack_y: float
    slack_bound: float  # bound - max deviation

    @property
    def max_deviation(self) -> float:
        return float(self.deviation.max())

    @property
    def ok(self) -> bool:
        ok = self.slack_x >= -GEOM_TOL and self.slack_y >= -GEOM_TOL and self.slack_bound >= -GEOM_TOL
        if self.eps_bound is not None:
            ok = ok and self.max_deviation <= self.eps_bound + GEOM_TOL
        return ok


def short_segment_projection(path, x, y, h: float, eps: float | None = None,
                             samples: int = 64, tol: float = GEOM_TOL) -> ProjectionReport:
    """Project an h-short planar polyline from ``x`` to ``y`` onto the segment [x, y].

    The deviation from the chord is maximal at polyline vertices (distance to
    a segment is convex along a line), so those are always included among
    the samples.  With ``eps`` given and ``h <= eps / max(1, |x-y|)`` the
    report also carries the bound ``sqrt(3 eps) / 2``.
    """
    from .metric_core import Polyline

    poly = path if isinstance(path, Polyline) else Polyline.planar(path)
    x, y = np.asarray(x, float), np.asarray(y, float)
    l = dist(x, y)
    if l <= 0.0:
        raise ZeroBaseSegment("endpoints coincide")
    if dist(poly.start, x) > tol or dist(poly.end, y) > tol:
        raise NotHShort("polyline does not run from x to y")
    if poly.length > l + h + tol * max(1.0, l):
        raise NotHShort(f"length {poly.length} exceeds |x-y| + h = {l + h}")

    cum = np.concatenate([[0.0], np.cumsum(poly.lengths)])
    t = np.union1d(np.linspace(0.0, poly.length, samples), cum)
    seg, off = poly.locate(t)
    pts = poly.points
    w = poly.lengths[seg]
    frac = np.divide(off, w, out=np.zeros_like(off), where=w > 0)
    gamma = pts[seg] + frac[:, None] * (pts[seg + 1] - pts[seg])

    u = (y - x) / l
    along = np.clip((gamma - x) @ u, 0.0, l)
    lam = x + along[:, None] * u
    delta = np.hypot(*(gamma - lam).T)
    gx, gy = np.hypot(*(gamma - x).T), np.hypot(*(gamma - y).T)
    lx, ly = np.hypot(*(lam - x).T), np.hypot(*(lam - y).T)
    M = deviation_bound(l, h)
    eps_bound = None
    if eps is not None and h <= eps / max(1.0, l) + tol:
        eps_bound = math.sqrt(3.0 * eps) / 2.0
    return ProjectionReport(t, gamma, lam, delta, l, h, M, eps, eps_bound,
                            float((gx - lx).min()), float((gy - ly).min()),
                            float(M - delta.max()))


@dataclass(frozen=True, eq=False)
class Lemma32Instance:
    """Two planar triangles (x0, x1, x2) and (x0', x1', x2') with points on two sides.

    ``u_i = x0 + s_i (x_i - x0)`` and likewise for the primed triangle, with
    ``(s_1, s_2) = (s, t)``.  ``h = eps / max(1, |x0'-x1'|, |x0'-x2'|)``.
    """

    x: np.ndarray  # (3, 2): x0, x1, x2
    xp: np.ndarray  # (3, 2): x0', x1', x2'
    s: float
    t: float
    eps: float

    @property
    def h(self) -> float:
        xp = self.xp
        return self.eps / max(1.0, dist(xp[0], xp[1]), dist(xp[0], xp[2]))

    @property
    def u(self) -> np.ndarray:
        x = self.x
        return np.array([x[0] + self.s * (x[1] - x[0]), x[0] + self.t * (x[2] - x[0])])

    @property
    def up(self) -> np.ndarray:
        x = self.xp
        return np.array([x[0] + self.s * (x[1] - x[0]), x[0] + self.t * (x[2] - x[0])])

    def validate(self, tol: float = GEOM_TOL):
        if not 0.0 < self.eps <= 1.0:
            raise HypothesisViolated("eps", f"eps={self.eps} outside (0, 1]")
        for name, r in (("s", self.s), ("t", self.t)):
            if not 0.0 <= r <= 1.0:
                raise HypothesisViolated(name, f"{name}={r} outside [0, 1]")
        x, xp, h = self.x, self.xp, self.h
        if abs(dist(x[1], x[2]) - dist(xp[1], xp[2])) > tol:
            raise HypothesisViolated("base", "|x1-x2| != |x1'-x2'|")
        for i in (1, 2):
            a, b = dist(x[0], x[i]), dist(xp[0], xp[i])
            if a < b - tol:
                raise HypothesisViolated(f"lower{i}", f"|x0-x{i}| < |x0'-x{i}'|")
            if a > b + h + tol:
                raise HypothesisViolated(f"upper{i}", f"|x0-x{i}| > |x0'-x{i}'| + h")


def _u_gap_squared(s, t, d12, d01, d02):
    """|u1-u2|^2 from the ratios and the triangle's side lengths (needs s <= t)."""
    return s * t * d12 ** 2 + t * (t - s) * d02 ** 2 - s * (t - s) * d01 ** 2


@dataclass(frozen=True)
class Lemma32Result:
    d: float
    bound: float
    passed: bool
    expansion_error: float  # worst mismatch of the squared-distance expansions


def lemma32_check(inst: Lemma32Instance, tol: float = GEOM_TOL) -> Lemma32Result:
    """Compare |u1-u2| with |u1'-u2'| against the additive bound sqrt(3 eps)."""
    inst.validate(tol)
    u, up = inst.u, inst.up
    direct, direct_p = dist(u[0], u[1]), dist(up[0], up[1])
    d = direct - direct_p
    bound = math.sqrt(3.0 * inst.eps)

    s, t = inst.s, inst.t
    x, xp = inst.x, inst.xp
    i1, i2 = (1, 2) if s <= t else (2, 1)
    lo, hi = min(s, t), max(s, t)
    exp = _u_gap_squared(lo, hi, dist(x[1], x[2]), dist(x[0], x[i1]), dist(x[0], x[i2]))
    exp_p = _u_gap_squared(lo, hi, dist(xp[1], xp[2]), dist(xp[0], xp[i1]), dist(xp[0], xp[i2]))
    scale = max(1.0, float(np.abs(x).max()), float(np.abs(xp).max())) ** 2
    err = max(abs(exp - direct ** 2), abs(exp_p - direct_p ** 2)) / scale
    return Lemma32Result(d, bound, d <= bound + tol, err)


def canonical_pose(points) -> np.ndarray:
    """Rigid motion putting p0 at the origin, p1 on +x and p2 (first off-axis point) at y >= 0."""
    P = np.asarray(points, dtype=float)
    P = P - P[0]
    # first nonzero point defines the x-axis
    norms = np.hypot(P[:, 0], P[:, 1])
    nz = np.flatnonzero(norms > 1e-15)
    if len(nz):
        c, s = P[nz[0]] / norms[nz[0]]
        P = P @ np.array([[c, -s], [s, c]])
    off = np.flatnonzero(np.abs(P[:, 1]) > 1e-12 * max(1.0, norms.max(initial=0)))
    if len(off) and P[off[0], 1] < 0:
        P[:, 1] = -P[:, 1]
    P[np.abs(P) < 1e-300] = 0.0
    return P
