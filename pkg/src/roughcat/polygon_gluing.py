"""Gluing convex polygons along a segment, and convex polygon maps of n-gons.

Two convex polygons laid flat on opposite sides of a shared segment ``S``
form a length space whose metric has a closed form: a shortest path from
one piece to the other is straight on each piece and crosses ``S`` once.
The union is a (possibly non-convex) planar polygon, and its intrinsic
metric is the same glued metric.

:func:`build_ngon_embedding` turns a closed chain of short paths in a
space (an n-gon) into a convex Euclidean n-gon together with a
constant-speed map from its boundary back onto the chain.  It splits off
the last vertex, embeds the rest recursively, glues the comparison
triangle of the split-off piece on the far side, and convexifies the
union by dropping a reflex hinge vertex and re-embedding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import shapely
from scipy.sparse.csgraph import dijkstra
from shapely.geometry import LineString, Point, Polygon

from .errors import (HTooLarge, InconsistentDescriptor, NotConvex, NotFlatGluing,
                     NotHShort, PointOutsidePolygon, SplitPathUnavailable)
from .metric_core import PlaneSpace, Polyline
from .plane_geometry import canonical_pose, comparison_triangle
from .rcat_certify import HParams, h_threshold

POLY_TOL = 1e-9


def _scale(V) -> float:
    V = np.asarray(V, float)
    return max(1.0, float(np.abs(V).max(initial=0.0)))


def signed_area(V) -> float:
    V = np.asarray(V, float)
    x, y = V[:, 0], V[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _dedupe(V, tol):
    """Drop vertices coinciding with their predecessor (cyclically)."""
    V = np.asarray(V, float)
    P = V.tolist()
    apart = lambda a, b: math.hypot(a[0] - b[0], a[1] - b[1]) > tol
    keep = [0]
    for i in range(1, len(P)):
        if apart(P[i], P[keep[-1]]):
            keep.append(i)
    while len(keep) > 1 and not apart(P[keep[-1]], P[keep[0]]):
        keep.pop()
    return V[keep], keep


def _turn_at(P, i, tol) -> float:
    """Signed exterior angle at vertex ``i`` of a list of ``(x, y)`` pairs."""
    n = len(P)
    x, y = P[i]
    dist = lambda q: math.hypot(q[0] - x, q[1] - y)
    if dist(P[(i - 1) % n]) <= tol:
        return 0.0
    # nearest distinct neighbours
    p = next((P[(i - k) % n] for k in range(1, n) if dist(P[(i - k) % n]) > tol), None)
    q = next((P[(i + k) % n] for k in range(1, n) if dist(P[(i + k) % n]) > tol), None)
    if p is None or q is None:
        return 0.0
    ax, ay, bx, by = x - p[0], y - p[1], q[0] - x, q[1] - y
    cr = ax * by - ay * bx
    dt = ax * bx + ay * by
    if abs(cr) <= tol * math.hypot(ax, ay) * math.hypot(bx, by) and dt < 0:
        return math.pi
    return math.atan2(cr, dt)


def turning_angles(V, tol: float = POLY_TOL) -> np.ndarray:
    """Signed exterior angle at each vertex; coincident neighbours are skipped.

    For a counterclockwise convex polygon every entry lies in ``[0, pi]``
    and they sum to ``2 pi``.  A U-turn (degenerate spike) counts as ``+pi``.
    """
    V = np.asarray(V, float)
    tol = tol * _scale(V)
    P = V.tolist()
    return np.array([_turn_at(P, i, tol) for i in range(len(P))])


def interior_angles(V, tol: float = POLY_TOL) -> np.ndarray:
    return math.pi - turning_angles(V, tol)


def convexity_check(V, tol: float = POLY_TOL) -> bool:
    """True for a counterclockwise convex polygon (degenerate and flat vertices allowed)."""
    V = np.asarray(V, float)
    W, _ = _dedupe(V, tol * _scale(V))
    if len(W) < 3:
        return True
    t = turning_angles(W, tol)
    return bool((t >= -tol).all() and abs(t.sum() - 2 * math.pi) <= 1e-6)


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Convex polygon with counterclockwise vertices."""

    vertices: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.vertices, float).reshape(-1, 2)
        V.flags.writeable = False
        object.__setattr__(self, "vertices", V)
        if len(V) < 1 or not convexity_check(V):
            raise NotConvex("vertices do not form a counterclockwise convex polygon")

    @classmethod
    def from_points(cls, points) -> "ConvexPolygon":
        V = np.asarray(points, float)
        return cls(V[::-1] if signed_area(V) < 0 else V)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def side_lengths(self) -> np.ndarray:
        V = self.vertices
        return np.hypot(*(np.roll(V, -1, axis=0) - V).T)

    @property
    def perimeter(self) -> float:
        return float(self.side_lengths.sum())

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    def contains(self, P, tol: float = POLY_TOL) -> np.ndarray:
        """Closed membership of points ``P`` (shape ``(m, 2)``), within ``tol``."""
        P = np.atleast_2d(np.asarray(P, float))
        V, _ = _dedupe(self.vertices, tol * _scale(self.vertices))
        if len(V) == 1:
            return np.hypot(*(P - V[0]).T) <= tol * _scale(V)
        if len(V) == 2 or abs(signed_area(V)) <= tol * _scale(V) ** 2:
            # degenerate: distance to the boundary polyline
            return _dist_to_polyline(P, np.vstack([V, V[:1]])) <= tol * _scale(V)
        E = np.roll(V, -1, axis=0) - V
        L = np.hypot(E[:, 0], E[:, 1])
        rel = P[:, None, :] - V[None, :, :]
        cr = (E[None, :, 0] * rel[..., 1] - E[None, :, 1] * rel[..., 0]) / L[None, :]
        return (cr >= -tol * _scale(V)).all(axis=1)

    def to_json(self) -> dict:
        return {"vertices": self.vertices.tolist()}


def _dist_to_polyline(P, W):
    best = np.full(len(P), np.inf)
    for a, b in zip(W[:-1], W[1:]):
        e = b - a
        L2 = float(e @ e)
        t = np.zeros(len(P)) if L2 == 0 else np.clip((P - a) @ e / L2, 0.0, 1.0)
        best = np.minimum(best, np.hypot(*(P - (a + t[:, None] * e)).T))
    return best


def _crossing_distance(p0, p1, A, B):
    """min over s in [p0, p1] of |a - s| + |s - b|, vectorised over rows of A, B.

    Returns the distances and the optimal crossing points.  The objective is
    convex along the segment, so the unconstrained optimum on the line
    (reflect ``b`` across it when both lie on one side) clamped to the
    segment is optimal.
    """
    A = np.atleast_2d(np.asarray(A, float))
    B = np.atleast_2d(np.asarray(B, float))
    e = np.asarray(p1, float) - np.asarray(p0, float)
    L = math.hypot(*e)
    if L == 0.0:
        s = np.broadcast_to(np.asarray(p0, float), A.shape)
        return np.hypot(*(A - s).T) + np.hypot(*(s - B).T), np.array(s)
    e = e / L
    nrm = np.array([-e[1], e[0]])
    ta, tb = (A - p0) @ e, (B - p0) @ e
    ha, hb = np.abs((A - p0) @ nrm), np.abs((B - p0) @ nrm)
    tot = ha + hb
    t = np.where(tot > 0, ta + (tb - ta) * np.divide(ha, tot, out=np.zeros_like(tot), where=tot > 0),
                 0.5 * (ta + tb))
    t = np.clip(t, 0.0, L)
    S = np.asarray(p0, float) + t[:, None] * e
    return np.hypot(*(A - S).T) + np.hypot(*(S - B).T), S


@dataclass(frozen=True, eq=False)
class GluedPolygon:
    """Convex pieces ``q1``, ``q2`` laid flat on opposite sides of segment ``s``.

    Also a space model: positions are planar points, resolved to ``q1``
    when a point lies in both pieces.  (Points of ``q1 & q2`` off ``s``
    only occur when ``s`` is shorter than the shared boundary; they are
    then read as points of ``q1``.)
    """

    q1: ConvexPolygon
    q2: ConvexPolygon
    s: np.ndarray  # (2, 2) endpoints of the shared segment
    tol: float = POLY_TOL
    name = "glued"

    def __post_init__(self):
        S = np.asarray(self.s, float).reshape(2, 2)
        S.flags.writeable = False
        object.__setattr__(self, "s", S)
        scale = max(_scale(self.q1.vertices), _scale(self.q2.vertices))
        tol = self.tol * scale
        e = S[1] - S[0]
        L = math.hypot(*e)
        if L <= tol:
            raise NotFlatGluing("shared segment has zero length")
        for q in (self.q1, self.q2):
            if not q.contains(S, self.tol).all():
                raise NotFlatGluing("shared segment is not contained in both pieces")
        side = [(e[0] * (q.vertices[:, 1] - S[0, 1]) - e[1] * (q.vertices[:, 0] - S[0, 0])) / L
                for q in (self.q1, self.q2)]
        if not (((side[0] >= -tol).all() and (side[1] <= tol).all())
                or ((side[0] <= tol).all() and (side[1] >= -tol).all())):
            raise NotFlatGluing("pieces are not on opposite sides of the shared segment")

    @classmethod
    def glue(cls, q1: ConvexPolygon, q2: ConvexPolygon, s1, s2, tol: float = POLY_TOL) -> "GluedPolygon":
        """Lay ``q2`` flat against ``q1`` so that side ``s2`` of ``q2`` meets side ``s1`` of ``q1``.

        ``s1`` and ``s2`` are vertex index pairs; ``q2[s2[k]]`` is sent to
        ``q1[s1[k]]`` by a rigid motion (reflecting if needed) that puts the
        two pieces on opposite sides.
        """
        a, b = q1.vertices[s1[0]], q1.vertices[s1[1]]
        c, d = q2.vertices[s2[0]], q2.vertices[s2[1]]
        L1, L2 = math.hypot(*(b - a)), math.hypot(*(d - c))
        if abs(L1 - L2) > tol * max(1.0, L1):
            raise NotFlatGluing(f"identified segments have lengths {L1} and {L2}")
        if L1 == 0.0:
            raise NotFlatGluing("shared segment has zero length")
        e1, e2 = (b - a) / L1, (d - c) / L2
        R = np.array([[e1[0], -e1[1]], [e1[1], e1[0]]]) @ np.array([[e2[0], e2[1]], [-e2[1], e2[0]]])
        W = (q2.vertices - c) @ R.T + a
        n1 = np.array([-e1[1], e1[0]])
        side1 = (q1.vertices - a) @ n1
        side2 = (W - a) @ n1
        if np.sign(side1[np.argmax(np.abs(side1))]) == np.sign(side2[np.argmax(np.abs(side2))]):
            # reflect across the line of S
            rel = W - a
            W = a + np.outer(rel @ e1, e1) - np.outer(rel @ n1, n1)
        return cls(q1, ConvexPolygon.from_points(W), np.array([a, b]), tol)

    @classmethod
    def from_json(cls, obj: dict) -> "GluedPolygon":
        q1 = ConvexPolygon.from_points(obj["q1"]["vertices"])
        q2 = ConvexPolygon.from_points(obj["q2"]["vertices"])
        s = obj["s"]
        if "s2" in obj:
            return cls.glue(q1, q2, s, obj["s2"])
        s = np.asarray(s, float)
        if s.shape == (2,):
            s = q1.vertices[s.astype(int)]
        return cls(q1, q2, s)

    def to_json(self) -> dict:
        return {"q1": self.q1.to_json(), "q2": self.q2.to_json(), "s": self.s.tolist()}

    # space-model protocol

    def piece(self, P) -> np.ndarray:
        P = self.positions(P)
        in1 = self.q1.contains(P, self.tol)
        in2 = self.q2.contains(P, self.tol)
        bad = ~(in1 | in2)
        if bad.any():
            raise PointOutsidePolygon(f"point {P[np.argmax(bad)].tolist()} lies in neither piece")
        return np.where(in1, 0, 1)

    def positions(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float).reshape(-1, 2)

    def pairwise(self, A, B) -> np.ndarray:
        A, B = self.positions(A), self.positions(B)
        pa, pb = self.piece(A), self.piece(B)
        I, J = np.meshgrid(np.arange(len(A)), np.arange(len(B)), indexing="ij")
        I, J = I.ravel(), J.ravel()
        out = np.hypot(*(A[I] - B[J]).T)
        cross = pa[I] != pb[J]
        if cross.any():
            out[cross] = _crossing_distance(self.s[0], self.s[1], A[I[cross]], B[J[cross]])[0]
        return out.reshape(len(A), len(B))

    def distance(self, p, q) -> float:
        return float(self.pairwise(p, q)[0, 0])

    def geodesic(self, p, q) -> Polyline:
        p, q = self.positions(p)[0], self.positions(q)[0]
        if self.piece(p)[0] == self.piece(q)[0]:
            return Polyline.planar([p, q])
        _, S = _crossing_distance(self.s[0], self.s[1], p, q)
        pts = [p] + [S[0]] * (not (np.allclose(S[0], p) or np.allclose(S[0], q))) + [q]
        return Polyline.planar(pts)

    sample = PlaneSpace.sample

    def union_polygon(self):
        """Counterclockwise boundary of ``q1 | q2`` and the indices of the hinge vertices.

        The boundary starts at one endpoint of ``s`` and runs through ``q1``
        to the other (hinges ``0`` and ``k - 1``), then through ``q2``.
        """
        tol = self.tol * max(_scale(self.q1.vertices), _scale(self.q2.vertices))
        parts = []
        for q in (self.q1, self.q2):
            V, _ = _dedupe(q.vertices, tol)
            V = _insert_points(V, self.s, tol)
            ia = _vertex_index(V, self.s[0], tol)
            ib = _vertex_index(V, self.s[1], tol)
            n = len(V)
            # drop vertices strictly inside S; S must then be a single edge
            on_s = [i for i in range(n) if i not in (ia, ib)
                    and _dist_to_polyline(V[i:i + 1], self.s)[0] <= tol]
            keep = [i for i in range(n) if i not in on_s]
            V = V[keep]
            ia, ib = keep.index(ia), keep.index(ib)
            n = len(V)
            if (ia + 1) % n == ib:
                first, last = ib, ia  # S is edge ia -> ib; walk ib .. ia
            elif (ib + 1) % n == ia:
                first, last = ia, ib
            else:
                raise NotFlatGluing("shared segment is not a side of both pieces")
            walk = [V[(first + k) % n] for k in range((last - first) % n + 1)]
            parts.append(walk)
        P1, P2 = parts
        if not (np.allclose(P2[0], P1[-1], atol=tol) and np.allclose(P2[-1], P1[0], atol=tol)):
            raise NotFlatGluing("pieces traverse the shared segment in the same direction")
        U = np.array(P1 + P2[1:-1])
        if len(self.q1.vertices) > 2 and len(self.q2.vertices) > 2:
            overlap = Polygon(self.q1.vertices).intersection(Polygon(self.q2.vertices))
            if overlap.length > math.hypot(*(self.s[1] - self.s[0])) + 1e-6 * _scale(U):
                raise NotFlatGluing("pieces share more boundary than the glued segment")
        return U, (0, len(P1) - 1)


def _insert_points(V, pts, tol):
    V = [np.asarray(v, float) for v in V]
    for p in pts:
        if any(math.hypot(*(v - p)) <= tol for v in V):
            continue
        n = len(V)
        for i in range(n):
            a, b = V[i], V[(i + 1) % n]
            if _dist_to_polyline(np.asarray([p]), np.array([a, b]))[0] <= tol:
                V.insert(i + 1, np.asarray(p, float))
                break
    return np.array(V)


def _vertex_index(V, p, tol):
    d = np.hypot(*(V - p).T)
    i = int(np.argmin(d))
    if d[i] > tol:
        raise NotFlatGluing("shared segment endpoint is not on the piece boundary")
    return i


def glued_distance(g: GluedPolygon, a, b) -> float:
    """Glued-metric distance from ``a`` in ``q1`` to ``b`` in ``q2``."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    if not g.q1.contains(a, g.tol)[0]:
        raise PointOutsidePolygon(f"{a.tolist()} is not in the first piece")
    if not g.q2.contains(b, g.tol)[0]:
        raise PointOutsidePolygon(f"{b.tolist()} is not in the second piece")
    return float(_crossing_distance(g.s[0], g.s[1], a, b)[0][0])


class PolygonRegion:
    """Closed simple polygon with its intrinsic (shortest path) metric.

    Shortest paths bend only at reflex vertices, so distances come from a
    visibility graph on the reflex vertices plus the two query points.
    """

    def __init__(self, vertices, tol: float = POLY_TOL):
        V = np.asarray(vertices, float)
        V, _ = _dedupe(V, tol * _scale(V))
        if signed_area(V) < 0:
            V = V[::-1]
        self.vertices = V
        self.tol = tol * _scale(V)
        self.polygon = Polygon(V)
        self._cover = shapely.buffer(self.polygon, self.tol, join_style="mitre")
        shapely.prepare(self._cover)
        t = turning_angles(V, tol)
        self.reflex = V[t < -tol]
        r = len(self.reflex)
        W = np.full((r, r), np.inf)
        for i in range(r):
            W[i, i] = 0.0
            for j in range(i + 1, r):
                if self._visible(self.reflex[i], self.reflex[j]):
                    W[i, j] = W[j, i] = math.hypot(*(self.reflex[i] - self.reflex[j]))
        G = np.where(np.isfinite(W), W, 0.0)
        self._G, self._pred = dijkstra(G, directed=False, return_predecessors=True)

    def _visible(self, p, q) -> bool:
        if np.allclose(p, q):
            return self._cover.covers(Point(p))
        return self._cover.covers(LineString([p, q]))

    def contains(self, p) -> bool:
        return bool(self._cover.covers(Point(np.asarray(p, float))))

    def _query(self, a, b):
        a, b = np.asarray(a, float), np.asarray(b, float)
        for p in (a, b):
            if not self.contains(p):
                raise PointOutsidePolygon(f"{p.tolist()} is outside the polygon")
        if self._visible(a, b):
            return math.hypot(*(a - b)), None
        r = len(self.reflex)
        da = np.array([math.hypot(*(a - v)) if self._visible(a, v) else np.inf for v in self.reflex])
        db = np.array([math.hypot(*(b - v)) if self._visible(b, v) else np.inf for v in self.reflex])
        if r == 0:
            return math.inf, None
        tot = da[:, None] + self._G + db[None, :]
        i, j = np.unravel_index(int(np.argmin(tot)), tot.shape)
        return float(tot[i, j]), (i, j)

    def distance(self, a, b) -> float:
        return self._query(a, b)[0]

    def path(self, a, b) -> Polyline:
        d, ij = self._query(a, b)
        if ij is None:
            return Polyline.planar([a, b])
        i, j = ij
        chain = [j]
        while chain[-1] != i:
            chain.append(int(self._pred[i, chain[-1]]))
        chain.reverse()
        return Polyline.planar([a] + [self.reflex[k] for k in chain] + [b])

    def pairwise(self, A, B) -> np.ndarray:
        A = np.asarray(A, float).reshape(-1, 2)
        B = np.asarray(B, float).reshape(-1, 2)
        return np.array([[self.distance(a, b) for b in B] for a in A]).reshape(len(A), len(B))


def intrinsic_polygon_distance(poly, a, b, tol: float = POLY_TOL) -> float:
    """Length of a shortest path from ``a`` to ``b`` inside a closed simple polygon."""
    V = poly.vertices if isinstance(poly, ConvexPolygon) else poly
    return PolygonRegion(V, tol).distance(a, b)


# convexification and the n-gon construction

@dataclass(frozen=True, eq=False)
class AlreadyConvex:
    polygon: np.ndarray  # union boundary, flat hinge vertices kept

    @property
    def flat_vertices(self) -> list:
        return [i for i, t in enumerate(turning_angles(self.polygon)) if abs(t) <= 1e-9]


@dataclass(frozen=True, eq=False)
class ConvexificationRecord:
    """Re-embedding of a non-convex union with one reflex hinge vertex.

    ``union[i]`` corresponds to ``output[i]``; the dropped vertex
    ``union[reflex]`` is re-inserted into ``output`` as a flat vertex.  The
    boundary map G sends side i of ``output`` onto side i of ``union`` by
    arclength.
    """

    union: np.ndarray
    reflex: int
    output: np.ndarray
    region_distances: np.ndarray = field(repr=False)
    hinge: int = 0  # index of the second hinge vertex; the first is 0

    @property
    def side_residuals(self) -> np.ndarray:
        U, R = self.union, self.output
        su = np.hypot(*(np.roll(U, -1, axis=0) - U).T)
        sr = np.hypot(*(np.roll(R, -1, axis=0) - R).T)
        return sr - su

    def arm_slack(self) -> float:
        """``|w_prev - w_next| - |v_prev - v_next|`` around the dropped vertex (>= 0)."""
        n = len(self.union)
        p, q = (self.reflex - 1) % n, (self.reflex + 1) % n
        return float(math.hypot(*(self.output[p] - self.output[q]))
                     - math.hypot(*(self.union[p] - self.union[q])))

    def lipschitz_slack(self, samples: int = 8) -> float:
        """min over sampled boundary pairs of ``|y - z| - d_union(G(y), G(z))``."""
        Y, _, _ = boundary_samples(self.output, samples)
        Z, _, _ = boundary_samples(self.union, samples)
        dR = np.hypot(*(Y[:, None] - Y[None]).transpose(2, 0, 1))
        dU = PolygonRegion(self.union).pairwise(Z, Z)
        return float((dR - dU).min())

    def to_json(self) -> dict:
        return {"union": self.union.tolist(), "reflex": self.reflex, "output": self.output.tolist(),
                "arm_slack": self.arm_slack()}


def boundary_samples(V, samples: int):
    """``samples`` points per side (start vertex included, end excluded).

    Returns points, side index and fraction along the side.
    """
    V = np.asarray(V, float)
    tau = np.arange(samples) / samples
    n = len(V)
    side = np.repeat(np.arange(n), samples)
    frac = np.tile(tau, n)
    nxt = np.roll(V, -1, axis=0)
    P = V[side] + frac[:, None] * (nxt[side] - V[side])
    return P, side, frac


def _piece_angle(V, i, tol):
    """Interior angle of a convex (possibly flat) piece at vertex ``i``."""
    W, keep = _dedupe(V, tol * _scale(V))
    if len(W) < 3:
        return 0.0
    j = max(k for k, v in enumerate(keep) if v <= i)
    return math.pi - _turn_at(W.tolist(), j, tol * _scale(W))


def glued_table(U, h, tol=POLY_TOL):
    """Glued-metric distances between the vertices of a flat-laid union.

    ``U[0..h]`` is the boundary of the first convex piece and
    ``U[h..], U[0]`` that of the second; they share the segment
    ``[U[0], U[h]]``.
    """
    n = len(U)
    first = np.zeros(n, bool)
    first[: h + 1] = True
    second = ~first
    second[0] = second[h] = True
    D = np.hypot(*(U[:, None] - U[None]).transpose(2, 0, 1))
    I, J = np.nonzero((first[:, None] & second[None, :]) & ~(second[:, None] & first[None, :]))
    if len(I):
        D[I, J] = _crossing_distance(U[0], U[h], U[I], U[J])[0]
        D[J, I] = D[I, J]
    return D


def _convexify_union(U, h, tol, records):
    """Drop a reflex hinge (vertex 0 or ``h``) of a flat-laid union and re-embed convexly.

    Hinge angles are sums of the two pieces' own angles, which stay well
    defined when a piece is flat.
    """
    n = len(U)
    P1, P2 = U[: h + 1], np.vstack([U[h:], U[:1]])
    ang = {0: _piece_angle(P1, 0, tol) + _piece_angle(P2, len(P2) - 1, tol),
           h: _piece_angle(P1, h, tol) + _piece_angle(P2, 0, tol)}
    cands = [v for v in (0, h) if ang[v] > math.pi + tol]
    if not cands:
        return U, None
    r = max(cands, key=lambda v: (ang[v], -v))
    keep = [i for i in range(n) if i != r]
    Dp = glued_table(U, h, tol)[np.ix_(keep, keep)]
    np.fill_diagonal(Dp, 0.0)
    Rp = _embed(Dp, tol, records)
    p, q = (r - 1) % n, (r + 1) % n
    wp, wq = Rp[keep.index(p)], Rp[keep.index(q)]
    span = math.hypot(*(wq - wp))
    arm = math.hypot(*(U[r] - U[p]))
    w = wp if span == 0 else wp + (arm / span) * (wq - wp)
    R = np.insert(Rp, r, w, axis=0)
    rec = ConvexificationRecord(U.copy(), r, R, Dp, h)
    records.append(rec)
    return R, rec


def convexify(g: GluedPolygon, tol: float = POLY_TOL):
    """Convex re-embedding of the union of a glued polygon.

    Returns :class:`AlreadyConvex` when neither hinge vertex is reflex,
    otherwise a :class:`ConvexificationRecord`.
    """
    U, hinges = g.union_polygon()
    R, rec = _convexify_union(U, hinges[1], tol, [])
    return AlreadyConvex(U) if rec is None else rec


def _embed(D, tol=POLY_TOL, records=None):
    """Convex polygon whose vertex distances dominate the table ``D`` (n >= 1).

    Consecutive distances are reproduced exactly and distances from vertex
    0 dominate; the table must come from closed chains of geodesics in a
    CAT(0) or rough CAT(0) space for the full comparison guarantees.
    """
    D = np.asarray(D, float)
    records = [] if records is None else records
    n = len(D)
    scale = max(1.0, float(D.max(initial=0.0)))
    # collapse repeated consecutive vertices
    keep = [0]
    for i in range(1, n):
        if D[keep[-1], i] > tol * scale:
            keep.append(i)
    while len(keep) > 1 and D[keep[-1], keep[0]] <= tol * scale:
        keep.pop()
    if len(keep) < n:
        V = _embed(D[np.ix_(keep, keep)], tol, records)
        out = np.empty((n, 2))
        j = 0
        for i in range(n):
            if j + 1 < len(keep) and i >= keep[j + 1]:
                j += 1
            out[i] = V[j]
        return out
    if n == 1:
        return np.zeros((1, 2))
    if n == 2:
        return np.array([[0.0, 0.0], [D[0, 1], 0.0]])
    if n == 3:
        return comparison_triangle(D[0, 1], D[0, 2], D[1, 2], tol=1e-7).vertices.copy()
    k = n - 1
    if D[0, k - 1] <= tol * scale:
        raise SplitPathUnavailable(f"vertices 0 and {k - 1} coincide; no split path")
    V1 = _embed(D[:k, :k], tol, records)
    tri = comparison_triangle(D[0, k - 1], D[0, k], D[k - 1, k], tol=1e-7)
    p0, p1 = V1[0], V1[k - 1]
    e = (p1 - p0) / math.hypot(*(p1 - p0))
    nrm = np.array([-e[1], e[0]])
    apex = p0 + tri.vertices[2, 0] * e + tri.vertices[2, 1] * nrm
    U = np.vstack([V1, apex])
    R, _ = _convexify_union(U, k - 1, tol, records)
    return R


@dataclass(frozen=True, eq=False)
class NgonMapDescriptor:
    """Constant-speed map from the boundary of polygon ``Q`` onto an n-gon in a space.

    Side ``i`` of ``Q`` runs from ``Q[i]`` to ``Q[i + 1]`` and is mapped at
    constant speed ``K[i]`` onto ``sides[i]``, a short path from
    ``vertices[i]`` to ``vertices[i + 1]``.  ``region`` supplies the
    intrinsic metric of a non-convex ``Q``; convex ``Q`` uses Euclidean
    distance.
    """

    Q: np.ndarray
    space: object
    vertices: tuple
    sides: tuple
    h: float
    K: np.ndarray
    region: PolygonRegion | None = None

    def __post_init__(self):
        n = len(self.Q)
        if len(self.sides) != n or len(self.vertices) != n:
            raise InconsistentDescriptor(f"{n} polygon vertices, {len(self.vertices)} vertices, "
                                         f"{len(self.sides)} sides")
        K = np.asarray(self.K, float)
        if not (np.isfinite(K).all() and (K > 0).all()):
            raise InconsistentDescriptor("speeds must be positive and finite")
        q = np.hypot(*(np.roll(self.Q, -1, axis=0) - self.Q).T)
        lp = np.array([s.length for s in self.sides])
        bad = np.abs(K * q - lp) > 1e-6 * np.maximum(1.0, lp)
        bad &= q > 0
        if bad.any():
            raise InconsistentDescriptor(f"side {int(np.argmax(bad))}: speed times length "
                                         "does not match path length")

    @property
    def n(self) -> int:
        return len(self.Q)

    def image(self, side, frac) -> np.ndarray:
        """Space positions of the images of points at fractions ``frac`` along sides ``side``."""
        side = np.atleast_1d(side)
        frac = np.atleast_1d(np.asarray(frac, float))
        out = None
        for i in np.unique(side):
            m = side == i
            poly = self.sides[int(i)]
            pos = self.space.sample(poly, frac[m] * poly.length)
            if out is None:
                out = np.zeros((len(side), pos.shape[1]))
            out[m] = pos
        return out

    def d_prime(self, X, Y) -> np.ndarray:
        if self.region is None:
            return np.hypot(*(X[:, None] - Y[None]).transpose(2, 0, 1))
        return self.region.pairwise(X, Y)

    def to_json(self) -> dict:
        return {"Q": self.Q.tolist(), "K": self.K.tolist(), "h": self.h,
                "sides": [s.length for s in self.sides]}


@dataclass(frozen=True)
class AnReport:
    slacks: dict  # condition -> worst slack (>= -tol passes)
    witness: tuple  # worst pair for condition 5 as ((side, frac), (side, frac))
    C_n: float
    tol: float

    @property
    def passed(self) -> bool:
        return all(v >= -self.tol for v in self.slacks.values())

    def to_json(self) -> dict:
        return {"slacks": self.slacks, "witness": [list(w) for w in self.witness],
                "C_n": self.C_n, "passed": self.passed}


def verify_An(desc: NgonMapDescriptor, C_n: float, samples: int = 16,
              tol: float = 1e-6) -> AnReport:
    """Check the five conditions relating the n-gon, its polygon and the boundary map.

    1. images of polygon vertices are the n-gon vertices;
    2. side lengths agree;
    3. distances from the first vertex are dominated;
    4. path length from an image point to an adjacent vertex dominates the
       polygon distance (sampled);
    5. ``d(F(x), F(y)) <= d'(x, y) + C_n`` on sampled boundary pairs.
    """
    sp = desc.space
    n = desc.n
    Q = np.asarray(desc.Q, float)
    U = sp.positions(np.asarray(desc.vertices))
    idx = np.arange(n)
    dU = sp.pairwise(U, U)
    scale = max(1.0, float(dU.max(initial=0.0)))
    start = desc.image(idx, np.zeros(n))
    end = desc.image(idx, np.ones(n))
    c1 = max(float(np.diag(sp.pairwise(start, U)).max()),
             float(np.diag(sp.pairwise(end, U[(idx + 1) % n])).max()))
    dQ = desc.d_prime(Q, Q)
    c2 = float(np.abs(dU[idx, (idx + 1) % n] - dQ[idx, (idx + 1) % n]).max())
    c3 = float((dQ[0, 1:] - dU[0, 1:]).min()) if n > 1 else 0.0
    X, side, frac = boundary_samples(Q, samples)
    lp = np.array([s.length for s in desc.sides])
    q = np.hypot(*(np.roll(Q, -1, axis=0) - Q).T)
    # to the start and end vertex of each sample's side
    c4 = float(min((frac * lp[side] - frac * q[side]).min(),
                   ((1 - frac) * lp[side] - (1 - frac) * q[side]).min()))
    FX = desc.image(side, frac)
    dF = sp.pairwise(FX, FX)
    dX = desc.d_prime(X, X)
    gap = dX + C_n - dF
    i, j = np.unravel_index(int(np.argmin(gap)), gap.shape)
    slacks = {"cond1": -c1 / scale, "cond2": -c2 / scale, "cond3": c3 / scale,
              "cond4": c4 / scale, "cond5": float(gap[i, j]) / scale}
    witness = ((int(side[i]), float(frac[i])), (int(side[j]), float(frac[j])))
    return AnReport(slacks, witness, float(C_n), tol)


@dataclass(frozen=True, eq=False)
class NgonEmbedding:
    polygon: ConvexPolygon
    descriptor: NgonMapDescriptor
    records: list
    C_n: float

    def chain_config(self):
        """The polygon's vertices as a subembedding configuration of the n-gon's vertices."""
        from .subembedding import ChainConfig

        P = canonical_pose(self.polygon.vertices)
        rho = np.sign([P[k, 0] * P[k + 1, 1] - P[k, 1] * P[k + 1, 0] for k in range(1, len(P) - 1)])
        rho = np.where(rho == 0, 1.0, rho)
        folds = (int(rho[0]),) + tuple(int(-a * b) for a, b in zip(rho[:-1], rho[1:]))
        return ChainConfig(P, np.hypot(*P[2:-1].T), folds)

    def certificate(self):
        """Slack table of the n-gon's vertex tuple against the polygon at constant ``C_n``."""
        from .subembedding import subembedding_slack

        desc = self.descriptor
        U = desc.space.positions(np.asarray(desc.vertices))
        T = desc.space.pairwise(U, U)
        T = 0.5 * (T + T.T)
        np.fill_diagonal(T, 0.0)
        return subembedding_slack(T, self.chain_config(), self.C_n, tol=1e-6)

    def to_json(self) -> dict:
        return {"polygon": self.polygon.to_json(), "C_n": self.C_n,
                "descriptor": self.descriptor.to_json(),
                "convexifications": [r.to_json() for r in self.records],
                "certificate": self.certificate().to_json()}


def build_ngon_embedding(space, vertices, C_prime: float = 0.0, sides=None, h: float = 0.0,
                         params: HParams = HParams(), tol: float = POLY_TOL) -> NgonEmbedding:
    """Convex polygon and constant-speed boundary map for a closed chain of short paths.

    ``vertices`` are raw vertex specs of ``space`` (graph vertex ids or
    planar points).  ``sides[i]`` joins ``vertices[i]`` to
    ``vertices[i + 1]``; geodesics are used when omitted.  ``C_prime`` is
    the rough CAT(0) constant of the space; the map satisfies the sampled
    conditions of :func:`verify_An` with constant ``(n - 2) * C_prime``.
    """
    verts = list(vertices)
    n = len(verts)
    if n < 3:
        raise ValueError("an n-gon needs n >= 3")
    U = space.positions(np.asarray(verts))
    D = space.pairwise(U, U)
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    if sides is None:
        sides = [space.geodesic(verts[i], verts[(i + 1) % n]) for i in range(n)]
    sides = tuple(sides)
    for i, poly in enumerate(sides):
        d = D[i, (i + 1) % n]
        if poly.length > d + h + 1e-9 * max(1.0, d):
            raise NotHShort(f"side {i} has length {poly.length} > {d} + {h}")
    if h > 0:
        for a in range(n):
            for b in range(a + 1, n):
                for c in range(b + 1, n):
                    H = h_threshold(D[a, b], D[a, c], D[b, c], params)
                    if not h < H:
                        raise HTooLarge(f"h={h} is not below threshold {H} of vertices {(a, b, c)}")
    # split paths u_1 -> u_k for k = n-1 .. 3 (1-based), needed by the recursion
    for k in range(n - 2, 1, -1):
        try:
            space.geodesic(verts[0], verts[k])
        except Exception as exc:  # a model without a path between the vertices
            raise SplitPathUnavailable(f"no path from vertex 0 to vertex {k}: {exc}") from exc
    records: list = []
    Q = _embed(D, tol, records)
    q = np.hypot(*(np.roll(Q, -1, axis=0) - Q).T)
    lp = np.array([s.length for s in sides])
    K = np.where(q > 0, lp / np.where(q > 0, q, 1.0), 1.0)
    K = np.where(K > 0, K, 1.0)
    desc = NgonMapDescriptor(Q, space, tuple(verts), sides, h, K)
    return NgonEmbedding(ConvexPolygon(Q), desc, records, (n - 2) * C_prime)
