"""Finite metric spaces, weighted graphs and planar models.

Everything downstream consumes one of two things from here:

* a :class:`FiniteMetric` (a validated distance table), or
* a *space model* that can measure distances between arbitrary points,
  produce geodesic polylines and sample points along them.  Two models are
  provided: :class:`PlaneSpace` (the Euclidean plane) and
  :class:`GraphSpace` (a metric graph, i.e. the 1-complex whose edges are
  intervals of the given weights).  Graph geodesics are exact (0-short), so
  they qualify as h-short paths for every h > 0.

Positions in a space are numpy arrays.  Planar positions have shape
``(N, 2)``.  Graph positions have shape ``(N, 4)`` with rows
``(a, b, offset, w)``: the point at distance ``offset`` from vertex ``a``
along the edge ``(a, b)`` of length ``w``.  A vertex ``v`` is the row
``(v, v, 0, 0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import (
    Asymmetry,
    DisconnectedGraph,
    IndexOutOfRange,
    MetricError,
    NegativeEntry,
    NonFiniteEntry,
    NonzeroDiagonal,
    NotSquare,
    TriangleViolation,
)

#: absolute tolerance for the metric axioms, applied to tables scaled to O(1)
METRIC_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FiniteMetric:
    """A validated symmetric distance table, optionally with point labels."""

    dist: np.ndarray
    labels: tuple | None = None

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def __getitem__(self, ij):
        return self.dist[ij]

    def index(self, key) -> int:
        """Position of a point given by label or integer index."""
        if self.labels is not None and key in self.labels:
            return self.labels.index(key)
        try:
            i = int(key)
        except (TypeError, ValueError):
            raise IndexOutOfRange(f"unknown point {key!r}") from None
        if not 0 <= i < self.n:
            raise IndexOutOfRange(f"index {i} outside 0..{self.n - 1}")
        return i

    def scaled(self, factor: float) -> "FiniteMetric":
        return FiniteMetric(self.dist * factor, self.labels)

    def to_json(self) -> dict:
        out = {"n": self.n, "dist": self.dist.tolist()}
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out


def validate_metric(matrix, tol: float = METRIC_TOL, labels=None) -> FiniteMetric:
    """Check the metric axioms and return a :class:`FiniteMetric`.

    The tolerance is absolute after dividing by ``max(1, largest entry)``.
    Raises the first violated axiom, checked in the order: shape, finiteness,
    sign, diagonal, symmetry, triangle inequality.  Triangle violations are
    reported as ``TriangleViolation(i, k, j)`` meaning
    ``d(i, k) > d(i, j) + d(j, k)``, with ``(i, k, j)`` the lexicographically
    first offending triple.
    """
    d = np.array(matrix, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise NotSquare(f"expected a square table, got shape {d.shape}")
    n = d.shape[0]
    bad = np.argwhere(~np.isfinite(d))
    if len(bad):
        raise NonFiniteEntry(*map(int, bad[0]))
    scale = max(1.0, float(d.max(initial=0.0)))
    atol = tol * scale
    bad = np.argwhere(d < -atol)
    if len(bad):
        i, j = map(int, bad[0])
        raise NegativeEntry(i, j, float(d[i, j]))
    diag = np.abs(np.diag(d))
    bad = np.flatnonzero(diag > atol)
    if len(bad):
        i = int(bad[0])
        raise NonzeroDiagonal(i, float(d[i, i]))
    bad = np.argwhere(np.abs(d - d.T) > atol)
    if len(bad):
        raise Asymmetry(*map(int, bad[0]))

    # first violating j for every (i, k), vectorised one j at a time
    first_j = np.full((n, n), -1)
    for j in range(n):
        viol = d > d[:, j:j + 1] + d[j:j + 1, :] + atol
        first_j[(first_j < 0) & viol] = j
    bad = np.argwhere(first_j >= 0)
    if len(bad):
        i, k = map(int, bad[0])
        j = int(first_j[i, k])
        raise TriangleViolation(i, k, j, float(d[i, k] - d[i, j] - d[j, k]))

    d = np.clip(d, 0.0, None)
    np.fill_diagonal(d, 0.0)
    d.flags.writeable = False
    if labels is not None:
        labels = tuple(labels)
        if len(labels) != n:
            raise MetricError(f"{len(labels)} labels for {n} points")
    return FiniteMetric(d, labels)


class TupleTable(NamedTuple):
    table: np.ndarray
    indices: tuple
    repeated: tuple  # (p, q) position pairs, p < q, naming the same point


def tuple_distances(m: FiniteMetric, indices: Sequence) -> TupleTable:
    """Distance table of an ordered tuple of points (repeats allowed)."""
    idx = tuple(m.index(i) for i in indices)
    table = m.dist[idx, :][:, idx]
    repeated = tuple((p, q) for p in range(len(idx)) for q in range(p + 1, len(idx))
                     if idx[p] == idx[q])
    return TupleTable(table, idx, repeated)


@dataclass(frozen=True, eq=False)
class Polyline:
    """An ordered chain of positions in some space.

    ``points`` holds graph vertex ids (shape ``(k,)``) or planar
    coordinates (shape ``(k, 2)``); ``lengths[i]`` is the length of the
    segment from ``points[i]`` to ``points[i + 1]``.  ``length`` is the
    total, summed in construction order.
    """

    points: np.ndarray
    lengths: np.ndarray
    length: float

    @classmethod
    def from_lengths(cls, points, lengths) -> "Polyline":
        lengths = np.asarray(lengths, dtype=float)
        total = 0.0
        for w in lengths:
            total += float(w)
        return cls(np.asarray(points), lengths, total)

    @classmethod
    def planar(cls, points) -> "Polyline":
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return cls.from_lengths(pts, np.hypot(*np.diff(pts, axis=0).T))

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]

    def reversed(self) -> "Polyline":
        return Polyline(self.points[::-1].copy(), self.lengths[::-1].copy(), self.length)

    def locate(self, s):
        """Segment index and offset within it for arclength positions ``s``."""
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.length)
        if len(self.lengths) == 0:
            return np.zeros(s.shape, dtype=int), np.zeros(s.shape)
        cum = np.concatenate([[0.0], np.cumsum(self.lengths)])
        seg = np.searchsorted(cum, s, side="right") - 1
        seg = np.clip(seg, 0, len(self.lengths) - 1)
        off = np.clip(s - cum[seg], 0.0, self.lengths[seg])
        return seg, off

    def is_h_short(self, endpoint_distance: float, h: float, tol: float = 1e-9) -> bool:
        return self.length <= endpoint_distance + h + tol


class PlaneSpace:
    """The Euclidean plane as a space model; geodesics are straight segments."""

    name = "plane"

    def positions(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float).reshape(-1, 2)

    def distance(self, p, q) -> float:
        p, q = np.asarray(p, float), np.asarray(q, float)
        return float(math.hypot(*(p - q)))

    def pairwise(self, A, B) -> np.ndarray:
        A, B = self.positions(A), self.positions(B)
        return np.hypot(A[:, None, 0] - B[None, :, 0], A[:, None, 1] - B[None, :, 1])

    def geodesic(self, p, q) -> Polyline:
        return Polyline.planar([p, q])

    def sample(self, poly: Polyline, s) -> np.ndarray:
        seg, off = poly.locate(s)
        pts = poly.points
        w = poly.lengths[seg] if len(poly.lengths) else np.ones_like(off)
        frac = np.divide(off, w, out=np.zeros_like(off), where=w > 0)
        if len(poly.lengths) == 0:
            return np.repeat(pts[:1], len(np.atleast_1d(s)), axis=0)
        return pts[seg] + frac[:, None] * (pts[seg + 1] - pts[seg])


@dataclass(frozen=True, eq=False)
class GraphSpace:
    """A connected weighted graph, read as a metric graph (length space)."""

    vertices: int
    edges: np.ndarray  # (m, 3) rows (u, v, w)
    coords: np.ndarray | None = None
    name: str = "graph"

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float).reshape(-1, 3)
        object.__setattr__(self, "edges", e)
        if self.coords is not None:
            object.__setattr__(self, "coords", np.asarray(self.coords, dtype=float))
        if len(e) and (e[:, 2] <= 0).any():
            raise MetricError("edge weights must be positive")
        if len(e) and ((e[:, :2] < 0).any() or (e[:, :2] >= self.vertices).any()):
            raise IndexOutOfRange("edge endpoint outside vertex range")

    @classmethod
    def from_edges(cls, vertices, edges, coords=None, name="graph") -> "GraphSpace":
        return cls(int(vertices), np.asarray(edges, dtype=float), coords, name)

    @cached_property
    def _csr(self):
        n = self.vertices
        # parallel edges: keep the lightest
        w = {}
        for u, v, x in self.edges:
            key = (int(min(u, v)), int(max(u, v)))
            if key[0] == key[1]:
                continue
            w[key] = min(x, w.get(key, math.inf))
        if not w:
            return csr_matrix((n, n))
        rows, cols = zip(*w.keys())
        vals = list(w.values())
        return csr_matrix((vals + vals, (list(rows) + list(cols), list(cols) + list(rows))),
                          shape=(n, n))

    @cached_property
    def _sp(self):
        n_comp, _ = connected_components(self._csr, directed=False)
        if n_comp != 1:
            raise DisconnectedGraph(f"graph has {n_comp} components")
        dist, pred = dijkstra(self._csr, directed=False, return_predecessors=True)
        upper = np.triu(dist)
        sym = upper + upper.T
        sym.flags.writeable = False
        return sym, pred

    @property
    def dist(self) -> np.ndarray:
        return self._sp[0]

    def edge_weight(self, u, v) -> float:
        return float(self._csr[u, v])

    def metric(self) -> FiniteMetric:
        return path_metric(self)

    def geodesic(self, i, j) -> Polyline:
        """Shortest edge path from vertex ``i`` to vertex ``j``.

        The path is read off the shortest-path tree of ``min(i, j)``, so its
        length is the same floating-point sum as ``dist[i, j]``.
        """
        i, j = int(i), int(j)
        for v in (i, j):
            if not 0 <= v < self.vertices:
                raise IndexOutOfRange(f"vertex {v} outside 0..{self.vertices - 1}")
        src, dst = min(i, j), max(i, j)
        pred = self._sp[1][src]
        path = [dst]
        while path[-1] != src:
            p = pred[path[-1]]
            if p < 0:
                raise DisconnectedGraph(f"no path {src}->{dst}")
            path.append(int(p))
        path.reverse()
        lengths = [self.edge_weight(a, b) for a, b in zip(path, path[1:])]
        poly = Polyline.from_lengths(np.array(path, dtype=int), lengths)
        return poly if i == src else poly.reversed()

    # space-model protocol

    def positions(self, vertices) -> np.ndarray:
        v = np.asarray(vertices)
        if v.ndim == 2 and v.shape[1] == 4:
            return v.astype(float)
        v = v.reshape(-1).astype(float)
        return np.column_stack([v, v, np.zeros_like(v), np.zeros_like(v)])

    def sample(self, poly: Polyline, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if len(poly.lengths) == 0:
            return self.positions(np.repeat(poly.points[:1], len(s)))
        seg, off = poly.locate(s)
        a = poly.points[seg].astype(float)
        b = poly.points[seg + 1].astype(float)
        return np.column_stack([a, b, off, poly.lengths[seg]])

    def pairwise(self, A, B) -> np.ndarray:
        A, B = self.positions(A), self.positions(B)
        D = self.dist
        a, b = A[:, 0].astype(int), A[:, 1].astype(int)
        c, e = B[:, 0].astype(int), B[:, 1].astype(int)
        sa, ta = A[:, 2, None], (A[:, 3] - A[:, 2])[:, None]
        sb, tb = B[None, :, 2], (B[:, 3] - B[:, 2])[None, :]
        out = np.minimum.reduce([
            sa + D[np.ix_(a, c)] + sb,
            sa + D[np.ix_(a, e)] + tb,
            ta + D[np.ix_(b, c)] + sb,
            ta + D[np.ix_(b, e)] + tb,
        ])
        same = (a[:, None] == c[None, :]) & (b[:, None] == e[None, :])
        flip = (a[:, None] == e[None, :]) & (b[:, None] == c[None, :]) & ~same
        out = np.where(same, np.minimum(out, np.abs(sa - sb)), out)
        out = np.where(flip, np.minimum(out, np.abs(sa - tb)), out)
        return out

    def distance(self, p, q) -> float:
        return float(self.pairwise(p, q)[0, 0])

    def scaled(self, factor: float) -> "GraphSpace":
        e = self.edges.copy()
        e[:, 2] *= factor
        coords = None if self.coords is None else self.coords * factor
        return GraphSpace(self.vertices, e, coords, self.name)

    def to_json(self) -> dict:
        out = {"vertices": self.vertices,
               "edges": [[int(u), int(v), float(w)] for u, v, w in self.edges]}
        if self.coords is not None:
            out["coords"] = self.coords.tolist()
        return out


def path_metric(g: GraphSpace) -> FiniteMetric:
    """All-pairs shortest path metric of a connected weighted graph."""
    return validate_metric(g.dist, tol=1e-9)


def geodesic(g: GraphSpace, i, j) -> Polyline:
    return g.geodesic(i, j)


# standard graph families

def path_graph(n: int, weight: float = 1.0) -> GraphSpace:
    return GraphSpace.from_edges(n, [(i, i + 1, weight) for i in range(n - 1)], name=f"path{n}")


def cycle_graph(n_edges: int, circumference: float | None = None) -> GraphSpace:
    """Cycle with ``n_edges`` equal edges (unit weights unless a circumference is given)."""
    w = 1.0 if circumference is None else circumference / n_edges
    edges = [(i, (i + 1) % n_edges, w) for i in range(n_edges)]
    t = np.arange(n_edges) / n_edges * 2 * np.pi
    L = n_edges * w
    coords = np.column_stack([np.cos(t), np.sin(t)]) * L / (2 * np.pi)
    return GraphSpace.from_edges(n_edges, edges, coords, name=f"cycle{n_edges}")


def star_graph(leaves: int, weight: float = 1.0) -> GraphSpace:
    """Star with center 0 and leaves 1..leaves."""
    return GraphSpace.from_edges(leaves + 1, [(0, i, weight) for i in range(1, leaves + 1)],
                                 name=f"star{leaves}")


def random_tree(n: int, rng: np.random.Generator, low: float = 0.1,
                high: float = 1.0) -> GraphSpace:
    """Random recursive tree with uniform edge weights in ``[low, high]``."""
    edges = [(i, int(rng.integers(0, i)), float(rng.uniform(low, high))) for i in range(1, n)]
    return GraphSpace.from_edges(n, edges, name=f"tree{n}")


def square_net(spacing: float, radius: float | None = None, side: float = 1.0) -> GraphSpace:
    """Grid net of ``[0, side]^2`` with edges between points closer than ``radius``.

    Edge weights are Euclidean lengths.  With ``radius`` fixed and the
    spacing shrinking, the path metric converges to the Euclidean one.
    """
    k = int(round(side / spacing))
    xs = np.linspace(0.0, side, k + 1)
    pts = np.array([(x, y) for y in xs for x in xs])
    r = radius if radius is not None else 1.5 * spacing
    diff = pts[:, None, :] - pts[None, :, :]
    dd = np.hypot(diff[..., 0], diff[..., 1])
    iu, ju = np.nonzero(np.triu(dd <= r + 1e-12, 1))
    edges = np.column_stack([iu, ju, dd[iu, ju]])
    return GraphSpace(len(pts), edges, pts, name=f"net{spacing:g}")
