"""Rough CAT(0) defects of short triangles in desk-scale spaces.

A triangle's defect is the largest ``d(u, v) - |u' - v'|`` over sampled
points ``u, v`` on different sides, where ``u', v'`` are comparison points
on the comparison triangle (proportional rule).  A space is C-rough CAT(0)
when every triangle that is short enough has defect at most C; sampling
only ever gives a lower estimate of that constant.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetZero, HTooLarge, NotHShort
from .metric_core import GraphSpace, PlaneSpace, Polyline
from .plane_geometry import comparison_fraction, comparison_triangle

# side k of a triangle (x0, x1, x2) runs between these vertices
SIDES = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class HParams:
    """Shortness threshold parameters: ``h <= eps / max(1, diameter)``."""

    eps: float = 1.0
    mode: str = "standard"

    def __post_init__(self):
        if not 0.0 < self.eps <= 1.0:
            raise ValueError(f"eps={self.eps} outside (0, 1]")
        if self.mode not in ("standard", "strengthened"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "standard" and self.eps != 1.0:
            object.__setattr__(self, "mode", "strengthened")


def h_threshold(d12: float, d13: float, d23: float, params: HParams = HParams()) -> float:
    return params.eps / max(1.0, d12, d13, d23)


@dataclass(frozen=True, eq=False)
class ShortTriangle:
    """Three h-short sides between vertices ``x0, x1, x2`` of a space.

    ``vertices`` are the raw vertex specs (graph ids or planar points) and
    ``sides[k]`` runs between the vertices named in ``SIDES[k]``.
    """

    space: object
    vertices: tuple
    sides: tuple
    h: float = 0.0

    def vertex_distances(self):
        P = self.space.positions(np.asarray(self.vertices))
        D = self.space.pairwise(P, P)
        return float(D[0, 1]), float(D[0, 2]), float(D[1, 2])


def short_triangle(space, x, y, z, sides=None, h: float = 0.0, tol: float = 1e-9) -> ShortTriangle:
    """Triangle on ``x, y, z``; geodesic sides unless explicit polylines are given."""
    verts = (x, y, z)
    if sides is None:
        sides = tuple(space.geodesic(verts[i], verts[j]) for i, j in SIDES)
    tri = ShortTriangle(space, verts, tuple(sides), h)
    d = tri.vertex_distances()
    for k, poly in enumerate(tri.sides):
        if poly.length > d[k] + h + tol * max(1.0, d[k]):
            raise NotHShort(f"side {SIDES[k]} has length {poly.length} > {d[k]} + {h}")
    return tri


@dataclass(frozen=True, eq=False)
class DefectReport:
    defect: float
    worst: tuple  # (side_a, arclength_a, side_b, arclength_b)
    samples: int  # per side
    pairs: int
    C: float | None = None
    comparison: object = field(default=None, repr=False)

    @property
    def passed(self):
        return None if self.C is None else self.defect <= self.C + 1e-9

    def to_json(self) -> dict:
        return {"defect": self.defect, "worst": list(self.worst), "samples": self.samples,
                "pairs": self.pairs, "C": self.C, "passed": self.passed}


def rcat_triangle_defect(space, tri: ShortTriangle, samples: int = 33,
                         params: HParams = HParams(), C: float | None = None,
                         check_h: bool = True) -> DefectReport:
    """Sup of ``d(u, v) - |u' - v'|`` over sampled cross-side pairs.

    Samples are arclength-uniform per side with both endpoints included,
    so refining ``samples`` from k to 2k - 1 only adds pairs.
    """
    if samples < 2:
        raise ValueError("need at least 2 samples per side")
    d12, d13, d23 = tri.vertex_distances()
    if check_h:
        H = h_threshold(d12, d13, d23, params)
        if tri.h > H + 1e-12:
            raise HTooLarge(f"h={tri.h} exceeds threshold {H}")
    comp = comparison_triangle(d12, d13, d23)
    pos, bar, arc = [], [], []
    for (i, j), poly in zip(SIDES, tri.sides):
        s = np.linspace(0.0, poly.length, samples)
        pos.append(space.sample(poly, s))
        frac = comparison_fraction(s, poly.length - s)
        a, b = comp.vertices[i], comp.vertices[j]
        bar.append(a + frac[:, None] * (b - a))
        arc.append(s)
    best = -math.inf
    worst = None
    pairs = 0
    for ka, kb in ((0, 1), (0, 2), (1, 2)):
        D = space.pairwise(pos[ka], pos[kb])
        diff = bar[ka][:, None, :] - bar[kb][None, :, :]
        E = np.hypot(diff[..., 0], diff[..., 1])
        gap = D - E
        idx = np.unravel_index(int(np.argmax(gap)), gap.shape)
        pairs += gap.size
        if gap[idx] > best:
            best = float(gap[idx])
            worst = (ka, float(arc[ka][idx[0]]), kb, float(arc[kb][idx[1]]))
    return DefectReport(best, worst, samples, pairs, C, comp)


@dataclass(frozen=True, eq=False)
class SpaceDefect:
    defect: float
    witness: tuple  # vertex triple
    report: DefectReport
    triangles: int

    def to_json(self) -> dict:
        return {"defect": self.defect,
                "witness": [w if isinstance(w, (int, str)) else list(map(float, w)) for w in self.witness],
                "triangles": self.triangles, "report": self.report.to_json()}


def _triples(n: int, budget: int, rng):
    total = n * (n - 1) * (n - 2) // 6
    if budget >= total:
        return list(itertools.combinations(range(n), 3))
    seen, out = set(), []
    while len(out) < budget:
        t = tuple(sorted(rng.choice(n, size=3, replace=False).tolist()))
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def rcat_space_defect(space, budget: int, params: HParams = HParams(), samples: int = 17,
                      points=None, seed: int = 0) -> SpaceDefect:
    """Largest sampled triangle defect over ``budget`` vertex triples with geodesic sides.

    For a :class:`GraphSpace` triples are drawn from its vertices; for a
    :class:`PlaneSpace` from ``points``.  Geodesic sides are 0-short and so
    qualify for every threshold.
    """
    if budget <= 0:
        raise BudgetZero("triangle budget must be positive")
    rng = np.random.default_rng(seed)
    if isinstance(space, GraphSpace):
        labels = list(range(space.vertices))
    else:
        if points is None:
            raise ValueError("planar spaces need a point list")
        labels = [np.asarray(p, float) for p in points]
    best = None
    triples = _triples(len(labels), budget, rng)
    for t in triples:
        tri = short_triangle(space, *(labels[i] for i in t))
        rep = rcat_triangle_defect(space, tri, samples, params, check_h=False)
        if best is None or rep.defect > best[0]:
            best = (rep.defect, tuple(labels[i] for i in t), rep)
    return SpaceDefect(best[0], best[1], best[2], len(triples))


@dataclass(frozen=True)
class ForwardCheck:
    """Defect of one triangle pair against the subembedding constant of (x, u, y, z, v)."""

    gap: float  # d(u, v) - |u' - v'|
    C5: float  # minimal constant of the ordered 5-tuple
    bound: float  # C5 + 2 sqrt(3 eps)
    passed: bool
    sharp_passed: bool  # gap <= C5 (valid for geodesic sides)


def forward_check(space, tri: ShortTriangle, report: DefectReport, eps: float = 1.0,
                  tol: float = 1e-6, **search) -> ForwardCheck:
    """Check the worst pair of ``report`` against its five-point subembedding constant.

    The pair's sides share a vertex ``x``; with ``u`` on ``[x, y]`` and ``v``
    on ``[x, z]`` the ordered tuple ``(x, u, y, z, v)`` is searched.
    """
    from .subembedding import minimal_defect_ordered

    ka, sa, kb, sb = report.worst
    (a0, a1), (b0, b1) = SIDES[ka], SIDES[kb]
    shared = ({a0, a1} & {b0, b1}).pop()
    polys = [tri.sides[ka], tri.sides[kb]]
    arcs = [sa, sb]
    # orient both sides to start at the shared vertex
    for idx, (p0, p1) in enumerate(((a0, a1), (b0, b1))):
        if p0 != shared:
            polys[idx] = polys[idx].reversed()
            arcs[idx] = polys[idx].length - arcs[idx]
    y = a1 if a0 == shared else a0
    z = b1 if b0 == shared else b0
    V = space.positions(np.asarray(tri.vertices))
    u = space.sample(polys[0], [arcs[0]])
    v = space.sample(polys[1], [arcs[1]])
    pts = np.vstack([V[shared:shared + 1], u, V[y:y + 1], V[z:z + 1], v])
    table = space.pairwise(pts, pts)
    table = 0.5 * (table + table.T)
    np.fill_diagonal(table, 0.0)
    C5 = minimal_defect_ordered(table, **search).C
    bound = C5 + 2.0 * math.sqrt(3.0 * eps)
    return ForwardCheck(report.defect, C5, bound, report.defect <= bound + tol,
                        report.defect <= C5 + tol)
