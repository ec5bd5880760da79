"""Finite stand-ins for limits of spaces.

A :class:`SpaceSequence` produces graphs ``X_m`` for a list of ``m``; the
checks below compare five-point defects along the sequence with those of a
target space, and tabulate how defects evolve (e.g. as a square net is
refined).  Nothing here proves a limit statement; reports only contain
values that were actually computed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetZero, GeneratorMismatch
from .metric_core import (FiniteMetric, GraphSpace, cycle_graph, path_metric, random_tree,
                          square_net, tuple_distances)
from .rcat_certify import rcat_space_defect
from .subembedding import minimal_defect_set

FAMILIES = ("square_net", "tree", "cycle", "scaled")
FORWARD_GAP = 2.0 * math.sqrt(3.0)


def limit_constant(C: float, eps: float = 1.0) -> float:
    """Rough CAT(0) constant ``3 C + 2 sqrt(3 eps)`` inherited by five-point limits."""
    return 3.0 * C + 2.0 * math.sqrt(3.0 * eps)


def _base_space(family: str, params: dict, m) -> GraphSpace:
    if family == "square_net":
        return square_net(1.0 / m, radius=params.get("radius", 0.3), side=params.get("side", 1.0))
    if family == "tree":
        rng = np.random.default_rng(params.get("seed", 0))
        return random_tree(params.get("n", 30), rng, params.get("low", 0.1), params.get("high", 1.0))
    if family == "cycle":
        return cycle_graph(params.get("edges", 12), params.get("circumference", 4.0))
    raise GeneratorMismatch(f"unknown family {family!r}")


@dataclass(frozen=True, eq=False)
class SpaceSequence:
    """Graphs ``X_m`` for ``m`` in ``ms``, from a named family.

    ``square_net`` uses spacing ``1/m`` with a fixed edge radius, so the
    path metric converges to the Euclidean one.  ``tree`` and ``cycle`` are
    constant sequences.  ``scaled`` divides the space described by
    ``params["base"]`` (a ``{"family", "params", "m"}`` dict) by ``m``.
    """

    family: str
    params: dict = field(default_factory=dict)
    ms: tuple = (1, 2)
    C: tuple | None = None  # declared constant per m

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GeneratorMismatch(f"unknown family {self.family!r}")
        object.__setattr__(self, "ms", tuple(self.ms))
        if len(self.ms) < 2:
            raise GeneratorMismatch("a sequence needs at least two spaces")
        if self.C is not None and len(self.C) != len(self.ms):
            raise GeneratorMismatch("one declared constant per space")
        object.__setattr__(self, "_cache", {})

    def space(self, m) -> GraphSpace:
        cache = self._cache
        if m not in cache:
            if self.family == "scaled":
                b = self.params["base"]
                sp = _base_space(b["family"], b.get("params", {}), b.get("m", 1)).scaled(1.0 / m)
            else:
                sp = _base_space(self.family, self.params, m)
            cache[m] = (sp, path_metric(sp))
        return cache[m][0]

    def metric(self, m) -> FiniteMetric:
        self.space(m)
        return self._cache[m][1]

    def spaces(self):
        return [(m, self.space(m)) for m in self.ms]

    def correspond(self, m, points) -> list:
        """Vertex indices of ``X_m`` matching target specs.

        Coordinates are snapped to the nearest vertex (nets); integers are
        vertex ids and are passed through.
        """
        sp = self.space(m)
        pts = np.asarray(points)
        if pts.ndim == 2:
            if sp.coords is None:
                raise GeneratorMismatch(f"{self.family} spaces have no coordinates")
            return [int(np.argmin(np.hypot(*(sp.coords - p).T))) for p in pts.astype(float)]
        idx = [int(i) for i in pts]
        if any(not 0 <= i < sp.vertices for i in idx):
            raise GeneratorMismatch(f"vertex id outside 0..{sp.vertices - 1}")
        return idx

    def to_json(self) -> dict:
        return {"family": self.family, "params": self.params, "ms": list(self.ms),
                "C": None if self.C is None else list(self.C)}

    @classmethod
    def from_json(cls, obj: dict) -> "SpaceSequence":
        C = obj.get("C")
        return cls(obj["family"], obj.get("params", {}), tuple(obj["ms"]),
                   None if C is None else tuple(C))


def lattice_targets(count: int, seed: int = 0, spacing: float = 0.2, side: float = 1.0,
                    size: int = 5) -> list:
    """Random ``size``-subsets of a coarse lattice, shared by every finer net."""
    k = int(round(side / spacing)) + 1
    grid = np.array([[i * spacing, j * spacing] for i in range(k) for j in range(k)])
    rng = np.random.default_rng(seed)
    return [grid[rng.choice(len(grid), size, replace=False)] for _ in range(count)]


@dataclass(frozen=True)
class LimitReport:
    eps: float
    trials: list  # dicts: indices, target, per_m {m: [max error, defect]}, bound, ok
    limit_constant: float | None

    @property
    def passed(self) -> bool:
        return all(t["ok"] for t in self.trials if t["ok"] is not None)

    def to_json(self) -> dict:
        return {"eps": self.eps, "trials": self.trials, "limit_constant": self.limit_constant,
                "passed": self.passed}


def five_point_limit_check(seq: SpaceSequence, target: FiniteMetric, points, eps: float,
                           trials: int = 5, seed: int = 0, **search) -> LimitReport:
    """Compare five-point defects of a target with those of approximating spaces.

    ``points[i]`` names the counterpart of target point ``i`` in each
    ``X_m`` (see :meth:`SpaceSequence.correspond`).  For each sampled
    5-subset, a space qualifies when every distance is within ``eps`` of the
    target's; the report records whether the target defect is at most the
    smallest qualifying defect plus ``2 eps``.  Trials with no qualifying
    space have ``ok = None``.
    """
    if len(points) != target.n:
        raise GeneratorMismatch(f"{len(points)} correspondences for {target.n} target points")
    if trials <= 0:
        raise BudgetZero("need at least one trial")
    corr = {m: seq.correspond(m, points) for m in seq.ms}
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(trials):
        idx = sorted(rng.choice(target.n, 5, replace=False).tolist())
        Ct = minimal_defect_set(target, idx, **search).C
        T = tuple_distances(target, idx).table
        per_m = {}
        for m in seq.ms:
            mi = [corr[m][i] for i in idx]
            Tm = tuple_distances(seq.metric(m), mi).table
            err = float(np.abs(T - Tm).max())
            Cm = minimal_defect_set(seq.metric(m), mi, **search).C if err < eps else None
            per_m[m] = [err, Cm]
        qual = [c for _, c in per_m.values() if c is not None]
        bound = min(qual) + 2 * eps if qual else None
        ok = None if bound is None else Ct <= bound + 1e-9
        out.append({"indices": idx, "target": Ct, "per_m": per_m, "bound": bound, "ok": ok})
    lc = None if seq.C is None else limit_constant(max(seq.C))
    return LimitReport(eps, out, lc)


@dataclass(frozen=True)
class TrendReport:
    family: str
    ms: tuple
    defect5: tuple
    rcat: tuple  # nan when not measured
    bound: tuple  # defect5 + 2 sqrt 3, the forward-direction ceiling for rcat
    declared: tuple | None
    witnesses: tuple = field(repr=False, default=())

    @property
    def strictly_decreasing(self) -> bool:
        d = self.defect5
        return all(a > b for a, b in zip(d, d[1:]))

    @property
    def forward_ok(self) -> bool:
        return all(not r > b + 1e-3 for r, b in zip(self.rcat, self.bound))

    @property
    def declared_ok(self) -> bool:
        if self.declared is None:
            return True
        return all(d <= 3 * c + 1e-6 for d, c in zip(self.defect5, self.declared))

    @property
    def passed(self) -> bool:
        return self.forward_ok and self.declared_ok

    def fit(self):
        """Least-squares slope of log(defect5) against log(m), over positive defects."""
        pts = [(math.log(m), math.log(d)) for m, d in zip(self.ms, self.defect5) if d > 1e-12 and m > 0]
        if len(pts) < 2:
            return None
        x, y = np.array(pts).T
        slope, intercept = np.polyfit(x, y, 1)
        return {"slope": float(slope), "intercept": float(intercept), "points": len(pts)}

    def to_json(self) -> dict:
        return {"family": self.family, "ms": list(self.ms), "defect5": list(self.defect5),
                "rcat_defect": [None if math.isnan(r) else r for r in self.rcat],
                "bound": list(self.bound), "declared": None if self.declared is None else list(self.declared),
                "strictly_decreasing": self.strictly_decreasing, "fit": self.fit(),
                "forward_ok": self.forward_ok, "declared_ok": self.declared_ok, "passed": self.passed}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "defect5", "rcat_defect", "bound"])
        for row in zip(self.ms, self.defect5, self.rcat, self.bound):
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()


def defect_trend(seq: SpaceSequence, tuples: int, targets=None, seed: int = 0,
                 rcat_budget: int = 0, rcat_samples: int = 9, **search) -> TrendReport:
    """Set-level five-point defect (max over sampled 5-sets) for each space of the sequence.

    ``targets`` is a list of 5-point specs mapped into every ``X_m``; when
    omitted, ``tuples`` random vertex 5-sets are drawn with the same seed
    for each ``m``.  With ``rcat_budget > 0`` the sampled triangle defect
    is measured as well and compared with ``defect5 + 2 sqrt 3``.
    """
    if tuples <= 0:
        raise BudgetZero("need at least one tuple per space")
    d5, rc, bd, wit = [], [], [], []
    for m in seq.ms:
        sp, met = seq.space(m), seq.metric(m)
        if targets is not None:
            sets = [seq.correspond(m, t) for t in targets[:tuples]]
        else:
            rng = np.random.default_rng(seed)
            sets = [sorted(rng.choice(sp.vertices, 5, replace=False).tolist()) for _ in range(tuples)]
        best, arg = -math.inf, None
        for s in sets:
            if len(set(s)) < len(s):
                # snapped targets can coincide; repeated points reduce the tuple
                s = list(dict.fromkeys(s))
                if len(s) < 4:
                    continue
            r = minimal_defect_set(met, s, n=len(s), **search)
            if r.C > best:
                best, arg = r.C, r.worst_ordering
        best = max(best, 0.0)
        d5.append(float(best))
        wit.append(arg)
        rc.append(float(rcat_space_defect(sp, rcat_budget, samples=rcat_samples, seed=seed).defect)
                  if rcat_budget > 0 else math.nan)
        bd.append(float(best + FORWARD_GAP))
    return TrendReport(seq.family, seq.ms, tuple(d5), tuple(rc), tuple(bd), seq.C, tuple(wit))
