"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines go straight to
the terminal so they appear even when the test passes.
"""

import itertools
import math
import time

import numpy as np
import pytest

from generators import (glued_points, glued_squares, hshort_polyline, lemma32_instance, planar_table,
                        random_gluing, random_metric, random_ngon)
from roughcat.experiments import SpaceSequence, defect_trend, lattice_targets
from roughcat.metric_core import (PlaneSpace, cycle_graph, path_metric, random_tree, square_net,
                                  tuple_distances, validate_metric)
from roughcat.plane_geometry import (deviation_bound, lemma32_check, parallelogram_point,
                                     short_segment_projection)
from roughcat.polygon_gluing import build_ngon_embedding, convexity_check, glued_distance, verify_An
from roughcat.rcat_certify import rcat_space_defect
from roughcat.subembedding import brute_force_oracle, minimal_defect_ordered, minimal_defect_set

FORWARD_GAP = 2 * math.sqrt(3)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} | {detail}")
    return emit


def oracle_corpus():
    """52 ordered tuples: 13 each from the plane, trees, cycles and random metrics, n = 4 and 5."""
    rng = np.random.default_rng(2024)
    tree = path_metric(random_tree(30, rng))
    cycle = path_metric(cycle_graph(12, 4.0))
    out = []
    for k in range(13):
        n = 4 + k % 2
        out.append(("plane", planar_table(rng.random((n, 2)))))
        out.append(("tree", tuple_distances(tree, rng.choice(30, n, replace=False)).table))
        out.append(("cycle", tuple_distances(cycle, rng.choice(12, n, replace=False)).table))
        out.append(("random", random_metric(rng, n)))
    return out


def test_1_oracle_agreement(report):
    t0 = time.time()
    worst, bad = 0.0, []
    corpus = oracle_corpus()
    for family, T in corpus:
        opt = minimal_defect_ordered(T).C
        orc = brute_force_oracle(T)
        gap = abs(opt - orc.C)
        worst = max(worst, gap)
        if gap > max(1e-6, orc.grid_error):
            bad.append((family, opt, orc.C, orc.grid_error))
    elapsed = time.time() - t0
    ok = not bad and elapsed <= 60 and len(corpus) >= 50
    report(1, ok, f"{len(corpus)} tuples, max |search - oracle| = {worst:.2e}, "
                  f"{len(bad)} disagreements, {elapsed:.1f} s (limit 60 s)")
    assert not bad, bad[:3]
    assert elapsed <= 60


def test_2_forced_values(report, c4, star_tuple):
    T = c4.dist
    cyclic = minimal_defect_ordered(T).C
    cross = minimal_defect_ordered(T[np.ix_([0, 1, 3, 2], [0, 1, 3, 2])]).C
    star = minimal_defect_ordered(star_tuple)
    r3 = star.certificate.config.radii[1]
    ok = (abs(cyclic - 2.0) <= 1e-6 and cross <= 1e-6 and star.C <= 1e-6
          and abs(r3 - math.sqrt(3)) <= 1e-4)
    report(2, ok, f"C4 cyclic {cyclic:.9f}, C4 crossing {cross:.2e}, star {star.C:.2e} at r3 = {r3:.8f}")
    assert ok


def test_3_cat0_witnesses(report):
    rng = np.random.default_rng(7)
    t0 = time.time()
    plane = 0.0
    for _ in range(1000):
        m = validate_metric(planar_table(rng.random((5, 2))), tol=1e-9)
        plane = max(plane, minimal_defect_set(m, range(5)).C)
    tree = 0.0
    for _ in range(10):
        met = path_metric(random_tree(40, rng))
        for _ in range(100):
            tree = max(tree, minimal_defect_set(met, rng.choice(40, 5, replace=False)).C)
    elapsed = time.time() - t0
    ok = plane <= 1e-6 and tree <= 1e-6 and elapsed <= 120
    report(3, ok, f"1000 planar sets max {plane:.2e}, 1000 tree sets max {tree:.2e}, "
                  f"{elapsed:.1f} s (limit 120 s)")
    assert plane <= 1e-6 and tree <= 1e-6
    assert elapsed <= 120


def test_4_lemma_suites(report):
    rng = np.random.default_rng(11)
    v31 = 0
    for _ in range(10_000):
        path, x, y, h = hshort_polyline(rng)
        l = float(np.hypot(*y))
        eps = h * max(1.0, l)
        rep = short_segment_projection(path, x, y, h, eps=eps if eps <= 1 else None)
        assert math.isclose(rep.bound, deviation_bound(l, h), rel_tol=1e-12)
        v31 += not rep.ok
    v32 = {}
    for eps in (0.01, 0.25, 1.0):
        v32[eps] = sum(not lemma32_check(lemma32_instance(rng, eps, exact=k % 4 == 0)).passed
                       for k in range(100_000))
    par = 0.0
    for _ in range(100_000):
        x, y, z = rng.uniform(-10, 10, (3, 2))
        _, lhs, rhs = parallelogram_point(x, y, z, rng.random())
        par = max(par, abs(lhs - rhs) / max(1.0, lhs))
    ok = v31 == 0 and not any(v32.values()) and par <= 1e-9
    report(4, ok, f"projection violations {v31}/10^4, comparison-lemma violations "
                  f"{sum(v32.values())}/3x10^5, parallelogram max rel. error {par:.1e}")
    assert ok


def test_5_forward_consistency(report):
    rng = np.random.default_rng(5)
    corpus = {
        "tree": random_tree(40, rng),
        "net 0.1": square_net(0.1),
        "cycle": cycle_graph(24, 4.0),
        "cycle long": cycle_graph(40, 10.0),
    }
    rows, ok = [], True
    for name, g in corpus.items():
        met = path_metric(g)
        d5 = max(minimal_defect_set(met, rng.choice(g.vertices, 5, replace=False), restarts=4).C
                 for _ in range(6))
        rc = rcat_space_defect(g, 100, samples=17).defect
        good = rc <= d5 + FORWARD_GAP + 1e-3
        ok &= good
        rows.append(f"{name}: rcat {rc:.4f} <= {d5:.4f} + 2sqrt3 {'ok' if good else 'VIOLATED'}")
    report(5, ok, "; ".join(rows))
    assert ok


def test_6_construction(report):
    rng = np.random.default_rng(6)
    failures, worst_side, worst_diag = [], 0.0, -np.inf
    cases = []
    for k in range(20):
        cases.append(("plane", PlaneSpace(), list(random_ngon(rng, int(rng.integers(3, 8)), k % 2 == 0))))
    g = glued_squares()
    for k in range(20):
        cases.append(("glued", g, glued_points(rng, g, int(rng.integers(3, 8)))))
    for family, space, verts in cases:
        emb = build_ngon_embedding(space, verts, C_prime=0.0)
        Q = emb.polygon.vertices
        U = space.positions(np.asarray(verts))
        D = space.pairwise(U, U)
        n = len(verts)
        side = np.abs(emb.polygon.side_lengths - D[np.arange(n), (np.arange(n) + 1) % n]).max()
        diag = (D[0] - np.hypot(*(Q - Q[0]).T)).max()
        worst_side, worst_diag = max(worst_side, side), max(worst_diag, diag)
        an = verify_An(emb.descriptor, emb.C_n)
        if not (convexity_check(Q) and side <= 1e-6 and diag <= 1e-6 and an.passed):
            failures.append((family, n))
    ok = not failures
    report(6, ok, f"40 n-gons (20 plane, 20 glued squares), max side error {worst_side:.1e}, "
                  f"max diagonal excess {worst_diag:.1e}, failures {failures}")
    assert ok


def _dense_min(a, b, S):
    """Two-level dense sampling of |a - s| + |s - b| over s in S."""
    t = np.linspace(0.0, 1.0, 10_001)
    e = S[1] - S[0]
    f = lambda t: np.hypot(*(S[0] + t[:, None] * e - a).T) + np.hypot(*(S[0] + t[:, None] * e - b).T)
    v = f(t)
    i = int(np.argmin(v))
    lo, hi = t[max(i - 1, 0)], t[min(i + 1, len(t) - 1)]
    return min(v[i], f(np.linspace(lo, hi, 10_001)).min())


def test_7_gluing_oracle(report):
    rng = np.random.default_rng(7)
    worst, tri_worst = 0.0, -np.inf
    for _ in range(10):
        g = random_gluing(rng)
        for _ in range(1000):
            a = rng.dirichlet(np.ones(g.q1.n)) @ g.q1.vertices
            b = rng.dirichlet(np.ones(g.q2.n)) @ g.q2.vertices
            worst = max(worst, abs(glued_distance(g, a, b) - _dense_min(a, b, g.s)))
            P = np.array(glued_points(rng, g, 3))
            D = g.pairwise(P, P)
            for i, j, k in itertools.permutations(range(3)):
                tri_worst = max(tri_worst, D[i, j] - D[i, k] - D[k, j])
    ok = worst <= 1e-6 and tri_worst <= 1e-12
    report(7, ok, f"10^4 pairs over 10 gluings, max |closed form - dense| = {worst:.1e}; "
                  f"10^4 triples, max triangle excess {tri_worst:.1e}")
    assert ok


def test_8_limit_trend(report):
    t0 = time.time()
    targets = lattice_targets(12, seed=0)
    seq = SpaceSequence("square_net", {"radius": 0.3}, (5, 10, 20))
    rep = defect_trend(seq, len(targets), targets=targets)
    base = {"family": "cycle", "params": {"edges": 12, "circumference": 4.0}, "m": 1}
    scaled = SpaceSequence("scaled", {"base": base}, (1, 2, 3, 7))
    idx = [0, 2, 5, 7, 10]
    C = [minimal_defect_set(scaled.metric(m), idx, restarts=4).C for m in scaled.ms]
    rel = max(abs(c * m - C[0]) / C[0] for m, c in zip(scaled.ms, C))
    elapsed = time.time() - t0
    ok = rep.strictly_decreasing and rel <= 1e-9 and elapsed <= 300
    series = ", ".join(f"{1 / m:g}: {d:.5f}" for m, d in zip(rep.ms, rep.defect5))
    report(8, ok, f"net defects by spacing {series}; scaled relative error {rel:.1e}; "
                  f"{elapsed:.1f} s (limit 300 s)")
    assert ok
