import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from generators import planar_table, random_metric
from roughcat.errors import ChainMismatch, FanTriangleInfeasible, TooLarge, TooManyOrderings
from roughcat.metric_core import path_metric, random_tree, tuple_distances, validate_metric
from roughcat.subembedding import (ChainConfig, brute_force_oracle, fold_patterns, minimal_defect_ordered,
                                   minimal_defect_set, orderings, realize_chain, subembedding_slack)

C4_CYCLIC = np.array([[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]], float)
C4_CROSSING = C4_CYCLIC[np.ix_([0, 1, 3, 2], [0, 1, 3, 2])]
SQ3 = math.sqrt(3)

seeds = st.integers(0, 2 ** 31 - 1)


def pairwise(P):
    return planar_table(P)


def test_realize_star(star_tuple):
    cfg = realize_chain(star_tuple, [SQ3], (1, -1))
    np.testing.assert_allclose(cfg.points, [[0, 0], [1, 0], [0, SQ3], [-1, 0]], atol=1e-12)
    D = pairwise(cfg.points)
    np.testing.assert_allclose([D[1, 2], D[2, 3], D[1, 3]], [2, 2, 2])


def test_realize_collinear():
    T = planar_table([[0, 0], [1, 0], [2, 0], [3, 0]])
    cfg = realize_chain(T, [2.0], (1, 1))
    np.testing.assert_allclose(cfg.points, [[0, 0], [1, 0], [2, 0], [3, 0]], atol=1e-12)


def test_realize_infeasible(star_tuple):
    with pytest.raises(FanTriangleInfeasible):
        realize_chain(star_tuple, [5.0], (1, 1))


@given(seeds, st.integers(4, 7))
def test_tight_fan_always_feasible(seed, n):
    rng = np.random.default_rng(seed)
    T = random_metric(rng, n)
    for folds in list(fold_patterns(n))[:4]:
        cfg = realize_chain(T, T[0, 2:n - 1], folds)
        D = pairwise(cfg.points)
        idx = np.arange(n)
        np.testing.assert_allclose(D[idx, idx - 1], T[idx, idx - 1], atol=1e-9)
        np.testing.assert_allclose(D[0], T[0], atol=1e-9)


def test_star_certificate_passes(star_tuple):
    cfg = realize_chain(star_tuple, [SQ3], (1, -1))
    cert = subembedding_slack(star_tuple, cfg, 0.0)
    assert cert.passed
    assert min(s for *_, s in cert.cond3) >= -1e-9 and cert.cond2.min() >= -1e-9


def test_c4_cyclic_forced_collinear():
    # |o1 - o3| >= 2 forces o3 opposite o1 with o2 = o4 in the middle
    cfg = ChainConfig(np.array([[0, 0], [1, 0], [2, 0], [1, 0]], float), np.array([1, 2, 1.0]), (1, 1))
    cert = subembedding_slack(C4_CYCLIC, cfg, 1.0)
    slack = {(i, j): s for i, j, s in cert.cond3}
    assert slack[(1, 3)] == pytest.approx(1.0 - 2.0)
    assert not cert.passed
    assert cert.achieved == 2.0


def test_slack_chain_mismatch(star_tuple):
    cfg = ChainConfig(np.zeros((4, 2)), np.zeros(3), (1, 1))
    with pytest.raises(ChainMismatch):
        subembedding_slack(star_tuple, cfg, 0.0)


def test_repeated_point_tuple():
    m = path_metric(random_tree(8, np.random.default_rng(1)))
    t = tuple_distances(m, [2, 2, 5, 7])
    res = minimal_defect_ordered(t)
    assert res.C <= 1e-12
    assert subembedding_slack(t, res.certificate.config, 0.0).passed


def test_c4_cyclic_value():
    res = minimal_defect_ordered(C4_CYCLIC)
    assert abs(res.C - 2.0) <= 1e-6
    assert res.certificate.passed


def test_c4_crossing_value():
    res = minimal_defect_ordered(C4_CROSSING)
    assert res.C <= 1e-6
    P = res.certificate.config.points
    # the listed certificate up to the reflection x -> -x
    listed = np.array([[0, 0], [-1, 0], [1, 0], [2, 0]], float)
    assert np.allclose(P, listed, atol=1e-6) or np.allclose(P * [-1, 1], listed, atol=1e-6)


def test_star_value(star_tuple):
    res = minimal_defect_ordered(star_tuple)
    assert res.C <= 1e-6
    assert abs(res.certificate.config.radii[1] - SQ3) <= 1e-4


def test_certificate_json(star_tuple):
    obj = minimal_defect_ordered(star_tuple).certificate.to_json()
    assert set(obj) == {"ordering", "C", "points", "slacks"}
    assert set(obj["slacks"]) == {"cond2", "cond3"}
    assert len(obj["points"]) == 4


def test_set_c4(c4):
    res = minimal_defect_set(c4, "abcd")
    assert abs(res.C - 2.0) <= 1e-6
    order = res.worst_ordering
    # cyclic orderings keep opposite points two steps apart
    assert {order[0], order[2]} in ({0, 2}, {1, 3})


def test_set_three_points():
    m = validate_metric(random_metric(np.random.default_rng(0), 3))
    assert minimal_defect_set(m, range(3)).C == 0.0


def test_set_tree_quadruples():
    m = path_metric(random_tree(20, np.random.default_rng(5)))
    rng = np.random.default_rng(6)
    for _ in range(10):
        assert minimal_defect_set(m, rng.choice(20, 4, replace=False)).C <= 1e-6


def test_orderings_count():
    assert len(list(orderings(range(5)))) == 60
    assert len(list(orderings(range(4)))) == 12


def test_too_many_orderings():
    m = validate_metric(random_metric(np.random.default_rng(0), 7))
    with pytest.raises(TooManyOrderings):
        minimal_defect_set(m, range(7))
    res = minimal_defect_set(m, range(7), sample=3)
    assert len(res.results) == 3


def test_size_limits():
    with pytest.raises(TooLarge):
        minimal_defect_ordered(random_metric(np.random.default_rng(0), 9))
    with pytest.raises(TooLarge):
        brute_force_oracle(random_metric(np.random.default_rng(0), 6))


def test_oracle_values(star_tuple):
    res = brute_force_oracle(C4_CYCLIC)
    assert abs(res.C - 2.0) <= max(1e-6, res.grid_error)
    star = brute_force_oracle(star_tuple)
    assert star.C <= max(1e-6, star.grid_error)
    assert abs(star.radii[1] - SQ3) <= 1e-3
    P = np.random.default_rng(2).random((4, 2))
    planar = brute_force_oracle(planar_table(P))
    assert planar.C <= max(1e-6, planar.grid_error)


@given(seeds)
def test_planar_tuples_embed(seed):
    P = np.random.default_rng(seed).normal(size=(5, 2))
    assert minimal_defect_ordered(planar_table(P)).C <= 1e-6


@given(seeds, st.floats(0.01, 100))
def test_scale_equivariance(seed, lam):
    T = random_metric(np.random.default_rng(seed), 5)
    a = minimal_defect_ordered(T).C
    b = minimal_defect_ordered(T * lam).C
    assert abs(b - lam * a) <= 1e-9 * max(1.0, lam * a)


@given(seeds)
def test_reversal_invariance(seed):
    T = random_metric(np.random.default_rng(seed), 5)
    rev = [0, 4, 3, 2, 1]
    a = minimal_defect_ordered(T).C
    b = minimal_defect_ordered(T[np.ix_(rev, rev)]).C
    assert abs(a - b) <= 1e-6


@given(seeds)
def test_repeating_last_point_never_increases(seed):
    T = random_metric(np.random.default_rng(seed), 4)
    idx = [0, 1, 2, 3, 3]
    assert minimal_defect_ordered(T[np.ix_(idx, idx)]).C <= minimal_defect_ordered(T).C + 1e-9


@given(seeds)
def test_optimizer_not_worse_than_oracle(seed):
    rng = np.random.default_rng(seed)
    T = random_metric(rng, 4)
    orc = brute_force_oracle(T)
    assert minimal_defect_ordered(T).C <= orc.C + max(1e-6, orc.grid_error)


def test_deterministic():
    T = random_metric(np.random.default_rng(11), 5)
    a = minimal_defect_ordered(T, seed=3).certificate.to_json()
    b = minimal_defect_ordered(T, seed=3).certificate.to_json()
    assert a == b
