import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from generators import hshort_polyline, lemma32_instance
from roughcat.errors import (HypothesisViolated, LengthsShorterThanSide, NotHShort, RatioOutOfRange,
                             TriangleInequalityViolation, ZeroBaseSegment)
from roughcat.plane_geometry import (Lemma32Instance, canonical_pose, comparison_point, comparison_triangle,
                                     deviation_bound, lemma32_check, parallelogram_point,
                                     short_segment_projection)

lengths = st.floats(0, 50, allow_nan=False)
unit = st.floats(0, 1)
coords = st.tuples(st.floats(-20, 20), st.floats(-20, 20))


@pytest.mark.parametrize("sides, expected", [
    ((3, 4, 5), [[0, 0], [3, 0], [0, 4]]),
    ((1, 2, 1), [[0, 0], [1, 0], [2, 0]]),
    ((1, 1, 1), [[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]]),
])
def test_comparison_triangle_examples(sides, expected):
    np.testing.assert_allclose(comparison_triangle(*sides).vertices, expected, atol=1e-12)


def test_comparison_triangle_rejects_bad_lengths():
    with pytest.raises(TriangleInequalityViolation):
        comparison_triangle(1, 1, 3)
    with pytest.raises(TriangleInequalityViolation):
        comparison_triangle(-1, 1, 1)


def test_comparison_triangle_tiny_flat_base():
    # c rounds to slightly more than a + b; the apex must stay on the circle of radius b
    a, b = 1e-12, 1.0
    tri = comparison_triangle(a, b, abs(a - b) + (a + b - abs(a - b)))
    np.testing.assert_allclose(tri.vertices[2], [-1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(tri.measured_sides(), (a, b, a + b), atol=1e-15)


@given(lengths, lengths, unit)
def test_comparison_triangle_sides(a, b, r):
    c = abs(a - b) + r * (a + b - abs(a - b))
    tri = comparison_triangle(a, b, c)
    np.testing.assert_allclose(tri.measured_sides(), (a, b, c), atol=1e-9 * max(1, a, b))
    assert tri.vertices[1, 1] == 0 and tri.vertices[1, 0] >= 0 and tri.vertices[2, 1] >= 0


def test_comparison_point_proportional():
    tri = comparison_triangle(4.5, 3, 3)
    u = comparison_point(tri, (0, 1), 2, 3)
    np.testing.assert_allclose(u, [1.8, 0])
    assert 1.8 <= 2 and 4.5 - 1.8 <= 3


def test_comparison_point_geodesic_and_endpoint():
    tri = comparison_triangle(3, 4, 5)
    np.testing.assert_allclose(comparison_point(tri, (0, 2), 1.5, 2.5), [0, 1.5])
    np.testing.assert_allclose(comparison_point(tri, (1, 2), 0, 5), tri.vertices[1])
    with pytest.raises(LengthsShorterThanSide):
        comparison_point(tri, (0, 1), 1, 1)


@given(st.floats(0.01, 20), st.floats(0, 1), st.floats(0, 5))
def test_comparison_point_inequalities(L, frac, h):
    tri = comparison_triangle(L, L, L)
    before = frac * (L + h)
    after = L + h - before
    u = comparison_point(tri, (0, 1), before, after)
    assert np.hypot(*u) <= before + 1e-9
    assert np.hypot(*(tri.vertices[1] - u)) <= after + 1e-9


def test_parallelogram_examples():
    w, lhs, rhs = parallelogram_point((0, 1), (0, 0), (1, 0), 0.5)
    np.testing.assert_allclose(w, [0.5, 0])
    assert lhs == pytest.approx(1.25) and rhs == pytest.approx(1.25)
    w, lhs, rhs = parallelogram_point((2, 3), (1, 1), (5, -1), 0.0)
    np.testing.assert_array_equal(w, [1, 1])
    assert lhs == rhs == 5
    w, lhs, rhs = parallelogram_point((2, 3), (1, 1), (5, -1), 1.0)
    np.testing.assert_array_equal(w, [5, -1])
    assert lhs == pytest.approx(25) and rhs == pytest.approx(25)
    with pytest.raises(RatioOutOfRange):
        parallelogram_point((0, 0), (1, 0), (0, 1), 1.5)


@given(coords, coords, coords, unit)
def test_parallelogram_identity(x, y, z, r):
    _, lhs, rhs = parallelogram_point(x, y, z, r)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, lhs)


def test_projection_straight_segment():
    rep = short_segment_projection([[0, 0], [0.5, 0], [1, 0]], (0, 0), (1, 0), 0.0)
    assert rep.max_deviation == 0.0 and rep.ok


def test_deviation_bound_value():
    assert deviation_bound(1, 1) == pytest.approx(math.sqrt(3) / 2)


def test_projection_apex_attains_bound():
    path = [[0, 0], [0.5, 0.2], [1, 0]]
    h = 2 * math.sqrt(0.29) - 1
    rep = short_segment_projection(path, (0, 0), (1, 0), h)
    assert rep.bound == pytest.approx(0.2, abs=1e-12)
    assert rep.max_deviation == pytest.approx(0.2, abs=1e-12)
    assert rep.ok


def test_projection_errors():
    with pytest.raises(ZeroBaseSegment):
        short_segment_projection([[0, 0], [1, 1], [0, 0]], (0, 0), (0, 0), 5)
    with pytest.raises(NotHShort):
        short_segment_projection([[0, 0], [0.5, 1], [1, 0]], (0, 0), (1, 0), 0.1)


def test_projection_eps_specialisation():
    # h = eps / max(1, l) triggers the sqrt(3 eps) / 2 check
    eps, l = 0.25, 2.0
    h = eps / l
    rep = short_segment_projection([[0, 0], [1, 0.3], [2, 0]], (0, 0), (l, 0),
                                   h + 1, eps=None)
    assert rep.eps_bound is None
    a = math.sqrt(((l + h) / 2) ** 2 - 1)
    rep = short_segment_projection([[0, 0], [1, a], [2, 0]], (0, 0), (l, 0), h, eps=eps)
    assert rep.eps_bound == pytest.approx(math.sqrt(3 * eps) / 2)
    assert rep.ok


@given(st.integers(0, 2 ** 31 - 1))
def test_projection_inequalities_random(seed):
    path, x, y, h = hshort_polyline(np.random.default_rng(seed))
    l = float(np.hypot(*y))
    rep = short_segment_projection(path, x, y, h, eps=h * max(1.0, l) if h * max(1, l) <= 1 else None)
    assert rep.ok, (rep.slack_x, rep.slack_y, rep.slack_bound)


def test_lemma32_identical_triangles():
    x = np.array([[0, 0], [2, 0], [0.5, 1.5]], float)
    for s, t in [(0.3, 0.8), (1, 1), (0.5, 0)]:
        res = lemma32_check(Lemma32Instance(x, x.copy(), s, t, 1.0))
        assert res.d <= 1e-12 and res.passed


def test_lemma32_zero_ratios():
    rng = np.random.default_rng(0)
    inst = lemma32_instance(rng, 0.25)
    inst = Lemma32Instance(inst.x, inst.xp, 0.0, 0.0, 0.25)
    assert lemma32_check(inst).d == 0.0


def test_lemma32_hypotheses():
    x = np.array([[0, 0], [2, 0], [0.5, 1.5]], float)
    with pytest.raises(HypothesisViolated) as info:
        lemma32_check(Lemma32Instance(x, x * 0.5, 0.5, 0.5, 1.0))
    assert info.value.which == "base"
    with pytest.raises(HypothesisViolated):
        lemma32_check(Lemma32Instance(x, x, 1.5, 0.5, 1.0))
    with pytest.raises(HypothesisViolated):
        lemma32_check(Lemma32Instance(x, x, 0.5, 0.5, 2.0))


@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([0.01, 0.25, 1.0]), st.booleans())
def test_lemma32_random(seed, eps, exact):
    res = lemma32_check(lemma32_instance(np.random.default_rng(seed), eps, exact))
    assert res.passed
    assert res.expansion_error <= 1e-9


def test_canonical_pose():
    P = canonical_pose([[1, 1], [1, 3], [0, 2]])
    np.testing.assert_allclose(P, [[0, 0], [2, 0], [1, 1]], atol=1e-12)
