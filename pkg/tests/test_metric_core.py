import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from roughcat.errors import (Asymmetry, DisconnectedGraph, IndexOutOfRange, MetricError, NegativeEntry,
                             NonFiniteEntry, NonzeroDiagonal, NotSquare, TriangleViolation)
from roughcat.metric_core import (GraphSpace, Polyline, cycle_graph, path_graph, path_metric,
                                  random_tree, square_net, star_graph, tuple_distances, validate_metric)


def test_two_point_metric():
    m = validate_metric([[0, 1], [1, 0]])
    assert m.n == 2 and m[0, 1] == 1.0


@pytest.mark.parametrize("table, err", [
    ([[0, 1], [2, 0]], Asymmetry),
    ([[0, -1], [-1, 0]], NegativeEntry),
    ([[1, 1], [1, 0]], NonzeroDiagonal),
    ([[0, np.inf], [np.inf, 0]], NonFiniteEntry),
    ([[0, 1, 2]], NotSquare),
])
def test_axiom_errors(table, err):
    with pytest.raises(err):
        validate_metric(table)


def test_triangle_violation_names_indices():
    with pytest.raises(TriangleViolation) as info:
        validate_metric([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    assert info.value.indices == (0, 2, 1)


def test_tolerance_is_relative_to_scale():
    D = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], float) * 1e6
    D[0, 2] = D[2, 0] = 2e6 + 1e-7
    validate_metric(D)
    D[0, 2] = D[2, 0] = 2e6 + 1e-3
    with pytest.raises(TriangleViolation):
        validate_metric(D)


def test_labels():
    m = validate_metric([[0, 1], [1, 0]], labels=["p", "q"])
    assert m.index("q") == 1 and m.index(0) == 0
    with pytest.raises(IndexOutOfRange):
        m.index(5)
    with pytest.raises(MetricError):
        validate_metric([[0, 1], [1, 0]], labels=["p"])


def test_path_graph():
    assert path_metric(path_graph(3))[0, 2] == 2.0


def test_four_cycle():
    d = path_metric(cycle_graph(4)).dist
    assert d[0, 2] == d[1, 3] == 2.0
    assert d[0, 1] == d[1, 2] == d[2, 3] == d[3, 0] == 1.0


def test_star():
    d = path_metric(star_graph(3)).dist
    assert d[1, 2] == 2.0 and d[0, 1] == 1.0


def test_disconnected():
    with pytest.raises(DisconnectedGraph):
        path_metric(GraphSpace.from_edges(3, [(0, 1, 1.0)]))


def test_bad_edges():
    with pytest.raises(MetricError):
        GraphSpace.from_edges(2, [(0, 1, 0.0)])
    with pytest.raises(IndexOutOfRange):
        GraphSpace.from_edges(2, [(0, 2, 1.0)])


def test_tuple_distances(c4):
    t = tuple_distances(c4, "abcd")
    np.testing.assert_array_equal(t.table, [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]])
    rep = tuple_distances(c4, ["a", "a"])
    np.testing.assert_array_equal(rep.table, np.zeros((2, 2)))
    assert rep.repeated == ((0, 1),)
    with pytest.raises(IndexOutOfRange):
        tuple_distances(c4, [0, 9])


def test_star_tuple(star_tuple):
    m = path_metric(star_graph(3))
    np.testing.assert_array_equal(tuple_distances(m, [0, 1, 2, 3]).table, star_tuple)


def test_geodesic_matches_metric():
    g = random_tree(25, np.random.default_rng(3))
    d = path_metric(g).dist
    for i, j in [(0, 24), (3, 17), (5, 5)]:
        poly = g.geodesic(i, j)
        assert poly.length == d[i, j]
        assert poly.start == i and poly.end == j


def test_graph_sampling_positions():
    g = path_graph(3, weight=2.0)
    poly = g.geodesic(0, 2)
    P = g.sample(poly, [0.0, 1.0, 2.0, 3.5, 4.0])
    D = g.pairwise(P, g.positions([0]))[:, 0]
    np.testing.assert_allclose(D, [0, 1, 2, 3.5, 4])


def test_edge_interior_distances():
    # points inside different edges of a cycle measure around the shorter way
    g = cycle_graph(4)
    P = g.sample(g.geodesic(0, 2), [0.5, 1.5])
    Q = g.sample(g.geodesic(0, 3), [0.25])
    np.testing.assert_allclose(g.pairwise(P, Q)[:, 0], [0.75, 1.75])


def test_scaled_graph():
    g = square_net(0.25)
    np.testing.assert_allclose(path_metric(g.scaled(0.5)).dist, 0.5 * path_metric(g).dist)


def test_json_round_trip(c4):
    obj = c4.to_json()
    assert obj["labels"] == list("abcd") and obj["n"] == 4
    g = cycle_graph(5)
    h = GraphSpace.from_edges(**{k: v for k, v in g.to_json().items()})
    np.testing.assert_array_equal(path_metric(h).dist, path_metric(g).dist)


def test_polyline_lengths():
    p = Polyline.planar([[0, 0], [3, 4], [3, 5]])
    assert p.length == 6.0
    assert p.is_h_short(np.hypot(3, 5), 6 - np.hypot(3, 5))
    assert p.reversed().start.tolist() == [3, 5]


@given(st.integers(3, 14), st.integers(0, 2 ** 31 - 1))
def test_path_metric_always_valid(n, seed):
    rng = np.random.default_rng(seed)
    edges = [(i, int(rng.integers(0, i)), float(rng.uniform(0.1, 2))) for i in range(1, n)]
    edges += [(int(a), int(b), float(rng.uniform(0.1, 2))) for a, b in rng.integers(0, n, (n, 2)) if a != b]
    m = path_metric(GraphSpace.from_edges(n, edges))
    validate_metric(m.dist)


@given(arrays(float, (6, 2), elements=st.floats(-10, 10)), st.permutations(range(6)))
def test_permuted_tuple_is_permuted_table(P, perm):
    D = np.hypot(*(P[:, None] - P[None]).transpose(2, 0, 1))
    m = validate_metric(D, tol=1e-9)
    np.testing.assert_array_equal(tuple_distances(m, perm).table, m.dist[np.ix_(perm, perm)])
