import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import segment_distance_grid
from ocdmst.exceptions import InputError
from ocdmst.geometry import distance_to_edge, distances_to_edges, euclidean, project_scalar

coord = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def triples(dim=st.integers(1, 8)):
    return dim.flatmap(lambda d: st.tuples(*(arrays(np.float64, d, elements=coord)
                                             for _ in range(3))))


def test_euclidean_3_4_5():
    assert euclidean([0, 0], [3, 4]) == 5.0


def test_euclidean_rejects_mismatched_dims():
    with pytest.raises(InputError):
        euclidean([0, 0], [1, 2, 3])


def test_projection_midpoint():
    assert project_scalar([0.5, 1.0], [0, 0], [1, 0]) == 0.5


def test_projection_outside_segment():
    assert project_scalar([-1.0, 0.0], [0, 0], [2, 0]) == -0.5
    assert project_scalar([3.0, 5.0], [0, 0], [2, 0]) == 1.5


def test_projection_degenerate_edge_raises():
    with pytest.raises(InputError):
        project_scalar([1, 1], [0, 0], [0, 0])


@pytest.mark.parametrize(
    "x, expected",
    [
        ([0.0, 1.0], 1.0),    # foot inside: perpendicular
        ([3.0, 0.0], 2.0),    # beyond xj: endpoint
        ([-2.0, 0.0], 1.0),   # beyond xi: endpoint
        ([1.0, 0.0], 0.0),    # on the segment
        ([4.0, 4.0], 5.0),    # 3-4-5 off the far end
    ],
)
def test_distance_to_edge_cases(x, expected):
    assert distance_to_edge(x, [-1.0, 0.0], [1.0, 0.0]) == pytest.approx(expected, abs=1e-12)


def test_degenerate_edge_is_a_point():
    assert distance_to_edge([3.0, 4.0], [0.0, 0.0], [0.0, 0.0]) == 5.0


@settings(max_examples=300, deadline=None)
@given(triples())
def test_never_exceeds_endpoint_distances(t):
    x, a, b = t
    d = distance_to_edge(x, a, b)
    assert d >= 0
    assert d <= min(euclidean(x, a), euclidean(x, b)) * (1 + 1e-12) + 1e-9


@settings(max_examples=300, deadline=None)
@given(triples())
def test_symmetric_in_endpoints(t):
    x, a, b = t
    assert distance_to_edge(x, a, b) == pytest.approx(distance_to_edge(x, b, a), rel=1e-9, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(triples(), st.floats(0, 1))
def test_points_on_segment_have_zero_distance(t, s):
    _, a, b = t
    x = a + s * (b - a)
    scale = max(1.0, np.abs(a).max(), np.abs(b).max())
    assert distance_to_edge(x, a, b) <= 1e-9 * scale


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6).flatmap(
    lambda d: st.tuples(arrays(np.float64, d, elements=coord),
                        arrays(np.float64, (5, d), elements=coord),
                        arrays(np.float64, (5, d), elements=coord))))
def test_vectorised_matches_scalar(t):
    x, starts, ends = t
    ends[0] = starts[0]   # one degenerate edge in every batch
    got = distances_to_edges(x, starts, ends)
    want = [distance_to_edge(x, a, b) for a, b in zip(starts, ends)]
    np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-9)


def test_grid_search_oracle():
    rng = np.random.default_rng(7)
    for _ in range(200):
        d = int(rng.integers(1, 10))
        x, a, b = rng.normal(size=(3, d))
        assert distance_to_edge(x, a, b) == pytest.approx(
            segment_distance_grid(x, a, b), abs=1e-9)
