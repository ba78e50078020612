import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cosheafph.fieldlin import rank
from cosheafph.ripscomplex import (
    FiltrationGrid,
    PointCloud,
    boundary_matrix,
    filtered_rips,
    pairwise_distances,
    rips_complex,
    uniform_grid,
)

clouds = st.integers(3, 9).flatmap(
    lambda n: st.lists(st.tuples(st.floats(0, 2, allow_nan=False), st.floats(0, 2, allow_nan=False)),
                       min_size=n, max_size=n))


def brute_rips(pts, eps, max_dim):
    d = pairwise_distances(np.asarray(pts))
    out = []
    for k in range(max_dim + 1):
        out.append({s for s in itertools.combinations(range(len(pts)), k + 1)
                    if all(d[a, b] <= eps for a, b in itertools.combinations(s, 2))})
    return out


def test_unit_square_scales():
    sq = PointCloud([[0, 0], [1, 0], [1, 1], [0, 1]])
    K = rips_complex(sq, None, 1.0, 2)
    assert K.count(1) == 4 and K.count(2) == 0
    K = rips_complex(sq, None, math.sqrt(2), 3)
    assert (K.count(1), K.count(2), K.count(3)) == (6, 4, 1)
    assert rips_complex(sq, None, 0.5, 2).count(1) == 0


def test_vertex_subset_and_closure():
    sq = PointCloud([[0, 0], [1, 0], [1, 1], [0, 1]])
    K = rips_complex(sq, [0, 1, 2], 1.5, 2)
    assert K.vertex_labels == (0, 1, 2)
    assert K.is_closed()
    assert K.is_subcomplex_of(rips_complex(sq, None, 1.5, 2))


@settings(max_examples=50, deadline=None)
@given(clouds, st.floats(0.05, 2.5), st.integers(1, 3))
def test_rips_matches_brute_force(pts, eps, max_dim):
    K = rips_complex(PointCloud(pts), None, eps, max_dim)
    want = brute_rips(pts, eps, max_dim)
    for k in range(max_dim + 1):
        assert set(K.simplices(k)) == want[k]


@settings(max_examples=30, deadline=None)
@given(clouds, st.sampled_from([2, 3]))
def test_boundary_squares_to_zero(pts, p):
    K = rips_complex(PointCloud(pts), None, 1.5, 3)
    for k in (2, 3):
        if K.count(k):
            assert (boundary_matrix(K, k - 1, p) @ boundary_matrix(K, k, p)).is_zero()


def test_circle_betti_numbers():
    ang = np.arange(12) * 2 * np.pi / 12
    pts = np.c_[np.cos(ang), np.sin(ang)]
    K = rips_complex(pts, None, 0.6, 2)
    # 12 vertices, 12 edges, no triangles: one loop
    b1 = K.count(1) - rank(boundary_matrix(K, 1, 2)) - (rank(boundary_matrix(K, 2, 2)) if K.count(2) else 0)
    assert b1 == 1


@settings(max_examples=30, deadline=None)
@given(clouds, st.integers(2, 8))
def test_filtration_prefixes_match_static_complexes(pts, steps):
    d = pairwise_distances(np.asarray(pts))
    grid = uniform_grid(2.0, steps)
    fc = filtered_rips(d, range(len(pts)), grid, steps, 2)
    for i in range(1, steps + 1):
        assert fc.complex_at(i) == rips_complex(None, None, grid.eps(i), 2, dist=d)
    for k in range(3):
        assert list(fc.births[k]) == sorted(fc.births[k])


def test_grid_helpers():
    g = uniform_grid(0.3, 3)
    assert g.values == (0.1, 0.2, 0.3)
    assert g.birth_index(0.1) == 1 and g.birth_index(0.15) == 2 and g.birth_index(0.31) == 4
    t = g.truncated(0.2)
    assert t.L == 1 and len(t) == 3
    with pytest.raises(ValueError):
        FiltrationGrid((0.2, 0.1))
    with pytest.raises(ValueError):
        uniform_grid(1.0, 1)


def test_csv_roundtrip(tmp_path):
    pc = PointCloud([[0.1, 2.0], [3.0, -1.5]])
    path = tmp_path / "pts.csv"
    pc.to_csv(path, comments=["seed: 1"])
    assert np.array_equal(PointCloud.from_csv(path).points, pc.points)
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n3\n")
    with pytest.raises(ValueError):
        PointCloud.from_csv(bad)
