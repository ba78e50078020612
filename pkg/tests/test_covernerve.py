import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cosheafph.covernerve import (
    Cover,
    CoverError,
    GridError,
    PathNerve,
    ScalarField,
    build_rips_system,
    cover_from_intervals,
    density_field,
    epsilon_star,
    suggest_two_intervals,
    truncate_grid,
    validate_covering,
)
from cosheafph.ripscomplex import PointCloud, rips_complex, uniform_grid


def line_cloud():
    return PointCloud([[0.0], [1.0], [2.0], [3.0]])


def test_interval_cover_is_half_open():
    f = ScalarField(np.array([0.0, 1.0, 2.0, 3.0]))
    cov = cover_from_intervals(f, [(-1, 1.5), (0.5, 3.5)])
    assert cov.elements == ((0, 1), (1, 2, 3))
    # right endpoints are excluded
    cov = cover_from_intervals(f, [(-1, 2.0), (1.0, 3.5)])
    assert cov.elements == ((0, 1), (1, 2, 3))


@pytest.mark.parametrize("elements", [
    [(0, 1), (2, 3)],              # disconnected nerve
    [(0, 1, 2), (1, 2), (2, 3)],   # a triple overlap
    [(0, 1), (1, 2), (0, 3)],      # non-consecutive overlap
    [(0, 1), (1, 2)],              # point 3 uncovered
    [(0, 1, 2, 3), ()],
])
def test_invalid_covers(elements):
    with pytest.raises(CoverError):
        Cover(tuple(elements), 4)


def test_interval_errors():
    f = ScalarField(np.array([0.0, 1.0, 2.0, 3.0]))
    with pytest.raises(CoverError):
        cover_from_intervals(f, [(-1, 1.5), (1.6, 4)])
    with pytest.raises(CoverError):
        cover_from_intervals(f, [(-1, 1.5), (1.2, 1.4), (1.3, 4)])


def test_epsilon_star_line_example():
    # points 0 | 1 shared | 2 3: the edge {0, 2} of length 2 is the first one no local complex sees
    cov = cover_from_intervals(ScalarField(np.array([0.0, 1, 2, 3])), [(-1, 1.5), (0.5, 3.5)])
    rep = epsilon_star(line_cloud(), cov)
    assert rep.epsilon_star == 2.0
    assert list(rep.K) == [2.0, 2.0, 2.0, 3.0]
    assert rep.K_prime[1] == np.inf and rep.K_double_prime[1] == 2.0


@st.composite
def covered_clouds(draw):
    n = draw(st.integers(6, 16))
    xs = draw(st.lists(st.floats(0, 3, allow_nan=False), min_size=n, max_size=n))
    ys = draw(st.lists(st.floats(0, 1, allow_nan=False), min_size=n, max_size=n))
    pts = np.c_[xs, ys]
    pts[0, 0] = 1.5  # something in the overlap
    cut = draw(st.floats(0.2, 0.8))
    return PointCloud(pts), [(-1.0, 1.5 + cut / 2), (1.5 - cut / 2, 4.0)]


@settings(max_examples=40, deadline=None)
@given(covered_clouds())
def test_local_complexes_cover_below_epsilon_star(data):
    cloud, ivs = data
    cov = cover_from_intervals(ScalarField(cloud.points[:, 0]), ivs)
    es = epsilon_star(cloud, cov).epsilon_star
    if not np.isfinite(es):
        es = 4.0
    grid = uniform_grid(es * 0.999, 5)
    system = build_rips_system(cloud, cov, grid, 1)
    for i in range(1, 6):
        K = rips_complex(cloud, None, grid.eps(i), 2)
        assert validate_covering(K, system, i) is None


def test_truncate_grid_warns_and_fails():
    cov = cover_from_intervals(ScalarField(np.array([0.0, 1, 2, 3])), [(-1, 1.5), (0.5, 3.5)])
    rep = epsilon_star(line_cloud(), cov)
    with pytest.warns(UserWarning):
        assert truncate_grid(uniform_grid(3.0, 6), rep).L == 3
    with pytest.raises(GridError):
        truncate_grid(uniform_grid(30.0, 3), rep)


def test_nerve_signs_and_flip():
    n = PathNerve(3)
    assert (n.left_sign, n.right_sign) == (-1, 1)
    f = PathNerve(3, flip=True)
    assert (f.left_sign, f.right_sign) == (1, -1)
    assert n.edges == [(0, 1), (1, 2)]


def test_rips_system_commutes():
    rng = np.random.default_rng(5)
    pts = rng.uniform(0, 3, (25, 2))
    pts[0, 0] = 1.5
    cloud = PointCloud(pts)
    cov = cover_from_intervals(ScalarField(pts[:, 0]), [(-1, 1.8), (1.2, 4)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        grid = truncate_grid(uniform_grid(1.0, 6), epsilon_star(cloud, cov))
    system = build_rips_system(cloud, cov, grid, 1)
    system.check_inclusions_commute(3)


def test_density_and_suggestion():
    cloud = PointCloud([[0, 0], [0.05, 0], [0, 0.05], [5, 5], [9, 9]])
    f = density_field(cloud, 0.1)
    assert list(f.values) == [3, 3, 3, 1, 1]
    ivs = suggest_two_intervals(ScalarField(np.r_[np.zeros(20), [3.0], np.full(20, 6.0)]))
    (a, b), (c, d) = ivs
    assert a < c < 3.0 < b <= d
    with pytest.raises(ValueError):
        density_field(cloud, 0)
