import json
import math
from collections import Counter

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from cosheafph.barcodes import barcode_multiset, interval_decompose
from cosheafph.oracle import (
    VerificationReport,
    global_persistence,
    standard_barcode,
    truncate_bars,
    verify_all,
)
from cosheafph.ripscomplex import FiltrationGrid, PointCloud, pairwise_distances


def hexagon():
    a = np.arange(6) * math.pi / 3
    return PointCloud(np.c_[np.cos(a), np.sin(a)])


def test_hexagon_bars():
    # side 1, short diagonal sqrt 3, long diagonal 2: a loop on [1, sqrt 3), an octahedron on [sqrt 3, 2)
    # 1.01 rather than 1.0: the computed side length is 1 + ulp
    grid = FiltrationGrid((0.5, 1.01, 1.5, 1.8, 2.5))
    d = pairwise_distances(hexagon())
    assert barcode_multiset(standard_barcode(d, grid, 1, 2)) == Counter({(2, 3): 1})
    assert barcode_multiset(standard_barcode(d, grid, 2, 3)) == Counter({(4, 4): 1})
    assert barcode_multiset(standard_barcode(d, grid, 0, 2)) == Counter({(1, 5): 1, (1, 1): 5})


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([2, 3]), st.integers(0, 2))
def test_reduction_and_per_index_homology_agree(seed, p, n):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 1.5, (int(rng.integers(4, 12)), 2))
    grid = FiltrationGrid(tuple(np.round(np.linspace(0.1, 1.2, 7), 6)))
    d = pairwise_distances(pts)
    one_pass = barcode_multiset(standard_barcode(d, grid, n, p))
    per_index = barcode_multiset(interval_decompose(global_persistence(PointCloud(pts), grid, n, p, dist=d).module))
    assert one_pass == per_index


def test_truncate_bars():
    from cosheafph.barcodes import Bar

    bars = [Bar(1, 2), Bar(2, 6, 2), Bar(5, 6)]
    assert truncate_bars(bars, 4) == Counter({(1, 2): 1, (2, 4): 2})


def test_report_rendering():
    rep = VerificationReport()
    rep.add("a", 1, True, "fine")
    rep.add("b", 2, False, "broken")
    assert not rep.ok and rep.first_failure().check == "b"
    assert "overall: FAIL" in rep.to_text()
    assert json.loads(rep.to_json())["rows"][1]["i"] == 2


def test_all_checks_on_three_arc(arc_result):
    rep = verify_all(arc_result)
    assert rep.ok, rep.first_failure()
    names = {r.check for r in rep.rows}
    assert {"square_case_h0", "square_case_kernel", "square_case_complement", "kernel_difference_trivial",
            "tot_square_commutes", "delta_alpha_independent", "rank_profile"} <= names
