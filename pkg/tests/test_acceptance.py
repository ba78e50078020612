"""Acceptance criteria 1-9, one test each, each printing a single PASS/FAIL line."""

import time
from collections import Counter

import pytest

from cosheafph.barcodes import PersistenceModule, barcode_multiset, block_decompose, interval_decompose
from cosheafph.cli import main
from cosheafph.oracle import standard_barcode, truncate_bars, verify_all
from cosheafph.pipeline import RunConfig, run
from cosheafph.synth import two_density

from conftest import SUITE_SEEDS, distributed_for, suite_runs

DIAGRAM_CHECKS = {
    "tot_to_global_bijective", "tot_square_commutes", "tot_inclusion_rank",
    "distributed_to_tot_bijective", "square_case_h0", "square_case_kernel", "square_case_complement",
    "kernel_difference_trivial",
}


@pytest.fixture
def report_line(capsys):
    def emit(k: int, ok: bool, detail: str):
        with capsys.disabled():
            print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    return emit


def rows(runs, names):
    return [(r.case.name, row) for r in runs for row in r.report.rows if row.check in names]


def failures(pairs):
    return [f"{name}/{row.check}@{row.i}: {row.detail}" for name, row in pairs if not row.ok]


@pytest.fixture(scope="module")
def timed_suite():
    t = time.perf_counter()
    runs = suite_runs(False)
    return runs, time.perf_counter() - t


def test_criterion_1_distributed_barcode_equals_truncated_global(timed_suite, flipped_suite, report_line):
    runs, seconds = timed_suite
    shape_ok = all(
        40 <= len(r.case.cloud) <= 150 and 2 <= len(r.case.intervals) <= 4 and r.case.p in (2, 3)
        and r.case.n in (1, 2) and 8 <= len(r.case.grid) <= 20 and r.result.system.L <= len(r.case.grid)
        for r in runs)
    checks = rows(runs, {"barcode_matches_standard"}) + rows(flipped_suite, {"barcode_matches_standard"})
    bad = failures(checks)
    truncated = sum(r.result.system.L < len(r.case.grid) for r in runs)
    ok = shape_ok and not bad and len(runs) >= 30 and seconds < 300
    report_line(1, ok, f"{len(runs)} clouds x 2 orientations, {len(bad)} mismatches, {truncated} grids truncated, "
                       f"suite {seconds:.1f}s (limit 300s)")
    assert ok, bad[:3]


def test_criterion_2_dimension_identity(suite, report_line):
    checks = rows(suite, {"dimension_split"})
    bad = failures(checks)
    ok = bool(checks) and not bad
    report_line(2, ok, f"{len(checks)} (cloud, index) pairs, {len(bad)} violations")
    assert ok, bad[:3]


def test_criterion_3_three_arc_printed_dimensions(arc_case, arc_result, report_line):
    def dims(i):
        d = arc_result.data[i - 1]
        return d.top.homology.H0.dim, d.low.homology.H1.dim

    small, large = arc_case.grid.eps(2), arc_case.grid.eps(14)
    got = (dims(2), dims(14))
    ok = got == ((0, 1), (1, 0))
    report_line(3, ok, f"eps={small:g}: {got[0]} (want (0, 1)); eps'={large:g}: {got[1]} (want (1, 0))")
    assert ok


def test_criterion_4_naive_connecting_map_splits_the_bar(arc_case, arc_result, report_line):
    def bars(res):
        return barcode_multiset(interval_decompose(PersistenceModule(res.module.dims, res.module.maps, res.p)))

    L = arc_result.system.L
    oracle = truncate_bars(standard_barcode(arc_result.system.dist, arc_result.system.grid, 1, 2), L)
    naive = bars(distributed_for(arc_case, naive=True))
    true = bars(arc_result)
    ok = true == oracle == Counter({(2, 19): 1}) and naive == Counter({(2, 13): 1, (14, 19): 1})
    report_line(4, ok, f"oracle {dict(oracle)}, true Psi {dict(true)}, naive {dict(naive)}")
    assert ok


def test_criterion_5_delta_independent_of_alpha(suite, arc_result, report_line):
    checks = rows(suite, {"delta_alpha_independent"})
    arc = [("three-arc", row) for row in verify_all(arc_result, diagrams=False).rows
           if row.check == "delta_alpha_independent"]
    bad = failures(checks + arc)
    kernels = sum(e.n_ker for r in suite for e in r.result.ledger) + sum(e.n_ker for e in arc_result.ledger)
    ok = kernels > 0 and not bad
    report_line(5, ok, f"{kernels} kernel basis elements re-solved with random offsets, {len(bad)} changed values")
    assert ok, bad[:3]


def test_criterion_6_diagrams_commute(suite, report_line):
    checks = rows(suite, DIAGRAM_CHECKS)
    bad = failures(checks)
    seen = {row.check for _, row in checks}
    ok = not bad and {"square_case_h0", "square_case_kernel", "square_case_complement"} <= seen
    report_line(6, ok, f"{len(checks)} identities over {len(SUITE_SEEDS)} clouds, {len(bad)} failures")
    assert ok, bad[:3]


def test_criterion_7_printed_block_split(report_line):
    m1 = [[1, 0, 0], [1, 0, 0], [0, 1, 1]]
    m2 = [[1, -1, 0], [0, 0, 1], [0, 0, 1]]
    want = sorted([[(1, 0), (2, 0), (2, 1), (3, 0)], [(1, 1), (1, 2), (2, 2), (3, 1), (3, 2)]])
    results = {}
    for p in (3, 10007):
        M = PersistenceModule.from_arrays([3, 3, 3], [m1, m2], p)
        blocks = block_decompose(M)
        supports = sorted(sorted((i + 1, c) for i, cs in enumerate(b.coords) for c in cs) for b in blocks)
        dims = sorted(b.module.dims for b in blocks)
        bars = [barcode_multiset(interval_decompose(b.module)) for b in sorted(blocks, key=lambda b: b.module.dims)]
        results[p] = (supports == want and dims == [[1, 2, 1], [2, 1, 2]]
                      and bars == [Counter({(1, 2): 1, (2, 3): 1}), Counter({(1, 3): 1, (1, 1): 1, (3, 3): 1})])
    ok = all(results.values())
    report_line(7, ok, "W1 = K->K^2->K and W2 = K^2->K->K^2 over GF(3) and GF(10007): "
                       + ", ".join(f"p={p} {'ok' if v else 'mismatch'}" for p, v in results.items()))
    assert ok


def test_criterion_8_two_density_annotations(report_line):
    case = two_density(k=8, seed=0)
    cfg = RunConfig(p=2, n=1, grid_max=1.0, grid_steps=100, field="density",
                    density_radius=case.params["density_radius"], intervals=[list(iv) for iv in case.intervals],
                    names=case.names, threshold=0.4, tag="U_d", tag_threshold=0.05)
    res = run(case.cloud, cfg)
    sig = Counter()
    for b in res.barcode.bars:
        if b.significant:
            sig[b.annotation] += b.multiplicity
    plain = run(case.cloud, RunConfig(**{**cfg.__dict__, "tag": None, "tag_threshold": None}))
    plain_sig = sum(b.multiplicity for b in plain.barcode.bars if b.significant)
    ok = sig == Counter({"U_s": 1, "U_d": 8}) and plain_sig == 1
    other = sum(sig.values()) - sig["U_s"] - sig["U_d"]
    report_line(8, ok, f"significant U_s={sig['U_s']}, U_d={sig['U_d']}, other={other}; "
                       f"length threshold 0.4 alone flags {plain_sig} (eps*={res.eps_report.epsilon_star:.4g})")
    assert ok


def test_criterion_9_byte_identical_outputs(tmp_path, capsys, report_line):
    outputs = []
    for k, threads in enumerate(("1", "4")):
        d = tmp_path / f"r{k}"
        d.mkdir()
        commands = [
            ["gen", "random", "--seed", "7", "--out", str(d / "pts.csv"), "--config-out", str(d / "cfg.json")],
            ["gen", "two-density", "--seed", "3", "--out", str(d / "td.csv"), "--config-out", str(d / "td.json")],
            ["run", str(d / "td.csv"), "--config", str(d / "td.json"), "--out", str(d / "bc.csv"),
             "--plot", str(d / "bc.svg"), "--dump-ledger", str(d / "ledger.json"),
             "--dump-cosheaves", str(d / "cos.txt"), "--eps-report", str(d / "eps.json"),
             "--threads", threads, "--quiet"],
            ["verify", str(d / "pts.csv"), "--config", str(d / "cfg.json"), "--json", str(d / "verify.json"),
             "--seed", "7", "--threads", threads, "--quiet"],
        ]
        for argv in commands:
            assert main(argv) == 0, argv
        files = {f.name: f.read_bytes() for f in sorted(d.iterdir())}
        files["verify stdout"] = capsys.readouterr().out.encode()
        outputs.append(files)
    same = outputs[0] == outputs[1]
    ok = same and len(outputs[0]) == 11
    report_line(9, ok, f"{len(outputs[0])} outputs compared across two runs (1 vs 4 threads): "
                       f"{'byte-identical' if same else 'differ'}")
    assert ok
