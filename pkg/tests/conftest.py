import warnings
from dataclasses import dataclass

import pytest

from cosheafph.connecting import DistributedResult, compute_distributed
from cosheafph.covernerve import (
    PathNerve,
    ScalarField,
    build_rips_system,
    cover_from_intervals,
    epsilon_star,
    truncate_grid,
)
from cosheafph.oracle import VerificationReport, verify_all
from cosheafph.synth import SyntheticCase, random_case, three_arc

SUITE_SEEDS = range(30)


@dataclass
class SuiteRun:
    case: SyntheticCase
    result: DistributedResult
    report: VerificationReport


def distributed_for(case: SyntheticCase, flip: bool = False, naive: bool = False) -> DistributedResult:
    cover = cover_from_intervals(ScalarField(case.field), case.intervals)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        grid = truncate_grid(case.grid, epsilon_star(case.cloud, cover))
    system = build_rips_system(case.cloud, cover, grid, case.n, nerve=PathNerve(cover.k, flip))
    return compute_distributed(system, case.p, naive=naive)


_cache: dict = {}


def suite_runs(flip: bool) -> list[SuiteRun]:
    if flip not in _cache:
        runs = []
        for seed in SUITE_SEEDS:
            case = random_case(seed)
            res = distributed_for(case, flip)
            runs.append(SuiteRun(case, res, verify_all(res, seed)))
        _cache[flip] = runs
    return _cache[flip]


@pytest.fixture(scope="session")
def suite():
    return suite_runs(False)


@pytest.fixture(scope="session")
def flipped_suite():
    return suite_runs(True)


@pytest.fixture(scope="session")
def arc_case():
    return three_arc()


@pytest.fixture(scope="session")
def arc_result(arc_case):
    return distributed_for(arc_case)
