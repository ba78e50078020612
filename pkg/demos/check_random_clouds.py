"""
Checking the distributed module against the global one
======================================================

Each random cloud is computed twice: once through the cover (local Rips
complexes, cosheaves and the connecting map) and once directly on the whole
cloud.  The report lists every identity that was checked.
"""

import sys
import warnings

from cosheafph.connecting import compute_distributed
from cosheafph.covernerve import ScalarField, build_rips_system, cover_from_intervals, epsilon_star, truncate_grid
from cosheafph.oracle import verify_all
from cosheafph.synth import random_case

seeds = range(int(sys.argv[1]) if len(sys.argv) > 1 else 5)
warnings.simplefilter("ignore")

for seed in seeds:
    case = random_case(seed)
    cover = cover_from_intervals(ScalarField(case.field), case.intervals)
    grid = truncate_grid(case.grid, epsilon_star(case.cloud, cover))
    res = compute_distributed(build_rips_system(case.cloud, cover, grid, case.n), case.p)
    rep = verify_all(res, seed)
    kernels = sum(e.n_ker for e in res.ledger)
    print(f"seed {seed:>2}  p={case.p} n={case.n} points={len(case.cloud):>3} bands={cover.k} "
          f"L={grid.L:>2}/{len(case.grid):<2} dims={res.module.dims} kernel={kernels} "
          f"checks={len(rep.rows)} {'ok' if rep.ok else 'FAILED'}")
    if not rep.ok:
        print(rep.to_text())
