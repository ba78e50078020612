from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cosheafph import fieldlin as fl
from cosheafph.barcodes import (
    AnnotatedBarcode,
    Bar,
    PersistenceModule,
    annotate,
    barcode_multiset,
    block_decompose,
    interval_decompose,
    mark_significant,
    resolve_tags,
    transfer,
)
from cosheafph.fieldlin import FieldMatrix
from cosheafph.ripscomplex import FiltrationGrid

# the three-step module printed with the annotation algorithm; GF(10007) stands in for the reals
PRINTED_M1 = [[1, 0, 0], [1, 0, 0], [0, 1, 1]]
PRINTED_M2 = [[1, -1, 0], [0, 0, 1], [0, 0, 1]]


def planted_module(bars, N, p, rng):
    """Direct sum of interval modules, then a random change of basis at every index."""
    dims = [sum(1 for b, d in bars if b <= i <= d) for i in range(1, N + 1)]
    coords = [[k for k, (b, d) in enumerate(bars) if b <= i <= d] for i in range(1, N + 1)]
    maps = []
    for i in range(N - 1):
        pos = {k: r for r, k in enumerate(coords[i + 1])}
        cols = [{pos[k]: 1} if k in pos else {} for k in coords[i]]
        maps.append(FieldMatrix(dims[i + 1], dims[i], p, columns=cols))
    gs = []
    for n in dims:
        while True:
            g = FieldMatrix(n, n, p, dense=rng.integers(0, p, (n, n)))
            if fl.rank(g) == n:
                break
        gs.append(g)
    return PersistenceModule(dims, maps, p).change_of_basis(gs)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.sampled_from([2, 3, 5]), st.data())
def test_planted_bars_are_recovered(N, p, data):
    pairs = st.tuples(st.integers(1, N), st.integers(1, N)).map(lambda t: (min(t), max(t)))
    bars = data.draw(st.lists(pairs, max_size=6))
    rng = np.random.default_rng(data.draw(st.integers(0, 1000)))
    M = planted_module(bars, N, p, rng)
    assert barcode_multiset(interval_decompose(M)) == Counter(bars)


def test_printed_example_blocks_and_bars():
    M = PersistenceModule.from_arrays([3, 3, 3], [PRINTED_M1, PRINTED_M2], 10007)
    blocks = block_decompose(M)
    supports = sorted(sorted((i + 1, c) for i, cs in enumerate(b.coords) for c in cs) for b in blocks)
    assert supports == [[(1, 0), (2, 0), (2, 1), (3, 0)], [(1, 1), (1, 2), (2, 2), (3, 1), (3, 2)]]
    by_size = sorted(blocks, key=lambda b: b.module.dims)
    # W1: K -> K^2 -> K, composite 1 - 1 = 0; W2: K^2 -> K -> K^2, every map rank 1
    w1 = next(b for b in blocks if b.module.dims == [1, 2, 1])
    w2 = next(b for b in blocks if b.module.dims == [2, 1, 2])
    assert len(by_size) == 2
    assert barcode_multiset(interval_decompose(w1.module)) == Counter({(1, 2): 1, (2, 3): 1})
    assert barcode_multiset(interval_decompose(w2.module)) == Counter({(1, 3): 1, (1, 1): 1, (3, 3): 1})
    assert barcode_multiset(interval_decompose(M)) == Counter({(1, 2): 1, (2, 3): 1, (1, 3): 1, (1, 1): 1,
                                                               (3, 3): 1})


def test_non_module_is_rejected():
    with pytest.raises(ValueError):
        PersistenceModule.from_arrays([2, 1], [[1, 0, 0]], 2)


def test_resolve_tags_policies():
    names = ["A", "B", "C"]
    assert resolve_tags([(0, 0), (0, 0)], "none", names) == "A"
    assert resolve_tags([(0, 2)], "none", names) == "[A,C]"
    assert resolve_tags([(0, 2)], "left", names) == "A"
    assert resolve_tags([(0, 2)], "right", names) == "C"
    assert resolve_tags([(0, 0), (1, 2)], "none", names) is None
    assert resolve_tags([(0, 0), (1, 2)], "left", names) == "A"
    assert resolve_tags([(0, 0), (1, 2)], "right", names) == "C"
    assert resolve_tags([(0, 0), None], "left", names) is None
    assert resolve_tags([(1, 1)], "none") == "U2"
    with pytest.raises(ValueError):
        resolve_tags([(0, 0)], "middle")


def test_annotate_uses_block_tags_at_birth():
    # two independent bars; the second coordinate is an untagged H1-type coordinate
    M = PersistenceModule.from_arrays([2, 2], [[1, 0, 0, 1]], 3, labels=[[(0, 0), None], [(0, 0), (1, 1)]])
    bars = annotate(M)
    assert sorted((b.key, b.annotation or "") for b in bars) == [((1, 2), ""), ((1, 2), "U1")]


def test_transfer_rules():
    L = 3
    star = [Bar(1, 2, 1, "A"), Bar(2, 3, 1, "B"), Bar(3, 3, 1, "C"), Bar(3, 3, 1, "D")]
    glob = [Bar(1, 2), Bar(2, 5), Bar(3, 4), Bar(3, 3), Bar(4, 5)]
    out = {(b.key, b.annotation) for b in transfer(star, glob, L)}
    # unique birth at 2 carries over; two bars born at 3 reaching L do not
    assert out == {((1, 2), "A"), ((2, 5), "B"), ((3, 4), None), ((3, 3), None), ((4, 5), None)}
    with pytest.raises(ValueError):
        transfer(star[:1], glob, L)


def test_significance_thresholds():
    g = FiltrationGrid((0.1, 0.2, 0.3, 0.4))
    bars = [Bar(1, 4, 1, "s"), Bar(1, 2, 1, "d"), Bar(1, 2, 1, "s")]
    out = mark_significant(bars, g, 0.25, "d", 0.05)
    assert [b.significant for b in out] == [True, True, False]
    assert bars[0].length(g) == pytest.approx(0.3)


def test_csv_and_svg_are_stable():
    g = FiltrationGrid((0.1, 0.2, 0.3))
    bc = AnnotatedBarcode([Bar(1, 3, 2, "U1", True), Bar(2, 2)], g, 1, metadata={"p": 2, "L": 3})
    text = bc.to_csv()
    assert text == ("# L: 3\n# p: 2\nbirth,death,dim,multiplicity,annotation,significant\n"
                    "0.1,0.3,1,2,U1,1\n0.2,0.2,1,1,,0\n")
    svg = bc.to_svg()
    assert svg.startswith("<svg") and svg == bc.to_svg()
    bc.check_dims([2, 3, 2])
    with pytest.raises(ArithmeticError):
        bc.check_dims([1, 3, 2])


def test_two_density_annotations():
    from cosheafph.pipeline import RunConfig, run
    from cosheafph.synth import two_density

    case = two_density()
    cfg = RunConfig(grid_max=1.0, grid_steps=100, density_radius=0.1, intervals=[list(iv) for iv in case.intervals],
                    names=case.names)
    ann = Counter()
    for b in run(case.cloud, cfg).barcode.bars:
        ann[b.annotation] += b.multiplicity
    # the big sparse loop and the sparse hexagon, then the eight dense loops
    assert ann == Counter({"U_s": 2, "U_d": 8})


def test_single_element_cover_annotates_everything():
    from cosheafph.pipeline import RunConfig, run
    from cosheafph.synth import three_arc

    case = three_arc()
    for policy in ("none", "left", "right"):
        cfg = RunConfig(grid_max=0.95, grid_steps=19, field="x0", intervals=[[-5.0, 10.0]], names=["all"],
                        policy=policy)
        bars = run(case.cloud, cfg).barcode.bars
        assert bars and all(b.annotation == "all" for b in bars)
