"""Persistence modules, their barcodes, and cover annotations of bars.

Bars use 1-based grid indices: ``Bar(b, d)`` is alive at indices b..d.  The
annotation pipeline works on the distributed module: every H0 coordinate is
re-expressed through an interval decomposition of the cosheaf, tagged by the
cover elements its summand lives on, and the tags are propagated to bars
through the finest block splitting of the module.
"""

from __future__ import annotations

import hashlib
import io
import json
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import fieldlin as fl
from .cosheafalg import gabriel_decompose, h0_summand_basis
from .fieldlin import FieldMatrix
from .ripscomplex import FiltrationGrid

Tag = tuple[int, int]  # (leftmost, rightmost) cover element, 0-based

POLICIES = ("none", "left", "right")


@dataclass
class PersistenceModule:
    """Spaces GF(p)^dims[k] at indices 1..len(dims) and maps between neighbours.

    ``labels[k]`` optionally tags each coordinate at index k+1 with a cover
    element range (or None for untagged coordinates).
    """

    dims: list[int]
    maps: list[FieldMatrix]
    p: int
    labels: list[list[Tag | None]] | None = None

    def __post_init__(self):
        self.dims = [int(d) for d in self.dims]
        if len(self.maps) != max(len(self.dims) - 1, 0):
            raise ValueError(f"{len(self.dims)} spaces need {len(self.dims) - 1} maps, got {len(self.maps)}")
        for k, m in enumerate(self.maps):
            if m.shape != (self.dims[k + 1], self.dims[k]):
                raise ValueError(f"map {k + 1} has shape {m.shape}, expected {(self.dims[k + 1], self.dims[k])}")
        if self.labels is not None:
            if [len(x) for x in self.labels] != self.dims:
                raise ValueError("label lists do not match the dimensions")
        self._composite: dict[tuple[int, int], FieldMatrix] = {}

    @classmethod
    def from_arrays(cls, dims: Sequence[int], maps: Sequence, p: int, labels=None) -> "PersistenceModule":
        mats = [FieldMatrix(dims[k + 1], dims[k], p, dense=np.asarray(m, dtype=np.int64).reshape(dims[k + 1], dims[k]))
                for k, m in enumerate(maps)]
        return cls(list(dims), mats, p, labels)

    @property
    def length(self) -> int:
        return len(self.dims)

    def composite(self, i: int, j: int) -> FieldMatrix:
        """The map from index i to index j (1-based, i <= j)."""
        if i == j:
            return FieldMatrix.identity(self.dims[i - 1], self.p)
        key = (i, j)
        if key not in self._composite:
            self._composite[key] = self.maps[j - 2] @ self.composite(i, j - 1)
        return self._composite[key]

    def rank(self, i: int, j: int) -> int:
        if i < 1 or j > self.length:
            return 0
        return fl.rank(self.composite(i, j))

    def change_of_basis(self, bases: Sequence[FieldMatrix]) -> "PersistenceModule":
        """The isomorphic module with maps g_{k+1} M_k g_k^{-1}."""
        invs = [fl.matrix_inverse(g) for g in bases]
        maps = [bases[k + 1] @ m @ invs[k] for k, m in enumerate(self.maps)]
        return PersistenceModule(self.dims, maps, self.p, self.labels)

    def truncated(self, L: int) -> "PersistenceModule":
        labels = self.labels[:L] if self.labels is not None else None
        return PersistenceModule(self.dims[:L], self.maps[: max(L - 1, 0)], self.p, labels)


@dataclass
class Bar:
    birth: int
    death: int
    multiplicity: int = 1
    annotation: str | None = None
    significant: bool = False

    def __post_init__(self):
        if not 1 <= self.birth <= self.death:
            raise ValueError(f"invalid bar [{self.birth}, {self.death}]")
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be positive")

    @property
    def key(self) -> tuple[int, int]:
        return (self.birth, self.death)

    def length(self, grid: FiltrationGrid) -> float:
        return grid.eps(self.death) - grid.eps(self.birth)


def interval_decompose(M: PersistenceModule, threads: int = 1) -> list[Bar]:
    """Bars from ranks of composites: m[b,d] = r(b,d) - r(b-1,d) - r(b,d+1) + r(b-1,d+1)."""
    N = M.length
    pairs = [(i, j) for i in range(1, N + 1) for j in range(i, N + 1)]
    # fill composites in order so memoization stays single-threaded
    for i, j in pairs:
        M.composite(i, j)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            ranks = dict(zip(pairs, ex.map(lambda ij: M.rank(*ij), pairs)))
    else:
        ranks = {ij: M.rank(*ij) for ij in pairs}

    def r(i, j):
        if i < 1 or j > N or i > j:
            return 0
        return ranks[(i, j)]

    bars = []
    for b in range(1, N + 1):
        for d in range(b, N + 1):
            m = r(b, d) - r(b - 1, d) - r(b, d + 1) + r(b - 1, d + 1)
            if m < 0:
                raise ArithmeticError("negative bar multiplicity: maps do not form a module")
            if m:
                bars.append(Bar(b, d, m))
    for i in range(1, N + 1):
        alive = sum(x.multiplicity for x in bars if x.birth <= i <= x.death)
        if alive != M.dims[i - 1]:
            raise ArithmeticError(f"bars cover {alive} dimensions at index {i}, module has {M.dims[i - 1]}")
    return bars


def barcode_multiset(bars: Sequence[Bar]) -> Counter:
    c: Counter = Counter()
    for b in bars:
        c[b.key] += b.multiplicity
    return c


# --------------------------------------------------------------------------
# block splitting


@dataclass
class BlockSummand:
    """Coordinates (per index) of one block and the restricted module."""

    coords: list[list[int]]
    module: PersistenceModule

    def labels_at(self, i: int) -> list[Tag | None]:
        return self.module.labels[i - 1] if self.module.labels is not None else [None] * len(self.coords[i - 1])


def block_decompose(M: PersistenceModule) -> list[BlockSummand]:
    """Connected components of the graph of (index, coordinate) pairs joined by nonzero map entries."""
    nodes = [(k, c) for k in range(M.length) for c in range(M.dims[k])]
    parent = {v: v for v in nodes}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for k, m in enumerate(M.maps):
        for c, col in enumerate(m.sparse_columns()):
            for r in col:
                a, b = find((k, c)), find((k + 1, r))
                if a != b:
                    parent[max(a, b)] = min(a, b)
    groups: dict = defaultdict(list)
    for v in nodes:
        groups[find(v)].append(v)
    out = []
    for root in sorted(groups):
        coords = [[] for _ in range(M.length)]
        for k, c in sorted(groups[root]):
            coords[k].append(c)
        maps = [M.maps[k].take_columns(coords[k]).take_rows(coords[k + 1]) for k in range(M.length - 1)]
        labels = None
        if M.labels is not None:
            labels = [[M.labels[k][c] for c in coords[k]] for k in range(M.length)]
        out.append(BlockSummand(coords, PersistenceModule([len(x) for x in coords], maps, M.p, labels)))
    return out


# --------------------------------------------------------------------------
# relabelling through the cosheaf decomposition


def relabel_by_indecomposables(result) -> PersistenceModule:
    """The module V_* whose H0 coordinates are classes of [-] summands.

    ``result`` is a :class:`~cosheafph.connecting.DistributedResult`.  At each
    index the H0 block is rewritten in the basis of [-] summand classes and
    tagged with the summand's vertex range; H1 coordinates stay untagged.
    """
    mod = result.module
    p = mod.p
    gs, labels = [], []
    for d, h1 in zip(result.data, mod.h1_dims):
        F = d.top
        K, tags = h0_summand_basis(F, gabriel_decompose(F))
        if K.cols != F.homology.H0.dim:
            raise ArithmeticError(f"[-] summands give {K.cols} classes but H0 has dimension {F.homology.H0.dim}")
        G = fl.matrix_inverse(K) if K.cols else FieldMatrix(0, 0, p)
        gs.append(fl.block_diag([G, FieldMatrix.identity(h1, p)], p))
        labels.append(list(tags) + [None] * h1)
    base = PersistenceModule(mod.dims, mod.maps, p)
    star = base.change_of_basis(gs)
    star.labels = labels
    return star


# --------------------------------------------------------------------------
# annotation


def element_name(names: Sequence[str] | None, j: int) -> str:
    return names[j] if names is not None else f"U{j + 1}"


def tag_name(tag: Tag, names: Sequence[str] | None) -> str:
    l, r = tag
    if l == r:
        return element_name(names, l)
    return f"[{element_name(names, l)},{element_name(names, r)}]"


def resolve_tags(tags: Sequence[Tag | None], policy: str, names: Sequence[str] | None = None) -> str | None:
    """Annotation of a bar whose block carries these coordinate tags at its birth."""
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    if not tags or any(t is None for t in tags):
        return None
    distinct = sorted(set(tags))
    if len(distinct) == 1:
        l, r = distinct[0]
        if l == r or policy == "none":
            return tag_name(distinct[0], names)
        return element_name(names, l if policy == "left" else r)
    if policy == "none":
        return None
    if policy == "left":
        return element_name(names, min(t[0] for t in distinct))
    return element_name(names, max(t[1] for t in distinct))


def annotate(V_star: PersistenceModule, policy: str = "none", names: Sequence[str] | None = None) -> list[Bar]:
    """Annotated barcode of V_*: bars of each block take the block's tags at the bar's birth."""
    out = []
    for block in block_decompose(V_star):
        for bar in interval_decompose(block.module):
            tags = block.labels_at(bar.birth)
            out.append(replace(bar, annotation=resolve_tags(tags, policy, names)))
    return merge_bars(out)


def merge_bars(bars: Sequence[Bar]) -> list[Bar]:
    c: Counter = Counter()
    sig = {}
    for b in bars:
        k = (b.birth, b.death, b.annotation or "")
        c[k] += b.multiplicity
        sig[k] = sig.get(k, False) or b.significant
    return [Bar(b, d, m, a or None, sig[(b, d, a)]) for (b, d, a), m in sorted(c.items())]


def transfer(star_bars: Sequence[Bar], global_bars: Sequence[Bar], L: int) -> list[Bar]:
    """Carry annotations from the truncated barcode to the global one.

    A bar ending before L keeps its annotation.  A bar reaching L is carried
    over only if no other bar of the truncated barcode is born at the same
    index; otherwise the global bar stays unannotated.
    """
    truncated = Counter()
    for g in global_bars:
        if g.birth <= L:
            truncated[(g.birth, min(g.death, L))] += g.multiplicity
    if truncated != barcode_multiset(star_bars):
        raise ValueError("the truncated global barcode does not match the distributed one")
    born = Counter()
    for s in star_bars:
        born[s.birth] += s.multiplicity
    pool: dict[tuple[int, int], list[str | None]] = defaultdict(list)
    for s in star_bars:
        pool[s.key].extend([s.annotation] * s.multiplicity)
    out = []
    for g in sorted(global_bars, key=lambda x: x.key):
        for _ in range(g.multiplicity):
            ann = None
            if g.birth <= L:
                if g.death < L:
                    ann = pool[g.key].pop(0)
                else:
                    cand = pool[(g.birth, L)].pop(0)
                    if born[g.birth] == 1:
                        ann = cand
            out.append(Bar(g.birth, g.death, 1, ann))
    return merge_bars(out)


def mark_significant(bars: Sequence[Bar], grid: FiltrationGrid, threshold: float,
                     tag: str | None = None, tag_threshold: float | None = None) -> list[Bar]:
    """Long bars, plus bars with the designated tag that beat the per-tag threshold."""
    out = []
    for b in bars:
        length = b.length(grid)
        sig = length > threshold
        if tag is not None and tag_threshold is not None and b.annotation == tag and length > tag_threshold:
            sig = True
        out.append(replace(b, significant=sig))
    return out


# --------------------------------------------------------------------------
# output


@dataclass
class AnnotatedBarcode:
    bars: list[Bar]
    grid: FiltrationGrid
    dim: int
    policy: str = "none"
    metadata: dict = field(default_factory=dict)

    def check_dims(self, dims: Sequence[int]) -> None:
        for i, want in enumerate(dims, start=1):
            got = sum(b.multiplicity for b in self.bars if b.birth <= i <= b.death)
            if got != want:
                raise ArithmeticError(f"bars cover {got} dimensions at index {i}, expected {want}")

    def rows(self) -> list[dict]:
        return [{"birth": _fmt(self.grid.eps(b.birth)), "death": _fmt(self.grid.eps(b.death)), "dim": self.dim,
                 "multiplicity": b.multiplicity, "annotation": b.annotation or "",
                 "significant": int(b.significant)} for b in self.bars]

    def to_csv(self) -> str:
        buf = io.StringIO()
        for line in metadata_lines(self.metadata):
            buf.write(f"# {line}\n")
        buf.write("birth,death,dim,multiplicity,annotation,significant\n")
        for r in self.rows():
            buf.write(f"{r['birth']},{r['death']},{r['dim']},{r['multiplicity']},{r['annotation']},"
                      f"{r['significant']}\n")
        return buf.getvalue()

    def to_svg(self, width: int = 640) -> str:
        return barcode_svg(self, width)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def metadata_lines(meta: dict) -> list[str]:
    return [f"{k}: {json.dumps(meta[k], sort_keys=True)}" for k in sorted(meta)]


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:16]


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


def barcode_svg(bc: AnnotatedBarcode, width: int = 640) -> str:
    """Plain SVG: one row per bar, colour by annotation, significant bars drawn thick."""
    rows = [b for b in bc.bars for _ in range(b.multiplicity)]
    names = sorted({b.annotation for b in rows if b.annotation})
    colour = {a: _PALETTE[k % len(_PALETTE)] for k, a in enumerate(names)}
    left, right, top, step = 60, 20, 30, 12
    height = top + step * max(len(rows), 1) + 40 + 16 * len(names)
    vmax = bc.grid.values[-1]
    scale = (width - left - right) / vmax if vmax > 0 else 1.0

    def x(v):
        return f"{left + v * scale:.2f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">']
    for line in metadata_lines(bc.metadata):
        out.append(f"<!-- {line.replace('--', '- -')} -->")
    out.append(f'<text x="{left}" y="16">H{bc.dim} barcode</text>')
    for k, b in enumerate(rows):
        y = top + k * step
        c = colour.get(b.annotation, "#888888")
        w = 6 if b.significant else 2
        out.append(f'<line x1="{x(bc.grid.eps(b.birth))}" y1="{y}" x2="{x(bc.grid.eps(b.death))}" y2="{y}" '
                   f'stroke="{c}" stroke-width="{w}"/>')
    axis_y = top + step * max(len(rows), 1) + 4
    out.append(f'<line x1="{x(0)}" y1="{axis_y}" x2="{x(vmax)}" y2="{axis_y}" stroke="black"/>')
    for t in np.linspace(0, vmax, 5):
        out.append(f'<text x="{x(t)}" y="{axis_y + 12}" text-anchor="middle">{t:.3g}</text>')
    for k, a in enumerate(names):
        y = axis_y + 28 + 16 * k
        out.append(f'<rect x="{left}" y="{y - 8}" width="10" height="10" fill="{colour[a]}"/>')
        out.append(f'<text x="{left + 16}" y="{y}">{_escape(a)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
