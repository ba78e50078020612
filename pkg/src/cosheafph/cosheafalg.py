"""Cellular cosheaves of local homology on a path nerve.

Local homology is computed once per nerve cell from a filtration-ordered
boundary reduction, and then read off at every grid index.  A class at index
i is represented by a cycle whose last simplex (in filtration order) is the
simplex that created it; classes that die are matched against the reduced
boundary that kills them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import fieldlin as fl
from .covernerve import Cell, PathNerve, RipsSystem
from .fieldlin import FieldMatrix, SparseVec, axpy, inverse

Chain = dict[int, int]


class NotACycleError(ArithmeticError):
    pass


class NotABoundaryError(ArithmeticError):
    pass


class CellHomology:
    """Homology in degrees 0..top-1 of one filtered cell complex, at every grid index."""

    def __init__(self, fc, top: int, p: int):
        self.fc = fc
        self.p = p
        self.top = top
        self.births = fc.births
        # reduce from the top degree down so that paired columns can be cleared
        self.reduced: dict[int, list[SparseVec]] = {}
        self.transform: dict[int, list[SparseVec] | None] = {}
        self.pivot_of: dict[int, dict[int, int]] = {}
        for k in range(top, 0, -1):
            cols = fc.boundary_columns(k, p)
            skip = set(self.pivot_of.get(k + 1, {}).keys()) if k < top else set()
            red = fl.column_reduce(cols, p, track=k < top, skip=skip)
            self.reduced[k] = red.reduced
            self.transform[k] = red.transform
            self.pivot_of[k] = red.pivot_of
        # creators of degree d: zero columns of the degree-d reduction
        self.cycle_of: dict[int, dict[int, SparseVec]] = {}
        for d in range(top):
            ncell = len(fc.simplices[d])
            paired = self.pivot_of.get(d + 1, {})
            out: dict[int, SparseVec] = {}
            if d == 0:
                for j in range(ncell):
                    if j in paired:
                        out[j] = self._normalized_boundary(d, paired[j], j)
                    else:
                        out[j] = {j: 1}
            else:
                red_d = self.reduced[d]
                for j in range(ncell):
                    if red_d[j]:
                        continue
                    if j in paired:
                        out[j] = self._normalized_boundary(d, paired[j], j)
                    else:
                        out[j] = self.transform[d][j]
            self.cycle_of[d] = out

    def _normalized_boundary(self, d: int, col: int, j: int) -> SparseVec:
        r = self.reduced[d + 1][col]
        return fl.scaled(r, inverse(r[j], self.p), self.p)

    def _death(self, d: int, j: int) -> int | None:
        col = self.pivot_of.get(d + 1, {}).get(j)
        if col is None:
            return None
        return int(self.births[d + 1][col])

    def basis(self, d: int, i: int) -> list[int]:
        """Creator simplices (filtration indices) of the classes alive at grid index i."""
        out = []
        births = self.births[d]
        for j in sorted(self.cycle_of[d]):
            if births[j] > i:
                break
            death = self._death(d, j)
            if death is None or death > i:
                out.append(j)
        return out

    def cycle(self, d: int, j: int) -> SparseVec:
        return self.cycle_of[d][j]

    def decompose(self, d: int, i: int, z: Chain, preimage: bool = False) -> tuple[SparseVec, SparseVec | None]:
        """Write the cycle z of R^i as sum of class representatives plus a boundary.

        Returns ``(coef, pre)`` where ``coef`` maps creator simplices to
        coefficients and ``pre`` (if requested) is a (d+1)-chain whose
        boundary is the remaining part.
        """
        p = self.p
        r = dict(z)
        coef: SparseVec = {}
        pre: SparseVec | None = {} if preimage else None
        piv = self.pivot_of.get(d + 1, {})
        births_d = self.births[d]
        births_up = self.births[d + 1] if d + 1 < len(self.births) else None
        red_up = self.reduced.get(d + 1)
        trans_up = self.transform.get(d + 1)
        cycles = self.cycle_of[d]
        while r:
            l = max(r)
            if births_d[l] > i:
                raise NotACycleError(f"chain uses a {d}-simplex absent at index {i}")
            col = piv.get(l)
            if col is not None and births_up[col] <= i:
                bcol = red_up[col]
                c = (r[l] * inverse(bcol[l], p)) % p
                axpy(r, -c, bcol, p)
                if preimage:
                    if trans_up is None:
                        raise ValueError(f"no boundary preimages stored for degree {d}")
                    axpy(pre, c, trans_up[col], p)
                continue
            z_l = cycles.get(l)
            if z_l is None:
                raise NotACycleError(f"chain is not a {d}-cycle at index {i}")
            c = r[l]
            axpy(r, -c, z_l, p)
            coef[l] = (coef.get(l, 0) + c) % p
        return coef, pre

    def coordinates(self, d: int, i: int, z: Chain, basis: Sequence[int] | None = None) -> np.ndarray:
        basis = self.basis(d, i) if basis is None else basis
        coef, _ = self.decompose(d, i, z)
        pos = {j: k for k, j in enumerate(basis)}
        out = np.zeros(len(basis), dtype=np.int64)
        for j, c in coef.items():
            out[pos[j]] = c
        return out

    def solve(self, d: int, i: int, z: Chain) -> SparseVec:
        """A (d+1)-chain of R^i whose boundary is z."""
        coef, pre = self.decompose(d, i, z, preimage=True)
        if coef:
            raise NotABoundaryError(f"{d}-cycle is not a boundary at index {i}")
        return pre

    def boundary(self, k: int, chain: Chain) -> SparseVec:
        """Boundary of a k-chain (filtration indices)."""
        if k == 0:
            return {}
        p = self.p
        out: SparseVec = {}
        simp = self.fc.simplices[k]
        idx = self.fc.index(k - 1)
        for j, c in chain.items():
            s = simp[j]
            for t in range(len(s)):
                f = idx[s[:t] + s[t + 1:]]
                v = (out.get(f, 0) + (c if t % 2 == 0 else -c)) % p
                if v:
                    out[f] = v
                else:
                    out.pop(f, None)
        return out


def system_homology(system: RipsSystem, p: int) -> dict[Cell, CellHomology]:
    """Per-cell homology engines, cached on the system."""
    cache = system.__dict__.setdefault("_homology_cache", {})
    if p not in cache:
        cache[p] = {c: CellHomology(fc, system.n + 1, p) for c, fc in system.cells.items()}
    return cache[p]


# --------------------------------------------------------------------------
# cosheaves


@dataclass
class Stalk:
    """H_d of one local complex: the basis is a list of creator simplices."""

    cell: Cell
    degree: int
    index: int
    basis: list[int]
    engine: CellHomology

    @property
    def dim(self) -> int:
        return len(self.basis)

    def rep(self, k: int) -> Chain:
        return self.engine.cycle(self.degree, self.basis[k])

    def coordinates(self, z: Chain) -> np.ndarray:
        return self.engine.coordinates(self.degree, self.index, z, self.basis)

    def chain_of(self, coords) -> Chain:
        out: Chain = {}
        for k, c in enumerate(coords):
            if int(c) % self.engine.p:
                axpy(out, int(c), self.rep(k), self.engine.p)
        return out


@dataclass
class Cosheaf:
    """A cosheaf on a path nerve: stalk dimensions and extension matrices.

    ``left[j]`` maps the stalk on e_j to the stalk on v_j and ``right[j]``
    maps it to v_{j+1}.  ``stalks`` holds chain-level data when the cosheaf
    comes from a Rips system.
    """

    nerve: PathNerve
    p: int
    vertex_dims: tuple[int, ...]
    edge_dims: tuple[int, ...]
    left: tuple[FieldMatrix, ...]
    right: tuple[FieldMatrix, ...]
    degree: int | None = None
    index: int | None = None
    vertex_stalks: tuple[Stalk, ...] | None = field(default=None, repr=False)
    edge_stalks: tuple[Stalk, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        k = self.nerve.k
        if len(self.vertex_dims) != k or len(self.edge_dims) != k - 1:
            raise ValueError("stalk dimension lists do not match the nerve")
        for j in range(k - 1):
            if self.left[j].shape != (self.vertex_dims[j], self.edge_dims[j]):
                raise ValueError(f"left extension of edge {j} has wrong shape")
            if self.right[j].shape != (self.vertex_dims[j + 1], self.edge_dims[j]):
                raise ValueError(f"right extension of edge {j} has wrong shape")

    @property
    def vertex_offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.vertex_dims)]).astype(int)

    @property
    def edge_offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.edge_dims)]).astype(int)

    def extension(self, v: int, e: int) -> FieldMatrix:
        if v == e:
            return self.left[e]
        if v == e + 1:
            return self.right[e]
        raise ValueError(f"v{v} is not a face of e{e}")

    @cached_property
    def homology(self) -> "CosheafHomology":
        return cosheaf_homology(self)

    def summary(self) -> str:
        lines = [f"cosheaf degree={self.degree} index={self.index} GF({self.p})"]
        for j in range(self.nerve.k):
            lines.append(f"  v{j}: dim {self.vertex_dims[j]}")
            if j < self.nerve.k - 1:
                lines.append(f"  e{j}: dim {self.edge_dims[j]}  rank(left)={fl.rank(self.left[j])}"
                             f"  rank(right)={fl.rank(self.right[j])}")
        h = self.homology
        lines.append(f"  H0 dim {h.H0.dim}, H1 dim {h.H1.dim}")
        dec = gabriel_decompose(self)
        lines.append("  summands: " + ", ".join(s.describe() for s in dec.summands))
        return "\n".join(lines)


def abstract_cosheaf(vertex_dims: Sequence[int], edge_dims: Sequence[int], left: Sequence, right: Sequence,
                     p: int, flip: bool = False) -> Cosheaf:
    """Cosheaf from plain integer matrices (no chain-level data)."""
    nerve = PathNerve(len(vertex_dims), flip)

    def fm(a, r, c):
        arr = np.asarray(a, dtype=np.int64).reshape(r, c)
        return FieldMatrix(r, c, p, dense=arr)

    L = tuple(fm(left[j], vertex_dims[j], edge_dims[j]) for j in range(len(edge_dims)))
    R = tuple(fm(right[j], vertex_dims[j + 1], edge_dims[j]) for j in range(len(edge_dims)))
    return Cosheaf(nerve, p, tuple(vertex_dims), tuple(edge_dims), L, R)


def assemble_cosheaf(system: RipsSystem, i: int, d: int, p: int) -> Cosheaf:
    """The cosheaf sigma -> H_d(R^i_sigma) with extensions induced by inclusion."""
    if d < 0:
        raise ValueError("degree must be >= 0")
    eng = system_homology(system, p)
    vst = tuple(Stalk(c, d, i, eng[c].basis(d, i), eng[c]) for c in system.vertex_cells)
    est = tuple(Stalk(c, d, i, eng[c].basis(d, i), eng[c]) for c in system.edge_cells)
    left, right = [], []
    for j, es in enumerate(est):
        for side, out in ((0, left), (1, right)):
            vs = vst[j + side]
            emap = system.edge_maps[(j, side)][d]
            cols = []
            for k in range(es.dim):
                z = {int(emap[t]): c for t, c in es.rep(k).items()}
                try:
                    cols.append(fl.to_sparse(vs.coordinates(z), p))
                except NotACycleError as exc:
                    raise NotACycleError(f"image of a class on e{j} is not a cycle on v{j + side}") from exc
            out.append(FieldMatrix(vs.dim, es.dim, p, columns=cols))
    return Cosheaf(system.nerve, p, tuple(s.dim for s in vst), tuple(s.dim for s in est), tuple(left),
                   tuple(right), d, i, vst, est)


def cosheaf_boundary(F: Cosheaf) -> FieldMatrix:
    """The map from the edge stalks to the vertex stalks, blocks +-extension."""
    k = F.nerve.k
    blocks = [[None] * (k - 1) for _ in range(k)]
    for j in range(k - 1):
        blocks[j][j] = F.left[j].scale(F.nerve.left_sign)
        blocks[j + 1][j] = F.right[j].scale(F.nerve.right_sign)
    return fl.block_matrix(blocks, F.vertex_dims, F.edge_dims, F.p)


@dataclass
class CosheafHomology:
    """H0 = coker of the boundary (on vertex stalks) and H1 = its kernel (on edge stalks)."""

    boundary: FieldMatrix
    H0: fl.QuotientSpace
    H1: fl.QuotientSpace


def cosheaf_homology(F: Cosheaf) -> CosheafHomology:
    D = cosheaf_boundary(F)
    nv, ne = D.rows, D.cols
    H0 = fl.quotient(fl.SubspaceBasis.standard(nv, F.p), fl.column_space(D))
    H1 = fl.quotient(fl.nullspace(D), fl.SubspaceBasis.zero(ne, F.p))
    return CosheafHomology(D, H0, H1)


@dataclass
class CosheafMorphism:
    source: Cosheaf
    target: Cosheaf
    vertex_maps: tuple[FieldMatrix, ...]
    edge_maps: tuple[FieldMatrix, ...]

    def check_naturality(self) -> None:
        S, T = self.source, self.target
        for j in range(S.nerve.k - 1):
            for v, (ext_s, ext_t) in ((j, (S.left[j], T.left[j])), (j + 1, (S.right[j], T.right[j]))):
                if ext_t @ self.edge_maps[j] != self.vertex_maps[v] @ ext_s:
                    raise ArithmeticError(f"naturality fails on v{v} <= e{j}")

    @property
    def vertex_block(self) -> FieldMatrix:
        return fl.block_diag(self.vertex_maps, self.source.p)

    @property
    def edge_block(self) -> FieldMatrix:
        return fl.block_diag(self.edge_maps, self.source.p)


def cosheaf_morphism(system: RipsSystem, i: int, d: int, F_i: Cosheaf, F_ip1: Cosheaf) -> CosheafMorphism:
    """Maps F^i_d -> F^{i+1}_d induced by the inclusions R^i_sigma -> R^{i+1}_sigma."""
    p = F_i.p

    def stalk_map(src: Stalk, dst: Stalk) -> FieldMatrix:
        cols = [fl.to_sparse(dst.coordinates(src.rep(k)), p) for k in range(src.dim)]
        return FieldMatrix(dst.dim, src.dim, p, columns=cols)

    vm = tuple(stalk_map(a, b) for a, b in zip(F_i.vertex_stalks, F_ip1.vertex_stalks))
    em = tuple(stalk_map(a, b) for a, b in zip(F_i.edge_stalks, F_ip1.edge_stalks))
    phi = CosheafMorphism(F_i, F_ip1, vm, em)
    phi.check_naturality()
    return phi


def induced_on_homology(phi: CosheafMorphism) -> tuple[FieldMatrix, FieldMatrix]:
    """Matrices of H0(phi) and H1(phi) in the stored quotient bases."""
    hs, ht = phi.source.homology, phi.target.homology
    p = phi.source.p
    vb, eb = phi.vertex_block, phi.edge_block
    h0 = [fl.to_sparse(ht.H0.coordinates(vb.apply(r)), p) for r in hs.H0.class_reps.sparse_columns()]
    h1 = [fl.to_sparse(ht.H1.coordinates(eb.apply(r)), p) for r in hs.H1.class_reps.sparse_columns()]
    return FieldMatrix(ht.H0.dim, hs.H0.dim, p, columns=h0), FieldMatrix(ht.H1.dim, hs.H1.dim, p, columns=h1)


# --------------------------------------------------------------------------
# interval decomposition along the path


@dataclass
class IndecomposableSummand:
    """A summand with 1-dimensional stalks on the cells ``start..end`` of the path.

    Cells are numbered along the path: vertex j is 2j and edge j is 2j+1.
    ``vectors[t]`` is the summand's basis vector in the original stalk at t.
    """

    start: int
    end: int
    vectors: dict[int, np.ndarray]

    @property
    def kind(self) -> str:
        left = "[" if self.start % 2 == 0 else "]"
        right = "]" if self.end % 2 == 0 else "["
        return f"{left}-{right}"

    @property
    def vertex_range(self) -> tuple[int, int] | None:
        """First and last nerve vertex in the support (None if no vertex)."""
        lo, hi = (self.start + 1) // 2, self.end // 2
        return (lo, hi) if lo <= hi else None

    def cells(self) -> range:
        return range(self.start, self.end + 1)

    def describe(self) -> str:
        def name(t):
            return f"v{t // 2}" if t % 2 == 0 else f"e{t // 2}"

        return f"{self.kind}[{name(self.start)}..{name(self.end)}]"


@dataclass
class GabrielDecomposition:
    cosheaf: Cosheaf
    summands: list[IndecomposableSummand]

    def members(self, t: int) -> list[int]:
        return [s for s, S in enumerate(self.summands) if S.start <= t <= S.end]

    def basis(self, t: int) -> FieldMatrix:
        """Change of basis at cell t: columns are summand vectors (summand order)."""
        dim = _cell_dim(self.cosheaf, t)
        cols = [fl.to_sparse(self.summands[s].vectors[t], self.cosheaf.p) for s in self.members(t)]
        return FieldMatrix(dim, len(cols), self.cosheaf.p, columns=cols)

    def decomposed_extension(self, e: int, side: int) -> FieldMatrix:
        """The extension e_e -> v_{e+side} in summand coordinates (a partial matching)."""
        t_e, t_v = 2 * e + 1, 2 * (e + side)
        src, dst = self.members(t_e), self.members(t_v)
        pos = {s: k for k, s in enumerate(dst)}
        cols = [{pos[s]: 1} if s in pos else {} for s in src]
        return FieldMatrix(len(dst), len(src), self.cosheaf.p, columns=cols)

    def reconstruct(self) -> tuple[list[FieldMatrix], list[FieldMatrix]]:
        """Extensions rebuilt from the summands through the change of basis."""
        left, right = [], []
        for e in range(self.cosheaf.nerve.k - 1):
            inv_e = fl.matrix_inverse(self.basis(2 * e + 1))
            for side, out in ((0, left), (1, right)):
                out.append(self.basis(2 * (e + side)) @ self.decomposed_extension(e, side) @ inv_e)
        return left, right

    def count(self, kind: str) -> int:
        return sum(1 for S in self.summands if S.kind == kind)


def _cell_dim(F: Cosheaf, t: int) -> int:
    return F.vertex_dims[t // 2] if t % 2 == 0 else F.edge_dims[t // 2]


def _key(S: IndecomposableSummand) -> tuple[int, int]:
    # S may absorb T (S += c T keeps a decomposition) exactly when key(T) <= key(S)
    return (1, S.start) if S.start % 2 == 0 else (0, -S.start)


def gabriel_decompose(F: Cosheaf) -> GabrielDecomposition:
    """Interval decomposition by a left-to-right sweep over the path.

    Basis changes only ever add a multiple of one summand to another when a
    module homomorphism between the two intervals exists, so the summands
    built so far stay a decomposition of the restricted cosheaf.
    """
    p = F.p
    ncell = 2 * F.nerve.k - 1
    summands: list[IndecomposableSummand] = []
    alive: list[int] = []

    def absorb(target: int, source: int, c: int, upto: int):
        # vectors of `target` += c * vectors of `source` on their common cells
        S, T = summands[target], summands[source]
        for t in range(max(S.start, T.start), upto + 1):
            S.vectors[t] = (S.vectors[t] + c * T.vectors[t]) % p

    d0 = F.vertex_dims[0]
    for k in range(d0):
        summands.append(IndecomposableSummand(0, 0, {0: _unit(d0, k)}))
        alive.append(len(summands) - 1)

    for t in range(ncell - 1):
        nxt = t + 1
        if nxt % 2 == 1:
            # vertex t <- edge nxt
            e = nxt // 2
            G = F.left[e].to_dense()
            m = G.shape[1]
            order = sorted(alive, key=lambda s: (_key(summands[s]), s))
            X = np.stack([summands[s].vectors[t] for s in order], axis=1) if order else np.zeros((G.shape[0], 0), np.int64)
            Xinv = _inv_dense(X, p)
            Y = (Xinv @ G) % p
            Y, W = _reduce_low(Y, p)
            lows = {}
            for c in range(m):
                nz = np.flatnonzero(Y[:, c])
                if nz.size:
                    lows[c] = int(nz[-1])
            for c in sorted(lows, key=lambda c: lows[c]):
                P = lows[c]
                for r in np.flatnonzero(Y[:P, c]):
                    a = int(Y[r, c])
                    Y[r, :] = (Y[r, :] - a * Y[P, :]) % p
                    absorb(order[P], order[int(r)], a, t)
            matched = {}
            for c, P in lows.items():
                matched[order[P]] = W[:, c] % p
            new_alive = []
            for s in alive:
                if s in matched:
                    summands[s].vectors[nxt] = matched[s]
                    summands[s].end = nxt
                    new_alive.append(s)
            for c in range(m):
                if c not in lows:
                    summands.append(IndecomposableSummand(nxt, nxt, {nxt: W[:, c] % p}))
                    new_alive.append(len(summands) - 1)
            alive = new_alive
        else:
            # edge t -> vertex nxt
            e = t // 2
            Fm = F.right[e].to_dense()
            dim_v = Fm.shape[0]
            order = sorted(alive, key=lambda s: (_key(summands[s]), s))
            table: dict[int, tuple[np.ndarray, int]] = {}
            survivors = []
            for s in order:
                v = (Fm @ summands[s].vectors[t]) % p
                while True:
                    nz = np.flatnonzero(v)
                    if not nz.size:
                        break
                    l = int(nz[-1])
                    if l not in table:
                        break
                    u, T = table[l]
                    a = (int(v[l]) * inverse(int(u[l]), p)) % p
                    v = (v - a * u) % p
                    absorb(s, T, -a % p, t)
                if np.any(v):
                    table[int(np.flatnonzero(v)[-1])] = (v, s)
                    summands[s].vectors[nxt] = v
                    summands[s].end = nxt
                    survivors.append(s)
            # complete the vertex stalk with unit vectors
            pivots = {l: u for l, (u, _) in table.items()}
            new_alive = list(survivors)
            for k in range(dim_v):
                u = _unit(dim_v, k)
                r = u.copy()
                while True:
                    nz = np.flatnonzero(r)
                    if not nz.size:
                        break
                    l = int(nz[-1])
                    if l not in pivots:
                        break
                    w = pivots[l]
                    r = (r - (int(r[l]) * inverse(int(w[l]), p)) * w) % p
                if np.any(r):
                    pivots[int(np.flatnonzero(r)[-1])] = r
                    summands.append(IndecomposableSummand(nxt, nxt, {nxt: u}))
                    new_alive.append(len(summands) - 1)
            alive = new_alive
    for S in summands:
        for t in list(S.vectors):
            S.vectors[t] = np.asarray(S.vectors[t], dtype=np.int64) % p
    summands.sort(key=lambda S: (S.start, S.end))
    return GabrielDecomposition(F, summands)


def _unit(n: int, k: int) -> np.ndarray:
    u = np.zeros(n, dtype=np.int64)
    u[k] = 1
    return u


def _inv_dense(X: np.ndarray, p: int) -> np.ndarray:
    n = X.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    return fl.matrix_inverse(FieldMatrix(n, n, p, dense=X)).to_dense()


def _reduce_low(Y: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Column-reduce a small dense matrix with the low rule; normalize lows to 1.

    Returns ``(R, W)`` with ``R = Y W`` mod p and W invertible.
    """
    Y = Y.copy() % p
    n, m = Y.shape
    W = np.eye(m, dtype=np.int64)
    pivot_of = {}
    for c in range(m):
        while True:
            nz = np.flatnonzero(Y[:, c])
            if not nz.size:
                break
            l = int(nz[-1])
            k = pivot_of.get(l)
            if k is None:
                s = inverse(int(Y[l, c]), p)
                Y[:, c] = (Y[:, c] * s) % p
                W[:, c] = (W[:, c] * s) % p
                pivot_of[l] = c
                break
            a = int(Y[l, c])
            Y[:, c] = (Y[:, c] - a * Y[:, k]) % p
            W[:, c] = (W[:, c] - a * W[:, k]) % p
    return Y, W


def h0_summand_basis(F: Cosheaf, dec: GabrielDecomposition) -> tuple[FieldMatrix, list[tuple[int, int]]]:
    """H0 classes of the [-] summands, as columns in the stored H0 coordinates.

    Each [-] summand contributes the class of its vector at its leftmost
    vertex; the second return value lists the summands' vertex ranges.
    """
    H = F.homology
    off = F.vertex_offsets
    cols, tags = [], []
    for S in dec.summands:
        if S.kind != "[-]":
            continue
        lo, hi = S.vertex_range
        x = {}
        vec = S.vectors[2 * lo]
        for k in np.flatnonzero(vec):
            x[int(off[lo] + k)] = int(vec[k])
        cols.append(fl.to_sparse(H.H0.coordinates(x), F.p))
        tags.append((lo, hi))
    return FieldMatrix(H.H0.dim, len(cols), F.p, columns=cols), tags
