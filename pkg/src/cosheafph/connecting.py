"""The basis ledger, the connecting morphism and the distributed persistence module.

For every grid index i the degree-n homology of the global complex splits as
H0 of the degree-n cosheaf plus H1 of the degree-(n-1) cosheaf.  The maps
between consecutive indices need one more ingredient besides the induced
maps on cosheaf homology: the connecting morphism delta, which sends an H1
class that dies at i+1 to the H0 class it turns into.  Computing delta needs
chain-level bookkeeping (representatives b* and vertex chains Gamma with
boundary e(b*)), which is carried from one index to the next.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import fieldlin as fl
from .cosheafalg import (
    Chain,
    Cosheaf,
    CosheafMorphism,
    assemble_cosheaf,
    cosheaf_morphism,
    induced_on_homology,
    system_homology,
)
from .covernerve import RipsSystem
from .fieldlin import FieldMatrix, axpy

EdgeChains = list[Chain]
VertexChains = list[Chain]


class LedgerError(ArithmeticError):
    """A defining identity of the ledger failed; indicates a bug, not bad input."""


@dataclass
class IndexData:
    """Cosheaves at one index and their maps to the next index."""

    i: int
    top: Cosheaf
    low: Cosheaf | None
    phi_top: CosheafMorphism | None = None
    phi_low: CosheafMorphism | None = None
    h0_map: FieldMatrix | None = None
    h1_map: FieldMatrix | None = None


def build_index_data(system: RipsSystem, p: int, threads: int = 1, check: bool = True) -> list[IndexData]:
    """Cosheaves F^i_n, F^i_{n-1} for i = 1..L with induced maps on homology."""
    n = system.n
    L = system.L
    system_homology(system, p)

    def at(i: int) -> IndexData:
        top = assemble_cosheaf(system, i, n, p)
        low = assemble_cosheaf(system, i, n - 1, p) if n >= 1 else None
        return IndexData(i, top, low)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            data = list(ex.map(at, range(1, L + 1)))
    else:
        data = [at(i) for i in range(1, L + 1)]
    for a, b in zip(data, data[1:]):
        a.phi_top = cosheaf_morphism(system, a.i, n, a.top, b.top)
        a.h0_map, _ = induced_on_homology(a.phi_top)
        if a.low is not None:
            a.phi_low = cosheaf_morphism(system, a.i, n - 1, a.low, b.low)
            _, a.h1_map = induced_on_homology(a.phi_low)
    return data


# --------------------------------------------------------------------------
# chain helpers


def edge_chains_of(F: Cosheaf, y) -> EdgeChains:
    """Cycle chains per edge representing the H1 class with coordinates y."""
    H = F.homology
    x = H.H1.class_reps @ np.asarray(y, dtype=np.int64)
    off = F.edge_offsets
    return [s.chain_of(x[off[j]:off[j + 1]]) for j, s in enumerate(F.edge_stalks)]


def h1_class_of(F: Cosheaf, chains: EdgeChains) -> np.ndarray:
    """H1 coordinates of a tuple of edge cycles (must lie in the kernel of the boundary)."""
    parts = [s.coordinates(c) for s, c in zip(F.edge_stalks, chains)]
    vec = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    return F.homology.H1.coordinates(vec)


def h0_class_of(F: Cosheaf, chains: VertexChains) -> np.ndarray:
    parts = [s.coordinates(c) for s, c in zip(F.vertex_stalks, chains)]
    return F.homology.H0.coordinates(np.concatenate(parts))


def apply_e(system: RipsSystem, chains: EdgeChains, degree: int, p: int) -> VertexChains:
    """The signed map e: sum over edges of C_degree(R_e) into the vertex chains."""
    out: VertexChains = [{} for _ in system.vertex_cells]
    nerve = system.nerve
    for j, ch in enumerate(chains):
        for side, sign in ((0, nerve.left_sign), (1, nerve.right_sign)):
            emap = system.edge_maps[(j, side)][degree]
            axpy(out[j + side], sign, {int(emap[t]): c for t, c in ch.items()}, p)
    return out


def combine(chains: list[list[Chain]], coef, p: int) -> list[Chain]:
    """Linear combination of tuples of chains."""
    width = len(chains[0]) if chains else 0
    out = [dict() for _ in range(width)]
    for c, tup in zip(coef, chains):
        c = int(c) % p
        if c:
            for k, ch in enumerate(tup):
                axpy(out[k], c, ch, p)
    return out


# --------------------------------------------------------------------------
# the ledger


@dataclass
class LedgerEntry:
    """Bases and chain data at one index.

    ``basis`` has columns B^i in H1 coordinates, the complement part B_A first
    and the kernel part B_ker last.  ``c_basis`` holds the intermediate basis
    C^i (inherited images first).  Chain tuples are indexed like the columns.
    """

    i: int
    basis: FieldMatrix
    n_A: int
    b_star: list[EdgeChains]
    gamma: list[VertexChains]
    c_basis: FieldMatrix
    n_im: int
    c_star: list[EdgeChains]
    gamma_c: list[VertexChains]
    boundary_identity_ok: bool = True

    @property
    def n_ker(self) -> int:
        return self.basis.cols - self.n_A

    @property
    def n_D(self) -> int:
        return self.c_basis.cols - self.n_im

    def summary(self) -> dict:
        return {"i": self.i, "B_A": self.n_A, "B_ker": self.n_ker, "C_im": self.n_im, "C_D": self.n_D,
                "boundary_of_gamma_equals_e_bstar": self.boundary_identity_ok}


def _solve_vertices(system: RipsSystem, p: int, i: int, target: VertexChains, degree: int) -> VertexChains:
    eng = system_homology(system, p)
    out = []
    for c, t in zip(system.vertex_cells, target):
        try:
            out.append(eng[c].solve(degree, i, t))
        except ArithmeticError as exc:
            raise LedgerError(f"no vertex chain with the required boundary on {c} at index {i}: {exc}") from exc
    return out


def _check_gamma(system: RipsSystem, p: int, gamma: VertexChains, target: VertexChains, degree: int) -> bool:
    eng = system_homology(system, p)
    for c, g, t in zip(system.vertex_cells, gamma, target):
        b = eng[c].boundary(degree + 1, g)
        if b != {k: v % p for k, v in t.items() if v % p}:
            return False
    return True


def ledger_step(prev: LedgerEntry | None, prev_data: IndexData | None, data: IndexData, system: RipsSystem,
                p: int) -> LedgerEntry:
    """One induction step; with ``prev`` None this is the base case."""
    n = system.n
    F = data.low
    H1 = F.homology.H1
    dim = H1.dim
    std = fl.SubspaceBasis.standard(dim, p)

    # inherited images of the previous complement, completed to a basis
    im_cols, c_star, gamma_c = [], [], []
    if prev is not None and prev.n_A:
        im = prev_data.h1_map @ prev.basis.take_columns(range(prev.n_A))
        if fl.rank(im) != prev.n_A:
            raise LedgerError(f"images of the complement basis are dependent at index {data.i}")
        for k in range(prev.n_A):
            col = im.column(k)
            cls = fl.to_sparse(h1_class_of(F, prev.b_star[k]), p)
            if cls != col:
                raise LedgerError(f"inherited representative does not represent its class at index {data.i}")
            im_cols.append(col)
            c_star.append(prev.b_star[k])
            gamma_c.append(prev.gamma[k])
    n_im = len(im_cols)
    partial = fl.SubspaceBasis(FieldMatrix(dim, n_im, p, columns=im_cols))
    fresh = fl.extend_basis(partial, std).vectors.sparse_columns()
    # fresh representatives and vertex chains for the completion
    for col in fresh:
        cs = edge_chains_of(F, fl.to_dense(col, dim))
        c_star.append(cs)
        gamma_c.append(_solve_vertices(system, p, data.i, apply_e(system, cs, n - 1, p), n - 1))
    C = FieldMatrix(dim, dim, p, columns=im_cols + list(fresh))

    # split into complement and kernel of the induced map
    if data.h1_map is not None:
        ker = fl.nullspace(data.h1_map)
    else:
        ker = fl.SubspaceBasis.zero(dim, p)
    comp = fl.extend_basis(ker, std)
    B = fl.hstack([comp.vectors, ker.vectors], dim, p)
    D = fl.matrix_inverse(C) @ B if dim else FieldMatrix(0, 0, p)
    b_star, gamma = [], []
    for k in range(dim):
        d = fl.to_dense(D.column(k), dim)
        b_star.append(combine(c_star, d, p))
        gamma.append(combine(gamma_c, d, p))

    # the boundary identity holds by linearity; verify it
    ok = all(_check_gamma(system, p, g, apply_e(system, b, n - 1, p), n - 1) for b, g in zip(b_star, gamma))
    if not ok:
        raise LedgerError(f"boundary of Gamma differs from e(b*) at index {data.i}")
    return LedgerEntry(data.i, B, comp.dim, b_star, gamma, C, n_im, c_star, gamma_c, ok)


def ledger_base_case(data: IndexData, system: RipsSystem, p: int) -> LedgerEntry:
    return ledger_step(None, None, data, system, p)


# --------------------------------------------------------------------------
# connecting morphism


@dataclass
class DeltaEntry:
    """delta^i on the kernel basis, psi^i on all of H1, and the chosen alphas."""

    i: int
    delta: FieldMatrix
    psi: FieldMatrix
    alphas: list[EdgeChains]
    alpha_identity_ok: bool = True


def delta_value(system: RipsSystem, p: int, data_next: IndexData, alpha: EdgeChains, gamma: VertexChains) -> np.ndarray:
    """H0 class of -e(alpha) + iota(Gamma) at the next index."""
    n = system.n
    x = apply_e(system, alpha, n, p)
    x = [fl.scaled(c, -1, p) for c in x]
    for k, g in enumerate(gamma):
        axpy(x[k], 1, g, p)
    return h0_class_of(data_next.top, x)


def solve_alpha(system: RipsSystem, p: int, i_next: int, b_star: EdgeChains) -> EdgeChains:
    """Per-edge n-chains at index i_next whose boundaries are the given (n-1)-cycles."""
    eng = system_homology(system, p)
    out = []
    for c, z in zip(system.edge_cells, b_star):
        try:
            out.append(eng[c].solve(system.n - 1, i_next, z))
        except ArithmeticError as exc:
            raise LedgerError(f"kernel representative is not a boundary on {c} at index {i_next}") from exc
    return out


def build_delta(entry: LedgerEntry, data: IndexData, data_next: IndexData, system: RipsSystem, p: int) -> DeltaEntry:
    n = system.n
    eng = system_homology(system, p)
    h0_dim = data_next.top.homology.H0.dim
    cols, alphas = [], []
    ok = True
    for k in range(entry.n_A, entry.basis.cols):
        alpha = solve_alpha(system, p, data_next.i, entry.b_star[k])
        for c, a, z in zip(system.edge_cells, alpha, entry.b_star[k]):
            if eng[c].boundary(n, a) != z:
                ok = False
        if not ok:
            raise LedgerError(f"boundary of alpha differs from the kernel representative at index {entry.i}")
        alphas.append(alpha)
        cols.append(fl.to_sparse(delta_value(system, p, data_next, alpha, entry.gamma[k]), p))
    delta = FieldMatrix(h0_dim, len(cols), p, columns=cols)
    return DeltaEntry(entry.i, delta, extend_psi(delta, entry), alphas, ok)


def extend_psi(delta: FieldMatrix, entry: LedgerEntry) -> FieldMatrix:
    """psi = delta composed with the projection onto the kernel part of the B^i basis."""
    p = delta.p
    dim = entry.basis.rows
    if dim == 0:
        return FieldMatrix(delta.rows, 0, p)
    binv = fl.matrix_inverse(entry.basis)
    proj = binv.take_rows(range(entry.n_A, dim))
    return delta @ proj


# --------------------------------------------------------------------------
# the distributed module


@dataclass
class DistributedModule:
    """Spaces H0(F^i_n) + H1(F^i_{n-1}) with the block maps Psi^i."""

    p: int
    n: int
    h0_dims: list[int]
    h1_dims: list[int]
    maps: list[FieldMatrix]
    naive: bool = False

    @property
    def dims(self) -> list[int]:
        return [a + b for a, b in zip(self.h0_dims, self.h1_dims)]

    def block_labels(self, i: int) -> list[str]:
        """Coordinate block names at the 1-based index i."""
        return ["H0"] * self.h0_dims[i - 1] + ["H1"] * self.h1_dims[i - 1]


def assemble_psi(data: IndexData, psi: FieldMatrix | None, n: int, p: int) -> FieldMatrix:
    H0 = data.h0_map
    if data.low is None:
        return H0
    H1 = data.h1_map
    sign = 1 if (n + 1) % 2 == 0 else -1
    top_right = psi.scale(sign) if psi is not None else None
    return fl.block_matrix([[H0, top_right], [None, H1]], [H0.rows, H1.rows], [H0.cols, H1.cols], p)


@dataclass
class DistributedResult:
    system: RipsSystem
    p: int
    data: list[IndexData]
    ledger: list[LedgerEntry]
    deltas: list[DeltaEntry]
    module: DistributedModule

    def ledger_dump(self) -> list[dict]:
        out = []
        for k, entry in enumerate(self.ledger):
            row = entry.summary()
            if k < len(self.deltas):
                row["alpha_boundary_identity"] = self.deltas[k].alpha_identity_ok
                row["delta_rank"] = fl.rank(self.deltas[k].delta)
            out.append(row)
        return out

    def ledger_json(self) -> str:
        return json.dumps(self.ledger_dump(), indent=1, sort_keys=True)


def compute_distributed(system: RipsSystem, p: int, naive: bool = False, threads: int = 1) -> DistributedResult:
    """Build cosheaves, ledger, connecting maps and the module V_Psi on indices 1..L.

    With ``naive`` the connecting block is replaced by zero.
    """
    fl.check_prime(p)
    n = system.n
    data = build_index_data(system, p, threads)
    ledger: list[LedgerEntry] = []
    deltas: list[DeltaEntry] = []
    if n >= 1:
        prev = prev_data = None
        for d in data:
            prev = ledger_step(prev, prev_data, d, system, p)
            prev_data = d
            ledger.append(prev)
        for k in range(len(data) - 1):
            deltas.append(build_delta(ledger[k], data[k], data[k + 1], system, p))
    maps = []
    for k in range(len(data) - 1):
        psi = None
        if n >= 1 and not naive:
            psi = deltas[k].psi
        maps.append(assemble_psi(data[k], psi, n, p))
    h0 = [d.top.homology.H0.dim for d in data]
    h1 = [d.low.homology.H1.dim if d.low is not None else 0 for d in data]
    module = DistributedModule(p, n, h0, h1, maps, naive)
    return DistributedResult(system, p, data, ledger, deltas, module)


def random_kernel_offset(system: RipsSystem, p: int, i_next: int, rng: random.Random) -> EdgeChains:
    """A random n-cycle per edge at index i_next (adding it to alpha keeps the boundary)."""
    eng = system_homology(system, p)
    n = system.n
    out = []
    for c in system.edge_cells:
        e = eng[c]
        ch: Chain = {}
        for j in e.basis(n, i_next):
            axpy(ch, rng.randrange(p), e.cycle(n, j), p)
        # alive class representatives plus boundaries span all n-cycles
        births = e.births[n + 1] if n + 1 < len(e.births) else []
        cols = e.fc.boundary_columns(n + 1, p)
        for col, b in zip(cols, births):
            if b <= i_next:
                axpy(ch, rng.randrange(p), col, p)
        out.append(ch)
    return out
