"""Independent ground truth and executable checks of the distributed construction.

Everything here recomputes from the point cloud with plain linear algebra on
lexicographically ordered complexes: global Rips homology per grid index,
the total complex of the two-column double complex, and the comparison maps
between the distributed module, the total complex and the global homology.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import fieldlin as fl
from .barcodes import Bar, PersistenceModule, barcode_multiset, interval_decompose
from .connecting import DistributedResult, apply_e, delta_value, random_kernel_offset
from .fieldlin import FieldMatrix
from .ripscomplex import (
    FiltrationGrid,
    SimplicialComplex,
    boundary_matrix,
    filtered_rips,
    pairwise_distances,
    rips_complex,
)

# --------------------------------------------------------------------------
# global persistence


def standard_barcode(dist: np.ndarray, grid: FiltrationGrid, n: int, p: int) -> list[Bar]:
    """Barcode of H_n over the whole grid by one reduction of the filtered boundary matrix."""
    N = len(grid)
    fc = filtered_rips(dist, range(dist.shape[0]), FiltrationGrid(grid.values), N, n + 1)
    births_n = fc.births[n]
    if n == 0:
        zero = set(range(len(fc.simplices[0])))
    else:
        red_n = fl.column_reduce(fc.boundary_columns(n, p), p)
        zero = set(red_n.zero_columns())
    red_up = fl.column_reduce(fc.boundary_columns(n + 1, p), p)
    killer = {l: c for l, c in red_up.pivot_of.items()}
    c: Counter = Counter()
    for j in sorted(zero):
        b = int(births_n[j])
        if j in killer:
            d = int(fc.births[n + 1][killer[j]]) - 1
            if d < b:
                continue
        else:
            d = N
        c[(b, d)] += 1
    return [Bar(b, d, m) for (b, d), m in sorted(c.items())]


@dataclass
class GlobalHomology:
    """H_n of the global Rips complex at each index 1..upto, with inclusion-induced maps."""

    complexes: list[SimplicialComplex]
    quotients: list[fl.QuotientSpace]
    module: PersistenceModule


def _selection(src: SimplicialComplex, dst: SimplicialComplex, k: int, p: int) -> FieldMatrix:
    idx = dst.index(k)
    return FieldMatrix(dst.count(k), src.count(k), p, columns=[{idx[s]: 1} for s in src.simplices(k)])


def _homology(K: SimplicialComplex, n: int, p: int) -> fl.QuotientSpace:
    rows = K.count(n)
    Z = fl.nullspace(boundary_matrix(K, n, p)) if n >= 1 else fl.SubspaceBasis.standard(rows, p)
    B = fl.column_space(boundary_matrix(K, n + 1, p)) if K.count(n + 1) else fl.SubspaceBasis.zero(rows, p)
    return fl.quotient(Z, B)


def global_persistence(cloud, grid: FiltrationGrid, n: int, p: int, upto: int | None = None,
                       dist: np.ndarray | None = None) -> GlobalHomology:
    """Homology of each global Rips complex with the maps induced by inclusion."""
    if dist is None:
        dist = pairwise_distances(cloud)
    upto = len(grid) if upto is None else upto
    Ks = [rips_complex(None, None, grid.eps(i), n + 1, dist=dist) for i in range(1, upto + 1)]
    Qs = [_homology(K, n, p) for K in Ks]
    maps = []
    for a in range(upto - 1):
        inc = _selection(Ks[a], Ks[a + 1], n, p)
        cols = [fl.to_sparse(Qs[a + 1].coordinates(inc.apply(r)), p) for r in Qs[a].class_reps.sparse_columns()]
        maps.append(FieldMatrix(Qs[a + 1].dim, Qs[a].dim, p, columns=cols))
    return GlobalHomology(Ks, Qs, PersistenceModule([q.dim for q in Qs], maps, p))


def truncate_bars(bars, L: int) -> Counter:
    c: Counter = Counter()
    for b in bars:
        if b.birth <= L:
            c[(b.birth, min(b.death, L))] += b.multiplicity
    return c


# --------------------------------------------------------------------------
# the total complex


class TotalComplex:
    """Tot_k = (sum over vertices of C_k) + (sum over edges of C_{k-1}) at one index.

    D(x, y) = (dx + (-1)^k e(y), dy), built on lexicographic local complexes.
    """

    def __init__(self, system, i: int, p: int):
        self.system = system
        self.i = i
        self.p = p
        n = system.n
        eps = system.grid.eps(i)
        dist = system.dist
        self.vK = [rips_complex(None, system.cover.elements[j], eps, n + 1, dist=dist) for j in range(system.cover.k)]
        self.eK = [rips_complex(None, system.cover.intersection(j), eps, n + 1, dist=dist)
                   for j in range(system.cover.k - 1)]

    def vertex_sizes(self, k: int) -> list[int]:
        return [K.count(k) if k >= 0 else 0 for K in self.vK]

    def edge_sizes(self, k: int) -> list[int]:
        return [K.count(k) if k >= 0 else 0 for K in self.eK]

    def size(self, k: int) -> int:
        return sum(self.vertex_sizes(k)) + sum(self.edge_sizes(k - 1))

    def e_matrix(self, k: int) -> FieldMatrix:
        """Signed e on k-chains: edge chains to vertex chains."""
        p = self.p
        nerve = self.system.nerve
        nv, ne = len(self.vK), len(self.eK)
        blocks = [[None] * ne for _ in range(nv)]
        for j in range(ne):
            for side, sign in ((0, nerve.left_sign), (1, nerve.right_sign)):
                if k >= 0:
                    blocks[j + side][j] = _selection(self.eK[j], self.vK[j + side], k, p).scale(sign)
        return fl.block_matrix(blocks, self.vertex_sizes(k), self.edge_sizes(k), p)

    def _bd(self, Ks, k: int) -> FieldMatrix:
        mats = []
        for K in Ks:
            if k >= 1:
                mats.append(boundary_matrix(K, k, self.p) if K.count(k) or K.count(k - 1) else
                            FieldMatrix(K.count(k - 1), K.count(k), self.p))
            else:
                mats.append(FieldMatrix(0, K.count(k) if k == 0 else 0, self.p))
        return fl.block_diag(mats, self.p)

    def differential(self, k: int) -> FieldMatrix:
        """D_k: Tot_k -> Tot_{k-1}."""
        p = self.p
        sign = 1 if k % 2 == 0 else -1
        bv = self._bd(self.vK, k)
        be = self._bd(self.eK, k - 1)
        e = self.e_matrix(k - 1).scale(sign)
        return fl.block_matrix([[bv, e], [None, be]],
                               [sum(self.vertex_sizes(k - 1)), sum(self.edge_sizes(k - 2))],
                               [sum(self.vertex_sizes(k)), sum(self.edge_sizes(k - 1))], p)

    def homology(self, k: int) -> fl.QuotientSpace:
        Z = fl.nullspace(self.differential(k))
        D_up = self.differential(k + 1)
        B = fl.column_space(D_up)
        return fl.quotient(Z, B)

    def pack(self, x: list[dict], y: list[dict], k: int) -> dict:
        """(vertex chains, edge chains) keyed by simplices into one Tot_k vector."""
        out = {}
        off = 0
        for K, ch in zip(self.vK, x):
            idx = K.index(k)
            for s, c in ch.items():
                if c % self.p:
                    out[off + idx[s]] = c % self.p
            off += K.count(k)
        for K, ch in zip(self.eK, y):
            idx = K.index(k - 1)
            for s, c in ch.items():
                if c % self.p:
                    out[off + idx[s]] = c % self.p
            off += K.count(k - 1)
        return out

    def inclusion_to(self, other: "TotalComplex", k: int) -> FieldMatrix:
        """The map iota + kappa from Tot_k at this index to Tot_k at ``other``."""
        p = self.p
        mats = [_selection(a, b, k, p) for a, b in zip(self.vK, other.vK)]
        mats += [_selection(a, b, k - 1, p) if k >= 1 else FieldMatrix(0, 0, p) for a, b in zip(self.eK, other.eK)]
        return fl.block_diag(mats, p)

    def to_global(self, K: SimplicialComplex, k: int) -> FieldMatrix:
        """j: Tot_k -> C_k(R) summing vertex inclusions and dropping the edge part."""
        p = self.p
        idx = K.index(k)
        cols = []
        for L in self.vK:
            cols += [{idx[s]: 1} for s in L.simplices(k)]
        cols += [{} for _ in range(sum(self.edge_sizes(k - 1)))]
        return FieldMatrix(K.count(k), len(cols), p, columns=cols)


# --------------------------------------------------------------------------
# checks


@dataclass
class CheckRow:
    check: str
    i: int | None
    ok: bool
    detail: str = ""


@dataclass
class VerificationReport:
    rows: list[CheckRow] = field(default_factory=list)

    def add(self, check: str, i: int | None, ok: bool, detail: str = ""):
        self.rows.append(CheckRow(check, i, bool(ok), detail))

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def first_failure(self) -> CheckRow | None:
        return next((r for r in self.rows if not r.ok), None)

    def extend(self, other: "VerificationReport"):
        self.rows.extend(other.rows)

    def to_text(self) -> str:
        lines = [f"{'check':<40} {'index':>5}  result  detail"]
        for r in self.rows:
            idx = "-" if r.i is None else str(r.i)
            lines.append(f"{r.check:<40} {idx:>5}  {'pass' if r.ok else 'FAIL':<6}  {r.detail}".rstrip())
        lines.append(f"overall: {'pass' if self.ok else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({"ok": self.ok, "rows": [asdict(r) for r in self.rows]}, indent=1, sort_keys=True)


def _lex_chain(fc, k: int, chain: dict) -> dict:
    return {fc.simplices[k][j]: c for j, c in chain.items()}


def verify_dimensions(result: DistributedResult, glob: GlobalHomology) -> VerificationReport:
    """dim H_n(R^i) = dim H0(F_n) + dim H1(F_{n-1}) at each index."""
    rep = VerificationReport()
    mod = result.module
    for i in range(1, len(mod.dims) + 1):
        want = glob.quotients[i - 1].dim
        got = (mod.h0_dims[i - 1], mod.h1_dims[i - 1])
        rep.add("dimension_split", i, want == sum(got), f"H_n={want} H0={got[0]} H1={got[1]}")
    return rep


def verify_total_complex(result: DistributedResult, glob: GlobalHomology) -> tuple[VerificationReport, list]:
    """Tot homology maps isomorphically onto global homology, compatibly with inclusions."""
    system, p, n = result.system, result.p, result.system.n
    L = system.L
    rep = VerificationReport()
    tots = [TotalComplex(system, i, p) for i in range(1, L + 1)]
    tot_h = [t.homology(n) for t in tots]
    phis = []
    for a, t in enumerate(tots):
        Q = glob.quotients[a]
        j = t.to_global(glob.complexes[a], n)
        cols = [fl.to_sparse(Q.coordinates(j.apply(r)), p) for r in tot_h[a].class_reps.sparse_columns()]
        phi = FieldMatrix(Q.dim, tot_h[a].dim, p, columns=cols)
        phis.append(phi)
        bij = phi.rows == phi.cols and fl.rank(phi) == phi.rows
        rep.add("tot_to_global_bijective", a + 1, bij, f"dim {tot_h[a].dim}")
    for a in range(L - 1):
        inc = tots[a].inclusion_to(tots[a + 1], n)
        cols = []
        for r in tot_h[a].class_reps.sparse_columns():
            cols.append(fl.to_sparse(tot_h[a + 1].coordinates(inc.apply(r)), p))
        iota_tot = FieldMatrix(tot_h[a + 1].dim, tot_h[a].dim, p, columns=cols)
        lhs = glob.module.maps[a] @ phis[a]
        rhs = phis[a + 1] @ iota_tot
        bad = [k for k in range(lhs.cols) if lhs.column(k) != rhs.column(k)]
        rep.add("tot_square_commutes", a + 1, not bad, f"first bad basis element {bad[0]}" if bad else "")
        r_expected = fl.rank(glob.module.maps[a])
        rep.add("tot_inclusion_rank", a + 1, fl.rank(iota_tot) == r_expected, f"rank {fl.rank(iota_tot)}")
    return rep, (tots, tot_h)


def _phi_distributed(result: DistributedResult, a: int, tot: TotalComplex, tot_h: fl.QuotientSpace):
    """Matrix of V_Psi^i -> H_n(Tot^i) in (H0 basis, H1 coordinates) and its value on the B basis."""
    system, p, n = result.system, result.p, result.system.n
    d = result.data[a]
    F = d.top
    H0 = F.homology.H0
    off = F.vertex_offsets
    cols = []
    for r in H0.class_reps.sparse_columns():
        x = []
        dense = fl.to_dense(r, H0.ambient_dim)
        for v, st in enumerate(F.vertex_stalks):
            x.append(_lex_chain(system.cells[st.cell], n, st.chain_of(dense[off[v]:off[v + 1]])))
        y = [dict() for _ in system.edge_cells]
        cols.append(fl.to_sparse(tot_h.coordinates(tot.pack(x, y, n)), p))
    on_B = []
    if n >= 1:
        entry = result.ledger[a]
        sign = 1 if (n + 1) % 2 == 0 else -1
        for k in range(entry.basis.cols):
            x = [_lex_chain(system.cells[c], n, fl.scaled(g, sign, p))
                 for c, g in zip(system.vertex_cells, entry.gamma[k])]
            y = [_lex_chain(system.cells[c], n - 1, b) for c, b in zip(system.edge_cells, entry.b_star[k])]
            on_B.append(fl.to_sparse(tot_h.coordinates(tot.pack(x, y, n)), p))
        PhiB = FieldMatrix(tot_h.dim, len(on_B), p, columns=on_B)
        Phi1 = PhiB @ fl.matrix_inverse(entry.basis) if entry.basis.cols else FieldMatrix(tot_h.dim, 0, p)
        cols += list(Phi1.sparse_columns())
    return FieldMatrix(tot_h.dim, len(cols), p, columns=cols)


def verify_square_cases(result: DistributedResult, tot_data) -> VerificationReport:
    """V_Psi maps isomorphically onto Tot homology; the square commutes in all three cases."""
    system, p, n = result.system, result.p, result.system.n
    tots, tot_h = tot_data
    L = system.L
    rep = VerificationReport()
    phis = []
    for a in range(L):
        phi = _phi_distributed(result, a, tots[a], tot_h[a])
        phis.append(phi)
        rep.add("distributed_to_tot_bijective", a + 1, phi.rows == phi.cols and fl.rank(phi) == phi.rows,
                f"dim {phi.cols}")
    mod = result.module
    for a in range(L - 1):
        inc = tots[a].inclusion_to(tots[a + 1], n)
        iota_tot = FieldMatrix(tot_h[a + 1].dim, tot_h[a].dim, p, columns=[
            fl.to_sparse(tot_h[a + 1].coordinates(inc.apply(r)), p) for r in tot_h[a].class_reps.sparse_columns()])
        lhs = phis[a + 1] @ mod.maps[a]
        rhs = iota_tot @ phis[a]
        h0 = mod.h0_dims[a]
        bad = [k for k in range(h0) if lhs.column(k) != rhs.column(k)]
        rep.add("square_case_h0", a + 1, not bad, f"basis element {bad[0]}" if bad else f"{h0} elements")
        if n >= 1:
            entry = result.ledger[a]
            # columns of B as vectors of V_Psi: zero H0 part, B in the H1 part
            Bv = fl.vstack([FieldMatrix(h0, entry.basis.cols, p), entry.basis], entry.basis.cols, p)
            lb, rb = lhs @ Bv, rhs @ Bv
            bad_ker = [k for k in range(entry.n_A, entry.basis.cols) if lb.column(k) != rb.column(k)]
            bad_A = [k for k in range(entry.n_A) if lb.column(k) != rb.column(k)]
            rep.add("square_case_kernel", a + 1, not bad_ker,
                    f"B_ker element {bad_ker[0] - entry.n_A}" if bad_ker else f"{entry.n_ker} elements")
            rep.add("square_case_complement", a + 1, not bad_A,
                    f"B_A element {bad_A[0]}" if bad_A else f"{entry.n_A} elements")
            # the difference class D(0, alpha) must vanish in Tot homology
            sign = 1 if (n + 1) % 2 == 0 else -1
            trivial = True
            for alpha, k in zip(result.deltas[a].alphas, range(entry.n_A, entry.basis.cols)):
                ea = apply_e(system, alpha, n, p)
                x = [_lex_chain(system.cells[c], n, fl.scaled(ch, sign, p)) for c, ch in zip(system.vertex_cells, ea)]
                y = [_lex_chain(system.cells[c], n - 1, b) for c, b in zip(system.edge_cells, entry.b_star[k])]
                if not tot_h[a + 1].is_trivial(tots[a + 1].pack(x, y, n)):
                    trivial = False
            rep.add("kernel_difference_trivial", a + 1, trivial)
    return rep


def verify_alpha_independence(result: DistributedResult, seed: int = 0, trials: int = 2) -> VerificationReport:
    """Re-solving alpha with a random cycle offset must not change delta."""
    system, p = result.system, result.p
    rep = VerificationReport()
    if system.n < 1:
        return rep
    rng = random.Random(seed)
    for a, de in enumerate(result.deltas):
        entry = result.ledger[a]
        nxt = result.data[a + 1]
        ok = True
        for t, alpha in enumerate(de.alphas):
            k = entry.n_A + t
            want = fl.to_dense(de.delta.column(t), de.delta.rows)
            for _ in range(trials):
                off = random_kernel_offset(system, p, nxt.i, rng)
                alt = [dict(x) for x in alpha]
                for x, o in zip(alt, off):
                    fl.axpy(x, 1, o, p)
                got = delta_value(system, p, nxt, alt, entry.gamma[k])
                if not np.array_equal(got % p, want % p):
                    ok = False
        rep.add("delta_alpha_independent", a + 1, ok, f"{len(de.alphas)} kernel elements")
    return rep


def verify_barcode(result: DistributedResult, glob_bars: Sequence[Bar] | None = None,
                   glob: GlobalHomology | None = None) -> VerificationReport:
    """barcode(V_Psi) equals the global barcode truncated at L."""
    rep = VerificationReport()
    L = result.system.L
    ours = barcode_multiset(interval_decompose(PersistenceModule(result.module.dims, result.module.maps,
                                                                 result.p)))
    if glob_bars is not None:
        want = truncate_bars(glob_bars, L)
        diff = _first_diff(ours, want)
        rep.add("barcode_matches_standard", None, ours == want, diff)
    if glob is not None:
        want2 = barcode_multiset(interval_decompose(glob.module))
        rep.add("barcode_matches_global_module", None, ours == want2, _first_diff(ours, want2))
        rep.extend(verify_rank_profile(PersistenceModule(result.module.dims, result.module.maps, result.p),
                                       glob.module))
    return rep


def verify_rank_profile(ours: PersistenceModule, want: PersistenceModule) -> VerificationReport:
    """Per start index i: rank of every composite i -> j agrees (ranks determine the barcode)."""
    rep = VerificationReport()
    N = min(ours.length, want.length)
    for i in range(1, N + 1):
        bad = next((j for j in range(i, N + 1) if ours.rank(i, j) != want.rank(i, j)), None)
        detail = "" if bad is None else f"rank {i}->{bad}: {ours.rank(i, bad)} vs {want.rank(i, bad)}"
        rep.add("rank_profile", i, bad is None, detail)
    return rep


def _first_diff(a: Counter, b: Counter) -> str:
    keys = sorted(set(a) | set(b))
    for k in keys:
        if a.get(k, 0) != b.get(k, 0):
            return f"first differing bar [{k[0]},{k[1]}] (index {k[0]}): {a.get(k, 0)} vs {b.get(k, 0)}"
    return ""


def verify_all(result: DistributedResult, seed: int = 0, diagrams: bool = True) -> VerificationReport:
    """All checks for one pipeline result."""
    system, p, n = result.system, result.p, result.system.n
    glob = global_persistence(system.cloud, system.grid, n, p, upto=system.L, dist=system.dist)
    std = standard_barcode(system.dist, system.grid, n, p)
    rep = VerificationReport()
    rep.extend(verify_barcode(result, std, glob))
    rep.extend(verify_dimensions(result, glob))
    if diagrams:
        r3, tot_data = verify_total_complex(result, glob)
        rep.extend(r3)
        rep.extend(verify_square_cases(result, tot_data))
    rep.extend(verify_alpha_independence(result, seed))
    return rep

