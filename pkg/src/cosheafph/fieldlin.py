"""Exact linear algebra over a prime field GF(p).

Vectors are handled internally as sparse dictionaries ``{row: value}`` with
values in ``1..p-1``; matrices are :class:`FieldMatrix` objects which keep a
sparse column representation and switch to a dense numpy array when more than
a quarter of the entries are nonzero.

Every elimination in this module uses the same pivot rule: the pivot of a
vector is its *last* nonzero row (its "low"), and columns are processed left to
right.  This is the rule used by boundary-matrix reduction in persistent
homology, which keeps filtration-ordered reductions triangular.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

SparseVec = dict[int, int]

DENSE_FILL = 0.25


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    k = 2
    while k * k <= p:
        if p % k == 0:
            return False
        k += 1
    return True


def check_prime(p: int) -> int:
    p = int(p)
    if not is_prime(p):
        raise ValueError(f"field characteristic must be prime, got {p}")
    return p


def inverse(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse in GF({p})")
    return pow(a, p - 2, p)


@dataclass(frozen=True)
class FieldElement:
    """An element of GF(p)."""

    value: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "value", int(self.value) % self.p)

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.p != self.p:
                raise ValueError("elements of different fields")
            return other.value
        return int(other)

    def __add__(self, other):
        return FieldElement(self.value + self._other(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.value - self._other(other), self.p)

    def __rsub__(self, other):
        return FieldElement(self._other(other) - self.value, self.p)

    def __mul__(self, other):
        return FieldElement(self.value * self._other(other), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value, self.p)

    def __truediv__(self, other):
        return FieldElement(self.value * inverse(self._other(other), self.p), self.p)

    def inverse(self) -> "FieldElement":
        return FieldElement(inverse(self.value, self.p), self.p)

    def __int__(self):
        return self.value

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.p == other.p and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == int(other) % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __repr__(self):
        return f"{self.value} (mod {self.p})"


# --------------------------------------------------------------------------
# sparse vector kernels


def axpy(y: SparseVec, a: int, x: Mapping[int, int], p: int) -> SparseVec:
    """In place ``y += a*x`` over GF(p); returns ``y``."""
    if a % p == 0:
        return y
    get = y.get
    for k, v in x.items():
        s = (get(k, 0) + a * v) % p
        if s:
            y[k] = s
        else:
            del y[k]
    return y


def low(v: Mapping[int, int]) -> int:
    """Last nonzero row of ``v``, or -1 for the zero vector."""
    return max(v) if v else -1


def scaled(v: Mapping[int, int], a: int, p: int) -> SparseVec:
    a %= p
    if a == 0:
        return {}
    return {k: (a * x) % p for k, x in v.items()}


def to_sparse(v, p: int) -> SparseVec:
    """Accept a dict, a FieldElement/int sequence or a numpy vector."""
    if isinstance(v, Mapping):
        out = {}
        for k, x in v.items():
            x = int(x) % p
            if x:
                out[int(k)] = x
        return out
    arr = np.asarray([int(x) for x in v], dtype=np.int64) % p
    return {int(k): int(arr[k]) for k in np.flatnonzero(arr)}


def to_dense(v: Mapping[int, int], n: int) -> np.ndarray:
    out = np.zeros(n, dtype=np.int64)
    for k, x in v.items():
        out[k] = x
    return out


# --------------------------------------------------------------------------
# matrices


class FieldMatrix:
    """Immutable matrix over GF(p).

    Storage is a tuple of sparse columns, or a dense ``int64`` array when the
    fill exceeds ``DENSE_FILL``.  Both views are available on demand.
    """

    __slots__ = ("rows", "cols", "p", "_cols", "_dense")

    def __init__(self, rows: int, cols: int, p: int, *, columns=None, dense=None):
        self.rows = int(rows)
        self.cols = int(cols)
        self.p = int(p)
        self._cols = None
        self._dense = None
        if dense is not None:
            arr = np.asarray(dense, dtype=np.int64) % self.p
            if arr.shape != (self.rows, self.cols):
                raise ValueError(f"dense data has shape {arr.shape}, expected {(self.rows, self.cols)}")
            nnz = int(np.count_nonzero(arr))
            if nnz > DENSE_FILL * self.rows * self.cols:
                arr.setflags(write=False)
                self._dense = arr
            else:
                self._cols = tuple(
                    {int(r): int(arr[r, c]) for r in np.flatnonzero(arr[:, c])} for c in range(self.cols)
                )
        else:
            cols_ = tuple(columns) if columns is not None else tuple({} for _ in range(self.cols))
            if len(cols_) != self.cols:
                raise ValueError(f"got {len(cols_)} columns, expected {self.cols}")
            for c in cols_:
                if c and (min(c) < 0 or max(c) >= self.rows):
                    raise ValueError("row index out of range")
            nnz = sum(len(c) for c in cols_)
            if self.rows * self.cols and nnz > DENSE_FILL * self.rows * self.cols:
                arr = np.zeros((self.rows, self.cols), dtype=np.int64)
                for j, c in enumerate(cols_):
                    for r, x in c.items():
                        arr[r, j] = x
                arr.setflags(write=False)
                self._dense = arr
            else:
                self._cols = cols_

    # construction helpers ------------------------------------------------

    @classmethod
    def from_dense(cls, data, p: int) -> "FieldMatrix":
        arr = np.atleast_2d(np.asarray(data, dtype=np.int64))
        if np.asarray(data).ndim == 1 and np.asarray(data).size == 0:
            arr = np.zeros((0, 0), dtype=np.int64)
        return cls(arr.shape[0], arr.shape[1], p, dense=arr)

    @classmethod
    def from_columns(cls, columns: Iterable[Mapping[int, int]], rows: int, p: int) -> "FieldMatrix":
        cols_ = [to_sparse(c, p) for c in columns]
        return cls(rows, len(cols_), p, columns=cols_)

    @classmethod
    def from_entries(cls, entries: Mapping[tuple[int, int], int], rows: int, cols: int, p: int) -> "FieldMatrix":
        cs = [dict() for _ in range(cols)]
        for (r, c), x in entries.items():
            x = int(x) % p
            if x:
                cs[c][r] = x
        return cls(rows, cols, p, columns=cs)

    @classmethod
    def zeros(cls, rows: int, cols: int, p: int) -> "FieldMatrix":
        return cls(rows, cols, p)

    @classmethod
    def identity(cls, n: int, p: int) -> "FieldMatrix":
        return cls(n, n, p, columns=[{j: 1} for j in range(n)])

    # views ---------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def is_dense(self) -> bool:
        return self._dense is not None

    @property
    def nnz(self) -> int:
        if self._dense is not None:
            return int(np.count_nonzero(self._dense))
        return sum(len(c) for c in self._cols)

    def sparse_columns(self) -> tuple[SparseVec, ...]:
        """Sparse columns (shared; do not mutate)."""
        if self._cols is None:
            arr = self._dense
            self._cols = tuple(
                {int(r): int(arr[r, c]) for r in np.flatnonzero(arr[:, c])} for c in range(self.cols)
            )
        return self._cols

    def column(self, j: int) -> SparseVec:
        return dict(self.sparse_columns()[j])

    def to_dense(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense.copy()
        arr = np.zeros((self.rows, self.cols), dtype=np.int64)
        for j, c in enumerate(self._cols):
            for r, x in c.items():
                arr[r, j] = x
        return arr

    def __array__(self, dtype=None, copy=None):
        arr = self.to_dense()
        return arr if dtype is None else arr.astype(dtype)

    def __getitem__(self, key):
        r, c = key
        if self._dense is not None:
            return int(self._dense[r, c])
        return self._cols[c].get(r, 0)

    def is_zero(self) -> bool:
        return self.nnz == 0

    # algebra -------------------------------------------------------------

    def _check_same(self, other: "FieldMatrix"):
        if not isinstance(other, FieldMatrix):
            raise TypeError("expected a FieldMatrix")
        if other.p != self.p:
            raise ValueError(f"field mismatch: GF({self.p}) vs GF({other.p})")

    @property
    def T(self) -> "FieldMatrix":
        if self._dense is not None:
            return FieldMatrix(self.cols, self.rows, self.p, dense=self._dense.T)
        rows = [dict() for _ in range(self.rows)]
        for j, c in enumerate(self._cols):
            for r, x in c.items():
                rows[r][j] = x
        return FieldMatrix(self.cols, self.rows, self.p, columns=rows)

    def __add__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_same(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        if self._dense is not None or other._dense is not None:
            return FieldMatrix(self.rows, self.cols, self.p, dense=self.to_dense() + other.to_dense())
        cols_ = [axpy(dict(a), 1, b, self.p) for a, b in zip(self._cols, other._cols)]
        return FieldMatrix(self.rows, self.cols, self.p, columns=cols_)

    def __neg__(self) -> "FieldMatrix":
        return self.scale(-1)

    def __sub__(self, other: "FieldMatrix") -> "FieldMatrix":
        return self + (-other)

    def scale(self, a: int) -> "FieldMatrix":
        a = int(a) % self.p
        if self._dense is not None:
            return FieldMatrix(self.rows, self.cols, self.p, dense=self._dense * a)
        return FieldMatrix(self.rows, self.cols, self.p, columns=[scaled(c, a, self.p) for c in self._cols])

    def __mul__(self, a):
        if isinstance(a, FieldElement):
            a = a.value
        if isinstance(a, (int, np.integer)):
            return self.scale(int(a))
        return NotImplemented

    __rmul__ = __mul__

    def apply(self, v: Mapping[int, int]) -> SparseVec:
        """Sparse matrix-vector product."""
        out: SparseVec = {}
        cs = self.sparse_columns()
        for j, x in v.items():
            axpy(out, x, cs[j], self.p)
        return out

    def __matmul__(self, other):
        if isinstance(other, FieldMatrix):
            self._check_same(other)
            if self.cols != other.rows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            if self._dense is not None and other._dense is not None:
                return FieldMatrix(self.rows, other.cols, self.p, dense=_dense_matmul(self._dense, other._dense, self.p))
            cols_ = [self.apply(c) for c in other.sparse_columns()]
            return FieldMatrix(self.rows, other.cols, self.p, columns=cols_)
        if isinstance(other, Mapping):
            return self.apply(to_sparse(other, self.p))
        vec = np.asarray([int(x) for x in other], dtype=np.int64)
        if vec.shape != (self.cols,):
            raise ValueError(f"vector of length {vec.size} does not match {self.cols} columns")
        return to_dense(self.apply(to_sparse(vec, self.p)), self.rows)

    def __eq__(self, other):
        if not isinstance(other, FieldMatrix):
            return NotImplemented
        return self.p == other.p and self.shape == other.shape and np.array_equal(self.to_dense(), other.to_dense())

    __hash__ = None

    def take_columns(self, idx: Sequence[int]) -> "FieldMatrix":
        cs = self.sparse_columns()
        return FieldMatrix(self.rows, len(idx), self.p, columns=[cs[j] for j in idx])

    def take_rows(self, idx: Sequence[int]) -> "FieldMatrix":
        pos = {r: i for i, r in enumerate(idx)}
        cols_ = [{pos[r]: x for r, x in c.items() if r in pos} for c in self.sparse_columns()]
        return FieldMatrix(len(idx), self.cols, self.p, columns=cols_)

    def __repr__(self):
        kind = "dense" if self.is_dense else "sparse"
        if self.rows * self.cols <= 64:
            body = np.array2string(self.to_dense(), separator=" ")
            return f"FieldMatrix(GF({self.p}), {self.rows}x{self.cols}, {kind},\n{body})"
        return f"FieldMatrix(GF({self.p}), {self.rows}x{self.cols}, {kind}, nnz={self.nnz})"


def _dense_matmul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    # int64 is safe while inner_dim * (p-1)^2 stays below 2^63
    if a.shape[1] * (p - 1) ** 2 < 2**62:
        return (a @ b) % p
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for k in range(a.shape[1]):
        out = (out + np.outer(a[:, k], b[k, :]) % p) % p
    return out


def hstack(mats: Sequence[FieldMatrix], rows: int | None = None, p: int | None = None) -> FieldMatrix:
    if not mats:
        if rows is None or p is None:
            raise ValueError("empty hstack needs rows and p")
        return FieldMatrix(rows, 0, p)
    r, q = mats[0].rows, mats[0].p
    cols_ = []
    for m in mats:
        if m.rows != r or m.p != q:
            raise ValueError("hstack: incompatible blocks")
        cols_.extend(m.sparse_columns())
    return FieldMatrix(r, len(cols_), q, columns=cols_)


def vstack(mats: Sequence[FieldMatrix], cols: int | None = None, p: int | None = None) -> FieldMatrix:
    if not mats:
        if cols is None or p is None:
            raise ValueError("empty vstack needs cols and p")
        return FieldMatrix(0, cols, p)
    return hstack([m.T for m in mats]).T


def block_matrix(blocks: Sequence[Sequence[FieldMatrix | None]], row_sizes: Sequence[int],
                 col_sizes: Sequence[int], p: int) -> FieldMatrix:
    """Assemble a block matrix; ``None`` blocks are zero."""
    roff = np.concatenate([[0], np.cumsum(row_sizes)]).astype(int)
    coff = np.concatenate([[0], np.cumsum(col_sizes)]).astype(int)
    cols_ = [dict() for _ in range(int(coff[-1]))]
    for bi, brow in enumerate(blocks):
        for bj, blk in enumerate(brow):
            if blk is None:
                continue
            if blk.shape != (row_sizes[bi], col_sizes[bj]):
                raise ValueError(f"block ({bi},{bj}) has shape {blk.shape}, expected {(row_sizes[bi], col_sizes[bj])}")
            for j, c in enumerate(blk.sparse_columns()):
                tgt = cols_[coff[bj] + j]
                for r, x in c.items():
                    tgt[int(roff[bi]) + r] = x
    return FieldMatrix(int(roff[-1]), int(coff[-1]), p, columns=cols_)


def block_diag(mats: Sequence[FieldMatrix], p: int) -> FieldMatrix:
    n = len(mats)
    blocks = [[mats[i] if i == j else None for j in range(n)] for i in range(n)]
    return block_matrix(blocks, [m.rows for m in mats], [m.cols for m in mats], p)


# --------------------------------------------------------------------------
# elimination


@dataclass
class Reduction:
    """Result of left-to-right column reduction ``R = A V``.

    ``reduced[j]`` is the reduced column j, ``transform[j]`` the column of V
    (only when tracking was requested), and ``pivot_of[r]`` the column whose
    reduced form has low ``r``.
    """

    reduced: list[SparseVec]
    transform: list[SparseVec] | None
    pivot_of: dict[int, int]

    @property
    def rank(self) -> int:
        return len(self.pivot_of)

    def zero_columns(self) -> list[int]:
        return [j for j, c in enumerate(self.reduced) if not c]


def column_reduce(columns: Sequence[Mapping[int, int]], p: int, track: bool = False,
                  skip: Iterable[int] = ()) -> Reduction:
    """Standard column reduction with the low pivot rule.

    Columns listed in ``skip`` are treated as already known to reduce to zero
    (the "clearing" shortcut) and are left empty without work.
    """
    skip = set(skip)
    pivot_of: dict[int, int] = {}
    reduced: list[SparseVec] = []
    transform: list[SparseVec] | None = [] if track else None
    for j, col in enumerate(columns):
        if j in skip:
            reduced.append({})
            if track:
                transform.append({j: 1})
            continue
        r = dict(col)
        v = {j: 1} if track else None
        while r:
            l = max(r)
            k = pivot_of.get(l)
            if k is None:
                break
            other = reduced[k]
            c = (-r[l] * inverse(other[l], p)) % p
            axpy(r, c, other, p)
            if track:
                axpy(v, c, transform[k], p)
        if r:
            pivot_of[max(r)] = j
        reduced.append(r)
        if track:
            transform.append(v)
    return Reduction(reduced, transform, pivot_of)


def rank(A: FieldMatrix) -> int:
    return column_reduce(A.sparse_columns(), A.p).rank


def solve(A: FieldMatrix, b) -> np.ndarray | None:
    """Return some ``x`` with ``A x = b``, or ``None`` when ``b`` is outside the column span.

    The solution is deterministic: free variables are set to zero in the
    order fixed by the low pivot rule.
    """
    b_sparse = to_sparse(b, A.p)
    n_b = len(b) if not isinstance(b, Mapping) else None
    if n_b is not None and n_b != A.rows:
        raise ValueError(f"right-hand side has length {n_b}, matrix has {A.rows} rows")
    if b_sparse and max(b_sparse) >= A.rows:
        raise ValueError("right-hand side index out of range")
    red = column_reduce(A.sparse_columns(), A.p, track=True)
    x = _solve_with(red, b_sparse, A.p)
    if x is None:
        return None
    return to_dense(x, A.cols)


def _solve_with(red: Reduction, b: SparseVec, p: int) -> SparseVec | None:
    r = dict(b)
    x: SparseVec = {}
    while r:
        l = max(r)
        k = red.pivot_of.get(l)
        if k is None:
            return None
        col = red.reduced[k]
        c = (r[l] * inverse(col[l], p)) % p
        axpy(r, -c, col, p)
        axpy(x, c, red.transform[k], p)
    return x


def nullspace(A: FieldMatrix) -> "SubspaceBasis":
    red = column_reduce(A.sparse_columns(), A.p, track=True)
    vecs = [red.transform[j] for j in red.zero_columns()]
    return SubspaceBasis(FieldMatrix(A.cols, len(vecs), A.p, columns=vecs))


def column_space(A: FieldMatrix) -> "SubspaceBasis":
    red = column_reduce(A.sparse_columns(), A.p)
    vecs = [A.sparse_columns()[j] for j in sorted(red.pivot_of.values())]
    return SubspaceBasis(FieldMatrix(A.rows, len(vecs), A.p, columns=vecs))


def matrix_inverse(A: FieldMatrix) -> FieldMatrix:
    if A.rows != A.cols:
        raise ValueError(f"cannot invert a {A.rows}x{A.cols} matrix")
    red = column_reduce(A.sparse_columns(), A.p, track=True)
    if red.rank != A.rows:
        raise ValueError("matrix is singular")
    cols_ = []
    for r in range(A.rows):
        x = _solve_with(red, {r: 1}, A.p)
        cols_.append(x)
    return FieldMatrix(A.rows, A.rows, A.p, columns=cols_)


# --------------------------------------------------------------------------
# subspaces and quotients


class SubspaceBasis:
    """A basis of a subspace of GF(p)^ambient_dim.

    ``vectors`` is the basis as given; ``echelon`` spans the same space with
    strictly increasing pivot rows and pivot entries equal to 1, and is what
    membership and coordinate queries run against.
    """

    def __init__(self, vectors: FieldMatrix):
        self.vectors = vectors
        self.p = vectors.p
        self.ambient_dim = vectors.rows
        red = column_reduce(vectors.sparse_columns(), self.p, track=True)
        if red.rank != vectors.cols:
            raise ValueError("vectors are linearly dependent")
        order = sorted(red.pivot_of)
        ech, trans = [], []
        for l in order:
            j = red.pivot_of[l]
            s = inverse(red.reduced[j][l], self.p)
            ech.append(scaled(red.reduced[j], s, self.p))
            trans.append(scaled(red.transform[j], s, self.p))
        self.pivot_rows = tuple(order)
        self._ech = ech
        self._trans = trans
        self._slot = {l: k for k, l in enumerate(order)}

    @classmethod
    def span(cls, columns: Iterable[Mapping[int, int]], ambient_dim: int, p: int) -> "SubspaceBasis":
        """Basis of the span of possibly dependent vectors (greedy in order)."""
        cols_ = [to_sparse(c, p) for c in columns]
        red = column_reduce(cols_, p)
        keep = sorted(red.pivot_of.values())
        return cls(FieldMatrix(ambient_dim, len(keep), p, columns=[cols_[j] for j in keep]))

    @classmethod
    def standard(cls, n: int, p: int) -> "SubspaceBasis":
        return cls(FieldMatrix.identity(n, p))

    @classmethod
    def zero(cls, n: int, p: int) -> "SubspaceBasis":
        return cls(FieldMatrix(n, 0, p))

    @property
    def dim(self) -> int:
        return self.vectors.cols

    @property
    def echelon(self) -> FieldMatrix:
        return FieldMatrix(self.ambient_dim, len(self._ech), self.p, columns=self._ech)

    def _reduce(self, v: SparseVec) -> tuple[SparseVec, SparseVec]:
        r = dict(v)
        coef: SparseVec = {}
        while r:
            l = max(r)
            k = self._slot.get(l)
            if k is None:
                break
            c = r[l]
            axpy(r, -c, self._ech[k], self.p)
            coef[k] = (coef.get(k, 0) + c) % self.p
        return r, coef

    def contains(self, v) -> bool:
        r, _ = self._reduce(to_sparse(v, self.p))
        return not r

    def coordinates_sparse(self, v) -> SparseVec:
        r, coef = self._reduce(to_sparse(v, self.p))
        if r:
            raise ValueError("vector is not in the subspace")
        out: SparseVec = {}
        for k, c in coef.items():
            axpy(out, c, self._trans[k], self.p)
        return out

    def coordinates(self, v) -> np.ndarray:
        """Coordinates of ``v`` with respect to ``vectors``."""
        return to_dense(self.coordinates_sparse(v), self.dim)

    def contains_subspace(self, other: "SubspaceBasis") -> bool:
        return all(self.contains(c) for c in other.vectors.sparse_columns())

    def __repr__(self):
        return f"SubspaceBasis(dim={self.dim}, ambient={self.ambient_dim}, GF({self.p}))"


class QuotientSpace:
    """The quotient span(Z)/span(B) with chosen class representatives.

    Representatives are picked greedily from Z's basis vectors in order, so
    they are original cycle vectors rather than reduced combinations.
    """

    def __init__(self, cycles: SubspaceBasis, boundaries: SubspaceBasis, class_reps: FieldMatrix,
                 combined: SubspaceBasis):
        self.cycles = cycles
        self.boundaries = boundaries
        self.class_reps = class_reps
        self._combined = combined
        self.p = cycles.p

    @property
    def dim(self) -> int:
        return self.class_reps.cols

    @property
    def ambient_dim(self) -> int:
        return self.cycles.ambient_dim

    def rep(self, k: int) -> SparseVec:
        return self.class_reps.column(k)

    def decompose(self, v) -> tuple[np.ndarray, np.ndarray]:
        """Split ``v`` as ``class_reps @ a + boundaries.vectors @ b``; returns ``(a, b)``."""
        c = self._combined.coordinates(v)
        nb = self.boundaries.dim
        return c[nb:], c[:nb]

    def coordinates(self, v) -> np.ndarray:
        """Coordinates of the class of ``v`` in the basis of class representatives."""
        return self.decompose(v)[0]

    def is_trivial(self, v) -> bool:
        return not np.any(self.coordinates(v))

    def __repr__(self):
        return f"QuotientSpace(dim={self.dim}, Z={self.cycles.dim}, B={self.boundaries.dim}, GF({self.p}))"


def quotient(Z: SubspaceBasis, B: SubspaceBasis) -> QuotientSpace:
    if Z.p != B.p or Z.ambient_dim != B.ambient_dim:
        raise ValueError("Z and B live in different spaces")
    if not Z.contains_subspace(B):
        raise ValueError("boundaries are not contained in cycles: broken chain complex")
    p = Z.p
    bcols = list(B.vectors.sparse_columns())
    table = column_reduce(bcols, p)
    pivots = dict(table.pivot_of)
    reduced = list(table.reduced)
    reps = []
    for z in Z.vectors.sparse_columns():
        r = dict(z)
        while r:
            l = max(r)
            k = pivots.get(l)
            if k is None:
                break
            other = reduced[k]
            axpy(r, (-r[l] * inverse(other[l], p)) % p, other, p)
        if r:
            pivots[max(r)] = len(reduced)
            reduced.append(r)
            reps.append(z)
    class_reps = FieldMatrix(Z.ambient_dim, len(reps), p, columns=reps)
    combined = SubspaceBasis(hstack([B.vectors, class_reps]))
    return QuotientSpace(Z, B, class_reps, combined)


def extend_basis(partial: SubspaceBasis, ambient: SubspaceBasis) -> SubspaceBasis:
    """Complete ``partial`` to a basis of span(ambient) with ambient vectors.

    Ambient basis vectors are scanned in index order and kept when they are
    independent of everything kept so far.  Returns the completion only.
    """
    if partial.p != ambient.p or partial.ambient_dim != ambient.ambient_dim:
        raise ValueError("partial and ambient live in different spaces")
    if not ambient.contains_subspace(partial):
        raise ValueError("partial basis is not contained in the ambient span")
    p = partial.p
    pivots: dict[int, SparseVec] = {}
    for c in partial.vectors.sparse_columns():
        _insert(pivots, c, p)
    keep = []
    for c in ambient.vectors.sparse_columns():
        if _insert(pivots, c, p):
            keep.append(c)
    return SubspaceBasis(FieldMatrix(partial.ambient_dim, len(keep), p, columns=keep))


def _insert(pivots: dict[int, SparseVec], v: Mapping[int, int], p: int) -> bool:
    r = dict(v)
    while r:
        l = max(r)
        other = pivots.get(l)
        if other is None:
            pivots[l] = r
            return True
        axpy(r, (-r[l] * inverse(other[l], p)) % p, other, p)
    return False
