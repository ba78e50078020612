import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cosheafph import fieldlin as fl
from cosheafph.fieldlin import FieldMatrix, SubspaceBasis


@st.composite
def matrices(draw, p=None, max_rows=6, max_cols=6):
    p = p or draw(st.sampled_from([2, 3, 5]))
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    vals = draw(st.lists(st.integers(0, p - 1), min_size=r * c, max_size=r * c))
    return FieldMatrix(r, c, p, dense=np.array(vals, dtype=np.int64).reshape(r, c))


def brute_rank(A: np.ndarray, p: int) -> int:
    """Rank as log_p of the size of the column space, by enumerating all combinations."""
    r, c = A.shape
    seen = set()
    for coef in itertools.product(range(p), repeat=c):
        seen.add(tuple((A @ np.array(coef)) % p) if c else ())
    return round(np.log(len(seen)) / np.log(p))


def test_inverse_and_prime_checks():
    assert fl.inverse(3, 7) * 3 % 7 == 1
    with pytest.raises(ZeroDivisionError):
        fl.inverse(0, 5)
    with pytest.raises(ValueError):
        fl.check_prime(4)
    assert fl.check_prime(10007) == 10007


def test_field_element_arithmetic():
    a, b = fl.FieldElement(2, 3), fl.FieldElement(2, 3)
    assert a + b == 1 and a * b == 1 and -a == 1 and a / b == 1


def test_low_pivot_is_last_nonzero():
    assert fl.low({0: 1, 4: 2, 2: 1}) == 4


@settings(max_examples=60, deadline=None)
@given(matrices(max_rows=4, max_cols=5))
def test_rank_matches_enumeration(A):
    assert fl.rank(A) == brute_rank(A.to_dense(), A.p)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_rank_nullity(A):
    N = fl.nullspace(A)
    assert fl.rank(A) + N.dim == A.cols
    assert (A @ N.vectors).is_zero()
    assert fl.column_space(A).dim == fl.rank(A)


@settings(max_examples=60, deadline=None)
@given(matrices(), st.data())
def test_solve_consistent_and_inconsistent(A, data):
    x = np.array(data.draw(st.lists(st.integers(0, A.p - 1), min_size=A.cols, max_size=A.cols)))
    b = (A.to_dense() @ x) % A.p
    sol = fl.solve(A, b)
    assert sol is not None
    assert np.array_equal((A.to_dense() @ np.asarray(sol)) % A.p, b)
    # a vector outside the column space has no solution
    cs = fl.column_space(A)
    for k in range(A.rows):
        e = np.zeros(A.rows, dtype=np.int64)
        e[k] = 1
        if not cs.contains(e):
            assert fl.solve(A, e) is None
            break


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 7]), st.integers(1, 5), st.data())
def test_matrix_inverse(p, n, data):
    vals = data.draw(st.lists(st.integers(0, p - 1), min_size=n * n, max_size=n * n))
    A = FieldMatrix(n, n, p, dense=np.array(vals, dtype=np.int64).reshape(n, n))
    if fl.rank(A) < n:
        with pytest.raises(ValueError):
            fl.matrix_inverse(A)
    else:
        assert fl.matrix_inverse(A) @ A == FieldMatrix.identity(n, p)


@settings(max_examples=40, deadline=None)
@given(matrices(max_rows=6, max_cols=4))
def test_extend_basis_completes(A):
    part = fl.column_space(A)
    amb = SubspaceBasis.standard(A.rows, A.p)
    ext = fl.extend_basis(part, amb)
    assert part.dim + ext.dim == A.rows
    both = fl.hstack([part.vectors, ext.vectors], rows=A.rows, p=A.p)
    assert fl.rank(both) == A.rows


@settings(max_examples=40, deadline=None)
@given(matrices(max_rows=5, max_cols=4), st.data())
def test_quotient_dimensions_and_coordinates(A, data):
    Z = SubspaceBasis.standard(A.rows, A.p)
    B = fl.column_space(A)
    Q = fl.quotient(Z, B)
    assert Q.dim == A.rows - B.dim
    v = np.array(data.draw(st.lists(st.integers(0, A.p - 1), min_size=A.rows, max_size=A.rows)))
    coords = Q.coordinates(v)
    rebuilt = (Q.class_reps.to_dense() @ coords) % A.p if Q.dim else np.zeros(A.rows, dtype=np.int64)
    # v minus its class representative lies in B
    assert B.contains((v - rebuilt) % A.p)
    assert Q.is_trivial(v) == (not np.any(coords))


def test_block_helpers():
    p = 3
    I2 = FieldMatrix.identity(2, p)
    M = fl.block_matrix([[I2, None], [None, I2.scale(2)]], [2, 2], [2, 2], p)
    assert M == fl.block_diag([I2, I2.scale(2)], p)
    assert fl.vstack([I2, I2]).shape == (4, 2)
    assert fl.hstack([I2, I2]).shape == (2, 4)


def test_sparse_and_dense_backends_agree():
    p = 5
    rng = np.random.default_rng(3)
    a = rng.integers(0, p, (7, 6))
    b = rng.integers(0, p, (6, 4))
    sparse = FieldMatrix(7, 6, p, columns=[fl.to_sparse(a[:, j], p) for j in range(6)])
    dense = FieldMatrix(7, 6, p, dense=a)
    B = FieldMatrix(6, 4, p, dense=b)
    assert np.array_equal((sparse @ B).to_dense(), (a @ b) % p)
    assert sparse @ B == dense @ B
