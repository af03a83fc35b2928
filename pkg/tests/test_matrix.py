import itertools
from fractions import Fraction
from math import gcd

import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors as sympy_invariant_factors

from kleindouble.matrix import (
    Matrix,
    MatrixError,
    hermite_basis,
    hermite_normal_form,
    integer_kernel,
    invariant_factors,
    is_smith_form,
    is_unimodular,
    kernel_mod2,
    leading_minors_positive,
    rank_mod2,
    read_matrix_text,
    smith_normal_form,
    solve_affine,
    solve_integer_affine,
)


@st.composite
def int_matrices(draw, max_dim=5, lo=-9, hi=9):
    r = draw(st.integers(1, max_dim))
    c = draw(st.integers(1, max_dim))
    rows = draw(st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c), min_size=r, max_size=r))
    return Matrix(rows, c)


def to_sympy(m):
    return sympy.Matrix(m.tolist())


def is_column_hermite(H):
    """Oracle for the column echelon conventions of the Hermite form."""
    prev = -1
    zero_seen = False
    for j in range(H.cols):
        col = H.col(j)
        nz = [i for i, v in enumerate(col) if v]
        if not nz:
            zero_seen = True
            continue
        if zero_seen:
            return False
        p = nz[0]
        if p <= prev or col[p] <= 0:
            return False
        for k in range(j):
            if not 0 <= H[p, k] < col[p]:
                return False
        prev = p
    return True


# --- basics -----------------------------------------------------------------


def test_construction_and_access():
    m = Matrix([[1, 2], [3, 4]])
    assert m.shape == (2, 2)
    assert m[1, 0] == 3
    assert m.T.tolist() == [[1, 3], [2, 4]]
    assert (m @ Matrix.identity(2)) == m
    assert m.det() == -2
    assert m.inverse().tolist() == [[-2, 1], [Fraction(3, 2), Fraction(-1, 2)]]
    with pytest.raises(MatrixError):
        Matrix([[1, 2], [3]])


def test_block_constructors():
    A = Matrix([[1]])
    B = Matrix([[2, 3]])
    assert Matrix.block_diag([A, Matrix.identity(2)]).tolist() == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert Matrix.block([[A, B]]).tolist() == [[1, 2, 3]]
    assert Matrix.anti_identity(3).tolist() == [[0, 0, 1], [0, 1, 0], [1, 0, 0]]


def test_json_round_trip():
    m = Matrix([[1, Fraction(-1, 2)], [0, 7]])
    data = m.to_json()
    assert data["entries"] == [["1", "-1/2"], ["0", "7"]]
    assert Matrix.from_json(data) == m


def test_read_matrix_text():
    m = read_matrix_text("# comment\n1 0\n0 -2\n\n")
    assert m.tolist() == [[1, 0], [0, -2]]
    with pytest.raises(MatrixError):
        read_matrix_text("\n")


@settings(max_examples=200)
@given(int_matrices(max_dim=4))
def test_det_rank_against_sympy(m):
    s = to_sympy(m)
    assert m.rank() == s.rank()
    if m.is_square():
        assert m.det() == s.det()
        if m.det():
            assert m.inverse() == Matrix([[Fraction(str(x)) for x in r] for r in s.inv().tolist()])


# --- Smith form ---------------------------------------------------------------


def test_smith_examples():
    assert smith_normal_form(Matrix([[2]])).D == Matrix([[2]])
    I3 = Matrix.identity(3)
    assert smith_normal_form(I3).D == I3
    # gcd(2,3)=1, lcm(2,3)=6
    assert (gcd(2, 3), 2 * 3 // gcd(2, 3)) == (1, 6)
    assert smith_normal_form(Matrix([[2, 0], [0, 3]])).D == Matrix([[1, 0], [0, 6]])


def test_smith_regression_cycle():
    res = smith_normal_form(Matrix([[0, -4], [4, 4]]))
    assert res.D == Matrix([[4, 0], [0, 4]])


@settings(max_examples=1000)
@given(int_matrices())
def test_smith_self_check(m):
    res = smith_normal_form(m)
    assert res.U @ m @ res.V == res.D
    assert is_unimodular(res.U) and is_unimodular(res.V)
    assert is_smith_form(res.D)
    assert res.U.inverse() @ res.D @ res.V.inverse() == m


@settings(max_examples=300)
@given(int_matrices())
def test_invariant_factors_against_sympy(m):
    ref = sympy_invariant_factors(DomainMatrix(m.tolist(), m.shape, ZZ))
    ref = [int(abs(x)) for x in ref if x]
    assert invariant_factors(m) == ref


def test_is_smith_form():
    assert is_smith_form(Matrix([[1, 0], [0, 2]]))
    assert not is_smith_form(Matrix([[2, 0], [0, 3]]))
    assert not is_smith_form(Matrix([[0, 0], [0, 1]]))
    assert not is_smith_form(Matrix([[0, 1], [0, 0]]))


# --- Hermite form -------------------------------------------------------------


def test_hermite_example_by_enumeration():
    m = Matrix([[2, 1], [0, 1]])
    # oracle: every (m V) with small unimodular V that obeys the conventions
    found = set()
    for v in itertools.product(range(-3, 4), repeat=4):
        V = Matrix([v[:2], v[2:]])
        if V.det() in (1, -1):
            H = m @ V
            if is_column_hermite(H):
                found.add(tuple(map(tuple, H.tolist())))
    assert found == {((1, 0), (1, 2))}
    assert hermite_normal_form(m).D == Matrix([[1, 0], [1, 2]])


def test_hermite_trivial():
    assert hermite_normal_form(Matrix.identity(3)).D == Matrix.identity(3)
    assert hermite_normal_form(Matrix([[0]])).D == Matrix([[0]])


@settings(max_examples=1000)
@given(int_matrices())
def test_hermite_self_check(m):
    res = hermite_normal_form(m)
    assert m @ res.V == res.D
    assert is_unimodular(res.V)
    assert is_column_hermite(res.D)


@settings(max_examples=200)
@given(int_matrices(max_dim=4, lo=-5, hi=5), st.data())
def test_hermite_is_canonical(m, data):
    # any unimodular change of generators gives the same basis
    n = m.cols
    V = Matrix.identity(n)
    for _ in range(data.draw(st.integers(0, 6))):
        i, j = data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1))
        if i != j:
            k = data.draw(st.integers(-3, 3))
            E = Matrix([[1 if r == s else (k if (r, s) == (j, i) else 0) for s in range(n)] for r in range(n)])
            V = V @ E
    assert hermite_basis(m @ V) == hermite_basis(m)


# --- solving -----------------------------------------------------------------


def test_solve_affine():
    x0, N = solve_affine(Matrix([[1, 1, 0]]), [2])
    assert N.cols == 2
    assert x0[0] + x0[1] == 2
    assert solve_affine(Matrix([[1, 1], [1, 1]]), [0, 1]) is None


@settings(max_examples=200)
@given(int_matrices(max_dim=3, lo=-3, hi=3), st.lists(st.integers(-3, 3), min_size=3, max_size=3))
def test_integer_solutions_against_brute_force(m, bvec):
    b = bvec[: m.rows]
    sol = solve_integer_affine(m, b)
    box = [v for v in itertools.product(range(-4, 5), repeat=m.cols)
           if list((m @ Matrix([[x] for x in v], 1)).col(0)) == b]
    if sol is None:
        assert not box
        return
    x0, N = sol
    assert list((m @ Matrix([[x] for x in x0], 1)).col(0)) == b
    assert (m @ N).is_zero() if N.cols else True
    # each brute-force solution lies on the returned affine lattice
    for v in box:
        diff = [p - q for p, q in zip(v, x0)]
        if N.cols:
            assert solve_integer_affine(N, diff) is not None
        else:
            assert not any(diff)


def test_integer_kernel_saturated():
    K = integer_kernel(Matrix([[2, 4]]))
    assert K.cols == 1
    assert sorted(abs(x) for x in K.col(0)) == [1, 2]


# --- mod 2 -----------------------------------------------------------------


@settings(max_examples=300)
@given(int_matrices(max_dim=5))
def test_kernel_mod2_against_enumeration(m):
    brute = [list(v) for v in itertools.product((0, 1), repeat=m.cols)
             if all(sum(m[i, j] * v[j] for j in range(m.cols)) % 2 == 0 for i in range(m.rows))]
    got = kernel_mod2(m)
    assert sorted(map(list, got)) == sorted(brute)
    assert len(got) == 2 ** (m.cols - rank_mod2(m))


def test_leading_minors():
    assert leading_minors_positive(Matrix.identity(3))
    assert not leading_minors_positive(Matrix([[1, 2], [2, 1]]))
