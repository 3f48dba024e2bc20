from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from orbichar.chain_core import (
    Chain,
    Cochain,
    CoefficientRing,
    CohomologyGroup,
    DegreeMismatch,
    FiniteComplex,
    Matrix,
    RingMismatch,
    cohomology,
    elementary_divisors,
    format_rational,
    integer_kernel,
    mod1,
    normalize_torsion,
    pair,
    parse_rational,
    rank,
    smith_form,
    solve,
    solve_integer,
)

from oracles import cycle_cohomology, sympy_divisors

Z, Q, QZ = CoefficientRing.INTEGERS, CoefficientRing.RATIONALS, CoefficientRing.RATIONALS_MOD_1

small_ints = st.integers(min_value=-6, max_value=6)


@st.composite
def int_matrices(draw, max_dim=5):
    m = draw(st.integers(1, max_dim))
    n = draw(st.integers(1, max_dim))
    return [[draw(small_ints) for _ in range(n)] for _ in range(m)]


@given(int_matrices())
def test_smith_form_matches_sympy(dense):
    f = smith_form(Matrix.from_dense(dense))
    assert f.diagonal == sympy_divisors(dense)


@given(int_matrices())
def test_smith_transforms(dense):
    A = Matrix.from_dense(dense)
    f = smith_form(A)
    assert (f.U @ A @ f.V).to_dense() == f.D.to_dense()
    assert (f.U @ f.Uinv).to_dense() == Matrix.identity(A.rows).to_dense()
    assert all(f.diagonal[i + 1] % f.diagonal[i] == 0 for i in range(len(f.diagonal) - 1))


@given(int_matrices())
def test_elementary_divisors_agree(dense):
    A = Matrix.from_dense(dense)
    assert elementary_divisors(A) == smith_form(A).diagonal


@given(int_matrices())
def test_integer_kernel_is_kernel(dense):
    A = Matrix.from_dense(dense)
    K = integer_kernel(A)
    assert len(K) == A.cols - rank(A)
    for v in K:
        assert all(x == 0 for x in A.apply(v))


@given(int_matrices(), st.lists(small_ints, min_size=5, max_size=5))
def test_solve_integer_roundtrip(dense, x):
    A = Matrix.from_dense(dense)
    x = x[: A.cols]
    b = A.apply(x)
    y = solve_integer(A, b)
    assert y is not None and A.apply(y) == b


def test_solve_integer_detects_parity():
    assert solve_integer(Matrix.from_dense([[2]]), [1]) is None
    assert solve_integer(Matrix.from_dense([[2]]), [Fraction(1, 2)]) is None
    assert solve(Matrix.from_dense([[2]]), [1]) == [Fraction(1, 2)]


def test_smith_known_example():
    A = Matrix.from_dense([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    assert smith_form(A).diagonal == (2, 6, 12)


def test_zero_matrix_has_no_divisors():
    assert smith_form(Matrix.zeros(2, 3)).diagonal == ()


def test_normalize_torsion():
    assert normalize_torsion([2, 3]) == (6,)
    assert normalize_torsion([2, 2, 4, 1]) == (2, 2, 4)
    assert normalize_torsion([]) == ()


def test_group_rendering():
    assert str(CohomologyGroup(1, (2,), 1)) == "Z + Z/2 + Q/Z"
    assert str(CohomologyGroup()) == "0"
    assert CohomologyGroup(0, (2, 4)).order == 8
    with pytest.raises(ValueError):
        CohomologyGroup(0, (4, 2))


def test_rationals():
    assert mod1(Fraction(-1, 3)) == Fraction(2, 3)
    assert parse_rational("-3/6") == Fraction(-1, 2)
    assert format_rational(Fraction(2, 4)) == "1/2"


def _ngon(n):
    bases = [[("v", i) for i in range(n)], [("e", i) for i in range(n)]]
    d = [[0] * n for _ in range(n)]
    for i in range(n):
        d[i][i] -= 1
        d[i][(i + 1) % n] += 1
    return FiniteComplex(bases, [Matrix.from_dense(d)])


@pytest.mark.parametrize("n", [3, 4, 7])
def test_circle_cohomology_against_oracle(n):
    cx = _ngon(n)
    expected = cycle_cohomology(n)
    for k, (free, tors) in enumerate(expected):
        g = cohomology(cx, k, Z)
        assert (g.free_rank, g.torsion) == (free, tors)
    assert cohomology(cx, 1, QZ).divisible_rank == 1
    assert cohomology(cx, 1, Q).rational_rank == 1


def test_rp2_like_complex_torsion():
    # Z --0--> Z --2--> Z: H^2 = Z/2, universal coefficients give H^1(Q/Z) = Z/2
    cx = FiniteComplex([["a"], ["b"], ["c"]], [Matrix.from_dense([[0]]), Matrix.from_dense([[2]])])
    assert str(cohomology(cx, 2, Z)) == "Z/2"
    assert str(cohomology(cx, 1, QZ)) == "Z/2"
    assert str(cohomology(cx, 2, QZ)) == "0"
    assert str(cohomology(cx, 0, QZ)) == "Q/Z"


def test_complex_rejects_nonzero_square():
    with pytest.raises(Exception):
        FiniteComplex([["a"], ["b"], ["c"]], [Matrix.from_dense([[1]]), Matrix.from_dense([[1]])])


@given(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=12), min_size=3, max_size=3))
def test_circle_cochains_reduce(vals):
    cx = _ngon(3)
    c = Cochain.from_vector(cx, 0, vals, QZ)
    assert all(0 <= v < 1 for v in c.values.values())
    assert (c + c.scale(-1)).is_zero()


def test_integer_cochain_rejects_fraction():
    cx = _ngon(3)
    with pytest.raises(RingMismatch):
        Cochain.from_vector(cx, 0, [Fraction(1, 2), 0, 0], Z)


def test_pairing_and_degrees():
    cx = _ngon(4)
    c = Cochain.from_vector(cx, 1, [1, 2, 3, 4], Q)
    z = Chain(cx, 1, {("e", 0): 1, ("e", 2): -1})
    assert pair(c, z) == -2
    with pytest.raises(DegreeMismatch):
        pair(Cochain.zero(cx, 0, Q), z)


@given(st.lists(st.integers(-9, 9), min_size=4, max_size=4))
def test_coboundary_adjoint_to_boundary(vals):
    from orbichar.chain_core import boundary, coboundary
    cx = _ngon(4)
    f = Cochain.from_vector(cx, 0, vals, Z)
    z = Chain(cx, 1, {("e", 0): 2, ("e", 1): -1, ("e", 3): 5})
    assert pair(coboundary(f), z) == pair(f, boundary(z))
