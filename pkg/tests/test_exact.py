"""Exact scalars, matrices, idempotent splitting and the combinatorial lemmas."""

import hypothesis.strategies as st
import pytest
import sympy
from hypothesis import given

from conftest import scalars
from hurwitz_kernel.algebra import binom_elem, check_combident, get_ctx, rational, truncated_poly
from hurwitz_kernel.combinat import combseq_reconstruct, multinomial, trinomial_terms
from hurwitz_kernel.exact import BlockMap, Matrix, Q, format_scalar, parse_scalar, split_idempotent


def to_sympy(m: Matrix) -> sympy.Matrix:
    return sympy.Matrix(m.nrows, m.ncols, lambda i, j: sympy.Rational(str(m.rows[i][j])))


@st.composite
def matrices(draw, max_dim=4, square=False):
    r = draw(st.integers(1, max_dim))
    c = r if square else draw(st.integers(1, max_dim))
    return Matrix([[draw(scalars(3)) for _ in range(c)] for _ in range(r)])


# -- scalars -------------------------------------------------------------


@pytest.mark.parametrize("text,value", [("3", Q(3)), ("-2/4", Q(-1) / 2), (" 7/1 ", Q(7)), ("0", Q(0))])
def test_parse_scalar(text, value):
    assert parse_scalar(text) == value


@pytest.mark.parametrize("bad", ["1/0", "abc", "1.5", "", "1//2", "2/-3"])
def test_parse_scalar_rejects(bad):
    with pytest.raises(ValueError):
        parse_scalar(bad)


@given(scalars())
def test_format_parse_roundtrip(x):
    assert parse_scalar(format_scalar(x)) == x


# -- multinomials and the combinatorial identities ------------------------


@pytest.mark.parametrize(
    "n,parts,value",
    [(3, [1, 1, 1], 6), (2, [2, 0, 0], 1), (4, [-1, 5], 0), (-1, [0], 0), (5, [2, 2, 1], 30)],
)
def test_multinomial_examples(n, parts, value):
    assert multinomial(n, parts) == value


def test_trinomial_totals_are_powers_of_three():
    for n in range(8):
        assert sum(c for *_, c in trinomial_terms(n)) == 3**n


def test_binom_elem_examples():
    rat = rational()
    assert binom_elem(rat.scalar(5), 2) == rat.scalar(10)
    assert binom_elem(rat.scalar(Q(17) / 3), 0) == rat.one()
    P = truncated_poly(3)
    y = P.basis(1)
    assert binom_elem(y, 2) == (y * y - y) * (Q(1) / 2)


def test_binom_elem_rejects_noncommutative():
    with pytest.raises(ValueError):
        binom_elem(get_ctx("mat2").one(), 2)


@pytest.mark.parametrize("p,q,x", [(1, 1, 7), (0, 3, Q(2) / 3), (3, 2, Q(1) / 2), (2, 4, -3)])
def test_combident_examples(p, q, x):
    assert check_combident(p, q, rational().scalar(x))


@given(st.integers(0, 4), st.integers(0, 4), scalars())
def test_combident_in_truncated_polynomials(p, q, c):
    P = truncated_poly(3)
    probe = P.scalar(c) + P.basis(1) * c + P.basis(2)
    assert check_combident(p, q, probe)


def test_combseq_examples():
    assert combseq_reconstruct([Q(5)], 0) == 5
    assert combseq_reconstruct([Q(1), Q(2), Q(4), Q(8)], 3) == 8
    a = [Q(3), Q(-1), Q(7)]
    assert combseq_reconstruct(a, 2) == 7


@given(st.lists(scalars(), min_size=1, max_size=7))
def test_combseq_recovers_every_entry(a):
    assert all(combseq_reconstruct(a, n) == a[n] for n in range(len(a)))


# -- matrices against sympy -----------------------------------------------


@given(matrices())
def test_rank_matches_sympy(m):
    assert m.rank() == to_sympy(m).rank()


@given(matrices(square=True))
def test_inverse_matches_sympy(m):
    sm = to_sympy(m)
    if sm.det() == 0:
        with pytest.raises(ValueError):
            m.inverse()
    else:
        assert to_sympy(m.inverse()) == sm.inv()


@given(matrices())
def test_nullspace_is_kernel_of_right_dimension(m):
    ns = m.nullspace()
    assert len(ns) == m.ncols - to_sympy(m).rank()
    for v in ns:
        assert all(x == 0 for x in m.apply(v))


@given(matrices(max_dim=3), matrices(max_dim=3))
def test_kron_matches_sympy(a, b):
    from sympy.physics.quantum import TensorProduct

    assert to_sympy(a.kron(b)) == TensorProduct(to_sympy(a), to_sympy(b))


# -- idempotent splitting ---------------------------------------------------


def test_split_idempotent_examples():
    proj, incl = split_idempotent(Matrix([[1, 0], [0, 0]]))
    assert proj == Matrix([[1, 0]]) and incl == Matrix([[1], [0]])
    proj, incl = split_idempotent(Matrix.zeros(3, 3))
    assert proj.shape == (0, 3) and incl.shape == (3, 0)
    half = Q(1) / 2
    e = Matrix([[half, half], [half, half]])
    proj, incl = split_idempotent(e)
    assert proj @ incl == Matrix.identity(1) and incl @ proj == e


def test_split_rejects_non_idempotent():
    with pytest.raises(ValueError):
        split_idempotent(Matrix([[2, 0], [0, 0]]))


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), matrices(max_dim=n, square=True), st.lists(st.booleans(), min_size=n, max_size=n))))
def test_split_random_idempotents(data):
    n, g, keep = data
    g = Matrix([[g.rows[i][j] if i < g.nrows and j < g.ncols else Q(int(i == j)) for j in range(n)] for i in range(n)])
    if g.rank() < n:
        g = Matrix.identity(n)
    e = g @ Matrix.diag([int(k) for k in keep]) @ g.inverse()
    proj, incl = split_idempotent(e)
    assert proj @ incl == Matrix.identity(sum(keep))
    assert incl @ proj == e


# -- block maps ---------------------------------------------------------------


def test_blockmap_composition_matches_dense():
    a = BlockMap((1, 2), (2, 1), {0: (1, Matrix([[1]])), 1: (0, Matrix([[1, 2], [3, 4]]))})
    b = BlockMap((2, 1), (1, 2), {0: (1, Matrix([[0, 1], [1, 0]])), 1: (0, Matrix([[5]]))})
    assert (b @ a).dense() == b.dense() @ a.dense()
    assert BlockMap.identity((2, 1)).dense() == Matrix.identity(3)


def _block_major(sizes1, sizes2) -> list:
    """Position in the plain Kronecker basis of each block-major basis vector."""
    off1 = [sum(sizes1[:j]) for j in range(len(sizes1))]
    off2 = [sum(sizes2[:j]) for j in range(len(sizes2))]
    n2 = sum(sizes2)
    return [
        (off1[j1] + i1) * n2 + off2[j2] + i2
        for j1, s1 in enumerate(sizes1)
        for j2, s2 in enumerate(sizes2)
        for i1 in range(s1)
        for i2 in range(s2)
    ]


def test_blockmap_kron_is_reordered_kronecker():
    a = BlockMap((1, 2), (2, 1), {0: (1, Matrix([[1]])), 1: (0, Matrix([[1, 2], [3, 4]]))})
    b = BlockMap((2, 1), (1, 2), {0: (1, Matrix([[0, 1], [1, 0]])), 1: (0, Matrix([[5]]))})
    dense = a.dense().kron(b.dense())
    rows = _block_major(a.tgt, b.tgt)
    cols = _block_major(a.src, b.src)
    assert a.kron(b).dense() == dense.submatrix(rows, cols)
    assert a.kron(b).trace() == a.trace() * b.trace()
