"""Residue rings in the falling-factorial basis, psi, phi and the triangle."""

import hypothesis.strategies as st
import pytest
import sympy
from hypothesis import given

from conftest import scalars, series
from hurwitz_kernel.algebra import get_ctx, rational, truncated_poly
from hurwitz_kernel.exact import Q
from hurwitz_kernel.hurwitz import TruncatedSeries, hurwitz_mul, pointwise_mul, theta
from hurwitz_kernel.interpolation import (
    PolyResidue,
    crt_kernel_check,
    evaluate,
    phi,
    phi_inverse,
    phi_inverse_via_theta_bar,
    psi,
    psi_inverse,
    residue_mul,
    to_monomial,
)

rat = rational()
X = sympy.Symbol("x")


def S(values, ctx=rat):
    return TruncatedSeries.from_scalars(ctx, [Q(v) for v in values])


def R(values, ctx=rat):
    return psi(S(values, ctx))


def sym_poly(f: PolyResidue):
    """The representative as a sympy polynomial (rational ctx only)."""
    return sympy.expand_func(sum(sympy.Rational(str(c.coords[0])) * sympy.binomial(X, m) for m, c in enumerate(f.coeffs)))


def test_psi_examples():
    assert R([1, 0, 0]) == PolyResidue.binom_x(rat, 0, 3)
    assert R([0, 1, 0]) == PolyResidue.binom_x(rat, 1, 3)


def test_psi_of_square_is_reduced_x_squared():
    x = S([0, 1, 0])
    assert psi(hurwitz_mul(x, x, 1)) == R([0, 1, 2])
    assert R([0, 1, 0]) * R([0, 1, 0]) == R([0, 1, 2])


def test_residue_mul_unit_and_truncation():
    f = R([3, -1, Q(1) / 2, 4])
    assert f * PolyResidue.binom_x(rat, 0, 4) == f
    # C(x,3) C(x,1) = 4 C(x,4) + 3 C(x,3); the first term is past the level
    top = PolyResidue.binom_x(rat, 3, 4) * PolyResidue.binom_x(rat, 1, 4)
    assert top == R([0, 0, 0, 3])


def test_residue_mul_rejects_mismatch():
    with pytest.raises(ValueError):
        residue_mul(R([1, 2]), R([1, 2, 3]))
    with pytest.raises(ValueError):
        R([1, 2]) + psi(S([1, 2], truncated_poly(2)))


def test_psi_rejects_noncommutative():
    with pytest.raises(ValueError):
        psi(TruncatedSeries.ones(get_ctx("mat2"), 3))


def test_phi_examples():
    assert phi(R([1, 0, 0])) == S([1, 1, 1])
    assert phi(R([0, 1, 0])) == S([0, 1, 2])


def test_crt_kernel():
    assert all(crt_kernel_check(level) for level in range(1, 7))


@given(st.lists(scalars(), min_size=1, max_size=6), scalars())
def test_evaluate_matches_sympy(values, x):
    f = R(values)
    expected = sym_poly(f).subs(X, sympy.Rational(str(x)))
    assert evaluate(f, x) == rat.scalar(Q(str(sympy.nsimplify(expected))))


@given(st.lists(scalars(), min_size=1, max_size=6))
def test_to_monomial_matches_sympy(values):
    f = R(values)
    poly = sympy.Poly(sympy.expand(sym_poly(f)), X)
    expected = [poly.coeff_monomial(X**k) for k in range(f.level)]
    assert [c.coords[0] for c in to_monomial(f)] == [Q(str(c)) for c in expected]


@given(st.lists(scalars(), min_size=1, max_size=6), st.lists(scalars(), min_size=6, max_size=6))
def test_residue_mul_matches_polynomial_product(a, b):
    f, g = R(a), R(b[: len(a)])
    prod = sympy.expand(sym_poly(f) * sym_poly(g))
    # the product agrees with f*g at the interpolation nodes 0..level-1
    for n in range(f.level):
        assert evaluate(f * g, n) == rat.scalar(Q(str(prod.subs(X, n))))


@pytest.mark.parametrize("name", ["rat", "poly3"])
@given(data=st.data())
def test_phi_multiplicative_and_triangle(name, data):
    ctx = get_ctx(name)
    level = data.draw(st.integers(1, 6))
    a = data.draw(series(ctx, level))
    b = data.draw(series(ctx, level))
    f, g = psi(a), psi(b)
    assert phi(f * g) == pointwise_mul(phi(f), phi(g))
    assert psi(hurwitz_mul(a, b, 1)) == f * g
    assert phi(f) == theta(a)
    assert phi_inverse(phi(f)) == f
    assert phi_inverse_via_theta_bar(theta(a)) == f
    assert psi_inverse(f) == a


def test_residue_json_roundtrip():
    f = R([1, Q(-2) / 3, 5])
    assert PolyResidue.from_json(f.to_json(), rat) == f
