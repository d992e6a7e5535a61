"""Weighted Hurwitz series: frozen examples, sympy oracles and algebraic laws."""

import random

import hypothesis.strategies as st
import pytest
import sympy
from hypothesis import given

from conftest import LAMBDAS, scalars, series, series_pair
from hurwitz_kernel.algebra import AlgebraElem, get_ctx, involution_algebra, rational, truncated_poly
from hurwitz_kernel.exact import Matrix, Q
from hurwitz_kernel.hurwitz import (
    RotaBaxterOp,
    TruncatedSeries,
    WeightedDerivation,
    cofree_lift_dif,
    cofree_lift_endo,
    comonad_comult,
    comonad_counit,
    gamma,
    gamma_inverse,
    hurwitz_mul,
    is_algebra_map,
    lambda_hat,
    pointwise_mul,
    random_automorphism,
    random_derivation,
    random_rota_baxter,
    rb_bar,
    rb_tilde,
    rota_baxter_holds,
    series_ctx,
    shift_derivation,
    theta,
    theta_bar,
)
from hurwitz_kernel.rbsolve import solve_rota_baxter

rat = rational()


def S(*values, ctx=rat):
    return TruncatedSeries.from_scalars(ctx, [Q(v) for v in values])


def scal(s: TruncatedSeries) -> list:
    return [x.coords[0] for x in s.coeffs]


# -- frozen examples --------------------------------------------------------


@pytest.mark.parametrize("lam", LAMBDAS)
def test_two_term_product(lam):
    a0, a1, b0, b1 = Q(2), Q(3), Q(-5), Q(7)
    got = hurwitz_mul(S(a0, a1), S(b0, b1), lam)
    assert scal(got) == [a0 * b0, a1 * b0 + a0 * b1 + lam * a1 * b1]


def test_divided_power_case():
    assert scal(hurwitz_mul(S(0, 1, 0), S(0, 1, 0), 0)) == [0, 0, 2]


def test_unit_and_pointwise_examples():
    a = S(4, -1, Q(2) / 3)
    for lam in LAMBDAS:
        assert hurwitz_mul(a, TruncatedSeries.unit(rat, 3), lam) == a
    assert scal(pointwise_mul(S(1, 2), S(3, 4))) == [3, 8]
    assert pointwise_mul(a, TruncatedSeries.ones(rat, 3)) == a


def test_pointwise_on_matrices():
    M = get_ctx("mat2")
    a = TruncatedSeries.from_coords(M, [[1, 2, 3, 4], [0, 1, 1, 0]])
    b = TruncatedSeries.from_coords(M, [[0, 1, 0, 0], [2, 0, 0, 2]])
    # [[1,2],[3,4]] @ [[0,1],[0,0]] and [[0,1],[1,0]] @ 2I
    assert pointwise_mul(a, b) == TruncatedSeries.from_coords(M, [[0, 1, 0, 3], [0, 2, 2, 0]])


def test_transform_examples():
    assert lambda_hat(S(3, 1, 4), 1) == S(3, 1, 4)
    assert scal(lambda_hat(S(1, 1, 1), 2)) == [1, 2, 4]
    assert scal(theta(S(1, 1, 1))) == [1, 2, 4]
    assert scal(theta(S(0, 1, 0))) == [0, 1, 2]
    assert scal(gamma(S(5, 1, 2, 3), 0)) == [5, 5, 5, 5]
    assert scal(gamma(S(0, 1, 0), 2)) == [0, 2, 4]
    a = S(1, -2, 3, 5)
    assert gamma(a, 1) == theta(a)


def test_shift_examples():
    assert scal(shift_derivation(S(1, 2, 3))) == [2, 3, 0]
    assert scal(shift_derivation(TruncatedSeries.unit(rat, 3))) == [0, 0, 0]


def test_comonad_examples():
    assert comonad_counit(TruncatedSeries.unit(rat, 3)) == rat.one()
    cm = comonad_comult(S(1, 2, 3), 1, 2)
    assert cm.coeffs[1].coords[1] == 3
    with pytest.raises(ValueError):
        comonad_comult(S(1, 2, 3), 1, 2, 3)


def test_rota_baxter_examples():
    P = RotaBaxterOp(rat, 1, Matrix([[0]]))
    a = S(1, 1, 1)
    assert scal(rb_bar(P, a)) == [0, 1, 1]
    assert scal(rb_tilde(P, a)) == [0, 1, 2]
    P0 = RotaBaxterOp(rat, 0, Matrix([[0]]))
    assert scal(rb_tilde(P0, S(7, 1, 2))) == [0, 0, 0]
    with pytest.raises(ValueError):
        RotaBaxterOp(rat, 1, Matrix([[1]]))


def test_cofree_lift_examples():
    P = truncated_poly(3)
    zero = WeightedDerivation(P, 0, Matrix.zeros(3, 3))
    lift = cofree_lift_dif(Matrix.identity(3), zero, 3, P)
    y = P.basis(1)
    assert lift(y) == TruncatedSeries(P, [y, P.zero(), P.zero()])
    # Euler derivation y d/dy preserves (y^3), unlike d/dy
    euler = WeightedDerivation(P, 0, Matrix.diag([0, 1, 2]))
    assert cofree_lift_dif(Matrix.identity(3), euler, 3, P)(y) == TruncatedSeries(P, [y, y, y])
    with pytest.raises(ValueError):
        WeightedDerivation(P, 0, Matrix([[0, 1, 0], [0, 0, 2], [0, 0, 0]]))


def test_cofree_lift_endo_alternates():
    C2 = involution_algebra()
    flip = Matrix.diag([1, -1])
    f = Matrix([[1, 1]])
    lift = cofree_lift_endo(f, flip, 5, C2, rat)
    assert scal(lift(C2.basis(1))) == [1, -1, 1, -1, 1]
    assert scal(cofree_lift_endo(f, Matrix.identity(2), 3, C2, rat)(C2.basis(1))) == [1, 1, 1]


# -- independent oracles ------------------------------------------------------


def egf_product(a: list, b: list) -> list:
    x = sympy.Symbol("x")
    n = len(a)
    fa = sum(sympy.Rational(str(c)) * x**k / sympy.factorial(k) for k, c in enumerate(a))
    fb = sum(sympy.Rational(str(c)) * x**k / sympy.factorial(k) for k, c in enumerate(b))
    prod = sympy.expand(fa * fb)
    return [Q(str(prod.coeff(x, k) * sympy.factorial(k))) for k in range(n)]


@given(st.lists(scalars(), min_size=1, max_size=7).flatmap(lambda a: st.tuples(st.just(a), st.lists(scalars(), min_size=len(a), max_size=len(a)))))
def test_weight_zero_is_egf_product(ab):
    a, b = ab
    assert scal(hurwitz_mul(S(*a), S(*b), 0)) == egf_product(a, b)


def gamma_oracle(a: list, b: list, lam) -> list:
    """Solve gamma(c) = gamma(a) gamma(b) with sympy (lam != 0)."""
    n = len(a)
    L = sympy.Rational(str(lam))
    G = sympy.Matrix(n, n, lambda i, j: sympy.binomial(i, j) * L**j)
    ga = G * sympy.Matrix([sympy.Rational(str(x)) for x in a])
    gb = G * sympy.Matrix([sympy.Rational(str(x)) for x in b])
    c = G.LUsolve(sympy.Matrix([ga[i] * gb[i] for i in range(n)]))
    return [Q(str(v)) for v in c]


@given(
    st.sampled_from([lam for lam in LAMBDAS if lam]),
    st.lists(scalars(), min_size=1, max_size=6).flatmap(lambda a: st.tuples(st.just(a), st.lists(scalars(), min_size=len(a), max_size=len(a)))),
)
def test_product_matches_gamma_route(lam, ab):
    a, b = ab
    assert scal(hurwitz_mul(S(*a), S(*b), lam)) == gamma_oracle(a, b, lam)


def test_series_ctx_is_an_algebra():
    for name in ("rat", "poly3"):
        for lam in LAMBDAS:
            series_ctx(get_ctx(name), 4, lam, check=True)
    series_ctx(get_ctx("mat2"), 2, 1, check=True)


# -- laws ------------------------------------------------------------------------


@given(series_pair(count=3), st.sampled_from(LAMBDAS))
def test_associative(abc, lam):
    a, b, c = abc
    assert hurwitz_mul(hurwitz_mul(a, b, lam), c, lam) == hurwitz_mul(a, hurwitz_mul(b, c, lam), lam)


@given(series_pair(), st.sampled_from(LAMBDAS))
def test_gamma_multiplicative_and_factors(ab, lam):
    a, b = ab
    assert gamma(hurwitz_mul(a, b, lam), lam) == pointwise_mul(gamma(a, lam), gamma(b, lam))
    assert gamma(a, lam) == theta(lambda_hat(a, lam))
    assert theta_bar(theta(a)) == a


@given(series_pair(count=1), st.sampled_from([lam for lam in LAMBDAS if lam]))
def test_gamma_inverse(a, lam):
    (a,) = a
    assert gamma_inverse(gamma(a, lam), lam) == a


@given(series_pair(ctx_names=("rat", "poly3")), st.sampled_from(LAMBDAS))
def test_commutative_coefficients_give_commutative_product(ab, lam):
    a, b = ab
    assert hurwitz_mul(a, b, lam) == hurwitz_mul(b, a, lam)


def test_matrix_coefficients_do_not_commute():
    M = get_ctx("mat2")
    a = TruncatedSeries.from_coords(M, [[0, 1, 0, 0], [0, 0, 0, 0]])
    b = TruncatedSeries.from_coords(M, [[0, 0, 1, 0], [0, 0, 0, 0]])
    assert hurwitz_mul(a, b, 1) != hurwitz_mul(b, a, 1)


# -- random operators -------------------------------------------------------------


@pytest.mark.parametrize("name", ["rat", "mat2", "poly3"])
@pytest.mark.parametrize("lam", LAMBDAS)
def test_random_operators_are_valid(name, lam):
    ctx = get_ctx(name)
    rng = random.Random(f"ops:{name}:{lam}")
    for _ in range(5):
        phi = random_automorphism(ctx, rng)
        assert is_algebra_map(phi, ctx, ctx)
        P = random_rota_baxter(ctx, lam, rng)  # constructor re-checks the identity
        x, y = ctx.basis(0), ctx.basis(ctx.dim - 1)
        assert rota_baxter_holds(P, lam, x, y, lambda u, v: u * v)
        random_derivation(ctx, lam, rng)


@pytest.mark.parametrize("lam", LAMBDAS)
def test_solved_operators(lam):
    rng = random.Random(f"solve:{lam}")
    for name in ("mat2", "poly3"):
        P = solve_rota_baxter(get_ctx(name), lam, rng)
        assert not P.map.is_zero()


def test_only_zero_operator_on_rationals_at_weight_zero():
    with pytest.raises(RuntimeError):
        solve_rota_baxter(rat, 0, random.Random(0), attempts=2)


@given(st.data())
def test_rb_lifts(data):
    ctx = get_ctx(data.draw(st.sampled_from(("rat", "mat2", "poly3"))))
    lam = data.draw(st.sampled_from(LAMBDAS))
    P = random_rota_baxter(ctx, lam, random.Random(data.draw(st.integers(0, 10**6))))
    level = data.draw(st.integers(1, 5))
    a, b = data.draw(series(ctx, level)), data.draw(series(ctx, level))
    assert rota_baxter_holds(lambda s: rb_bar(P, s), lam, a, b, lambda u, v: hurwitz_mul(u, v, lam))
    assert rota_baxter_holds(lambda s: rb_tilde(P, s), lam, a, b, pointwise_mul)
    assert gamma(rb_bar(P, a), lam) == rb_tilde(P, gamma(a, lam))


@given(st.data())
def test_cofree_lift_is_algebra_map(data):
    ctx = get_ctx(data.draw(st.sampled_from(("rat", "mat2", "poly3"))))
    lam = data.draw(st.sampled_from(LAMBDAS))
    rng = random.Random(data.draw(st.integers(0, 10**6)))
    der = random_derivation(ctx, lam, rng)
    f = random_automorphism(ctx, rng)
    level = data.draw(st.integers(1, 5))
    lift = cofree_lift_dif(f, der, level, ctx)
    x = AlgebraElem(ctx, [data.draw(scalars()) for _ in range(ctx.dim)])
    y = AlgebraElem(ctx, [data.draw(scalars()) for _ in range(ctx.dim)])
    assert lift(x * y) == hurwitz_mul(lift(x), lift(y), lam)
    if level > 1:
        assert lift(der(x)).restrict(level - 1) == shift_derivation(lift(x)).restrict(level - 1)
