"""Verification suites: each runs a family of exact identity checks over
seeded random inputs and returns a report listing every identity with the
number of trials, failures and the first counterexample."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable

from .algebra import AlgebraElem, get_ctx, involution_algebra, rational
from .coalgebra import (
    C_lambda_ell,
    CoalgebraMorphism,
    D_ell,
    GradedBialgebra,
    coalgebra_tensor,
    convolution_algebra,
    convolve,
    free_quotient,
    induced_quotient_morphism,
    make_C_lambda,
    make_D,
    make_xi,
    normalize_rank2,
    precompose_matrix,
    transport,
    FinCoalgebra,
    xi_matrix,
)
from .exact import Matrix, Q, format_scalar, parse_scalar
from .hurwitz import (
    RotaBaxterOp,
    TruncatedSeries,
    cofree_lift_dif,
    cofree_lift_endo,
    comonad_comult,
    comonad_counit,
    difference,
    gamma,
    gamma_inverse,
    hurwitz_mul,
    lambda_hat,
    pointwise_mul,
    random_automorphism,
    random_derivation,
    random_elem,
    random_rota_baxter,
    random_scalar,
    random_series,
    rb_bar,
    rb_tilde,
    rota_baxter_holds,
    series_ctx,
    shift_derivation,
    theta,
    theta_bar,
)
from .interpolation import (
    PolyResidue,
    crt_kernel_check,
    evaluation_matrix,
    phi,
    phi_inverse,
    phi_inverse_via_theta_bar,
    psi,
    residue_mul,
)
from .rbsolve import solve_rota_baxter
from .combinat import multinomial, permutations
from .species import (
    character,
    pointwise_tensor,
    random_species,
    subset_coalgebra,
    theta_inf_character,
    theta_inf_transform,
    weighted_tensor,
    weighted_tensor_character,
    weighted_tensor_ranks,
)
from . import doldkan as dk

RNG_ALGORITHM = "python-random-mt19937/str-seed-v2"
DEFAULT_LAMBDAS = ("0", "1", "2", "-1", "1/2")
DEFAULT_CTXS = ("rat", "mat2", "poly3")


def make_rng(seed: int, label: str) -> random.Random:
    """Mersenne Twister seeded from the string ``"<seed>:<label>"``."""
    return random.Random(f"{seed}:{label}")


@dataclass
class Check:
    name: str
    anchor: str
    trials: int = 0
    failures: int = 0
    counterexample: Any = None

    def record(self, ok: bool, example: Callable[[], Any] | None = None) -> bool:
        self.trials += 1
        if not ok:
            self.failures += 1
            if self.counterexample is None and example is not None:
                self.counterexample = example()
        return ok

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.trials > 0

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "anchor": self.anchor,
            "passed": self.passed,
            "trials": self.trials,
            "failures": self.failures,
        }
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class SuiteReport:
    suite: str
    params: dict
    checks: list = field(default_factory=list)

    def add(self, name: str, anchor: str) -> Check:
        c = Check(name, anchor)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def prune(self) -> "SuiteReport":
        """Drop checks that had no applicable cases at these parameters."""
        self.checks = [c for c in self.checks if c.trials]
        return self

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "params": self.params,
            "rng": RNG_ALGORITHM,
            "passed": self.passed,
            "checks": [c.to_json() for c in self.checks],
        }


def _map_cells(fn: Callable, cells: list, workers: int) -> list:
    """``[fn(*cell) for cell in cells]``, optionally in a process pool.

    Each cell seeds its own generator, so results do not depend on
    ``workers`` or on scheduling; they are returned in cell order."""
    if workers <= 1 or len(cells) <= 1:
        return [fn(*cell) for cell in cells]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
        return list(pool.map(fn, *zip(*cells)))


def _merge(report: SuiteReport, results: list) -> None:
    by_name = {c.name: c for c in report.checks}
    for checks in results:
        for c in checks:
            tgt = by_name[c.name]
            tgt.trials += c.trials
            tgt.failures += c.failures
            if tgt.counterexample is None:
                tgt.counterexample = c.counterexample


def _scalars(values) -> list:
    return [parse_scalar(str(v)) for v in values]


def _ex(**kw) -> Callable[[], dict]:
    def build():
        out = {}
        for k, v in kw.items():
            if hasattr(v, "to_json"):
                out[k] = v.to_json()
            elif isinstance(v, (list, tuple)):
                out[k] = [x.to_json() if hasattr(x, "to_json") else str(x) for x in v]
            else:
                out[k] = v if isinstance(v, (int, str)) else str(v)
        return out

    return build


# -- weighted Hurwitz transforms -------------------------------------------------------

HURWITZ_IDENTITIES = (
    ("hurwitz_unit", "weighted Hurwitz product: (1,0,0,...) is a two-sided unit"),
    ("hurwitz_associative", "weighted Hurwitz product: associativity"),
    ("lambda_hat_unital", "lambda-hat sends the unit to the unit"),
    ("lambda_hat_multiplicative", "lambda-hat: weight-lam product to weight-1 product"),
    ("theta_unital", "theta sends the unit to the all-ones sequence"),
    ("theta_multiplicative", "theta: weight-1 product to pointwise product"),
    ("gamma_unital", "gamma sends the unit to the all-ones sequence"),
    ("gamma_multiplicative", "gamma: weight-lam product to pointwise product"),
    ("gamma_factorization", "gamma = theta o lambda-hat"),
    ("theta_bar_left_inverse", "theta-bar o theta = id"),
    ("theta_bar_right_inverse", "theta o theta-bar = id"),
    ("restriction_compatible", "dropping the last coefficient commutes with products and transforms"),
)


def _hurwitz_cell(seed: int, cname: str, lam_text: str, lvl: int, trials: int) -> list:
    ctx = get_ctx(cname)
    lam = parse_scalar(lam_text)
    chk = {name: Check(name, anchor) for name, anchor in HURWITZ_IDENTITIES}
    rng = make_rng(seed, f"hurwitz:{cname}:{lam_text}:{lvl}")
    for _ in range(trials):
        a, b, c = (random_series(ctx, lvl, rng) for _ in range(3))
        one = TruncatedSeries.unit(ctx, lvl)
        ones = TruncatedSeries.ones(ctx, lvl)
        ex = _ex(ctx=cname, level=lvl, lam=lam_text, a=a, b=b, c=c)
        ab = hurwitz_mul(a, b, lam)
        chk["hurwitz_unit"].record(hurwitz_mul(one, a, lam) == a and hurwitz_mul(a, one, lam) == a, ex)
        chk["hurwitz_associative"].record(hurwitz_mul(ab, c, lam) == hurwitz_mul(a, hurwitz_mul(b, c, lam), lam), ex)
        chk["lambda_hat_unital"].record(lambda_hat(one, lam) == one, ex)
        chk["lambda_hat_multiplicative"].record(
            lambda_hat(ab, lam) == hurwitz_mul(lambda_hat(a, lam), lambda_hat(b, lam), 1), ex
        )
        chk["theta_unital"].record(theta(one) == ones, ex)
        chk["theta_multiplicative"].record(theta(hurwitz_mul(a, b, 1)) == pointwise_mul(theta(a), theta(b)), ex)
        chk["gamma_unital"].record(gamma(one, lam) == ones, ex)
        ga = gamma(a, lam)
        chk["gamma_multiplicative"].record(gamma(ab, lam) == pointwise_mul(ga, gamma(b, lam)), ex)
        chk["gamma_factorization"].record(ga == theta(lambda_hat(a, lam)), ex)
        chk["theta_bar_left_inverse"].record(theta_bar(theta(a)) == a, ex)
        chk["theta_bar_right_inverse"].record(theta(theta_bar(a)) == a, ex)
        if lvl >= 2:
            r = lvl - 1
            ar, br = a.restrict(r), b.restrict(r)
            ok = (
                ab.restrict(r) == hurwitz_mul(ar, br, lam)
                and pointwise_mul(a, b).restrict(r) == pointwise_mul(ar, br)
                and lambda_hat(a, lam).restrict(r) == lambda_hat(ar, lam)
                and theta(a).restrict(r) == theta(ar)
                and theta_bar(a).restrict(r) == theta_bar(ar)
                and ga.restrict(r) == gamma(ar, lam)
            )
            chk["restriction_compatible"].record(ok, ex)
    return list(chk.values())


def suite_hurwitz(
    seed: int = 0, levels=range(1, 9), lambdas=DEFAULT_LAMBDAS, ctxs=DEFAULT_CTXS, trials: int = 200, workers: int = 1
) -> SuiteReport:
    levels = list(levels)
    lams = [format_scalar(x) for x in _scalars(lambdas)]
    report = SuiteReport("hurwitz", {"levels": levels, "lambdas": lams, "ctxs": list(ctxs), "trials": trials})
    for name, anchor in HURWITZ_IDENTITIES:
        report.add(name, anchor)
    # ``trials`` random triples for every (ctx, lam, level)
    cells = [(seed, c, lam, lvl, trials) for c in ctxs for lam in lams for lvl in sorted(levels, reverse=True)]
    _merge(report, _map_cells(_hurwitz_cell, cells, workers))
    return report.prune()


# -- interpolation ------------------------------------------------------------------------


def suite_interp(seed: int = 0, levels=range(1, 9), ctxs=("rat", "poly3"), trials: int = 100, crt_levels=range(1, 7)) -> SuiteReport:
    levels = list(levels)
    report = SuiteReport("interp", {"levels": levels, "ctxs": list(ctxs), "trials": trials, "crt_levels": list(crt_levels)})
    c_psi_u = report.add("psi_unital", "psi sends the unit to the residue 1")
    c_psi_m = report.add("psi_multiplicative", "psi: weight-1 product to residue product (binomial product rule)")
    c_phi_u = report.add("phi_unital", "phi sends 1 to the all-ones sequence")
    c_phi_m = report.add("phi_multiplicative", "phi: residue product to pointwise product")
    c_tri = report.add("phi_psi_is_theta", "phi o psi = theta (commuting triangle)")
    c_inv = report.add("phi_invertible", "phi is bijective: interpolation inverts evaluation")
    c_two = report.add("phi_inverse_two_routes", "matrix inverse of evaluation = psi o theta-bar")
    c_tri_m = report.add("evaluation_unitriangular", "evaluation matrix C(n, m) is lower unitriangular")
    c_crt = report.add("crt_kernel", "kernel of evaluation at 0..l-1 = multiples of x(x-1)...(x-l+1)")
    c_rej = report.add("psi_rejects_noncommutative", "psi is only defined for commutative coefficients")
    for cname in ctxs:
        ctx = get_ctx(cname)
        rng = make_rng(seed, f"interp:{cname}")
        for k in range(trials):
            lvl = levels[k % len(levels)]
            a, b = random_series(ctx, lvl, rng), random_series(ctx, lvl, rng)
            f, g = PolyResidue(ctx, random_series(ctx, lvl, rng).coeffs), PolyResidue(ctx, random_series(ctx, lvl, rng).coeffs)
            ex = _ex(ctx=cname, level=lvl, a=a, b=b, f=f, g=g)
            one = TruncatedSeries.unit(ctx, lvl)
            c_psi_u.record(psi(one) == PolyResidue.binom_x(ctx, 0, lvl), ex)
            c_psi_m.record(psi(hurwitz_mul(a, b, 1)) == residue_mul(psi(a), psi(b)), ex)
            c_phi_u.record(phi(PolyResidue.binom_x(ctx, 0, lvl)) == TruncatedSeries.ones(ctx, lvl), ex)
            c_phi_m.record(phi(residue_mul(f, g)) == pointwise_mul(phi(f), phi(g)), ex)
            c_tri.record(phi(psi(a)) == theta(a), ex)
            c_inv.record(phi_inverse(phi(f)) == f and phi(phi_inverse(a)) == a, ex)
            c_two.record(phi_inverse(a) == phi_inverse_via_theta_bar(a), ex)
    for lvl in levels:
        E = evaluation_matrix(lvl)
        ok = all(E.rows[i][i] == 1 for i in range(lvl)) and all(E.rows[i][j] == 0 for i in range(lvl) for j in range(i + 1, lvl))
        c_tri_m.record(ok, _ex(level=lvl))
    for lvl in crt_levels:
        c_crt.record(crt_kernel_check(lvl), _ex(level=lvl))
    try:
        psi(TruncatedSeries.unit(get_ctx("mat2"), 2))
        c_rej.record(False, _ex(ctx="mat2"))
    except ValueError:
        c_rej.record(True)
    return report.prune()


# -- Rota-Baxter lifts ----------------------------------------------------------------------


def suite_rota_baxter(
    seed: int = 0, levels=range(1, 9), lambdas=DEFAULT_LAMBDAS, ctxs=DEFAULT_CTXS, trials: int = 40, solved_pool: int = 3
) -> SuiteReport:
    levels = list(levels)
    report = SuiteReport(
        "rota-baxter",
        {
            "levels": levels,
            "lambdas": [format_scalar(x) for x in _scalars(lambdas)],
            "ctxs": list(ctxs),
            "trials": trials,
            "solved_pool": solved_pool,
        },
    )
    c_bar = report.add("rb_bar_identity", "P-bar is Rota-Baxter of weight lam for the Hurwitz product")
    c_til = report.add("rb_tilde_identity", "P-tilde is Rota-Baxter of weight lam for the pointwise product")
    c_int = report.add("gamma_intertwines", "gamma o P-bar = P-tilde o gamma")
    c_tr = report.add("gamma_transported_operator", "gamma o P-bar o gamma^-1 is Rota-Baxter for the pointwise product and equals P-tilde (lam != 0)")
    c_dif = report.add("difference_inverts_tilde", "difference o P-tilde = lam * id")
    c_leib = report.add("difference_leibniz", "difference is a weight-1 derivation of the pointwise product")
    c_op = report.add("base_operator_valid", "operators used are Rota-Baxter of weight lam on A")
    for cname in ctxs:
        ctx = get_ctx(cname)
        for lam in _scalars(lambdas):
            rng = make_rng(seed, f"rota-baxter:{cname}:{format_scalar(lam)}")
            # Q at weight 0 admits only P = 0, so solved operators come from the larger algebras
            solved = [solve_rota_baxter(ctx, lam, rng) for _ in range(solved_pool)] if ctx.dim > 1 else []
            for k in range(trials):
                lvl = levels[k % len(levels)]
                if k % 3 == 0:
                    P = RotaBaxterOp(ctx, lam, Matrix.zeros(ctx.dim, ctx.dim))
                elif k % 3 == 2 and solved:
                    P = solved[(k // 3) % len(solved)]
                else:
                    P = random_rota_baxter(ctx, lam, rng)
                x, y = random_elem(ctx, rng), random_elem(ctx, rng)
                c_op.record(rota_baxter_holds(P, lam, x, y, lambda u, v: u * v), _ex(P=P.map, x=x, y=y))
                a, b = random_series(ctx, lvl, rng), random_series(ctx, lvl, rng)
                ex = _ex(ctx=cname, level=lvl, lam=format_scalar(lam), P=P.map, a=a, b=b)
                c_bar.record(rota_baxter_holds(lambda s: rb_bar(P, s), lam, a, b, lambda u, v: hurwitz_mul(u, v, lam)), ex)
                c_til.record(rota_baxter_holds(lambda s: rb_tilde(P, s), lam, a, b, pointwise_mul), ex)
                c_int.record(gamma(rb_bar(P, a), lam) == rb_tilde(P, gamma(a, lam)), ex)
                if lam:
                    transported = lambda s: gamma(rb_bar(P, gamma_inverse(s, lam)), lam)  # noqa: E731
                    c_tr.record(
                        transported(a) == rb_tilde(P, a) and rota_baxter_holds(transported, lam, a, b, pointwise_mul), ex
                    )
                if lvl >= 2:
                    r = lvl - 1
                    c_dif.record(difference(rb_tilde(P, a)).restrict(r) == a.scale(lam).restrict(r), ex)
                    da, db = difference(a), difference(b)
                    lhs = difference(pointwise_mul(a, b))
                    rhs = pointwise_mul(da, b) + pointwise_mul(a, db) + pointwise_mul(da, db)
                    c_leib.record(lhs.restrict(r) == rhs.restrict(r), ex)
    return report.prune()


# -- comonads and cofree lifts ------------------------------------------------------------------


def _grid(s: TruncatedSeries, ctx, inner: int) -> list:
    d = ctx.dim
    return [[AlgebraElem(ctx, e.coords[n * d : (n + 1) * d]) for n in range(inner)] for e in s.coeffs]


def _gamma_grid(grid: list, ctx, lam) -> list:
    rows = [gamma(TruncatedSeries(ctx, row), lam).coeffs for row in grid]
    cols = [gamma(TruncatedSeries(ctx, [rows[m][n] for m in range(len(rows))]), lam).coeffs for n in range(len(rows[0]))]
    return [[cols[n][m] for n in range(len(cols))] for m in range(len(rows))]


def suite_comonad(seed: int = 0, levels=range(1, 7), lambdas=DEFAULT_LAMBDAS, ctxs=DEFAULT_CTXS, trials: int = 30) -> SuiteReport:
    levels = list(levels)
    report = SuiteReport(
        "comonad",
        {"levels": levels, "lambdas": [format_scalar(x) for x in _scalars(lambdas)], "ctxs": list(ctxs), "trials": trials},
    )
    c_leib = report.add("shift_leibniz", "shift is a weight-lam derivation of the Hurwitz product")
    c_cu = report.add("counit_laws", "counit o comultiplication = id on both sides")
    c_ca = report.add("coassociativity", "comultiplication is coassociative")
    c_cum = report.add("counit_algebra_map", "counit (0th component) is an algebra map")
    c_cm = report.add("comult_algebra_map", "comultiplication is an algebra map for the weight-lam products")
    c_g0 = report.add("gamma_counit_square", "gamma commutes with the counits")
    c_g1 = report.add("gamma_comult_square", "gamma commutes with the comultiplications")
    c_la = report.add("lift_dif_algebra_map", "cofree lift along a weighted derivation is an algebra map")
    c_li = report.add("lift_dif_intertwines", "cofree lift intertwines the derivation with the shift")
    c_lc = report.add("lift_dif_counit", "0th component of the cofree lift is f")
    c_ea = report.add("lift_endo_algebra_map", "lift along an endomorphism is an algebra map to the pointwise product")
    c_ei = report.add("lift_endo_intertwines", "lift along an endomorphism intertwines it with the shift")
    c2 = involution_algebra()
    for cname in ctxs:
        ctx = get_ctx(cname)
        for lam in _scalars(lambdas):
            rng = make_rng(seed, f"comonad:{cname}:{format_scalar(lam)}")
            for k in range(trials):
                lvl = levels[k % len(levels)]
                a, b = random_series(ctx, lvl, rng), random_series(ctx, lvl, rng)
                ex = _ex(ctx=cname, level=lvl, lam=format_scalar(lam), a=a, b=b)
                if lvl >= 2:
                    r = lvl - 1
                    da, db = shift_derivation(a), shift_derivation(b)
                    lhs = shift_derivation(hurwitz_mul(a, b, lam))
                    rhs = hurwitz_mul(da, b, lam) + hurwitz_mul(a, db, lam) + hurwitz_mul(da, db, lam).scale(lam)
                    c_leib.record(lhs.restrict(r) == rhs.restrict(r), ex)
                outer = (lvl + 1) // 2
                inner = lvl + 1 - outer
                cm = comonad_comult(a, lam, outer, inner)
                grid = _grid(cm, ctx, inner)
                ok = [row[0] for row in grid] == list(a.coeffs[:outer]) and grid[0] == list(a.coeffs[:inner])
                c_cu.record(ok, ex)
                o = i = j = max(1, (lvl + 2) // 3)
                route1 = [
                    _grid(comonad_comult(TruncatedSeries(ctx, row), lam, i, j), ctx, j)
                    for row in _grid(comonad_comult(a, lam, o, i + j - 1), ctx, i + j - 1)
                ]
                ictx = series_ctx(ctx, j, lam)
                outer2 = comonad_comult(comonad_comult(a, lam, o + i - 1, j), lam, o, i)
                route2 = [[_grid(TruncatedSeries(ictx, [e]), ctx, j)[0] for e in _grid(outer2, ictx, i)[m]] for m in range(o)]
                c_ca.record(route1 == route2, ex)
                ab = hurwitz_mul(a, b, lam)
                c_cum.record(comonad_counit(ab) == comonad_counit(a) * comonad_counit(b), ex)
                c_cm.record(
                    comonad_comult(ab, lam, outer, inner)
                    == hurwitz_mul(comonad_comult(a, lam, outer, inner), comonad_comult(b, lam, outer, inner), lam),
                    ex,
                )
                ga = gamma(a, lam)
                c_g0.record(comonad_counit(ga) == comonad_counit(a), ex)
                lhs = _grid(comonad_comult(ga, None, outer, inner), ctx, inner)
                c_g1.record(lhs == _gamma_grid(grid, ctx, lam), ex)
                # cofree lifts: source is ctx itself or, for lam != 0, Q[u]/(u^2-1)
                if lam and k % 2:
                    src = c2
                    der = random_derivation(c2, lam, rng)
                    sign = rng.choice((1, -1))
                    f = Matrix.from_columns([list(ctx.unit), [sign * u for u in ctx.unit]], ctx.dim)
                else:
                    src = ctx
                    der = random_derivation(ctx, lam, rng)
                    f = random_automorphism(ctx, rng)
                lift = cofree_lift_dif(f, der, lvl, ctx)
                x, y = random_elem(src, rng), random_elem(src, rng)
                lex = _ex(ctx=cname, source=src.name, level=lvl, lam=format_scalar(lam), der=der.map, f=f, x=x, y=y)
                c_la.record(
                    lift(x * y) == hurwitz_mul(lift(x), lift(y), lam) and lift(src.one()) == TruncatedSeries.unit(ctx, lvl),
                    lex,
                )
                if lvl >= 2:
                    c_li.record(lift(der(x)).restrict(lvl - 1) == shift_derivation(lift(x)).restrict(lvl - 1), lex)
                c_lc.record(lift(x).coeffs[0] == AlgebraElem(ctx, f.apply(x.coords)), lex)
                endo = random_automorphism(src, rng)
                elift = cofree_lift_endo(f, endo, lvl, src, ctx)
                eex = _ex(ctx=cname, source=src.name, level=lvl, phi=endo, f=f, x=x, y=y)
                c_ea.record(
                    elift(x * y) == pointwise_mul(elift(x), elift(y)) and elift(src.one()) == TruncatedSeries.ones(ctx, lvl),
                    eex,
                )
                if lvl >= 2:
                    c_ei.record(elift(x.apply(endo)).restrict(lvl - 1) == shift_derivation(elift(x)).restrict(lvl - 1), eex)
    return report.prune()


# -- coalgebras -------------------------------------------------------------------------------------


def _same_coalgebra(a: FinCoalgebra, b: FinCoalgebra) -> bool:
    return a.dim == b.dim and a.counit == b.counit and a.comult == b.comult and a.point == b.point


def _gamma_matrix(ctx, level: int, lam) -> Matrix:
    n = level * ctx.dim
    cols = []
    for k in range(n):
        e = [0] * n
        e[k] = 1
        cols.append(list(gamma(TruncatedSeries.unflatten(ctx, level, e), lam).flatten()))
    return Matrix.from_columns(cols, n)


def suite_coalgebra(
    seed: int = 0,
    levels=range(1, 6),
    lambdas=DEFAULT_LAMBDAS,
    ctxs=DEFAULT_CTXS,
    bialgebra_bound: int = 8,
    xi_levels=range(0, 7),
    normalize_trials: int = 100,
) -> SuiteReport:
    levels = list(levels)
    lams = _scalars(lambdas)
    report = SuiteReport(
        "coalgebra",
        {
            "levels": levels,
            "lambdas": [format_scalar(x) for x in lams],
            "ctxs": list(ctxs),
            "bialgebra_bound": bialgebra_bound,
            "xi_levels": list(xi_levels),
            "normalize_trials": normalize_trials,
        },
    )
    c_laws = report.add("coalgebra_laws", "coassociativity and counit laws for C(lam), D, tensors and quotients")
    c_qc = report.add("quotient_C_matches_formula", "word quotient of C(lam)^l = closed-form comultiplication of d_n")
    c_qd = report.add("quotient_D_matches_formula", "word quotient of D^l is set-like on d_n")
    c_xi = report.add("xi_morphism", "xi and its induced maps are pointed coalgebra morphisms with the binomial formula")
    c_bi = report.add("bialgebra_compatibility", "comultiplication and counit multiplicative up to the working bound")
    c_bs = report.add("bialgebra_two_routes", "graded comultiplication from the quotient equals the closed form")
    c_cc = report.add("convolution_C_is_hurwitz", "[C(lam)_l, A] = (A^(l+1), weight-lam Hurwitz product)")
    c_cd = report.add("convolution_D_is_pointwise", "[D_l, A] = (A^(l+1), pointwise product)")
    c_cx = report.add("convolution_xi_is_gamma", "[xi_l, A] = gamma_(l+1)")
    c_nr = report.add("normalize_rank2", "every pointed rank-2 coalgebra is C(lam) after d = d' - eps(d') e")
    c_ne = report.add("normalize_rank2_example", "eps(d')=3, delta(d')=42ee-14ed'-14d'e+5d'd' gives lam=5, d=d'-3e")
    for lam in lams:
        for build in (lambda: make_C_lambda(lam), make_D, lambda: coalgebra_tensor(make_C_lambda(lam), make_D())):
            try:
                build()
                c_laws.record(True)
            except ValueError as exc:
                c_laws.record(False, _ex(lam=format_scalar(lam), error=str(exc)))
        for lvl in levels:
            ex = _ex(lam=format_scalar(lam), level=lvl)
            try:
                q = free_quotient(make_C_lambda(lam), lvl)
                c_laws.record(True)
                c_qc.record(_same_coalgebra(q, C_lambda_ell(lam, lvl)), ex)
            except ValueError as exc:
                c_laws.record(False, _ex(lam=format_scalar(lam), level=lvl, error=str(exc)))
            c_qd.record(_same_coalgebra(free_quotient(make_D(), lvl), D_ell(lvl)), ex)
            try:
                m = induced_quotient_morphism(make_xi(lam), lvl)
                direct = CoalgebraMorphism(D_ell(lvl), C_lambda_ell(lam, lvl), xi_matrix(lam, lvl))
                c_xi.record(m.matrix == xi_matrix(lam, lvl) and direct.preserves_point(), ex)
            except ValueError as exc:
                c_xi.record(False, _ex(lam=format_scalar(lam), level=lvl, error=str(exc)))
        for kind in ("C", "D"):
            formula = GradedBialgebra(kind, lam, bialgebra_bound, "formula")
            quotient = GradedBialgebra(kind, lam, bialgebra_bound, "quotient")
            for B in (formula, quotient):
                bad = B.check_compatibility()
                c_bi.record(not bad, _ex(kind=kind, source=B.source, lam=format_scalar(lam), failures=bad))
            same = all(formula.delta(n) == quotient.delta(n) for n in range(bialgebra_bound + 1))
            c_bs.record(same, _ex(kind=kind, lam=format_scalar(lam)))
        for cname in ctxs:
            ctx = get_ctx(cname)
            for lvl in levels:
                ex = _ex(ctx=cname, lam=format_scalar(lam), level=lvl)
                conv = convolution_algebra(C_lambda_ell(lam, lvl), ctx)
                ser = series_ctx(ctx, lvl + 1, lam)
                c_cc.record(conv.table == ser.table and conv.unit == ser.unit, ex)
            for lvl in xi_levels:
                ex = _ex(ctx=cname, lam=format_scalar(lam), level=lvl)
                c_cx.record(precompose_matrix(xi_matrix(lam, lvl), ctx.dim) == _gamma_matrix(ctx, lvl + 1, lam), ex)
    for cname in ctxs:
        ctx = get_ctx(cname)
        for lvl in levels:
            conv = convolution_algebra(D_ell(lvl), ctx)
            ser = series_ctx(ctx, lvl + 1, None)
            c_cd.record(conv.table == ser.table and conv.unit == ser.unit, _ex(ctx=cname, level=lvl))
    rng = make_rng(seed, "coalgebra:normalize")
    for _ in range(normalize_trials):
        lam = random_scalar(rng)
        alpha = random_scalar(rng) or Q(1)
        beta = random_scalar(rng)
        basis = Matrix.from_columns([[1, 0], [beta, alpha]], 2)
        C = transport(make_C_lambda(lam), basis, ["e", "d'"], point=0)
        ex = _ex(lam=format_scalar(lam), alpha=format_scalar(alpha), beta=format_scalar(beta))
        try:
            res = normalize_rank2(C)
            # d' = alpha d + beta e, so the normalized generator is alpha d and
            # carries weight lam / alpha
            c_nr.record(res.lam * alpha == lam and _same_coalgebra(transport(C, res.basis_change, point=0), make_C_lambda(res.lam)), ex)
        except ValueError as exc:
            c_nr.record(False, _ex(lam=format_scalar(lam), error=str(exc)))
    example = FinCoalgebra(["e", "d'"], [1, 3], [[(0, 0, 1)], [(0, 0, 42), (0, 1, -14), (1, 0, -14), (1, 1, 5)]], point=0)
    res = normalize_rank2(example)
    c_ne.record(res.lam == 5 and res.basis_change == Matrix([[1, -3], [0, 1]]), _ex(lam=res.lam))
    return report.prune()


# -- species ------------------------------------------------------------------------------------------


SPECIES_CHECKS = (
    ("tensor_ranks_are_hurwitz", "rank of the weighted tensor = Hurwitz product of ranks at lam = g"),
    ("tensor_rank_formula", "cover count formula = Hurwitz product of ranks"),
    ("theta_ranks_are_gamma", "ranks of the Theta transform = gamma of the rank sequence"),
    ("tensor_character_two_ways", "character of the weighted tensor: matrices vs summand bookkeeping"),
    ("theta_strong_monoidal", "character of Theta(M * N) = character of Theta M (x) Theta N"),
    ("subset_coalgebra_laws", "subset coalgebra is coassociative and counital"),
    ("subset_convolution_is_hurwitz", "convolution on cardinality-invariant maps = weighted Hurwitz product"),
)


def _rank_ints(s: TruncatedSeries) -> list:
    return [int(x.coords[0]) for x in s.coeffs]


def _species_cell(seed: int, g: int, bound: int, pairs: int, character_bound: int) -> list:
    chk = {name: Check(name, anchor) for name, anchor in SPECIES_CHECKS[:5]}
    rat = rational()
    rng = make_rng(seed, f"species:{g}:{bound}")
    for _ in range(pairs):
        M, N = random_species(bound, rng, name="M"), random_species(bound, rng, name="N")
        m, n = M.rank_sequence(), N.rank_sequence()
        want = _rank_ints(hurwitz_mul(TruncatedSeries.from_scalars(rat, m), TruncatedSeries.from_scalars(rat, n), g))
        ex = _ex(g=g, bound=bound, M=M, N=N)
        T = weighted_tensor(M, N, g)
        chk["tensor_ranks_are_hurwitz"].record(T.rank_sequence() == want, ex)
        chk["tensor_rank_formula"].record(weighted_tensor_ranks(m, n, g) == want, ex)
        th = _rank_ints(gamma(TruncatedSeries.from_scalars(rat, m), g))
        chk["theta_ranks_are_gamma"].record(theta_inf_transform(M, g).rank_sequence() == th, ex)
        if bound > character_bound:
            continue
        lhs_sp = theta_inf_transform(T, g)
        rhs_sp = pointwise_tensor(theta_inf_transform(M, g), theta_inf_transform(N, g))
        for k in range(bound + 1):
            for sigma in permutations(k):
                sx = _ex(g=g, bound=bound, n=k, sigma=list(sigma), M=M, N=N)
                chk["tensor_character_two_ways"].record(character(T, k, sigma) == weighted_tensor_character(M, N, g, k, sigma), sx)
                lhs = character(lhs_sp, k, sigma)
                chk["theta_strong_monoidal"].record(
                    lhs == character(rhs_sp, k, sigma)
                    and lhs == theta_inf_character(M, g, k, sigma) * theta_inf_character(N, g, k, sigma),
                    sx,
                )
    return list(chk.values())


def _subset_cell(seed: int, lam_text: str, subset_bound: int) -> list:
    chk = {name: Check(name, anchor) for name, anchor in SPECIES_CHECKS[5:]}
    lam = parse_scalar(lam_text)
    rng = make_rng(seed, f"species:subset:{lam_text}")
    for n in range(subset_bound + 1):
        try:
            S = subset_coalgebra(n, lam)
            chk["subset_coalgebra_laws"].record(True)
        except ValueError as exc:
            chk["subset_coalgebra_laws"].record(False, _ex(n=n, lam=lam_text, error=str(exc)))
            continue
        sizes = [lab.count(",") + 1 if lab != "{}" else 0 for lab in S.labels]
        for cname in ("rat", "mat2"):
            ctx = get_ctx(cname)
            a, b = random_series(ctx, n + 1, rng), random_series(ctx, n + 1, rng)
            prod = convolve(S, ctx, [a.coeffs[k].coords for k in sizes], [b.coeffs[k].coords for k in sizes])
            h = hurwitz_mul(a, b, lam)
            ok = all(prod[x] == h.coeffs[sizes[x]].coords for x in range(S.dim))
            chk["subset_convolution_is_hurwitz"].record(ok, _ex(n=n, lam=lam_text, ctx=cname, a=a, b=b))
    return list(chk.values())


def suite_species(
    seed: int = 0,
    bounds=range(0, 6),
    weights=(0, 1, 2),
    character_bound: int = 4,
    pairs: int = 3,
    subset_bound: int = 5,
    lambdas=DEFAULT_LAMBDAS,
    workers: int = 1,
) -> SuiteReport:
    bounds = list(bounds)
    lams = [format_scalar(x) for x in _scalars(lambdas)]
    report = SuiteReport(
        "species",
        {
            "bounds": bounds,
            "weights": list(weights),
            "character_bound": character_bound,
            "pairs": pairs,
            "subset_bound": subset_bound,
            "lambdas": lams,
        },
    )
    for name, anchor in SPECIES_CHECKS:
        report.add(name, anchor)
    # largest cells first so a pool finishes early
    cells = [(seed, g, b, pairs, character_bound) for b in sorted(bounds, reverse=True) for g in weights]
    _merge(report, _map_cells(_species_cell, cells, workers))
    _merge(report, _map_cells(_subset_cell, [(seed, lam, subset_bound) for lam in lams], workers))
    return report.prune()


# -- Dold-Kan --------------------------------------------------------------------------------------------

DOLDKAN_DEFAULT = (("fi_sharp", 4), ("fo_sharp", 4), ("cube", 3), ("simplicial", 3))


DOLDKAN_CHECKS = (
    ("factorization_unique", "every morphism factors as n o r o m* in exactly one way"),
    ("subobject_count", "Sub(A) lists each M-subobject class once"),
    ("gamma_functorial", "Gamma(g o f) = Gamma(g) Gamma(f) and Gamma(1) = 1"),
    ("gamma_idempotents", "Gamma(m m*) is the idempotent on summands factoring through m"),
    ("roundtrip", "N o Gamma is isomorphic to the identity"),
    ("covering_routes_agree", "covering pairs: pullback form = idempotent form"),
    ("covering_jointly_monic", "simplicial covering pairs = jointly monic surjection pairs"),
    ("tensor_closed_form_vs_engine", "covering-pair tensor = N(Gamma F (x) Gamma G)"),
    ("representative_order_invariant", "reordering Sub(A) leaves N o Gamma, the tensor and its ranks unchanged up to iso"),
    ("tensor_unit", "unit is k exactly where |Sub(A)| = 1, and equals N of the constant functor"),
    ("decategorified_bridge", "ranks of the tensor of trivial presheaves = weight-1 Hurwitz product"),
    ("chain_tensor_counts", "jointly monic pairs from [n] number sum multinomial(n; r, s, t) = 3^n"),
)


def _doldkan_cell(seed: int, name: str, b: int, presheaves: int) -> list:
    chk = {n: Check(n, anchor) for n, anchor in DOLDKAN_CHECKS[:-1]}
    rat = rational()
    d = dk.make_instance(name, b)
    bad = dk.check_factorizations(d)
    chk["factorization_unique"].record(not bad, _ex(instance=name, bound=b, morphism=str(bad[0][0]) if bad else ""))
    chk["subobject_count"].record(dk.rank_identity_check(d), _ex(instance=name, bound=b))
    rng = make_rng(seed, f"doldkan:{name}:{b}")
    for k in range(presheaves):
        F, G = dk.random_presheaf(d, rng), dk.random_presheaf(d, rng)
        ex = _ex(instance=name, bound=b, F=F, G=G)
        if k == 0:
            badf = dk.check_gamma_functoriality(d, F)
            chk["gamma_functorial"].record(not badf, ex)
            chk["gamma_idempotents"].record(not dk.check_idempotents(d, F), ex)
        rt = dk.roundtrip(d, F)
        chk["roundtrip"].record(rt.ok, _ex(instance=name, bound=b, F=F, detail=rt.detail))
        TT = dk.transported_tensor(d, F, G)
        cmp = TT.compare_with_engine()
        chk["tensor_closed_form_vs_engine"].record(cmp.ok, _ex(instance=name, bound=b, F=F, G=G, detail=cmp.detail))
    orders = {}
    for a in d.objects:
        o = list(range(d.sub_count(a)))
        rng.shuffle(o)
        orders[a] = o
    d2 = d.with_subobject_order(orders)
    F, G = dk.random_presheaf(d, rng), dk.random_presheaf(d, rng)
    F2, G2 = (dk.Presheaf(d2, H.ranks, H.maps) for H in (F, G))
    TT, TT2 = dk.transported_tensor(d, F, G), dk.transported_tensor(d2, F2, G2)
    ok = (
        dk.roundtrip(d2, F2).ok
        and TT2.compare_with_engine().ok
        and [TT.rank(a) for a in d.objects] == [TT2.rank(a) for a in d.objects]
        and all(set(TT.pairs[a]) == set(TT2.pairs[a]) for a in d.objects)
    )
    chk["representative_order_invariant"].record(ok, _ex(instance=name, bound=b, orders=str(orders), F=F, G=G))
    for a in d.objects:
        pb = set(dk.covering_pairs(d, a, "pullback"))
        chk["covering_routes_agree"].record(pb == set(dk.covering_pairs(d, a, "idempotent")), _ex(instance=name, object=a))
        if name == "simplicial":
            subs = d.subobjects(a)
            jm = {(n, n2) for n in subs for n2 in subs if dk.jointly_monic(n.data, n2.data)}
            chk["covering_jointly_monic"].record(pb == jm, _ex(object=a))
    J = dk.tensor_unit_ranks(d)
    chk["tensor_unit"].record(J == dk.unit_from_constant(d) and J[0] == 1 and all(J[a] == 0 for a in d.objects if a), _ex(instance=name))
    if name in ("fi_sharp", "fo_sharp", "simplicial"):
        for _ in range(presheaves):
            f = [rng.randint(0, 2) for _ in d.objects]
            g = [rng.randint(0, 2) for _ in d.objects]
            TT = dk.transported_tensor(d, dk.trivial_presheaf(d, dict(enumerate(f))), dk.trivial_presheaf(d, dict(enumerate(g))))
            want = hurwitz_mul(TruncatedSeries.from_scalars(rat, f), TruncatedSeries.from_scalars(rat, g), 1)
            got = [TT.rank(a) for a in d.objects]
            chk["decategorified_bridge"].record(got == [int(x.coords[0]) for x in want.coeffs], _ex(instance=name, f=f, g=g, ranks=got))
    return list(chk.values())


def _chain_cell(chain_bound: int) -> list:
    c = Check(*DOLDKAN_CHECKS[-1])
    for n in range(chain_bound + 1):
        ones = [1] * (n + 1)
        count = len(dk.chain_tensor_object(ones, ones, n))
        total = sum(int(multinomial(n, (r, s, n - r - s))) for r in range(n + 1) for s in range(n + 1 - r))
        c.record(count == total == 3**n, _ex(n=n, count=count, total=total))
    return [c]


def suite_doldkan(
    seed: int = 0, instances=None, bound: int | None = None, presheaves: int = 3, chain_bound: int = 5, workers: int = 1
) -> SuiteReport:
    if instances is None:
        plan = list(DOLDKAN_DEFAULT) if bound is None else [(name, bound) for name in dk.INSTANCES]
    else:
        plan = [(name, bound if bound is not None else dict(DOLDKAN_DEFAULT).get(name, 0)) for name in instances]
    for name, b in plan:
        if name not in dk.INSTANCES:
            raise ValueError(f"unknown instance {name!r}; choose from {list(dk.INSTANCES)}")
        if not 0 <= b <= dk.MAX_BOUND:
            raise ValueError(f"bound must lie in 0..{dk.MAX_BOUND}")
    with_chain = instances is None or any(name == "simplicial" for name, _ in plan)
    report = SuiteReport(
        "doldkan",
        {"instances": [f"{n}@{b}" for n, b in plan], "presheaves": presheaves, "chain_bound": chain_bound if with_chain else None},
    )
    for n, anchor in DOLDKAN_CHECKS:
        report.add(n, anchor)
    _merge(report, _map_cells(_doldkan_cell, [(seed, name, b, presheaves) for name, b in plan], workers))
    if with_chain:
        _merge(report, [_chain_cell(chain_bound)])
    # checks that only apply to some instances are listed only when they ran
    return report.prune()


# -- cross-module bridge -------------------------------------------------------------------------------


def suite_bridge(seed: int = 0, bound: int = 4, trials: int = 10) -> SuiteReport:
    """fi_sharp tensor ranks = weight-1 Hurwitz ranks = [C(1)_l, Q] convolution."""
    report = SuiteReport("bridge", {"instance": "fi_sharp", "bound": bound, "trials": trials})
    c = report.add("fi_tensor_hurwitz_convolution", "fi_sharp tensor ranks = weight-1 Hurwitz = [C(1)_l, Q] convolution")
    d = dk.make_instance("fi_sharp", bound)
    rat = rational()
    C1 = C_lambda_ell(1, bound)
    rng = make_rng(seed, f"bridge:{bound}")
    for k in range(trials):
        if k % 2:
            F, G = dk.random_presheaf(d, rng), dk.random_presheaf(d, rng)
        else:
            F = dk.trivial_presheaf(d, {a: rng.randint(0, 3) for a in d.objects})
            G = dk.trivial_presheaf(d, {a: rng.randint(0, 3) for a in d.objects})
        f, g = F.rank_sequence(), G.rank_sequence()
        tensor = [dk.transported_tensor(d, F, G).rank(a) for a in d.objects]
        hz = [int(x.coords[0]) for x in hurwitz_mul(TruncatedSeries.from_scalars(rat, f), TruncatedSeries.from_scalars(rat, g), 1).coeffs]
        conv = [int(v[0]) for v in convolve(C1, rat, [(Q(x),) for x in f], [(Q(x),) for x in g])]
        c.record(tensor == hz == conv, _ex(f=f, g=g, tensor=tensor, hurwitz=hz, convolution=conv))
    return report.prune()


SUITES = {
    "hurwitz": suite_hurwitz,
    "interp": suite_interp,
    "rota-baxter": suite_rota_baxter,
    "comonad": suite_comonad,
    "coalgebra": suite_coalgebra,
    "species": suite_species,
    "doldkan": suite_doldkan,
    "bridge": suite_bridge,
}
