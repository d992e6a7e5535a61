"""Rota-Baxter operators found by solving the defining polynomial system.

A random support pattern of unknown matrix entries is fixed, the identity
``P(x)P(y) = P(P(x)y + xP(y) + lam xy)`` on basis pairs is solved exactly
with sympy, free parameters are set to random rationals and the result is
conjugated by a random automorphism.  Independent of the closed-form
generator in :mod:`hurwitz.random_rota_baxter`.
"""

from __future__ import annotations

from .algebra import AlgebraCtx
from .exact import Matrix, Q
from .hurwitz import RotaBaxterOp, _conjugate, random_automorphism, random_scalar


def _system(ctx: AlgebraCtx, lam, positions):
    import sympy as sp

    xs = sp.symbols(f"p0:{len(positions)}")
    n = ctx.dim
    P = sp.zeros(n, n)
    for s, (i, j) in zip(xs, positions):
        P[i, j] = s
    lam_s = sp.Rational(int(Q(lam).numerator), int(Q(lam).denominator))
    table = [[[(k, sp.Rational(int(c.numerator), int(c.denominator))) for k, c in e] for e in row] for row in ctx.table]

    def mul(u, v):
        out = [0] * n
        for i in range(n):
            if u[i] == 0:
                continue
            for j in range(n):
                if v[j] == 0:
                    continue
                for k, c in table[i][j]:
                    out[k] += u[i] * v[j] * c
        return sp.Matrix(out)

    basis = [sp.Matrix([1 if k == i else 0 for k in range(n)]) for i in range(n)]
    eqs = set()
    for x in basis:
        for y in basis:
            px, py = P * x, P * y
            for e in mul(px, py) - P * (mul(px, y) + mul(x, py) + lam_s * mul(x, y)):
                e = sp.expand(e)
                if e != 0:
                    eqs.add(e)
    return xs, sorted(eqs, key=str)


def solve_rota_baxter(ctx: AlgebraCtx, lam, rng, unknowns: int = 6, attempts: int = 20, nonzero: bool = True) -> RotaBaxterOp:
    """A weight-``lam`` Rota-Baxter operator on ``ctx`` from an exact solve.

    Raises ``RuntimeError`` if no (nonzero, rational) solution turns up in
    ``attempts`` random support patterns.
    """
    import sympy as sp

    cells = [(i, j) for i in range(ctx.dim) for j in range(ctx.dim)]
    k = min(unknowns, len(cells))
    for _ in range(attempts):
        positions = sorted(rng.sample(cells, k))
        xs, eqs = _system(ctx, lam, positions)
        sols = sp.solve(eqs, xs, dict=True) if eqs else [{}]
        sols = sorted(sols, key=lambda s: sorted((str(a), str(b)) for a, b in s.items()))
        rng.shuffle(sols)
        for sol in sols:
            free = {x: sp.Rational(str(random_scalar(rng))) for x in xs if x not in sol}
            vals = [sp.nsimplify(sp.sympify(sol.get(x, x)).subs(free)) for x in xs]
            if not all(v.is_rational for v in vals):
                continue
            if nonzero and all(v == 0 for v in vals):
                continue
            rows = [[Q(0)] * ctx.dim for _ in range(ctx.dim)]
            for (i, j), v in zip(positions, vals):
                rows[i][j] = Q(v.p) / int(v.q)
            m = _conjugate(Matrix(rows), random_automorphism(ctx, rng))
            # construction re-checks the identity in exact arithmetic
            return RotaBaxterOp(ctx, lam, m)
    raise RuntimeError(f"no Rota-Baxter solution found on {ctx.name} at weight {lam}")
