"""Polynomial residues ``A[x] / C(x, l)`` in the falling-factorial basis,
the embedding of sequences into them and evaluation at ``0..l-1``."""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

from .algebra import AlgebraCtx, AlgebraElem
from .combinat import binomial, multinomial
from .exact import Matrix, Q, parse_scalar
from .hurwitz import TruncatedSeries, theta_bar


class PolyResidue:
    """``sum_n coeffs[n] * C(x, n)`` modulo ``C(x, level)``."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: AlgebraCtx, coeffs: Sequence[AlgebraElem]):
        coeffs = tuple(coeffs)
        if not coeffs:
            raise ValueError("level must be positive")
        if any(c.ctx is not ctx for c in coeffs):
            raise ValueError("coefficient lives in a different algebra")
        self.ctx = ctx
        self.coeffs = coeffs

    @property
    def level(self) -> int:
        return len(self.coeffs)

    @classmethod
    def binom_x(cls, ctx: AlgebraCtx, n: int, level: int) -> "PolyResidue":
        """The class of ``C(x, n)``; zero when ``n >= level``."""
        coeffs = [ctx.zero()] * level
        if n < level:
            coeffs[n] = ctx.one()
        return cls(ctx, coeffs)

    def __eq__(self, other):
        if not isinstance(other, PolyResidue):
            return NotImplemented
        return self.ctx is other.ctx and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((id(self.ctx), self.coeffs))

    def __repr__(self):
        terms = [f"({c})*C(x,{n})" for n, c in enumerate(self.coeffs) if not c.is_zero()]
        return " + ".join(terms) if terms else "0"

    def _check(self, other: "PolyResidue") -> None:
        if other.ctx is not self.ctx or other.level != self.level:
            raise ValueError("residues live in different quotient rings")

    def __add__(self, other):
        self._check(other)
        return PolyResidue(self.ctx, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        self._check(other)
        return PolyResidue(self.ctx, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __mul__(self, other):
        return residue_mul(self, other)

    def to_json(self) -> dict:
        return {
            "ctx": self.ctx.name,
            "level": self.level,
            "basis": "falling",
            "coeffs": [c.to_json() for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, data: dict, ctx: AlgebraCtx) -> "PolyResidue":
        if data.get("basis", "falling") != "falling":
            raise ValueError("only the falling-factorial basis is supported")
        rows = [[parse_scalar(str(x)) for x in row] for row in data["coeffs"]]
        return cls(ctx, [AlgebraElem(ctx, r) for r in rows])


@lru_cache(maxsize=None)
def _product_terms(level: int) -> tuple:
    """``(p, q, m, c)``: ``C(x,p) C(x,q)`` contains ``c * C(x,m)`` with ``m < level``."""
    out = []
    for p in range(level):
        for q in range(level):
            for t in range(min(p, q) + 1):
                m = p + q - t
                if m < level:
                    out.append((p, q, m, multinomial(m, (p - t, q - t, t))))
    return tuple(out)


def residue_mul(f: PolyResidue, g: PolyResidue) -> PolyResidue:
    f._check(g)
    ctx = f.ctx
    acc = [ctx.zero()] * f.level
    for p, q, m, c in _product_terms(f.level):
        if f.coeffs[p].is_zero() or g.coeffs[q].is_zero():
            continue
        acc[m] = acc[m] + (f.coeffs[p] * g.coeffs[q]) * c
    return PolyResidue(ctx, acc)


def psi(a: TruncatedSeries) -> PolyResidue:
    """``sum_n a_n C(x, n)``.  Multiplicativity relies on the coefficients
    commuting with each other, so non-commutative algebras are rejected."""
    if not a.ctx.commutative:
        raise ValueError(f"psi needs a commutative algebra, {a.ctx.name} is not")
    return PolyResidue(a.ctx, a.coeffs)


def psi_inverse(f: PolyResidue) -> TruncatedSeries:
    return TruncatedSeries(f.ctx, f.coeffs)


@lru_cache(maxsize=None)
def evaluation_matrix(level: int) -> Matrix:
    """``E[n][m] = C(n, m)``: lower unitriangular."""
    return Matrix([[binomial(n, m) for m in range(level)] for n in range(level)])


def _apply_scalar_matrix(m: Matrix, ctx: AlgebraCtx, coeffs: Sequence[AlgebraElem]) -> list:
    out = []
    for i in range(m.nrows):
        acc = ctx.zero()
        for j, c in enumerate(m.rows[i]):
            if c:
                acc = acc + coeffs[j] * c
        out.append(acc)
    return out


def phi(f: PolyResidue) -> TruncatedSeries:
    """Evaluate at ``x = 0, 1, ..., level-1``."""
    return TruncatedSeries(f.ctx, _apply_scalar_matrix(evaluation_matrix(f.level), f.ctx, f.coeffs))


def phi_inverse(a: TruncatedSeries) -> PolyResidue:
    """Interpolate through the inverse of the evaluation matrix."""
    inv = evaluation_matrix(a.level).inverse()
    return PolyResidue(a.ctx, _apply_scalar_matrix(inv, a.ctx, a.coeffs))


def phi_inverse_via_theta_bar(a: TruncatedSeries) -> PolyResidue:
    """Second route to the inverse: ``psi o theta_bar``."""
    return PolyResidue(a.ctx, theta_bar(a).coeffs)


def evaluate(f: PolyResidue, x) -> AlgebraElem:
    """Value of the representative ``sum f_m C(x, m)`` at a rational ``x``."""
    x = Q(x)
    acc = f.ctx.zero()
    b = Q(1)
    for m, c in enumerate(f.coeffs):
        acc = acc + c * b
        b = b * (x - m) / (m + 1)
    return acc


def falling_to_monomial(level: int) -> Matrix:
    """Column ``m`` holds the monomial coefficients of ``C(x, m)``."""
    cols = []
    for m in range(level):
        poly = [Q(1)]
        for i in range(m):
            # multiply by (x - i) / (i + 1)
            nxt = [Q(0)] * (len(poly) + 1)
            for k, c in enumerate(poly):
                nxt[k + 1] += c / (i + 1)
                nxt[k] -= c * i / (i + 1)
            poly = nxt
        cols.append(poly + [Q(0)] * (level - len(poly)))
    return Matrix.from_columns(cols)


def to_monomial(f: PolyResidue) -> list:
    """Monomial coefficients of the canonical representative (degree < level)."""
    return _apply_scalar_matrix(falling_to_monomial(f.level), f.ctx, f.coeffs)


def crt_kernel_check(level: int, extra: int = 2) -> bool:
    """Over Q, the polynomials of degree ``< level + extra`` vanishing at
    ``0..level-1`` are exactly the multiples of ``x(x-1)...(x-level+1)``.

    Computed as an exact nullspace of the evaluation map on monomial
    coefficients, compared with the span of ``x^j * prod (x - i)``.
    """
    deg = level + extra
    ev = Matrix([[Q(n) ** k for k in range(deg)] for n in range(level)])
    kernel = ev.nullspace()
    base = [Q(1)]
    for i in range(level):
        nxt = [Q(0)] * (len(base) + 1)
        for k, c in enumerate(base):
            nxt[k + 1] += c
            nxt[k] -= c * i
        base = nxt
    multiples = []
    for j in range(extra):
        v = [Q(0)] * deg
        for k, c in enumerate(base):
            v[k + j] = c
        multiples.append(v)
    if len(kernel) != extra:
        return False
    mult = Matrix.from_columns(multiples)
    both = Matrix.from_columns(list(kernel) + multiples)
    return mult.rank() == extra and both.rank() == extra
