"""Truncated sequences over an algebra, the weighted Hurwitz product and the
transforms relating it to the pointwise product.

A :class:`TruncatedSeries` of level ``l`` is the image of an infinite
sequence under the quotient that forgets indices ``>= l``.  Every formula
here reads only indices ``<= n`` to produce index ``n``, so truncation
commutes with all products and transforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

from .algebra import AlgebraCtx, AlgebraElem
from .combinat import binomial, trinomial_terms
from .exact import ONE, ZERO, Matrix, Q, Scalar, format_scalar, parse_scalar


class TruncatedSeries:
    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: AlgebraCtx, coeffs: Sequence[AlgebraElem]):
        coeffs = tuple(coeffs)
        if not coeffs:
            raise ValueError("level must be positive")
        for c in coeffs:
            if c.ctx is not ctx:
                raise ValueError("coefficient lives in a different algebra")
        self.ctx = ctx
        self.coeffs = coeffs

    @classmethod
    def from_coords(cls, ctx: AlgebraCtx, rows: Sequence[Sequence]) -> "TruncatedSeries":
        return cls(ctx, [AlgebraElem(ctx, r) for r in rows])

    @classmethod
    def from_scalars(cls, ctx: AlgebraCtx, values: Sequence) -> "TruncatedSeries":
        """Series whose n-th coefficient is ``values[n]`` times the unit."""
        return cls(ctx, [ctx.scalar(v) for v in values])

    @classmethod
    def zero(cls, ctx: AlgebraCtx, level: int) -> "TruncatedSeries":
        return cls(ctx, [ctx.zero()] * level)

    @classmethod
    def unit(cls, ctx: AlgebraCtx, level: int) -> "TruncatedSeries":
        """Neutral element of the Hurwitz product, ``(1, 0, 0, ...)``."""
        return cls(ctx, [ctx.one()] + [ctx.zero()] * (level - 1))

    @classmethod
    def ones(cls, ctx: AlgebraCtx, level: int) -> "TruncatedSeries":
        """Neutral element of the pointwise product."""
        return cls(ctx, [ctx.one()] * level)

    @property
    def level(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, n: int) -> AlgebraElem:
        return self.coeffs[n]

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.ctx is other.ctx and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((id(self.ctx), self.coeffs))

    def __repr__(self):
        return f"TruncatedSeries({self.ctx.name}, {list(self.coeffs)})"

    def _check(self, other: "TruncatedSeries") -> None:
        if other.ctx is not self.ctx:
            raise ValueError(f"algebra mismatch: {self.ctx.name} vs {other.ctx.name}")
        if other.level != self.level:
            raise ValueError(f"level mismatch: {self.level} vs {other.level}")

    def __add__(self, other):
        self._check(other)
        return TruncatedSeries(self.ctx, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        self._check(other)
        return TruncatedSeries(self.ctx, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return TruncatedSeries(self.ctx, [-a for a in self.coeffs])

    def scale(self, c) -> "TruncatedSeries":
        c = Q(c)
        return TruncatedSeries(self.ctx, [a * c for a in self.coeffs])

    def restrict(self, level: int) -> "TruncatedSeries":
        """Drop coefficients of index ``>= level``."""
        if not 1 <= level <= self.level:
            raise ValueError(f"cannot restrict level {self.level} series to {level}")
        return TruncatedSeries(self.ctx, self.coeffs[:level])

    def map_coeffs(self, f: Callable[[AlgebraElem], AlgebraElem], ctx: AlgebraCtx | None = None):
        return TruncatedSeries(ctx or self.ctx, [f(a) for a in self.coeffs])

    def flatten(self) -> tuple:
        """Coordinates in the algebra ``series_ctx(ctx, level, ...)``."""
        return tuple(x for a in self.coeffs for x in a.coords)

    @classmethod
    def unflatten(cls, ctx: AlgebraCtx, level: int, coords: Sequence) -> "TruncatedSeries":
        d = ctx.dim
        return cls.from_coords(ctx, [coords[n * d : (n + 1) * d] for n in range(level)])

    def to_json(self) -> dict:
        return {
            "ctx": self.ctx.name,
            "level": self.level,
            "coeffs": [a.to_json() for a in self.coeffs],
        }

    @classmethod
    def from_json(cls, data: dict, ctx: AlgebraCtx) -> "TruncatedSeries":
        if data.get("ctx", ctx.name) != ctx.name:
            raise ValueError(f"series is over {data['ctx']!r}, expected {ctx.name!r}")
        coeffs = [[parse_scalar(str(x)) for x in row] for row in data["coeffs"]]
        if "level" in data and data["level"] != len(coeffs):
            raise ValueError("level does not match number of coefficients")
        return cls.from_coords(ctx, coeffs)


# -- products -----------------------------------------------------------------


@lru_cache(maxsize=None)
def _hurwitz_terms(level: int, lam: Scalar) -> tuple:
    """``(n, i, j, c)`` with ``c = multinomial(n; r, s, t) lam^t``, ``i = r+t``,
    ``j = s+t``, for every ``n < level``; terms with ``c = 0`` dropped."""
    out = []
    for n in range(level):
        for r, s, t, m in trinomial_terms(n):
            c = m * lam**t
            if c:
                out.append((n, r + t, s + t, c))
    return tuple(out)


def hurwitz_mul(a: TruncatedSeries, b: TruncatedSeries, lam) -> TruncatedSeries:
    """``(a . b)_n = sum_{r+s+t=n} n!/(r!s!t!) lam^t a_{r+t} b_{s+t}``."""
    a._check(b)
    lam = Q(lam)
    ctx = a.ctx
    d = ctx.dim
    prods = {}
    acc = [[0] * d for _ in range(a.level)]
    for n, i, j, c in _hurwitz_terms(a.level, lam):
        p = prods.get((i, j))
        if p is None:
            p = prods[(i, j)] = ctx.mul_coords(a.coeffs[i].coords, b.coeffs[j].coords)
        row = acc[n]
        for k, x in enumerate(p):
            if x:
                row[k] += c * x
    return TruncatedSeries.from_coords(ctx, acc)


def pointwise_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    a._check(b)
    return TruncatedSeries(a.ctx, [x * y for x, y in zip(a.coeffs, b.coeffs)])


def series_ctx(ctx: AlgebraCtx, level: int, lam=None, check: bool = False) -> AlgebraCtx:
    """The algebra ``(A^level, .^lam)`` (or pointwise when ``lam is None``)
    as a structure-constant algebra of dimension ``level * dim``.

    Coordinates are ordered index-major, matching :meth:`TruncatedSeries.flatten`.
    """
    lam = None if lam is None else Q(lam)
    key = (id(ctx), level, lam)
    hit = _SERIES_CTX.get(key)
    if hit is not None and (not check or hit[1]):
        return hit[0]
    d = ctx.dim
    table = [[{} for _ in range(level * d)] for _ in range(level * d)]
    for n1 in range(level):
        for n2 in range(level):
            if lam is None:
                contrib = [(n1, 1)] if n1 == n2 else []
            else:
                contrib = []
                for t in range(min(n1, n2) + 1):
                    m = n1 + n2 - t
                    if m < level:
                        c = Q(binomial(m, t) * binomial(m - t, n1 - t)) * lam**t
                        if c:
                            contrib.append((m, c))
            for i1 in range(d):
                for i2 in range(d):
                    entry = {}
                    for k, c in ctx.table[i1][i2]:
                        for m, w in contrib:
                            entry[m * d + k] = entry.get(m * d + k, 0) + w * c
                    table[n1 * d + i1][n2 * d + i2] = entry
    unit = [ONE if lam is None or n == 0 else ZERO for n in range(level) for _ in range(d)]
    unit = [unit[n * d + i] * ctx.unit[i] for n in range(level) for i in range(d)]
    labels = [f"{lab}@{n}" for n in range(level) for lab in ctx.labels]
    kind = "pw" if lam is None else f"hz[{format_scalar(lam)}]"
    out = AlgebraCtx(f"{ctx.name}^{level}:{kind}", labels, unit, table, check=check)
    _SERIES_CTX[key] = (out, check, ctx)
    return out


_SERIES_CTX: dict = {}


def as_element(a: TruncatedSeries, lam=None) -> AlgebraElem:
    """View ``a`` as an element of :func:`series_ctx`."""
    return AlgebraElem(series_ctx(a.ctx, a.level, lam), a.flatten())


# -- transforms -----------------------------------------------------------------


def lambda_hat(a: TruncatedSeries, lam) -> TruncatedSeries:
    """``n``-th coefficient scaled by ``lam^n``."""
    lam = Q(lam)
    return TruncatedSeries(a.ctx, [x * lam**n for n, x in enumerate(a.coeffs)])


def _binomial_transform(a: TruncatedSeries, weight: Callable[[int, int], Scalar]) -> TruncatedSeries:
    ctx = a.ctx
    out = []
    for n in range(a.level):
        acc = [0] * ctx.dim
        for m in range(n + 1):
            w = weight(n, m)
            if w:
                for k, x in enumerate(a.coeffs[m].coords):
                    if x:
                        acc[k] += w * x
        out.append(acc)
    return TruncatedSeries.from_coords(ctx, out)


def theta(a: TruncatedSeries) -> TruncatedSeries:
    """``theta(a)_n = sum_m C(n, m) a_m``."""
    return _binomial_transform(a, lambda n, m: binomial(n, m))


def theta_bar(a: TruncatedSeries) -> TruncatedSeries:
    """Inverse of :func:`theta`: ``sum_n C(m, n) (-1)^(m-n) a_n``."""
    return _binomial_transform(a, lambda m, n: binomial(m, n) * (-1) ** (m - n))


def gamma(a: TruncatedSeries, lam) -> TruncatedSeries:
    """``gamma(a)_n = sum_m C(n, m) lam^m a_m``: Hurwitz to pointwise."""
    lam = Q(lam)
    return _binomial_transform(a, lambda n, m: binomial(n, m) * lam**m)


def gamma_inverse(a: TruncatedSeries, lam) -> TruncatedSeries:
    lam = Q(lam)
    if not lam:
        raise ZeroDivisionError("gamma is not invertible at weight 0")
    return lambda_hat(theta_bar(a), 1 / lam)


# -- derivations and Rota-Baxter operators ---------------------------------------


def shift_derivation(a: TruncatedSeries) -> TruncatedSeries:
    """``(da)_n = a_{n+1}``; the last coefficient becomes 0."""
    return TruncatedSeries(a.ctx, list(a.coeffs[1:]) + [a.ctx.zero()])


def difference(a: TruncatedSeries) -> TruncatedSeries:
    """``(da)_n = a_{n+1} - a_n`` with ``a_l = 0``."""
    nxt = list(a.coeffs[1:]) + [a.ctx.zero()]
    return TruncatedSeries(a.ctx, [y - x for x, y in zip(a.coeffs, nxt)])


def _basis_pairs(ctx: AlgebraCtx):
    basis = [ctx.basis(i) for i in range(ctx.dim)]
    for x in basis:
        for y in basis:
            yield x, y


def _operator_matrix(ctx: AlgebraCtx, m) -> Matrix:
    m = m if isinstance(m, Matrix) else Matrix(m)
    if m.shape != (ctx.dim, ctx.dim):
        raise ValueError(f"operator must be {ctx.dim}x{ctx.dim}, got {m.shape}")
    return m


@dataclass(frozen=True, eq=False)
class WeightedDerivation:
    """Linear ``D`` with ``D(1) = 0`` and ``D(xy) = D(x)y + xD(y) + lam D(x)D(y)``."""

    ctx: AlgebraCtx
    weight: Scalar
    map: Matrix

    def __post_init__(self):
        object.__setattr__(self, "weight", Q(self.weight))
        object.__setattr__(self, "map", _operator_matrix(self.ctx, self.map))
        if not self(self.ctx.one()).is_zero():
            raise ValueError("derivation does not kill the unit")
        for x, y in _basis_pairs(self.ctx):
            dx, dy = self(x), self(y)
            if self(x * y) != dx * y + x * dy + dx * dy * self.weight:
                raise ValueError(f"weighted Leibniz rule fails on ({x}, {y})")

    def __call__(self, x: AlgebraElem) -> AlgebraElem:
        return x.apply(self.map)


@dataclass(frozen=True, eq=False)
class RotaBaxterOp:
    """Linear ``P`` with ``P(x)P(y) = P(P(x)y + xP(y) + lam xy)``."""

    ctx: AlgebraCtx
    weight: Scalar
    map: Matrix

    def __post_init__(self):
        object.__setattr__(self, "weight", Q(self.weight))
        object.__setattr__(self, "map", _operator_matrix(self.ctx, self.map))
        for x, y in _basis_pairs(self.ctx):
            if not rota_baxter_holds(self, self.weight, x, y, lambda u, v: u * v):
                raise ValueError(f"Rota-Baxter identity fails on ({x}, {y})")

    def __call__(self, x: AlgebraElem) -> AlgebraElem:
        return x.apply(self.map)


def rota_baxter_holds(P: Callable, lam, x, y, mul: Callable) -> bool:
    """Evaluate both sides of the weight-``lam`` Rota-Baxter identity."""
    px, py = P(x), P(y)
    xy = mul(x, y)
    xy = xy.scale(lam) if isinstance(xy, TruncatedSeries) else xy * Q(lam)
    return mul(px, py) == P(mul(px, y) + mul(x, py) + xy)


def rb_bar(P: RotaBaxterOp, a: TruncatedSeries) -> TruncatedSeries:
    """``(P(a_0), a_0, a_1, ..., a_{l-2})``: Rota-Baxter for the Hurwitz product."""
    if P.ctx is not a.ctx:
        raise ValueError("operator and series live in different algebras")
    return TruncatedSeries(a.ctx, [P(a.coeffs[0])] + list(a.coeffs[:-1]))


def rb_tilde(P: RotaBaxterOp, a: TruncatedSeries) -> TruncatedSeries:
    """``P(a_0) + lam * sum_{i<n} a_i``: Rota-Baxter for the pointwise product."""
    if P.ctx is not a.ctx:
        raise ValueError("operator and series live in different algebras")
    head = P(a.coeffs[0])
    out = []
    run = a.ctx.zero()
    for n in range(a.level):
        out.append(head + run * P.weight)
        run = run + a.coeffs[n]
    return TruncatedSeries(a.ctx, out)


# -- cofree lifts and comonad structure -------------------------------------------


def is_algebra_map(f: Matrix, source: AlgebraCtx, target: AlgebraCtx) -> bool:
    if f.shape != (target.dim, source.dim):
        return False
    if f.apply(source.unit) != target.unit:
        return False
    fb = [f.apply(source.basis(i).coords) for i in range(source.dim)]
    for i in range(source.dim):
        for j in range(source.dim):
            prod = source.mul_coords(source.basis(i).coords, source.basis(j).coords)
            if f.apply(prod) != target.mul_coords(fb[i], fb[j]):
                return False
    return True


@dataclass(frozen=True, eq=False)
class SeriesLift:
    """A linear map ``B -> A^level`` given by one matrix per coefficient."""

    source: AlgebraCtx
    target: AlgebraCtx
    blocks: tuple

    @property
    def level(self) -> int:
        return len(self.blocks)

    def __call__(self, b: AlgebraElem) -> TruncatedSeries:
        if b.ctx is not self.source:
            raise ValueError("element is not in the source algebra")
        return TruncatedSeries(self.target, [AlgebraElem(self.target, m.apply(b.coords)) for m in self.blocks])


def _iterate_lift(f: Matrix, op: Matrix, source: AlgebraCtx, target: AlgebraCtx, level: int) -> SeriesLift:
    blocks = []
    power = Matrix.identity(source.dim)
    for _ in range(level):
        blocks.append(f @ power)
        power = op @ power
    return SeriesLift(source, target, tuple(blocks))


def cofree_lift_dif(f: Matrix, der: WeightedDerivation, level: int, target: AlgebraCtx) -> SeriesLift:
    """``b -> (f(b), f(Db), f(D^2 b), ...)``, the map into the cofree
    differential algebra ``(A^level, .^lam, shift)`` induced by ``f``."""
    if not is_algebra_map(f, der.ctx, target):
        raise ValueError("f is not a unital algebra map")
    return _iterate_lift(f, der.map, der.ctx, target, level)


def cofree_lift_endo(f: Matrix, phi: Matrix, level: int, source: AlgebraCtx, target: AlgebraCtx) -> SeriesLift:
    """``b -> (f(b), f(phi b), f(phi^2 b), ...)`` into ``(A^level, pointwise)``."""
    if not is_algebra_map(phi, source, source):
        raise ValueError("phi is not a unital algebra endomorphism")
    if not is_algebra_map(f, source, target):
        raise ValueError("f is not a unital algebra map")
    return _iterate_lift(f, phi, source, target, level)


def comonad_counit(a: TruncatedSeries) -> AlgebraElem:
    return a.coeffs[0]


def comonad_comult(a: TruncatedSeries, lam, outer: int, inner: int | None = None) -> TruncatedSeries:
    """``(a_{m+n})_{m<outer, n<inner}`` as a series of series.

    The result lives over ``series_ctx(a.ctx, inner, lam)`` (``lam=None`` for
    the pointwise comonad).  Entries must be defined, so
    ``outer + inner - 1 <= a.level``.
    """
    inner = outer if inner is None else inner
    if outer < 1 or inner < 1 or outer + inner - 1 > a.level:
        raise ValueError(
            f"comultiplication into level ({outer}, {inner}) needs level >= {outer + inner - 1}, got {a.level}"
        )
    ictx = series_ctx(a.ctx, inner, lam)
    coeffs = [
        AlgebraElem(ictx, [x for n in range(inner) for x in a.coeffs[m + n].coords]) for m in range(outer)
    ]
    return TruncatedSeries(ictx, coeffs)


# -- random inputs -------------------------------------------------------------


def random_scalar(rng, spread: int = 5) -> Scalar:
    num = rng.randint(-spread, spread)
    den = rng.choice((1, 1, 1, 2, 3))
    return Q(num) / den


def random_elem(ctx: AlgebraCtx, rng, spread: int = 5) -> AlgebraElem:
    return AlgebraElem(ctx, [random_scalar(rng, spread) for _ in range(ctx.dim)])


def random_series(ctx: AlgebraCtx, level: int, rng, spread: int = 5) -> TruncatedSeries:
    return TruncatedSeries(ctx, [random_elem(ctx, rng, spread) for _ in range(level)])


def random_automorphism(ctx: AlgebraCtx, rng) -> Matrix:
    """A random unital algebra automorphism of ``rat``, ``mat2``, ``poly3``
    or ``c2`` as a matrix on coordinates."""
    name = ctx.name
    if name == "rat":
        return Matrix.identity(1)
    if name == "mat2":
        while True:
            g = Matrix([[rng.randint(-3, 3) for _ in range(2)] for _ in range(2)])
            if g.rank() == 2:
                break
        gi = g.inverse()
        cols = []
        for k in range(2):
            for l in range(2):
                e = Matrix([[1 if (i, j) == (k, l) else 0 for j in range(2)] for i in range(2)])
                img = g @ e @ gi
                cols.append([img.rows[i][j] for i in range(2) for j in range(2)])
        return Matrix.from_columns(cols, 4)
    if name == "poly3":
        c = Q(rng.choice((1, -1, 2, -2, 3))) / rng.choice((1, 2))
        d = random_scalar(rng, 3)
        return Matrix.from_columns([[1, 0, 0], [0, c, d], [0, 0, c * c]], 3)
    if name == "c2":
        return Matrix.from_columns([[1, 0], [0, rng.choice((1, -1))]], 2)
    raise ValueError(f"no automorphism generator for {name!r}")


def _conjugate(m: Matrix, phi: Matrix) -> Matrix:
    return phi @ m @ phi.inverse()


def random_rota_baxter(ctx: AlgebraCtx, lam, rng) -> RotaBaxterOp:
    """A random weight-``lam`` Rota-Baxter operator, validated on construction.

    For ``lam != 0``: ``-lam`` times the projection onto a subalgebra along a
    complementary subalgebra (or the complementary projection).  For
    ``lam = 0``: ``x -> phi(x) u`` with ``u^2 = 0`` and ``phi`` vanishing on
    ``uA + Au``.  Both are conjugated by a random automorphism.
    """
    lam = Q(lam)
    name = ctx.name
    if name == "rat":
        return RotaBaxterOp(ctx, lam, Matrix([[rng.choice((0, -lam))]]))
    if lam:
        if name == "mat2":
            # upper triangular + span(E21), or lower triangular + span(E12)
            keep = rng.choice(((1, 1, 0, 1), (1, 0, 1, 1)))
        elif name == "poly3":
            keep = (1, 0, 0)
        else:
            raise ValueError(f"no Rota-Baxter generator for {name!r}")
        if rng.random() < 0.5:
            keep = tuple(1 - k for k in keep)
        P = Matrix.diag([-lam * k for k in keep])
    else:
        c = random_scalar(rng, 3) or ONE
        if name == "mat2":
            # u = E12, phi = c * (E21 coordinate)
            P = Matrix([[0, 0, 0, 0], [0, 0, c, 0], [0, 0, 0, 0], [0, 0, 0, 0]])
        elif name == "poly3":
            # u = y^2, phi arbitrary on 1 and y
            P = Matrix([[0, 0, 0], [0, 0, 0], [c, random_scalar(rng, 3), 0]])
        else:
            raise ValueError(f"no Rota-Baxter generator for {name!r}")
    return RotaBaxterOp(ctx, lam, _conjugate(P, random_automorphism(ctx, rng)))


def random_derivation(ctx: AlgebraCtx, lam, rng) -> WeightedDerivation:
    """A random weight-``lam`` derivation, validated on construction.

    ``(phi - 1) / lam`` for a random automorphism ``phi`` when ``lam != 0``;
    otherwise an inner derivation (``mat2``), ``p(y) d/dy`` with
    ``p in span(y, y^2)`` (``poly3``) or zero.
    """
    lam = Q(lam)
    n = ctx.dim
    if lam:
        phi = random_automorphism(ctx, rng)
        return WeightedDerivation(ctx, lam, (phi - Matrix.identity(n)).scale(1 / lam))
    if ctx.name == "mat2":
        u = random_elem(ctx, rng, 3)
        cols = []
        for k in range(n):
            x = ctx.basis(k)
            cols.append((u * x - x * u).coords)
        return WeightedDerivation(ctx, lam, Matrix.from_columns(cols, n))
    if ctx.name == "poly3":
        a, b = random_scalar(rng, 3), random_scalar(rng, 3)
        return WeightedDerivation(ctx, lam, Matrix.from_columns([[0, 0, 0], [0, a, b], [0, 0, 2 * a]], 3))
    return WeightedDerivation(ctx, lam, Matrix.zeros(n, n))
