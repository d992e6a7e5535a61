"""Finite-dimensional associative unital algebras over Q, presented by
structure constants, plus the binomial-coefficient machinery on them."""

from __future__ import annotations

from math import factorial
from typing import Mapping, Sequence

from .combinat import multinomial
from .exact import ONE, ZERO, Matrix, Q, format_scalar


class AlgebraCtx:
    """An algebra with basis ``labels``; ``table[i][j]`` is the sparse
    coordinate vector of ``basis_i * basis_j`` as ``((k, c), ...)``.

    Construction validates the unit and associativity on every basis
    triple (pass ``check=False`` only for algebras built by a construction
    that is itself tested).
    """

    def __init__(
        self,
        name: str,
        labels: Sequence[str],
        unit: Sequence,
        table,
        commutative: bool | None = None,
        check: bool = True,
    ):
        self.name = name
        self.labels = tuple(labels)
        self.dim = len(self.labels)
        if self.dim == 0:
            raise ValueError("algebra must have positive dimension")
        self.unit = tuple(Q(x) for x in unit)
        if len(self.unit) != self.dim:
            raise ValueError("unit has wrong length")
        self.table = tuple(tuple(_sparse(entry, self.dim) for entry in row) for row in table)
        if len(self.table) != self.dim or any(len(r) != self.dim for r in self.table):
            raise ValueError("structure constants must be dim x dim")
        actual = all(
            self.table[i][j] == self.table[j][i] for i in range(self.dim) for j in range(i)
        )
        if commutative is not None and commutative != actual:
            raise ValueError(f"commutative={commutative} contradicts the structure constants")
        self.commutative = actual
        if check:
            self.validate()

    def __repr__(self):
        return f"AlgebraCtx({self.name!r}, dim={self.dim})"

    def basis(self, i: int) -> "AlgebraElem":
        v = [ZERO] * self.dim
        v[i] = ONE
        return AlgebraElem(self, v)

    def one(self) -> "AlgebraElem":
        return AlgebraElem(self, self.unit)

    def zero(self) -> "AlgebraElem":
        return AlgebraElem(self, (ZERO,) * self.dim)

    def scalar(self, c) -> "AlgebraElem":
        return self.one() * Q(c)

    def elem(self, coords: Sequence) -> "AlgebraElem":
        return AlgebraElem(self, coords)

    def mul_coords(self, a: Sequence, b: Sequence) -> tuple:
        out = [ZERO] * self.dim
        table = self.table
        for i, x in enumerate(a):
            if x:
                row = table[i]
                for j, y in enumerate(b):
                    if y:
                        xy = x * y
                        for k, c in row[j]:
                            out[k] += xy * c
        return tuple(out)

    def validate(self) -> None:
        one = self.unit
        for i in range(self.dim):
            e = self.basis(i).coords
            if self.mul_coords(one, e) != e or self.mul_coords(e, one) != e:
                raise ValueError(f"unit is not neutral on basis element {self.labels[i]}")
        basis = [self.basis(i).coords for i in range(self.dim)]
        for i in range(self.dim):
            for j in range(self.dim):
                ij = self.mul_coords(basis[i], basis[j])
                for k in range(self.dim):
                    jk = self.mul_coords(basis[j], basis[k])
                    if self.mul_coords(ij, basis[k]) != self.mul_coords(basis[i], jk):
                        raise ValueError(
                            "structure constants are not associative on "
                            f"({self.labels[i]}, {self.labels[j]}, {self.labels[k]})"
                        )

    def left_mul_matrix(self, a: "AlgebraElem") -> Matrix:
        return Matrix.from_columns([self.mul_coords(a.coords, self.basis(j).coords) for j in range(self.dim)])

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "labels": list(self.labels),
            "unit": [format_scalar(x) for x in self.unit],
            "mul": [[[[k, format_scalar(c)] for k, c in e] for e in row] for row in self.table],
        }


def _sparse(entry, dim: int) -> tuple:
    if isinstance(entry, Mapping):
        items = entry.items()
    elif entry and isinstance(entry[0], tuple):
        items = entry
    else:
        if len(entry) != dim:
            raise ValueError("dense structure-constant vector has wrong length")
        items = enumerate(entry)
    return tuple(sorted((int(k), Q(c)) for k, c in items if Q(c)))


class AlgebraElem:
    __slots__ = ("ctx", "coords")

    def __init__(self, ctx: AlgebraCtx, coords: Sequence):
        coords = tuple(Q(x) for x in coords)
        if len(coords) != ctx.dim:
            raise ValueError(f"expected {ctx.dim} coordinates, got {len(coords)}")
        self.ctx = ctx
        self.coords = coords

    def _same(self, other: "AlgebraElem") -> None:
        if other.ctx is not self.ctx:
            raise ValueError(f"algebra mismatch: {self.ctx.name} vs {other.ctx.name}")

    def __add__(self, other):
        self._same(other)
        return AlgebraElem(self.ctx, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        self._same(other)
        return AlgebraElem(self.ctx, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return AlgebraElem(self.ctx, tuple(-a for a in self.coords))

    def __mul__(self, other):
        if isinstance(other, AlgebraElem):
            self._same(other)
            return AlgebraElem(self.ctx, self.ctx.mul_coords(self.coords, other.coords))
        c = Q(other)
        return AlgebraElem(self.ctx, tuple(c * a for a in self.coords))

    def __rmul__(self, other):
        c = Q(other)
        return AlgebraElem(self.ctx, tuple(c * a for a in self.coords))

    def __eq__(self, other):
        if not isinstance(other, AlgebraElem):
            return NotImplemented
        return self.ctx is other.ctx and self.coords == other.coords

    def __hash__(self):
        return hash((id(self.ctx), self.coords))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __repr__(self):
        terms = [
            f"{format_scalar(c)}*{lab}" for c, lab in zip(self.coords, self.ctx.labels) if c
        ]
        return " + ".join(terms) if terms else "0"

    def apply(self, m: Matrix) -> "AlgebraElem":
        """Image under a linear operator given as a matrix on coordinates."""
        return AlgebraElem(self.ctx, m.apply(self.coords))

    def to_json(self) -> list:
        return [format_scalar(x) for x in self.coords]


# -- standard contexts -------------------------------------------------------

_CACHE: dict = {}


def rational() -> AlgebraCtx:
    """Q itself."""
    if "rat" not in _CACHE:
        _CACHE["rat"] = AlgebraCtx("rat", ["1"], [1], [[{0: 1}]])
    return _CACHE["rat"]


def mat2() -> AlgebraCtx:
    """2x2 matrices over Q, basis E11, E12, E21, E22 (index 2*i + j)."""
    if "mat2" not in _CACHE:
        labels = ["E11", "E12", "E21", "E22"]
        table = [[{} for _ in range(4)] for _ in range(4)]
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    for l in range(2):
                        if j == k:
                            table[2 * i + j][2 * k + l] = {2 * i + l: 1}
        _CACHE["mat2"] = AlgebraCtx("mat2", labels, [1, 0, 0, 1], table)
    return _CACHE["mat2"]


def truncated_poly(m: int = 3, var: str = "y") -> AlgebraCtx:
    """``Q[y]/(y^m)`` with monomial basis ``1, y, ..., y^(m-1)``."""
    key = ("poly", m, var)
    if key not in _CACHE:
        labels = ["1"] + [var if i == 1 else f"{var}^{i}" for i in range(1, m)]
        table = [[({i + j: 1} if i + j < m else {}) for j in range(m)] for i in range(m)]
        unit = [1] + [0] * (m - 1)
        _CACHE[key] = AlgebraCtx(f"poly{m}", labels, unit, table)
    return _CACHE[key]


def involution_algebra() -> AlgebraCtx:
    """``Q[u]/(u^2 - 1)``, isomorphic to Q x Q, basis ``1, u``."""
    if "c2" not in _CACHE:
        table = [[{0: 1}, {1: 1}], [{1: 1}, {0: 1}]]
        _CACHE["c2"] = AlgebraCtx("c2", ["1", "u"], [1, 0], table)
    return _CACHE["c2"]


CONTEXTS = {"rat": rational, "mat2": mat2, "poly3": lambda: truncated_poly(3)}


def get_ctx(name: str) -> AlgebraCtx:
    try:
        return CONTEXTS[name]()
    except KeyError:
        raise ValueError(f"unknown algebra context {name!r}; choose from {sorted(CONTEXTS)}") from None


# -- binomial coefficients of algebra elements --------------------------------


def binom_elem(x: AlgebraElem, r: int) -> AlgebraElem:
    """``x (x - 1) ... (x - r + 1) / r!``; defined only for commutative algebras."""
    if r < 0:
        raise ValueError("r must be non-negative")
    ctx = x.ctx
    if not ctx.commutative:
        raise ValueError(f"binom_elem needs a commutative algebra, {ctx.name} is not")
    one = ctx.one()
    acc = one
    for i in range(r):
        acc = acc * (x - one * i)
    return acc * (Q(1) / factorial(r))


def check_combident(p: int, q: int, probe: AlgebraElem) -> bool:
    """Test ``C(x,p) C(x,q) = sum_t (p+q-t)!/((p-t)!(q-t)!t!) C(x, p+q-t)``."""
    if p < 0 or q < 0:
        raise ValueError("p, q must be non-negative")
    lhs = binom_elem(probe, p) * binom_elem(probe, q)
    rhs = probe.ctx.zero()
    for t in range(min(p, q) + 1):
        rhs = rhs + binom_elem(probe, p + q - t) * multinomial(p + q - t, (p - t, q - t, t))
    return lhs == rhs
