"""Finite coalgebras by structure constants, the rank-2 pointed coalgebras
``C(lam)`` and ``D``, their word quotients, convolution algebras and the
graded bialgebras with basis ``d_0, d_1, ...``."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from itertools import product as iproduct
from typing import Sequence

from .algebra import AlgebraCtx
from .combinat import binomial, trinomial_terms
from .exact import ONE, ZERO, Matrix, Q, Scalar, format_scalar


def _add(acc: dict, key, c) -> None:
    v = acc.get(key, ZERO) + c
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


class FinCoalgebra:
    """Coalgebra on the free module with basis ``labels``.

    ``comult[x]`` is a sequence of ``(i, j, c)`` meaning ``delta(x)``
    contains ``c * b_i (x) b_j``.  Coassociativity and both counit laws are
    checked on every basis element at construction.
    """

    def __init__(self, labels: Sequence[str], counit: Sequence, comult: Sequence, point: int | None = None, name: str = "C"):
        self.name = name
        self.labels = tuple(labels)
        self.dim = len(self.labels)
        self.counit = tuple(Q(x) for x in counit)
        if len(self.counit) != self.dim or len(comult) != self.dim:
            raise ValueError("counit and comultiplication must have one entry per basis element")
        table = []
        for x, terms in enumerate(comult):
            acc: dict = {}
            for i, j, c in terms:
                if not (0 <= i < self.dim and 0 <= j < self.dim):
                    raise ValueError(f"comultiplication of {self.labels[x]} uses an index out of range")
                _add(acc, (i, j), Q(c))
            table.append(acc)
        self.comult = tuple(table)
        self.point = point
        self.validate()

    def __repr__(self):
        return f"FinCoalgebra({self.name!r}, dim={self.dim})"

    def delta(self, x: int) -> dict:
        return dict(self.comult[x])

    def delta_vec(self, v: Sequence) -> dict:
        acc: dict = {}
        for x, c in enumerate(v):
            if c:
                for k, w in self.comult[x].items():
                    _add(acc, k, c * w)
        return acc

    def validate(self) -> None:
        for x in range(self.dim):
            left: dict = {}
            right: dict = {}
            for (i, j), c in self.comult[x].items():
                for (a, b), w in self.comult[i].items():
                    _add(left, (a, b, j), c * w)
                for (a, b), w in self.comult[j].items():
                    _add(right, (i, a, b), c * w)
            if left != right:
                raise ValueError(f"comultiplication is not coassociative at {self.labels[x]}")
            lc = [ZERO] * self.dim
            rc = [ZERO] * self.dim
            for (i, j), c in self.comult[x].items():
                lc[j] += self.counit[i] * c
                rc[i] += self.counit[j] * c
            unit = [ONE if k == x else ZERO for k in range(self.dim)]
            if lc != unit or rc != unit:
                raise ValueError(f"counit law fails at {self.labels[x]}")
        if self.point is not None:
            p = self.point
            if self.comult[p] != {(p, p): ONE} or self.counit[p] != ONE:
                raise ValueError(f"{self.labels[p]} is not grouplike")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "labels": list(self.labels),
            "counit": [format_scalar(x) for x in self.counit],
            "comult": [
                [[i, j, format_scalar(c)] for (i, j), c in sorted(d.items())] for d in self.comult
            ],
            "point": self.point,
        }

    @classmethod
    def from_json(cls, data: dict) -> "FinCoalgebra":
        return cls(data["labels"], data["counit"], data["comult"], data.get("point"), data.get("name", "C"))


@dataclass(frozen=True, eq=False)
class CoalgebraMorphism:
    source: FinCoalgebra
    target: FinCoalgebra
    matrix: Matrix

    def __post_init__(self):
        s, t, m = self.source, self.target, self.matrix
        if m.shape != (t.dim, s.dim):
            raise ValueError(f"matrix must be {t.dim}x{s.dim}")
        for x in range(s.dim):
            col = m.column(x)
            if sum(t.counit[k] * col[k] for k in range(t.dim)) != s.counit[x]:
                raise ValueError(f"counit not preserved at {s.labels[x]}")
            lhs = t.delta_vec(col)
            rhs: dict = {}
            for (i, j), c in s.comult[x].items():
                ci, cj = m.column(i), m.column(j)
                for a in range(t.dim):
                    if ci[a]:
                        for b in range(t.dim):
                            if cj[b]:
                                _add(rhs, (a, b), c * ci[a] * cj[b])
            if lhs != rhs:
                raise ValueError(f"comultiplication not preserved at {s.labels[x]}")

    def preserves_point(self) -> bool:
        if self.source.point is None or self.target.point is None:
            return False
        col = self.matrix.column(self.source.point)
        return all(c == (ONE if k == self.target.point else ZERO) for k, c in enumerate(col))


# -- the basic rank-2 coalgebras ------------------------------------------------


def make_C_lambda(lam) -> FinCoalgebra:
    """Basis ``e, d``: ``e`` grouplike, ``d`` with ``eps(d) = 0`` and
    ``delta(d) = d(x)e + e(x)d + lam d(x)d``."""
    lam = Q(lam)
    return FinCoalgebra(
        ["e", "d"],
        [1, 0],
        [[(0, 0, 1)], [(1, 0, 1), (0, 1, 1), (1, 1, lam)]],
        point=0,
        name=f"C({format_scalar(lam)})",
    )


def make_D() -> FinCoalgebra:
    """The set-like coalgebra on ``e, d``: both grouplike."""
    return FinCoalgebra(["e", "d"], [1, 1], [[(0, 0, 1)], [(1, 1, 1)]], point=0, name="D")


def make_xi(lam) -> CoalgebraMorphism:
    """``D -> C(lam)``, ``e -> e``, ``d -> lam d + e``."""
    lam = Q(lam)
    m = CoalgebraMorphism(make_D(), make_C_lambda(lam), Matrix([[1, 1], [0, lam]]))
    if not m.preserves_point():
        raise AssertionError("xi does not preserve the point")
    return m


def trivial_coalgebra() -> FinCoalgebra:
    return FinCoalgebra(["1"], [1], [[(0, 0, 1)]], point=0, name="k")


def coalgebra_tensor(c1: FinCoalgebra, c2: FinCoalgebra) -> FinCoalgebra:
    """Basis ``(x, y)`` at index ``x * dim2 + y``; comultiplication with the
    middle factors swapped."""
    n2 = c2.dim
    labels = [f"{a}|{b}" for a in c1.labels for b in c2.labels]
    counit = [a * b for a in c1.counit for b in c2.counit]
    comult = []
    for x in range(c1.dim):
        for y in range(n2):
            terms = []
            for (i1, j1), a in c1.comult[x].items():
                for (i2, j2), b in c2.comult[y].items():
                    terms.append((i1 * n2 + i2, j1 * n2 + j2, a * b))
            comult.append(terms)
    point = None
    if c1.point is not None and c2.point is not None:
        point = c1.point * n2 + c2.point
    return FinCoalgebra(labels, counit, comult, point, name=f"{c1.name}*{c2.name}")


def tensor_power_delta(E: FinCoalgebra, word: tuple) -> dict:
    """``delta`` of a word in ``E^(x)l``, as ``{(word1, word2): c}``."""
    acc = {((), ()): ONE}
    for letter in word:
        nxt: dict = {}
        for (w1, w2), c in acc.items():
            for (i, j), w in E.comult[letter].items():
                _add(nxt, (w1 + (i,), w2 + (j,)), c * w)
        acc = nxt
    return acc


class QuotientCoalgebra(FinCoalgebra):
    """Word quotient of ``E^(x)level`` identifying positions of the point.

    ``words[k]`` is the normal form of basis element ``k`` (every occurrence
    of the point moved to the front).
    """

    def __init__(self, E: FinCoalgebra, level: int, words, counit, comult, name):
        self.source = E
        self.level = level
        self.words = tuple(words)
        self.index = {w: k for k, w in enumerate(self.words)}
        labels = ["".join(E.labels[i] for i in w) or "1" for w in self.words]
        super().__init__(labels, counit, comult, point=self.index[(E.point,) * level], name=name)

    def normal_form(self, word: tuple) -> tuple:
        p = self.source.point
        k = sum(1 for x in word if x == p)
        return (p,) * k + tuple(x for x in word if x != p)

    def class_of(self, word: tuple) -> int:
        return self.index[self.normal_form(word)]


def free_quotient(E: FinCoalgebra, level: int) -> QuotientCoalgebra:
    """Quotient of the tensor power by ``W p W' ~ p W W'``.

    The induced counit and comultiplication are computed on every word of
    each class and required to agree, which certifies that the relations
    span a coideal.
    """
    if E.point is None:
        raise ValueError("free_quotient needs a pointed coalgebra")
    if level < 0:
        raise ValueError("level must be non-negative")
    p = E.point
    words = list(iproduct(range(E.dim), repeat=level))

    def nf(w):
        k = sum(1 for x in w if x == p)
        return (p,) * k + tuple(x for x in w if x != p)

    reps = sorted({nf(w) for w in words}, key=lambda w: (sum(1 for x in w if x != p), w))
    index = {w: k for k, w in enumerate(reps)}
    counit: list = [None] * len(reps)
    comult: list = [None] * len(reps)
    for w in words:
        k = index[nf(w)]
        eps = ONE
        for x in w:
            eps *= E.counit[x]
        dl: dict = {}
        for (w1, w2), c in tensor_power_delta(E, w).items():
            _add(dl, (index[nf(w1)], index[nf(w2)]), c)
        if counit[k] is None:
            counit[k], comult[k] = eps, dl
        elif counit[k] != eps or comult[k] != dl:
            raise ValueError(f"relations do not define a coideal: word {w} disagrees with its class")
    comult = [[(i, j, c) for (i, j), c in sorted(d.items())] for d in comult]
    return QuotientCoalgebra(E, level, reps, counit, comult, name=f"{E.name}_{level}")


def induced_quotient_morphism(f: CoalgebraMorphism, level: int) -> CoalgebraMorphism:
    """``f^(x)level`` descended to the word quotients; well-definedness is
    checked on every word."""
    qs = free_quotient(f.source, level)
    qt = free_quotient(f.target, level)
    cols: list = [None] * qs.dim
    for w in iproduct(range(f.source.dim), repeat=level):
        acc = {(): ONE}
        for x in w:
            col = f.matrix.column(x)
            nxt: dict = {}
            for pre, c in acc.items():
                for y, v in enumerate(col):
                    if v:
                        _add(nxt, pre + (y,), c * v)
            acc = nxt
        vec = [ZERO] * qt.dim
        for word, c in acc.items():
            vec[qt.class_of(word)] += c
        k = qs.class_of(w)
        if cols[k] is None:
            cols[k] = vec
        elif cols[k] != vec:
            raise ValueError(f"morphism does not descend: word {w} disagrees with its class")
    return CoalgebraMorphism(qs, qt, Matrix.from_columns(cols, qt.dim))


# -- closed formulas ------------------------------------------------------------


def delta_d(n: int, lam, bound: int | None = None) -> dict:
    """``delta(d_n) = sum_{r+s+t=n} n!/(r!s!t!) lam^t d_{r+t} (x) d_{s+t}``."""
    if n < 0 or (bound is not None and n > bound):
        raise ValueError(f"degree {n} outside 0..{bound}")
    lam = Q(lam)
    acc: dict = {}
    for r, s, t, c in trinomial_terms(n):
        _add(acc, (r + t, s + t), c * lam**t)
    return acc


def xi_ell(n: int, lam) -> list:
    """Coordinates of ``xi(d_n) = sum_m lam^m C(n, m) d_m`` in ``d_0..d_n``."""
    lam = Q(lam)
    return [binomial(n, m) * lam**m for m in range(n + 1)]


def C_lambda_ell(lam, level: int) -> FinCoalgebra:
    """``C(lam)_level`` from the closed formula, basis ``d_0..d_level``."""
    return FinCoalgebra(
        [f"d{s}" for s in range(level + 1)],
        [1] + [0] * level,
        [[(i, j, c) for (i, j), c in sorted(delta_d(n, lam).items())] for n in range(level + 1)],
        point=0,
        name=f"C({format_scalar(Q(lam))})_{level}",
    )


def D_ell(level: int) -> FinCoalgebra:
    return FinCoalgebra(
        [f"d{s}" for s in range(level + 1)],
        [1] * (level + 1),
        [[(n, n, 1)] for n in range(level + 1)],
        point=0,
        name=f"D_{level}",
    )


def xi_matrix(lam, level: int) -> Matrix:
    cols = [xi_ell(n, lam) + [ZERO] * (level - n) for n in range(level + 1)]
    return Matrix.from_columns(cols, level + 1)


# -- convolution ----------------------------------------------------------------


def convolution_algebra(C: FinCoalgebra, ctx: AlgebraCtx, check: bool = False) -> AlgebraCtx:
    """Linear maps ``C -> A`` under convolution ``f * g = mu (f (x) g) delta``.

    Basis element ``c * dim(A) + a`` is the map sending ``b_c`` to the
    ``a``-th basis vector of ``A`` and every other basis vector to 0.
    """
    da = ctx.dim
    n = C.dim * da
    table = [[{} for _ in range(n)] for _ in range(n)]
    for x in range(C.dim):
        for (i, j), c in C.comult[x].items():
            for a1 in range(da):
                for a2 in range(da):
                    entry = table[i * da + a1][j * da + a2]
                    for k, w in ctx.table[a1][a2]:
                        key = x * da + k
                        entry[key] = entry.get(key, ZERO) + c * w
    unit = [C.counit[x] * u for x in range(C.dim) for u in ctx.unit]
    labels = [f"{cl}->{al}" for cl in C.labels for al in ctx.labels]
    return AlgebraCtx(f"[{C.name},{ctx.name}]", labels, unit, table, check=check)


def convolve(C: FinCoalgebra, ctx: AlgebraCtx, f: Sequence, g: Sequence) -> list:
    """Direct convolution of maps given as lists of ``A``-coordinate tuples."""
    out = [[ZERO] * ctx.dim for _ in range(C.dim)]
    for x in range(C.dim):
        for (i, j), c in C.comult[x].items():
            prod = ctx.mul_coords(f[i], g[j])
            for k, v in enumerate(prod):
                out[x][k] += c * v
    return [tuple(r) for r in out]


def precompose_matrix(m: Matrix, dim_a: int) -> Matrix:
    """Matrix of ``f -> f o m`` on convolution coordinates, for ``m`` the
    matrix of a linear map between coalgebras."""
    return m.transpose().kron(Matrix.identity(dim_a))


# -- rank-2 classification --------------------------------------------------------


def transport(C: FinCoalgebra, basis: Matrix, labels=None, point=None) -> FinCoalgebra:
    """Re-express ``C`` in the basis whose ``k``-th vector has old coordinates
    ``basis.column(k)``."""
    inv = basis.inverse()
    n = C.dim
    cols = [basis.column(k) for k in range(n)]
    counit = [sum(C.counit[x] * v[x] for x in range(n)) for v in cols]
    comult = []
    for v in cols:
        old = C.delta_vec(v)
        new: dict = {}
        for (i, j), c in old.items():
            for a in range(n):
                ia = inv.rows[a][i]
                if ia:
                    for b in range(n):
                        jb = inv.rows[b][j]
                        if jb:
                            _add(new, (a, b), c * ia * jb)
        comult.append([(a, b, c) for (a, b), c in sorted(new.items())])
    return FinCoalgebra(labels or [f"b{k}" for k in range(n)], counit, comult, point, name=C.name + "'")


@dataclass(frozen=True)
class Rank2Normalization:
    lam: Scalar
    basis_change: Matrix


def normalize_rank2(C: FinCoalgebra) -> Rank2Normalization:
    """For a pointed rank-2 coalgebra, the ``lam`` with ``C ~ C(lam)``.

    ``basis_change`` has columns ``e, d`` in the coordinates of ``C`` with
    ``d = d' - eps(d') e``; the transported structure is checked to be
    exactly ``C(lam)``.
    """
    if C.dim != 2 or C.point is None:
        raise ValueError("normalize_rank2 needs a pointed coalgebra of rank 2")
    p = C.point
    q = 1 - p
    # FinCoalgebra construction already enforced coassociativity and counit laws
    eps = C.counit[q]
    cols = [[ZERO, ZERO], [ZERO, ZERO]]
    cols[0][p] = ONE
    cols[1][q] = ONE
    cols[1][p] = -eps
    basis = Matrix.from_columns(cols, 2)
    T = transport(C, basis, labels=["e", "d"], point=0)
    dd = T.comult[1]
    lam = dd.get((1, 1), ZERO)
    if dict(T.comult[1]) != dict(make_C_lambda(lam).comult[1]) or T.counit != (ONE, ZERO):
        raise ValueError("normalized structure is not of the form d(x)e + e(x)d + lam d(x)d")
    return Rank2Normalization(lam, basis)


# -- graded bialgebras ------------------------------------------------------------


class GradedBialgebra:
    """``C(lam)_inf`` (kind ``"C"``) or ``D_inf`` (kind ``"D"``) up to a
    working bound, with ``d_m d_n = d_{m+n}``.

    Per-degree comultiplications are memoized; the cache is filled under a
    lock so concurrent readers see each degree computed once.
    """

    def __init__(self, kind: str, lam=0, bound: int = 8, source: str = "formula"):
        if kind not in ("C", "D"):
            raise ValueError("kind must be 'C' or 'D'")
        if source not in ("formula", "quotient"):
            raise ValueError("source must be 'formula' or 'quotient'")
        self.kind = kind
        self.lam = Q(lam)
        self.bound = bound
        self.source = source
        self._cache: dict = {}
        self._lock = threading.Lock()

    def _compute(self, n: int) -> dict:
        if self.source == "formula":
            if self.kind == "C":
                return delta_d(n, self.lam)
            return {(n, n): ONE}
        E = make_C_lambda(self.lam) if self.kind == "C" else make_D()
        Q_ = free_quotient(E, n)
        top = Q_.index[(1,) * n]
        return {(len(Q_.words[i]) - Q_.words[i].count(0), len(Q_.words[j]) - Q_.words[j].count(0)): c
                for (i, j), c in Q_.comult[top].items()}

    def delta(self, n: int) -> dict:
        if not 0 <= n <= self.bound:
            raise ValueError(f"degree {n} beyond working bound {self.bound}")
        hit = self._cache.get(n)
        if hit is None:
            with self._lock:
                hit = self._cache.get(n)
                if hit is None:
                    hit = self._cache[n] = self._compute(n)
        return hit

    def counit(self, n: int) -> Scalar:
        if self.kind == "D":
            return ONE
        return ONE if n == 0 else ZERO

    def mul(self, m: int, n: int) -> int | None:
        """Index of ``d_m d_n``; ``None`` when beyond the bound."""
        return m + n if m + n <= self.bound else None

    def tensor_mul(self, x: dict, y: dict) -> dict:
        acc: dict = {}
        for (a, b), c in x.items():
            for (p, q), w in y.items():
                _add(acc, (a + p, b + q), c * w)
        return acc

    def check_compatibility(self) -> list:
        """Pairs ``(m, n)`` with ``m + n <= bound`` violating multiplicativity
        of the counit or comultiplication (empty when all hold)."""
        bad = []
        for m in range(self.bound + 1):
            for n in range(self.bound + 1 - m):
                if self.delta(m + n) != self.tensor_mul(self.delta(m), self.delta(n)):
                    bad.append((m, n))
                elif self.counit(m + n) != self.counit(m) * self.counit(n):
                    bad.append((m, n))
        return bad
