"""Exact rational scalars and small dense/block linear algebra.

Everything here works over the rationals with no rounding.  Scalars are
GMP rationals (``gmpy2.mpq``), which compare and hash like
:class:`fractions.Fraction`.  Matrices are immutable dense grids of them;
:class:`BlockMap`
stores the block-monomial maps that show up as symmetric-group actions and
Dold-Kan structure maps without materialising them densely.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence

from gmpy2 import mpq

Scalar = type(mpq(0))
ZERO = mpq(0)
ONE = mpq(1)

_SCALAR_RE = re.compile(r"[+-]?\d+(/\d+)?")


def Q(x) -> Scalar:
    """Coerce ints, Fractions, mpqs or ``"p/q"`` strings to a scalar."""
    if type(x) is Scalar:
        return x
    if isinstance(x, str):
        return parse_scalar(x)
    if isinstance(x, float):
        raise TypeError("floats are not exact scalars")
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def parse_scalar(text: str) -> Scalar:
    text = text.strip()
    if not _SCALAR_RE.fullmatch(text):
        raise ValueError(f"malformed scalar {text!r}: expected p or p/q")
    try:
        return mpq(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed scalar {text!r}: {exc}") from None


def format_scalar(x) -> str:
    x = Q(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class Matrix:
    """Immutable dense matrix over Q."""

    __slots__ = ("rows", "nrows", "ncols", "_hash")

    def __init__(self, rows: Iterable[Iterable], ncols: int | None = None):
        rows = tuple(tuple(Q(x) for x in r) for r in rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged matrix rows")
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = ncols
        self._hash = None

    @classmethod
    def _raw(cls, rows: tuple, ncols: int) -> "Matrix":
        m = cls.__new__(cls)
        m.rows = rows
        m.nrows = len(rows)
        m.ncols = ncols
        m._hash = None
        return m

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "Matrix":
        return cls._raw(tuple((ZERO,) * ncols for _ in range(nrows)), ncols)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls._raw(
            tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)), n
        )

    @classmethod
    def diag(cls, entries: Sequence) -> "Matrix":
        n = len(entries)
        return cls._raw(
            tuple(tuple(Q(entries[i]) if i == j else ZERO for j in range(n)) for i in range(n)),
            n,
        )

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int | None = None) -> "Matrix":
        if not cols:
            return cls.zeros(nrows or 0, 0)
        return cls(zip(*cols), len(cols))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def column(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nrows, self.ncols, self.rows))
        return self._hash

    def __repr__(self):
        body = "; ".join(" ".join(format_scalar(x) for x in r) for r in self.rows)
        return f"Matrix({self.nrows}x{self.ncols}: [{body}])"

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        return Matrix._raw(
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)),
            self.ncols,
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} - {other.shape}")
        return Matrix._raw(
            tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)),
            self.ncols,
        )

    def __neg__(self) -> "Matrix":
        return Matrix._raw(tuple(tuple(-a for a in r) for r in self.rows), self.ncols)

    def scale(self, c) -> "Matrix":
        c = Q(c)
        return Matrix._raw(tuple(tuple(c * a for a in r) for r in self.rows), self.ncols)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        n = other.ncols
        brows = other.rows
        if n == 1 and self.nrows == 1 and self.ncols == 1:
            return Matrix._raw(((self.rows[0][0] * brows[0][0],),), 1)
        out = []
        for r in self.rows:
            acc = [ZERO] * n
            for k, a in enumerate(r):
                if a:
                    for j, b in enumerate(brows[k]):
                        if b:
                            acc[j] += a * b
            out.append(tuple(acc))
        return Matrix._raw(tuple(out), n)

    def apply(self, vec: Sequence) -> tuple:
        """Matrix times column vector."""
        if len(vec) != self.ncols:
            raise ValueError("vector length mismatch")
        return tuple(
            sum((a * v for a, v in zip(r, vec) if a and v), ZERO) for r in self.rows
        )

    def transpose(self) -> "Matrix":
        if not self.rows:
            return Matrix.zeros(self.ncols, 0)
        return Matrix._raw(tuple(zip(*self.rows)), self.nrows)

    T = property(transpose)

    def is_zero(self) -> bool:
        return all(not a for r in self.rows for a in r)

    def is_identity(self) -> bool:
        return self.nrows == self.ncols and self == Matrix.identity(self.nrows)

    def trace(self) -> Scalar:
        if self.nrows != self.ncols:
            raise ValueError("trace of non-square matrix")
        return sum((self.rows[i][i] for i in range(self.nrows)), ZERO)

    def kron(self, other: "Matrix") -> "Matrix":
        rows = []
        for r in self.rows:
            for s in other.rows:
                rows.append(tuple(a * b for a in r for b in s))
        return Matrix._raw(tuple(rows), self.ncols * other.ncols)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix._raw(tuple(tuple(self.rows[i][j] for j in cols) for i in rows), len(cols))

    def rref(self) -> tuple["Matrix", tuple[int, ...]]:
        """Reduced row echelon form and pivot columns."""
        a = [list(r) for r in self.rows]
        pivots = []
        row = 0
        for col in range(self.ncols):
            piv = next((i for i in range(row, self.nrows) if a[i][col]), None)
            if piv is None:
                continue
            a[row], a[piv] = a[piv], a[row]
            inv = 1 / a[row][col]
            a[row] = [x * inv for x in a[row]]
            for i in range(self.nrows):
                if i != row and a[i][col]:
                    f = a[i][col]
                    a[i] = [x - f * y for x, y in zip(a[i], a[row])]
            pivots.append(col)
            row += 1
            if row == self.nrows:
                break
        return Matrix(a, self.ncols), tuple(pivots)

    def rank(self) -> int:
        return len(self.rref()[1])

    def nullspace(self) -> list[tuple]:
        """Basis of the right kernel, one vector per free column."""
        r, pivots = self.rref()
        free = [j for j in range(self.ncols) if j not in pivots]
        basis = []
        for f in free:
            v = [ZERO] * self.ncols
            v[f] = ONE
            for i, p in enumerate(pivots):
                v[p] = -r.rows[i][f]
            basis.append(tuple(v))
        return basis

    def inverse(self) -> "Matrix":
        n = self.nrows
        if n != self.ncols:
            raise ValueError("inverse of non-square matrix")
        eye = Matrix.identity(n).rows
        aug = Matrix._raw(tuple(r + eye[i] for i, r in enumerate(self.rows)), 2 * n)
        r, pivots = aug.rref()
        if pivots[:n] != tuple(range(n)):
            raise ValueError("matrix is singular")
        return Matrix._raw(tuple(row[n:] for row in r.rows), n)

    def to_json(self) -> list:
        return [[format_scalar(x) for x in r] for r in self.rows]

    @classmethod
    def from_json(cls, data: list, ncols: int | None = None) -> "Matrix":
        return cls([[parse_scalar(str(x)) for x in r] for r in data], ncols)


def block_diag(blocks: Sequence[Matrix]) -> Matrix:
    n = sum(b.nrows for b in blocks)
    m = sum(b.ncols for b in blocks)
    rows = []
    off = 0
    for b in blocks:
        for r in b.rows:
            rows.append((ZERO,) * off + r + (ZERO,) * (m - off - b.ncols))
        off += b.ncols
    return Matrix._raw(tuple(rows), m) if rows else Matrix.zeros(n, m)


def split_idempotent(e: Matrix) -> tuple[Matrix, Matrix]:
    """Factor an idempotent ``e`` as ``incl @ proj`` with ``proj @ incl = 1``.

    Returns ``(proj, incl)`` of shapes ``r x n`` and ``n x r`` where ``r`` is
    the rank of ``e``.  ``incl`` spans the image of ``e`` by its pivot
    columns and ``proj`` holds the coordinates of every column in that basis.
    """
    if e.nrows != e.ncols:
        raise ValueError("idempotent must be square")
    if e @ e != e:
        raise ValueError("matrix is not idempotent")
    r, pivots = e.rref()
    incl = e.submatrix(range(e.nrows), pivots)
    proj = Matrix._raw(r.rows[: len(pivots)], e.ncols)
    return proj, incl


class BlockMap:
    """Column-monomial block matrix.

    Source and target spaces are direct sums with the given block sizes;
    each source block is sent into at most one target block.  Blocks of
    size zero and zero matrices are never stored.
    """

    __slots__ = ("src", "tgt", "blocks")

    def __init__(self, src: Sequence[int], tgt: Sequence[int], blocks: dict):
        self.src = tuple(src)
        self.tgt = tuple(tgt)
        clean = {}
        for j, (k, m) in blocks.items():
            if self.src[j] == 0 or self.tgt[k] == 0:
                continue
            if m.shape != (self.tgt[k], self.src[j]):
                raise ValueError(f"block ({j}->{k}) has shape {m.shape}")
            if not m.is_zero():
                clean[j] = (k, m)
        self.blocks = clean

    @classmethod
    def identity(cls, sizes: Sequence[int]) -> "BlockMap":
        return cls(sizes, sizes, {j: (j, Matrix.identity(s)) for j, s in enumerate(sizes)})

    @classmethod
    def zero(cls, src: Sequence[int], tgt: Sequence[int]) -> "BlockMap":
        return cls(src, tgt, {})

    @classmethod
    def from_matrix(cls, m: Matrix) -> "BlockMap":
        return cls((m.ncols,), (m.nrows,), {0: (0, m)})

    @classmethod
    def permutation(cls, images: Sequence[int]) -> "BlockMap":
        """Permutation matrix sending basis vector ``i`` to ``images[i]``."""
        one = Matrix.identity(1)
        n = len(images)
        return cls((1,) * n, (1,) * n, {i: (images[i], one) for i in range(n)})

    @property
    def shape(self) -> tuple[int, int]:
        return (sum(self.tgt), sum(self.src))

    def __eq__(self, other):
        if not isinstance(other, BlockMap):
            return NotImplemented
        return self.src == other.src and self.tgt == other.tgt and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.src, self.tgt, tuple(sorted(self.blocks.items()))))

    def __repr__(self):
        return f"BlockMap({self.shape[0]}x{self.shape[1]}, {len(self.blocks)} blocks)"

    def __matmul__(self, other: "BlockMap") -> "BlockMap":
        if other.tgt != self.src:
            raise ValueError("block partitions do not match for composition")
        out = {}
        for j, (k, b1) in other.blocks.items():
            hit = self.blocks.get(k)
            if hit is not None:
                out[j] = (hit[0], hit[1] @ b1)
        return BlockMap(other.src, self.tgt, out)

    def kron(self, other: "BlockMap") -> "BlockMap":
        nb = len(other.src)
        nt = len(other.tgt)
        src = [a * b for a in self.src for b in other.src]
        tgt = [a * b for a in self.tgt for b in other.tgt]
        out = {}
        for j1, (k1, m1) in self.blocks.items():
            for j2, (k2, m2) in other.blocks.items():
                out[j1 * nb + j2] = (k1 * nt + k2, m1.kron(m2))
        return BlockMap(src, tgt, out)

    def trace(self) -> Scalar:
        return sum((m.trace() for j, (k, m) in self.blocks.items() if j == k), ZERO)

    def is_identity(self) -> bool:
        return self == BlockMap.identity(self.src)

    def is_zero(self) -> bool:
        return not self.blocks

    def is_block_diagonal(self) -> bool:
        return self.src == self.tgt and all(j == k for j, (k, _) in self.blocks.items())

    def diagonal_block(self, j: int) -> Matrix:
        hit = self.blocks.get(j)
        if hit is None or hit[0] != j:
            return Matrix.zeros(self.tgt[j], self.src[j])
        return hit[1]

    def dense(self) -> Matrix:
        soff = [0]
        for s in self.src:
            soff.append(soff[-1] + s)
        toff = [0]
        for t in self.tgt:
            toff.append(toff[-1] + t)
        grid = [[ZERO] * soff[-1] for _ in range(toff[-1])]
        for j, (k, m) in self.blocks.items():
            for a in range(m.nrows):
                row = grid[toff[k] + a]
                for b in range(m.ncols):
                    row[soff[j] + b] = m.rows[a][b]
        return Matrix._raw(tuple(tuple(r) for r in grid), soff[-1])
