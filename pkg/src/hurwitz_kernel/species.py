"""Skeletal linear species: a module per cardinality with an action of the
symmetric group given on adjacent transpositions.  Actions are stored as
:class:`BlockMap` so that large tensor products stay block-sparse."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product as iproduct
from typing import Sequence

from .coalgebra import FinCoalgebra
from .combinat import (
    compose_perm,
    is_permutation,
    reduced_word,
    restrict_perm,
    subsets,
    trinomial_terms,
)
from .exact import ONE, BlockMap, Matrix, Q, Scalar, block_diag, format_scalar


def adjacent(n: int, i: int) -> tuple:
    """The transposition of ``i`` and ``i + 1`` in ``S_n``."""
    p = list(range(n))
    p[i], p[i + 1] = p[i + 1], p[i]
    return tuple(p)


def cycle_count(p: Sequence[int]) -> int:
    seen = [False] * len(p)
    count = 0
    for i in range(len(p)):
        if not seen[i]:
            count += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = p[j]
    return count


class LinearSpecies:
    """``ranks[n]`` for ``n <= bound``; ``gens[n][i]`` is the action of the
    ``i``-th adjacent transposition on the ``n``-th module."""

    def __init__(self, bound: int, ranks: Sequence[int], gens: Sequence[Sequence], check: bool = True, name: str = "M"):
        if len(ranks) != bound + 1 or len(gens) != bound + 1:
            raise ValueError("need one rank and one generator list per cardinality 0..bound")
        self.name = name
        self.bound = bound
        self.ranks = tuple(int(r) for r in ranks)
        cleaned = []
        for n, gs in enumerate(gens):
            if len(gs) != max(n - 1, 0):
                raise ValueError(f"cardinality {n} needs {max(n - 1, 0)} generators, got {len(gs)}")
            row = []
            for g in gs:
                if isinstance(g, Matrix):
                    g = BlockMap.from_matrix(g) if self.ranks[n] else BlockMap.zero((0,), (0,))
                if g.shape != (self.ranks[n], self.ranks[n]):
                    raise ValueError(f"generator at cardinality {n} has shape {g.shape}")
                row.append(g)
            cleaned.append(tuple(row))
        self.gens = tuple(cleaned)
        self._act: dict = {}
        if check:
            self.check_coxeter()

    def __repr__(self):
        return f"LinearSpecies({self.name!r}, ranks={list(self.ranks)})"

    def parts(self, n: int) -> tuple:
        if n < 2:
            return (self.ranks[n],)
        return self.gens[n][0].src

    def check_coxeter(self) -> None:
        for n in range(2, self.bound + 1):
            gs = self.gens[n]
            ident = BlockMap.identity(self.parts(n))
            for i, s in enumerate(gs):
                if s.src != ident.src or s.tgt != ident.src:
                    raise ValueError(f"generators at cardinality {n} use different block partitions")
                if s @ s != ident:
                    raise ValueError(f"s_{i} does not square to 1 at cardinality {n}")
                if i + 1 < len(gs):
                    t = gs[i + 1]
                    if s @ t @ s != t @ s @ t:
                        raise ValueError(f"braid relation fails for s_{i}, s_{i + 1} at cardinality {n}")
                for j in range(i + 2, len(gs)):
                    if s @ gs[j] != gs[j] @ s:
                        raise ValueError(f"s_{i} and s_{j} do not commute at cardinality {n}")

    def identity(self, n: int) -> BlockMap:
        return BlockMap.identity(self.parts(n))

    def act(self, n: int, sigma: Sequence[int]) -> BlockMap:
        """Action of ``sigma`` (``sigma[x]`` is the image of ``x``)."""
        sigma = tuple(sigma)
        if not 0 <= n <= self.bound or not is_permutation(sigma, n):
            raise ValueError(f"{sigma} is not a permutation of {n} points within bound {self.bound}")
        hit = self._act.get((n, sigma))
        if hit is None:
            word = reduced_word(sigma)
            if not word:
                hit = self.identity(n)
            else:
                # sigma = (sigma o s_k) o s_k with the prefix one letter shorter
                k = word[-1]
                prefix = compose_perm(sigma, adjacent(n, k))
                hit = self.act(n, prefix) @ self.gens[n][k]
            self._act[(n, sigma)] = hit
        return hit

    def rank_sequence(self) -> list:
        return list(self.ranks)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "bound": self.bound,
            "ranks": list(self.ranks),
            "generators": {
                str(n): [g.dense().to_json() for g in self.gens[n]] for n in range(2, self.bound + 1)
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "LinearSpecies":
        bound = data["bound"]
        ranks = data["ranks"]
        gens = []
        for n in range(bound + 1):
            mats = data.get("generators", {}).get(str(n), [])
            gens.append([Matrix.from_json(m, ranks[n]) for m in mats])
        return cls(bound, ranks, gens, name=data.get("name", "M"))


def character(M: LinearSpecies, n: int, sigma: Sequence[int]) -> Scalar:
    """Trace of the action of ``sigma``, built from a reduced word."""
    return M.act(n, sigma).trace()


# -- building blocks -------------------------------------------------------------


@dataclass(frozen=True)
class WeightObject:
    """``Lambda`` decategorified to a free module of rank ``g``."""

    rank: int

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("weight rank must be non-negative")


@lru_cache(maxsize=None)
def tensor_power_perm(g: int, k: int, pi: tuple) -> BlockMap:
    """Permutation of tensor factors of ``Lambda^(x)k``: the basis tensor with
    factor indices ``i`` goes to ``j`` where ``j[pi[p]] = i[p]``."""
    tuples = list(iproduct(range(g), repeat=k))
    index = {t: n for n, t in enumerate(tuples)}
    images = []
    for t in tuples:
        j = [0] * k
        for p in range(k):
            j[pi[p]] = t[p]
        images.append(index[tuple(j)])
    return BlockMap.permutation(images)


def _assemble(parts: list, pieces: list) -> BlockMap:
    """Direct sum of summand maps: ``pieces`` holds ``(j, j2, BlockMap)``
    sending summand ``j`` into summand ``j2``; ``parts[j]`` is the block
    partition of summand ``j``."""
    offs = [0]
    for p in parts:
        offs.append(offs[-1] + len(p))
    flat = [s for p in parts for s in p]
    blocks = {}
    for j, j2, piece in pieces:
        for a, (b, m) in piece.blocks.items():
            blocks[offs[j] + a] = (offs[j2] + b, m)
    return BlockMap(flat, flat, blocks)


def _kron_all(maps: Sequence[BlockMap]) -> BlockMap:
    out = maps[0]
    for m in maps[1:]:
        out = out.kron(m)
    return out


def species_unit(bound: int) -> LinearSpecies:
    ranks = [1] + [0] * bound
    gens = [[BlockMap.identity((0,))] * max(n - 1, 0) for n in range(bound + 1)]
    return LinearSpecies(bound, ranks, gens, name="J")


def covers(n: int) -> list:
    """Ordered pairs ``(U, V)`` of subsets of ``{0..n-1}`` with union everything."""
    full = set(range(n))
    subs = subsets(n)
    return [(u, v) for u in subs for v in subs if set(u) | set(v) == full]


def weighted_tensor(M: LinearSpecies, N: LinearSpecies, weight: WeightObject | int) -> LinearSpecies:
    """``(M * N)[n] = sum_{U cup V = [n]} Lambda^(x)|U cap V| (x) M U (x) N V``."""
    g = weight.rank if isinstance(weight, WeightObject) else int(weight)
    if M.bound != N.bound:
        raise ValueError(f"bound mismatch: {M.bound} vs {N.bound}")
    bound = M.bound
    ranks, gens = [], []
    for n in range(bound + 1):
        cs = covers(n)
        index = {c: k for k, c in enumerate(cs)}
        parts = []
        for u, v in cs:
            w = len(set(u) & set(v))
            lam_parts = (1,) * (g**w)
            parts.append(tuple(a * b * c for a in lam_parts for b in M.parts(len(u)) for c in N.parts(len(v))))
        ranks.append(sum(sum(p) for p in parts))
        row = []
        for i in range(n - 1):
            s = adjacent(n, i)
            pieces = []
            for k, (u, v) in enumerate(cs):
                w = tuple(sorted(set(u) & set(v)))
                su, pu = restrict_perm(s, u)
                sv, pv = restrict_perm(s, v)
                _, pw = restrict_perm(s, w)
                piece = _kron_all([tensor_power_perm(g, len(w), pw), M.act(len(u), pu), N.act(len(v), pv)])
                pieces.append((k, index[(su, sv)], piece))
            row.append(_assemble(parts, pieces))
        gens.append(row)
    return LinearSpecies(bound, ranks, gens, name=f"({M.name}*{N.name})")


def weighted_tensor_ranks(m: Sequence[int], n: Sequence[int], g: int) -> list:
    """``sum_{r+s+t=k} k!/(r!s!t!) g^t m_{r+t} n_{s+t}``."""
    return [
        sum(c * g**t * m[r + t] * n[s + t] for r, s, t, c in trinomial_terms(k)) for k in range(len(m))
    ]


def multiplicity_free_ranks(m: Sequence[int], n: Sequence[int], g: int) -> list:
    """Ranks of the displayed variant ``sum_{r+s+t=k} Lambda^(x)r (x) M_s (x) N_t``,
    which carries no multinomial multiplicities."""
    out = []
    for k in range(len(m)):
        out.append(sum(g**r * m[s] * n[k - r - s] for r in range(k + 1) for s in range(k - r + 1)))
    return out


def pointwise_tensor(M: LinearSpecies, N: LinearSpecies) -> LinearSpecies:
    if M.bound != N.bound:
        raise ValueError(f"bound mismatch: {M.bound} vs {N.bound}")
    ranks = [a * b for a, b in zip(M.ranks, N.ranks)]
    gens = [[a.kron(b) for a, b in zip(M.gens[n], N.gens[n])] for n in range(M.bound + 1)]
    return LinearSpecies(M.bound, ranks, gens, name=f"({M.name}.{N.name})")


def theta_inf_transform(M: LinearSpecies, weight: WeightObject | int) -> LinearSpecies:
    """``Theta(M) X = sum_{W subset X} Lambda^(x)|W| (x) M W``."""
    g = weight.rank if isinstance(weight, WeightObject) else int(weight)
    ranks, gens = [], []
    for n in range(M.bound + 1):
        subs = subsets(n)
        index = {w: k for k, w in enumerate(subs)}
        parts = [tuple(a * b for a in (1,) * (g ** len(w)) for b in M.parts(len(w))) for w in subs]
        ranks.append(sum(sum(p) for p in parts))
        row = []
        for i in range(n - 1):
            s = adjacent(n, i)
            pieces = []
            for k, w in enumerate(subs):
                sw, pw = restrict_perm(s, w)
                pieces.append((k, index[sw], tensor_power_perm(g, len(w), pw).kron(M.act(len(w), pw))))
            row.append(_assemble(parts, pieces))
        gens.append(row)
    return LinearSpecies(M.bound, ranks, gens, name=f"Theta({M.name})")


@dataclass(frozen=True)
class Theta2:
    """Ranks of ``(M_0, M_0 + Lambda (x) M_1)`` with the summand layout of
    the second component."""

    ranks: tuple
    summands: tuple


def theta_hat_2(m0: int, m1: int, weight: WeightObject | int) -> Theta2:
    g = weight.rank if isinstance(weight, WeightObject) else int(weight)
    return Theta2((m0, m0 + g * m1), (("M0", m0), ("Lambda(x)M1", g * m1)))


# -- characters by summand bookkeeping ---------------------------------------------


def _fixed(sigma: tuple, x: tuple) -> bool:
    return tuple(sorted(sigma[i] for i in x)) == x


def weighted_tensor_character(M: LinearSpecies, N: LinearSpecies, g: int, n: int, sigma: Sequence[int]) -> Scalar:
    """Character of ``M * N`` from the summands fixed by ``sigma``; each
    contributes ``g^cycles * chi_M * chi_N`` of the transported permutations."""
    sigma = tuple(sigma)
    total = Q(0)
    for u, v in covers(n):
        if _fixed(sigma, u) and _fixed(sigma, v):
            w = tuple(sorted(set(u) & set(v)))
            pw = restrict_perm(sigma, w)[1]
            total += g ** cycle_count(pw) * character(M, len(u), restrict_perm(sigma, u)[1]) * character(
                N, len(v), restrict_perm(sigma, v)[1]
            )
    return total


def theta_inf_character(M: LinearSpecies, g: int, n: int, sigma: Sequence[int]) -> Scalar:
    sigma = tuple(sigma)
    total = Q(0)
    for w in subsets(n):
        if _fixed(sigma, w):
            pw = restrict_perm(sigma, w)[1]
            total += g ** cycle_count(pw) * character(M, len(w), pw)
    return total


# -- the subset coalgebra ------------------------------------------------------------


def subset_label(x: tuple) -> str:
    return "{" + ",".join(str(i + 1) for i in x) + "}"


def subset_coalgebra(n: int, lam) -> FinCoalgebra:
    """Basis the subsets of ``{1..n}``; ``eps(X) = [X empty]`` and
    ``delta(X) = sum_{U cup V = X} lam^|U cap V| U (x) V``."""
    lam = Q(lam)
    subs = subsets(n)
    index = {s: k for k, s in enumerate(subs)}
    comult = []
    for x in subs:
        xs = set(x)
        inner = [s for s in subs if set(s) <= xs]
        terms = []
        for u in inner:
            for v in inner:
                if set(u) | set(v) == xs:
                    terms.append((index[u], index[v], lam ** len(set(u) & set(v))))
        comult.append(terms)
    counit = [ONE if not s else 0 for s in subs]
    return FinCoalgebra([subset_label(s) for s in subs], counit, comult, point=index[()], name=f"Sub{n}({format_scalar(lam)})")


# -- random species ----------------------------------------------------------------


def _standard3(i: int) -> Matrix:
    return Matrix([[-1, 1], [0, 1]]) if i == 0 else Matrix([[1, 0], [1, -1]])


def random_invertible(k: int, rng) -> Matrix:
    while True:
        m = Matrix([[rng.randint(-3, 3) for _ in range(k)] for _ in range(k)])
        if m.rank() == k:
            return m


def random_species(bound: int, rng, max_rank: int = 2, name: str = "M") -> LinearSpecies:
    """Sums of trivial, sign and (at 3 points) standard representations,
    conjugated by a random invertible matrix; rank at most ``max_rank``."""
    ranks, gens = [], []
    for n in range(bound + 1):
        irreps = ["triv", "sign"] if n >= 2 else ["triv"]
        options = [[]] + [[a] for a in irreps]
        if max_rank >= 2:
            options += [[a, b] for i, a in enumerate(irreps) for b in irreps[i:]]
            if n == 3:
                options.append(["std"])
        pick = rng.choice(options)
        r = sum(2 if p == "std" else 1 for p in pick)
        ranks.append(r)
        row = []
        conj = random_invertible(r, rng) if r else None
        for i in range(n - 1):
            if r == 0:
                row.append(Matrix.zeros(0, 0))
                continue
            blocks = []
            for p in pick:
                if p == "triv":
                    blocks.append(Matrix([[1]]))
                elif p == "sign":
                    blocks.append(Matrix([[-1]]))
                else:
                    blocks.append(_standard3(i))
            d = block_diag(blocks)
            row.append(conj @ d @ conj.inverse())
        gens.append(row)
    return LinearSpecies(bound, ranks, gens, name=name)


def sign_species(bound: int) -> LinearSpecies:
    return LinearSpecies(bound, [1] * (bound + 1), [[Matrix([[-1]])] * max(n - 1, 0) for n in range(bound + 1)], name="sgn")


def trivial_species(bound: int) -> LinearSpecies:
    return LinearSpecies(bound, [1] * (bound + 1), [[Matrix([[1]])] * max(n - 1, 0) for n in range(bound + 1)], name="E")
