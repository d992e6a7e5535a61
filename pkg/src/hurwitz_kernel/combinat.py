"""Multinomials, subsets, permutations and the two summation identities
used throughout the kernel."""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import factorial
from typing import Sequence

from .exact import Q, Scalar


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return factorial(n)


def multinomial(n: int, parts: Sequence[int]) -> Scalar:
    """``n! / (m_1! ... m_r!)`` with ``k! = 0`` for negative ``k``.

    A negative ``n`` or a negative part gives 0.  The parts are not required
    to sum to ``n``; in that case the quotient may be non-integral.
    """
    if n < 0 or any(m < 0 for m in parts):
        return Q(0)
    den = 1
    for m in parts:
        den *= _fact(m)
    return Q(_fact(n)) / den


@lru_cache(maxsize=None)
def trinomial_terms(n: int) -> tuple[tuple[int, int, int, int], ...]:
    """All ``(r, s, t, multinomial(n; r, s, t))`` with ``r + s + t = n``."""
    out = []
    for t in range(n + 1):
        for r in range(n - t + 1):
            s = n - r - t
            out.append((r, s, t, int(multinomial(n, (r, s, t)))))
    return tuple(out)


def binomial(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return _fact(n) // (_fact(k) * _fact(n - k))


def combseq_reconstruct(a: Sequence, n: int):
    """Rebuild ``a[n]`` as ``sum multinomial(n; r, s, t) (-1)^s a[t]``.

    Works for any sequence whose entries support ``+`` and multiplication by
    integers (scalars, AlgebraElems, ...).
    """
    if n < 0 or n >= len(a):
        raise IndexError(f"index {n} outside sequence of length {len(a)}")
    total = None
    for r, s, t, c in trinomial_terms(n):
        term = a[t] * (c * (-1) ** s)
        total = term if total is None else total + term
    return total


def subsets(n: int) -> list[tuple[int, ...]]:
    """Subsets of ``{0..n-1}`` ordered by size, then lexicographically."""
    return [c for k in range(n + 1) for c in combinations(range(n), k)]


def permutations(n: int) -> list[tuple[int, ...]]:
    from itertools import permutations as _perms

    return list(_perms(range(n)))


def compose_perm(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """``(p o q)(x) = p[q[x]]``."""
    return tuple(p[x] for x in q)


def invert_perm(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


def is_permutation(p: Sequence[int], n: int | None = None) -> bool:
    n = len(p) if n is None else n
    return len(p) == n and sorted(p) == list(range(n))


def reduced_word(p: Sequence[int]) -> list[int]:
    """Adjacent transpositions ``i`` (swapping ``i`` and ``i+1``) whose
    composite, applied right to left, equals ``p``.

    ``p == s_{w[0]} o s_{w[1]} o ... o s_{w[-1]}``.
    """
    cur = list(p)
    found = []
    while True:
        i = next((i for i in range(len(cur) - 1) if cur[i] > cur[i + 1]), None)
        if i is None:
            break
        # cur o s_i swaps entries i and i+1 and removes one inversion
        cur[i], cur[i + 1] = cur[i + 1], cur[i]
        found.append(i)
    return found[::-1]


def restrict_perm(sigma: Sequence[int], subset: Sequence[int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Transport ``sigma`` restricted to a sorted ``subset`` to ``S_|subset|``.

    Returns the image subset (sorted) and the permutation
    ``ord_image^{-1} o sigma o ord_subset``.
    """
    image = tuple(sorted(sigma[x] for x in subset))
    pos = {x: i for i, x in enumerate(image)}
    return image, tuple(pos[sigma[x]] for x in subset)
