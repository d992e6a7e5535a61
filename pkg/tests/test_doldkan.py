"""Dold-Kan data: enumeration, Gamma, N, covering pairs and the transported tensor."""

import random
from itertools import product
from math import factorial

import pytest

from hurwitz_kernel import doldkan as dk
from hurwitz_kernel.doldkan import Mor
from hurwitz_kernel.exact import Matrix


def trinomial_sum(n, f, g, weight=1):
    """``sum_{r+s+t=n} n!/(r!s!t!) weight^t f_{r+t} g_{s+t}`` by brute force."""
    total = 0
    for r in range(n + 1):
        for s in range(n + 1 - r):
            t = n - r - s
            c = factorial(n) // (factorial(r) * factorial(s) * factorial(t))
            total += c * weight**t * f[r + t] * g[s + t]
    return total


@pytest.fixture(scope="module")
def fi3():
    return dk.make_instance("fi_sharp", 3)


# -- enumeration -------------------------------------------------------------


def test_subobject_counts():
    assert dk.make_instance("fi_sharp", 2).sub_count(2) == 4
    simp = dk.make_instance("simplicial", 2)
    assert simp.sub_count(2) == 4
    # id, s0, s1 and the map to a point
    assert sorted(m.data for m in simp.subobjects(2)) == [(0, 0, 0), (0, 0, 1), (0, 1, 1), (0, 1, 2)]


def test_fo_sharp_hom_between_two_point_ordinals():
    # empty map, four one-point maps, the identity
    assert len(dk.make_instance("fo_sharp", 2).hom(2, 2)) == 6
    assert len(dk.make_instance("fi_sharp", 2).hom(2, 2)) == 7


def test_instance_guards():
    with pytest.raises(ValueError):
        dk.make_instance("fi_sharp", 7)
    with pytest.raises(ValueError):
        dk.make_instance("globular", 2)


@pytest.mark.parametrize("name", dk.INSTANCES)
def test_factorizations_are_unique(name):
    d = dk.make_instance(name, 3)
    assert dk.check_factorizations(d) == []
    assert dk.rank_identity_check(d)


# -- presheaves -----------------------------------------------------------------


def test_invalid_presheaf_rejected(fi3):
    swap = Mor(2, 2, (1, 0))
    with pytest.raises(ValueError):
        dk.Presheaf(fi3, {2: 1}, {swap: Matrix([[2]])})
    with pytest.raises(ValueError):
        dk.Presheaf(fi3, {2: 1}, {swap: Matrix([[-1]]), Mor(2, 2, (0, 1)): Matrix([[3]])})


def test_presheaf_json_roundtrip(fi3):
    F = dk.random_presheaf(fi3, random.Random(2))
    back = dk.presheaf_from_json(fi3, F.to_json())
    assert back.ranks == F.ranks
    assert all(back(r).dense() == F(r).dense() for r in F.maps)


# -- Gamma -------------------------------------------------------------------------


def test_gamma_object_examples(fi3):
    F = dk.skyscraper(fi3, 1)
    assert sum(s.rank for s in dk.gamma_object(fi3, F, 2)) == 2
    assert [s.rank for s in dk.gamma_object(fi3, F, 0)] == [0]
    simp = dk.make_instance("simplicial", 2)
    f0, f1, f2 = 2, 3, 5
    G = dk.GammaPresheaf(dk.trivial_presheaf(simp, {0: f0, 1: f1, 2: f2}))
    assert G.rank(2) == f2 + 2 * f1 + f0


def test_gamma_morphism_example(fi3):
    F = dk.skyscraper(fi3, 1)
    f = Mor(2, 2, (1, -1))
    # summands {1}, {2}; F{1} goes to F{2} by the identity
    assert dk.gamma_morphism(fi3, F, f).dense() == Matrix([[0, 0], [1, 0]])
    assert dk.gamma_morphism(fi3, F, fi3.identity(2)).dense() == Matrix.identity(2)


def test_gamma_of_idempotent_example(fi3):
    F = dk.trivial_presheaf(fi3, {0: 1, 1: 1})
    m = Mor(0, 1, ())
    e = dk.gamma_morphism(fi3, F, fi3.compose(m, fi3.star(m)))
    assert e.dense() == Matrix([[1, 0], [0, 0]])


@pytest.mark.parametrize("name", dk.INSTANCES)
def test_gamma_functorial_and_idempotents(name):
    d = dk.make_instance(name, 3)
    F = dk.random_presheaf(d, random.Random(name))
    assert dk.check_gamma_functoriality(d, F) == []
    assert dk.check_idempotents(d, F) == []


# -- N -------------------------------------------------------------------------------


def test_n_object_example(fi3):
    F = dk.trivial_presheaf(fi3, {0: 1, 1: 1})
    NG = dk.NPresheaf(fi3, dk.GammaPresheaf(F))
    assert NG.rank(1) == 1
    # no proper subobjects of the empty set: N H = H there
    assert NG.rank(0) == dk.GammaPresheaf(F).rank(0)


@pytest.mark.parametrize("name", dk.INSTANCES)
def test_n_is_intersection_of_kernels(name):
    d = dk.make_instance(name, 3)
    H = dk.GammaPresheaf(dk.random_presheaf(d, random.Random(f"kernels:{name}")))
    for a in d.objects:
        proper = [m for m in d.subobjects(a) if not d.is_identity(m)]
        rows = [row for m in proper for row in H(d.compose(m, d.star(m))).dense().rows]
        split = dk.n_object(d, H, a)
        if rows:
            stacked = Matrix(rows)
            assert split.rank == H.rank(a) - stacked.rank()
            assert stacked @ split.incl.dense() == Matrix.zeros(len(rows), split.rank)
        else:
            assert split.rank == H.rank(a)


@pytest.mark.parametrize("name,bound", [("fi_sharp", 3), ("fo_sharp", 4), ("cube", 3), ("simplicial", 3)])
def test_roundtrip(name, bound):
    d = dk.make_instance(name, bound)
    rng = random.Random(f"roundtrip:{name}")
    for _ in range(2):
        assert dk.roundtrip(d, dk.random_presheaf(d, rng)).ok


# -- covering pairs and the tensor -------------------------------------------------------


def test_covering_pair_examples(fi3):
    assert len(dk.covering_pairs(fi3, 1)) == 3
    assert (Mor(0, 1, ()), Mor(0, 1, ())) not in dk.covering_pairs(fi3, 1)
    assert len(dk.covering_pairs(fi3, 2)) == 9
    simp = dk.make_instance("simplicial", 2)
    assert len(dk.covering_pairs(simp, 1)) == 3
    assert len(dk.covering_pairs(simp, 2)) == 9
    assert len(dk.covering_pairs(simp, 2, form="idempotent")) == 9
    assert len(dk.covering_pairs(simp, 2, form="general")) == 7
    with pytest.raises(ValueError):
        dk.covering_pairs(simp, 2, form="other")


@pytest.mark.parametrize("name", dk.INSTANCES)
def test_unit_ranks(name):
    d = dk.make_instance(name, 3)
    J = dk.tensor_unit_ranks(d)
    assert J == dk.unit_from_constant(d)
    if name in ("fi_sharp", "fo_sharp"):
        assert J == {0: 1, 1: 0, 2: 0, 3: 0}


@pytest.mark.parametrize("name", ["fi_sharp", "fo_sharp"])
def test_tensor_ranks_match_trinomial_formula(name):
    d = dk.make_instance(name, 4)
    rng = random.Random(name)
    f = [rng.randint(0, 2) for _ in range(5)]
    g = [rng.randint(0, 2) for _ in range(5)]
    T = dk.transported_tensor(d, dk.trivial_presheaf(d, dict(enumerate(f))), dk.trivial_presheaf(d, dict(enumerate(g))))
    assert [T.rank(a) for a in d.objects] == [trinomial_sum(n, f, g) for n in range(5)]


def test_simplicial_tensor_rank_at_two():
    d = dk.make_instance("simplicial", 2)
    a, b = [2, 3, 5], [7, 1, 4]
    T = dk.transported_tensor(d, dk.trivial_presheaf(d, dict(enumerate(a))), dk.trivial_presheaf(d, dict(enumerate(b))))
    want = a[2] * b[2] + 2 * a[2] * b[1] + a[2] * b[0] + 2 * a[1] * b[2] + 2 * a[1] * b[1] + a[0] * b[2]
    assert T.rank(2) == want


@pytest.mark.parametrize("name", dk.INSTANCES)
def test_tensor_closed_form_matches_engine(name):
    d = dk.make_instance(name, 3)
    rng = random.Random(f"tensor:{name}")
    F, G = dk.random_presheaf(d, rng), dk.random_presheaf(d, rng)
    assert dk.transported_tensor(d, F, G).compare_with_engine().ok


@pytest.mark.parametrize("name", dk.INSTANCES)
def test_subobject_order_does_not_matter(name):
    d = dk.make_instance(name, 3)
    orders = {a: list(reversed(range(d.sub_count(a)))) for a in d.objects}
    d2 = d.with_subobject_order(orders)
    assert [m for m in reversed(d.subobjects(3))] == d2.subobjects(3)
    F = dk.random_presheaf(d, random.Random(5))
    F2 = dk.Presheaf(d2, F.ranks, F.maps)
    T1, T2 = dk.transported_tensor(d, F, F), dk.transported_tensor(d2, F2, F2)
    assert [T1.rank(a) for a in d.objects] == [T2.rank(a) for a in d.objects]
    assert dk.roundtrip(d2, F2).ok
    assert T2.compare_with_engine().ok


# -- chain complexes ----------------------------------------------------------------------


def test_chain_tensor_examples():
    a, b = [2, 3, 5], [7, 11, 13]
    assert [s.rank for s in dk.chain_tensor_object(a, b, 0)] == [a[0] * b[0]]
    assert sorted(s.rank for s in dk.chain_tensor_object(a, b, 1)) == sorted([a[1] * b[1], a[1] * b[0], a[0] * b[1]])
    assert len(dk.chain_tensor_object(a, b, 2)) == 9


@pytest.mark.parametrize("n", range(6))
def test_chain_tensor_counts(n):
    # brute force over all monotone maps [n] -> [n], keeping the surjections
    surj = [v for v in product(range(n + 1), repeat=n + 1) if v[0] == 0 and all(y - x in (0, 1) for x, y in zip(v, v[1:]))]
    pairs = sum(1 for s in surj for t in surj if len(set(zip(s, t))) == n + 1)
    ones = [1] * (n + 1)
    assert len(dk.chain_tensor_object(ones, ones, n)) == pairs == trinomial_sum(n, ones, ones)
    assert len(dk.surjections(n)) == len(surj) == 2**n
