import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from sigmachase.algebra import (
    AlgebraError,
    Kind,
    chain_semilattice,
    cyclic_group,
    dihedral_quandle,
    identity,
    make_homomorphism,
    product_algebra,
    subalgebra,
    terminal_map,
    two_element_semilattice,
)
from sigmachase.enumeration import algebras_up_to
from sigmachase.morphisms import are_isomorphic
from sigmachase.points import SigmaClass, is_sigma_congruence
from sigmachase.relations import (
    all_congruences,
    all_congruences_bruteforce,
    cokernel_of_subalgebra,
    congruence_generated,
    diagonal,
    direct_image_relation,
    factor_through,
    indiscrete,
    join,
    kernel_object,
    kernel_pair,
    make_congruence,
    meet,
    nontransitive_direct_images,
    pullback_algebra,
    quotient_by_congruence,
    relation_object,
)

MONOIDS_4 = algebras_up_to(Kind.MONOID, 4)
QUANDLES_4 = algebras_up_to(Kind.QUANDLE, 4)
SMALL = MONOIDS_4 + QUANDLES_4 + algebras_up_to(Kind.SEMIRING, 3)

Z4 = cyclic_group(4)
MOD2 = make_homomorphism(Z4, cyclic_group(2), [0, 1, 0, 1])


def test_kernel_pair_examples():
    assert kernel_pair(identity(Z4)).is_diagonal
    assert kernel_pair(MOD2).block_lists() == [[0, 2], [1, 3]]
    assert kernel_pair(terminal_map(dihedral_quandle(3))).is_indiscrete


def test_generated_examples():
    assert congruence_generated(Z4, [(0, 2)]).block_lists() == [[0, 2], [1, 3]]
    assert congruence_generated(Z4, []).is_diagonal
    assert congruence_generated(two_element_semilattice(), [(0, 1)]).is_indiscrete


def test_kernel_object_examples():
    K, k = kernel_object(MOD2)
    assert k.map.tolist() == [0, 2] and are_isomorphic(K, cyclic_group(2))
    P = product_algebra(Z4, cyclic_group(3))
    assert kernel_object(P.proj1)[1].map.tolist() == [0, 1, 2]
    S = chain_semilattice()
    f = quotient_by_congruence(S, make_congruence(S, [0, 0, 1])).projection
    assert kernel_object(f)[1].map.tolist() == [0, 1]
    with pytest.raises(AlgebraError, match="UNSUPPORTED_KIND"):
        kernel_object(terminal_map(dihedral_quandle(3)))


def test_quotient_examples():
    Q = quotient_by_congruence(Z4, kernel_pair(MOD2)).algebra
    assert are_isomorphic(Q, cyclic_group(2))
    assert quotient_by_congruence(Z4, diagonal(Z4)).algebra.same_structure(Z4)
    R3 = dihedral_quandle(3)
    P = product_algebra(R3, R3)
    assert are_isomorphic(quotient_by_congruence(P.algebra, kernel_pair(P.proj1)).algebra, R3)


def test_cokernel_examples():
    _, inc = subalgebra(Z4, [0, 2])
    assert kernel_pair(cokernel_of_subalgebra(inc)) == kernel_pair(MOD2)
    _, unit = subalgebra(Z4, [0])
    assert cokernel_of_subalgebra(unit).is_bijective
    S = chain_semilattice()
    _, ek = subalgebra(S, [0, 1])
    c = cokernel_of_subalgebra(ek)
    assert are_isomorphic(c.cod, two_element_semilattice())


def test_direct_image_examples():
    R = make_congruence(Z4, [0, 1, 0, 1])
    assert direct_image_relation(identity(Z4), R).congruence == R
    d = direct_image_relation(MOD2, diagonal(Z4))
    assert d.is_equivalence and d.congruence.is_diagonal
    f, R, d = next(nontransitive_direct_images(algebras_up_to(Kind.MONOID, 4)))
    a, b, c = d.witness
    assert (a, b) in d.pairs and (b, c) in d.pairs and (a, c) not in d.pairs
    with pytest.raises(AlgebraError, match="NOT_SURJECTIVE"):
        direct_image_relation(make_homomorphism(cyclic_group(2), Z4, [0, 2]), diagonal(cyclic_group(2)))


def test_pullback_examples():
    Z2 = cyclic_group(2)
    sq = pullback_algebra(identity(Z2), identity(Z2))
    assert sq.apex.order == 2
    assert are_isomorphic(pullback_algebra(MOD2, identity(Z2)).apex, Z4)
    sq = pullback_algebra(MOD2, MOD2)
    assert sq.apex.order == 8
    assert np.array_equal(MOD2.map[sq.p1.map], MOD2.map[sq.p2.map])


def test_relation_object_legs():
    R = kernel_pair(MOD2).relation
    assert (R.d0.map[R.s0.map] == np.arange(4)).all()
    assert (R.d1.map[R.s0.map] == np.arange(4)).all()
    with pytest.raises(AlgebraError, match="SHAPE_ERROR"):
        relation_object(Z4, [(0, 0), (1, 1), (2, 2)])


@pytest.mark.parametrize("X", SMALL, ids=lambda a: f"{a.kind.value}{a.order}")
def test_lattice_matches_oracle(X):
    want = sorted(tuple(c) for c in oracles.congruences([t.tolist() for t in X.ops]))
    got = sorted(tuple(C.blocks.tolist()) for C in all_congruences(X))
    assert got == want
    assert sorted(tuple(C.blocks.tolist()) for C in all_congruences_bruteforce(X)) == want


@pytest.mark.parametrize("X", MONOIDS_4 + QUANDLES_4, ids=lambda a: f"{a.kind.value}{a.order}")
def test_kernel_pair_of_quotient_is_congruence(X):
    for C in all_congruences(X):
        assert kernel_pair(quotient_by_congruence(X, C).projection) == C


def test_generated_is_intersection():
    for X in MONOIDS_4:
        lattice = all_congruences(X)
        for a, b in itertools.combinations(range(X.order), 2):
            above = [C for C in lattice if C.related(a, b)]
            G = congruence_generated(X, [(a, b)])
            assert all(G.refines(C) for C in above)
            assert G in above


def test_join_meet_are_lattice_ops():
    for X in MONOIDS_4[:20]:
        L = all_congruences(X)
        for C, D in itertools.product(L, repeat=2):
            J, M = join(C, D), meet(C, D)
            assert C.refines(J) and D.refines(J) and M.refines(C) and M.refines(D)
            assert all(J.refines(E) for E in L if C.refines(E) and D.refines(E))
        assert diagonal(X) in L and indiscrete(X) in L


def test_direct_image_of_schreier_congruence_is_equivalence():
    """Instance form: f(R) is an equivalence when R is a Schreier congruence."""
    checked = 0
    for X in MONOIDS_4:
        L = all_congruences(X)
        special = [R for R in L if is_sigma_congruence(R, SigmaClass.SCHREIER)]
        for C in L:
            f = quotient_by_congruence(X, C).projection
            for R in special:
                checked += 1
                assert direct_image_relation(f, R).is_equivalence
    assert checked > 100


@given(st.integers(0, len(MONOIDS_4) - 1), st.data())
def test_pullback_commutes(i, data):
    X = MONOIDS_4[i]
    L = all_congruences(X)
    C = data.draw(st.sampled_from(L))
    D = data.draw(st.sampled_from([E for E in L if C.refines(E)]))
    f = quotient_by_congruence(X, C).projection
    g = quotient_by_congruence(X, D).projection
    # g factors through f; pull back the factor along itself
    h = factor_through(g, f)
    sq = pullback_algebra(h, h)
    assert np.array_equal(h.map[sq.p1.map], h.map[sq.p2.map])
    want = {(x, y) for x in range(h.dom.order) for y in range(h.dom.order) if h.map[x] == h.map[y]}
    assert {tuple(p) for p in sq.pairs.tolist()} == want
