import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from sigmachase.algebra import (
    AlgebraError,
    Kind,
    check_axioms,
    compose,
    cyclic_group,
    dihedral_quandle,
    identity,
    is_jointly_extremally_epimorphic,
    make_homomorphism,
    product_algebra,
    subalgebra_generated,
    terminal,
    terminal_map,
    two_element_semilattice,
    validate_algebra,
)
from sigmachase.enumeration import algebras_up_to, enumerate_algebras
from sigmachase.morphisms import are_isomorphic, canonical_algebra, find_homomorphisms

MONOIDS_4 = algebras_up_to(Kind.MONOID, 4)
QUANDLES_4 = algebras_up_to(Kind.QUANDLE, 4)


def test_z2_is_a_monoid():
    A = validate_algebra(Kind.MONOID, [[[0, 1], [1, 0]]], 0, ["0", "1"])
    assert A.order == 2 and A.constant == 0


def test_broken_unit_law_reports_identity():
    with pytest.raises(AlgebraError) as e:
        validate_algebra(Kind.MONOID, [[[1, 1], [1, 1]]], 0, ["e", "a"])
    assert e.value.code == "AXIOM_VIOLATION"
    assert "identity" in e.value.message
    assert e.value.witness[0] == "e"


def test_r3_is_a_quandle():
    R3 = dihedral_quandle(3)
    validate_algebra(Kind.QUANDLE, R3.tables)
    assert oracles.quandle_ok(R3.lhd.tolist())


def test_shape_errors():
    with pytest.raises(AlgebraError, match="SHAPE_ERROR"):
        validate_algebra(Kind.MONOID, [[[0, 1, 2], [1, 0, 1]]], 0)
    with pytest.raises(AlgebraError, match="SHAPE_ERROR"):
        validate_algebra(Kind.MONOID, [[[0, 5], [1, 0]]], 0)
    with pytest.raises(AlgebraError, match="SHAPE_ERROR"):
        validate_algebra(Kind.QUANDLE, [[[0, 0], [1, 1]]], 0)


@pytest.mark.parametrize(
    "tables, axiom",
    [
        ([[0, 0], [0, 0]], "A1"),
        ([[0, 0, 0], [0, 1, 0], [1, 2, 2]], "A2"),
    ],
)
def test_quandle_violations_named(tables, axiom):
    with pytest.raises(AlgebraError) as e:
        validate_algebra(Kind.QUANDLE, [tables])
    assert axiom in e.value.message


def test_homomorphism_examples():
    Z2, Z4 = cyclic_group(2), cyclic_group(4)
    make_homomorphism(Z4, Z4, [0, 1, 2, 3])
    make_homomorphism(Z4, Z2, [0, 1, 0, 1])
    with pytest.raises(AlgebraError) as e:
        make_homomorphism(Z2, Z4, [0, 1])
    assert e.value.code == "NOT_HOMOMORPHISM" and e.value.witness == ("1", "1")
    with pytest.raises(AlgebraError, match="KIND_MISMATCH"):
        make_homomorphism(Z2, dihedral_quandle(3), [0, 1])


def test_products():
    Z2 = cyclic_group(2)
    V = product_algebra(Z2, Z2)
    klein = validate_algebra(Kind.MONOID, [[[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]]], 0)
    assert are_isomorphic(V.algebra, klein)
    M = product_algebra(two_element_semilattice(), Z2).algebra
    assert M.order == 4 and oracles.monoid_ok(M.mul.tolist(), M.constant)
    assert (M.mul == M.mul.T).all()
    RR = product_algebra(dihedral_quandle(3), dihedral_quandle(3))
    assert RR.algebra.order == 9 and oracles.quandle_ok(RR.algebra.lhd.tolist())
    # sections y -> (y, e) split the projections
    assert (V.proj1.map[V.sec1.map] == np.arange(2)).all()


def test_subalgebra_generated_examples():
    Z4, Z6 = cyclic_group(4), cyclic_group(6)
    assert subalgebra_generated(Z4, [1])[0].tolist() == [0, 1, 2, 3]
    assert subalgebra_generated(Z4, [2])[0].tolist() == [0, 2]
    assert subalgebra_generated(Z6, [2, 3])[0].tolist() == list(range(6))


def test_joint_epi_examples():
    Z2 = cyclic_group(2)
    V = product_algebra(Z2, Z2)
    assert is_jointly_extremally_epimorphic([identity(Z2)])
    assert is_jointly_extremally_epimorphic([V.sec1, V.sec2])
    one = terminal(Kind.MONOID)
    assert not is_jointly_extremally_epimorphic([make_homomorphism(one, Z2, [0])])


def test_enumeration_counts():
    assert len(list(enumerate_algebras(Kind.MONOID, 2, up_to_iso=True))) == 2
    assert len(list(enumerate_algebras(Kind.QUANDLE, 1))) == 1
    assert len(list(enumerate_algebras(Kind.QUANDLE, 3, up_to_iso=True))) == 3
    with pytest.raises(AlgebraError, match="BOUND_EXCEEDED"):
        list(enumerate_algebras(Kind.MONOID, 7))


def test_enumeration_matches_brute_force_small():
    """Raw enumeration = every table on n <= 3 points the oracle accepts."""
    for n in (1, 2, 3):
        want = set()
        for flat in itertools.product(range(n), repeat=n * n):
            t = [list(flat[i * n:(i + 1) * n]) for i in range(n)]
            if oracles.monoid_ok(t, 0):
                want.add(flat)
        got = {tuple(A.mul.ravel().tolist()) for A in enumerate_algebras(Kind.MONOID, n)}
        assert got == want


def test_up_to_iso_classes_pairwise_distinct():
    for n in (2, 3):
        reps = list(enumerate_algebras(Kind.MONOID, n, up_to_iso=True))
        for A, B in itertools.combinations(reps, 2):
            assert not are_isomorphic(A, B)
        raw = list(enumerate_algebras(Kind.MONOID, n))
        keys = {canonical_algebra(A).mul.tobytes() for A in raw}
        assert len(keys) == len(reps)


@pytest.mark.parametrize("A", QUANDLES_4, ids=lambda a: f"q{a.order}")
def test_lhdi_inverts_lhd(A):
    n = A.order
    for a, b in itertools.product(range(n), repeat=2):
        assert A.lhdi[A.lhd[a, b], b] == a == A.lhd[A.lhdi[a, b], b]


def test_quandle_homs_preserve_lhdi():
    for A in QUANDLES_4[:6]:
        for B in QUANDLES_4[:6]:
            for h in find_homomorphisms(A, B):
                assert oracles.is_hom([A.lhdi.tolist()], [B.lhdi.tolist()], h.map.tolist())


def test_enumerated_algebras_revalidate():
    for A in MONOIDS_4 + QUANDLES_4 + algebras_up_to(Kind.SEMIRING, 3):
        assert check_axioms(A.kind, A.tables, A.constant) is None


def test_semiring_enumeration_matches_oracle():
    for A in algebras_up_to(Kind.SEMIRING, 3):
        assert oracles.semiring_ok(A.add.tolist(), A.mul.tolist(), A.constant)


monoid_idx = st.integers(0, len(MONOIDS_4) - 1)


@given(monoid_idx, st.lists(st.integers(0, 3), max_size=3), st.lists(st.integers(0, 3), max_size=3))
def test_generated_is_closure_monotone_idempotent(i, s1, s2):
    A = MONOIDS_4[i]
    s1 = [x % A.order for x in s1]
    s2 = [x % A.order for x in s2]
    g1 = set(subalgebra_generated(A, s1)[0].tolist())
    assert g1 == oracles.generated([A.mul.tolist()], s1, [A.constant])
    assert set(subalgebra_generated(A, sorted(g1))[0].tolist()) == g1
    g12 = set(subalgebra_generated(A, s1 + s2)[0].tolist())
    assert g1 <= g12


@given(monoid_idx, monoid_idx)
def test_homs_match_oracle(i, j):
    A, B = MONOIDS_4[i], MONOIDS_4[j]
    found = {tuple(h.map.tolist()) for h in find_homomorphisms(A, B)}
    want = set()
    for m in itertools.product(range(B.order), repeat=A.order):
        if m[A.constant] == B.constant and oracles.is_hom([A.mul.tolist()], [B.mul.tolist()], m):
            want.add(m)
    assert found == want


@given(monoid_idx, st.randoms(use_true_random=False))
def test_relabelled_copy_is_isomorphic(i, rnd):
    A = MONOIDS_4[i]
    perm = list(range(1, A.order))
    rnd.shuffle(perm)
    p = np.array([0] + perm)
    inv = np.argsort(p)
    t = p[A.mul[inv[:, None], inv[None, :]]]
    B = validate_algebra(Kind.MONOID, [t], 0)
    assert are_isomorphic(A, B)
    assert canonical_algebra(A).same_structure(canonical_algebra(B))


def test_compose_and_terminal():
    Z4, Z2 = cyclic_group(4), cyclic_group(2)
    f = make_homomorphism(Z4, Z2, [0, 1, 0, 1])
    assert compose(terminal_map(Z2), f).map.tolist() == [0, 0, 0, 0]
    assert compose(f, identity(Z4)) == f
