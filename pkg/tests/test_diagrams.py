import itertools

import numpy as np
import pytest

from sigmachase.algebra import (
    AlgebraError,
    Homomorphism,
    Kind,
    cyclic_group,
    identity,
    make_homomorphism,
    product_algebra,
    subalgebra,
    terminal,
    terminal_map,
)
from sigmachase.diagrams import (
    CLAUSES,
    DROPPABLE,
    Flavor,
    Fork,
    Side,
    Status,
    Variant,
    XData,
    build_3x3,
    check_exact_sequence,
    check_fork,
    effective_hypotheses,
    grids_over,
    relation_fork,
    search_counterexamples,
    sweep,
    verify_lemma,
)
from sigmachase.enumeration import algebras_up_to
from sigmachase.points import SigmaClass, is_regular_pushout, is_sigma_special
from sigmachase.relations import (
    all_congruences,
    diagonal,
    kernel_object,
    kernel_pair,
    quotient_by_congruence,
    unit_congruence,
)

S = SigmaClass.SCHREIER
Z2, Z4 = cyclic_group(2), cyclic_group(4)
MOD2 = make_homomorphism(Z4, Z2, [0, 1, 0, 1])
MONOIDS_3 = algebras_up_to(Kind.MONOID, 3)
MONOIDS_4 = algebras_up_to(Kind.MONOID, 4)


def test_exact_sequence_examples():
    _, k = subalgebra(Z4, [0, 2])
    v = check_exact_sequence(k, MOD2, S)
    assert v.exact and v.sigma_exact
    X = MONOIDS_4[5]
    _, unit = subalgebra(X, [X.constant])
    assert check_exact_sequence(unit, identity(X)).exact
    P = product_algebra(Z4, cyclic_group(3))
    v = check_exact_sequence(P.sec2, P.proj1, S)
    assert v.exact and v.sigma_exact


def test_exact_sequence_rejects_wrong_kernel():
    _, k = subalgebra(Z4, [0])
    v = check_exact_sequence(k, MOD2)
    assert not v.kernel_ok and "kernel" in v.witness


def test_fork_examples():
    v = check_fork(relation_fork(kernel_pair(MOD2), MOD2))
    assert v.left and v.right
    v = check_fork(relation_fork(diagonal(Z4), identity(Z4)))
    assert v.exact
    v = check_fork(relation_fork(diagonal(Z4), MOD2))
    assert v.left is False and v.right is False
    v = check_fork(relation_fork(diagonal(Z4), MOD2), Side.LEFT)
    assert v.right is None


def test_fork_shape_errors():
    R = kernel_pair(MOD2).relation
    with pytest.raises(AlgebraError, match="SHAPE_ERROR"):
        check_fork(Fork(R.algebra, R.d0, R.d1, identity(Z4)))


def _grid(X, F, T, G, flavor=Flavor.NORMALIZED, phi=None):
    for g in grids_over(X, flavor, S, phi_variants=("max", "min")):
        if g.F == F and g.T == T and g.G == G and (phi is None or g.phi == phi):
            return g
    raise LookupError


def test_product_grid_upper_holds():
    P = product_algebra(Z4, Z2)
    X = P.algebra
    F, T = kernel_pair(P.proj2), kernel_pair(P.proj1)
    G = kernel_pair(terminal_map(X))
    g = _grid(X, F, T, G)
    d = g.materialize()
    v = verify_lemma(d, Variant.UPPER)
    assert v.status is Status.HOLDS and v.conclusion_holds


def test_degenerate_grids():
    one = terminal(Kind.MONOID)
    objs = {k: one for k in ("K_phi", "K_f", "K_fp", "K_x", "X", "Xp", "U", "Y", "Yp")}
    maps = {k: identity(one) for k in ("Kk_x", "K_of_x", "k_phi", "k_f", "k_fp", "k_x", "x", "phi", "f", "fp", "u", "y")}
    d = build_3x3(Flavor.NORMALIZED, objs, maps)
    for variant in Variant:
        assert verify_lemma(d, variant).conclusion_holds
    # middle row 1 -> Z2 -> 1 is not exact
    objs2 = dict(objs, X=Z2, K_f=Z2)
    t = terminal_map(Z2)
    maps2 = dict(
        maps,
        k_f=identity(Z2),
        Kk_x=Homomorphism(one, Z2, np.array([0])),
        K_of_x=t,
        k_x=Homomorphism(one, Z2, np.array([0])),
        x=t,
        f=t,
    )
    with pytest.raises(AlgebraError) as e:
        build_3x3(Flavor.NORMALIZED, objs2, maps2)
    assert e.value.code == "NOT_WEAKLY_3X3" and "middle row" in e.value.message


def test_build_rejects_noncommuting():
    X = product_algebra(Z2, Z2).algebra
    grid = next(iter(grids_over(X, Flavor.NORMALIZED, S)))
    d = grid.materialize()
    maps = dict(d.maps)
    y = maps["y"]
    if y.cod.order > 1 and y.dom.order > 1:
        maps["y"] = Homomorphism(y.dom, y.cod, (y.map + 1) % y.cod.order)
        with pytest.raises(AlgebraError):
            build_3x3(d.flavor, d.objects, maps)
    with pytest.raises(AlgebraError, match="SHAPE_ERROR"):
        build_3x3(d.flavor, {k: v for k, v in d.objects.items() if k != "U"}, d.maps)


def test_clause_dropping():
    c = CLAUSES[(Flavor.DENORMALIZED, Variant.UPPER)][1]
    assert effective_hypotheses(c) == ("x-special", "lower-sigma-exact")
    assert effective_hypotheses(c, ["lower-sigma"]) == ("x-special", "lower-exact")
    assert effective_hypotheses(c, ["lower-exact"]) == ("x-special",)
    with pytest.raises(AlgebraError, match="SHAPE_ERROR"):
        effective_hypotheses(c, ["no-such"])


@pytest.mark.parametrize("flavor", list(Flavor))
def test_fast_facts_match_materialized(flavor):
    n = 0
    for X in MONOIDS_3 + algebras_up_to(Kind.QUANDLE, 3) * (flavor is Flavor.DENORMALIZED):
        for g in grids_over(X, flavor, phi_variants=("max", "min")):
            d = g.materialize()
            fast, slow = g.facts, d.facts
            for name in slow.names():
                assert fast[name] == slow[name], (X, name)
            n += 1
    assert n > 20


def test_left_exact_iff_jointly_mono():
    n = 0
    for X in MONOIDS_3 + algebras_up_to(Kind.QUANDLE, 3):
        for g in grids_over(X, Flavor.DENORMALIZED, phi_variants=("max", "min")):
            f = g.materialize().facts
            assert f["upper-left-exact"] == f["lower-jointly-mono"]
            n += 1
    assert n > 20


def test_regular_square_rows_agree():
    n = 0
    for X in MONOIDS_4:
        for flavor in Flavor:
            for g in grids_over(X, flavor, S):
                d = g.materialize()
                m = d.maps
                if not is_regular_pushout(m["f"], m["fp"], m["x"], m["y"]):
                    continue
                n += 1
                assert g.facts["upper-exact"] == g.facts["lower-exact"]
                verdicts = {v: g.verdict(v).conclusion_holds for v in Variant}
                assert all(verdicts.values())
    assert n > 50


def test_verdicts_monotone_in_hypotheses():
    for X in MONOIDS_3:
        for flavor in Flavor:
            for g in grids_over(X, flavor, S, phi_variants=("max", "min")):
                for variant in Variant:
                    base = g.verdict(variant)
                    for h in DROPPABLE:
                        if g.verdict(variant, [h]).conclusion_holds:
                            assert base.conclusion_holds


def test_equal_kernels_give_injective_factor():
    """g = t f with f, g special and K[f] = K[g] forces t injective, i.e. R[f] = R[g]."""
    n = 0
    for X in algebras_up_to(Kind.MONOID, 5):
        d = XData(X, S)
        e = X.constant
        special = [C for C in d.congruences if d.special(C)]
        for C, D in itertools.product(special, repeat=2):
            if C == D or not C.refines(D):
                continue
            if C.block_of(e).tolist() == D.block_of(e).tolist():
                n += 1
        assert n == 0
    # and a special quotient is the cokernel of its kernel
    for X in MONOIDS_4:
        for C in all_congruences(X):
            f = quotient_by_congruence(X, C).projection
            if is_sigma_special(f, S):
                assert C == unit_congruence(kernel_object(f)[1])


def test_normalized_upper_order_4_empty():
    stats, hits = sweep(Flavor.NORMALIZED, Variant.UPPER, S, Kind.MONOID, 4)
    assert hits == [] and stats.non_vacuous > 0


def test_identity_only_candidates_give_no_hits():
    one = terminal(Kind.MONOID)
    for flavor in Flavor:
        for variant in Variant:
            assert list(search_counterexamples(flavor, variant, S, algebras=[one])) == []


def test_search_kind_errors():
    with pytest.raises(AlgebraError, match="UNSUPPORTED_KIND"):
        list(search_counterexamples(Flavor.NORMALIZED, Variant.UPPER, SigmaClass.ACUPUNCTURING, Kind.QUANDLE, 2))
    with pytest.raises(AlgebraError, match="CLASS_KIND_MISMATCH"):
        list(search_counterexamples(Flavor.DENORMALIZED, Variant.UPPER, S, Kind.QUANDLE, 2))


def test_dropping_lower_exact_finds_counterexample():
    hit = next(search_counterexamples(Flavor.NORMALIZED, Variant.UPPER, S, Kind.MONOID, 4, drop=["lower-exact"]))
    assert hit.verdict.status is Status.FAILS and hit.verdict.witness
    d = hit.grid.materialize()
    assert verify_lemma(d, Variant.UPPER, ["lower-exact"]).status is Status.FAILS
