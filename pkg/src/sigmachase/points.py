"""Points (split epimorphisms) and the classes they are sorted into."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import _kernels as K
from .algebra import (
    AlgebraError,
    FiniteAlgebra,
    Homomorphism,
    Kind,
    compose,
    is_jointly_extremally_epimorphic,
    make_homomorphism,
    terminal_map,
)
from .morphisms import find_homomorphisms
from .relations import (
    Congruence,
    RelationObject,
    all_congruences,
    kernel_pair,
    pullback_algebra,
    quotient_by_congruence,
)


class SigmaClass(enum.Enum):
    SCHREIER = "schreier"
    WEAKLY_SCHREIER = "weakly-schreier"
    PUNCTURING = "puncturing"
    ACUPUNCTURING = "acupuncturing"

    def accepts(self, kind: Kind) -> bool:
        if self in (SigmaClass.PUNCTURING, SigmaClass.ACUPUNCTURING):
            return kind is Kind.QUANDLE
        return kind.pointed

    @property
    def bijective(self) -> bool:
        return self in (SigmaClass.SCHREIER, SigmaClass.ACUPUNCTURING)


def default_class(kind: Kind) -> SigmaClass:
    return SigmaClass.ACUPUNCTURING if kind is Kind.QUANDLE else SigmaClass.SCHREIER


@dataclass(frozen=True)
class Point:
    f: Homomorphism
    s: Homomorphism
    retraction: np.ndarray | None = None

    def __post_init__(self):
        if not np.array_equal(self.f.map[self.s.map], np.arange(self.f.cod.order)):
            raise AlgebraError("NOT_SPLIT", "f . s is not the identity")

    @property
    def X(self) -> FiniteAlgebra:
        return self.f.dom

    @property
    def Y(self) -> FiniteAlgebra:
        return self.f.cod


def make_point(f: Homomorphism, s: Homomorphism) -> Point:
    make_homomorphism(f.dom, f.cod, f.map)
    make_homomorphism(s.dom, s.cod, s.map)
    return Point(f, s)


@dataclass(frozen=True)
class ClassificationVerdict:
    in_class: bool
    cls: SigmaClass
    retraction: np.ndarray | None = None  # Schreier retraction q, values in X
    certificates: dict | None = None  # fiber b -> images of mu_b
    violation: dict | None = None  # {"fiber": b, "images": [...], "reason": str}

    def __bool__(self) -> bool:
        return self.in_class


def _mu_images(p: Point, cls: SigmaClass) -> Iterator[tuple[int, np.ndarray, np.ndarray, np.ndarray]]:
    """Per fiber ``b``: (b, domain of mu_b, images, target fiber)."""
    X = p.X
    t = X.point_op
    f, s = p.f.map, p.s.map
    if cls in (SigmaClass.PUNCTURING, SigmaClass.ACUPUNCTURING):
        for b in range(p.Y.order):
            fiber = np.nonzero(f == b)[0]
            yield b, fiber, t[s[b], fiber], fiber
    else:
        kernel = np.nonzero(f == p.Y.constant)[0]
        for b in range(p.Y.order):
            fiber = np.nonzero(f == b)[0]
            yield b, kernel, t[kernel, s[b]], fiber


def classify_point(p: Point, cls: SigmaClass) -> ClassificationVerdict:
    """Decide membership of ``p`` in ``cls``.

    For SCHREIER the retraction is found by solving ``k * s(f(x)) = x`` in
    the kernel for every ``x``; exactly one solution each is required, and
    the two defining identities are then re-checked on the assembled ``q``.
    """
    X = p.X
    if not cls.accepts(X.kind):
        raise AlgebraError("CLASS_KIND_MISMATCH", f"{cls.value} on {X.kind.value}")
    if cls is SigmaClass.SCHREIER:
        t = X.point_op
        kmask = p.f.map == p.Y.constant
        sf = p.s.map[p.f.map]
        counts, q = K.schreier_solutions(t, kmask, sf)
        bad = np.nonzero(counts != 1)[0]
        if len(bad):
            x = int(bad[0])
            b = int(p.f.map[x])
            kernel = np.nonzero(kmask)[0]
            return ClassificationVerdict(
                False,
                cls,
                violation={
                    "fiber": b,
                    "element": x,
                    "solutions": int(counts[x]),
                    "images": t[kernel, p.s.map[b]].tolist(),
                    "reason": "no solution" if counts[x] == 0 else "several solutions",
                },
            )
        rep = verify_retraction_identities(Point(p.f, p.s, q), extended=False)
        if not rep.ok:
            raise AlgebraError("INTERNAL", f"retraction identities fail: {rep.failures()}")
        return ClassificationVerdict(True, cls, retraction=q)
    certs = {}
    for b, dom, img, fiber in _mu_images(p, cls):
        hit = set(img.tolist())
        ok = hit == set(fiber.tolist())
        if ok and cls.bijective:
            ok = len(hit) == len(dom)
        if not ok:
            return ClassificationVerdict(
                False,
                cls,
                violation={
                    "fiber": b,
                    "images": img.tolist(),
                    "reason": "not surjective" if hit != set(fiber.tolist()) else "not injective",
                },
            )
        certs[b] = img.tolist()
    return ClassificationVerdict(True, cls, certificates=certs)


def schreier_point(p: Point) -> Point:
    """``p`` with its Schreier retraction attached; raises NOT_SCHREIER otherwise."""
    v = classify_point(p, SigmaClass.SCHREIER)
    if not v:
        raise AlgebraError("NOT_SCHREIER", str(v.violation))
    return Point(p.f, p.s, v.retraction)


# --- retraction identities --------------------------------------------------


@dataclass
class IdentityReport:
    results: dict = field(default_factory=dict)  # name -> (checked, first witness or None)

    @property
    def ok(self) -> bool:
        return all(w is None for _, w in self.results.values())

    def failures(self) -> dict:
        return {k: w for k, (_, w) in self.results.items() if w is not None}


def _first_true(mask: np.ndarray) -> tuple | None:
    idx = np.argwhere(mask)
    return tuple(int(i) for i in idx[0]) if len(idx) else None


def verify_retraction_identities(p: Point, extended: bool = True) -> IdentityReport:
    """Check the Schreier retraction identities on every tuple.

    Always: ``x = q(x) s(f(x))`` and ``q(k s(b)) = k``. With ``extended``
    also ``q(x x') = q(x) q(sf(x) q(x'))`` and ``q(s(y) k) s(y) = s(y) k``.
    """
    if p.retraction is None:
        raise AlgebraError("NO_RETRACTION", "point has no retraction")
    t = p.X.point_op
    q = np.asarray(p.retraction)
    f, s = p.f.map, p.s.map
    n = p.X.order
    kernel = np.nonzero(f == p.Y.constant)[0]
    ys = np.arange(p.Y.order)
    rep = IdentityReport()
    x = np.arange(n)
    sf = s[f]
    rep.results["x = q(x) s(f(x))"] = (n, _first_true(t[q, sf] != x))
    ks = t[kernel[:, None], s[None, :]]  # k * s(b)
    w = _first_true(q[ks] != kernel[:, None])
    rep.results["q(k s(b)) = k"] = (ks.size, None if w is None else (int(kernel[w[0]]), int(w[1])))
    inker = np.zeros(n, dtype=bool)
    inker[kernel] = True
    rep.results["q lands in the kernel"] = (n, _first_true(~inker[q]))
    if extended:
        lhs = q[t]  # q(x x')
        inner = q[t[sf[:, None], q[None, :]]]  # q(sf(x) q(x'))
        rhs = t[q[:, None], inner]
        rep.results["q(x x') = q(x) q(sf(x) q(x'))"] = (n * n, _first_true(lhs != rhs))
        syk = t[s[:, None], kernel[None, :]]  # s(y) k
        lhs2 = t[q[syk], s[:, None]]
        w2 = _first_true(lhs2 != syk)
        rep.results["q(s(y) k) s(y) = s(y) k"] = (syk.size, None if w2 is None else (int(ys[w2[0]]), int(kernel[w2[1]])))
    return rep


# --- special morphisms and objects -----------------------------------------


def kernel_pair_point(f: Homomorphism) -> tuple[RelationObject, Point]:
    R = kernel_pair(f).relation
    return R, Point(R.d0, R.s0)


def relation_point(C: Congruence) -> Point:
    R = C.relation
    return Point(R.d0, R.s0)


def is_sigma_special(f: Homomorphism, cls: SigmaClass) -> ClassificationVerdict:
    """Classify the kernel-pair point ``(d0, s0)`` of ``f`` in ``cls``."""
    if not cls.accepts(f.dom.kind):
        raise AlgebraError("CLASS_KIND_MISMATCH", f"{cls.value} on {f.dom.kind.value}")
    _, p = kernel_pair_point(f)
    return classify_point(p, cls)


def is_sigma_congruence(C: Congruence, cls: SigmaClass) -> bool:
    return bool(classify_point(relation_point(C), cls))


def special_congruence_fast(C: Congruence, cls: SigmaClass) -> bool:
    """Same verdict as ``is_sigma_congruence`` without building the pair algebra.

    For the kernel pair point the fiber over ``x`` is the block of ``x`` and
    ``mu_x`` is ``k -> k x`` (monoid kinds, ``k`` in the block of the
    constant) or ``b -> x < b`` (quandles).
    """
    X = C.carrier
    t = X.point_op
    blocks = C.blocks
    if cls in (SigmaClass.PUNCTURING, SigmaClass.ACUPUNCTURING):
        # surjective onto a finite fiber is bijective, so both classes agree
        for x in range(X.order):
            fiber = np.nonzero(blocks == blocks[x])[0]
            if set(t[x, fiber].tolist()) != set(fiber.tolist()):
                return False
        return True
    unit_block = np.nonzero(blocks == blocks[X.constant])[0]
    for x in range(X.order):
        fiber = np.nonzero(blocks == blocks[x])[0]
        img = t[unit_block, x]
        if set(img.tolist()) != set(fiber.tolist()):
            return False
        if cls is SigmaClass.SCHREIER and len(set(img.tolist())) != len(unit_block):
            return False
    return True


def is_sigma_special_object(X: FiniteAlgebra, cls: SigmaClass) -> bool:
    return bool(is_sigma_special(terminal_map(X), cls))


def is_group(X: FiniteAlgebra) -> bool:
    t = X.point_op
    e = X.constant
    return bool(((t == e).any(axis=1) & (t == e).any(axis=0)).all())


def is_latin(Q: FiniteAlgebra) -> bool:
    t = Q.lhd
    n = Q.order
    rows = all(len(set(r.tolist())) == n for r in t)
    cols = all(len(set(c.tolist())) == n for c in t.T)
    return rows and cols


# --- regular pushouts -------------------------------------------------------


@dataclass(frozen=True)
class RegularPushoutVerdict:
    regular: bool
    is_pushout: bool
    missed: tuple[int, int] | None  # pullback element (y, x') not hit
    R_x_surjective: bool  # R[f] -> R[f']
    R_f_surjective: bool  # R[x] -> R[y]

    def __bool__(self):
        return self.regular


def _induced_on_pairs(h: Homomorphism, C: Congruence, D: Congruence) -> tuple[frozenset, frozenset]:
    P = C.pairs()
    img = frozenset(zip(h.map[P[:, 0]].tolist(), h.map[P[:, 1]].tolist()))
    return img, D.pair_set()


def is_regular_pushout(f: Homomorphism, fp: Homomorphism, x: Homomorphism, y: Homomorphism) -> RegularPushoutVerdict:
    """The square ``fp . x = y . f`` of surjections, with X on top-left."""
    for m in (f, fp, x, y):
        if not m.is_surjective:
            raise AlgebraError("NOT_SURJECTIVE", repr(m))
    if not np.array_equal(fp.map[x.map], y.map[f.map]):
        raise AlgebraError("NOT_COMMUTING", "f' x != y f")
    pb = pullback_algebra(y, fp)
    hit = set(zip(f.map.tolist(), x.map.tolist()))
    missed = [tuple(map(int, pr)) for pr in pb.pairs if tuple(map(int, pr)) not in hit]
    Rf, Rfp = kernel_pair(f), kernel_pair(fp)
    Rx, Ry = kernel_pair(x), kernel_pair(y)
    img, target = _induced_on_pairs(x, Rf, Rfp)
    rx_onto = img == target
    img2, target2 = _induced_on_pairs(f, Rx, Ry)
    rf_onto = img2 == target2
    from .relations import join

    pushout = kernel_pair(compose(fp, x)) == join(Rf, Rx)
    return RegularPushoutVerdict(not missed, pushout, missed[0] if missed else None, rx_onto, rf_onto)


def irregular_pushouts(algebras: Sequence[FiniteAlgebra]) -> Iterator[tuple[tuple[Homomorphism, ...], RegularPushoutVerdict]]:
    """Squares ``X -> X/F, X/T -> X/(F v T)`` that are pushouts but not regular.

    Every pushout of two surjections out of X has this shape, so the scan
    over pairs of congruences is complete up to isomorphism.
    """
    from .relations import all_congruences, join, quotient_by_congruence

    for X in algebras:
        lattice = all_congruences(X)
        for F in lattice:
            f = quotient_by_congruence(X, F).projection
            for T in lattice:
                if T.refines(F) or F.refines(T):
                    continue
                x = quotient_by_congruence(X, T).projection
                G = join(F, T)
                y = _factor(f, G)
                fp = _factor(x, G)
                v = is_regular_pushout(f, fp, x, y)
                if v.is_pushout and not v.regular:
                    yield (f, fp, x, y), v


def _factor(q: Homomorphism, G: Congruence) -> Homomorphism:
    """The map ``cod(q) -> X/G`` through which ``X -> X/G`` factors."""
    from .relations import quotient_by_congruence

    g = quotient_by_congruence(q.dom, G).projection
    m = np.zeros(q.cod.order, dtype=np.int64)
    m[q.map] = g.map
    return make_homomorphism(q.cod, g.cod, m)


# --- strong points ----------------------------------------------------------


def strong_point_check(p: Point, g: Homomorphism) -> bool:
    """Pull ``p`` back along ``g: Y' -> Y`` and test ``(x-bar, s)`` for joint generation."""
    if g.dom.kind is not p.X.kind:
        raise AlgebraError("KIND_MISMATCH", "pullback base of another kind")
    pb = pullback_algebra(p.f, g)
    return is_jointly_extremally_epimorphic([pb.p1, p.s])


# --- instance generators ----------------------------------------------------


def sections(f: Homomorphism) -> Iterator[Homomorphism]:
    """Every homomorphic section of the surjection ``f``."""
    allowed = np.zeros((f.cod.order, f.dom.order), dtype=bool)
    allowed[f.map, np.arange(f.dom.order)] = True
    yield from find_homomorphisms(f.cod, f.dom, allowed=allowed)


def points_on(X: FiniteAlgebra, congruences: Sequence[Congruence] | None = None) -> Iterator[Point]:
    """Every point with domain ``X``, codomain the quotients of ``X``."""
    for C in congruences if congruences is not None else all_congruences(X):
        f = quotient_by_congruence(X, C).projection
        for s in sections(f):
            yield Point(f, s)


# --- class property probes --------------------------------------------------


class ClassProperty(enum.Enum):
    TWO_REGULAR = "two-regular"
    EQUI_CONSISTENT = "equi-consistent"
    LIMIT_CLOSURE = "limit-closure"


@dataclass(frozen=True)
class TwoRegularInstance:
    """A levelwise surjective morphism of points ``(x, y): (f, s) -> (f', s')``."""

    p: Point
    q: Point
    x: Homomorphism
    y: Homomorphism


@dataclass(frozen=True)
class EquiConsistentInstance:
    """A split epimorphism ``(g, t)`` with congruences R on X and S on Y it restricts to."""

    gt: Point
    R: Congruence
    S: Congruence


@dataclass(frozen=True)
class LimitClosureInstance:
    p1: Point
    p2: Point


@dataclass(frozen=True)
class ProbeVerdict:
    prop: ClassProperty
    hypotheses: dict
    conclusion: bool | None  # None when a hypothesis fails

    @property
    def applicable(self) -> bool:
        return all(self.hypotheses.values())

    @property
    def holds(self) -> bool:
        """The implication on this instance (vacuously true when not applicable)."""
        return not self.applicable or bool(self.conclusion)


def R_point(inst: TwoRegularInstance) -> Point:
    """``(R(f), R(s)): R[x] -> R[y]`` induced on kernel pairs."""
    Rx = kernel_pair(inst.x).relation
    Ry = kernel_pair(inst.y).relation
    f, s = inst.p.f.map, inst.p.s.map
    Rf = np.array([Ry.index(f[a], f[b]) for a, b in Rx.pairs])
    Rs = np.array([Rx.index(s[a], s[b]) for a, b in Ry.pairs])
    return Point(Homomorphism(Rx.algebra, Ry.algebra, Rf), Homomorphism(Ry.algebra, Rx.algebra, Rs))


def _check_two_regular_shape(inst: TwoRegularInstance):
    p, q, x, y = inst.p, inst.q, inst.x, inst.y
    if not (x.is_surjective and y.is_surjective):
        raise AlgebraError("MALFORMED_INSTANCE", "x and y must be surjective")
    if not np.array_equal(q.f.map[x.map], y.map[p.f.map]):
        raise AlgebraError("MALFORMED_INSTANCE", "f' x != y f")
    if not np.array_equal(x.map[p.s.map], q.s.map[y.map]):
        raise AlgebraError("MALFORMED_INSTANCE", "x s != s' y")


def k0_point(inst: EquiConsistentInstance) -> Point:
    """Restriction of ``(g-bar, t-bar)`` to the kernels of ``d0``: the unit blocks."""
    g, t = inst.gt.f, inst.gt.s
    X, Y = g.dom, g.cod
    from .algebra import subalgebra

    KR, incR = subalgebra(X, inst.R.block_of(X.constant))
    KS, incS = subalgebra(Y, inst.S.block_of(Y.constant))
    posR = {int(v): i for i, v in enumerate(incR.map)}
    posS = {int(v): i for i, v in enumerate(incS.map)}
    gk = np.array([posS[int(g.map[v])] for v in incR.map])
    tk = np.array([posR[int(t.map[v])] for v in incS.map])
    return Point(Homomorphism(KR, KS, gk), Homomorphism(KS, KR, tk))


def bar_point(inst: EquiConsistentInstance) -> Point:
    """``(g-bar, t-bar): R -> S`` on the pair algebras."""
    g, t = inst.gt.f.map, inst.gt.s.map
    R, S = inst.R.relation, inst.S.relation
    gb = np.array([S.index(g[a], g[b]) for a, b in R.pairs])
    tb = np.array([R.index(t[a], t[b]) for a, b in S.pairs])
    return Point(Homomorphism(R.algebra, S.algebra, gb), Homomorphism(S.algebra, R.algebra, tb))


def fiber_product_point(p1: Point, p2: Point) -> Point:
    pb = pullback_algebra(p1.f, p2.f)
    f = Homomorphism(pb.apex, p1.Y, p1.f.map[pb.p1.map])
    s = pb.factor(p1.s, p2.s)
    return Point(f, s)


def probe_class_property(prop: ClassProperty, instance, cls: SigmaClass) -> ProbeVerdict:
    """Evaluate a class property's implication on one instance."""
    if prop is ClassProperty.TWO_REGULAR:
        if not isinstance(instance, TwoRegularInstance):
            raise AlgebraError("MALFORMED_INSTANCE", "expected a morphism of points")
        _check_two_regular_shape(instance)
        hyp = {
            "(f,s) in class": bool(classify_point(instance.p, cls)),
            "(R(f),R(s)) in class": bool(classify_point(R_point(instance), cls)),
        }
        concl = bool(classify_point(instance.q, cls)) if all(hyp.values()) else None
        return ProbeVerdict(prop, hyp, concl)
    if prop is ClassProperty.EQUI_CONSISTENT:
        if not isinstance(instance, EquiConsistentInstance):
            raise AlgebraError("MALFORMED_INSTANCE", "expected a split epimorphism of congruences")
        g, t = instance.gt.f, instance.gt.s
        Rp = instance.R.pair_set()
        Sp = instance.S.pair_set()
        if not all((int(g.map[a]), int(g.map[b])) in Sp for a, b in Rp):
            raise AlgebraError("MALFORMED_INSTANCE", "g does not map R into S")
        if not all((int(t.map[a]), int(t.map[b])) in Rp for a, b in Sp):
            raise AlgebraError("MALFORMED_INSTANCE", "t does not map S into R")
        hyp = {
            "R in class": bool(classify_point(relation_point(instance.R), cls)),
            "(g,t) in class": bool(classify_point(instance.gt, cls)),
            "(K0(g),K0(t)) in class": bool(classify_point(k0_point(instance), cls)),
        }
        concl = bool(classify_point(bar_point(instance), cls)) if all(hyp.values()) else None
        return ProbeVerdict(prop, hyp, concl)
    if prop is ClassProperty.LIMIT_CLOSURE:
        if not isinstance(instance, LimitClosureInstance):
            raise AlgebraError("MALFORMED_INSTANCE", "expected two points")
        if not instance.p1.Y.same_structure(instance.p2.Y):
            raise AlgebraError("MALFORMED_INSTANCE", "points over different bases")
        hyp = {
            "p1 in class": bool(classify_point(instance.p1, cls)),
            "p2 in class": bool(classify_point(instance.p2, cls)),
        }
        concl = bool(classify_point(fiber_product_point(instance.p1, instance.p2), cls)) if all(hyp.values()) else None
        return ProbeVerdict(prop, hyp, concl)
    raise AlgebraError("MALFORMED_INSTANCE", f"unknown property {prop}")


def two_regular_instances(X: FiniteAlgebra, cls: SigmaClass | None = None) -> Iterator[TwoRegularInstance]:
    """Every levelwise surjective morphism of points out of a point on ``X``.

    With ``cls`` only domains ``(f, s)`` in the class are produced.
    Codomains are quotients: ``x`` by a congruence T on X, ``y`` by a
    congruence G on Y with ``f(T) <= G <= s^-1(T)``.
    """
    congs = all_congruences(X)
    for p in points_on(X, congs):
        if cls is not None and not classify_point(p, cls):
            continue
        Y = p.Y
        congs_Y = all_congruences(Y)
        f, s = p.f.map, p.s.map
        for T in congs:
            qx = quotient_by_congruence(X, T)
            Tset = T.pair_set()
            fT = {(int(f[a]), int(f[b])) for a, b in Tset}
            for G in congs_Y:
                Gset = G.pair_set()
                if not fT <= Gset:
                    continue
                if not all(T.related(s[a], s[b]) for a, b in Gset):
                    continue
                qy = quotient_by_congruence(Y, G)
                fp = np.zeros(qx.algebra.order, dtype=np.int64)
                fp[qx.projection.map] = qy.projection.map[f]
                sp = np.zeros(qy.algebra.order, dtype=np.int64)
                sp[qy.projection.map] = qx.projection.map[s]
                q = Point(Homomorphism(qx.algebra, qy.algebra, fp), Homomorphism(qy.algebra, qx.algebra, sp))
                yield TwoRegularInstance(p, q, qx.projection, qy.projection)


def equi_consistent_instances(X: FiniteAlgebra, cls: SigmaClass | None = None) -> Iterator[EquiConsistentInstance]:
    """Every split epimorphism of congruences with domain a congruence on ``X``.

    With ``cls``, ``(g, t)`` and ``R`` are restricted to the class.
    """
    congs = all_congruences(X)
    rels = [R for R in congs if cls is None or special_congruence_fast(R, cls)]
    for gt in points_on(X, congs):
        if cls is not None and not classify_point(gt, cls):
            continue
        g, t = gt.f.map, gt.s.map
        congs_Y = all_congruences(gt.Y)
        for R in rels:
            gR = {(int(g[a]), int(g[b])) for a, b in R.pair_set()}
            for S in congs_Y:
                Sset = S.pair_set()
                if not gR <= Sset:
                    continue
                if not all(R.related(t[a], t[b]) for a, b in Sset):
                    continue
                yield EquiConsistentInstance(gt, R, S)


def limit_closure_instances(X: FiniteAlgebra, cls: SigmaClass | None = None) -> Iterator[LimitClosureInstance]:
    """Pairs of points on X over a common quotient, optionally both in ``cls``."""
    from .relations import all_congruences, quotient_by_congruence

    for C in all_congruences(X):
        f = quotient_by_congruence(X, C).projection
        pts = [Point(f, s) for s in sections(f)]
        if cls is not None:
            pts = [p for p in pts if classify_point(p, cls)]
        for p1, p2 in itertools.combinations_with_replacement(pts, 2):
            yield LimitClosureInstance(p1, p2)


def probe_instances(prop: ClassProperty, X: FiniteAlgebra, cls: SigmaClass | None = None):
    gen = {
        ClassProperty.TWO_REGULAR: two_regular_instances,
        ClassProperty.EQUI_CONSISTENT: equi_consistent_instances,
        ClassProperty.LIMIT_CLOSURE: limit_closure_instances,
    }[prop]
    return gen(X, cls)
