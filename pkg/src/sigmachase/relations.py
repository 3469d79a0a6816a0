"""Congruences, kernel pairs, quotients, pullbacks and direct images."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _kernels as K
from .algebra import (
    AlgebraError,
    FiniteAlgebra,
    Homomorphism,
    pair_name,
    product_algebra,
    subalgebra,
)


def _normalize(labels) -> np.ndarray:
    """Relabel blocks by order of first occurrence."""
    labels = np.asarray(labels, dtype=np.int64)
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.argsort(np.argsort(first))
    out = rank[inv].astype(np.int64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Congruence:
    """An operation-compatible partition of ``carrier``, one block id per element."""

    carrier: FiniteAlgebra
    blocks: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "blocks", _normalize(self.blocks))

    def __eq__(self, other):
        if not isinstance(other, Congruence):
            return NotImplemented
        return self.carrier == other.carrier and np.array_equal(self.blocks, other.blocks)

    def __hash__(self):
        return hash(self.blocks.tobytes())

    def __repr__(self):
        return f"Congruence({self.block_lists()})"

    @property
    def n_blocks(self) -> int:
        return int(self.blocks.max()) + 1

    def related(self, a: int, b: int) -> bool:
        return bool(self.blocks[a] == self.blocks[b])

    def block_of(self, a: int) -> np.ndarray:
        return np.nonzero(self.blocks == self.blocks[a])[0]

    def block_lists(self) -> list[list[int]]:
        return [np.nonzero(self.blocks == b)[0].tolist() for b in range(self.n_blocks)]

    def pairs(self) -> np.ndarray:
        """All related pairs, lexicographically sorted, as an ``(m, 2)`` array."""
        same = self.blocks[:, None] == self.blocks[None, :]
        return np.argwhere(same)

    def pair_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(map(tuple, self.pairs().tolist()))

    def refines(self, other: "Congruence") -> bool:
        """``self`` is contained in ``other``."""
        same = self.blocks[:, None] == self.blocks[None, :]
        other_same = other.blocks[:, None] == other.blocks[None, :]
        return bool((~same | other_same).all())

    @property
    def is_diagonal(self) -> bool:
        return self.n_blocks == self.carrier.order

    @property
    def is_indiscrete(self) -> bool:
        return self.n_blocks == 1

    @cached_property
    def relation(self) -> "RelationObject":
        return relation_object(self.carrier, self.pairs())


def make_congruence(X: FiniteAlgebra, blocks) -> Congruence:
    blocks = np.asarray(blocks, dtype=np.int64)
    if blocks.shape != (X.order,):
        raise AlgebraError("SHAPE_ERROR", "one block id per element expected")
    if not K.is_compatible(X.ops, _normalize(blocks)):
        raise AlgebraError("NOT_CONGRUENCE", "partition is not compatible with the operations")
    return Congruence(X, blocks)


def diagonal(X: FiniteAlgebra) -> Congruence:
    return Congruence(X, np.arange(X.order))


def indiscrete(X: FiniteAlgebra) -> Congruence:
    return Congruence(X, np.zeros(X.order, dtype=np.int64))


def kernel_pair(f: Homomorphism) -> Congruence:
    return Congruence(f.dom, f.map)


def congruence_generated(X: FiniteAlgebra, seed: Iterable[tuple[int, int]]) -> Congruence:
    """Least congruence containing the seed pairs (union-find plus saturation)."""
    labels = np.arange(X.order, dtype=np.int64)
    for a, b in seed:
        if not (0 <= a < X.order and 0 <= b < X.order):
            raise AlgebraError("SHAPE_ERROR", f"pair {(a, b)} out of range")
        la, lb = labels[a], labels[b]
        if la != lb:
            labels[labels == max(la, lb)] = min(la, lb)
    K.saturate_partition(X.ops, labels)
    return Congruence(X, labels)


def join(C: Congruence, D: Congruence) -> Congruence:
    X = C.carrier
    seed = [(a, b) for blocks in (C.blocks, D.blocks) for a, b in enumerate(np.unique(blocks, return_index=True)[1][blocks])]
    return congruence_generated(X, seed)


def meet(C: Congruence, D: Congruence) -> Congruence:
    return Congruence(C.carrier, C.blocks * (D.n_blocks) + D.blocks)


def compose_relations(P: Iterable[tuple[int, int]], Q: Iterable[tuple[int, int]]) -> frozenset:
    """``{(a, c) : a P b Q c}``."""
    by_first: dict[int, list[int]] = {}
    for b, c in Q:
        by_first.setdefault(b, []).append(c)
    return frozenset((a, c) for a, b in P for c in by_first.get(b, ()))


# --- relation objects -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RelationObject:
    """A reflexive relation on ``base`` realized as a subalgebra of base x base.

    ``d0``/``d1`` are the coordinate projections and ``s0`` the diagonal.
    """

    base: FiniteAlgebra
    pairs: np.ndarray
    algebra: FiniteAlgebra
    d0: Homomorphism
    d1: Homomorphism
    s0: Homomorphism

    def index(self, a: int, b: int) -> int:
        return self._lookup[(int(a), int(b))]

    @cached_property
    def _lookup(self) -> dict[tuple[int, int], int]:
        return {(int(a), int(b)): i for i, (a, b) in enumerate(self.pairs)}

    def __contains__(self, ab) -> bool:
        return (int(ab[0]), int(ab[1])) in self._lookup

    def pair_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self._lookup)


def relation_object(X: FiniteAlgebra, pairs) -> RelationObject:
    """The relation with the given pairs; they must contain the diagonal and be closed."""
    pairs = np.asarray(sorted({(int(a), int(b)) for a, b in pairs}), dtype=np.int64).reshape(-1, 2)
    n = X.order
    P = product_algebra(X, X).algebra
    codes = pairs[:, 0] * n + pairs[:, 1]
    if not set((np.arange(n) * (n + 1)).tolist()) <= set(codes.tolist()):
        raise AlgebraError("SHAPE_ERROR", "relation is not reflexive")
    try:
        R, inc = subalgebra(P, codes)
    except AlgebraError:
        raise AlgebraError("SHAPE_ERROR", "relation is not closed under the operations") from None
    R = R.renamed([pair_name(X.names[a], X.names[b]) for a, b in pairs])
    pos = {int(c): i for i, c in enumerate(codes)}
    d0 = Homomorphism(R, X, pairs[:, 0])
    d1 = Homomorphism(R, X, pairs[:, 1])
    s0 = Homomorphism(X, R, np.array([pos[i * (n + 1)] for i in range(n)]))
    return RelationObject(X, pairs, R, d0, d1, s0)


def is_transitive(pairs: frozenset) -> bool:
    return compose_relations(pairs, pairs) <= pairs


# --- kernels and quotients --------------------------------------------------


def _require_pointed(X: FiniteAlgebra):
    if not X.kind.pointed:
        raise AlgebraError("UNSUPPORTED_KIND", "kernels need a pointed kind")


def kernel_object(f: Homomorphism) -> tuple[FiniteAlgebra, Homomorphism]:
    """``K[f] = f^-1(constant)`` with its inclusion."""
    _require_pointed(f.dom)
    return subalgebra(f.dom, f.preimage(f.cod.constant))


@dataclass(frozen=True)
class Quotient:
    algebra: FiniteAlgebra
    projection: Homomorphism
    congruence: Congruence


def block_name(X: FiniteAlgebra, members: Sequence[int]) -> str:
    if len(members) == 1:
        return X.names[members[0]]
    return "[" + "|".join(X.names[i] for i in members) + "]"


def quotient_by_congruence(X: FiniteAlgebra, C: Congruence) -> Quotient:
    b = C.blocks
    reps = np.unique(b, return_index=True)[1]
    tabs = []
    for t in X.tables:
        induced = b[t[reps[:, None], reps[None, :]]]
        # every representative choice must agree
        if not np.array_equal(b[t], induced[b[:, None], b[None, :]]):
            raise AlgebraError("INTERNAL", "induced table is ambiguous")
        tabs.append(induced)
    names = [block_name(X, m) for m in C.block_lists()]
    const = int(b[X.constant]) if X.kind.pointed else None
    Q = FiniteAlgebra(X.kind, tuple(names), tuple(tabs), const)
    return Quotient(Q, Homomorphism(X, Q, b), C)


def unit_congruence(N_inclusion: Homomorphism) -> Congruence:
    X = N_inclusion.cod
    _require_pointed(X)
    return congruence_generated(X, [(int(n), X.constant) for n in N_inclusion.map])


def cokernel_of_subalgebra(k: Homomorphism) -> Homomorphism:
    """Quotient of ``k.cod`` by the congruence generated by ``{(n, unit)}``."""
    X = k.cod
    _require_pointed(X)
    if X.constant not in set(k.map.tolist()):
        raise AlgebraError("SHAPE_ERROR", "subalgebra must contain the constant")
    return quotient_by_congruence(X, unit_congruence(k)).projection


def factor_through(f: Homomorphism, q: Homomorphism) -> Homomorphism | None:
    """The ``t`` with ``t . q = f`` for surjective ``q``, or ``None`` if ``f`` does not factor."""
    m = np.full(q.cod.order, -1, dtype=np.int64)
    for x in range(q.dom.order):
        y = q.map[x]
        if m[y] < 0:
            m[y] = f.map[x]
        elif m[y] != f.map[x]:
            return None
    if (m < 0).any():
        return None
    return Homomorphism(q.cod, f.cod, m)


# --- direct images ----------------------------------------------------------


@dataclass(frozen=True)
class DirectImage:
    pairs: frozenset
    is_equivalence: bool
    congruence: Congruence | None
    witness: tuple[int, int, int] | None  # (a, b, c) with aRb, bRc, not aRc


def direct_image_relation(f: Homomorphism, R: Congruence) -> DirectImage:
    if not f.is_surjective:
        raise AlgebraError("NOT_SURJECTIVE", "direct image needs a surjection")
    P = R.pairs()
    img = frozenset(zip(f.map[P[:, 0]].tolist(), f.map[P[:, 1]].tolist()))
    closure = compose_relations(img, img)
    bad = sorted(closure - img)
    if not bad:
        Y = f.cod
        return DirectImage(img, True, congruence_generated(Y, img), None)
    a, c = bad[0]
    b = next(b for (x, b) in sorted(img) if x == a and (b, c) in img)
    return DirectImage(img, False, None, (a, b, c))


def nontransitive_direct_images(algebras: Iterable[FiniteAlgebra]) -> Iterator[tuple[Homomorphism, Congruence, DirectImage]]:
    """Every ``(f, R, f(R))`` with f a quotient map and f(R) not transitive.

    Quotients are taken up to the congruence they collapse, so each
    surjection out of X is visited once.
    """
    for X in algebras:
        lattice = all_congruences(X)
        for C in lattice:
            if C.n_blocks in (1, X.order):
                continue
            f = quotient_by_congruence(X, C).projection
            for R in lattice:
                d = direct_image_relation(f, R)
                if not d.is_equivalence:
                    yield f, R, d


# --- pullbacks --------------------------------------------------------------


@dataclass(frozen=True)
class PullbackSquare:
    f: Homomorphism
    g: Homomorphism
    apex: FiniteAlgebra
    p1: Homomorphism
    p2: Homomorphism
    pairs: np.ndarray

    def factor(self, a: Homomorphism, b: Homomorphism) -> Homomorphism:
        """The map into the apex induced by a cone ``(a, b)`` with ``f a = g b``."""
        if not np.array_equal(self.f.map[a.map], self.g.map[b.map]):
            raise AlgebraError("NOT_COMMUTING", "cone does not commute")
        lookup = {(int(x), int(y)): i for i, (x, y) in enumerate(self.pairs)}
        return Homomorphism(a.dom, self.apex, np.array([lookup[(int(x), int(y))] for x, y in zip(a.map, b.map)]))

    def index(self, x: int, y: int) -> int:
        return int(np.nonzero((self.pairs[:, 0] == x) & (self.pairs[:, 1] == y))[0][0])


def pullback_algebra(f: Homomorphism, g: Homomorphism) -> PullbackSquare:
    if f.dom.kind is not g.dom.kind:
        raise AlgebraError("KIND_MISMATCH", "pullback of different kinds")
    if not f.cod.same_structure(g.cod):
        raise AlgebraError("SHAPE_ERROR", "maps need a common codomain")
    X, Y = f.dom, g.dom
    prod = product_algebra(X, Y)
    xs, ys = np.nonzero(f.map[:, None] == g.map[None, :])
    codes = xs * Y.order + ys
    P, inc = subalgebra(prod.algebra, codes)
    pairs = np.stack([xs, ys], axis=1)
    return PullbackSquare(f, g, P, Homomorphism(P, X, xs), Homomorphism(P, Y, ys), pairs)


# --- congruence lattices ----------------------------------------------------


def _set_partitions(n: int) -> Iterator[np.ndarray]:
    """Restricted growth strings of length ``n``."""
    a = [0] * n

    def rec(i, m):
        if i == n:
            yield np.array(a, dtype=np.int64)
            return
        for v in range(m + 2):
            a[i] = v
            yield from rec(i + 1, max(m, v))

    if n == 0:
        return
    yield from rec(1, 0)


def all_congruences_bruteforce(X: FiniteAlgebra) -> list[Congruence]:
    """Every compatible partition, by testing all set partitions (test oracle, small n)."""
    ops = X.ops
    return [Congruence(X, p) for p in _set_partitions(X.order) if K.is_compatible(ops, p)]


def all_congruences(X: FiniteAlgebra) -> list[Congruence]:
    """Every congruence as a join of principal ones, sorted by block vector."""
    n = X.order
    principal = {}
    for a in range(n):
        for b in range(a + 1, n):
            C = congruence_generated(X, [(a, b)])
            principal.setdefault(C.blocks.tobytes(), C)
    found = {diagonal(X).blocks.tobytes(): diagonal(X)}
    frontier = list(found.values())
    gens = list(principal.values())
    while frontier:
        nxt = []
        for C in frontier:
            for P in gens:
                if P.refines(C):
                    continue
                J = join(C, P)
                key = J.blocks.tobytes()
                if key not in found:
                    found[key] = J
                    nxt.append(J)
        frontier = nxt
    return [found[k] for k in sorted(found, key=lambda k: (np.frombuffer(k, dtype=np.int64).max(), k))]
