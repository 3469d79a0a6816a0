"""Exhaustive enumeration of small monoids, semirings and quandles."""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator

import numpy as np

from . import _kernels as K
from .algebra import AlgebraError, FiniteAlgebra, Kind, check_axioms
from .morphisms import permutations_fixing

DEFAULT_BOUND = 6


def _fill(enumerator, n: int) -> np.ndarray:
    cap = 1024
    while True:
        out = np.empty((cap, n, n), dtype=np.int64)
        count = enumerator(n, out)
        if count >= 0:
            return out[:count]
        cap *= 4


@lru_cache(maxsize=None)
def _monoid_tables(n: int) -> np.ndarray:
    return _fill(K.enumerate_monoid_tables, n)


@lru_cache(maxsize=None)
def _quandle_tables(n: int) -> np.ndarray:
    return _fill(K.enumerate_quandle_tables, n)


def _semiring_partial_ok(add: np.ndarray, mul: np.ndarray, known: np.ndarray) -> bool:
    """Associativity of ``mul`` and both distributive laws on fully known triples."""
    n = len(add)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if known[a, b] and known[b, c]:
                    ab, bc = mul[a, b], mul[b, c]
                    if known[ab, c] and known[a, bc] and mul[ab, c] != mul[a, bc]:
                        return False
                if known[a, b] and known[a, c]:
                    s = add[b, c]
                    if known[a, s] and mul[a, s] != add[mul[a, b], mul[a, c]]:
                        return False
                if known[a, c] and known[b, c]:
                    s = add[a, b]
                    if known[s, c] and mul[s, c] != add[mul[a, c], mul[b, c]]:
                        return False
    return True


@lru_cache(maxsize=None)
def _semiring_tables(n: int) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
    adds = [t for t in _monoid_tables(n) if (t == t.T).all()]
    free = [(a, b) for a in range(1, n) for b in range(1, n)]
    out = []
    for add in adds:
        mul = np.zeros((n, n), dtype=np.int64)
        known = np.zeros((n, n), dtype=bool)
        known[0, :] = known[:, 0] = True

        def rec(k):
            if k == len(free):
                if check_axioms(Kind.SEMIRING, (add, mul), 0) is None:
                    out.append((add.copy(), mul.copy()))
                return
            a, b = free[k]
            known[a, b] = True
            for v in range(n):
                mul[a, b] = v
                if _semiring_partial_ok(add, mul, known):
                    rec(k + 1)
            known[a, b] = False
            mul[a, b] = 0

        rec(0)
    return tuple(out)


def _raw(kind: Kind, n: int) -> Iterator[FiniteAlgebra]:
    names = tuple(map(str, range(n)))
    if kind is Kind.MONOID:
        for t in _monoid_tables(n):
            yield FiniteAlgebra(kind, names, (t,), 0)
    elif kind is Kind.QUANDLE:
        for t in _quandle_tables(n):
            yield FiniteAlgebra(kind, names, (t,))
    else:
        for add, mul in _semiring_tables(n):
            yield FiniteAlgebra(kind, names, (add, mul), 0)


def _raw_tables(kind: Kind, n: int):
    if kind is Kind.MONOID:
        return [t[None] for t in _monoid_tables(n)]
    if kind is Kind.QUANDLE:
        return [t[None] for t in _quandle_tables(n)]
    return [np.stack(pair) for pair in _semiring_tables(n)]


@lru_cache(maxsize=None)
def _representatives(kind: Kind, n: int) -> tuple[FiniteAlgebra, ...]:
    perms = permutations_fixing(n, 0 if kind.pointed else None)
    seen: dict[bytes, np.ndarray] = {}
    for tables in _raw_tables(kind, n):
        best, _ = K.canonical_tables(np.ascontiguousarray(tables), perms)
        seen.setdefault(best.tobytes(), best)
    names = tuple(map(str, range(n)))
    const = 0 if kind.pointed else None
    return tuple(FiniteAlgebra(kind, names, tuple(seen[k]), const) for k in sorted(seen))


def enumerate_algebras(kind: Kind, n: int, up_to_iso: bool = False, bound: int = DEFAULT_BOUND) -> Iterator[FiniteAlgebra]:
    """Every algebra of ``kind`` on ``n`` points.

    Pointed kinds have their constant at index 0. With ``up_to_iso`` one
    representative per isomorphism class is produced, in canonical
    (lexicographically least table) form, sorted by that form.
    """
    if n < 1:
        raise AlgebraError("SHAPE_ERROR", "order must be positive")
    if n > bound:
        raise AlgebraError("BOUND_EXCEEDED", f"order {n} > bound {bound}")
    if kind is Kind.SEMIRING and n > 4:
        raise AlgebraError("BOUND_EXCEEDED", "semiring enumeration is capped at order 4")
    if up_to_iso:
        yield from _representatives(kind, n)
    else:
        yield from _raw(kind, n)


def algebras_up_to(kind: Kind, max_order: int, bound: int = DEFAULT_BOUND) -> list[FiniteAlgebra]:
    """Isomorphism-class representatives of every order from 1 to ``max_order``."""
    out = []
    for n in range(1, max_order + 1):
        out.extend(enumerate_algebras(kind, n, up_to_iso=True, bound=bound))
    return out
