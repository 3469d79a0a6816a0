"""Searching for homomorphisms and isomorphisms between finite algebras."""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterator

import numpy as np

from . import _kernels as K
from .algebra import FiniteAlgebra, Homomorphism


def _propagate(A_ops: np.ndarray, B_ops: np.ndarray, m: np.ndarray, allowed: np.ndarray | None, injective: bool):
    """Force every image determined by already assigned elements.

    Returns the extended assignment or ``None`` on a contradiction.
    """
    m = m.copy()
    while True:
        idx = np.nonzero(m >= 0)[0]
        img = m[idx]
        targets = A_ops[:, idx[:, None], idx[None, :]].ravel()
        values = B_ops[:, img[:, None], img[None, :]].ravel()
        cur = m[targets]
        if ((cur >= 0) & (cur != values)).any():
            return None
        fresh = cur < 0
        if not fresh.any():
            break
        t, v = targets[fresh], values[fresh]
        order = np.lexsort((v, t))
        t, v = t[order], v[order]
        first = np.ones(len(t), dtype=bool)
        first[1:] = t[1:] != t[:-1]
        # the same target forced to two values
        same_t = ~first
        if (v[same_t] != v[np.nonzero(same_t)[0] - 1]).any():
            return None
        t, v = t[first], v[first]
        if allowed is not None and not allowed[t, v].all():
            return None
        m[t] = v
    if injective:
        assigned = m[m >= 0]
        if len(np.unique(assigned)) != len(assigned):
            return None
    return m


def find_homomorphisms(
    A: FiniteAlgebra,
    B: FiniteAlgebra,
    allowed: np.ndarray | None = None,
    injective: bool = False,
    fixed: dict[int, int] | None = None,
) -> Iterator[Homomorphism]:
    """Every homomorphism ``A -> B`` with ``allowed[a, b]`` true for each ``a -> b``.

    Branches only on elements not forced by products of assigned ones.
    """
    if A.kind is not B.kind:
        return
    n = A.order
    start = np.full(n, -1, dtype=np.int64)
    if A.kind.pointed:
        start[A.constant] = B.constant
    for a, b in (fixed or {}).items():
        if start[a] >= 0 and start[a] != b:
            return
        start[a] = b
    if allowed is not None:
        allowed = np.asarray(allowed, dtype=bool)
        assigned = np.nonzero(start >= 0)[0]
        if not allowed[assigned, start[assigned]].all():
            return
    A_ops, B_ops = A.ops, B.ops

    def search(m):
        m = _propagate(A_ops, B_ops, m, allowed, injective)
        if m is None:
            return
        free = np.nonzero(m < 0)[0]
        if len(free) == 0:
            yield Homomorphism(A, B, m)
            return
        # branch on the free element with fewest candidates
        if allowed is not None:
            counts = allowed[free].sum(axis=1)
            x = int(free[np.argmin(counts)])
            cands = np.nonzero(allowed[x])[0]
        else:
            x = int(free[0])
            cands = range(B.order)
        used = set(m[m >= 0].tolist()) if injective else ()
        for v in cands:
            if injective and int(v) in used:
                continue
            m2 = m.copy()
            m2[x] = v
            yield from search(m2)

    yield from search(start)


def find_isomorphism(A: FiniteAlgebra, B: FiniteAlgebra, allowed: np.ndarray | None = None) -> Homomorphism | None:
    if A.kind is not B.kind or A.order != B.order:
        return None
    for h in find_homomorphisms(A, B, allowed=allowed, injective=True):
        return h
    return None


def are_isomorphic(A: FiniteAlgebra, B: FiniteAlgebra) -> bool:
    return find_isomorphism(A, B) is not None


# --- canonical forms --------------------------------------------------------


@lru_cache(maxsize=None)
def permutations_fixing(n: int, fixed: int | None) -> np.ndarray:
    """All permutations of ``range(n)``, restricted to ``p[fixed] == 0`` when given."""
    if fixed is None:
        perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    else:
        rest = [i for i in range(n) if i != fixed]
        rows = []
        for tail in itertools.permutations(range(1, n)):
            p = [0] * n
            p[fixed] = 0
            for i, v in zip(rest, tail):
                p[i] = v
            rows.append(p)
        perms = np.array(rows, dtype=np.int64)
    perms.setflags(write=False)
    return perms


def canonical_form(A: FiniteAlgebra) -> tuple[np.ndarray, np.ndarray]:
    """Lexicographically least relabelled tables and the relabelling.

    For pointed kinds the constant is sent to index 0, which every
    isomorphism respects anyway.
    """
    tables = np.ascontiguousarray(np.stack(A.tables))
    perms = permutations_fixing(A.order, A.constant)
    best, idx = K.canonical_tables(tables, perms)
    return best, perms[idx]


def canonical_key(A: FiniteAlgebra) -> bytes:
    return A.kind.value.encode() + canonical_form(A)[0].tobytes()


def canonical_algebra(A: FiniteAlgebra) -> FiniteAlgebra:
    best, _ = canonical_form(A)
    return FiniteAlgebra(A.kind, tuple(map(str, range(A.order))), tuple(best), 0 if A.kind.pointed else None)
