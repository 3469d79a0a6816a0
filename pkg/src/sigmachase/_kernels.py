"""Hot loops over Cayley tables.

Every kernel is written in the numba-compatible subset of Python over
integer numpy arrays. With ``SIGMACHASE_BACKEND=numba`` (the default when
numba imports) they are compiled with ``@njit``; with
``SIGMACHASE_BACKEND=numpy`` the very same functions run as plain
Python/numpy, which is the reference path the benchmark compares against.
"""

from __future__ import annotations

import os

import numpy as np

_requested = os.environ.get("SIGMACHASE_BACKEND", "numba").strip().lower()

try:
    if _requested == "numpy":
        raise ImportError
    from numba import njit as _njit

    BACKEND = "numba"
except ImportError:  # pragma: no cover - exercised by the numpy backend run
    _njit = None
    BACKEND = "numpy"


def kernel(func):
    """Compile ``func`` with numba when the numba backend is active.

    The undecorated function stays reachable as ``.py_func`` either way so
    tests and benchmarks can run both paths side by side.
    """
    if _njit is None:
        func.py_func = func
        return func
    return _njit(cache=True)(func)


# --- axioms -----------------------------------------------------------------


@kernel
def first_nonassociative(t):
    """Return ``(a, b, c)`` with ``(ab)c != a(bc)`` or ``(-1, -1, -1)``."""
    n = t.shape[0]
    for a in range(n):
        for b in range(n):
            ab = t[a, b]
            for c in range(n):
                if t[ab, c] != t[a, t[b, c]]:
                    return a, b, c
    return -1, -1, -1


@kernel
def first_noncommuting(t):
    n = t.shape[0]
    for a in range(n):
        for b in range(a + 1, n):
            if t[a, b] != t[b, a]:
                return a, b
    return -1, -1


@kernel
def first_nondistributive(add, mul):
    """Witness ``(side, a, b, c)`` of a failed distributive law.

    side 0: a(b+c) != ab+ac, side 1: (a+b)c != ac+bc.
    """
    n = add.shape[0]
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if mul[a, add[b, c]] != add[mul[a, b], mul[a, c]]:
                    return 0, a, b, c
                if mul[add[a, b], c] != add[mul[a, c], mul[b, c]]:
                    return 1, a, b, c
    return -1, -1, -1, -1


@kernel
def first_non_selfdistributive(t):
    """Witness of ``(a<b)<c != (a<c)<(b<c)`` or ``(-1, -1, -1)``."""
    n = t.shape[0]
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if t[t[a, b], c] != t[t[a, c], t[b, c]]:
                    return a, b, c
    return -1, -1, -1


@kernel
def invert_columns(t):
    """Right-division table: ``inv[t[a, b], b] = a``. Entries -1 if a column is not a bijection."""
    n = t.shape[0]
    inv = np.full((n, n), -1, dtype=np.int64)
    for b in range(n):
        for a in range(n):
            v = t[a, b]
            if inv[v, b] != -1:
                return inv, b
            inv[v, b] = a
    return inv, -1


# --- morphisms --------------------------------------------------------------


@kernel
def first_unpreserved(src, dst, f):
    """First ``(a, b)`` with ``f(src[a, b]) != dst[f(a), f(b)]`` or ``(-1, -1)``."""
    n = src.shape[0]
    for a in range(n):
        for b in range(n):
            if f[src[a, b]] != dst[f[a], f[b]]:
                return a, b
    return -1, -1


# --- closures ---------------------------------------------------------------


@kernel
def close_subset(tables, member):
    """Saturate the boolean mask ``member`` under every table in ``tables`` (k, n, n)."""
    k = tables.shape[0]
    n = tables.shape[1]
    out = member.copy()
    changed = True
    while changed:
        changed = False
        for op in range(k):
            for a in range(n):
                if not out[a]:
                    continue
                for b in range(n):
                    if out[b]:
                        v = tables[op, a, b]
                        if not out[v]:
                            out[v] = True
                            changed = True
    return out


@kernel
def _relabel(labels, old, new):
    for i in range(labels.shape[0]):
        if labels[i] == old:
            labels[i] = new


@kernel
def saturate_partition(tables, labels):
    """Smallest congruence coarser than the partition ``labels``.

    ``labels`` is modified in place; classes are merged by rewriting the
    larger label, so at most ``n - 1`` merges happen in total.
    """
    k = tables.shape[0]
    n = tables.shape[1]
    changed = True
    while changed:
        changed = False
        for op in range(k):
            for a in range(n):
                for b in range(a + 1, n):
                    if labels[a] != labels[b]:
                        continue
                    for c in range(n):
                        u = labels[tables[op, a, c]]
                        v = labels[tables[op, b, c]]
                        if u != v:
                            _relabel(labels, max(u, v), min(u, v))
                            changed = True
                        u = labels[tables[op, c, a]]
                        v = labels[tables[op, c, b]]
                        if u != v:
                            _relabel(labels, max(u, v), min(u, v))
                            changed = True
    return labels


@kernel
def is_compatible(tables, labels):
    """True iff the partition ``labels`` respects every table."""
    k = tables.shape[0]
    n = tables.shape[1]
    nb = 0
    for i in range(n):
        if labels[i] + 1 > nb:
            nb = labels[i] + 1
    induced = np.full((nb, nb), -1, dtype=np.int64)
    for op in range(k):
        induced[:, :] = -1
        for a in range(n):
            for b in range(n):
                v = labels[tables[op, a, b]]
                la = labels[a]
                lb = labels[b]
                if induced[la, lb] == -1:
                    induced[la, lb] = v
                elif induced[la, lb] != v:
                    return False
    return True


# --- canonical forms --------------------------------------------------------


@kernel
def canonical_tables(tables, perms):
    """Lexicographically least relabelling of ``tables`` over ``perms``.

    A permutation ``p`` sends old index ``i`` to new index ``p[i]``; the
    relabelled table is ``T'[p[i], p[j]] = p[T[i, j]]``. Returns the best
    tables and the index of a permutation achieving them.
    """
    k = tables.shape[0]
    n = tables.shape[1]
    best = np.empty_like(tables)
    cand = np.empty_like(tables)
    inv = np.empty(n, dtype=np.int64)
    best_idx = -1
    for pi in range(perms.shape[0]):
        p = perms[pi]
        for i in range(n):
            inv[p[i]] = i
        # compare lazily against best, abandoning once larger
        state = 0 if best_idx >= 0 else -1
        for op in range(k):
            for a in range(n):
                for b in range(n):
                    v = p[tables[op, inv[a], inv[b]]]
                    cand[op, a, b] = v
                    if state == 0:
                        w = best[op, a, b]
                        if v < w:
                            state = -1
                        elif v > w:
                            state = 1
                            break
                if state == 1:
                    break
            if state == 1:
                break
        if state == -1:
            best[:, :, :] = cand
            best_idx = pi
    return best, best_idx


# --- enumeration ------------------------------------------------------------


@kernel
def _assoc_ok_at(t, i, j):
    """Check every associativity triple touching cell (i, j) whose entries are all set."""
    n = t.shape[0]
    for c in range(n):
        # (i j) c  vs  i (j c)
        ij = t[i, j]
        jc = t[j, c]
        if ij >= 0 and jc >= 0:
            l = t[ij, c]
            r = t[i, jc]
            if l >= 0 and r >= 0 and l != r:
                return False
    for a in range(n):
        # (a i) j  vs  a (i j)
        ai = t[a, i]
        ij = t[i, j]
        if ai >= 0 and ij >= 0:
            l = t[ai, j]
            r = t[a, ij]
            if l >= 0 and r >= 0 and l != r:
                return False
    for a in range(n):
        for b in range(n):
            # cell used as outer product: t[a, b] == i, then (a b) j vs a (b j)
            if t[a, b] == i:
                bj = t[b, j]
                if bj >= 0:
                    r = t[a, bj]
                    l = t[i, j]
                    if r >= 0 and l >= 0 and l != r:
                        return False
            # t[a, b] == j, then i (a b) vs (i a) b
            if t[a, b] == j:
                ia = t[i, a]
                if ia >= 0:
                    l = t[ia, b]
                    r = t[i, j]
                    if l >= 0 and r >= 0 and l != r:
                        return False
    return True


@kernel
def enumerate_monoid_tables(n, out):
    """Fill ``out`` (cap, n, n) with every monoid table on ``n`` points with unit 0.

    Returns the number written, or ``-1`` if ``out`` is too small.
    """
    cap = out.shape[0]
    t = np.full((n, n), -1, dtype=np.int64)
    for i in range(n):
        t[0, i] = i
        t[i, 0] = i
    m = n - 1
    cells = m * m
    count = 0
    if cells == 0:
        if cap < 1:
            return -1
        out[0] = t
        return 1
    pos = 0
    while pos >= 0:
        i = 1 + pos // m
        j = 1 + pos % m
        v = t[i, j] + 1
        t[i, j] = -1
        placed = False
        while v < n:
            t[i, j] = v
            if _assoc_ok_at(t, i, j):
                placed = True
                break
            v += 1
        if not placed:
            t[i, j] = -1
            pos -= 1
            continue
        if pos == cells - 1:
            # full table: run the complete check once more
            a, b, c = first_nonassociative(t)
            if a < 0:
                if count >= cap:
                    return -1
                out[count] = t
                count += 1
            continue
        pos += 1
    return count


@kernel
def _selfdist_ok_at(t, i, j):
    # every defined triple; the cell (i, j) can sit in the (a<c)<(b<c) slot
    # for triples not mentioning i or j, so no index filter is safe here
    n = t.shape[0]
    for a in range(n):
        for b in range(n):
            for c in range(n):
                ab = t[a, b]
                if ab < 0:
                    continue
                l = t[ab, c]
                ac = t[a, c]
                bc = t[b, c]
                if l < 0 or ac < 0 or bc < 0:
                    continue
                r = t[ac, bc]
                if r >= 0 and l != r:
                    return False
    return True


@kernel
def enumerate_quandle_tables(n, out):
    """Every table with ``a<a = a``, bijective columns and right self-distributivity."""
    cap = out.shape[0]
    t = np.full((n, n), -1, dtype=np.int64)
    for i in range(n):
        t[i, i] = i
    # free cells in column-major order so each column is a permutation built at once
    cells = n * (n - 1)
    ci = np.empty(cells, dtype=np.int64)
    cj = np.empty(cells, dtype=np.int64)
    p = 0
    for j in range(n):
        for i in range(n):
            if i != j:
                ci[p] = i
                cj[p] = j
                p += 1
    used = np.zeros((n, n), dtype=np.bool_)  # used[value, column]
    for i in range(n):
        used[i, i] = True
    count = 0
    if cells == 0:
        if cap < 1:
            return -1
        out[0] = t
        return 1
    pos = 0
    while pos >= 0:
        i = ci[pos]
        j = cj[pos]
        old = t[i, j]
        if old >= 0:
            used[old, j] = False
        v = old + 1
        t[i, j] = -1
        placed = False
        while v < n:
            if not used[v, j]:
                t[i, j] = v
                if _selfdist_ok_at(t, i, j):
                    placed = True
                    break
                t[i, j] = -1
            v += 1
        if not placed:
            pos -= 1
            continue
        used[v, j] = True
        if pos == cells - 1:
            a, b, c = first_non_selfdistributive(t)
            if a < 0:
                if count >= cap:
                    return -1
                out[count] = t
                count += 1
            continue
        pos += 1
    return count


# --- classification ---------------------------------------------------------


@kernel
def schreier_solutions(t, kernel_mask, sf):
    """For each x count and record solutions k in the kernel of ``k * sf[x] == x``.

    ``sf[x]`` is ``s(f(x))``. Returns ``(counts, q)`` where ``q[x]`` is the
    least solution (or -1).
    """
    n = t.shape[0]
    counts = np.zeros(n, dtype=np.int64)
    q = np.full(n, -1, dtype=np.int64)
    for k in range(n):
        if not kernel_mask[k]:
            continue
        for x in range(n):
            if t[k, sf[x]] == x:
                counts[x] += 1
                if q[x] < 0:
                    q[x] = k
    return counts, q
