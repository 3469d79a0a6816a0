"""Independent brute-force oracles.

Nothing here calls into sigmachase beyond reading ``.tables``/``.constant``
off an algebra; each definition is the textbook one written as plain loops
or broadcasting so it can be trusted as a reference.
"""

from __future__ import annotations

import itertools

import numpy as np


def monoid_ok(t, e) -> bool:
    n = len(t)
    for a in range(n):
        if t[e][a] != a or t[a][e] != a:
            return False
    for a, b, c in itertools.product(range(n), repeat=3):
        if t[t[a][b]][c] != t[a][t[b][c]]:
            return False
    return True


def quandle_ok(t) -> bool:
    n = len(t)
    for a in range(n):
        if t[a][a] != a:
            return False
    for b in range(n):
        if sorted(t[a][b] for a in range(n)) != list(range(n)):
            return False
    for a, b, c in itertools.product(range(n), repeat=3):
        if t[t[a][b]][c] != t[t[a][c]][t[b][c]]:
            return False
    return True


def semiring_ok(add, mul, z) -> bool:
    n = len(add)
    if not monoid_ok(add, z) or not all(add[a][b] == add[b][a] for a in range(n) for b in range(n)):
        return False
    for a, b, c in itertools.product(range(n), repeat=3):
        if mul[mul[a][b]][c] != mul[a][mul[b][c]]:
            return False
        if mul[a][add[b][c]] != add[mul[a][b]][mul[a][c]]:
            return False
        if mul[add[a][b]][c] != add[mul[a][c]][mul[b][c]]:
            return False
    return all(mul[z][a] == z == mul[a][z] for a in range(n))


def monoid_batch_ok(T: np.ndarray, e: int = 0) -> np.ndarray:
    """Vectorized monoid check over a batch ``(B, n, n)``."""
    B, n, _ = T.shape
    i = np.arange(n)
    unit = (T[:, e, :] == i).all(axis=1) & (T[:, :, e] == i).all(axis=1)
    bi = np.arange(B)[:, None, None, None]
    a = i[None, :, None, None]
    b = i[None, None, :, None]
    c = i[None, None, None, :]
    lhs = T[bi, T[bi, a, b], c]
    rhs = T[bi, a, T[bi, b, c]]
    return unit & (lhs == rhs).reshape(B, -1).all(axis=1)


def quandle_batch_ok(T: np.ndarray) -> np.ndarray:
    B, n, _ = T.shape
    i = np.arange(n)
    idem = (T[:, i, i] == i).all(axis=1)
    cols = np.sort(T, axis=1)
    perm = (cols == i[None, :, None]).all(axis=(1, 2))
    bi = np.arange(B)[:, None, None, None]
    a = i[None, :, None, None]
    b = i[None, None, :, None]
    c = i[None, None, None, :]
    lhs = T[bi, T[bi, a, b], c]
    rhs = T[bi, T[bi, a, c], T[bi, b, c]]
    return idem & perm & (lhs == rhs).reshape(B, -1).all(axis=1)


def is_hom(dom_tables, cod_tables, m) -> bool:
    for s, t in zip(dom_tables, cod_tables):
        n = len(s)
        for a in range(n):
            for b in range(n):
                if m[s[a][b]] != t[m[a]][m[b]]:
                    return False
    return True


def set_partitions(n: int):
    """All partitions of ``range(n)`` as block label lists."""
    def rec(i, labels, k):
        if i == n:
            yield list(labels)
            return
        for b in range(k + 1):
            labels.append(b)
            yield from rec(i + 1, labels, max(k, b + 1))
            labels.pop()

    yield from rec(0, [], 0)


def congruences(tables) -> list[list[int]]:
    n = len(tables[0])
    out = []
    for lab in set_partitions(n):
        ok = True
        for t in tables:
            for a, a2, b, b2 in itertools.product(range(n), repeat=4):
                if lab[a] == lab[a2] and lab[b] == lab[b2] and lab[t[a][b]] != lab[t[a2][b2]]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(lab)
    return out


def mu_maps(t, f, s, cls: str):
    """For each base point b, the list of images of mu_b over its domain."""
    n = len(t)
    out = {}
    for b in range(len(s)):
        fiber = [x for x in range(n) if f[x] == b]
        if cls in ("schreier", "weakly-schreier"):
            e_img = f[next(x for x in range(n) if all(t[x][y] == y for y in range(n)))]
            kernel = [x for x in range(n) if f[x] == e_img]
            out[b] = (fiber, [t[k][s[b]] for k in kernel])
        else:
            out[b] = (fiber, [t[s[b]][a] for a in fiber])
    return out


def in_class(t, f, s, cls: str) -> bool:
    """Definition-level oracle: mu_b bijective (Schreier, acupuncturing) or onto."""
    for fiber, img in mu_maps(t, f, s, cls).values():
        onto = set(img) == set(fiber)
        if cls in ("schreier", "acupuncturing"):
            if not (onto and len(img) == len(fiber)):
                return False
        elif not onto:
            return False
    return True


def is_group(t, e) -> bool:
    n = len(t)
    return all(any(t[a][b] == e for b in range(n)) for a in range(n))


def is_latin(t) -> bool:
    n = len(t)
    rows = all(sorted(t[a]) == list(range(n)) for a in range(n))
    cols = all(sorted(t[a][b] for a in range(n)) == list(range(n)) for b in range(n))
    return rows and cols


def generated(tables, seed, constants=()) -> set:
    S = set(seed) | set(constants)
    while True:
        new = {t[a][b] for t in tables for a in S for b in S} - S
        if not new:
            return S
        S |= new


def cyclic_order(t, e, x) -> int:
    k, y = 1, x
    while y != e:
        y = t[y][x]
        k += 1
    return k


def group_exponent(t, e) -> int:
    return int(np.lcm.reduce([cyclic_order(t, e, x) for x in range(len(t))]))
