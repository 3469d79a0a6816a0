"""Compare the numba-compiled kernels with their plain-numpy fallback.

    python3 benchmarks/bench_kernels.py --order 5 --repeat 3

Both paths run in one process: a compiled kernel keeps the original Python
function at ``.py_func``, which is exactly what ``SIGMACHASE_BACKEND=numpy``
executes.  Each row also checks the two paths agree.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sigmachase import _kernels as K
from sigmachase.enumeration import _monoid_tables
from sigmachase.morphisms import permutations_fixing


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _enumerate(kern, n):
    def run():
        cap = 4096
        while True:
            out = np.empty((cap, n, n), dtype=np.int64)
            c = kern(n, out)
            if c >= 0:
                return out[:c]
            cap *= 4

    return run


def cases(order: int, rng: np.random.Generator):
    tables = _monoid_tables(order)
    perms = permutations_fixing(order, 0)
    sample = tables[rng.choice(len(tables), size=min(200, len(tables)), replace=False)]

    def canon(kern):
        return lambda: [kern(np.ascontiguousarray(t[None]), perms)[0] for t in sample]

    def assoc(kern):
        return lambda: [kern(t) for t in tables]

    labels = [np.arange(order, dtype=np.int64) for _ in sample]
    for lab in labels:
        a, b = rng.choice(order, size=2, replace=False)
        lab[b] = a

    def saturate(kern):
        return lambda: [kern(np.ascontiguousarray(t[None]), lab.copy()) for t, lab in zip(sample, labels)]

    def schreier(kern):
        mask = np.zeros(order, dtype=np.bool_)
        mask[0] = True
        sf = np.zeros(order, dtype=np.int64)
        return lambda: [kern(t, mask, sf) for t in sample]

    def _same(x, y):
        if isinstance(x, np.ndarray):
            return np.array_equal(x, y)
        if isinstance(x, (tuple, list)):
            return len(x) == len(y) and all(_same(a, b) for a, b in zip(x, y))
        return x == y

    yield "enumerate monoids", _enumerate(K.enumerate_monoid_tables, order), _enumerate(K.enumerate_monoid_tables.py_func, order), _same
    yield "canonical form x200", canon(K.canonical_tables), canon(K.canonical_tables.py_func), _same
    yield "associativity scan", assoc(K.first_nonassociative), assoc(K.first_nonassociative.py_func), _same
    yield "saturate partition x200", saturate(K.saturate_partition), saturate(K.saturate_partition.py_func), _same
    yield "schreier solve x200", schreier(K.schreier_solutions), schreier(K.schreier_solutions.py_func), _same


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--order", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if K.BACKEND != "numba":
        raise SystemExit("numba backend unavailable; nothing to compare")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<26}{'numba s':>10}{'numpy s':>10}{'speedup':>9}  agree")
    for name, fast, slow, same in cases(args.order, rng):
        ok = same(fast(), slow())  # also warms the jit
        tf, ts = _time(fast, args.repeat), _time(slow, args.repeat)
        print(f"{name:<26}{tf:>10.4f}{ts:>10.4f}{ts / tf:>8.1f}x  {ok}")


if __name__ == "__main__":
    main()
