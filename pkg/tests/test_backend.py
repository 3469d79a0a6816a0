"""The compiled kernels and their uncompiled originals must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sigmachase import _kernels as K
from sigmachase.morphisms import permutations_fixing


def both(kern, *args):
    a = kern(*[x.copy() if isinstance(x, np.ndarray) else x for x in args])
    b = kern.py_func(*[x.copy() if isinstance(x, np.ndarray) else x for x in args])
    return a, b


def same(x, y):
    if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
        return np.array_equal(np.asarray(x), np.asarray(y))
    if isinstance(x, (tuple, list)):
        return len(x) == len(y) and all(same(a, b) for a, b in zip(x, y))
    return x == y


@st.composite
def table(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    return draw(arrays(np.int64, (n, n), elements=st.integers(0, n - 1)))


@given(table())
def test_axiom_scans_agree(t):
    for kern in (K.first_nonassociative, K.first_noncommuting, K.first_non_selfdistributive):
        assert same(*both(kern, t))
    assert same(*both(K.first_nondistributive, t, t.T.copy()))


@given(table(), st.data())
def test_closure_kernels_agree(t, data):
    n = t.shape[0]
    tables = np.ascontiguousarray(t[None])
    member = np.array(data.draw(st.lists(st.booleans(), min_size=n, max_size=n)), dtype=np.bool_)
    assert same(*both(K.close_subset, tables, member))
    labels = np.array(data.draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n)), dtype=np.int64)
    assert same(*both(K.saturate_partition, tables, labels))
    assert same(*both(K.is_compatible, tables, labels))
    f = np.array(data.draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n)), dtype=np.int64)
    assert same(*both(K.first_unpreserved, t, t, f))
    mask = np.array(data.draw(st.lists(st.booleans(), min_size=n, max_size=n)), dtype=np.bool_)
    assert same(*both(K.schreier_solutions, t, mask, f))
    assert same(*both(K.canonical_tables, tables, permutations_fixing(n, 0)))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_enumeration_kernels_agree(n):
    for kern in (K.enumerate_monoid_tables, K.enumerate_quandle_tables):
        out_a = np.empty((4096, n, n), dtype=np.int64)
        out_b = np.empty_like(out_a)
        ca, cb = kern(n, out_a), kern.py_func(n, out_b)
        assert ca == cb >= 0
        assert np.array_equal(out_a[:ca], out_b[:cb])


def test_invert_columns_agree():
    from sigmachase.algebra import dihedral_quandle

    for n in (3, 4, 5):
        t = dihedral_quandle(n).lhd
        assert same(*both(K.invert_columns, t))
    assert same(*both(K.invert_columns, np.zeros((3, 3), dtype=np.int64)))


def test_numpy_backend_subprocess():
    code = (
        "from sigmachase import _kernels as K\n"
        "from sigmachase.algebra import Kind\n"
        "from sigmachase.enumeration import algebras_up_to\n"
        "assert K.BACKEND == 'numpy', K.BACKEND\n"
        "print(len(algebras_up_to(Kind.MONOID, 4)), len(algebras_up_to(Kind.QUANDLE, 4)))\n"
    )
    env = dict(os.environ, SIGMACHASE_BACKEND="numpy")
    r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    from sigmachase.algebra import Kind
    from sigmachase.enumeration import algebras_up_to

    assert r.stdout.split() == [str(len(algebras_up_to(Kind.MONOID, 4))), str(len(algebras_up_to(Kind.QUANDLE, 4)))]
