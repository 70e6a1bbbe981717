"""The compiled kernels must agree exactly with the pure-Python ones."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetloc import _pykernels as py

ck = pytest.importorskip("hetloc._ckernels")


@st.composite
def tables(draw, max_states=7, max_events=5, foreign=False):
    n = draw(st.integers(1, max_states))
    m = draw(st.integers(0, max_events))
    lo = -2 if foreign else -1
    cells = draw(st.lists(st.integers(lo, n - 1), min_size=n * m, max_size=n * m))
    return np.array(cells, dtype=np.int32).reshape(n, m)


@st.composite
def operands(draw):
    m = draw(st.integers(0, 4))
    k = draw(st.integers(1, 3))
    tabs, inits, marks = [], [], []
    for _ in range(k):
        n = draw(st.integers(1, 5))
        cells = draw(st.lists(st.integers(-2, n - 1), min_size=n * m, max_size=n * m))
        tabs.append(np.array(cells, dtype=np.int32).reshape(n, m))
        inits.append(draw(st.integers(0, n - 1)))
        marks.append(np.array(draw(st.lists(st.booleans(), min_size=n, max_size=n))))
    return tabs, inits, marks


@settings(max_examples=200, deadline=None)
@given(operands())
def test_sync_product_agrees(ops):
    assert ck.sync_product(*ops) == py.sync_product(*ops)


@settings(max_examples=200, deadline=None)
@given(tables(), st.data())
def test_subset_construction_agrees(tab, data):
    m = tab.shape[1]
    events = list(range(m))
    eps = data.draw(st.lists(st.sampled_from(events), unique=True) if events else st.just([]))
    keep = [e for e in events if e not in eps]
    init = data.draw(st.lists(st.integers(0, tab.shape[0] - 1), min_size=1, max_size=2))
    assert ck.subset_construction(tab, eps, keep, init) == py.subset_construction(tab, eps, keep, init)


@settings(max_examples=200, deadline=None)
@given(tables(), st.data())
def test_refine_partition_agrees(tab, data):
    n = tab.shape[0]
    init = data.draw(st.lists(st.integers(0, 2), min_size=n, max_size=n))
    assert ck.refine_partition(tab, init) == py.refine_partition(tab, init)


@settings(max_examples=200, deadline=None)
@given(tables(max_states=9), st.data())
def test_greedy_partition_agrees(tab, data):
    n = tab.shape[0]
    bits = data.draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
    c = np.array(bits, dtype=np.uint8).reshape(n, n)
    c = c & c.T
    np.fill_diagonal(c, 1)
    assert ck.greedy_partition(tab, c) == py.greedy_partition(tab, c)


def test_empty_inputs():
    empty = np.zeros((0, 3), dtype=np.int32)
    assert ck.greedy_partition(empty, np.zeros((0, 0))) == py.greedy_partition(empty, np.zeros((0, 0)))
    assert ck.refine_partition(empty, []) == py.refine_partition(empty, [])
    assert ck.sync_product([], [], []) == ([()], [], [0])


def test_dispatch_honours_env(monkeypatch):
    import importlib

    import hetloc.kernels as k

    monkeypatch.setenv("HETLOC_PURE_PYTHON", "1")
    try:
        assert importlib.reload(k).BACKEND == "python"
    finally:
        monkeypatch.delenv("HETLOC_PURE_PYTHON")
        importlib.reload(k)
    assert k.BACKEND == "cython"
