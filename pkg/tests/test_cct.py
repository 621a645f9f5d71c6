import pytest
from hypothesis import given
from hypothesis import strategies as st

from objreplica.cct import (CallingContextTree, EmptyPath, FrameTableMismatch, UnknownContext,
                            add_metrics, merge, merge_all)
from objreplica.trace import FrameDef

paths = st.lists(st.integers(1, 5), min_size=1, max_size=4).map(tuple)


def test_intern_is_idempotent_and_prefix_shared():
    t = CallingContextTree()
    a = t.intern_path((1, 2, 3))
    assert t.intern_path((1, 2, 3)) == a
    t.intern_path((1, 2, 4))
    assert len(t) == 4
    assert t.path_of(a) == (1, 2, 3)
    assert t.find((1, 2)) is not None
    assert t.find((9,)) is None


def test_errors():
    t = CallingContextTree()
    with pytest.raises(EmptyPath):
        t.intern_path(())
    with pytest.raises(UnknownContext):
        t.path_of(0)
    with pytest.raises(UnknownContext):
        t.metrics(42)


def test_add_metrics_nested():
    m = add_metrics({"a": 1, "n": {"x": 2}}, {"a": 2, "n": {"x": 1, "y": 5}, "b": 1})
    assert m == {"a": 3, "n": {"x": 3, "y": 5}, "b": 1}


def test_merge_sums_identical_paths():
    a, b = CallingContextTree(), CallingContextTree()
    a.add((1, 2), {"equivalent": 3, "different": 1})
    b.add((1, 2), {"equivalent": 3, "different": 1})
    b.add((1, 5), {"equivalent": 1, "different": 0})
    m = merge(a, b)
    assert m.paths() == {(1, 2): {"equivalent": 6, "different": 2},
                         (1, 5): {"equivalent": 1, "different": 0}}
    # inputs untouched
    assert a.paths() == {(1, 2): {"equivalent": 3, "different": 1}}


def test_merge_frame_mismatch():
    a = CallingContextTree({1: FrameDef(1, "f")})
    b = CallingContextTree({1: FrameDef(1, "g")})
    with pytest.raises(FrameTableMismatch):
        merge(a, b)


def test_copy_is_independent():
    a = CallingContextTree()
    a.add((1,), {"n": 1})
    c = a.copy()
    c.add((1,), {"n": 1})
    assert a.paths()[(1,)] == {"n": 1}


def _tree(items):
    t = CallingContextTree()
    for p, n in items:
        t.add(p, {"n": n})
    return t


trees = st.lists(st.tuples(paths, st.integers(0, 9)), max_size=8).map(_tree)


@given(trees, trees, trees)
def test_merge_associative_commutative(a, b, c):
    assert merge(a, b).paths() == merge(b, a).paths()
    assert merge(merge(a, b), c).paths() == merge(a, merge(b, c)).paths()
    assert merge_all([a, b, c]).paths() == merge(c, merge(b, a)).paths()


@given(trees)
def test_merge_with_empty_is_identity(a):
    assert merge(a, CallingContextTree()).paths() == a.paths()
