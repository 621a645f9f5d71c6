import pytest
from hypothesis import given
from hypothesis import strategies as st

from objreplica.objects import ObjectIndex, OverlapError, UnknownObject


def test_lookup_inside_and_outside():
    idx = ObjectIndex()
    idx.register_alloc(1, 4096, 64, "c")
    assert idx.lookup(4104).obj_id == 1
    assert idx.resolve(4104)[1] == 8
    assert idx.lookup(4096 + 64) is None
    assert idx.lookup(4095) is None


def test_adjacent_objects_do_not_overlap():
    idx = ObjectIndex()
    idx.register_alloc(1, 0, 16, "c")
    idx.register_alloc(2, 16, 16, "c")
    assert idx.lookup(15).obj_id == 1
    assert idx.lookup(16).obj_id == 2


def test_overlap_rejected():
    idx = ObjectIndex()
    idx.register_alloc(1, 100, 16, "c")
    with pytest.raises(OverlapError):
        idx.register_alloc(2, 108, 16, "c")
    with pytest.raises(OverlapError):
        idx.register_alloc(3, 90, 11, "c")
    with pytest.raises(OverlapError):
        idx.register_alloc(1, 1000, 8, "c")


def test_release_and_reuse():
    idx = ObjectIndex()
    idx.register_alloc(1, 100, 16, "c")
    rec = idx.release(1)
    assert not rec.live
    assert idx.lookup(100) is None
    r2 = idx.register_alloc(2, 100, 16, "c")
    assert r2.generation == 1
    with pytest.raises(UnknownObject):
        idx.release(1)


def test_generations_per_context():
    idx = ObjectIndex()
    gens = [idx.register_alloc(i, i * 100, 8, "a" if i % 2 else "b").generation for i in range(6)]
    assert gens == [0, 0, 1, 1, 2, 2]
    assert idx.allocations_at("a") == 3
    assert idx.allocations_at("zzz") == 0


@given(st.lists(st.tuples(st.integers(0, 2000), st.integers(1, 64)), max_size=40),
       st.lists(st.integers(0, 2100), max_size=50))
def test_matches_brute_force(allocs, probes):
    idx = ObjectIndex()
    live = {}
    for i, (base, size) in enumerate(allocs):
        clash = any(b < base + size and base < b + s for b, s in live.values())
        if clash:
            with pytest.raises(OverlapError):
                idx.register_alloc(i, base, size, 0)
        else:
            idx.register_alloc(i, base, size, 0)
            live[i] = (base, size)
        if i % 3 == 2 and live:
            victim = sorted(live)[0]
            idx.release(victim)
            del live[victim]
    for a in probes:
        want = [o for o, (b, s) in live.items() if b <= a < b + s]
        got = idx.lookup(a)
        assert (got.obj_id if got else None) == (want[0] if want else None)
    assert len(idx) == len(live)
