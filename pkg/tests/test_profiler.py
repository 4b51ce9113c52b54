import pytest

from colvm.columnar import new_array, restore, try_transform
from colvm.profiler import Profiler, Thresholds, Trigger, should_transform
from colvm.values import Heap


def row_array_of(heap, n):
    return new_array(heap, [heap.alloc([("x", float(i))]) for i in range(n)])


def test_should_transform_boundaries():
    t = Thresholds()
    heap = Heap()
    arr = row_array_of(heap, 5000)
    arr.stats.reads = 2500
    assert should_transform(arr.stats, arr.length, t)
    small = row_array_of(heap, 4999)
    small.stats.reads = 10**6
    assert not should_transform(small.stats, small.length, t)
    arr.stats.rejected = True
    assert not should_transform(arr.stats, arr.length, t)


def test_thresholds_must_be_positive():
    with pytest.raises(ValueError):
        Thresholds(min_size=0)


def test_note_read_fires_once_at_crossing():
    heap = Heap()
    prof = Profiler(Thresholds(min_size=10, min_reads=5))
    arr = row_array_of(heap, 10)
    fires = [prof.note_read(arr) for _ in range(8)]
    assert fires.count(Trigger.TRANSFORM) == 1
    assert fires[4] is Trigger.TRANSFORM  # the 5th read crossed


def test_no_trigger_on_columnar_array():
    heap = Heap()
    prof = Profiler(Thresholds(min_size=4, min_reads=2))
    arr = row_array_of(heap, 4)
    assert prof.note_read(arr) is None
    assert prof.note_read(arr) is Trigger.TRANSFORM
    assert try_transform(heap, arr).transformed
    assert all(prof.note_read(arr) is None for _ in range(10))


def test_restore_rearms_trigger():
    heap = Heap()
    prof = Profiler(Thresholds(min_size=4, min_reads=2))
    arr = row_array_of(heap, 4)
    prof.note_read(arr)
    assert prof.note_read(arr) is Trigger.TRANSFORM
    assert try_transform(heap, arr).transformed
    restore(heap, arr)
    assert prof.note_read(arr) is Trigger.TRANSFORM


def test_rejection_latches_until_growth():
    heap = Heap()
    prof = Profiler(Thresholds(min_size=4, min_reads=2))
    arr = new_array(heap, [1.0, 2.0, 3.0, 4.0])  # primitives: not transformable
    prof.note_read(arr)
    assert prof.note_read(arr) is Trigger.TRANSFORM
    assert not try_transform(heap, arr).transformed
    arr.stats.latch_rejection(arr.length)
    assert all(prof.note_read(arr) is None for _ in range(5))
    arr.row.append(5.0)  # 25% growth over 4
    assert prof.note_read(arr) is Trigger.TRANSFORM


def test_transform_disabled_mode_never_fires():
    heap = Heap()
    prof = Profiler(Thresholds(min_size=2, min_reads=1), transform_enabled=False)
    arr = row_array_of(heap, 10)
    assert all(prof.note_read(arr) is None for _ in range(10))


def test_hotness_counters():
    prof = Profiler(Thresholds(hot_calls=3, hot_backedges=5))
    assert prof.note_call("f") is None
    assert prof.note_call("f") is None
    assert prof.note_call("f") is Trigger.COMPILE
    assert prof.note_call("f") is None  # fires once

    prof2 = Profiler(Thresholds(hot_backedges=4))
    fires = [prof2.note_backedge("g", 1) for _ in range(6)]
    assert fires.count(Trigger.COMPILE) == 1
    prof2.hotness("g").reset()
    assert prof2.hotness("g").backedges == {}


def test_small_arrays_never_transform_with_default_thresholds():
    heap = Heap()
    prof = Profiler()
    arr = row_array_of(heap, 100)
    assert all(prof.note_read(arr) is None for _ in range(5000))
