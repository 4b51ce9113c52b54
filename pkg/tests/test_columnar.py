import random

import pytest

from colvm.columnar import (
    HOLE,
    DynArray,
    TransformOutcome,
    array_read,
    array_write,
    dump_array,
    new_array,
    proxy_get,
    proxy_set,
    restore,
    try_transform,
)
from colvm.values import (
    UNDEF,
    Heap,
    LanguageError,
    ValueKind,
    get_property,
    same_identity,
    set_property,
)


def make_clients(heap, n, nested=True):
    objs = []
    for i in range(n):
        if nested:
            cc = heap.alloc([("pan", float(1000 + i)), ("service", float(i % 7))])
            o = heap.alloc(
                [("ssn", float(i)), ("zip", float(1000 + i % 9000)), ("ccInfo", cc)]
            )
        else:
            o = heap.alloc([("ssn", float(i)), ("zip", float(1000 + i % 9000))])
        objs.append(o)
    return new_array(heap, objs)


def snapshot(heap, arr):
    """Deep property snapshot usable as a differential oracle."""
    out = []
    for i in range(arr.length):
        o = array_read(heap, arr, i)
        rec = {}
        for name, kind in o.shape.props:
            v = get_property(heap, o, name)
            if kind is ValueKind.OBJECT:
                rec[name] = {
                    n: get_property(heap, v, n) for n, _ in v.shape.props
                }
            else:
                rec[name] = v
        out.append(rec)
    return out


def test_transform_multilevel_column_set():
    heap = Heap()
    arr = make_clients(heap, 8)
    res = try_transform(heap, arr)
    assert res.outcome is TransformOutcome.TRANSFORMED
    assert set(arr.cols) == {"ssn", "zip", "ccInfo.pan", "ccInfo.service"}
    assert arr.cols["zip"].kind is ValueKind.NUMBER
    assert all(len(c.data) == 8 for c in arr.cols.values())
    assert set(arr.nested_elems) == {"ccInfo"}


def test_transform_rejects_primitives_and_empty():
    heap = Heap()
    assert (
        try_transform(heap, new_array(heap, [])).outcome
        is TransformOutcome.REJECTED_NON_UNIFORM
    )
    assert (
        try_transform(heap, new_array(heap, [1.0, 2.0, 3.0])).outcome
        is TransformOutcome.REJECTED_NON_UNIFORM
    )


def test_transform_rejects_mixed_shapes_and_reads_unchanged():
    heap = Heap()
    a = heap.alloc([("x", 1.0)])
    b = heap.alloc([("y", 2.0)])
    arr = new_array(heap, [a, b])
    before = snapshot(heap, arr)
    res = try_transform(heap, arr)
    assert res.outcome is TransformOutcome.REJECTED_NON_UNIFORM
    assert arr.row is not None
    assert snapshot(heap, arr) == before


def test_transform_rejects_holes_and_unsupported_kinds():
    heap = Heap()
    a = heap.alloc([("x", 1.0)])
    b = heap.alloc([("x", 2.0)])
    arr = new_array(heap, [a, b])
    array_write(heap, arr, 5, heap.alloc([("x", 3.0)]))
    assert try_transform(heap, arr).outcome is TransformOutcome.REJECTED_SPARSE

    inner = new_array(heap, [1.0])
    c = heap.alloc([("x", inner)])
    d = heap.alloc([("x", new_array(heap, [2.0]))])
    arr2 = new_array(heap, [c, d])
    assert (
        try_transform(heap, arr2).outcome
        is TransformOutcome.REJECTED_UNSUPPORTED_KIND
    )


def test_too_deep_nesting_falls_back_to_reference_column():
    heap = Heap()
    objs = []
    for i in range(4):
        deep = heap.alloc([("q", float(i))])
        mid = heap.alloc([("deep", deep), ("w", float(i))])
        objs.append(heap.alloc([("x", float(i)), ("mid", mid)]))
    arr = new_array(heap, objs)
    res = try_transform(heap, arr)
    assert res.transformed
    # mid holds objects with an object-valued property: kept as references
    assert set(arr.cols) == {"x", "mid"}
    assert arr.cols["mid"].kind is ValueKind.OBJECT
    mid0 = get_property(heap, array_read(heap, arr, 0), "mid")
    assert mid0.pd is None  # untouched plain object
    assert get_property(heap, get_property(heap, mid0, "deep"), "q") == 0.0


def test_identity_stable_across_round_trip():
    heap = Heap()
    arr = make_clients(heap, 6)
    first = array_read(heap, arr, 0)
    cc_first = get_property(heap, first, "ccInfo")
    assert try_transform(heap, arr).transformed
    assert same_identity(array_read(heap, arr, 0), first)
    assert same_identity(get_property(heap, array_read(heap, arr, 0), "ccInfo"), cc_first)
    restore(heap, arr)
    assert same_identity(array_read(heap, arr, 0), first)
    assert same_identity(get_property(heap, first, "ccInfo"), cc_first)


def test_round_trip_matches_untouched_clone():
    heap = Heap()
    arr = make_clients(heap, 10)
    clone = snapshot(heap, arr)
    assert try_transform(heap, arr).transformed
    assert snapshot(heap, arr) == clone
    restore(heap, arr)
    assert snapshot(heap, arr) == clone
    assert arr.row is not None
    assert all(o.pd is None for o in arr.row)


def test_proxy_get_first_level_and_nested():
    heap = Heap()
    arr = make_clients(heap, 5)
    assert try_transform(heap, arr).transformed
    client = array_read(heap, arr, 2)
    assert proxy_get(heap, client, "zip") == arr.cols["zip"].data[2]
    cc = proxy_get(heap, client, "ccInfo")
    assert cc.pd is not None
    assert proxy_get(heap, cc, "pan") == arr.cols["ccInfo.pan"].data[2]
    assert proxy_get(heap, client, "nope") is UNDEF


def test_proxy_set_kind_match_writes_in_place():
    heap = Heap()
    arr = make_clients(heap, 5)
    assert try_transform(heap, arr).transformed
    client = array_read(heap, arr, 1)
    proxy_set(heap, client, "zip", 4040.0)
    assert arr.is_columnar
    assert arr.cols["zip"].data[1] == 4040.0
    assert get_property(heap, client, "zip") == 4040.0


def test_proxy_set_kind_mismatch_restores():
    heap = Heap()
    arr = make_clients(heap, 5)
    assert try_transform(heap, arr).transformed
    client = array_read(heap, arr, 1)
    proxy_set(heap, client, "zip", "not-a-number")
    assert not arr.is_columnar
    assert get_property(heap, client, "zip") == "not-a-number"
    assert client.pd is None


def test_shared_nested_object_write_fans_out():
    # Same date-like object under two properties of one element.
    heap = Heap()
    objs = []
    shared_of = []
    for i in range(4):
        d = heap.alloc([("ts", float(i))])
        objs.append(heap.alloc([("lastChanged", d), ("deletedAt", d)]))
        shared_of.append(d)
    arr = new_array(heap, objs)
    assert try_transform(heap, arr).transformed
    assert arr.aliased
    d0 = get_property(heap, array_read(heap, arr, 0), "lastChanged")
    proxy_set(heap, d0, "ts", 99.0)
    assert arr.cols["lastChanged.ts"].data[0] == 99.0
    assert arr.cols["deletedAt.ts"].data[0] == 99.0
    via_other = get_property(heap, array_read(heap, arr, 0), "deletedAt")
    assert get_property(heap, via_other, "ts") == 99.0
    assert same_identity(via_other, d0)


def test_same_element_at_two_indices_write_fans_out():
    heap = Heap()
    o = heap.alloc([("x", 1.0)])
    other = heap.alloc([("x", 2.0)])
    arr = new_array(heap, [o, other, o])
    assert try_transform(heap, arr).transformed
    assert arr.aliased
    proxy_set(heap, array_read(heap, arr, 0), "x", 7.0)
    assert arr.cols["x"].data[0] == 7.0
    assert arr.cols["x"].data[2] == 7.0
    assert get_property(heap, array_read(heap, arr, 2), "x") == 7.0


def test_object_in_two_arrays_restore_one_keeps_other_serving():
    heap = Heap()
    objs = [heap.alloc([("x", float(i))]) for i in range(4)]
    a = new_array(heap, objs)
    b = new_array(heap, list(objs))
    assert try_transform(heap, a).transformed
    assert try_transform(heap, b).transformed
    proxy_set(heap, array_read(heap, a, 0), "x", 5.0)
    assert b.cols["x"].data[0] == 5.0  # fan-out reached b
    restore(heap, a)
    # Objects are still proxies of b; reads through either array agree.
    assert get_property(heap, array_read(heap, b, 0), "x") == 5.0
    assert get_property(heap, array_read(heap, a, 0), "x") == 5.0
    assert array_read(heap, a, 1).pd is not None
    restore(heap, b)
    assert all(o.pd is None for o in objs)
    assert get_property(heap, objs[0], "x") == 5.0


def test_columnar_append_and_replace():
    heap = Heap()
    arr = make_clients(heap, 4)
    assert try_transform(heap, arr).transformed
    cc = heap.alloc([("pan", 1.5), ("service", 2.5)])
    fresh = heap.alloc([("ssn", 77.0), ("zip", 4040.0), ("ccInfo", cc)])
    array_write(heap, arr, 4, fresh)
    assert arr.is_columnar
    assert arr.length == 5
    assert all(len(c.data) == 5 for c in arr.cols.values())
    assert get_property(heap, array_read(heap, arr, 4), "zip") == 4040.0
    assert fresh.pd is not None

    replacement_cc = heap.alloc([("pan", 9.0), ("service", 9.0)])
    replacement = heap.alloc([("ssn", 88.0), ("zip", 1111.0), ("ccInfo", replacement_cc)])
    old = array_read(heap, arr, 0)
    array_write(heap, arr, 0, replacement)
    assert arr.is_columnar
    assert get_property(heap, array_read(heap, arr, 0), "zip") == 1111.0
    # Replaced element became a plain object again with its old values.
    assert old.pd is None
    assert get_property(heap, old, "ssn") == 0.0


def test_columnar_write_incompatible_restores():
    heap = Heap()
    arr = make_clients(heap, 4)
    assert try_transform(heap, arr).transformed
    array_write(heap, arr, 0, 3.5)
    assert not arr.is_columnar
    assert array_read(heap, arr, 0) == 3.5

    arr2 = make_clients(heap, 4)
    assert try_transform(heap, arr2).transformed
    cc = heap.alloc([("pan", 1.0), ("service", 1.0)])
    obj = heap.alloc([("ssn", 1.0), ("zip", 1.0), ("ccInfo", cc)])
    array_write(heap, arr2, 9, obj)  # creates holes
    assert not arr2.is_columnar
    assert array_read(heap, arr2, 6) is UNDEF
    assert array_read(heap, arr2, 9) is obj


def test_array_read_bounds():
    heap = Heap()
    arr = new_array(heap, [1.0, 2.0])
    assert array_read(heap, arr, 1) == 2.0
    assert array_read(heap, arr, 2) is UNDEF
    with pytest.raises(LanguageError):
        array_read(heap, arr, -1)
    with pytest.raises(LanguageError):
        array_write(heap, arr, -2, 0.0)


def test_transform_then_restore_then_transform_same_columns():
    heap = Heap()
    arr = make_clients(heap, 6)
    assert try_transform(heap, arr).transformed
    first = {p: list(c.data) for p, c in arr.cols.items()}
    restore(heap, arr)
    assert try_transform(heap, arr).transformed
    second = {p: list(c.data) for p, c in arr.cols.items()}
    assert first == second


def test_dump_array_shapes():
    heap = Heap()
    arr = make_clients(heap, 3)
    d = dump_array(arr)
    assert d["storage"] == "row" and d["length"] == 3
    assert try_transform(heap, arr).transformed
    d = dump_array(arr)
    assert d["storage"] == "columnar"
    assert d["columns"]["ccInfo.pan"]["kind"] == "number"
    assert d["proxy_triples"] == 3


def random_ops_differential(seed, n_ops=120):
    """Apply one random op stream to a transforming heap and a row-only heap;
    compare every observable result. The row-only engine is the oracle."""
    rng = random.Random(seed)

    def build(heap):
        objs = [heap.alloc([("x", float(i)), ("tag", "s%d" % (i % 3))]) for i in range(6)]
        dates = [heap.alloc([("ts", float(i * 10))]) for i in range(3)]
        holders = [
            heap.alloc([("v", float(i)), ("last", dates[i % 3]), ("del", dates[i % 3])])
            for i in range(6)
        ]
        arrays = [
            new_array(heap, objs[:4]),
            new_array(heap, objs[1:5]),
            new_array(heap, holders),
            new_array(heap, [objs[0], objs[1], objs[0]]),
        ]
        return objs, holders, arrays

    ha, hb = Heap(), Heap()
    objs_a, hold_a, arrs_a = build(ha)
    objs_b, hold_b, arrs_b = build(hb)

    def obj_pair(i):
        pool_a = objs_a + hold_a
        pool_b = objs_b + hold_b
        return pool_a[i % len(pool_a)], pool_b[i % len(pool_b)]

    log_a, log_b = [], []
    for step in range(n_ops):
        op = rng.randrange(8)
        ai = rng.randrange(len(arrs_a))
        if op == 0:
            idx = rng.randrange(8)
            va = array_read(ha, arrs_a[ai], idx)
            vb = array_read(hb, arrs_b[ai], idx)
            log_a.append(observe(ha, va))
            log_b.append(observe(hb, vb))
        elif op == 1:
            i = rng.randrange(12)
            name = rng.choice(["x", "tag", "v", "zz"])
            oa, ob = obj_pair(i)
            log_a.append(observe(ha, get_property(ha, oa, name)))
            log_b.append(observe(hb, get_property(hb, ob, name)))
        elif op == 2:
            i = rng.randrange(12)
            name = rng.choice(["x", "tag", "v", "fresh"])
            v = rng.choice([float(step), "w%d" % (step % 4), True, float(step) * 2])
            oa, ob = obj_pair(i)
            set_property(ha, oa, name, v)
            set_property(hb, ob, name, v)
        elif op == 3:
            # only side a may transform; b is the row-storage oracle
            if arrs_a[ai].row is not None:
                try_transform(ha, arrs_a[ai])
        elif op == 4:
            if arrs_a[ai].cols is not None:
                restore(ha, arrs_a[ai])
        elif op == 5:
            idx = rng.randrange(8)
            v = float(step)
            array_write(ha, arrs_a[ai], idx, v)
            array_write(hb, arrs_b[ai], idx, v)
        elif op == 6:
            i = rng.randrange(3)
            da = get_property(ha, hold_a[i], "last")
            db = get_property(hb, hold_b[i], "last")
            set_property(ha, da, "ts", float(step))
            set_property(hb, db, "ts", float(step))
        else:
            i = rng.randrange(6)
            va = get_property(ha, get_property(ha, hold_a[i % 6], "del"), "ts")
            vb = get_property(hb, get_property(hb, hold_b[i % 6], "del"), "ts")
            log_a.append(va)
            log_b.append(vb)
    assert log_a == log_b
    for aa, ab in zip(arrs_a, arrs_b):
        assert deep_state(ha, aa) == deep_state(hb, ab)


def observe(heap, v):
    from colvm.values import HeapObject

    if type(v) is HeapObject:
        return ("obj", v.id)
    if type(v) is DynArray:
        return ("arr", v.id)
    return v


def deep_state(heap, arr):
    out = []
    for i in range(arr.length):
        v = array_read(heap, arr, i)
        out.append(observe(heap, v))
        from colvm.values import HeapObject

        if type(v) is HeapObject:
            out.append(
                sorted(
                    (n, observe(heap, get_property(heap, v, n)))
                    for n in v.shape.names
                    if not isinstance(get_property(heap, v, n), HeapObject)
                )
            )
    return out


@pytest.mark.parametrize("seed", range(25))
def test_differential_random_ops(seed):
    random_ops_differential(seed)
