from colvm.values import (
    UNDEF,
    Heap,
    ValueKind,
    get_property,
    kind_of,
    same_identity,
    set_property,
)


def test_kind_of_native_encoding():
    heap = Heap()
    assert kind_of(1.5) is ValueKind.NUMBER
    assert kind_of(True) is ValueKind.BOOL
    assert kind_of(7) is ValueKind.DATE
    assert kind_of("s") is ValueKind.STR
    assert kind_of(UNDEF) is ValueKind.UNDEFINED
    assert kind_of(heap.alloc([("a", 1.0)])) is ValueKind.OBJECT


def test_get_set_property_roundtrip():
    heap = Heap()
    o = heap.alloc([("zip", 4040.0)])
    assert get_property(heap, o, "zip") == 4040.0
    assert get_property(heap, o, "name") is UNDEF
    set_property(heap, o, "zip", 2.0)
    assert get_property(heap, o, "zip") == 2.0


def test_new_property_migrates_shape():
    heap = Heap()
    o = heap.alloc([("a", 1.0)])
    s0 = o.shape
    set_property(heap, o, "b", 3.0)
    assert o.shape is not s0
    assert o.shape.names == ("a", "b")
    assert get_property(heap, o, "a") == 1.0
    assert get_property(heap, o, "b") == 3.0


def test_kind_change_migrates_shape():
    heap = Heap()
    o = heap.alloc([("a", 1.0)])
    set_property(heap, o, "a", "str")
    assert o.shape.kinds["a"] is ValueKind.STR


def test_shape_interning():
    heap = Heap()
    objs = [heap.alloc([("a", float(i)), ("b", "x")]) for i in range(10**4)]
    assert len({o.shape.id for o in objs}) == 1
    different = heap.alloc([("b", "x"), ("a", 1.0)])  # order matters
    assert different.shape is not objs[0].shape


def test_same_identity():
    heap = Heap()
    a = heap.alloc([("x", 1.0)])
    b = heap.alloc([("x", 1.0)])
    assert same_identity(a, a)
    assert not same_identity(a, b)
    assert same_identity(3.0, 3.0)
    assert same_identity(5, 5)  # date timestamps
    assert not same_identity(5, 5.0)  # date vs number
    assert not same_identity(True, 1.0)
    assert same_identity(UNDEF, UNDEF)


def test_date_objects():
    heap = Heap()
    d1 = heap.alloc_date(1000)
    d2 = heap.alloc_date(1000)
    assert d1.shape is d2.shape is heap.date_shape
    assert d1.shape.is_date
    assert get_property(heap, d1, "timestamp") == 1000
    assert not same_identity(d1, d2)  # refs compare by object


def test_string_interning():
    heap = Heap()
    a = heap.intern("go" + "ld")
    b = heap.intern("gold")
    assert a is b
