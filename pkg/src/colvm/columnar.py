"""Storage-transformation engine.

Arrays start row-oriented. `try_transform` verifies eligibility and rewrites a
row array into per-property columns, converting every element (and, at depth
2, every uniform nested object) into a proxy whose descriptor holds
(array, path, index) triples. Reads pick any triple; writes fan out over all
of them, which covers every aliasing case: the same object in several arrays,
at several indices of one array, or nested under several properties.
`restore` rebuilds plain objects in place, preserving identity.
"""

from __future__ import annotations

from enum import Enum

from .values import (
    HOLE,
    UNDEF,
    EngineError,
    HeapObject,
    LanguageError,
    ValueKind,
    get_property,
    kind_of,
    set_property,
)

# Property kinds that can live in a typed column.
PRIMITIVE_KINDS = (ValueKind.NUMBER, ValueKind.BOOL, ValueKind.STR, ValueKind.DATE)


class TransformOutcome(Enum):
    TRANSFORMED = "transformed"
    REJECTED_NON_UNIFORM = "rejected-non-uniform"
    REJECTED_UNSUPPORTED_KIND = "rejected-unsupported-kind"
    REJECTED_SPARSE = "rejected-sparse"
    REJECTED_TOO_DEEP = "rejected-too-deep"


class ArrayStats:
    """Profiling counters; monotonically non-decreasing for the array's life."""

    __slots__ = ("reads", "writes", "rejected", "rejected_at_length", "armed")

    def __init__(self):
        self.reads = 0
        self.writes = 0
        self.rejected = False
        self.rejected_at_length = 0
        self.armed = True  # transform trigger; re-armed by restore

    def latch_rejection(self, length):
        self.rejected = True
        self.rejected_at_length = length


class PropertyArray:
    """One column: all values of one (possibly dot-joined) property path."""

    __slots__ = ("path", "kind", "data")

    def __init__(self, path, kind, data):
        self.path = path
        self.kind = kind
        self.data = data

    def __repr__(self):
        return f"<col {self.path}:{self.kind.value} n={len(self.data)}>"


class ProxyDescriptor:
    """Locations of a proxified object: a set of (array, path, index) triples.

    `path` is "" for first-level proxies (the element objects) and the
    nested-property name for depth-2 proxies. Triple order is insertion order;
    reads use the first triple, writes iterate all of them.
    """

    __slots__ = ("triples",)

    def __init__(self):
        self.triples = []

    def add(self, arr, path, index):
        t = (arr, path, index)
        if t not in self.triples:
            self.triples.append(t)

    def drop_array(self, arr):
        self.triples = [t for t in self.triples if t[0] is not arr]

    def arrays(self):
        seen = []
        for a, _, _ in self.triples:
            if a not in seen:
                seen.append(a)
        return seen


class DynArray:
    """A guest array: either row storage (`row` list) or columnar storage
    (`cols`/`elems`/`nested_*`). Exactly one of `row` / `cols` is set.

    `aliased` latches once any proxy of this array holds more than one triple;
    the optimizer's fast path refuses in-place column writes on aliased
    arrays because they would need fan-out.
    """

    __slots__ = (
        "id",
        "row",
        "cols",
        "elems",
        "nested_elems",
        "nested_shape",
        "elem_shape",
        "stats",
        "aliased",
    )

    def __init__(self, aid, row):
        self.id = aid
        self.row = row  # list of values / HOLE, or None when columnar
        self.cols = None  # dict path -> PropertyArray
        self.elems = None  # list of first-level proxies
        self.nested_elems = None  # dict prop -> list of nested proxies
        self.nested_shape = None  # dict prop -> Shape
        self.elem_shape = None
        self.stats = ArrayStats()
        self.aliased = False

    @property
    def is_columnar(self):
        return self.cols is not None

    @property
    def length(self):
        return len(self.row) if self.cols is None else len(self.elems)

    def __repr__(self):
        kind = "columnar" if self.is_columnar else "row"
        return f"<arr#{self.id} {kind} n={self.length}>"


def new_array(heap, values=None) -> DynArray:
    return DynArray(heap.fresh_id(), list(values) if values is not None else [])


class TransformResult:
    __slots__ = ("outcome",)

    def __init__(self, outcome):
        self.outcome = outcome

    @property
    def transformed(self):
        return self.outcome is TransformOutcome.TRANSFORMED


def _read_prop(heap, obj, name):
    # Element objects may already be proxies of other columnar arrays.
    if obj.pd is not None:
        return proxy_get(heap, obj, name)
    return obj.slots[name]


def _mark_alias(pd):
    if len(pd.triples) > 1:
        for a, _, _ in pd.triples:
            a.aliased = True


def try_transform(heap, arr: DynArray, multi_level=True) -> TransformResult:
    """Verify and transform `arr` to columnar storage.

    Verification rejects empty arrays, non-object or shape-diverse elements,
    holes, and unsupported property kinds (arrays, undefined). Nested-object
    properties expand into dot-joined columns when their objects share one
    all-primitive shape (depth 2); otherwise that property falls back to a
    plain reference column and its objects stay untouched.
    """
    if arr.cols is not None:
        raise EngineError("try_transform on columnar array")
    row = arr.row
    n = len(row)
    if n == 0:
        return TransformResult(TransformOutcome.REJECTED_NON_UNIFORM)

    shape = None
    for v in row:
        if v is HOLE:
            return TransformResult(TransformOutcome.REJECTED_SPARSE)
        if type(v) is not HeapObject:
            return TransformResult(TransformOutcome.REJECTED_NON_UNIFORM)
        if shape is None:
            shape = v.shape
        elif v.shape is not shape:
            return TransformResult(TransformOutcome.REJECTED_NON_UNIFORM)

    for _, k in shape.props:
        if k is ValueKind.ARRAY or k is ValueKind.UNDEFINED:
            return TransformResult(TransformOutcome.REJECTED_UNSUPPORTED_KIND)

    # Plan nested expansion per object-valued property.
    expand = {}  # prop -> nested Shape
    for name, k in shape.props:
        if k is not ValueKind.OBJECT:
            continue
        if not multi_level:
            continue
        nested = None
        ok = True
        for v in row:
            x = _read_prop(heap, v, name)
            if type(x) is not HeapObject:
                ok = False
                break
            if nested is None:
                nested = x.shape
            elif x.shape is not nested:
                ok = False
                break
        if ok and all(nk in PRIMITIVE_KINDS for _, nk in nested.props):
            expand[name] = nested
        # Too-deep or non-uniform nesting: keep a plain reference column.

    has_proxies = any(o.pd is not None for o in row)
    cols = {}
    nested_elems = {}
    for name, k in shape.props:
        if name in expand:
            if has_proxies:
                refs = [_read_prop(heap, o, name) for o in row]
            else:
                refs = [o.slots[name] for o in row]
            nested_elems[name] = refs
            for nname, nk in expand[name].props:
                path = name + "." + nname
                cols[path] = PropertyArray(
                    path, nk, [_read_prop(heap, x, nname) for x in refs]
                )
        else:
            if has_proxies:
                data = [_read_prop(heap, o, name) for o in row]
            else:
                data = [o.slots[name] for o in row]
            cols[name] = PropertyArray(name, k, data)

    # Install descriptors only after all values were pulled out.
    for i, o in enumerate(row):
        if o.pd is None:
            o.pd = ProxyDescriptor()
        o.slots = {}
        o.pd.add(arr, "", i)
        _mark_alias(o.pd)
    for name, refs in nested_elems.items():
        for i, x in enumerate(refs):
            if x.pd is None:
                x.pd = ProxyDescriptor()
            x.slots = {}
            x.pd.add(arr, name, i)
            _mark_alias(x.pd)

    arr.cols = cols
    arr.elems = row
    arr.nested_elems = nested_elems
    arr.nested_shape = dict(expand)
    arr.elem_shape = shape
    arr.row = None
    arr.stats.armed = False
    return TransformResult(TransformOutcome.TRANSFORMED)


def _release(heap, obj, arr, slot_values):
    """Drop `arr`'s triples from obj; if none remain, rebuild plain slots."""
    pd = obj.pd
    if pd is None:
        return
    pd.drop_array(arr)
    if not pd.triples:
        obj.pd = None
        obj.slots = slot_values()


def restore(heap, arr: DynArray):
    """Rebuild row storage from the columns, reusing the original objects.

    Objects shared with other columnar arrays keep their remaining triples
    and stay proxies; everyone else gets plain slots populated from this
    array's column values.
    """
    if arr.cols is None:
        raise EngineError("restore on row array")
    cols = arr.cols
    elems = arr.elems
    nested_elems = arr.nested_elems
    nested_shape = arr.nested_shape
    shape = arr.elem_shape

    # Nested proxies first so element slot rebuilding can reference them.
    for name, refs in nested_elems.items():
        nshape = nested_shape[name]
        done = set()
        for i, x in enumerate(refs):
            if id(x) in done:
                continue
            done.add(id(x))
            _release(
                heap,
                x,
                arr,
                lambda i=i: {n: cols[name + "." + n].data[i] for n, _ in nshape.props},
            )

    done = set()
    for i, o in enumerate(elems):
        if id(o) in done:
            continue
        done.add(id(o))

        def build(i=i):
            slots = {}
            for n, _ in shape.props:
                if n in nested_elems:
                    slots[n] = nested_elems[n][i]
                else:
                    slots[n] = cols[n].data[i]
            return slots

        _release(heap, o, arr, build)

    arr.row = list(elems)
    arr.cols = None
    arr.elems = None
    arr.nested_elems = None
    arr.nested_shape = None
    arr.elem_shape = None
    arr.stats.armed = True


def _join(path, name):
    return path + "." + name if path else name


def proxy_get(heap, obj: HeapObject, name: str):
    """Read a property of a proxified object from its property arrays.

    All triples resolve to the same value (writes fan out), so the first one
    serves every read. Nested-object properties yield the nested proxy ref.
    """
    arr, path, i = obj.pd.triples[0]
    col = arr.cols.get(_join(path, name))
    if col is not None:
        return col.data[i]
    if not path:
        refs = arr.nested_elems.get(name)
        if refs is not None:
            return refs[i]
    return UNDEF


def proxy_set(heap, obj: HeapObject, name: str, v):
    """Write a property of a proxified object.

    Kind-compatible writes land in place on every triple's column. Anything
    else (kind mismatch, new property, replacing a nested object) restores
    every owning array and then writes on the plain object.
    """
    pd = obj.pd
    arr0, path0, _ = pd.triples[0]
    col0 = arr0.cols.get(_join(path0, name))
    if col0 is not None and kind_of(v) is col0.kind:
        for arr, path, i in pd.triples:
            arr.cols[_join(path, name)].data[i] = v
        return
    for arr in pd.arrays():
        restore(heap, arr)
    set_property(heap, obj, name, v)


def array_read(heap, arr: DynArray, idx: int):
    """Indexed element read. Out-of-bounds reads yield Undefined; negative
    indices are a language error. Counts into the array's read stats."""
    if idx < 0:
        raise LanguageError(f"negative array index {idx}")
    arr.stats.reads += 1
    if arr.cols is None:
        if idx >= len(arr.row):
            return UNDEF
        v = arr.row[idx]
        return UNDEF if v is HOLE else v
    if idx >= len(arr.elems):
        return UNDEF
    return arr.elems[idx]


def _compatible_with(heap, arr, v):
    """Can `v` be decomposed into arr's columns (shape and nesting match)?"""
    if type(v) is not HeapObject or v.shape is not arr.elem_shape:
        return False
    for name, nshape in arr.nested_shape.items():
        x = get_property(heap, v, name)
        if type(x) is not HeapObject or x.shape is not nshape:
            return False
    return True


def _decompose_at(heap, arr, v, idx):
    """Write object v's values into all columns at idx and proxify it."""
    shape = arr.elem_shape
    vals = {n: get_property(heap, v, n) for n, _ in shape.props}
    nested_vals = {}
    for name in arr.nested_elems:
        x = vals[name]
        nested_vals[name] = {
            n: get_property(heap, x, n) for n, _ in arr.nested_shape[name].props
        }

    append = idx == len(arr.elems)
    if not append:
        # Release the element (and its nested objects) being replaced.
        for name, refs in arr.nested_elems.items():
            ox = refs[idx]
            nshape = arr.nested_shape[name]
            ox.pd.triples = [
                t
                for t in ox.pd.triples
                if not (t[0] is arr and t[1] == name and t[2] == idx)
            ]
            if not ox.pd.triples:
                ox.pd = None
                ox.slots = {
                    n: arr.cols[name + "." + n].data[idx] for n, _ in nshape.props
                }
        old = arr.elems[idx]
        old.pd.triples = [
            t
            for t in old.pd.triples
            if not (t[0] is arr and t[1] == "" and t[2] == idx)
        ]
        if not old.pd.triples:
            old.pd = None
            slots = {}
            for n, _ in arr.elem_shape.props:
                if n in arr.nested_elems:
                    slots[n] = arr.nested_elems[n][idx]
                else:
                    slots[n] = arr.cols[n].data[idx]
            old.slots = slots

    for name, _k in shape.props:
        if name in arr.nested_elems:
            x = vals[name]
            nshape = arr.nested_shape[name]
            if append:
                arr.nested_elems[name].append(x)
                for n, _ in nshape.props:
                    arr.cols[name + "." + n].data.append(nested_vals[name][n])
            else:
                arr.nested_elems[name][idx] = x
                for n, _ in nshape.props:
                    arr.cols[name + "." + n].data[idx] = nested_vals[name][n]
            if x.pd is None:
                x.pd = ProxyDescriptor()
            x.slots = {}
            x.pd.add(arr, name, idx)
            _mark_alias(x.pd)
        else:
            if append:
                arr.cols[name].data.append(vals[name])
            else:
                arr.cols[name].data[idx] = vals[name]
    if append:
        arr.elems.append(v)
    else:
        arr.elems[idx] = v
    if v.pd is None:
        v.pd = ProxyDescriptor()
    v.slots = {}
    v.pd.add(arr, "", idx)
    _mark_alias(v.pd)


def array_write(heap, arr: DynArray, idx: int, v):
    """Indexed element write.

    Row storage: in-bounds writes are plain, idx == length appends, larger
    indices create holes (making the array sparse). Columnar storage accepts
    shape-compatible objects in place (including dense append); anything else
    restores first.
    """
    if idx < 0:
        raise LanguageError(f"negative array index {idx}")
    arr.stats.writes += 1
    if arr.cols is None:
        row = arr.row
        n = len(row)
        if idx < n:
            row[idx] = v
        elif idx == n:
            row.append(v)
        else:
            row.extend([HOLE] * (idx - n))
            row.append(v)
        return
    if idx <= len(arr.elems) and _compatible_with(heap, arr, v):
        _decompose_at(heap, arr, v, idx)
        return
    restore(heap, arr)
    array_write(heap, arr, idx, v)
    arr.stats.writes -= 1  # the recursive call counted it again


def array_length(arr: DynArray) -> int:
    return arr.length


def dump_array(arr: DynArray) -> dict:
    """JSON-friendly storage inspection (CLI `dump-array`)."""
    if arr.cols is None:
        holes = sum(1 for v in arr.row if v is HOLE)
        return {
            "storage": "row",
            "length": len(arr.row),
            "holes": holes,
            "reads": arr.stats.reads,
            "writes": arr.stats.writes,
        }
    return {
        "storage": "columnar",
        "length": len(arr.elems),
        "columns": {
            p: {"kind": c.kind.value, "length": len(c.data)}
            for p, c in sorted(arr.cols.items())
        },
        "nested": sorted(arr.nested_elems),
        "proxy_triples": sum(len(o.pd.triples) for o in arr.elems),
        "aliased": arr.aliased,
        "reads": arr.stats.reads,
        "writes": arr.stats.writes,
    }
