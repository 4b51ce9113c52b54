"""Dynamic value and object model shared by the interpreter and the columnar engine.

Values use a native Python encoding so hot paths avoid boxing:

    Number    -> float
    Bool      -> bool          (checked before int: bool is an int subtype)
    Date      -> int           (milliseconds since epoch)
    Str       -> str           (canonical instance from the engine intern table)
    Ref       -> HeapObject | DynArray
    Undefined -> UNDEF singleton

Row storage additionally uses the HOLE singleton for elements that were never
written; holes read back as Undefined but make an array sparse.

Date *objects* at the language level are ordinary heap objects with the
canonical one-property shape {timestamp: Date}; the int encoding above is the
timestamp payload stored in that slot (and in date columns).
"""

from __future__ import annotations

from enum import Enum


class _Singleton:
    __slots__ = ("_name",)

    def __init__(self, name):
        self._name = name

    def __repr__(self):
        return self._name


UNDEF = _Singleton("undefined")
HOLE = _Singleton("<hole>")


class ValueKind(Enum):
    NUMBER = "number"
    BOOL = "bool"
    STR = "str"
    DATE = "date"
    OBJECT = "object"
    ARRAY = "array"
    UNDEFINED = "undefined"


class EngineError(Exception):
    """Internal fault: an engine invariant was violated (not a language error)."""


class LanguageError(Exception):
    """Error attributable to the guest program (negative index, bad operand, ...)."""

    def __init__(self, message, line=None, col=None):
        super().__init__(message)
        self.line = line
        self.col = col


def kind_of(v) -> ValueKind:
    t = type(v)
    if t is float:
        return ValueKind.NUMBER
    if t is bool:
        return ValueKind.BOOL
    if t is int:
        return ValueKind.DATE
    if t is str:
        return ValueKind.STR
    if t is HeapObject:
        return ValueKind.OBJECT
    if v is UNDEF:
        return ValueKind.UNDEFINED
    # DynArray lives in columnar.py; avoid the import on the hot path.
    if t.__name__ == "DynArray":
        return ValueKind.ARRAY
    raise EngineError(f"not a guest value: {v!r}")


class Shape:
    """Hidden class: an interned, ordered (name, kind) sequence.

    Two objects with equal property sequences share one Shape instance, so
    shape identity is pointer identity.
    """

    __slots__ = ("id", "props", "names", "kinds", "is_date")

    def __init__(self, sid, props):
        self.id = sid
        self.props = props  # tuple of (name, ValueKind)
        self.names = tuple(n for n, _ in props)
        self.kinds = dict(props)
        self.is_date = props == (("timestamp", ValueKind.DATE),)

    def __repr__(self):
        return "Shape#%d{%s}" % (self.id, ",".join(self.names))


class HeapObject:
    """A guest object. When `pd` is set the object is a proxy: its property
    values live in the property arrays named by the descriptor's triples and
    `slots` is empty. The object id never changes across transformation or
    restoration."""

    __slots__ = ("id", "shape", "slots", "pd")

    def __init__(self, oid, shape, slots):
        self.id = oid
        self.shape = shape
        self.slots = slots
        self.pd = None

    def __repr__(self):
        tag = " proxy" if self.pd is not None else ""
        return f"<obj#{self.id}{tag} {self.shape!r}>"


class Heap:
    """Object allocator plus the shape and string intern tables.

    Single-threaded: one Heap per engine instance.
    """

    def __init__(self):
        self._next_id = 1
        self._shapes = {}  # props tuple -> Shape
        self._strings = {}  # str -> canonical str
        self._next_shape = 1
        self.date_shape = self.shape_for((("timestamp", ValueKind.DATE),))

    def fresh_id(self):
        i = self._next_id
        self._next_id = i + 1
        return i

    def intern(self, s: str) -> str:
        c = self._strings.get(s)
        if c is None:
            self._strings[s] = s
            return s
        return c

    def shape_for(self, props) -> Shape:
        props = tuple(props)
        sh = self._shapes.get(props)
        if sh is None:
            sh = Shape(self._next_shape, props)
            self._next_shape += 1
            self._shapes[props] = sh
        return sh

    def alloc(self, pairs) -> HeapObject:
        """Allocate an object from an ordered (name, value) sequence."""
        props = tuple((n, kind_of(v)) for n, v in pairs)
        sh = self.shape_for(props)
        return HeapObject(self.fresh_id(), sh, {n: v for n, v in pairs})

    def alloc_date(self, ms: int) -> HeapObject:
        return HeapObject(self.fresh_id(), self.date_shape, {"timestamp": int(ms)})


def get_property(heap, obj: HeapObject, name: str):
    """Read a property. Proxies are routed through the columnar engine;
    absent properties read as Undefined."""
    if obj.pd is not None:
        from .columnar import proxy_get

        return proxy_get(heap, obj, name)
    return obj.slots.get(name, UNDEF)


def set_property(heap, obj: HeapObject, name: str, v):
    """Write a property. New names and kind changes migrate the shape;
    proxy writes go through the columnar engine and may restore arrays."""
    if obj.pd is not None:
        from .columnar import proxy_set

        proxy_set(heap, obj, name, v)
        return
    k = kind_of(v)
    old = obj.shape.kinds.get(name)
    if old is None:
        obj.shape = heap.shape_for(obj.shape.props + ((name, k),))
    elif old is not k:
        obj.shape = heap.shape_for(
            tuple((n, k if n == name else kk) for n, kk in obj.shape.props)
        )
    obj.slots[name] = v


def same_identity(a, b) -> bool:
    """Identity comparison: refs by object, dates by timestamp, primitives by
    value. Mixed-kind pairs are never identical."""
    ta, tb = type(a), type(b)
    if ta is not tb:
        # bool/int confusion cannot happen: bools and date ints are distinct types
        return False
    if ta is HeapObject or ta.__name__ == "DynArray":
        return a is b
    if a is UNDEF or b is UNDEF:
        return a is b
    return a == b


def is_date_object(v) -> bool:
    return type(v) is HeapObject and v.shape.is_date


def date_ts(heap, v) -> int:
    """Timestamp of a date object (works for plain and proxified dates)."""
    return get_property(heap, v, "timestamp")
