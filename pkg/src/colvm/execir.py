"""Instrumented node-walking IR executor.

Walks the control chain, keeping values in an environment keyed by node id.
Every heap touch counts into heap_derefs (object slot reads, column table
lookups, column element accesses); loop iterations count per loop copy at
their back-edges, attributed via the origin/role tags the optimizer leaves on
LoopBegin nodes. This executor is the metrics oracle; the compiled backend
must agree with it on all observable values.
"""

from __future__ import annotations

from . import ir
from .columnar import (
    DynArray,
    array_length,
    array_read,
    array_write,
    new_array,
    restore,
)
from .interp import truthy, value_arith, value_eq, value_rel
from .values import (
    UNDEF,
    EngineError,
    HeapObject,
    LanguageError,
    get_property,
    set_property,
)

_MISSING = object()


def transitive_check(arr, spec: str) -> bool:
    """Runtime semantics of the Transitive marker conditions."""
    if type(arr) is not DynArray or arr.cols is None:
        return False
    if spec.startswith("hascol:"):
        return spec[7:] in arr.cols
    if spec.startswith("colkind:"):
        _, path, kind = spec.split(":")
        col = arr.cols.get(path)
        return col is not None and col.kind.value == kind and not arr.aliased
    if spec.startswith("datecmp:"):
        q = spec[8:]
        sh = arr.nested_shape.get(q)
        return sh is not None and sh.is_date
    if spec.startswith("nocol:"):
        return spec[6:] not in arr.cols
    raise EngineError(f"unknown transitive condition {spec!r}")


class IrExecutor:
    def __init__(self, engine):
        self.engine = engine
        self.heap = engine.heap

    def run(self, g: ir.IrGraph, args):
        eng = self.engine
        heap = self.heap
        nodes = g.nodes
        metrics = eng.metrics

        # end/loopend -> (merge id, pred index)
        jump = {}
        phis = {}
        for n in nodes.values():
            if n.kind in (ir.MERGE, ir.LOOP_BEGIN):
                phis[n.id] = [p for p in nodes.values() if p.kind == ir.PHI and p.owner == n.id]
                for k, p in enumerate(n.preds):
                    jump[p] = (n.id, k)

        env = {}

        def value_of(nid):
            v = env.get(nid, _MISSING)
            if v is not _MISSING:
                return v
            n = nodes[nid]
            if n.kind == ir.CONST:
                v = n.value
                if type(v) is str:
                    v = heap.intern(v)
                env[nid] = v
                return v
            if n.kind == ir.PARAM:
                v = args[n.index] if n.index < len(args) else UNDEF
                env[nid] = v
                return v
            raise EngineError(f"unresolved input %{nid} ({n.kind})")

        def transfer(end_id):
            mid, k = jump[end_id]
            ps = phis[mid]
            if ps:
                vals = [value_of(p.inputs[k]) for p in ps]
                for p, v in zip(ps, vals):
                    env[p.id] = v
            return mid

        loop_stack = []
        cur = g.entry
        while True:
            n = nodes[cur]
            kind = n.kind
            metrics.ir_ops += 1
            if kind == ir.ARITH:
                a = value_of(n.inputs[0])
                if n.op == "not":
                    env[cur] = not truthy(a, n)
                elif n.op == "neg":
                    if type(a) is not float:
                        raise LanguageError("unary minus needs a number")
                    env[cur] = -a
                else:
                    env[cur] = value_arith(
                        {"add": "+", "sub": "-", "mul": "*", "div": "/"}[n.op],
                        a,
                        value_of(n.inputs[1]),
                    )
                cur = n.succs[0]
            elif kind == ir.COMPARE:
                a = value_of(n.inputs[0])
                b = value_of(n.inputs[1])
                op = n.op
                if op == "eq":
                    env[cur] = value_eq(heap, a, b)
                elif op == "ne":
                    env[cur] = not value_eq(heap, a, b)
                elif op == "startswith":
                    if type(a) is not str or type(b) is not str:
                        raise LanguageError("startsWith needs two strings")
                    env[cur] = a.startswith(b)
                else:
                    env[cur] = value_rel(
                        heap, {"lt": "<", "le": "<=", "gt": ">", "ge": ">="}[op], a, b
                    )
                cur = n.succs[0]
            elif kind == ir.IF:
                c = value_of(n.inputs[0])
                cur = n.succs[0] if truthy(c, n) else n.succs[1]
            elif kind == ir.ARRAY_READ:
                arr = value_of(n.inputs[0])
                idx = value_of(n.inputs[1])
                if type(arr) is not DynArray:
                    raise LanguageError(f"indexing a {type(arr).__name__}")
                if type(idx) is not float:
                    raise LanguageError("index must be a number")
                metrics.heap_derefs += 1
                if loop_stack:
                    metrics.loop_derefs[loop_stack[-1]] += 1
                env[cur] = array_read(heap, arr, int(idx))
                cur = n.succs[0]
            elif kind == ir.PROP_READ:
                obj = value_of(n.inputs[0])
                if type(obj) is not HeapObject:
                    raise LanguageError(f"property read on {type(obj).__name__}")
                d = 1 if obj.pd is None else 2
                metrics.heap_derefs += d
                if loop_stack:
                    metrics.loop_derefs[loop_stack[-1]] += d
                env[cur] = get_property(heap, obj, n.name)
                cur = n.succs[0]
            elif kind == ir.INTRINSIC:
                cur = self.intrinsic(n, env, value_of, metrics, loop_stack)
            elif kind == ir.END:
                cur = transfer(cur)
            elif kind == ir.LOOP_END:
                metrics.count_loop_iter(g.name, nodes[n.owner])
                cur = transfer(cur)
            elif kind in (ir.MERGE, ir.START):
                cur = n.succs[0]
            elif kind == ir.LOOP_BEGIN:
                if not loop_stack or loop_stack[-1][0] != n.id:
                    loop_stack.append((n.id, g.name, n))
                cur = n.succs[0]
            elif kind == ir.LOOP_EXIT:
                while loop_stack and loop_stack[-1][0] != n.owner:
                    loop_stack.pop()
                if loop_stack:
                    loop_stack.pop()
                cur = n.succs[0]
            elif kind == ir.RETURN:
                return value_of(n.inputs[0]) if n.inputs else UNDEF
            elif kind == ir.ARRAY_WRITE:
                arr = value_of(n.inputs[0])
                idx = value_of(n.inputs[1])
                v = value_of(n.inputs[2])
                if type(arr) is not DynArray or type(idx) is not float:
                    raise LanguageError("bad indexed write")
                metrics.heap_derefs += 1
                if loop_stack:
                    metrics.loop_derefs[loop_stack[-1]] += 1
                array_write(heap, arr, int(idx), v)
                env[cur] = UNDEF
                cur = n.succs[0]
            elif kind == ir.PROP_WRITE:
                obj = value_of(n.inputs[0])
                v = value_of(n.inputs[1])
                if type(obj) is not HeapObject:
                    raise LanguageError(f"property write on {type(obj).__name__}")
                d = 1 if obj.pd is None else 2
                metrics.heap_derefs += d
                if loop_stack:
                    metrics.loop_derefs[loop_stack[-1]] += d
                set_property(heap, obj, n.name, v)
                env[cur] = UNDEF
                cur = n.succs[0]
            elif kind == ir.ARRAY_LENGTH:
                arr = value_of(n.inputs[0])
                if type(arr) is not DynArray:
                    raise LanguageError(".length needs an array")
                env[cur] = float(array_length(arr))
                cur = n.succs[0]
            elif kind == ir.CALL:
                env[cur] = self.call(n, value_of)
                cur = n.succs[0]
            else:
                raise EngineError(f"walker cannot execute {kind}")

    def intrinsic(self, n, env, value_of, metrics, loop_stack):
        heap = self.heap
        op = n.op
        if op == ir.I_IS_COLUMNAR:
            arr = value_of(n.inputs[0])
            env[n.id] = type(arr) is DynArray and arr.cols is not None
        elif op == ir.I_TRANSITIVE:
            env[n.id] = transitive_check(value_of(n.inputs[0]), n.name)
        elif op == ir.I_TRANSFORM:
            arr = value_of(n.inputs[0])
            env[n.id] = (
                type(arr) is DynArray and self.engine.attempt_transform(arr)
            )
        elif op == ir.I_RESTORE:
            arr = value_of(n.inputs[0])
            if type(arr) is DynArray and arr.cols is not None:
                restore(heap, arr)
            env[n.id] = UNDEF
        elif op == ir.I_COLUMN_REF:
            arr = value_of(n.inputs[0])
            if type(arr) is not DynArray or arr.cols is None:
                raise EngineError("ColumnRef on non-columnar array")
            col = arr.cols.get(n.name)
            if col is None:
                raise EngineError(f"ColumnRef: no column {n.name!r}")
            metrics.heap_derefs += 2
            if loop_stack:
                metrics.loop_derefs[loop_stack[-1]] += 2
            env[n.id] = col
        elif op == ir.I_READ_COLUMN:
            col = value_of(n.inputs[0])
            idx = int(value_of(n.inputs[1]))
            if idx < 0 or idx >= len(col.data):
                raise LanguageError("property read out of array bounds")
            metrics.heap_derefs += 1
            if loop_stack:
                metrics.loop_derefs[loop_stack[-1]] += 1
            env[n.id] = col.data[idx]
        elif op == ir.I_WRITE_COLUMN:
            col = value_of(n.inputs[0])
            idx = int(value_of(n.inputs[1]))
            if idx < 0 or idx >= len(col.data):
                raise LanguageError("property write out of array bounds")
            metrics.heap_derefs += 1
            if loop_stack:
                metrics.loop_derefs[loop_stack[-1]] += 1
            col.data[idx] = value_of(n.inputs[2])
            env[n.id] = UNDEF
        elif op == ir.I_DATE_TS:
            v = value_of(n.inputs[0])
            if type(v) is not HeapObject or not v.shape.is_date:
                raise LanguageError("cannot order non-date values")
            d = 1 if v.pd is None else 2
            metrics.heap_derefs += d
            if loop_stack:
                metrics.loop_derefs[loop_stack[-1]] += d
            env[n.id] = get_property(heap, v, "timestamp")
        elif op == ir.I_PHI_ANCHOR:
            env[n.id] = UNDEF
        else:
            raise EngineError(f"unknown intrinsic {op}")
        return n.succs[0]

    def call(self, n, value_of):
        heap = self.heap
        args = [value_of(i) for i in n.inputs]
        name = n.name
        if name.startswith("@object:"):
            keys = name[8:].split(",") if name[8:] else []
            return heap.alloc(list(zip(keys, args)))
        if name == "@array":
            return new_array(heap, args)
        if name == "date":
            if len(args) != 1 or type(args[0]) is not float:
                raise LanguageError("date(ms) needs one number")
            return heap.alloc_date(int(args[0]))
        if name == "newArray":
            if len(args) != 1 or type(args[0]) is not float:
                raise LanguageError("newArray(n) needs one number")
            return new_array(heap, [0.0] * int(args[0]))
        try:
            return self.engine.invoke(name, args)
        except KeyError:
            raise LanguageError(f"calling unknown function {name!r}")
