"""AST-to-IR lowering.

Two modes:

* baseline: element and property accesses lower to plain ArrayRead/PropRead
  nodes; no intrinsics anywhere. This is the transformation-off oracle.
* columnar: element-property accesses expand into the inflated pattern: an
  IsColumnar branch whose columnar side goes through ColumnRef/ReadColumn
  guarded by Transitive checks, and whose generic side hosts the Transform
  attempt plus the profiled ArrayRead/PropRead path. Writes expand
  symmetrically with a column kind check.

Transitive conditions used (the `name` payload):
    hascol:P      columns contain a primitive column at path P
    colkind:P:K   column P exists with kind K
    datecmp:Q     property Q expanded as nested date objects (exact date shape)
    nocol:P       no primitive column at path P

`date(ms)` and `newArray(n)` lower as builtin Call nodes; `push(a, v)` lowers
to ArrayWrite-at-length; `startsWith` is a pure Compare op so string-prefix
loops stay call-free.
"""

from __future__ import annotations

from . import frontend as ast
from . import ir
from .values import UNDEF, ValueKind


class LoweringError(Exception):
    def __init__(self, msg, line=None, col=None):
        super().__init__(msg if line is None else f"{msg} at {line}:{col}")
        self.line = line
        self.col = col


BUILTIN_CALLS = {"date", "newArray"}

REL_OPS = {"<": "lt", "<=": "le", ">": "gt", ">=": "ge"}
ARITH_OPS = {"+": "add", "-": "sub", "*": "mul", "/": "div"}


def static_kind(e):
    """Conservative static value kind of an expression, or None."""
    t = type(e)
    if t is ast.Num:
        return ValueKind.NUMBER
    if t is ast.Str:
        return ValueKind.STR
    if t is ast.Bool:
        return ValueKind.BOOL
    if t is ast.Unary:
        return ValueKind.BOOL if e.op == "!" else ValueKind.NUMBER
    if t is ast.Binary:
        if e.op in ARITH_OPS:
            return ValueKind.NUMBER
        return ValueKind.BOOL
    if t is ast.Ternary:
        a, b = static_kind(e.then), static_kind(e.other)
        return a if a is b else None
    return None


class LoweringMap:
    """Diagnostics mapping from AST to produced IR nodes."""

    def __init__(self):
        self.loops = {}  # ast loop_id -> LoopBegin node id
        self.stmt_nodes = {}  # id(ast node) -> [ir node ids]


class _Terminated(Exception):
    pass


class Lowerer:
    def __init__(self, fn: ast.Function, mode: str):
        if mode not in ("baseline", "columnar"):
            raise LoweringError(f"unknown lowering mode {mode!r}")
        self.fn = fn
        self.mode = mode
        self.g = ir.IrGraph(fn.name, len(fn.params))
        self.tail = None
        self.vars = {}
        self.consts = {}
        self.map = LoweringMap()
        self.terminated = False

    # -- low-level emission --------------------------------------------------

    def emit(self, kind, inputs=(), **payload):
        n = self.g.add(kind, inputs, **payload)
        if self.tail is not None:
            t = self.g.nodes[self.tail]
            if t.kind == ir.IF or t.succs or t.kind in ir.NO_SUCC:
                raise LoweringError(
                    f"internal: cannot chain {kind} after {t.kind}"
                )
            t.succs = [n.id]
        self.tail = n.id
        return n

    def const(self, v):
        key = (type(v).__name__, v if v is not UNDEF else "undef")
        nid = self.consts.get(key)
        if nid is None:
            nid = self.g.add(ir.CONST, value=v).id
            self.consts[key] = nid
        return nid

    def param(self, i):
        key = ("param", i)
        nid = self.consts.get(key)
        if nid is None:
            nid = self.g.add(ir.PARAM, index=i).id
            self.consts[key] = nid
        return nid

    # -- function ------------------------------------------------------------

    def lower(self) -> ir.IrGraph:
        self.emit(ir.START)
        for i, p in enumerate(self.fn.params):
            self.vars[p] = self.param(i)
        try:
            self.stmts(self.fn.body)
            self.emit(ir.RETURN, [self.const(UNDEF)])
        except _Terminated:
            pass
        ir.verify(self.g)
        return self.g

    def stmts(self, body):
        for s in body:
            self.stmt(s)

    def stmt(self, s):
        t = type(s)
        if t is ast.Let:
            self.vars[s.name] = self.expr(s.expr)
        elif t is ast.Assign:
            self.lower_assign(s)
        elif t is ast.ExprStmt:
            self.expr(s.expr)
        elif t is ast.Return:
            v = self.expr(s.expr) if s.expr else self.const(UNDEF)
            self.emit(ir.RETURN, [v])
            raise _Terminated
        elif t is ast.If:
            self.lower_if(s)
        elif t is ast.For:
            self.lower_for(s)
        else:
            raise LoweringError(f"unsupported statement {t.__name__}", s.line, s.col)

    # -- control -------------------------------------------------------------

    def branch(self, cond_id):
        """Emit an If; returns the node. Caller wires succs."""
        return self.emit(ir.IF, [cond_id])

    def _subchain(self, thunk, loop_lb=None):
        """Lower a detached control subchain.

        Returns (head_id, tail_id, value, vars_after). The chain always emits
        at least one node (the closing End/LoopEnd, or a Return when the thunk
        terminates). tail_id is the End/LoopEnd id, or None when terminated.
        Restores the variable map; the caller decides what survives.
        """
        saved = dict(self.vars)
        marker = self.g.add(ir.END)  # placeholder head, spliced out below
        self.tail = marker.id
        val = None
        terminated = False
        try:
            val = thunk() if thunk is not None else None
        except _Terminated:
            terminated = True
        tail_id = None
        if not terminated:
            if loop_lb is not None:
                tail_id = self.emit(ir.LOOP_END, owner=loop_lb).id
            else:
                tail_id = self.emit(ir.END).id
        head = marker.succs[0]
        self.g.remove(marker.id)
        vars_after = dict(self.vars)
        self.vars = saved
        self.tail = None
        return head, tail_id, val, vars_after

    def run_branch(self, if_node, fn):
        """Lower one side of a branch; returns (end_id | None, vars_after)."""
        head, tail_id, _, vars_after = self._subchain(fn)
        if_node.succs.append(head)
        return tail_id, vars_after

    def merge_branches(self, arms):
        """arms: list of (end_id | None, vars_after). Creates the merge and
        phis for variables whose values differ. Returns nothing; sets tail."""
        live = [(e, v) for e, v in arms if e is not None]
        if not live:
            self.terminated = True
            raise _Terminated
        merge = self.g.add(ir.MERGE, preds=[e for e, _ in live])
        new_vars = {}
        for name in set.intersection(*(set(v) for _, v in live)):
            vals = [v[name] for _, v in live]
            if all(x == vals[0] for x in vals):
                new_vars[name] = vals[0]
            else:
                phi = self.g.add(ir.PHI, inputs=vals, owner=merge.id)
                new_vars[name] = phi.id
        self.vars = new_vars
        self.tail = merge.id
        return merge

    def value_merge(self, arms):
        """arms: list of (end_id, value_id, vars). Merge producing a phi value."""
        live = [(e, val, v) for e, val, v in arms if e is not None]
        if not live:
            self.terminated = True
            raise _Terminated
        merge = self.g.add(ir.MERGE, preds=[e for e, _, _ in live])
        new_vars = {}
        for name in set.intersection(*(set(v) for _, _, v in live)):
            vals = [v[name] for _, _, v in live]
            if all(x == vals[0] for x in vals):
                new_vars[name] = vals[0]
            else:
                phi = self.g.add(ir.PHI, inputs=vals, owner=merge.id)
                new_vars[name] = phi.id
        self.vars = new_vars
        self.tail = merge.id
        values = [val for _, val, _ in live]
        if all(v == values[0] for v in values):
            return values[0]
        phi = self.g.add(ir.PHI, inputs=values, owner=merge.id)
        return phi.id

    def lower_if(self, s: ast.If):
        c = self.expr(s.cond)
        if_node = self.branch(c)
        then_arm = self.run_branch(if_node, lambda: self.stmts(s.then))
        else_arm = self.run_branch(if_node, lambda: self.stmts(s.other))
        self.merge_branches([then_arm, else_arm])

    def assigned_names(self, body):
        names = set()

        def walk(n):
            if isinstance(n, list):
                for x in n:
                    walk(x)
                return
            if isinstance(n, ast.Let):
                names.add(n.name)
            if isinstance(n, ast.Assign) and isinstance(n.target, ast.Var):
                names.add(n.target.name)
            for f in getattr(n, "__dataclass_fields__", {}):
                v = getattr(n, f)
                if isinstance(v, (ast.Node, list)):
                    walk(v)

        walk(body)
        return names

    def lower_for(self, s: ast.For):
        if s.init is not None:
            self.stmt(s.init)
        fwd = self.emit(ir.END)
        lb = self.g.add(ir.LOOP_BEGIN, preds=[fwd.id], index=s.loop_id)
        self.tail = lb.id
        self.map.loops[s.loop_id] = lb.id

        mutated = self.assigned_names(s.body + ([s.update] if s.update else []))
        phis = {}
        for name in sorted(mutated):
            if name in self.vars:
                phi = self.g.add(ir.PHI, inputs=[self.vars[name]], owner=lb.id)
                phis[name] = phi
                self.vars[name] = phi.id

        cond = self.expr(s.cond) if s.cond is not None else self.const(True)
        if_node = self.branch(cond)

        def body():
            self.stmts(s.body)
            if s.update is not None:
                self.stmt(s.update)

        head, loopend, _, vars_out = self._subchain(body, loop_lb=lb.id)
        if_node.succs.append(head)
        if loopend is not None:
            lb.preds.append(loopend)
            for name, phi in phis.items():
                phi.inputs.append(vars_out[name])

        # exit side sees the header phi values
        lx = self.g.add(ir.LOOP_EXIT, owner=lb.id)
        if_node.succs.append(lx.id)
        self.tail = lx.id

    def lower_assign(self, s: ast.Assign):
        tgt = s.target
        t = type(tgt)
        if t is ast.Var:
            if tgt.name not in self.vars:
                raise LoweringError(
                    f"assignment to undeclared variable {tgt.name!r}",
                    tgt.line,
                    tgt.col,
                )
            self.vars[tgt.name] = self.expr(s.expr)
            return
        if t is ast.Index:
            arr = self.expr(tgt.arr)
            idx = self.expr(tgt.idx)
            v = self.expr(s.expr)
            self.emit(ir.ARRAY_WRITE, [arr, idx, v])
            return
        if t is ast.Prop:
            if type(tgt.obj) is ast.Index and self.mode == "columnar":
                arr = self.expr(tgt.obj.arr)
                idx = self.expr(tgt.obj.idx)
                v = self.expr(s.expr)
                self.lower_element_prop_write(arr, idx, tgt.name, v, static_kind(s.expr))
                return
            obj = self.expr(tgt.obj)
            v = self.expr(s.expr)
            self.emit(ir.PROP_WRITE, [obj, v], name=tgt.name)
            return
        raise LoweringError("unsupported assignment target", s.line, s.col)

    # -- expressions ----------------------------------------------------------

    def expr(self, e):
        t = type(e)
        if t is ast.Num:
            return self.const(e.value)
        if t is ast.Str:
            return self.const(e.value)
        if t is ast.Bool:
            return self.const(e.value)
        if t is ast.Undefined:
            return self.const(UNDEF)
        if t is ast.Var:
            if e.name not in self.vars:
                raise LoweringError(f"undefined variable {e.name!r}", e.line, e.col)
            return self.vars[e.name]
        if t is ast.Prop:
            return self.lower_prop_read(e)
        if t is ast.Index:
            return self.lower_index_read(e)
        if t is ast.Binary:
            return self.lower_binary(e)
        if t is ast.Unary:
            v = self.expr(e.operand)
            if e.op == "!":
                return self.emit(ir.ARITH, [v], op="not").id
            return self.emit(ir.ARITH, [v], op="neg").id
        if t is ast.Ternary:
            c = self.expr(e.cond)
            if_node = self.branch(c)
            arm_t = self.run_value_branch(if_node, lambda: self.expr(e.then))
            arm_f = self.run_value_branch(if_node, lambda: self.expr(e.other))
            return self.value_merge([arm_t, arm_f])
        if t is ast.ObjectLit:
            vals = [(k, self.expr(sub)) for k, sub in e.pairs]
            n = self.emit(
                ir.CALL,
                [v for _, v in vals],
                name="@object:" + ",".join(k for k, _ in vals),
            )
            return n.id
        if t is ast.ArrayLit:
            vals = [self.expr(x) for x in e.items]
            return self.emit(ir.CALL, vals, name="@array").id
        if t is ast.CallExpr:
            return self.lower_call(e)
        raise LoweringError(f"unsupported expression {t.__name__}", e.line, e.col)

    def run_value_branch(self, if_node, thunk):
        head, tail_id, val, vars_after = self._subchain(thunk)
        if_node.succs.append(head)
        return tail_id, val, vars_after

    def lower_call(self, e: ast.CallExpr):
        if e.name == "push":
            if len(e.args) != 2:
                raise LoweringError("push(arr, v) arity", e.line, e.col)
            arr = self.expr(e.args[0])
            v = self.expr(e.args[1])
            ln = self.emit(ir.ARRAY_LENGTH, [arr])
            self.emit(ir.ARRAY_WRITE, [arr, ln.id, v])
            return self.const(UNDEF)
        if e.name == "startsWith":
            if len(e.args) != 2:
                raise LoweringError("startsWith arity", e.line, e.col)
            a = self.expr(e.args[0])
            b = self.expr(e.args[1])
            return self.emit(ir.COMPARE, [a, b], op="startswith").id
        args = [self.expr(a) for a in e.args]
        return self.emit(ir.CALL, args, name=e.name).id

    def lower_index_read(self, e: ast.Index):
        arr = self.expr(e.arr)
        idx = self.expr(e.idx)
        if self.mode == "baseline":
            return self.emit(ir.ARRAY_READ, [arr, idx]).id
        # inflated: the generic side hosts the transform attempt
        chk = self.emit(ir.INTRINSIC, [arr], op=ir.I_IS_COLUMNAR)
        if_node = self.branch(chk.id)
        arm_c = self.run_value_branch(
            if_node, lambda: self.emit(ir.ARRAY_READ, [arr, idx]).id
        )

        def generic():
            self.emit(ir.INTRINSIC, [arr], op=ir.I_TRANSFORM)
            return self.emit(ir.ARRAY_READ, [arr, idx]).id

        arm_g = self.run_value_branch(if_node, generic)
        return self.value_merge([arm_c, arm_g])

    def lower_prop_read(self, e: ast.Prop):
        # arr[i].p and arr[i].q.r fuse into the columnar access pattern
        if self.mode == "columnar":
            if type(e.obj) is ast.Index:
                arr = self.expr(e.obj.arr)
                idx = self.expr(e.obj.idx)
                return self.lower_element_prop_read(arr, idx, e.name)
            if (
                type(e.obj) is ast.Prop
                and type(e.obj.obj) is ast.Index
                and e.name != "length"
            ):
                arr = self.expr(e.obj.obj.arr)
                idx = self.expr(e.obj.obj.idx)
                return self.lower_element_path_read(
                    arr, idx, e.obj.name, e.name
                )
        obj = self.expr(e.obj)
        if e.name == "length":
            return self.emit(ir.ARRAY_LENGTH, [obj]).id
        return self.emit(ir.PROP_READ, [obj], name=e.name).id

    # -- inflated access patterns ---------------------------------------------

    def _generic_elem_read(self, arr, idx, name, with_transform):
        def thunk():
            if with_transform:
                self.emit(ir.INTRINSIC, [arr], op=ir.I_TRANSFORM)
            r = self.emit(ir.ARRAY_READ, [arr, idx])
            return self.emit(ir.PROP_READ, [r.id], name=name).id

        return thunk

    def lower_element_prop_read(self, arr, idx, name):
        chk = self.emit(ir.INTRINSIC, [arr], op=ir.I_IS_COLUMNAR)
        outer = self.branch(chk.id)

        def columnar_side():
            tv = self.emit(
                ir.INTRINSIC, [arr], op=ir.I_TRANSITIVE, name=f"hascol:{name}"
            )
            inner = self.branch(tv.id)
            arm_fast = self.run_value_branch(inner, lambda: self._read_column(arr, name, idx))
            arm_slow = self.run_value_branch(
                inner, self._generic_elem_read(arr, idx, name, False)
            )
            return self.value_merge([arm_fast, arm_slow])

        arm_c = self.run_value_branch(outer, columnar_side)
        arm_g = self.run_value_branch(
            outer, self._generic_elem_read(arr, idx, name, True)
        )
        return self.value_merge([arm_c, arm_g])

    def _read_column(self, arr, path, idx):
        cr = self.emit(ir.INTRINSIC, [arr], op=ir.I_COLUMN_REF, name=path)
        return self.emit(ir.INTRINSIC, [cr.id, idx], op=ir.I_READ_COLUMN).id

    def lower_element_path_read(self, arr, idx, q, r):
        path = f"{q}.{r}"
        chk = self.emit(ir.INTRINSIC, [arr], op=ir.I_IS_COLUMNAR)
        outer = self.branch(chk.id)

        def generic_chain(with_transform):
            def thunk():
                if with_transform:
                    self.emit(ir.INTRINSIC, [arr], op=ir.I_TRANSFORM)
                e = self.emit(ir.ARRAY_READ, [arr, idx])
                o = self.emit(ir.PROP_READ, [e.id], name=q)
                return self.emit(ir.PROP_READ, [o.id], name=r).id

            return thunk

        def columnar_side():
            tv = self.emit(
                ir.INTRINSIC, [arr], op=ir.I_TRANSITIVE, name=f"hascol:{path}"
            )
            inner = self.branch(tv.id)
            arm_fast = self.run_value_branch(inner, lambda: self._read_column(arr, path, idx))
            arm_slow = self.run_value_branch(inner, generic_chain(False))
            return self.value_merge([arm_fast, arm_slow])

        arm_c = self.run_value_branch(outer, columnar_side)
        arm_g = self.run_value_branch(outer, generic_chain(True))
        return self.value_merge([arm_c, arm_g])

    def lower_element_prop_write(self, arr, idx, name, v, vkind):
        def generic(with_transform):
            def thunk():
                if with_transform:
                    self.emit(ir.INTRINSIC, [arr], op=ir.I_TRANSFORM)
                r = self.emit(ir.ARRAY_READ, [arr, idx])
                self.emit(ir.PROP_WRITE, [r.id, v], name=name)
                return self.const(UNDEF)

            return thunk

        if vkind is None:
            # no static kind: no fast path, but keep the transform site
            chk = self.emit(ir.INTRINSIC, [arr], op=ir.I_IS_COLUMNAR)
            outer = self.branch(chk.id)
            arm_c = self.run_value_branch(outer, generic(False))
            arm_g = self.run_value_branch(outer, generic(True))
            self.value_merge([arm_c, arm_g])
            return

        chk = self.emit(ir.INTRINSIC, [arr], op=ir.I_IS_COLUMNAR)
        outer = self.branch(chk.id)

        def columnar_side():
            tv = self.emit(
                ir.INTRINSIC,
                [arr],
                op=ir.I_TRANSITIVE,
                name=f"colkind:{name}:{vkind.value}",
            )
            inner = self.branch(tv.id)

            def fast():
                cr = self.emit(ir.INTRINSIC, [arr], op=ir.I_COLUMN_REF, name=name)
                self.emit(ir.INTRINSIC, [cr.id, idx, v], op=ir.I_WRITE_COLUMN)
                return self.const(UNDEF)

            arm_fast = self.run_value_branch(inner, fast)
            arm_slow = self.run_value_branch(inner, generic(False))
            return self.value_merge([arm_fast, arm_slow])

        arm_c = self.run_value_branch(outer, columnar_side)
        arm_g = self.run_value_branch(outer, generic(True))
        self.value_merge([arm_c, arm_g])

    def lower_binary(self, e: ast.Binary):
        op = e.op
        if op in ("&&", "||"):
            c = self.expr(e.left)
            if_node = self.branch(c)
            if op == "&&":
                arm_t = self.run_value_branch(if_node, lambda: self.expr(e.right))
                arm_f = self.run_value_branch(if_node, lambda: self.const(False))
            else:
                arm_t = self.run_value_branch(if_node, lambda: self.const(True))
                arm_f = self.run_value_branch(if_node, lambda: self.expr(e.right))
            return self.value_merge([arm_t, arm_f])

        # date-aware fused compare: arr[i].q <op> v
        if (
            self.mode == "columnar"
            and op in REL_OPS
            and type(e.left) is ast.Prop
            and type(e.left.obj) is ast.Index
        ):
            arr = self.expr(e.left.obj.arr)
            idx = self.expr(e.left.obj.idx)
            rhs = self.expr(e.right)
            return self.lower_fused_compare(arr, idx, e.left.name, REL_OPS[op], rhs)

        a = self.expr(e.left)
        b = self.expr(e.right)
        if op in ARITH_OPS:
            return self.emit(ir.ARITH, [a, b], op=ARITH_OPS[op]).id
        if op in REL_OPS:
            return self.emit(ir.COMPARE, [a, b], op=REL_OPS[op]).id
        if op == "==":
            return self.emit(ir.COMPARE, [a, b], op="eq").id
        if op == "!=":
            return self.emit(ir.COMPARE, [a, b], op="ne").id
        raise LoweringError(f"unsupported operator {op!r}", e.line, e.col)

    def lower_fused_compare(self, arr, idx, q, relop, rhs):
        chk = self.emit(ir.INTRINSIC, [arr], op=ir.I_IS_COLUMNAR)
        outer = self.branch(chk.id)

        def generic(with_transform):
            def thunk():
                if with_transform:
                    self.emit(ir.INTRINSIC, [arr], op=ir.I_TRANSFORM)
                r = self.emit(ir.ARRAY_READ, [arr, idx])
                v = self.emit(ir.PROP_READ, [r.id], name=q)
                return self.emit(ir.COMPARE, [v.id, rhs], op=relop).id

            return thunk

        def columnar_side():
            dv = self.emit(
                ir.INTRINSIC, [arr], op=ir.I_TRANSITIVE, name=f"datecmp:{q}"
            )
            dif = self.branch(dv.id)

            def date_fast():
                ts = self._read_column(arr, f"{q}.timestamp", idx)
                rts = self.emit(ir.INTRINSIC, [rhs], op=ir.I_DATE_TS)
                return self.emit(ir.COMPARE, [ts, rts.id], op=relop).id

            arm_date = self.run_value_branch(dif, date_fast)

            def prim_side():
                tv = self.emit(
                    ir.INTRINSIC, [arr], op=ir.I_TRANSITIVE, name=f"hascol:{q}"
                )
                inner = self.branch(tv.id)

                def prim_fast():
                    v = self._read_column(arr, q, idx)
                    return self.emit(ir.COMPARE, [v, rhs], op=relop).id

                arm_fast = self.run_value_branch(inner, prim_fast)
                arm_slow = self.run_value_branch(inner, generic(False))
                return self.value_merge([arm_fast, arm_slow])

            arm_prim = self.run_value_branch(dif, prim_side)
            return self.value_merge([arm_date, arm_prim])

        arm_c = self.run_value_branch(outer, columnar_side)
        arm_g = self.run_value_branch(outer, generic(True))
        return self.value_merge([arm_c, arm_g])


def lower_function(fn: ast.Function, mode: str):
    """Lower one function; returns (IrGraph, LoweringMap)."""
    lw = Lowerer(fn, mode)
    g = lw.lower()
    return g, lw.map
