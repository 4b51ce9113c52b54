"""Tier-0 AST interpreter with profiling.

Element reads feed the transformation trigger; loop entries/exits record
which arrays were seen columnar (and their column kinds), which the optimizer
later uses for loop selection. Back-edge and call counts drive tier-up.
"""

from __future__ import annotations

from . import frontend as ast
from .columnar import DynArray, array_length, array_read, array_write, new_array
from .values import (
    UNDEF,
    HeapObject,
    LanguageError,
    get_property,
    is_date_object,
    set_property,
)


class _ReturnSig(Exception):
    def __init__(self, value):
        self.value = value


def collect_indexed_vars(body):
    """Names indexed as `name[...]` anywhere below the given statements."""
    found = set()

    def walk(n):
        if isinstance(n, list):
            for x in n:
                walk(x)
            return
        if isinstance(n, ast.Index) and isinstance(n.arr, ast.Var):
            found.add(n.arr.name)
        for f in getattr(n, "__dataclass_fields__", {}):
            v = getattr(n, f)
            if isinstance(v, (ast.Node, list)):
                walk(v)

    walk(body)
    return found


def truthy(v, node):
    if type(v) is bool:
        return v
    raise LanguageError(
        f"condition must be a boolean, got {type(v).__name__}", node.line, node.col
    )


def value_eq(heap, a, b):
    """Strict-by-type equality; date objects compare by timestamp."""
    ta, tb = type(a), type(b)
    if ta is HeapObject and tb is HeapObject:
        if a.shape.is_date and b.shape.is_date:
            return get_property(heap, a, "timestamp") == get_property(
                heap, b, "timestamp"
            )
        return a is b
    if ta is not tb:
        return False
    if ta is DynArray:
        return a is b
    if a is UNDEF:
        return b is UNDEF
    return a == b


def value_rel(heap, op, a, b, node=None):
    """Relational compare on numbers or date objects (by timestamp)."""
    if type(a) is float and type(b) is float:
        pass
    elif is_date_object(a) and is_date_object(b):
        a = get_property(heap, a, "timestamp")
        b = get_property(heap, b, "timestamp")
    elif type(a) is int and type(b) is int:
        pass  # raw date timestamps
    else:
        line = getattr(node, "line", None)
        raise LanguageError(
            f"cannot order {type(a).__name__} and {type(b).__name__}",
            line,
            getattr(node, "col", None),
        )
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def value_arith(op, a, b, node=None):
    if type(a) is not float or type(b) is not float:
        line = getattr(node, "line", None)
        raise LanguageError(
            f"arithmetic needs numbers, got {type(a).__name__} and "
            f"{type(b).__name__}",
            line,
            getattr(node, "col", None),
        )
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0.0:
        line = getattr(node, "line", None)
        raise LanguageError("division by zero", line, getattr(node, "col", None))
    return a / b


class Interpreter:
    def __init__(self, engine):
        self.engine = engine
        self.heap = engine.heap

    def call(self, fn: ast.Function, args):
        env = {}
        for i, p in enumerate(fn.params):
            env[p] = args[i] if i < len(args) else UNDEF
        try:
            self.exec_block(fn, fn.body, env)
        except _ReturnSig as r:
            return r.value
        return UNDEF

    def exec_block(self, fn, stmts, env):
        for s in stmts:
            self.exec_stmt(fn, s, env)

    def exec_stmt(self, fn, s, env):
        t = type(s)
        if t is ast.Let:
            env[s.name] = self.eval(fn, s.expr, env)
        elif t is ast.Assign:
            self.assign(fn, s.target, self.eval(fn, s.expr, env), env)
        elif t is ast.ExprStmt:
            self.eval(fn, s.expr, env)
        elif t is ast.If:
            if truthy(self.eval(fn, s.cond, env), s.cond):
                self.exec_block(fn, s.then, env)
            else:
                self.exec_block(fn, s.other, env)
        elif t is ast.For:
            self.exec_for(fn, s, env)
        elif t is ast.Return:
            raise _ReturnSig(self.eval(fn, s.expr, env) if s.expr else UNDEF)
        else:
            raise LanguageError(f"unknown statement {t.__name__}", s.line, s.col)

    def exec_for(self, fn, s: ast.For, env):
        eng = self.engine
        if s.init is not None:
            self.exec_stmt(fn, s.init, env)
        indexed = collect_indexed_vars([s])
        eng.profile_loop_boundary(fn.name, s.loop_id, env, indexed)
        eng.loop_read_stack.append((fn.name, s.loop_id))
        try:
            while True:
                if s.cond is not None and not truthy(
                    self.eval(fn, s.cond, env), s.cond
                ):
                    break
                self.exec_block(fn, s.body, env)
                if s.update is not None:
                    self.exec_stmt(fn, s.update, env)
                eng.note_backedge(fn.name, s.loop_id)
        finally:
            eng.loop_read_stack.pop()
            eng.profile_loop_boundary(fn.name, s.loop_id, env, indexed)

    def assign(self, fn, target, v, env):
        t = type(target)
        if t is ast.Var:
            env[target.name] = v
        elif t is ast.Prop:
            obj = self.eval(fn, target.obj, env)
            if type(obj) is not HeapObject:
                raise LanguageError(
                    f"property write on {type(obj).__name__}",
                    target.line,
                    target.col,
                )
            self.engine.count_deref()
            set_property(self.heap, obj, target.name, v)
        elif t is ast.Index:
            arr = self.eval(fn, target.arr, env)
            idx = self.eval(fn, target.idx, env)
            if type(arr) is not DynArray or type(idx) is not float:
                raise LanguageError("bad indexed write", target.line, target.col)
            self.engine.count_deref()
            array_write(self.heap, arr, int(idx), v)
        else:
            raise LanguageError("bad assignment target", target.line, target.col)

    def eval(self, fn, e, env):
        t = type(e)
        if t is ast.Num:
            return e.value
        if t is ast.Str:
            return self.heap.intern(e.value)
        if t is ast.Bool:
            return e.value
        if t is ast.Undefined:
            return UNDEF
        if t is ast.Var:
            try:
                return env[e.name]
            except KeyError:
                raise LanguageError(f"undefined variable {e.name!r}", e.line, e.col)
        if t is ast.Prop:
            obj = self.eval(fn, e.obj, env)
            if e.name == "length":
                if type(obj) is not DynArray:
                    raise LanguageError(".length needs an array", e.line, e.col)
                return float(array_length(obj))
            if type(obj) is DynArray:
                raise LanguageError("arrays only expose .length", e.line, e.col)
            if type(obj) is not HeapObject:
                raise LanguageError(
                    f"property read on {type(obj).__name__}", e.line, e.col
                )
            self.engine.count_deref()
            if obj.pd is not None:
                self.engine.count_deref()  # column table + data
            return get_property(self.heap, obj, e.name)
        if t is ast.Index:
            arr = self.eval(fn, e.arr, env)
            idx = self.eval(fn, e.idx, env)
            if type(arr) is not DynArray:
                raise LanguageError(
                    f"indexing a {type(arr).__name__}", e.line, e.col
                )
            if type(idx) is not float:
                raise LanguageError("index must be a number", e.line, e.col)
            self.engine.count_deref()
            try:
                v = array_read(self.heap, arr, int(idx))
            except LanguageError as err:
                err.line, err.col = e.line, e.col
                raise
            self.engine.after_array_read(arr)
            return v
        if t is ast.Binary:
            return self.eval_binary(fn, e, env)
        if t is ast.Unary:
            v = self.eval(fn, e.operand, env)
            if e.op == "!":
                return not truthy(v, e)
            if type(v) is not float:
                raise LanguageError("unary minus needs a number", e.line, e.col)
            return -v
        if t is ast.Ternary:
            if truthy(self.eval(fn, e.cond, env), e.cond):
                return self.eval(fn, e.then, env)
            return self.eval(fn, e.other, env)
        if t is ast.ObjectLit:
            return self.heap.alloc(
                [(k, self.eval(fn, sub, env)) for k, sub in e.pairs]
            )
        if t is ast.ArrayLit:
            return new_array(self.heap, [self.eval(fn, x, env) for x in e.items])
        if t is ast.CallExpr:
            return self.call_expr(fn, e, env)
        raise LanguageError(f"unknown expression {t.__name__}", e.line, e.col)

    def eval_binary(self, fn, e, env):
        op = e.op
        if op == "&&":
            return truthy(self.eval(fn, e.left, env), e.left) and truthy(
                self.eval(fn, e.right, env), e.right
            )
        if op == "||":
            return truthy(self.eval(fn, e.left, env), e.left) or truthy(
                self.eval(fn, e.right, env), e.right
            )
        a = self.eval(fn, e.left, env)
        b = self.eval(fn, e.right, env)
        if op == "==":
            return value_eq(self.heap, a, b)
        if op == "!=":
            return not value_eq(self.heap, a, b)
        if op in ("<", "<=", ">", ">="):
            return value_rel(self.heap, op, a, b, e)
        return value_arith(op, a, b, e)

    def call_expr(self, fn, e, env):
        args = [self.eval(fn, a, env) for a in e.args]
        name = e.name
        if name == "date":
            if len(args) != 1 or type(args[0]) is not float:
                raise LanguageError("date(ms) needs one number", e.line, e.col)
            return self.heap.alloc_date(int(args[0]))
        if name == "newArray":
            if len(args) != 1 or type(args[0]) is not float:
                raise LanguageError("newArray(n) needs one number", e.line, e.col)
            return new_array(self.heap, [0.0] * int(args[0]))
        if name == "push":
            if len(args) != 2 or type(args[0]) is not DynArray:
                raise LanguageError("push(arr, v) needs an array", e.line, e.col)
            arr = args[0]
            array_write(self.heap, arr, arr.length, args[1])
            return UNDEF
        if name == "startsWith":
            if len(args) != 2 or type(args[0]) is not str or type(args[1]) is not str:
                raise LanguageError(
                    "startsWith(s, prefix) needs two strings", e.line, e.col
                )
            return args[0].startswith(args[1])
        try:
            return self.engine.invoke(name, args)
        except KeyError:
            raise LanguageError(f"calling unknown function {name!r}", e.line, e.col)
