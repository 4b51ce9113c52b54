"""MiniScript: a JavaScript-like subset sufficient for the benchmark corpus.

Supported: numbers, strings, booleans, `date(ms)`, object/array literals,
`let`, assignment, C-style `for`, `if/else`, `return`, ternary, `&& || !`,
comparisons, `+ - * /`, `.length`, `push(arr, v)`, `newArray(n)`,
`startsWith(s, prefix)`, and calls to other top-level functions. No closures,
exceptions, or prototypes; one flat variable scope per function.

The full grammar ships in docs/grammar.ebnf.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class SyntaxErr(Exception):
    def __init__(self, msg, line, col, expected=None):
        detail = f"{msg} at {line}:{col}"
        if expected:
            detail += " (expected " + ", ".join(sorted(expected)) + ")"
        super().__init__(detail)
        self.line = line
        self.col = col
        self.expected = expected or set()


# --- tokens -------------------------------------------------------------------

KEYWORDS = {"function", "let", "for", "if", "else", "return", "true", "false",
            "undefined"}
PUNCT = [
    "&&", "||", "==", "!=", "<=", ">=",
    "(", ")", "{", "}", "[", "]", ",", ";", ":", "?", ".",
    "=", "<", ">", "+", "-", "*", "/", "!",
]
BUILTINS = {"date", "newArray", "push", "startsWith"}


@dataclass
class Token:
    kind: str  # "num" | "str" | "ident" | keyword | punct | "eof"
    text: str
    line: int
    col: int


def tokenize(src: str):
    toks = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if src.startswith("//", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        if src.startswith("/*", i):
            j = src.find("*/", i + 2)
            if j < 0:
                raise SyntaxErr("unterminated comment", line, col)
            for ch in src[i : j + 2]:
                if ch == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
            i = j + 2
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            toks.append(Token("num", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if c == '"' or c == "'":
            q = c
            j = i + 1
            buf = []
            while j < n and src[j] != q:
                if src[j] == "\\" and j + 1 < n:
                    esc = src[j + 1]
                    buf.append({"n": "\n", "t": "\t"}.get(esc, esc))
                    j += 2
                else:
                    buf.append(src[j])
                    j += 1
            if j >= n:
                raise SyntaxErr("unterminated string", line, col)
            toks.append(Token("str", "".join(buf), line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            word = src[i:j]
            toks.append(Token(word if word in KEYWORDS else "ident", word, line, col))
            col += j - i
            i = j
            continue
        for p in PUNCT:
            if src.startswith(p, i):
                toks.append(Token(p, p, line, col))
                col += len(p)
                i += len(p)
                break
        else:
            raise SyntaxErr(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


# --- AST ----------------------------------------------------------------------


@dataclass
class Node:
    line: int = field(default=0, kw_only=True)
    col: int = field(default=0, kw_only=True)


@dataclass
class Num(Node):
    value: float


@dataclass
class Str(Node):
    value: str


@dataclass
class Bool(Node):
    value: bool


@dataclass
class Undefined(Node):
    pass


@dataclass
class Var(Node):
    name: str


@dataclass
class ObjectLit(Node):
    pairs: list  # (name, expr)


@dataclass
class ArrayLit(Node):
    items: list


@dataclass
class Prop(Node):
    obj: Node
    name: str


@dataclass
class Index(Node):
    arr: Node
    idx: Node


@dataclass
class Binary(Node):
    op: str  # + - * / == != < <= > >= && ||
    left: Node
    right: Node


@dataclass
class Unary(Node):
    op: str  # ! -
    operand: Node


@dataclass
class Ternary(Node):
    cond: Node
    then: Node
    other: Node


@dataclass
class CallExpr(Node):
    name: str
    args: list


@dataclass
class Let(Node):
    name: str
    expr: Node


@dataclass
class Assign(Node):
    target: Node  # Var | Prop | Index
    expr: Node


@dataclass
class ExprStmt(Node):
    expr: Node


@dataclass
class If(Node):
    cond: Node
    then: list
    other: list  # may be empty


@dataclass
class For(Node):
    init: Node | None  # Let | Assign
    cond: Node | None
    update: Node | None  # Assign
    body: list
    loop_id: int = -1


@dataclass
class Return(Node):
    expr: Node | None


@dataclass
class Function(Node):
    name: str
    params: list
    body: list
    n_loops: int = 0


@dataclass
class Program(Node):
    functions: dict


# --- parser ---------------------------------------------------------------


class Parser:
    def __init__(self, src):
        self.toks = tokenize(src)
        self.pos = 0
        self._loop_counter = 0

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise SyntaxErr(f"unexpected {t.text or t.kind!r}", t.line, t.col,
                            expected={kind})
        return self.next()

    def at(self, kind) -> bool:
        return self.peek().kind == kind

    def accept(self, kind):
        if self.at(kind):
            return self.next()
        return None

    def parse_program(self) -> Program:
        fns = {}
        while not self.at("eof"):
            fn = self.parse_function()
            fns[fn.name] = fn
        return Program(functions=fns, line=1, col=1)

    def parse_function(self) -> Function:
        kw = self.expect("function")
        name = self.expect("ident").text
        self.expect("(")
        params = []
        if not self.at(")"):
            params.append(self.expect("ident").text)
            while self.accept(","):
                params.append(self.expect("ident").text)
        self.expect(")")
        self._loop_counter = 0
        body = self.parse_block()
        return Function(name=name, params=params, body=body,
                        n_loops=self._loop_counter, line=kw.line, col=kw.col)

    def parse_block(self) -> list:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            stmts.append(self.parse_statement())
        self.expect("}")
        return stmts

    def parse_statement(self):
        t = self.peek()
        if t.kind == "let":
            self.next()
            name_tok = self.expect("ident")
            self.expect("=")
            e = self.parse_expr()
            self.expect(";")
            return Let(name=name_tok.text, expr=e, line=t.line, col=t.col)
        if t.kind == "return":
            self.next()
            e = None
            if not self.at(";"):
                e = self.parse_expr()
            self.expect(";")
            return Return(expr=e, line=t.line, col=t.col)
        if t.kind == "if":
            return self.parse_if()
        if t.kind == "for":
            return self.parse_for()
        # expression or assignment statement
        e = self.parse_expr()
        if self.at("="):
            self.next()
            if not isinstance(e, (Var, Prop, Index)):
                raise SyntaxErr("invalid assignment target", t.line, t.col)
            rhs = self.parse_expr()
            self.expect(";")
            return Assign(target=e, expr=rhs, line=t.line, col=t.col)
        self.expect(";")
        return ExprStmt(expr=e, line=t.line, col=t.col)

    def parse_if(self) -> If:
        t = self.expect("if")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        then = self.parse_block()
        other = []
        if self.accept("else"):
            if self.at("if"):
                other = [self.parse_if()]
            else:
                other = self.parse_block()
        return If(cond=cond, then=then, other=other, line=t.line, col=t.col)

    def parse_for(self) -> For:
        t = self.expect("for")
        loop_id = self._loop_counter
        self._loop_counter += 1
        self.expect("(")
        init = None
        if not self.at(";"):
            if self.at("let"):
                self.next()
                name_tok = self.expect("ident")
                self.expect("=")
                init = Let(name=name_tok.text, expr=self.parse_expr(),
                           line=name_tok.line, col=name_tok.col)
            else:
                tgt = self.parse_expr()
                self.expect("=")
                init = Assign(target=tgt, expr=self.parse_expr(),
                              line=t.line, col=t.col)
        self.expect(";")
        cond = None if self.at(";") else self.parse_expr()
        self.expect(";")
        update = None
        if not self.at(")"):
            tgt = self.parse_expr()
            eq = self.expect("=")
            if not isinstance(tgt, (Var, Prop, Index)):
                raise SyntaxErr("invalid assignment target", eq.line, eq.col)
            update = Assign(target=tgt, expr=self.parse_expr(),
                            line=eq.line, col=eq.col)
        self.expect(")")
        body = self.parse_block()
        return For(init=init, cond=cond, update=update, body=body,
                   loop_id=loop_id, line=t.line, col=t.col)

    # expression precedence: ternary < || < && < == != < rel < add < mul < unary
    def parse_expr(self):
        return self.parse_ternary()

    def parse_ternary(self):
        c = self.parse_or()
        if self.accept("?"):
            then = self.parse_expr()
            self.expect(":")
            other = self.parse_expr()
            return Ternary(cond=c, then=then, other=other, line=c.line, col=c.col)
        return c

    def _binop_level(self, ops, sub):
        e = sub()
        while self.peek().kind in ops:
            op = self.next()
            r = sub()
            e = Binary(op=op.kind, left=e, right=r, line=op.line, col=op.col)
        return e

    def parse_or(self):
        return self._binop_level({"||"}, self.parse_and)

    def parse_and(self):
        return self._binop_level({"&&"}, self.parse_eq)

    def parse_eq(self):
        return self._binop_level({"==", "!="}, self.parse_rel)

    def parse_rel(self):
        return self._binop_level({"<", "<=", ">", ">="}, self.parse_add)

    def parse_add(self):
        return self._binop_level({"+", "-"}, self.parse_mul)

    def parse_mul(self):
        return self._binop_level({"*", "/"}, self.parse_unary)

    def parse_unary(self):
        t = self.peek()
        if t.kind in ("!", "-"):
            self.next()
            e = self.parse_unary()
            if t.kind == "-" and isinstance(e, Num):
                return Num(value=-e.value, line=t.line, col=t.col)
            return Unary(op=t.kind, operand=e, line=t.line, col=t.col)
        return self.parse_postfix()

    def parse_postfix(self):
        e = self.parse_primary()
        while True:
            if self.accept("."):
                name = self.expect("ident").text
                e = Prop(obj=e, name=name, line=e.line, col=e.col)
            elif self.at("["):
                self.next()
                idx = self.parse_expr()
                self.expect("]")
                e = Index(arr=e, idx=idx, line=e.line, col=e.col)
            else:
                return e

    def parse_primary(self):
        t = self.peek()
        if t.kind == "num":
            self.next()
            try:
                return Num(value=float(t.text), line=t.line, col=t.col)
            except ValueError:
                raise SyntaxErr(f"bad number {t.text!r}", t.line, t.col)
        if t.kind == "str":
            self.next()
            return Str(value=t.text, line=t.line, col=t.col)
        if t.kind in ("true", "false"):
            self.next()
            return Bool(value=t.kind == "true", line=t.line, col=t.col)
        if t.kind == "undefined":
            self.next()
            return Undefined(line=t.line, col=t.col)
        if t.kind == "ident":
            self.next()
            if self.at("("):
                self.next()
                args = []
                if not self.at(")"):
                    args.append(self.parse_expr())
                    while self.accept(","):
                        args.append(self.parse_expr())
                self.expect(")")
                return CallExpr(name=t.text, args=args, line=t.line, col=t.col)
            return Var(name=t.text, line=t.line, col=t.col)
        if t.kind == "{":
            self.next()
            pairs = []
            if not self.at("}"):
                while True:
                    k = self.expect("ident").text
                    self.expect(":")
                    pairs.append((k, self.parse_expr()))
                    if not self.accept(","):
                        break
            self.expect("}")
            return ObjectLit(pairs=pairs, line=t.line, col=t.col)
        if t.kind == "[":
            self.next()
            items = []
            if not self.at("]"):
                items.append(self.parse_expr())
                while self.accept(","):
                    items.append(self.parse_expr())
            self.expect("]")
            return ArrayLit(items=items, line=t.line, col=t.col)
        if t.kind == "(":
            self.next()
            e = self.parse_expr()
            self.expect(")")
            return e
        raise SyntaxErr(f"unexpected {t.text or t.kind!r}", t.line, t.col,
                        expected={"expression"})


def parse(source: str) -> Program:
    return Parser(source).parse_program()
