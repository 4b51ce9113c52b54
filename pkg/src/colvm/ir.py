"""SSA graph IR: nodes, control flow, phi nodes, basic blocks, dominator tree,
loop forest, intrinsics, a structural verifier, and a text format.

Every value-producing operation is scheduled on the control chain (there is no
separate floating world except Const and Param, which are pure and evaluated
on demand). Phi nodes attach to their owning Merge/LoopBegin and their inputs
match the owner's predecessor order positionally: `preds[k]` (an End or
LoopEnd node) selects `phi.inputs[k]`.

Side-effecting nodes stay on the control chain, so loop-invariant code motion
simply relinks pure nodes into the loop pre-header.
"""

from __future__ import annotations

from .values import UNDEF, EngineError

# --- node kinds -------------------------------------------------------------

START = "Start"
RETURN = "Return"
IF = "If"
MERGE = "Merge"
LOOP_BEGIN = "LoopBegin"
LOOP_END = "LoopEnd"
LOOP_EXIT = "LoopExit"
END = "End"
PHI = "Phi"
CONST = "Const"
PARAM = "Param"
ARITH = "Arith"
COMPARE = "Compare"
ARRAY_LENGTH = "ArrayLength"
ARRAY_READ = "ArrayRead"
ARRAY_WRITE = "ArrayWrite"
PROP_READ = "PropRead"
PROP_WRITE = "PropWrite"
CALL = "Call"
INTRINSIC = "Intrinsic"

KINDS = frozenset(
    [
        START,
        RETURN,
        IF,
        MERGE,
        LOOP_BEGIN,
        LOOP_END,
        LOOP_EXIT,
        END,
        PHI,
        CONST,
        PARAM,
        ARITH,
        COMPARE,
        ARRAY_LENGTH,
        ARRAY_READ,
        ARRAY_WRITE,
        PROP_READ,
        PROP_WRITE,
        CALL,
        INTRINSIC,
    ]
)

# Intrinsic operations (markers relaying array state to the optimizer).
I_IS_COLUMNAR = "IsColumnar"
I_TRANSITIVE = "Transitive"
I_TRANSFORM = "Transform"
I_RESTORE = "Restore"
I_PHI_ANCHOR = "PhiAnchor"
I_READ_COLUMN = "ReadColumn"
I_COLUMN_REF = "ColumnRef"
I_WRITE_COLUMN = "WriteColumn"
I_DATE_TS = "DateTs"

INTRINSICS = frozenset(
    [
        I_IS_COLUMNAR,
        I_TRANSITIVE,
        I_TRANSFORM,
        I_RESTORE,
        I_PHI_ANCHOR,
        I_READ_COLUMN,
        I_COLUMN_REF,
        I_WRITE_COLUMN,
        I_DATE_TS,
    ]
)

# Floating (unscheduled, pure, hashable-by-payload) kinds.
FLOATING = frozenset([CONST, PARAM])

# Kinds with no control successor.
NO_SUCC = frozenset([RETURN, LOOP_END, END])

# Pure (side-effect-free) scheduled kinds, candidates for hoisting/removal.
PURE = frozenset([ARITH, COMPARE])


class VerifyError(EngineError):
    def __init__(self, node_id, rule):
        super().__init__(f"IR verify failed at %{node_id}: {rule}")
        self.node_id = node_id
        self.rule = rule


class Node:
    __slots__ = (
        "id",
        "kind",
        "inputs",
        "succs",
        "op",
        "name",
        "value",
        "index",
        "owner",
        "preds",
        "loop_role",
        "origin",
    )

    def __init__(self, nid, kind, inputs=(), succs=(), op=None, name=None, value=None,
                 index=None, owner=None, preds=None):
        self.id = nid
        self.kind = kind
        self.inputs = list(inputs)
        self.succs = list(succs)
        self.op = op
        self.name = name
        self.value = value
        self.index = index
        self.owner = owner
        self.preds = list(preds) if preds is not None else None
        self.loop_role = None  # "generic" | "columnar" | None, set by duplication
        self.origin = None  # pre-duplication LoopBegin id, for metrics pairing

    def __repr__(self):
        return f"%{self.id}={self.kind}"


class IrGraph:
    def __init__(self, name="fn", n_params=0):
        self.name = name
        self.n_params = n_params
        self.nodes = {}
        self.entry = None
        self._next = 0

    def new_id(self):
        i = self._next
        self._next = i + 1
        return i

    def add(self, kind, inputs=(), succs=(), **payload) -> Node:
        if kind not in KINDS:
            raise EngineError(f"unknown node kind {kind}")
        n = Node(self.new_id(), kind, inputs, succs, **payload)
        self.nodes[n.id] = n
        if kind == START:
            self.entry = n.id
        return n

    def node(self, nid) -> Node:
        return self.nodes[nid]

    def phis_of(self, owner_id):
        return [n for n in self.nodes.values() if n.kind == PHI and n.owner == owner_id]

    def replace_uses(self, old_id, new_id):
        for n in self.nodes.values():
            n.inputs = [new_id if i == old_id else i for i in n.inputs]

    def remove(self, nid):
        del self.nodes[nid]

    def copy(self) -> "IrGraph":
        g = IrGraph(self.name, self.n_params)
        g.entry = self.entry
        g._next = self._next
        for n in self.nodes.values():
            c = Node(n.id, n.kind, n.inputs, n.succs, op=n.op, name=n.name,
                     value=n.value, index=n.index, owner=n.owner, preds=n.preds)
            c.loop_role = n.loop_role
            c.origin = n.origin
            g.nodes[n.id] = c
        return g


# --- basic blocks -----------------------------------------------------------


class Block:
    __slots__ = ("id", "nodes", "succs", "preds", "loop_depth")

    def __init__(self, bid):
        self.id = bid
        self.nodes = []  # scheduled node ids in order; phis excluded
        self.succs = []
        self.preds = []
        self.loop_depth = 0

    def __repr__(self):
        return f"b{self.id}{self.nodes}"


def _control_preds(g: IrGraph):
    """node id -> list of control predecessor node ids."""
    preds = {nid: [] for nid in g.nodes}
    for n in g.nodes.values():
        for s in n.succs:
            preds[s].append(n.id)
        if n.kind in (MERGE, LOOP_BEGIN):
            for p in n.preds:
                preds[n.id].append(p)
    return preds

def compute_blocks(g: IrGraph):
    """Partition scheduled nodes into basic blocks.

    Leaders: Start, Merge, LoopBegin, LoopExit, and both successors of an If.
    Returns (blocks, block_of) with block_of mapping node id -> block id;
    phi nodes map to their owner's block.
    """
    leaders = set()
    if g.entry is None:
        raise EngineError("graph has no Start")
    leaders.add(g.entry)
    for n in g.nodes.values():
        if n.kind in (MERGE, LOOP_BEGIN, LOOP_EXIT):
            leaders.add(n.id)
        elif n.kind == IF:
            leaders.update(n.succs)

    blocks = []
    block_of = {}
    seen = set()
    work = [g.entry]
    while work:
        lead = work.pop()
        if lead in seen:
            continue
        seen.add(lead)
        b = Block(len(blocks))
        blocks.append(b)
        nid = lead
        while True:
            b.nodes.append(nid)
            block_of[nid] = b.id
            n = g.nodes[nid]
            if n.kind == IF:
                for s in n.succs:
                    work.append(s)
                break
            if n.kind == END:
                m = _merge_of_end(g, nid)
                if m is not None:
                    work.append(m)
                break
            if n.kind == LOOP_END:
                work.append(n.owner)
                break
            if n.kind in NO_SUCC:
                break
            nxt = n.succs[0]
            if nxt in leaders:
                work.append(nxt)
                break
            nid = nxt

    # Block edges.
    id_by_leader = {b.nodes[0]: b.id for b in blocks}
    for b in blocks:
        last = g.nodes[b.nodes[-1]]
        if last.kind == IF:
            b.succs = [id_by_leader[s] for s in last.succs]
        elif last.kind == END:
            m = _merge_of_end(g, last.id)
            b.succs = [id_by_leader[m]] if m is not None else []
        elif last.kind == LOOP_END:
            b.succs = [id_by_leader[last.owner]]
        elif last.kind == RETURN:
            b.succs = []
        else:
            b.succs = [id_by_leader[last.succs[0]]]
    for b in blocks:
        for s in b.succs:
            blocks[s].preds.append(b.id)

    for n in g.nodes.values():
        if n.kind == PHI:
            block_of[n.id] = block_of[n.owner]
    return blocks, block_of


def _merge_of_end(g, end_id):
    for n in g.nodes.values():
        if n.kind in (MERGE, LOOP_BEGIN) and end_id in n.preds:
            return n.id
    return None


# --- dominators -------------------------------------------------------------


def idoms_from_edges(n_blocks: int, entry: int, succs) -> list:
    """Immediate dominators by iterative dataflow (Cooper/Harvey/Kennedy).

    `succs[b]` lists successor block ids. Unreachable blocks get idom None.
    Returns idom list with idom[entry] == entry.
    """
    preds = [[] for _ in range(n_blocks)]
    order = []
    seen = [False] * n_blocks
    stack = [(entry, iter(succs[entry]))]
    seen[entry] = True
    while stack:
        b, it = stack[-1]
        advanced = False
        for s in it:
            preds[s].append(b)
            if not seen[s]:
                seen[s] = True
                stack.append((s, iter(succs[s])))
                advanced = True
                break
        if not advanced:
            order.append(b)
            stack.pop()
    rpo = order[::-1]
    pos = {b: i for i, b in enumerate(rpo)}

    idom = [None] * n_blocks
    idom[entry] = entry

    def intersect(a, b):
        while a != b:
            while pos[a] > pos[b]:
                a = idom[a]
            while pos[b] > pos[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for b in rpo:
            if b == entry:
                continue
            new = None
            for p in preds[b]:
                if idom[p] is not None:
                    new = p if new is None else intersect(new, p)
            if new is not None and idom[b] != new:
                idom[b] = new
                changed = True
    return idom


class DominatorTree:
    def __init__(self, idom, entry):
        self.idom = idom
        self.entry = entry

    def dominates(self, a, b) -> bool:
        while True:
            if a == b:
                return True
            if b == self.entry or self.idom[b] is None:
                return False
            b = self.idom[b]


def compute_dominators(g: IrGraph) -> DominatorTree:
    blocks, _ = compute_blocks(g)
    idom = idoms_from_edges(len(blocks), 0, [b.succs for b in blocks])
    for b in blocks:
        if idom[b.id] is None:
            raise VerifyError(g.nodes[b.nodes[0]].id, "unreachable block")
    return DominatorTree(idom, 0)


# --- loops ------------------------------------------------------------------


class LoopInfo:
    __slots__ = ("header_node", "header_block", "body", "ends", "exits", "parent")

    def __init__(self, header_node, header_block):
        self.header_node = header_node  # LoopBegin node id
        self.header_block = header_block
        self.body = set()  # block ids including header
        self.ends = []  # LoopEnd node ids
        self.exits = []  # LoopExit node ids
        self.parent = None

    def __repr__(self):
        return f"<loop %{self.header_node} blocks={sorted(self.body)}>"


def compute_loops(g: IrGraph, blocks=None, block_of=None):
    if blocks is None:
        blocks, block_of = compute_blocks(g)
    loops = []
    for n in g.nodes.values():
        if n.kind != LOOP_BEGIN:
            continue
        li = LoopInfo(n.id, block_of[n.id])
        li.ends = [p for p in n.preds[1:]]
        li.body = {li.header_block}
        work = [block_of[e] for e in li.ends]
        while work:
            b = work.pop()
            if b in li.body:
                continue
            li.body.add(b)
            work.extend(blocks[b].preds)
        loops.append(li)
    for li in loops:
        li.exits = [
            n.id
            for n in g.nodes.values()
            if n.kind == LOOP_EXIT and n.owner == li.header_node
        ]
        candidates = [
            lj
            for lj in loops
            if lj is not li and li.header_block in lj.body
        ]
        if candidates:
            li.parent = min(candidates, key=lambda lj: len(lj.body)).header_node
    for li in loops:
        for b in li.body:
            blocks[b].loop_depth += 1
    return loops


# --- verifier ---------------------------------------------------------------


def verify(g: IrGraph):
    """Assert structural invariants; raises VerifyError naming node and rule."""
    starts = [n for n in g.nodes.values() if n.kind == START]
    if len(starts) != 1:
        raise VerifyError(-1, f"expected exactly one Start, found {len(starts)}")
    if g.entry != starts[0].id:
        raise VerifyError(starts[0].id, "entry is not the Start node")

    for n in g.nodes.values():
        for i in n.inputs:
            if i not in g.nodes:
                raise VerifyError(n.id, f"dangling input %{i}")
        for s in n.succs:
            if s not in g.nodes:
                raise VerifyError(n.id, f"dangling successor %{s}")
        if n.kind == IF and len(n.succs) != 2:
            raise VerifyError(n.id, "If needs exactly 2 successors")
        if n.kind in NO_SUCC and n.succs:
            raise VerifyError(n.id, f"{n.kind} must not have successors")
        if (
            n.kind not in NO_SUCC
            and n.kind not in FLOATING
            and n.kind != PHI
            and n.kind != IF
            and len(n.succs) != 1
        ):
            raise VerifyError(n.id, f"{n.kind} needs exactly one successor")
        if n.kind in (MERGE, LOOP_BEGIN):
            if not n.preds:
                raise VerifyError(n.id, "merge with no predecessors")
            for p in n.preds:
                if p not in g.nodes:
                    raise VerifyError(n.id, f"dangling predecessor %{p}")
            kinds = [g.nodes[p].kind for p in n.preds]
            if n.kind == LOOP_BEGIN:
                if kinds[0] != END or any(k != LOOP_END for k in kinds[1:]):
                    raise VerifyError(n.id, "loop preds must be End then LoopEnds")
                if len(kinds) < 2:
                    raise VerifyError(n.id, "loop without back-edge")
            elif any(k not in (END,) for k in kinds):
                raise VerifyError(n.id, "merge preds must be End nodes")
        if n.kind == PHI:
            owner = g.nodes.get(n.owner)
            if owner is None or owner.kind not in (MERGE, LOOP_BEGIN):
                raise VerifyError(n.id, "phi owner must be Merge/LoopBegin")
            if len(n.inputs) != len(owner.preds):
                raise VerifyError(n.id, "phi arity")
        if n.kind in (LOOP_END, LOOP_EXIT):
            owner = g.nodes.get(n.owner)
            if owner is None or owner.kind != LOOP_BEGIN:
                raise VerifyError(n.id, f"{n.kind} owner must be LoopBegin")
        if n.kind == INTRINSIC and n.op not in INTRINSICS:
            raise VerifyError(n.id, f"unknown intrinsic {n.op}")

    # Single control predecessor except merge-likes; End/LoopEnd used once.
    preds = _control_preds(g)
    used_ends = {}
    for n in g.nodes.values():
        if n.kind in (MERGE, LOOP_BEGIN):
            for p in n.preds:
                if p in used_ends:
                    raise VerifyError(p, "End feeds two merges")
                used_ends[p] = n.id
    for n in g.nodes.values():
        if n.kind in FLOATING or n.kind == PHI:
            continue
        np = len(preds[n.id])
        if n.kind == START:
            if np != 0:
                raise VerifyError(n.id, "Start with predecessors")
        elif n.kind in (MERGE, LOOP_BEGIN):
            pass
        elif np != 1:
            raise VerifyError(n.id, f"expected 1 control predecessor, got {np}")
        if n.kind in (END, LOOP_END) and n.id not in used_ends:
            raise VerifyError(n.id, "End not referenced by any merge")

    blocks, block_of = compute_blocks(g)
    for n in g.nodes.values():
        if n.kind not in FLOATING and n.kind != PHI and n.id not in block_of:
            raise VerifyError(n.id, "unreachable control node")

    idom = idoms_from_edges(len(blocks), 0, [b.succs for b in blocks])
    dt = DominatorTree(idom, 0)
    pos_in_block = {}
    for b in blocks:
        for i, nid in enumerate(b.nodes):
            pos_in_block[nid] = i

    def defined_before(d, use_block, use_pos):
        dn = g.nodes[d]
        if dn.kind in FLOATING:
            return True
        db = block_of.get(d)
        if db is None:
            return False
        if dn.kind == PHI:
            # phis are defined at their owner block entry
            return dt.dominates(db, use_block) if db != use_block else True
        if db == use_block:
            return pos_in_block[d] < use_pos
        return dt.dominates(db, use_block)

    for n in g.nodes.values():
        if n.kind in FLOATING:
            continue
        if n.kind == PHI:
            # Input k must be available at the end of predecessor block k.
            owner = g.nodes[n.owner]
            for k, inp in enumerate(n.inputs):
                pn = g.nodes[inp]
                if pn.kind in FLOATING or inp == n.id:
                    continue
                pred_block = block_of[owner.preds[k]]
                pb = block_of.get(inp)
                if pb is None:
                    raise VerifyError(n.id, f"phi input %{inp} unreachable")
                if not dt.dominates(pb, pred_block):
                    raise VerifyError(
                        n.id, f"phi input %{inp} not available on pred {k}"
                    )
            continue
        ub = block_of.get(n.id)
        if ub is None:
            continue
        for inp in n.inputs:
            if not defined_before(inp, ub, pos_in_block[n.id]):
                raise VerifyError(n.id, f"input %{inp} does not dominate use")


# --- text format ------------------------------------------------------------


def _fmt_value(v):
    if v is UNDEF:
        return "undefined"
    t = type(v)
    if t is float:
        return repr(v)
    if t is bool:
        return "true" if v else "false"
    if t is int:
        return f"date:{v}"
    if t is str:
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise EngineError(f"unprintable const {v!r}")


def _node_args(n: Node):
    """Serialized argument list for one node line."""
    args = []
    if n.kind == CONST:
        args.append(_fmt_value(n.value))
    elif n.kind == PARAM:
        args.append(str(n.index))
    elif n.kind in (ARITH, COMPARE):
        args.append(n.op)
    elif n.kind == INTRINSIC:
        args.append(n.op)
    elif n.kind in (MERGE, LOOP_BEGIN):
        args.extend(f"%{p}" for p in n.preds)
    elif n.kind in (LOOP_END, LOOP_EXIT):
        args.append(f"%{n.owner}")
    if n.kind == PHI:
        args.append(f"%{n.owner}")
    args.extend(f"%{i}" for i in n.inputs)
    if n.kind in (PROP_READ, PROP_WRITE, CALL) or (
        n.kind == INTRINSIC and n.op in (I_COLUMN_REF, I_TRANSITIVE)
    ):
        args.append(_fmt_value(n.name))
    return args


def print_ir(g: IrGraph) -> str:
    blocks, block_of = compute_blocks(g)
    out = [f"graph {g.name} params={g.n_params} {{"]
    floating = sorted(
        (n for n in g.nodes.values() if n.kind in FLOATING), key=lambda n: n.id
    )
    if floating:
        out.append("  floating:")
        for n in floating:
            out.append(f"    %{n.id} = {n.kind}({', '.join(_node_args(n))})")
    for b in blocks:
        out.append(f"  block b{b.id}:")
        for nid in b.nodes:
            n = g.nodes[nid]
            line = f"    %{n.id} = {n.kind}({', '.join(_node_args(n))})"
            if n.succs:
                line += " [" + ", ".join(f"%{s}" for s in n.succs) + "]"
            if n.loop_role:
                line += f"  ; role={n.loop_role}"
            out.append(line)
            if n.kind in (MERGE, LOOP_BEGIN):
                for ph in sorted(g.phis_of(n.id), key=lambda p: p.id):
                    out.append(
                        f"    %{ph.id} = Phi({', '.join(_node_args(ph))})"
                    )
    out.append("}")
    return "\n".join(out) + "\n"


class ParseIrError(Exception):
    def __init__(self, msg, line, col):
        super().__init__(f"{msg} at {line}:{col}")
        self.line = line
        self.col = col


def _parse_args(s, line_no, col0):
    """Split a serialized argument list, respecting quoted strings."""
    args = []
    i = 0
    while i < len(s):
        if s[i] in ", ":
            i += 1
            continue
        if s[i] == '"':
            j = i + 1
            buf = []
            while j < len(s):
                if s[j] == "\\":
                    buf.append(s[j + 1])
                    j += 2
                    continue
                if s[j] == '"':
                    break
                buf.append(s[j])
                j += 1
            else:
                raise ParseIrError("unterminated string", line_no, col0 + i)
            args.append(("str", "".join(buf)))
            i = j + 1
        else:
            j = i
            while j < len(s) and s[j] not in ", ":
                j += 1
            tok = s[i:j]
            args.append(("tok", tok))
            i = j
    return args


def parse_ir(text: str) -> IrGraph:
    """Parse the text format back into a graph (inverse of print_ir)."""
    g = None
    id_map = {}
    pending = []  # (node, raw args) resolved in a second pass

    def parse_tok(tok, line_no, col):
        if tok.startswith("%"):
            return ("ref", int(tok[1:]))
        if tok == "undefined":
            return ("val", UNDEF)
        if tok in ("true", "false"):
            return ("val", tok == "true")
        if tok.startswith("date:"):
            return ("val", int(tok[5:]))
        try:
            return ("val", float(tok))
        except ValueError:
            return ("word", tok)

    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split(";")[0].rstrip()
        s = line.strip()
        if not s or s == "}":
            continue
        if s.startswith("graph "):
            parts = s.split()
            name = parts[1]
            n_params = 0
            for p in parts[2:]:
                if p.startswith("params="):
                    n_params = int(p[len("params="):])
            g = IrGraph(name, n_params)
            continue
        if s.startswith("block ") or s.startswith("floating:"):
            continue
        if g is None:
            raise ParseIrError("node line before graph header", line_no, 1)
        if "=" not in s or not s.startswith("%"):
            raise ParseIrError("expected `%id = Kind(...)`", line_no, raw.find(s) + 1)
        lhs, rhs = s.split("=", 1)
        try:
            nid = int(lhs.strip()[1:])
        except ValueError:
            raise ParseIrError("bad node id", line_no, raw.find(lhs) + 1)
        rhs = rhs.strip()
        par = rhs.find("(")
        if par < 0:
            raise ParseIrError("missing argument list", line_no, raw.find(rhs) + 1)
        kind = rhs[:par].strip()
        if kind not in KINDS:
            raise ParseIrError(f"unknown kind {kind!r}", line_no, raw.find(rhs) + 1)
        close = rhs.rfind(")")
        if close < 0:
            raise ParseIrError("missing `)`", line_no, raw.find(rhs) + 1)
        arg_str = rhs[par + 1 : close]
        succs = []
        tail = rhs[close + 1 :].strip()
        if tail.startswith("["):
            for part in tail[1 : tail.find("]")].split(","):
                part = part.strip()
                if part:
                    succs.append(int(part[1:]))
        args = [
            parse_tok(a[1], line_no, 1) if a[0] == "tok" else a
            for a in _parse_args(arg_str, line_no, par + 2)
        ]
        n = Node(nid, kind, [], succs)
        g.nodes[nid] = n
        if kind == START:
            g.entry = nid
        g._next = max(g._next, nid + 1)
        pending.append((n, args, line_no))
        id_map[nid] = n

    if g is None:
        raise ParseIrError("no graph header", 1, 1)

    for n, args, line_no in pending:
        vals = args[:]
        try:
            if n.kind == CONST:
                if not vals or vals[0][0] not in ("val", "str"):
                    raise ParseIrError("Const needs a literal", line_no, 1)
                n.value = vals.pop(0)[1]
            elif n.kind == PARAM:
                n.index = int(vals.pop(0)[1])
            elif n.kind in (ARITH, COMPARE, INTRINSIC):
                n.op = str(vals.pop(0)[1])
            elif n.kind in (MERGE, LOOP_BEGIN):
                n.preds = [v[1] for v in vals]
                vals = []
            elif n.kind in (LOOP_END, LOOP_EXIT):
                n.owner = vals.pop(0)[1]
            if n.kind == PHI:
                n.owner = vals.pop(0)[1]
        except IndexError:
            raise ParseIrError(f"malformed arguments for {n.kind}", line_no, 1)
        name = None
        if vals and vals[-1][0] == "str":
            name = vals.pop()[1]
        if (
            n.kind == INTRINSIC
            and n.op in (I_COLUMN_REF, I_TRANSITIVE)
            and name is None
        ):
            raise ParseIrError(f"{n.op} needs a path argument", line_no, 1)
        n.name = name
        for v in vals:
            if v[0] != "ref":
                raise ParseIrError(f"expected %ref, got {v[1]!r}", line_no, 1)
            n.inputs.append(v[1])
    return g


# --- isomorphism (round-trip tests) ------------------------------------------


def canonical_form(g: IrGraph) -> str:
    """Renumber ids by a deterministic control-order traversal and print.

    Equal canonical forms imply isomorphism. Phis of one merge are ordered by
    original id, so this is exact for print/parse round-trips and pass-output
    comparisons (which preserve relative ids), not a general graph canonizer.
    """
    order = []
    seen = set()

    def visit_value(nid):
        # Only floating nodes and phis get ordered by value traversal; the
        # control walk orders everything scheduled.
        if nid in seen:
            return
        n = g.nodes[nid]
        if n.kind not in FLOATING and n.kind != PHI:
            return
        seen.add(nid)
        for i in n.inputs:
            visit_value(i)
        order.append(nid)

    stack = [g.entry]
    while stack:
        nid = stack.pop()
        if nid in seen:
            continue
        seen.add(nid)
        n = g.nodes[nid]
        for i in n.inputs:
            visit_value(i)
        order.append(nid)
        if n.kind in (MERGE, LOOP_BEGIN):
            for ph in sorted(g.phis_of(nid), key=lambda p: p.id):
                visit_value(ph.id)
        if n.kind in (END, LOOP_END):
            m = _merge_of_end(g, nid) if n.kind == END else n.owner
            if m is not None:
                stack.append(m)
        for s in reversed(n.succs):
            stack.append(s)

    remap = {old: new for new, old in enumerate(order)}
    lines = []
    for old in order:
        n = g.nodes[old]
        parts = [n.kind]
        if n.kind == CONST:
            parts.append(_fmt_value(n.value))
        if n.kind == PARAM:
            parts.append(str(n.index))
        if n.op:
            parts.append(n.op)
        if n.name is not None:
            parts.append(repr(n.name))
        if n.index is not None and n.kind != PARAM:
            parts.append(str(n.index))
        if n.owner is not None:
            parts.append(f"@{remap[n.owner]}")
        if n.preds is not None:
            parts.append("preds=" + ",".join(str(remap[p]) for p in n.preds))
        parts.append("in=" + ",".join(str(remap[i]) for i in n.inputs))
        parts.append("succ=" + ",".join(str(remap[s]) for s in n.succs))
        lines.append(f"{remap[old]}: " + " ".join(parts))
    return "\n".join(lines)


def isomorphic(g1: IrGraph, g2: IrGraph) -> bool:
    return canonical_form(g1) == canonical_form(g2)
