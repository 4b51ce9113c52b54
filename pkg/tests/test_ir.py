import random

import pytest

from colvm import ir
from colvm.ir import (
    IrGraph,
    ParseIrError,
    VerifyError,
    canonical_form,
    compute_blocks,
    compute_dominators,
    compute_loops,
    idoms_from_edges,
    parse_ir,
    print_ir,
    verify,
)
from colvm.values import UNDEF


def brute_force_idoms(n, entry, succs):
    """All-paths dominance oracle: B0 dominates B if every acyclic path from
    entry to B passes through B0. Exponential; fine for <= 12 blocks."""
    doms = [None] * n
    paths_to = {b: [] for b in range(n)}

    def walk(b, path):
        path = path + [b]
        paths_to[b].append(path)
        for s in succs[b]:
            if s not in path:
                walk(s, path)

    walk(entry, [])
    for b in range(n):
        if not paths_to[b]:
            continue
        common = set(paths_to[b][0])
        for p in paths_to[b][1:]:
            common &= set(p)
        doms[b] = common
    idom = [None] * n
    idom[entry] = entry
    for b in range(n):
        if b == entry or doms[b] is None:
            continue
        strict = doms[b] - {b}
        # idom = the strict dominator dominated by all other strict dominators
        for c in strict:
            if all(d in doms[c] for d in strict):
                idom[b] = c
                break
    return idom


def random_cfg(rng, n):
    succs = [[] for _ in range(n)]
    for b in range(1, n):
        # ensure reachability: edge from a lower-numbered block
        succs[rng.randrange(b)].append(b)
    extra = rng.randrange(n)
    for _ in range(extra):
        a, b = rng.randrange(n), rng.randrange(n)
        if b not in succs[a] and len(succs[a]) < 2:
            succs[a].append(b)
    return succs


@pytest.mark.parametrize("chunk", range(10))
def test_dominators_match_brute_force_oracle(chunk):
    rng = random.Random(1234 + chunk)
    for _ in range(100):
        n = rng.randrange(3, 13)
        succs = random_cfg(rng, n)
        got = idoms_from_edges(n, 0, succs)
        want = brute_force_idoms(n, 0, succs)
        assert got == want, (succs, got, want)


def test_dominators_straight_line_and_diamond():
    # A -> B -> C
    assert idoms_from_edges(3, 0, [[1], [2], []]) == [0, 0, 1]
    # diamond: A -> B, A -> C, B -> D, C -> D
    assert idoms_from_edges(4, 0, [[1, 2], [3], [3], []]) == [0, 0, 0, 0]


def build_loop_graph():
    """for (i = 0; i < 10; i = i + 1) sum = sum + i; return sum"""
    g = IrGraph("loopy", 0)
    start = g.add(ir.START)
    c0 = g.add(ir.CONST, value=0.0)
    c1 = g.add(ir.CONST, value=1.0)
    c10 = g.add(ir.CONST, value=10.0)
    end0 = g.add(ir.END)
    start.succs = [end0.id]
    lb = g.add(ir.LOOP_BEGIN, preds=[end0.id])
    phi_i = g.add(ir.PHI, inputs=[c0.id], owner=lb.id)
    phi_s = g.add(ir.PHI, inputs=[c0.id], owner=lb.id)
    cmp_ = g.add(ir.COMPARE, op="lt", inputs=[phi_i.id, c10.id])
    br = g.add(ir.IF, inputs=[cmp_.id])
    lb.succs = [cmp_.id]
    cmp_.succs = [br.id]
    add_s = g.add(ir.ARITH, op="add", inputs=[phi_s.id, phi_i.id])
    add_i = g.add(ir.ARITH, op="add", inputs=[phi_i.id, c1.id])
    le = g.add(ir.LOOP_END, owner=lb.id)
    add_s.succs = [add_i.id]
    add_i.succs = [le.id]
    lx = g.add(ir.LOOP_EXIT, owner=lb.id)
    ret = g.add(ir.RETURN, inputs=[phi_s.id])
    lx.succs = [ret.id]
    br.succs = [add_s.id, lx.id]
    lb.preds.append(le.id)
    phi_i.inputs.append(add_i.id)
    phi_s.inputs.append(add_s.id)
    return g


def test_verify_accepts_loop_graph():
    g = build_loop_graph()
    verify(g)
    blocks, block_of = compute_blocks(g)
    loops = compute_loops(g, blocks, block_of)
    assert len(loops) == 1
    li = loops[0]
    assert li.header_block in li.body
    dt = compute_dominators(g)
    for b in li.body:
        assert dt.dominates(li.header_block, b)


def test_verify_rejects_phi_arity_mismatch():
    g = build_loop_graph()
    for n in g.nodes.values():
        if n.kind == ir.PHI:
            n.inputs.append(n.inputs[0])
            break
    with pytest.raises(VerifyError, match="phi arity"):
        verify(g)


def test_verify_rejects_dangling_input():
    g = build_loop_graph()
    ret = next(n for n in g.nodes.values() if n.kind == ir.RETURN)
    ret.inputs = [9999]
    with pytest.raises(VerifyError, match="dangling"):
        verify(g)


def test_verify_rejects_two_starts():
    g = build_loop_graph()
    g.add(ir.START)
    with pytest.raises(VerifyError, match="one Start"):
        verify(g)


def test_verify_rejects_use_before_def():
    g = IrGraph("bad", 0)
    start = g.add(ir.START)
    c = g.add(ir.CONST, value=1.0)
    a = g.add(ir.ARITH, op="add", inputs=[c.id, 0])  # uses a later node
    b = g.add(ir.ARITH, op="add", inputs=[c.id, c.id])
    ret = g.add(ir.RETURN, inputs=[a.id])
    start.succs = [a.id]
    a.succs = [b.id]
    a.inputs[1] = b.id
    b.succs = [ret.id]
    with pytest.raises(VerifyError, match="dominate"):
        verify(g)


def test_print_parse_round_trip_loop():
    g = build_loop_graph()
    text = print_ir(g)
    g2 = parse_ir(text)
    verify(g2)
    assert canonical_form(g) == canonical_form(g2)
    assert print_ir(g2) == text


def test_print_parse_trivial_return():
    g = IrGraph("empty", 0)
    start = g.add(ir.START)
    u = g.add(ir.CONST, value=UNDEF)
    ret = g.add(ir.RETURN, inputs=[u.id])
    start.succs = [ret.id]
    verify(g)
    g2 = parse_ir(print_ir(g))
    assert canonical_form(g) == canonical_form(g2)


def test_parse_error_carries_position():
    with pytest.raises(ParseIrError) as e:
        parse_ir("graph f params=0 {\n  %0 = Phi()\n}\n")
    assert e.value.line == 2

    with pytest.raises(ParseIrError):
        parse_ir("%0 = Start()\n")  # node line before header


def test_intrinsic_round_trip():
    g = IrGraph("intr", 1)
    start = g.add(ir.START)
    p = g.add(ir.PARAM, index=0)
    chk = g.add(ir.INTRINSIC, op=ir.I_IS_COLUMNAR, inputs=[p.id])
    cr = g.add(ir.INTRINSIC, op=ir.I_COLUMN_REF, inputs=[p.id], name="ccInfo.pan")
    tv = g.add(
        ir.INTRINSIC, op=ir.I_TRANSITIVE, inputs=[p.id], name="colkind:zip:number"
    )
    idx = g.add(ir.CONST, value=0.0)
    rd = g.add(ir.INTRINSIC, op=ir.I_READ_COLUMN, inputs=[cr.id, idx.id])
    ret = g.add(ir.RETURN, inputs=[rd.id])
    start.succs = [chk.id]
    chk.succs = [cr.id]
    cr.succs = [tv.id]
    tv.succs = [rd.id]
    rd.succs = [ret.id]
    verify(g)
    g2 = parse_ir(print_ir(g))
    verify(g2)
    n = next(x for x in g2.nodes.values() if x.op == ir.I_COLUMN_REF)
    assert n.name == "ccInfo.pan"
    assert canonical_form(g) == canonical_form(g2)


def test_const_payload_round_trip():
    g = IrGraph("consts", 0)
    start = g.add(ir.START)
    vals = [1.5, -0.25, True, False, 1234, "he\"llo\\x", UNDEF]
    consts = [g.add(ir.CONST, value=v) for v in vals]
    ret = g.add(ir.RETURN, inputs=[consts[0].id])
    start.succs = [ret.id]
    g2 = parse_ir(print_ir(g))
    got = sorted(
        (repr(n.value) for n in g2.nodes.values() if n.kind == ir.CONST),
    )
    assert got == sorted(repr(v) for v in vals)
