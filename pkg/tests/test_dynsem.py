import random

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings

import strategies as S
from conftest import CANONICAL, PAPER, load
from oracles import reference_simulate
from vert import assertsynth, synthgen
from vert.assertsynth import properties, synthesize
from vert.dynsem import (
    OPERATORS,
    StimulusPlan,
    _fallback,
    build_stimulus,
    compile_module,
    contaminate,
    eval_property,
    eval_property_scalar,
    mutate,
    parse_ops,
    simulate,
)
from vert.dynsem import kernels
from vert.errors import CombLoopDetected, SignalMissing, UnelaboratedModule
from vert.hdl.ast import Block, If, IfArm, Property
from vert.hdl.parser import parse_expr, parse_module, parse_properties
from vert.hdl.printer import pretty_print_module
from vert.synthgen import GenConfig, gen_block

FAST = settings(max_examples=100, deadline=None, suppress_health_check=list(HealthCheck))


def mod(text):
    m, diags = parse_module(text)
    assert m is not None, diags
    return m


def prop(text):
    (p,), diags = parse_properties(text)
    return p


# ------------------------------------------------------------ simulation


def test_constant_register():
    m = mod("module t(input logic clk, output logic q); always_ff @(posedge clk) q <= 1'b1; endmodule")
    t = simulate(m, StimulusPlan(cycles=20))
    assert (t.column("q") == 1).all()


def test_textbox4_reset_cycles(textbox4):
    t = simulate(textbox4, StimulusPlan(cycles=50, seed=1))
    assert (t.column("rst_ni", "pre")[:2] == 0).all()
    assert (t.column("wr_state_q")[:2] == 0).all()


def test_nonblocking_swap():
    m = mod(
        "module t(input logic clk, input logic rst_n, output logic [3:0] a, output logic [3:0] b);\n"
        "  always_ff @(posedge clk or negedge rst_n)\n"
        "    if (!rst_n) begin a <= 4'd1; b <= 4'd2; end else begin a <= b; b <= a; end\n"
        "endmodule\n"
    )
    t = simulate(m, StimulusPlan(cycles=12, reset_probability=0, reset_cycles=1, directed=False))
    a, b = t.column("a").tolist(), t.column("b").tolist()
    assert (a[0], b[0]) == (1, 2)
    for c in range(1, 12):
        assert (a[c], b[c]) == (b[c - 1], a[c - 1])


def _matches_reference(m, plan):
    t = simulate(m, plan)
    stim = build_stimulus(m, plan)
    pres, posts = reference_simulate(m, stim.inputs, stim.values.tolist())
    for c in range(t.cycles):
        for n in t.names:
            assert int(t.column(n, "pre")[c]) == pres[c][n], (c, n, "pre")
            assert int(t.column(n, "post")[c]) == posts[c][n], (c, n, "post")


def test_generated_blocks_match_reference(pool):
    for seed in range(120):
        m, _ = gen_block(synthgen.CATEGORIES[seed % 3], seed % 2 == 0, pool, seed)
        _matches_reference(m, StimulusPlan(cycles=60, seed=seed))


@FAST
@given(S.module())
def test_random_modules_match_reference(m):
    try:
        compile_module(m)
    except Exception:
        return
    try:
        _matches_reference(m, StimulusPlan(cycles=25, seed=3))
    except CombLoopDetected:
        pass


def test_nonblocking_order_is_irrelevant(pool):
    rng = random.Random(0)
    for seed in range(0, 200, 2):
        m, _ = gen_block("if_else", True, pool, seed)
        block = m.always_blocks[0]
        body = list(block.body)
        rng.shuffle(body)
        shuffled = m.__class__(m.name, m.decls, (block.__class__(block.kind, block.sensitivity, tuple(body)),))
        plan = StimulusPlan(cycles=80, seed=seed)
        stim = build_stimulus(m, plan)
        assert simulate(m, plan, stim).same_values(simulate(shuffled, plan, stim), [d.name for d in m.decls])


def test_simulation_deterministic(pool):
    m, _ = gen_block("combined", True, pool, 5)
    plan = StimulusPlan(cycles=300, seed=9)
    assert simulate(m, plan).digest() == simulate(m, plan).digest()
    assert simulate(m, plan).digest() != simulate(m, StimulusPlan(cycles=300, seed=10)).digest()


def test_backends_agree(pool):
    for seed in range(30):
        m, _ = gen_block(synthgen.CATEGORIES[seed % 3], seed % 2 == 1, pool, seed)
        p = compile_module(m)
        stim = np.ascontiguousarray(build_stimulus(m, StimulusPlan(cycles=200, seed=seed), p).values)
        args = (p.comb, p.seq, p.init, p.n_signals, stim, p.input_slots)
        fast, slow = kernels.run_sim(*args), _fallback.run_sim(*args)
        assert fast[2] == slow[2]
        assert np.array_equal(fast[0], slow[0]) and np.array_equal(fast[1], slow[1])
    data = np.frombuffer(b"abcdefghijklmnopqrstuvwxyz" * 40, dtype=np.uint8)
    for a, b in zip(kernels.pack_grams(data, 13), _fallback.pack_grams(data, 13)):
        assert np.array_equal(a, b)


def test_comb_loop_detected():
    m = mod(
        "module t(input logic a, output logic x, output logic y);\n"
        "  always_comb begin x = !y; y = x; end\nendmodule\n"
    )
    with pytest.raises(CombLoopDetected):
        simulate(m, StimulusPlan(cycles=5))


def test_undeclared_signal_rejected():
    m = mod("module t(input logic clk, output logic q); always_ff @(posedge clk) q <= zz; endmodule")
    with pytest.raises(UnelaboratedModule):
        compile_module(m)


# ------------------------------------------------------------ properties


def test_vacuous_property(textbox4):
    t = simulate(textbox4, StimulusPlan(cycles=40))
    v = eval_property(prop("property P; @(posedge clk_i) (1'b0) |-> wr_cnt_q == 4'd1; endproperty"), t)
    assert v.holds and v.triggered_count == 0


def test_textbox4_oracles_hold(textbox4):
    t = simulate(textbox4, StimulusPlan(cycles=500, seed=2))
    pas = synthesize(textbox4.always_blocks[0], widths=textbox4.widths())
    for pa in pas:
        v = eval_property(pa.property, t)
        assert v.holds and v.triggered_count > 0


def test_wrong_consequent_fails_on_hand_stimulus(textbox4):
    plan = StimulusPlan(cycles=4, reset_cycles=1, reset_probability=0, directed=False)
    stim = build_stimulus(textbox4, plan)
    values = stim.values.copy()
    cols = {n: j for j, n in enumerate(stim.inputs)}
    values[:, cols["wr_state_d"]] = 1
    values[:, cols["wr_cnt_d"]] = 2
    t = simulate(textbox4, plan, stim.__class__(stim.inputs, values))
    v = eval_property(prop("property P; @(posedge clk_i) (rst_ni) |-> wr_state_q == wr_cnt_q; endproperty"), t)
    assert not v.holds and v.failures == (1, 2, 3)


def test_missing_signal(textbox4):
    t = simulate(textbox4, StimulusPlan(cycles=5))
    with pytest.raises(SignalMissing):
        eval_property(prop("property P; @(posedge clk_i) (nope) |-> wr_cnt_q == 4'd1; endproperty"), t)


def test_scalar_and_vectorised_agree(pool):
    for seed in range(24):
        m, _ = gen_block(synthgen.CATEGORIES[seed % 3], seed % 2 == 0, pool, seed)
        t = simulate(m, StimulusPlan(cycles=120, seed=seed))
        pas = synthesize(m.always_blocks[0], widths=m.widths(), seed=seed, stability=True, delayed=True)
        for mutant in [None] + mutate(m)[:2]:
            trace = t if mutant is None else simulate(mutant.module, StimulusPlan(cycles=120, seed=seed))
            for pa in pas:
                assert eval_property(pa.property, trace) == eval_property_scalar(pa.property, trace)


def test_past_before_trace_start_reads_zero():
    m = mod("module t(input logic clk, input logic a, output logic q); always_ff @(posedge clk) q <= a; endmodule")
    t = simulate(m, StimulusPlan(cycles=10, seed=1))
    p = prop("property P; @(posedge clk) (1'b1) |-> $past(q, 3) == $past(q, 3); endproperty")
    assert eval_property(p, t).holds
    p0 = prop("property P; @(posedge clk) (1'b1) |-> $past(q, 20) == 1'b0; endproperty")
    assert eval_property(p0, t).holds


# ------------------------------------------------------------ mutation


def test_canonical_mutants(canonical):
    mutants = mutate(canonical)
    by_op = {}
    for mu in mutants:
        by_op[mu.operator] = by_op.get(mu.operator, 0) + 1
    assert by_op == {"NegateCond": 1, "ConstPerturb": 2, "BranchAssignSwap": 1, "StuckTrue": 1, "StuckFalse": 1}
    sites = [mu.site for mu in mutants]
    assert sites == sorted(sites)


def test_canonical_mutants_all_killed(canonical):
    props = properties(synthesize(canonical.always_blocks[0], widths=canonical.widths()))
    assert len(props) == 2
    plan = StimulusPlan(cycles=200, seed=0)
    stim = build_stimulus(canonical, plan)
    for p in props:
        assert eval_property(p, simulate(canonical, plan, stim)).holds
    for mu in mutate(canonical):
        t = simulate(mu.module, plan, stim)
        assert any(not eval_property(p, t).holds for p in props), mu.description


def test_no_sites_no_mutants():
    m = mod("module t(input logic a, output logic q); always_comb q = a; endmodule")
    assert mutate(m) == []


def test_mutants_round_trip(pool):
    for seed in range(100):
        m, _ = gen_block(synthgen.CATEGORIES[seed % 3], seed % 2 == 0, pool, seed)
        for mu in mutate(m):
            text = pretty_print_module(mu.module)
            again, diags = parse_module(text)
            assert again is not None and not [d for d in diags if d.severity == "error"]
            assert pretty_print_module(again) == text


def test_operator_filter(canonical):
    assert [mu.operator for mu in mutate(canonical, {"NegateCond"})] == ["NegateCond"]
    assert parse_ops("") == OPERATORS
    assert parse_ops("StuckTrue, StuckFalse") == ("StuckTrue", "StuckFalse")
    with pytest.raises(ValueError):
        parse_ops("Bogus")
    with pytest.raises(ValueError):
        mutate(canonical, {"Bogus"})


def test_case_label_perturbation_keeps_labels_distinct():
    m = mod(
        "module t(input logic [1:0] s, output logic [3:0] q);\n"
        "  always_comb case (s) 2'd0: q = 4'd1; 2'd1: q = 4'd2; 2'd2: q = 4'd3; default: q = 4'd0; endcase\n"
        "endmodule\n"
    )
    for mu in mutate(m, {"ConstPerturb"}):
        case = mu.module.always_blocks[0].body[0]
        labels = [l.value for arm in case.arms for l in arm.labels]
        assert len(labels) == len(set(labels))


# ------------------------------------------------------------ contamination


def test_contaminate_zero_is_identity():
    assert contaminate(CANONICAL, 0, 1) == CANONICAL


def test_contaminate_counts_and_synthesis(pool):
    for seed in range(100):
        m, _ = gen_block(synthgen.CATEGORIES[seed % 3], seed % 2 == 0, pool, seed)
        clean = pretty_print_module(m)
        dirty = contaminate(clean, 10, seed)
        assert dirty.count("`ifdef") == 10 and dirty.count("dummy_mod") == 10
        dm, diags = parse_module(dirty)
        assert dm is not None and not [d for d in diags if d.severity == "error"]
        assert len(dm.instances) == 10
        want = [pa.property for pa in synthesize(m.always_blocks[0], widths=m.widths(), seed=seed)]
        got = [pa.property for pa in synthesize(dm.always_blocks[0], widths=dm.widths(), seed=seed)]
        assert got == want


def test_contaminate_deterministic():
    assert contaminate(CANONICAL, 3, 7) == contaminate(CANONICAL, 3, 7)
    assert contaminate(CANONICAL, 3, 7) != contaminate(CANONICAL, 3, 8)
