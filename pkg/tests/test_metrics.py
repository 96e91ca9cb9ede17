import os
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import HELDOUT, PAPER, load
from oracles import brute_jaccard, brute_ngrams
from vert import synthgen
from vert.assertsynth import properties, synthesize
from vert.dynsem import OPERATORS, StimulusPlan
from vert.hdl.parser import parse_properties
from vert.metrics import check_syntax, corpus_bytes, coverage_report, cpc, eval_functional, ngrams, overlap
from vert.metrics.functional import NO_KILL, OMITS_GUARD
from vert.synthgen import GenConfig, gen_block

PLAN = StimulusPlan(cycles=300, seed=0)


def oracle_props(m, **kw):
    return properties(synthesize(m.always_blocks[0], widths=m.widths(), **kw))


# ------------------------------------------------------------ n-grams


def test_ngram_counts():
    assert len(ngrams(b"x" * 14 + b"", 13)) == 1
    assert len(ngrams(bytes(range(14)), 13)) == 2
    assert len(ngrams(b"a" * 13, 13)) == 1
    assert len(ngrams(b"short", 13)) == 0
    assert ngrams(b"A" * 13 + b"B", 13).grams() == {b"A" * 13, b"A" * 12 + b"B"}
    with pytest.raises(ValueError):
        ngrams(b"abc", 0)


def test_overlap_hand_fixtures():
    text = b"module leak_fixture; endmodule\n"
    assert overlap(text, text).score == 1
    disjoint = overlap(b"abcdefghijklmnop", b"0123456789012345678")
    assert disjoint.score == 0 and not disjoint.degenerate
    half = overlap(b"A" * 14, b"A" * 13 + b"B")
    assert half.score == Fraction(1, 2) and (half.intersection, half.union) == (1, 2)


def test_overlap_degenerate():
    r = overlap(b"", b"tiny")
    assert r.degenerate and r.score == 0


@settings(max_examples=200, deadline=None)
@given(st.binary(max_size=300), st.binary(max_size=300), st.integers(1, 20))
def test_overlap_matches_brute_force(a, b, n):
    got = overlap(a, b, n)
    inter, union = brute_jaccard(a, b, n)
    assert (got.intersection, got.union) == (inter, union)
    assert got.score == (Fraction(inter, union) if union else 0)
    assert overlap(b, a, n).score == got.score
    assert ngrams(a, n).grams() == brute_ngrams(a, n)
    assert len(ngrams(a, n)) <= max(len(a) - n + 1, 0)


def test_corpus_bytes_sorted_order(tmp_path):
    (tmp_path / "b.sv").write_bytes(b"second")
    (tmp_path / "a.sv").write_bytes(b"first")
    assert corpus_bytes(tmp_path) == corpus_bytes([tmp_path / "b.sv", tmp_path / "a.sv"])
    assert corpus_bytes(tmp_path).index(b"first") < corpus_bytes(tmp_path).index(b"second")


# ------------------------------------------------------------ syntax


def test_textbox3_syntax():
    props, report = check_syntax((PAPER / "textbox3_response.sva").read_text())
    assert report.generated == 2 and report.accepted == 1
    assert report.syntactically_correct_pct == 50
    bad = [u for u in report.units if not u.accepted]
    assert [(u.name, u.codes[0]) for u in bad] == [("ResetTimer1", "E_ASSIGN_IN_CONSEQUENT")]
    assert [p.name for p in props] == ["ResetTimer2"]


def test_empty_syntax():
    props, report = check_syntax("")
    assert props == [] and report.generated == 0 and report.empty_input
    assert report.syntactically_correct_pct == 0


# ------------------------------------------------------------ functional


def test_textbox3_functional(textbox3):
    props, _ = check_syntax((PAPER / "textbox3_response.sva").read_text())
    r = eval_functional(textbox3, props, PLAN, generated=2)
    v = r.verdict("ResetTimer2")
    assert not v.functionally_correct
    assert v.reasons[0] == OMITS_GUARD
    assert r.generated == 2 and r.functionally_correct == 0


def test_tautology_kills_nothing(canonical):
    (p,), _ = parse_properties("property T; @(posedge clk) (1'b1) |-> (1'b1); endproperty")
    v = eval_functional(canonical, [p], PLAN).verdicts[0]
    assert v.holds and not v.kills_mutant and NO_KILL in v.reasons
    assert not v.functionally_correct


def test_oracles_pass_on_canonical(canonical):
    r = eval_functional(canonical, oracle_props(canonical), PLAN)
    assert r.functionally_correct == r.generated == 2
    assert r.mutants_total == 6 and r.cpc_pct == 100


def test_wrong_antecedent_rejected(canonical):
    (p,), _ = parse_properties("property W; @(posedge clk) (1'b1) |-> q == a; endproperty")
    v = eval_functional(canonical, [p], PLAN).verdicts[0]
    assert not v.functionally_correct


def test_functional_counts_bounded(pool):
    for seed in range(20):
        m, _ = gen_block(synthgen.CATEGORIES[seed % 3], seed % 2 == 0, pool, seed)
        r = eval_functional(m, oracle_props(m, seed=seed), StimulusPlan(cycles=400, seed=seed))
        assert r.functionally_correct <= r.syntactically_correct <= r.generated
        assert r.functionally_correct == r.generated


def test_adding_operators_never_loses_a_kill(pool):
    # more mutants give more chances to kill: correct stays correct
    few = ("NegateCond",)
    for seed in range(15):
        m, _ = gen_block(synthgen.CATEGORIES[seed % 3], seed % 2 == 0, pool, seed)
        props = oracle_props(m, seed=seed)
        plan = StimulusPlan(cycles=300, seed=seed)
        small = eval_functional(m, props, plan, ops=few)
        full = eval_functional(m, props, plan, ops=OPERATORS)
        for a, b in zip(small.verdicts, full.verdicts):
            if a.functionally_correct:
                assert b.functionally_correct


def test_report_deterministic(textbox4):
    props = oracle_props(textbox4)
    a = eval_functional(textbox4, props, PLAN).to_dict()
    b = eval_functional(textbox4, props, PLAN).to_dict()
    assert a == b


# ------------------------------------------------------------ coverage


def test_cpc_if_else(canonical):
    props = oracle_props(canonical)
    assert cpc(canonical, props) == 100
    assert cpc(canonical, props[:1]) == 50
    assert cpc(canonical, []) == 0


def test_cpc_textbox5_gold():
    m = load(PAPER / "textbox5.sv")
    gold, _ = parse_properties((PAPER / "textbox5_response.sva").read_text())
    report = coverage_report(m, gold)
    assert report.total == 4 and report.cpc_pct == 100


def test_cpc_no_paths():
    from vert.hdl.parser import parse_module

    m, _ = parse_module("module t(input logic a); endmodule")
    report = coverage_report(m, [])
    assert report.no_paths and report.cpc_pct == 100


def test_cpc_generated_blocks(pool):
    for seed in range(200):
        m, _ = gen_block(synthgen.CATEGORIES[seed % 3], seed % 2 == 0, pool, seed)
        assert cpc(m, oracle_props(m, seed=seed)) == 100


# ------------------------------------------------------------ held-out corpus


def test_heldout_designs_honest_results():
    results = {}
    for path in sorted(HELDOUT.glob("*.sv")):
        m = load(path)
        props = []
        for block in m.always_blocks:
            props += properties(synthesize(block, widths=m.widths()))
        r = eval_functional(m, props, StimulusPlan(cycles=1000, seed=1))
        assert r.cpc_pct == 100
        for v in r.verdicts:
            assert v.holds, (path.name, v.name)
        results[path.stem] = r
    # counter-threshold paths that random stimulus cannot reach stay vacuous
    for name in ("uart_baud", "debounce", "sync_fifo_flags"):
        assert any("never triggered" in v.reasons for v in results[name].verdicts)
    assert all(v.functionally_correct for v in results["pwm_unit"].verdicts)
