import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

import strategies as S
from conftest import PAPER
from oracles import ref_eval
from vert.errors import PastDepthExceedsTrace, UnboundIdentifier, UnterminatedIfdef
from vert.hdl.ast import (
    AlwaysBlock,
    Assign,
    Binary,
    Ident,
    If,
    IfArm,
    Literal,
    Past,
    Property,
    RtlModule,
    Ternary,
    Unary,
)
from vert.hdl.lexer import tokenize
from vert.hdl.parser import parse_expr, parse_module, parse_properties
from vert.hdl.preprocess import preprocess
from vert.hdl.printer import (
    format_expr,
    pretty_print_always,
    pretty_print_module,
    pretty_print_property,
)
from vert.hdl.values import BitVec, TraceContext, eval_expr

FAST = settings(max_examples=150, deadline=None, suppress_health_check=list(HealthCheck))


# ------------------------------------------------------------ printing


def _tokens(text):
    return [t.text for t in tokenize(text) if t.kind != "eof"]


def test_textbox4_block_prints_to_source_token_stream():
    block = AlwaysBlock(
        "always",
        (("posedge", "clk_i"), ("negedge", "rst_ni")),
        (If((IfArm(Unary("~", Ident("rst_ni")), (Assign(Ident("wr_state_q"), Ident("IDLE"), True),)),),
            (Assign(Ident("wr_state_q"), Ident("wr_state_d"), True),)),),
    )
    expected = """always @(posedge clk_i or negedge rst_ni) begin
        if (~rst_ni) begin wr_state_q <= IDLE; end
        else begin wr_state_q <= wr_state_d; end
    end"""
    assert _tokens(pretty_print_always(block)) == _tokens(expected)


def test_empty_module():
    assert pretty_print_module(RtlModule("m")) == "module m; endmodule\n"


def test_reset_property_rendering():
    p = Property(
        "P",
        ("posedge", "clk_i"),
        Unary("~", Ident("rst_ni")),
        Binary("&&", Binary("==", Ident("wr_state_q"), Ident("IDLE")), Binary("==", Ident("wr_cnt_q"), Literal(None, "fill", 0))),
    )
    assert pretty_print_property(p) == (
        "property P; @(posedge clk_i) ( ~rst_ni ) |-> wr_state_q == IDLE && wr_cnt_q == '0 ; endproperty"
    )


def test_unclocked_zero_delay_has_no_clock_or_delay_tokens():
    text = pretty_print_property(Property("P", None, Ident("a"), Binary("==", Ident("b"), Literal(1, "bin", 1))))
    assert "##" not in text and "@(" not in text


def test_delay_rendering():
    text = pretty_print_property(Property("P", ("posedge", "clk"), Ident("a"), Ident("b"), delay=2))
    assert "|-> ##2" in text
    assert "|=>" not in text


def test_ternary_rejected_in_property():
    with pytest.raises(ValueError):
        Property("P", None, Ternary(Ident("a"), Ident("b"), Ident("c")), Ident("d"))


def test_printing_is_deterministic(textbox3):
    assert pretty_print_module(textbox3) == pretty_print_module(textbox3)


@FAST
@given(S.module())
def test_module_round_trip(m):
    text = pretty_print_module(m)
    parsed, diags = parse_module(text)
    assert parsed == m
    assert [d for d in diags if d.severity == "error"] == []
    assert pretty_print_module(parsed) == text


@FAST
@given(S.rhs())
def test_expression_round_trip(e):
    assert parse_expr(format_expr(e)) == e


# ------------------------------------------------------------ evaluation


def _env(**kw):
    return {k: BitVec(v, w) for k, (v, w) in kw.items()}


def test_eval_examples():
    assert eval_expr(parse_expr("1'b1 && 1'b0"), {}).value == 0
    assert eval_expr(parse_expr("(5'b10011 == 5'b10011)"), {}).value == 1
    env = _env(a=(1, 4), b=(1, 4), c=(2, 4), d=(3, 4))
    assert eval_expr(parse_expr("(a != b) || (c != d)"), env).value == 1


def test_eval_width_rules():
    env = _env(x=(0xF, 4), y=(1, 8))
    # the wider operand sets the width, so the 4-bit sum does not wrap
    assert eval_expr(parse_expr("x + y"), env) == BitVec(0x10, 8)
    assert eval_expr(parse_expr("x + 4'd1"), env) == BitVec(0, 4)
    assert eval_expr(parse_expr("x == '1"), env).value == 1
    assert eval_expr(parse_expr("8'(x) - 8'd16"), env) == BitVec(0xFF, 8)


def test_eval_errors():
    with pytest.raises(UnboundIdentifier):
        eval_expr(Ident("nope"), {})
    with pytest.raises(PastDepthExceedsTrace):
        eval_expr(Past(Ident("a"), 3), _env(a=(1, 1)), TraceContext([_env(a=(0, 1))]))


def test_eval_past_reads_history():
    ctx = TraceContext([_env(a=(1, 1)), _env(a=(0, 1))])
    assert eval_expr(Past(Ident("a"), 1), _env(a=(0, 1)), ctx).value in (0, 1)


@FAST
@given(S.rhs(), st.fixed_dictionaries({n: st.integers(0, (1 << w) - 1) for n, w in S.SIGNALS.items()}))
def test_eval_matches_reference(e, values):
    env = {n: BitVec(v, S.SIGNALS[n]) for n, v in values.items()}
    got = eval_expr(e, env)
    want, w = ref_eval(e, values, S.SIGNALS)
    assert got.value == want & ((1 << (w or 1)) - 1)


# ------------------------------------------------------------ preprocessing


IFDEF = "`ifdef X\na\n`else\nb\n`endif\n"


def test_ifdef_else_branch():
    out = preprocess(IFDEF, set())
    assert "b" in out.split() and "a" not in out.split()


def test_ifdef_then_branch():
    out = preprocess(IFDEF, {"X"})
    assert "a" in out.split() and "b" not in out.split()


def test_nested_ifdef_hand_expanded():
    src = "`ifdef OUTER\n`ifdef INNER\none\n`else\ntwo\n`endif\n`else\nthree\n`endif\n"
    assert preprocess(src, {"OUTER"}).split() == ["two"]
    assert preprocess(src, {"OUTER", "INNER"}).split() == ["one"]
    assert preprocess(src, set()).split() == ["three"]


def test_unterminated_ifdef():
    with pytest.raises(UnterminatedIfdef):
        preprocess("`ifdef X\na\n", set())


# ------------------------------------------------------------ parsing


def test_textbox3_structure(textbox3):
    (block,) = textbox3.always_blocks
    assert block.kind == "always_ff"
    assert block.sensitivity == (("posedge", "clk_aon_i"), ("negedge", "rst_aon_ni"))
    (stmt,) = block.body
    assert isinstance(stmt, If) and len(stmt.arms) == 2 and stmt.else_body is not None


def test_empty_source_is_fatal():
    m, diags = parse_module("")
    assert m is None
    assert any(d.severity == "error" for d in diags)


def test_undeclared_width_defaults_to_one():
    m, _ = parse_module("module t(input a, output logic [3:0] q); endmodule")
    assert m.widths() == {"a": 1, "q": 4}


def test_instances_are_opaque():
    m, _ = parse_module(
        "module t(input logic clk, input logic a, output logic q);\n"
        "  sub u_sub (.x(a));\n"
        "  always_ff @(posedge clk) q <= a;\n"
        "endmodule\n"
    )
    assert len(m.instances) == 1 and "u_sub" in m.instances[0].text
    assert len(m.always_blocks) == 1


def test_textbox3_properties():
    props, diags = parse_properties((PAPER / "textbox3_response.sva").read_text())
    assert [p.name for p in props] == ["ResetTimer2"]
    errors = [d for d in diags if d.severity == "error"]
    assert [d.code for d in errors] == ["E_ASSIGN_IN_CONSEQUENT"]


def test_missing_endproperty():
    props, diags = parse_properties("property P; (a) |-> b == 1'b1")
    assert props == []
    assert "E_MISSING_ENDPROPERTY" in [d.code for d in diags]


def test_nonoverlapping_implication_normalised():
    props, diags = parse_properties((PAPER / "textbox4_gpt4o.sva").read_text())
    assert len(props) == 3
    assert all(p.delay == 1 for p in props)
    assert "E_NONOVERLAP_IMPLICATION_WARN" in [d.code for d in diags]
    assert all(d.severity == "warning" for d in diags)


def test_diagnostics_sorted_by_offset():
    src = "property A; a |-> b = 1; endproperty\nproperty B; (c |-> d == 1; endproperty\n"
    _, diags = parse_properties(src)
    offsets = [d.offset for d in diags]
    assert offsets == sorted(offsets)
    assert all(0 <= d.offset <= len(src) for d in diags)


def test_crlf_and_bytes_input():
    text = (PAPER / "textbox3.sv").read_text().replace("\n", "\r\n").encode()
    m, _ = parse_module(text)
    assert m is not None and m.name == "aon_wakeup_timer"


@pytest.mark.parametrize("src", ["a \\ b", "x\\", "é", "²", '"ab\\\ncd"'])
def test_tokenize_never_raises_on_stray_characters(src):
    toks = tokenize(src)
    assert toks[-1].kind == "eof"
    # tokens tile the input apart from skipped whitespace
    assert all(src[t.start:t.end] == t.text for t in toks)


def test_stray_backslash_is_a_bad_token():
    kinds = [t.kind for t in tokenize("a \\ b")]
    assert kinds == ["ident", "bad", "ident", "eof"]
