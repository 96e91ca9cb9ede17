"""Tokenizer shared by the RTL and SVA parsers."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

KEYWORDS = frozenset(
    """
    always always_comb always_ff always_latch and assert assign assume automatic
    begin bit buf byte case casex casez cell cmos config cover default defparam
    disable do edge else end endcase endclass endfunction endgenerate endinterface
    endmodule endpackage endprimitive endprogram endproperty endsequence endspecify
    endtable endtask enum event expect export extern final first_match for force
    foreach forever fork function generate genvar if iff import initial inout input
    int integer interface intersect join localparam logic longint macromodule module
    nand negedge nmos nor not null or output package packed parameter posedge
    primitive priority program property pulldown pullup real realtime reg release
    repeat return sequence shortint signed specify static string struct supply0
    supply1 table task throughout time timeprecision timeunit tran tri tri0 tri1
    triand trior trireg type typedef union unique unsigned var void wait wand while
    wire with within wor xnor xor
    """.split()
)

OPERATORS = sorted(
    [
        "|->", "|=>", "===", "!==", "##", "&&", "||", "==", "!=", "<=", ">=", "->",
        "::", "(", ")", "[", "]", "{", "}", ";", ":", ",", ".", "@", "#", "?", "=",
        "!", "~", "&", "|", "^", "+", "-", "*", "/", "%", "<", ">", "'",
    ],
    key=len,
    reverse=True,
)

# alternatives in priority order; the first that matches at a position wins
_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n\f\v]+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*(?:.*?\*/|.*\Z))
  | (?P<attribute>\(\*(?!\)).*?\*\))
  | (?P<directive>`(?:[A-Za-z_][A-Za-z0-9_$]*)?)
  | (?P<cast>(?P<cast_w>\d[\d_]*)'(?=\())
  | (?P<sized>(?P<sized_w>\d[\d_]*)\s*'[sS]?(?P<sized_b>[bBhHdDoO])\s*(?P<sized_d>[0-9a-fA-FxXzZ?_]+))
  | (?P<dec>\d[\d_]*)
  | (?P<fill>'(?P<fill_v>[01])(?![0-9a-zA-Z_]))
  | (?P<based>'[sS]?(?P<based_b>[bBhHdDoO])\s*(?P<based_d>[0-9a-fA-FxXzZ?_]+))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_$]*|\\\S+)
  | (?P<sysident>\$[A-Za-z_][A-Za-z0-9_$]*)
  | (?P<string>"(?:[^"\\\n]|\\[^\n])*"|"[^\n]*)
  | (?P<op>%s)
  | (?P<bad>.)
    """
    % "|".join(re.escape(op) for op in OPERATORS),
    re.VERBOSE | re.DOTALL,
)
_SKIP = frozenset(("ws", "line_comment", "block_comment", "attribute"))

_BASE_NAMES = {"b": "bin", "h": "hex", "d": "dec", "o": "oct"}
_RADIX = {"bin": 2, "hex": 16, "dec": 10, "oct": 8}


@dataclass(frozen=True)
class Token:
    kind: str  # ident, sysident, number, fill, cast, string, op, directive, bad, eof
    text: str
    start: int
    end: int
    # number tokens: (width or None, base, value or None when malformed)
    literal: Optional[Tuple[Optional[int], str, Optional[int]]] = None


def _digits_value(base: str, digits: str) -> Optional[int]:
    digits = digits.replace("_", "")
    if not digits or any(c in "xXzZ?" for c in digits):
        return None
    try:
        return int(digits, _RADIX[base])
    except ValueError:
        return None


def tokenize(src: str) -> List[Token]:
    """Split ``src`` into tokens; comments and whitespace are dropped.

    Unrecognised characters become ``bad`` tokens so the parser can report
    them at the right offset instead of the lexer failing outright.
    """
    out: List[Token] = []
    n = len(src)
    for m in _TOKEN.finditer(src):
        kind = m.lastgroup
        if kind in _SKIP:
            continue
        i, j = m.span()
        text = m.group(0)
        if kind == "cast":
            width = int(m.group("cast_w").replace("_", ""))
            out.append(Token("cast", text, i, j, (width, "dec", width)))
        elif kind == "sized":
            base = _BASE_NAMES[m.group("sized_b").lower()]
            width = int(m.group("sized_w").replace("_", ""))
            out.append(Token("number", text, i, j, (width, base, _digits_value(base, m.group("sized_d")))))
        elif kind == "dec":
            out.append(Token("number", text, i, j, (None, "dec", int(text.replace("_", "")))))
        elif kind == "fill":
            out.append(Token("fill", text, i, j, (None, "fill", int(m.group("fill_v")))))
        elif kind == "based":
            base = _BASE_NAMES[m.group("based_b").lower()]
            out.append(Token("number", text, i, j, (None, base, _digits_value(base, m.group("based_d")))))
        else:
            out.append(Token(kind, text, i, j))
    out.append(Token("eof", "", n, n))
    return out
