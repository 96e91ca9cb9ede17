"""Recursive-descent parser for the RTL subset and single-implication SVA properties.

Both entry points collect :class:`ParseDiagnostic` records instead of raising,
so third-party assertion files can be graded property by property.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from vert.errors import UnterminatedIfdef
from vert.hdl.ast import (
    AlwaysBlock,
    Assign,
    Binary,
    Block,
    Case,
    CaseArm,
    Cast,
    Decl,
    Ident,
    If,
    IfArm,
    Instance,
    Literal,
    Param,
    Past,
    Property,
    RtlModule,
    Stable,
    Ternary,
    Unary,
    identifiers,
    iter_stmts,
    walk,
)
from vert.hdl.lexer import Token, tokenize
from vert.hdl.preprocess import _run, normalize_source
from vert.hdl.values import BitVec, UnboundIdentifier, eval_expr

ERROR = "error"
WARNING = "warning"

BINARY_PREC = {
    "||": 1,
    "&&": 2,
    "|": 3,
    "^": 4,
    "&": 5,
    "==": 6,
    "!=": 6,
    "===": 6,
    "!==": 6,
    "<": 7,
    "<=": 7,
    ">": 7,
    ">=": 7,
    "+": 8,
    "-": 8,
}
UNSUPPORTED_BINARY = {"*", "/", "%"}


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str
    offset: int
    line: int
    column: int
    message: str
    code: str

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity} {self.code}: {self.message}"


class _Abort(Exception):
    def __init__(self, code, message, offset):
        super().__init__(message)
        self.code = code
        self.message = message
        self.offset = offset


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks: List[Token] = tokenize(src)
        self.i = 0
        self.diags: List[ParseDiagnostic] = []
        self._line_starts = [0] + [k + 1 for k, c in enumerate(src) if c == "\n"]

    # ------------------------------------------------------------ plumbing

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("op", "ident")

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            return self.advance()
        return None

    def expect(self, text: str, code: str = "E_UNEXPECTED_TOKEN") -> Token:
        if self.at(text):
            return self.advance()
        t = self.tok
        got = "end of input" if t.kind == "eof" else repr(t.text)
        raise _Abort(code, f"expected {text!r}, found {got}", t.start)

    def expect_ident(self) -> Token:
        t = self.tok
        if t.kind != "ident":
            got = "end of input" if t.kind == "eof" else repr(t.text)
            raise _Abort("E_UNEXPECTED_TOKEN", f"expected identifier, found {got}", t.start)
        return self.advance()

    def diag(self, severity, code, message, offset):
        offset = max(0, min(offset, len(self.src)))
        line = bisect.bisect_right(self._line_starts, offset) - 1
        col = offset - self._line_starts[line]
        self.diags.append(ParseDiagnostic(severity, offset, line + 1, col + 1, message, code))

    def prev_end(self) -> int:
        return self.toks[self.i - 1].end if self.i else 0

    def sorted_diags(self):
        return sorted(self.diags, key=lambda d: (d.offset, d.code, d.message))

    # --------------------------------------------------------- expressions

    def parse_expr(self, in_property=False):
        start = self.tok.start
        cond = self.parse_binary(1, in_property)
        if self.at("?"):
            if in_property:
                raise _Abort(
                    "E_TERNARY_IN_PROPERTY",
                    "conditional operator is not allowed in a property",
                    self.tok.start,
                )
            self.advance()
            then = self.parse_expr(in_property)
            self.expect(":")
            orelse = self.parse_expr(in_property)
            return Ternary(cond, then, orelse, span=(start, self.prev_end()))
        return cond

    def parse_binary(self, min_prec, in_property):
        start = self.tok.start
        left = self.parse_unary(in_property)
        while True:
            t = self.tok
            if t.kind == "op" and t.text in UNSUPPORTED_BINARY:
                raise _Abort("E_UNSUPPORTED_OPERATOR", f"operator {t.text!r} is not supported", t.start)
            if t.kind != "op" or t.text not in BINARY_PREC:
                return left
            prec = BINARY_PREC[t.text]
            if prec < min_prec:
                return left
            self.advance()
            op = t.text
            if op in ("===", "!=="):
                self.diag(
                    WARNING,
                    "E_CASE_EQUALITY_WARN",
                    f"{op!r} treated as {op[:2]!r} under two-valued semantics",
                    t.start,
                )
                op = op[:2]
            right = self.parse_binary(prec + 1, in_property)
            left = Binary(op, left, right, span=(start, self.prev_end()))

    def parse_unary(self, in_property):
        t = self.tok
        if t.kind == "op" and t.text in ("!", "~", "|", "-"):
            self.advance()
            inner = self.parse_unary(in_property)
            return Unary(t.text, inner, span=(t.start, self.prev_end()))
        if t.kind == "op" and t.text == "+":
            self.advance()
            return self.parse_unary(in_property)
        if t.kind == "op" and t.text in ("&", "^"):
            raise _Abort("E_UNSUPPORTED_OPERATOR", f"reduction {t.text!r} is not supported", t.start)
        return self.parse_primary(in_property)

    def parse_primary(self, in_property):
        t = self.tok
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.parse_expr(in_property)
            if not self.at(")"):
                raise _Abort("E_UNBALANCED_PARENS", "missing ')'", self.tok.start)
            self.advance()
            return inner
        if t.kind == "number":
            self.advance()
            return self._literal(t)
        if t.kind == "fill":
            self.advance()
            return Literal(None, "fill", t.literal[2], span=(t.start, t.end))
        if t.kind == "cast":
            self.advance()
            self.expect("(")
            inner = self.parse_expr(in_property)
            if not self.at(")"):
                raise _Abort("E_UNBALANCED_PARENS", "missing ')' after cast", self.tok.start)
            self.advance()
            width = t.literal[0]
            if width < 1:
                raise _Abort("E_BAD_LITERAL", "cast width must be positive", t.start)
            return Cast(width, inner, span=(t.start, self.prev_end()))
        if t.kind == "ident":
            return self.parse_ident_ref()
        if t.kind == "sysident":
            return self.parse_system_call(in_property)
        if t.kind == "op" and t.text == "{":
            raise _Abort("E_UNSUPPORTED_OPERATOR", "concatenation is not supported", t.start)
        if t.kind == "op" and t.text == "=":
            raise _Abort("E_UNEXPECTED_ASSIGN", "unexpected '='", t.start)
        if t.kind == "bad":
            raise _Abort("E_UNKNOWN_TOKEN", f"unknown character {t.text!r}", t.start)
        got = "end of input" if t.kind == "eof" else repr(t.text)
        raise _Abort("E_UNEXPECTED_TOKEN", f"expected expression, found {got}", t.start)

    def _literal(self, t: Token) -> Literal:
        width, base, value = t.literal
        if value is None:
            raise _Abort("E_BAD_LITERAL", f"malformed or four-state literal {t.text!r}", t.start)
        if base == "oct":
            base = "dec"
        if width is not None:
            if width < 1:
                raise _Abort("E_BAD_LITERAL", f"literal width must be positive in {t.text!r}", t.start)
            if value >> width:
                raise _Abort("E_BAD_LITERAL", f"value of {t.text!r} does not fit in {width} bits", t.start)
        return Literal(width, base, value, span=(t.start, t.end))

    def parse_ident_ref(self):
        t = self.expect_ident()
        if t.text in _RESERVED_IN_EXPR:
            raise _Abort("E_UNEXPECTED_TOKEN", f"unexpected keyword {t.text!r}", t.start)
        name = t.text
        if self.at("::"):
            self.advance()
            name = f"{name}::{self.expect_ident().text}"
        index = None
        if self.at("["):
            self.advance()
            it = self.tok
            if it.kind == "number" and it.literal[2] is not None and it.literal[0] is None:
                index = it.literal[2]
                self.advance()
            elif it.kind == "ident":
                index = it.text
                self.advance()
            else:
                raise _Abort("E_UNSUPPORTED_SELECT", "only constant or identifier bit-selects are supported", it.start)
            if self.at(":"):
                raise _Abort("E_UNSUPPORTED_SELECT", "part-selects are not supported", self.tok.start)
            if not self.at("]"):
                raise _Abort("E_UNBALANCED_PARENS", "missing ']'", self.tok.start)
            self.advance()
        return Ident(name, index, span=(t.start, self.prev_end()))

    def parse_system_call(self, in_property):
        t = self.advance()
        if t.text not in ("$past", "$stable"):
            raise _Abort("E_UNSUPPORTED_SYSTEM_CALL", f"system function {t.text} is not supported", t.start)
        self.expect("(")
        inner = self.parse_expr(in_property)
        depth = 1
        if t.text == "$past" and self.accept(","):
            dt = self.tok
            if dt.kind != "number" or dt.literal[2] is None or dt.literal[2] < 1:
                raise _Abort("E_BAD_LITERAL", "$past depth must be a positive integer", dt.start)
            depth = dt.literal[2]
            self.advance()
        if not self.at(")"):
            raise _Abort("E_UNBALANCED_PARENS", f"missing ')' after {t.text}", self.tok.start)
        self.advance()
        span = (t.start, self.prev_end())
        if t.text == "$past":
            return Past(inner, depth, span=span)
        return Stable(inner, span=span)

    # ------------------------------------------------------------ recovery

    def skip_to_semicolon(self):
        """Skip tokens through the next ``;`` at bracket depth zero."""
        depth = 0
        while self.tok.kind != "eof":
            t = self.advance()
            if t.text in ("(", "[", "{"):
                depth += 1
            elif t.text in (")", "]", "}"):
                depth = max(0, depth - 1)
            elif t.text == ";" and depth == 0:
                return

    def skip_to_keyword(self, keyword):
        while self.tok.kind != "eof":
            if self.tok.kind == "ident" and self.tok.text == keyword:
                self.advance()
                return True
            self.advance()
        return False


_RESERVED_IN_EXPR = frozenset(
    {"begin", "end", "if", "else", "case", "endcase", "endmodule", "module", "property",
     "endproperty", "always", "always_ff", "always_comb", "assert", "default"}
)


# ======================================================================= RTL


class _RtlParser(_Parser):
    def __init__(self, src):
        super().__init__(src)
        self.stmt_slots: List[int] = []
        self.item_slots: List[int] = []
        # every declaration in source order, repeats included
        self.declared_events: List[str] = []

    def const_eval(self, e, params) -> Optional[int]:
        env = {k: BitVec(v.value, v.width or 32) for k, v in params.items()}
        try:
            return eval_expr(e, env).value
        except (UnboundIdentifier, ValueError, TypeError):
            return None

    def parse_range(self, params) -> Optional[int]:
        """Parse one or more packed ``[msb:lsb]`` dimensions; returns total width."""
        width = None
        while self.at("["):
            start = self.tok.start
            self.advance()
            msb = self.parse_expr()
            self.expect(":")
            lsb = self.parse_expr()
            self.expect("]")
            hi, lo = self.const_eval(msb, params), self.const_eval(lsb, params)
            if hi is None or lo is None:
                self.diag(WARNING, "E_BAD_RANGE", "range bounds are not constant; width 1 assumed", start)
                w = 1
            else:
                w = abs(hi - lo) + 1
            width = w if width is None else width * w
        return width

    def skip_unpacked(self):
        while self.at("["):
            start = self.tok.start
            depth = 0
            while self.tok.kind != "eof":
                t = self.advance()
                if t.text == "[":
                    depth += 1
                elif t.text == "]":
                    depth -= 1
                    if depth == 0:
                        break
            self.diag(WARNING, "E_UNPACKED_ARRAY", "unpacked dimensions are ignored", start)

    def parse_module(self):
        # locate header
        while self.tok.kind != "eof" and not (self.tok.kind == "ident" and self.tok.text in ("module", "macromodule")):
            self.advance()
        if self.tok.kind == "eof":
            self.diag(ERROR, "E_NO_MODULE", "no module header found", len(self.src))
            return None
        self.advance()
        name = self.expect_ident().text
        params: Dict[str, Literal] = {}
        param_order: List[str] = []
        decls: Dict[str, Decl] = {}
        decl_order: List[str] = []
        port_names: List[str] = []

        def declare(nm, width, direction, offset):
            if nm in decls:
                old = decls[nm]
                if old.direction != "internal" and direction == "internal":
                    # `output q; reg [3:0] q;` refines the port width
                    decls[nm] = Decl(nm, width if width else old.width, old.direction)
                    return
                if nm not in port_names or old.direction != "internal":
                    self.diag(WARNING, "E_REDECLARED", f"{nm!r} declared more than once", offset)
            else:
                decl_order.append(nm)
            decls[nm] = Decl(nm, width or 1, direction)
            self.declared_events.append(nm)

        if self.at("#"):
            self.advance()
            self.expect("(")
            while not self.at(")") and self.tok.kind != "eof":
                self.parse_param_assignments(params, param_order, stop=(",", ")"))
                if not self.accept(","):
                    break
            self.expect(")")
        if self.at("("):
            self.advance()
            self.parse_port_list(declare, params, port_names)
            self.expect(")")
        header_end = self.expect(";").end
        self.item_slots.append(header_end)
        always_blocks: List[AlwaysBlock] = []
        instances: List[Instance] = []
        while True:
            t = self.tok
            if t.kind == "eof":
                self.diag(ERROR, "E_UNBALANCED", f"module {name!r} is missing 'endmodule'", t.start)
                return None
            if t.kind == "ident" and t.text == "endmodule":
                self.advance()
                break
            try:
                self.parse_item(declare, params, param_order, always_blocks, instances)
            except _Abort as exc:
                if exc.code == "E_UNBALANCED":
                    self.diag(ERROR, exc.code, exc.message, exc.offset)
                    return None
                self.diag(ERROR, exc.code, exc.message, exc.offset)
                self.skip_to_semicolon()
            self.item_slots.append(self.prev_end())
        for pn in port_names:
            if pn not in decls:
                self.diag(WARNING, "E_UNDECLARED", f"port {pn!r} has no direction", 0)
                declare(pn, 1, "input", 0)
        module = RtlModule(
            name=name,
            decls=tuple(decls[n] for n in decl_order),
            always_blocks=tuple(always_blocks),
            instances=tuple(instances),
            params=tuple(Param(n, params[n]) for n in param_order),
            stmt_slots=tuple(sorted(set(self.stmt_slots))),
            item_slots=tuple(self.item_slots),
        )
        self.check_declared(module)
        return module

    def check_declared(self, module: RtlModule):
        known = {d.name for d in module.decls} | {p.name for p in module.params}
        flagged = set()
        for block in module.always_blocks:
            exprs = []
            for s in iter_stmts(block.body):
                if isinstance(s, Assign):
                    exprs.extend([s.lhs, s.rhs])
                elif isinstance(s, If):
                    exprs.extend(a.cond for a in s.arms)
                elif isinstance(s, Case):
                    exprs.append(s.selector)
                    for arm in s.arms:
                        exprs.extend(arm.labels)
            for e in exprs:
                for node in walk(e):
                    if isinstance(node, Ident):
                        for nm in identifiers(node):
                            if nm not in known and nm not in flagged:
                                flagged.add(nm)
                                off = node.span[0] if node.span else 0
                                self.diag(WARNING, "E_UNDECLARED", f"identifier {nm!r} is not declared", off)

    def parse_port_list(self, declare, params, port_names):
        direction = None
        width = None
        while not self.at(")") and self.tok.kind != "eof":
            t = self.tok
            if t.kind == "ident" and t.text in ("input", "output", "inout"):
                self.advance()
                direction = "output" if t.text == "output" else "input"
                if t.text == "inout":
                    self.diag(WARNING, "E_INOUT", "inout port treated as input", t.start)
                width = self.parse_net_type(params)
            elif t.kind == "ident" and direction is not None and t.text in _NET_TYPES:
                width = self.parse_net_type(params)
            nt = self.expect_ident()
            if direction is None:
                port_names.append(nt.text)
            else:
                declare(nt.text, width, direction, nt.start)
                port_names.append(nt.text)
            self.skip_unpacked()
            if not self.accept(","):
                break

    def parse_net_type(self, params) -> Optional[int]:
        width = None
        while self.tok.kind == "ident" and self.tok.text in _NET_TYPES:
            t = self.advance()
            if t.text in ("integer", "int"):
                width = 32
            elif t.text == "byte":
                width = 8
        r = self.parse_range(params)
        return r if r is not None else width

    def parse_param_assignments(self, params, order, stop):
        if self.tok.kind == "ident" and self.tok.text in ("parameter", "localparam"):
            self.advance()
        while self.tok.kind == "ident" and self.tok.text in _NET_TYPES:
            self.advance()
        rng = self.parse_range(params)
        if self.tok.kind == "ident" and self.peek().kind == "ident":
            self.advance()  # user type name
        nt = self.expect_ident()
        self.expect("=")
        value_expr = self.parse_expr()
        value = self.const_eval(value_expr, params)
        if value is None:
            self.diag(WARNING, "E_BAD_PARAM", f"parameter {nt.text!r} is not a constant", nt.start)
            return
        if isinstance(value_expr, Literal) and value_expr.width is not None:
            lit = value_expr
        else:
            width = rng or max(32, value.bit_length())
            lit = Literal(width, "dec", value & ((1 << width) - 1))
        if nt.text not in params:
            order.append(nt.text)
        params[nt.text] = lit

    def parse_item(self, declare, params, param_order, always_blocks, instances):
        t = self.tok
        word = t.text if t.kind == "ident" else None
        if word in ("input", "output", "inout"):
            self.advance()
            direction = "output" if word == "output" else "input"
            width = self.parse_net_type(params)
            self.parse_name_list(lambda nm, off: declare(nm, width, direction, off))
            return
        if word in _NET_TYPES:
            width = self.parse_net_type(params)
            self.parse_name_list(lambda nm, off: declare(nm, width, "internal", off))
            return
        if word in ("parameter", "localparam"):
            self.parse_param_assignments(params, param_order, stop=(";",))
            while self.accept(","):
                self.parse_param_assignments(params, param_order, stop=(";",))
            self.expect(";")
            return
        if word in ("always", "always_ff", "always_comb", "always_latch"):
            block = self.parse_always()
            if block is not None:
                always_blocks.append(block)
            return
        if word in _SKIP_BLOCKS:
            end_kw = _SKIP_BLOCKS[word]
            self.diag(WARNING, "E_SKIPPED_ITEM", f"{word!r} ... {end_kw!r} ignored", t.start)
            if not self.skip_to_keyword(end_kw):
                raise _Abort("E_UNBALANCED", f"missing {end_kw!r}", len(self.src))
            if self.accept(":"):
                self.expect_ident()
            return
        if word in ("assign", "typedef", "import", "genvar", "initial", "final", "default", "export"):
            self.diag(WARNING, "E_SKIPPED_ITEM", f"{word!r} item ignored", t.start)
            if word in ("initial", "final"):
                self.advance()
                self.skip_statement()
                return
            self.skip_to_semicolon()
            return
        if word in ("assert", "assume", "cover") or (t.kind == "ident" and self.peek().text == ":"):
            self.diag(WARNING, "E_SKIPPED_ITEM", "concurrent assertion inside module ignored", t.start)
            self.skip_to_semicolon()
            return
        if t.kind == "ident" and word not in _KEYWORDS_NOT_TYPES:
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == "#" or (
                nxt.kind == "ident" and self.peek(2).kind == "op" and self.peek(2).text == "("
            ):
                start = t.start
                self.skip_to_semicolon()
                text = self.src[start:self.prev_end()]
                instances.append(Instance(" ".join(text.split()), span=(start, self.prev_end())))
                return
            if nxt.kind == "ident" or (nxt.kind == "op" and nxt.text == "["):
                # declaration with a user-defined type
                self.advance()
                width = self.parse_range(params)
                self.parse_name_list(lambda nm, off: declare(nm, width, "internal", off))
                return
        if t.kind == "op" and t.text == ";":
            self.advance()
            return
        self.diag(WARNING, "E_UNKNOWN_TOKEN", f"unrecognised module item starting with {t.text!r}", t.start)
        self.skip_to_semicolon()

    def parse_name_list(self, declare_one):
        while True:
            nt = self.expect_ident()
            declare_one(nt.text, nt.start)
            self.skip_unpacked()
            if self.accept("="):
                self.parse_expr()
            if not self.accept(","):
                break
        self.expect(";")

    def skip_statement(self):
        if self.at("begin"):
            depth = 0
            while self.tok.kind != "eof":
                t = self.advance()
                if t.text == "begin":
                    depth += 1
                elif t.text == "end":
                    depth -= 1
                    if depth == 0:
                        return
            raise _Abort("E_UNBALANCED", "missing 'end'", len(self.src))
        self.skip_to_semicolon()

    def parse_always(self) -> Optional[AlwaysBlock]:
        t = self.advance()
        kind = t.text
        if kind == "always_latch":
            self.diag(WARNING, "E_LATCH", "always_latch treated as always_comb", t.start)
            kind = "always_comb"
        sensitivity: List[Tuple[str, str]] = []
        if kind != "always_comb":
            if not self.at("@"):
                self.diag(WARNING, "E_SKIPPED_ITEM", "always without event control ignored", t.start)
                self.skip_statement()
                return None
            self.advance()
            if self.accept("*"):
                sensitivity.append(("level", "*"))
            else:
                self.expect("(")
                while True:
                    if self.accept("*"):
                        sensitivity.append(("level", "*"))
                    else:
                        edge = "level"
                        if self.tok.kind == "ident" and self.tok.text in ("posedge", "negedge"):
                            edge = self.advance().text
                        sig = self.expect_ident().text
                        sensitivity.append((edge, sig))
                    if self.accept("or") or self.accept(","):
                        continue
                    break
                self.expect(")")
        body = self.parse_body()
        if kind != "always_comb" and not any(e != "level" for e, _ in sensitivity):
            self.diag(WARNING, "E_LEVEL_SENSITIVE", f"{kind} without an edge is treated as combinational", t.start)
        return AlwaysBlock(kind, tuple(sensitivity), tuple(body), span=(t.start, self.prev_end()))

    # ----------------------------------------------------------- statements

    def parse_body(self) -> List:
        """A statement body: the contents of ``begin``/``end`` or one statement."""
        if self.at("begin"):
            return self.parse_begin_list()
        stmt = self.parse_stmt()
        return [] if stmt is None else [stmt]

    def parse_begin_list(self) -> List:
        begin = self.expect("begin")
        if self.accept(":"):
            self.expect_ident()
        body = []
        while not self.at("end"):
            if self.tok.kind == "eof" or self.at("endmodule"):
                raise _Abort("E_UNBALANCED", "'begin' without matching 'end'", begin.start)
            stmt = self.parse_stmt()
            if stmt is not None:
                body.append(stmt)
                self.stmt_slots.append(self.prev_end())
        self.advance()
        if self.accept(":"):
            self.expect_ident()
        return body

    def parse_stmt(self):
        t = self.tok
        if t.kind == "op" and t.text == ";":
            self.advance()
            return None
        if t.kind == "ident":
            if t.text == "begin":
                body = self.parse_begin_list()
                return Block(tuple(body), span=(t.start, self.prev_end()))
            if t.text == "if":
                return self.parse_if()
            if t.text in ("unique", "unique0", "priority"):
                self.advance()
                if self.tok.text == "if":
                    return self.parse_if()
                return self.parse_case()
            if t.text in ("case", "casez", "casex"):
                return self.parse_case()
            if t.text in ("end", "endcase", "endmodule", "else"):
                raise _Abort("E_UNBALANCED", f"unexpected {t.text!r}", t.start)
            if t.text in ("for", "while", "repeat", "forever", "foreach", "do", "fork", "wait"):
                self.diag(WARNING, "E_UNSUPPORTED_STMT", f"{t.text!r} statement ignored", t.start)
                self.advance()
                if self.at("("):
                    depth = 0
                    while self.tok.kind != "eof":
                        x = self.advance()
                        if x.text == "(":
                            depth += 1
                        elif x.text == ")":
                            depth -= 1
                            if depth == 0:
                                break
                self.skip_statement()
                return None
            if self.peek().kind == "op" and self.peek().text in ("<=", "=", "["):
                return self.parse_assign()
        if t.kind == "eof":
            raise _Abort("E_UNBALANCED", "unexpected end of input inside a block", t.start)
        self.diag(WARNING, "E_UNSUPPORTED_STMT", f"unsupported statement starting with {t.text!r}", t.start)
        self.skip_to_semicolon()
        return None

    def parse_assign(self):
        start = self.tok.start
        lhs = self.parse_ident_ref()
        op = self.tok
        if not (op.kind == "op" and op.text in ("<=", "=")):
            raise _Abort("E_UNEXPECTED_TOKEN", f"expected '<=' or '=', found {op.text!r}", op.start)
        self.advance()
        rhs = self.parse_expr()
        self.expect(";")
        return Assign(lhs, rhs, op.text == "<=", span=(start, self.prev_end()))

    def parse_if(self):
        start = self.expect("if").start
        arms = []
        else_body = None
        else_span = None
        arm_start = start
        while True:
            self.expect("(")
            cond = self.parse_expr()
            if not self.at(")"):
                raise _Abort("E_UNBALANCED_PARENS", "missing ')' after if condition", self.tok.start)
            self.advance()
            body = self.parse_body()
            arms.append(IfArm(cond, tuple(body), span=(arm_start, self.prev_end())))
            if self.at("else"):
                else_tok = self.advance()
                if self.at("if"):
                    arm_start = else_tok.start
                    self.advance()
                    continue
                body = self.parse_body()
                else_body = tuple(body)
                else_span = (else_tok.start, self.prev_end())
            break
        return If(tuple(arms), else_body, span=(start, self.prev_end()), else_span=else_span)

    def parse_case(self):
        kw = self.advance()
        if kw.text != "case":
            self.diag(WARNING, "E_CASEZ", f"{kw.text!r} treated as 'case'", kw.start)
        self.expect("(")
        selector = self.parse_expr()
        self.expect(")")
        arms = []
        default_body = None
        default_span = None
        seen = {}
        while not self.at("endcase"):
            t = self.tok
            if t.kind == "eof" or self.at("endmodule"):
                raise _Abort("E_UNBALANCED", "'case' without 'endcase'", kw.start)
            if self.at("default"):
                self.advance()
                self.accept(":")
                body = self.parse_body()
                default_body = tuple(body)
                default_span = (t.start, self.prev_end())
                continue
            labels = [self.parse_expr()]
            while self.accept(","):
                labels.append(self.parse_expr())
            self.expect(":")
            for lbl in labels:
                key = lbl.value if isinstance(lbl, Literal) else lbl
                if key in seen:
                    self.diag(ERROR, "E_DUPLICATE_LABEL", "duplicate case label", lbl.span[0] if lbl.span else t.start)
                    raise _Abort("E_DUPLICATE_LABEL_SKIP", "", t.start)
                seen[key] = True
            body = self.parse_body()
            arms.append(CaseArm(tuple(labels), tuple(body), span=(t.start, self.prev_end())))
        self.advance()
        if not arms:
            raise _Abort("E_EMPTY_CASE", "case statement has no labelled arms", kw.start)
        return Case(selector, tuple(arms), default_body, span=(kw.start, self.prev_end()), default_span=default_span)


_NET_TYPES = frozenset(
    {"wire", "reg", "logic", "bit", "signed", "unsigned", "integer", "int", "byte", "var", "tri"}
)
_SKIP_BLOCKS = {
    "function": "endfunction",
    "task": "endtask",
    "generate": "endgenerate",
    "property": "endproperty",
    "sequence": "endsequence",
    "covergroup": "endgroup",
    "class": "endclass",
    "interface": "endinterface",
    "specify": "endspecify",
}
_KEYWORDS_NOT_TYPES = frozenset(
    {"begin", "end", "if", "else", "case", "endcase", "module", "endmodule", "posedge", "negedge",
     "or", "and", "not", "always", "always_ff", "always_comb"}
)


def parse_module(src, defines: Iterable[str] = ()) -> Tuple[Optional[RtlModule], List[ParseDiagnostic]]:
    """Parse the first module in ``src`` after resolving `ifdef regions.

    Returns ``(None, diagnostics)`` when no module header exists or the
    begin/end structure is unbalanced. Spans index the normalised source.
    """
    src = normalize_source(src)
    try:
        text, regions = _run(src, set(defines), True)
    except UnterminatedIfdef as exc:
        p = _Parser(src)
        p.diag(ERROR, "E_UNTERMINATED_IFDEF", str(exc), len(src))
        return None, p.sorted_diags()
    p = _RtlParser(text)
    try:
        module = p.parse_module()
    except _Abort as exc:
        p.diag(ERROR, exc.code, exc.message, exc.offset)
        module = None
    if module is not None and regions:
        module = _with_regions(module, regions)
    if module is not None:
        bad = [d for d in p.diags if d.severity == ERROR and d.code == "E_UNBALANCED"]
        if bad:
            module = None
    return module, p.sorted_diags()


def _with_regions(module, regions):
    from dataclasses import replace

    return replace(module, ifdef_regions=tuple(regions))


def declared_names(src, defines: Iterable[str] = ()) -> Tuple[Optional[List[str]], List[ParseDiagnostic]]:
    """Names declared by the first module, in order and with repeats kept.

    Returns ``(None, diagnostics)`` when the module does not parse.
    """
    src = normalize_source(src)
    try:
        text, _ = _run(src, set(defines), True)
    except UnterminatedIfdef as exc:
        p = _Parser(src)
        p.diag(ERROR, "E_UNTERMINATED_IFDEF", str(exc), len(src))
        return None, p.sorted_diags()
    p = _RtlParser(text)
    try:
        module = p.parse_module()
    except _Abort as exc:
        p.diag(ERROR, exc.code, exc.message, exc.offset)
        module = None
    if module is None:
        return None, p.sorted_diags()
    return list(p.declared_events), p.sorted_diags()


def parse_statements(src) -> Tuple[Tuple, List[ParseDiagnostic]]:
    """Parse a bare statement list (as in a code snippet without module wrapper)."""
    src = normalize_source(src)
    p = _RtlParser(src)
    body = []
    while p.tok.kind != "eof":
        try:
            stmt = p.parse_stmt()
        except _Abort as exc:
            p.diag(ERROR, exc.code, exc.message, exc.offset)
            break
        if stmt is not None:
            body.append(stmt)
    return tuple(body), p.sorted_diags()


def parse_block(src):
    """Parse a bare snippet: a single always block, or else a statement list."""
    src = normalize_source(src)
    p = _RtlParser(src)
    if p.tok.kind == "ident" and p.tok.text in ("always", "always_ff", "always_comb", "always_latch"):
        try:
            block = p.parse_always()
        except _Abort as exc:
            p.diag(ERROR, exc.code, exc.message, exc.offset)
            return None, p.sorted_diags()
        if p.tok.kind != "eof":
            p.diag(WARNING, "E_TRAILING_INPUT", "text after the always block ignored", p.tok.start)
        return block, p.sorted_diags()
    return parse_statements(src)


def parse_expr(src):
    """Parse a single expression; raises ``ValueError`` on any error."""
    p = _Parser(normalize_source(src))
    try:
        e = p.parse_expr()
    except _Abort as exc:
        raise ValueError(f"{exc.code}: {exc.message}") from None
    if p.tok.kind != "eof":
        raise ValueError(f"trailing input at offset {p.tok.start}: {p.tok.text!r}")
    return e


# ====================================================================== SVA


@dataclass(frozen=True)
class PropertyUnit:
    """One declared property (or inline assertion) and whether it parsed."""

    name: str
    span: Tuple[int, int]
    prop: Optional[Property]
    errors: Tuple[ParseDiagnostic, ...]


class _SvaParser(_Parser):
    def __init__(self, src):
        super().__init__(src)
        self.units: List[PropertyUnit] = []
        self.declared_names: Dict[str, int] = {}
        self.inline_count = 0

    def run(self):
        junk_reported = -1
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind == "ident" and t.text == "property":
                self.unit(self.property_decl, t.start)
                continue
            label = None
            if t.kind == "ident" and self.peek().text == ":" and self.peek(2).text in ("assert", "assume", "cover"):
                label = t.text
                self.advance()
                self.advance()
                t = self.tok
            if t.kind == "ident" and t.text in ("assert", "assume", "cover") and self.peek().text == "property":
                # `assert property (Name);` references an existing declaration
                if (
                    self.peek(2).text == "("
                    and self.peek(3).kind == "ident"
                    and self.peek(3).text in self.declared_names
                    and self.peek(4).text == ")"
                ):
                    self.i += 5
                    self.accept(";")
                    continue
                self.unit(lambda: self.inline_assert(label), t.start)
                continue
            if junk_reported < 0 or self.i > junk_reported:
                if t.kind not in ("eof",) and not (t.kind == "ident" and t.text in ("module", "endmodule")):
                    self.diag(WARNING, "E_UNKNOWN_TOKEN", f"text outside any property: {t.text!r}", t.start)
            self.advance()
            junk_reported = self.i

    def unit(self, fn, start):
        mark = len(self.diags)
        try:
            prop = fn()
        except _Abort as exc:
            self.diag(ERROR, exc.code, exc.message, exc.offset)
            self.recover()
            prop = None
        errors = tuple(d for d in self.diags[mark:] if d.severity == ERROR)
        if errors:
            prop = None
        name = prop.name if prop is not None else self._unit_name(start)
        self.units.append(PropertyUnit(name, (start, self.prev_end()), prop, errors))

    def _unit_name(self, start):
        toks = tokenize(self.src[start:start + 200])
        if len(toks) > 1 and toks[0].text == "property" and toks[1].kind == "ident":
            return toks[1].text
        return f"assert_{len(self.units)}"

    def recover(self):
        """Skip to the end of the broken unit: its ``endproperty`` or the next opener."""
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind == "ident" and t.text == "endproperty":
                self.advance()
                if self.accept(":"):
                    if self.tok.kind == "ident":
                        self.advance()
                return
            if t.kind == "ident" and t.text == "property":
                return
            if t.kind == "ident" and t.text in ("assert", "assume", "cover") and self.peek().text == "property":
                return
            if t.kind == "ident" and self.peek().text == ":" and self.peek(2).text in ("assert", "assume", "cover"):
                return
            self.advance()

    def property_decl(self) -> Property:
        start = self.expect("property").start
        name_tok = self.expect_ident()
        name = name_tok.text
        if self.at("("):
            raise _Abort("E_UNSUPPORTED_PROPERTY_ARGS", "property arguments are not supported", self.tok.start)
        self.expect(";")
        clocking, disable, ante, delay, cons = self.property_body()
        self.accept(";")
        if not self.at("endproperty"):
            t = self.tok
            if t.kind == "eof" or (t.kind == "ident" and t.text in ("property", "assert", "endmodule")):
                raise _Abort("E_MISSING_ENDPROPERTY", f"property {name!r} is missing 'endproperty'", t.start)
            raise _Abort("E_UNEXPECTED_TOKEN", f"expected 'endproperty', found {t.text!r}", t.start)
        self.advance()
        if self.accept(":"):
            self.expect_ident()
        if name in self.declared_names:
            self.diag(WARNING, "E_DUPLICATE_NAME", f"property name {name!r} reused", name_tok.start)
        self.declared_names[name] = start
        return Property(name, clocking, ante, cons, delay, disable, span=(start, self.prev_end()))

    def inline_assert(self, label) -> Property:
        kw = self.advance()
        self.expect("property")
        if not self.at("("):
            raise _Abort("E_UNEXPECTED_TOKEN", "expected '(' after 'property'", self.tok.start)
        self.advance()
        clocking, disable, ante, delay, cons = self.property_body()
        if not self.at(")"):
            raise _Abort("E_UNBALANCED_PARENS", "missing ')' closing the assertion", self.tok.start)
        self.advance()
        if self.at("else"):
            self.advance()
            self.skip_action()
        else:
            self.expect(";")
        name = label or f"assert_{self.inline_count}"
        self.inline_count += 1
        return Property(name, clocking, ante, cons, delay, disable, span=(kw.start, self.prev_end()))

    def skip_action(self):
        if self.at("begin"):
            depth = 0
            while self.tok.kind != "eof":
                t = self.advance()
                if t.text == "begin":
                    depth += 1
                elif t.text == "end":
                    depth -= 1
                    if depth == 0:
                        return
            raise _Abort("E_UNBALANCED", "action block missing 'end'", len(self.src))
        t = self.tok
        if t.kind != "sysident":
            raise _Abort("E_UNEXPECTED_TOKEN", "expected an action statement after 'else'", t.start)
        self.advance()
        if self.at("("):
            depth = 0
            while True:
                x = self.tok
                if x.kind == "eof" or (x.kind == "ident" and x.text in ("assert", "property", "endproperty")):
                    raise _Abort("E_UNBALANCED_PARENS", f"unterminated {t.text} call", x.start)
                self.advance()
                if x.text == "(":
                    depth += 1
                elif x.text == ")":
                    depth -= 1
                    if depth == 0:
                        break
        self.expect(";")

    def property_body(self):
        clocking = None
        disable = None
        if self.at("@"):
            self.advance()
            self.expect("(")
            edge = "level"
            if self.tok.kind == "ident" and self.tok.text in ("posedge", "negedge"):
                edge = self.advance().text
            sig = self.expect_ident().text
            self.expect(")")
            clocking = (edge, sig)
        if self.tok.kind == "ident" and self.tok.text == "disable":
            self.advance()
            self.expect("iff")
            self.expect("(")
            disable = self.parse_expr(in_property=True)
            if not self.at(")"):
                raise _Abort("E_UNBALANCED_PARENS", "missing ')' after disable iff", self.tok.start)
            self.advance()
        ante_start = self.tok.start
        ante = self.parse_expr(in_property=True)
        if self.at("="):
            raise _Abort(
                "E_ASSIGN_IN_ANTECEDENT",
                "assignment '=' used where a comparison '==' is required",
                self.tok.start,
            )
        delay = 0
        t = self.tok
        if t.kind == "op" and t.text in ("|->", "|=>"):
            self.advance()
            if t.text == "|=>":
                self.diag(
                    WARNING,
                    "E_NONOVERLAP_IMPLICATION_WARN",
                    "'|=>' normalised to '|-> ##1'",
                    t.start,
                )
                delay = 1
            if self.at("##"):
                self.advance()
                dt = self.tok
                if dt.kind != "number" or dt.literal[2] is None:
                    raise _Abort("E_UNSUPPORTED_SEQUENCE", "only constant '##N' delays are supported", dt.start)
                self.advance()
                delay += dt.literal[2]
            cons = self.parse_expr(in_property=True)
        else:
            if ante_start == t.start:
                raise _Abort("E_UNEXPECTED_TOKEN", f"expected property expression, found {t.text!r}", t.start)
            cons = ante
            ante = Literal(1, "bin", 1)
        if self.at("="):
            raise _Abort(
                "E_ASSIGN_IN_CONSEQUENT",
                "assignment '=' used where a comparison '==' is required",
                self.tok.start,
            )
        if self.at("##") or (self.tok.kind == "op" and self.tok.text in ("|->", "|=>")):
            raise _Abort("E_UNSUPPORTED_SEQUENCE", "only a single implication is supported", self.tok.start)
        return clocking, disable, ante, delay, cons


def parse_property_units(src) -> Tuple[List[PropertyUnit], List[ParseDiagnostic]]:
    """Every declared property unit, parsed or not, plus all diagnostics."""
    src = normalize_source(src)
    p = _SvaParser(src)
    p.run()
    return p.units, p.sorted_diags()


def parse_properties(src) -> Tuple[List[Property], List[ParseDiagnostic]]:
    """Parse ``property ... endproperty`` and ``assert property (...)`` forms.

    Properties with at least one error are dropped from the result but their
    diagnostics are kept.
    """
    units, diags = parse_property_units(src)
    return [u.prop for u in units if u.prop is not None], diags
