"""Canonical text rendering of modules, statements, expressions and properties.

Parenthesisation is precedence-minimal, except that a ``&&``/``||`` operand of
the other logical operator is always wrapped so mixed boolean structure is
explicit. Output is deterministic; ``parse(print(x)) == x`` on the subset.
"""
from __future__ import annotations

from vert.hdl.ast import (
    AlwaysBlock,
    Assign,
    Binary,
    Block,
    Case,
    Cast,
    Expr,
    Ident,
    If,
    Literal,
    Past,
    Property,
    RtlModule,
    Stable,
    Ternary,
    Unary,
)

INDENT = "  "

# larger binds tighter
PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "|": 3,
    "^": 4,
    "&": 5,
    "==": 6,
    "!=": 6,
    "<": 7,
    "<=": 7,
    ">": 7,
    ">=": 7,
    "+": 8,
    "-": 8,
}
TERNARY_PREC = 0
ATOM_PREC = 10


def format_literal(lit: Literal) -> str:
    if lit.base == "fill":
        return f"'{lit.value}"
    if lit.width is None:
        if lit.base == "dec":
            return str(lit.value)
        if lit.base == "hex":
            return f"'h{lit.value:x}"
        return f"'b{lit.value:b}"
    if lit.base == "bin":
        return f"{lit.width}'b{lit.value:0{lit.width}b}"
    if lit.base == "hex":
        return f"{lit.width}'h{lit.value:x}"
    return f"{lit.width}'d{lit.value}"


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return PRECEDENCE[e.op]
    if isinstance(e, Ternary):
        return TERNARY_PREC
    if isinstance(e, Unary):
        return 9
    return ATOM_PREC


def format_expr(e: Expr) -> str:
    if isinstance(e, Ident):
        if e.index is None:
            return e.name
        return f"{e.name}[{e.index}]"
    if isinstance(e, Literal):
        return format_literal(e)
    if isinstance(e, Cast):
        return f"{e.width}'({format_expr(e.inner)})"
    if isinstance(e, Unary):
        inner = format_expr(e.inner)
        if _prec(e.inner) < ATOM_PREC:
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, Binary):
        return f"{_operand(e, e.lhs, left=True)} {e.op} {_operand(e, e.rhs, left=False)}"
    if isinstance(e, Ternary):
        parts = []
        for sub in (e.test, e.then, e.orelse):
            text = format_expr(sub)
            parts.append(f"({text})" if isinstance(sub, Ternary) else text)
        return f"{parts[0]} ? {parts[1]} : {parts[2]}"
    if isinstance(e, Past):
        if e.depth == 1:
            return f"$past({format_expr(e.inner)})"
        return f"$past({format_expr(e.inner)}, {e.depth})"
    if isinstance(e, Stable):
        return f"$stable({format_expr(e.inner)})"
    raise TypeError(f"not an expression: {e!r}")


def _operand(parent: Binary, child: Expr, left: bool) -> str:
    text = format_expr(child)
    p, c = PRECEDENCE[parent.op], _prec(child)
    wrap = c < p or (c == p and not left)
    if isinstance(child, Binary) and c == p and left and child.op != parent.op:
        wrap = True
    if (
        isinstance(child, Binary)
        and parent.op in ("&&", "||")
        and child.op in ("&&", "||")
        and child.op != parent.op
    ):
        wrap = True
    return f"({text})" if wrap else text


# --------------------------------------------------------------- statements


def format_stmt(s, depth: int = 0) -> list:
    pad = INDENT * depth
    if isinstance(s, Assign):
        op = "<=" if s.nonblocking else "="
        return [f"{pad}{format_expr(s.lhs)} {op} {format_expr(s.rhs)};"]
    if isinstance(s, Block):
        return [f"{pad}begin", *_body(s.body, depth + 1), f"{pad}end"]
    if isinstance(s, If):
        lines = []
        for i, arm in enumerate(s.arms):
            head = "if" if i == 0 else "end else if"
            lead = pad if i == 0 else pad
            lines.append(f"{lead}{head} ({format_expr(arm.cond)}) begin")
            lines.extend(_body(arm.body, depth + 1))
        if s.else_body is not None:
            lines.append(f"{pad}end else begin")
            lines.extend(_body(s.else_body, depth + 1))
        lines.append(f"{pad}end")
        return lines
    if isinstance(s, Case):
        lines = [f"{pad}case ({format_expr(s.selector)})"]
        inner = INDENT * (depth + 1)
        for arm in s.arms:
            labels = ", ".join(format_expr(lbl) for lbl in arm.labels)
            lines.append(f"{inner}{labels}: begin")
            lines.extend(_body(arm.body, depth + 2))
            lines.append(f"{inner}end")
        if s.default_body is not None:
            lines.append(f"{inner}default: begin")
            lines.extend(_body(s.default_body, depth + 2))
            lines.append(f"{inner}end")
        lines.append(f"{pad}endcase")
        return lines
    raise TypeError(f"not a statement: {s!r}")


def _body(body, depth):
    out = []
    for s in body:
        out.extend(format_stmt(s, depth))
    return out


def format_sensitivity(block: AlwaysBlock) -> str:
    parts = []
    for edge, sig in block.sensitivity:
        parts.append(sig if edge == "level" else f"{edge} {sig}")
    return " or ".join(parts)


def pretty_print_always(block: AlwaysBlock, depth: int = 0) -> str:
    pad = INDENT * depth
    if block.kind == "always_comb":
        head = f"{pad}always_comb begin"
    else:
        head = f"{pad}{block.kind} @({format_sensitivity(block)}) begin"
    lines = [head, *_body(block.body, depth + 1), f"{pad}end"]
    return "\n".join(lines)


def _range(width: int) -> str:
    return "" if width == 1 else f" [{width - 1}:0]"


def pretty_print_module(m: RtlModule) -> str:
    """Canonical module text. An empty module prints as ``module m; endmodule``."""
    ports = [d for d in m.decls if d.direction != "internal"]
    internals = [d for d in m.decls if d.direction == "internal"]
    if not (m.decls or m.always_blocks or m.instances or m.params):
        return f"module {m.name}; endmodule\n"
    lines = []
    if ports:
        lines.append(f"module {m.name} (")
        for i, d in enumerate(ports):
            sep = "," if i < len(ports) - 1 else ""
            lines.append(f"{INDENT}{d.direction} logic{_range(d.width)} {d.name}{sep}")
        lines.append(");")
    else:
        lines.append(f"module {m.name};")
    for p in m.params:
        lines.append(f"{INDENT}localparam {p.name} = {format_literal(p.value)};")
    for d in internals:
        lines.append(f"{INDENT}logic{_range(d.width)} {d.name};")
    for block in m.always_blocks:
        lines.append(pretty_print_always(block, 1))
    for inst in m.instances:
        lines.append(f"{INDENT}{inst.text}")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- properties


def pretty_print_property(p: Property) -> str:
    parts = [f"property {p.name};"]
    if p.clocking is not None:
        parts.append(f"@({p.clocking[0]} {p.clocking[1]})")
    if p.disable_iff is not None:
        parts.append(f"disable iff ({format_expr(p.disable_iff)})")
    parts.append(f"( {format_expr(p.antecedent)} ) |->")
    if p.delay:
        parts.append(f"##{p.delay}")
    parts.append(f"{format_expr(p.consequent)} ; endproperty")
    return " ".join(parts)


def pretty_print_properties(props) -> str:
    """Assertion-file text: one property per paragraph."""
    if not props:
        return ""
    return "\n\n".join(pretty_print_property(p) for p in props) + "\n"
