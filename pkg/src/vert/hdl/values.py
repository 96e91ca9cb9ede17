"""Two-valued bit-vector semantics for :mod:`vert.hdl.ast` expressions.

Width rule: an operator works at the width of its wider operand, operands are
zero-extended, and fill literals (``'0``/``'1``) adopt the width of whatever
they are combined with. Comparisons and logical operators yield one bit.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from vert.errors import PastDepthExceedsTrace, UnboundIdentifier
from vert.hdl.ast import (
    Binary,
    Cast,
    Expr,
    Ident,
    Literal,
    Past,
    Stable,
    Ternary,
    Unary,
)

UNSIZED_WIDTH = 32


def mask(width: int) -> int:
    return (1 << width) - 1


@dataclass(frozen=True)
class BitVec:
    value: int
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("bit-vector width must be positive")
        if self.value < 0 or self.value >> self.width:
            raise ValueError(f"{self.value} does not fit in {self.width} bits")

    def __bool__(self):
        return self.value != 0


def literal_width(lit: Literal) -> Optional[int]:
    if lit.base == "fill":
        return None
    return lit.width if lit.width is not None else UNSIZED_WIDTH


def expr_width(e: Expr, widths: Mapping[str, int]) -> Optional[int]:
    """Self-determined width of ``e``; ``None`` for a bare fill literal.

    Unknown identifiers default to one bit.
    """
    if isinstance(e, Ident):
        if e.index is not None:
            return 1
        return widths.get(e.name, 1)
    if isinstance(e, Literal):
        return literal_width(e)
    if isinstance(e, Cast):
        return e.width
    if isinstance(e, Unary):
        if e.op in ("!", "|"):
            return 1
        return expr_width(e.inner, widths)
    if isinstance(e, Binary):
        if e.op in ("&&", "||", "==", "!=", "<", "<=", ">", ">="):
            return 1
        return join_widths(expr_width(e.lhs, widths), expr_width(e.rhs, widths))
    if isinstance(e, Ternary):
        return join_widths(expr_width(e.then, widths), expr_width(e.orelse, widths))
    if isinstance(e, Past):
        return expr_width(e.inner, widths)
    if isinstance(e, Stable):
        return 1
    raise TypeError(f"not an expression: {e!r}")


def join_widths(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


# ----------------------------------------------------------- scalar evaluation


class TraceContext:
    """Post-edge history visible to ``$past``/``$stable``.

    ``history[-1]`` is the most recent completed cycle; each entry maps a
    signal name to a :class:`BitVec`.
    """

    def __init__(self, history: Sequence[Mapping[str, BitVec]]):
        self.history = history

    def lookup(self, depth: int) -> Mapping[str, BitVec]:
        if depth > len(self.history):
            raise PastDepthExceedsTrace(
                f"$past depth {depth} exceeds available history of {len(self.history)} cycles"
            )
        return self.history[-depth]


def eval_expr(e: Expr, env: Mapping[str, BitVec], past: Optional[TraceContext] = None) -> BitVec:
    """Evaluate ``e`` under ``env``.

    ``&&``, ``||`` and ``!`` collapse operands to booleans; relational operators
    compare zero-extended values; arithmetic wraps at the result width.
    """
    value, width = _eval(e, env, past, None)
    if width is None:
        width = 1
    return BitVec(value & mask(width), width)


def _fill(value: int, width: Optional[int]) -> int:
    # value is 0 or 1 for a fill literal
    w = 1 if width is None else width
    return mask(w) if value else 0


def _eval(e, env, past, ctx_width):
    """Returns (value, width); width None marks an unexpanded fill literal."""
    if isinstance(e, Ident):
        try:
            bv = env[e.name]
        except KeyError:
            raise UnboundIdentifier(e.name) from None
        if e.index is None:
            return bv.value, bv.width
        if isinstance(e.index, int):
            idx = e.index
        else:
            try:
                idx = env[e.index].value
            except KeyError:
                raise UnboundIdentifier(e.index) from None
        return (bv.value >> idx) & 1 if idx < bv.width else 0, 1
    if isinstance(e, Literal):
        if e.base == "fill":
            if ctx_width is None:
                return e.value, None
            return _fill(e.value, ctx_width), ctx_width
        return e.value, literal_width(e)
    if isinstance(e, Cast):
        v, w = _eval(e.inner, env, past, e.width)
        if w is None:
            v = _fill(v, e.width)
        return v & mask(e.width), e.width
    if isinstance(e, Unary):
        if e.op == "!":
            v, _ = _eval(e.inner, env, past, None)
            return int(v == 0), 1
        if e.op == "|":
            v, _ = _eval(e.inner, env, past, None)
            return int(v != 0), 1
        v, w = _eval(e.inner, env, past, ctx_width)
        if w is None:
            w = 1
            v = _fill(v, w)
        if e.op == "~":
            return (~v) & mask(w), w
        return (-v) & mask(w), w
    if isinstance(e, Binary):
        op = e.op
        if op == "&&" or op == "||":
            lv, _ = _eval(e.lhs, env, past, None)
            rv, _ = _eval(e.rhs, env, past, None)
            if op == "&&":
                return int(lv != 0 and rv != 0), 1
            return int(lv != 0 or rv != 0), 1
        lv, lw = _eval(e.lhs, env, past, None)
        rv, rw = _eval(e.rhs, env, past, None)
        w = join_widths(lw, rw)
        if w is None:
            w = ctx_width if ctx_width is not None else 1
        if lw is None:
            lv = _fill(lv, w)
        if rw is None:
            rv = _fill(rv, w)
        if op == "==":
            return int(lv == rv), 1
        if op == "!=":
            return int(lv != rv), 1
        if op == "<":
            return int(lv < rv), 1
        if op == "<=":
            return int(lv <= rv), 1
        if op == ">":
            return int(lv > rv), 1
        if op == ">=":
            return int(lv >= rv), 1
        m = mask(w)
        if op == "+":
            return (lv + rv) & m, w
        if op == "-":
            return (lv - rv) & m, w
        if op == "&":
            return lv & rv, w
        if op == "|":
            return lv | rv, w
        return lv ^ rv, w
    if isinstance(e, Ternary):
        tv, _ = _eval(e.test, env, past, None)
        a_v, a_w = _eval(e.then, env, past, None)
        b_v, b_w = _eval(e.orelse, env, past, None)
        w = join_widths(a_w, b_w) or ctx_width or 1
        if tv:
            return (_fill(a_v, w) if a_w is None else a_v), w
        return (_fill(b_v, w) if b_w is None else b_v), w
    if isinstance(e, Past):
        if past is None:
            raise PastDepthExceedsTrace("$past needs a trace context")
        old_env = past.lookup(e.depth)
        shifted = TraceContext(past.history[: len(past.history) - e.depth])
        return _eval(e.inner, old_env, shifted, ctx_width)
    if isinstance(e, Stable):
        now_v, _ = _eval(e.inner, env, past, None)
        old_v, _ = _eval(Past(e.inner, 1), env, past, None)
        return int(now_v == old_v), 1
    raise TypeError(f"not an expression: {e!r}")
