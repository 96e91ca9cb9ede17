"""Lowering of an RTL module to the register bytecode run by the simulator kernel.

Register file layout: declared signals and parameters first (in declaration
order, then parameters), then interned constants, then temporaries. Every
value is an unsigned 64-bit word, so declared widths above 64 are rejected.

Each instruction is five int64 fields ``(op, dst, a, b, c)``. Widths travel
in the ``c`` field and are turned into masks by the kernel. Width handling
mirrors :func:`vert.hdl.values.eval_expr` exactly, so a property evaluated on
the trace sees the same arithmetic the design performed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from vert.errors import UnelaboratedModule, UnsupportedStmt, UnsupportedWidth
from vert.hdl.ast import (
    Assign,
    Binary,
    Block,
    Case,
    Cast,
    Ident,
    If,
    Literal,
    Past,
    RtlModule,
    Stable,
    Ternary,
    Unary,
    identifiers,
    iter_stmts,
)
from vert.hdl.values import join_widths, literal_width, mask

MAX_WIDTH = 64

# opcodes; keep in sync with _vm.pyx and _fallback.py
MOV, LNOT, RED, BNOT, NEG = 0, 1, 2, 3, 4
AND, OR, XOR, ADD, SUB = 5, 6, 7, 8, 9
EQ, NE, LT, LE, GT, GE = 10, 11, 12, 13, 14, 15
LAND, LOR, BITSEL, TERN, MASK = 16, 17, 18, 19, 20
JZ, JMP, NBA, BLK = 21, 22, 23, 24

_BINOP = {
    "&": AND, "|": OR, "^": XOR, "+": ADD, "-": SUB,
    "==": EQ, "!=": NE, "<": LT, "<=": LE, ">": GT, ">=": GE,
    "&&": LAND, "||": LOR,
}
_COMPARE = ("==", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Program:
    names: Tuple[str, ...]
    widths: Tuple[int, ...]
    inputs: Tuple[str, ...]
    input_slots: np.ndarray  # int64
    comb: np.ndarray  # (n, 5) int64
    seq: np.ndarray  # (n, 5) int64
    init: np.ndarray  # uint64 register file at reset
    assigned: Tuple[str, ...]

    @property
    def n_signals(self) -> int:
        return len(self.names)

    def slot(self, name: str) -> int:
        return self.names.index(name)


class _Emitter:
    def __init__(self, slots: Dict[str, int], widths: Dict[str, int], n_signals: int):
        self.slots = slots
        self.widths = widths
        self.consts: Dict[int, int] = {}
        self.const_values: List[int] = []
        self.n_signals = n_signals
        self.n_temps = 0
        # temporaries are numbered from zero and relocated once the constant count is known
        self.code: List[List[int]] = []

    # registers are encoded as ("s", i), ("k", i) or ("t", i) until finalize
    def const(self, value: int):
        if value not in self.consts:
            self.consts[value] = len(self.const_values)
            self.const_values.append(value)
        return ("k", self.consts[value])

    def temp(self):
        self.n_temps += 1
        return ("t", self.n_temps - 1)

    def emit(self, op, dst=None, a=None, b=None, c=0):
        self.code.append([op, dst, a, b, c])
        return dst

    # ---------------------------------------------------------- expressions

    def expr(self, e, ctx: Optional[int]):
        """Returns (register, width); width None marks a raw fill bit (register holds 0 or 1)."""
        if isinstance(e, Ident):
            if e.name not in self.slots:
                raise UnelaboratedModule(f"identifier {e.name!r} is not declared")
            base = ("s", self.slots[e.name])
            if e.index is None:
                return base, self.widths[e.name]
            if isinstance(e.index, int):
                idx = self.const(e.index)
            else:
                if e.index not in self.slots:
                    raise UnelaboratedModule(f"identifier {e.index!r} is not declared")
                idx = ("s", self.slots[e.index])
            return self.emit(BITSEL, self.temp(), base, idx), 1
        if isinstance(e, Literal):
            if e.base == "fill":
                if ctx is None:
                    return self.const(e.value), None
                return self.const(mask(ctx) if e.value else 0), ctx
            w = literal_width(e)
            if w > MAX_WIDTH:
                raise UnsupportedWidth(f"literal of width {w} exceeds {MAX_WIDTH} bits")
            return self.const(e.value), w
        if isinstance(e, Cast):
            if e.width > MAX_WIDTH:
                raise UnsupportedWidth(f"cast to width {e.width} exceeds {MAX_WIDTH} bits")
            r, w = self.expr(e.inner, e.width)
            if w is None:
                r = self.expand(r, e.inner, e.width)
            return self.emit(MASK, self.temp(), r, None, e.width), e.width
        if isinstance(e, Unary):
            if e.op in ("!", "|"):
                r, _ = self.expr(e.inner, None)
                return self.emit(LNOT if e.op == "!" else RED, self.temp(), r), 1
            r, w = self.expr(e.inner, ctx)
            if w is None:
                w = 1
            return self.emit(BNOT if e.op == "~" else NEG, self.temp(), r, None, w), w
        if isinstance(e, Binary):
            if e.op in ("&&", "||"):
                lr, _ = self.expr(e.lhs, None)
                rr, _ = self.expr(e.rhs, None)
                return self.emit(_BINOP[e.op], self.temp(), lr, rr), 1
            lr, lw = self.expr(e.lhs, None)
            rr, rw = self.expr(e.rhs, None)
            w = join_widths(lw, rw)
            if w is None:
                w = ctx if ctx is not None else 1
            if lw is None:
                lr = self.expand(lr, e.lhs, w)
            if rw is None:
                rr = self.expand(rr, e.rhs, w)
            dst = self.emit(_BINOP[e.op], self.temp(), lr, rr, w)
            return dst, (1 if e.op in _COMPARE else w)
        if isinstance(e, Ternary):
            tr, _ = self.expr(e.test, None)
            ar, aw = self.expr(e.then, None)
            br, bw = self.expr(e.orelse, None)
            w = join_widths(aw, bw) or ctx or 1
            if aw is None:
                ar = self.expand(ar, e.then, w)
            if bw is None:
                br = self.expand(br, e.orelse, w)
            dst = self.temp()
            self.code.append([TERN, dst, tr, ar, br])
            return dst, w
        if isinstance(e, (Past, Stable)):
            raise UnsupportedStmt("$past/$stable are not allowed in design code")
        raise TypeError(f"not an expression: {e!r}")

    def expand(self, reg, lit, width):
        # reg holds a fill literal's raw bit; the literal itself is known statically
        return self.const(mask(width) if lit.value else 0)

    # ----------------------------------------------------------- statements

    def stmts(self, body, sequential: bool):
        for s in body:
            self.stmt(s, sequential)

    def stmt(self, s, sequential):
        if isinstance(s, Assign):
            if s.lhs.index is not None:
                raise UnsupportedStmt("assignment to a bit-select is not supported")
            name = s.lhs.name
            if name not in self.slots:
                raise UnelaboratedModule(f"identifier {name!r} is not declared")
            w = self.widths[name]
            r, rw = self.expr(s.rhs, w)
            if rw is None:
                r = self.expand(r, s.rhs, w)
            op = NBA if (sequential and s.nonblocking) else BLK
            self.emit(op, ("s", self.slots[name]), r, None, w)
        elif isinstance(s, Block):
            self.stmts(s.body, sequential)
        elif isinstance(s, If):
            exits = []
            for arm in s.arms:
                r, _ = self.expr(arm.cond, None)
                jz = self.emit_jump(JZ, r)
                self.stmts(arm.body, sequential)
                exits.append(self.emit_jump(JMP))
                self.patch(jz)
            if s.else_body is not None:
                self.stmts(s.else_body, sequential)
            for j in exits:
                self.patch(j)
        elif isinstance(s, Case):
            exits = []
            for arm in s.arms:
                hit = None
                for label in arm.labels:
                    r, _ = self.expr(Binary("==", s.selector, label), None)
                    hit = r if hit is None else self.emit(LOR, self.temp(), hit, r)
                jz = self.emit_jump(JZ, hit)
                self.stmts(arm.body, sequential)
                exits.append(self.emit_jump(JMP))
                self.patch(jz)
            if s.default_body is not None:
                self.stmts(s.default_body, sequential)
            for j in exits:
                self.patch(j)
        else:
            raise UnsupportedStmt(f"unsupported statement {type(s).__name__}")

    def emit_jump(self, op, reg=None):
        self.code.append([op, None, reg, None, 0])
        return len(self.code) - 1

    def patch(self, at):
        # jump target lives in field b (JZ) or a (JMP)
        if self.code[at][0] == JZ:
            self.code[at][3] = len(self.code)
        else:
            self.code[at][2] = len(self.code)

    def take(self) -> List[List[int]]:
        out, self.code = self.code, []
        return out


def _resolve(code, n_signals, n_consts) -> np.ndarray:
    def reg(x):
        if x is None:
            return 0
        if isinstance(x, int):
            return x
        kind, i = x
        if kind == "s":
            return i
        if kind == "k":
            return n_signals + i
        return n_signals + n_consts + i

    arr = np.zeros((len(code), 5), dtype=np.int64)
    for i, (op, d, a, b, c) in enumerate(code):
        if op in (JZ, JMP):
            arr[i] = (op, 0, reg(a) if op == JZ else a, b if op == JZ else 0, 0)
        elif op == TERN:
            arr[i] = (op, reg(d), reg(a), reg(b), reg(c))
        else:
            arr[i] = (op, reg(d), reg(a), reg(b), c)
    return arr


def compile_module(m: RtlModule) -> Program:
    """Lower ``m``; raises UnelaboratedModule for undeclared identifiers."""
    names: List[str] = []
    widths: Dict[str, int] = {}
    for d in m.decls:
        if d.name in widths:
            continue
        names.append(d.name)
        widths[d.name] = d.width
    params = {}
    for p in m.params:
        if p.name in widths:
            continue
        names.append(p.name)
        widths[p.name] = literal_width(p.value) or 32
        params[p.name] = p.value.value & mask(widths[p.name])
    for n, w in widths.items():
        if w > MAX_WIDTH:
            raise UnsupportedWidth(f"signal {n!r} is {w} bits wide; at most {MAX_WIDTH} are supported")
    slots = {n: i for i, n in enumerate(names)}
    for block in m.always_blocks:
        for _, sig in block.sensitivity:
            if sig not in slots:
                raise UnelaboratedModule(f"sensitivity signal {sig!r} is not declared")
    em = _Emitter(slots, widths, len(names))
    comb_code: List[List[int]] = []
    seq_code: List[List[int]] = []
    for block in m.always_blocks:
        sequential = block.is_sequential
        em.stmts(block.body, sequential)
        body = em.take()
        target = seq_code if sequential else comb_code
        base = len(target)
        for ins in body:
            if ins[0] == JZ:
                ins[3] += base
            elif ins[0] == JMP:
                ins[2] += base
        target.extend(body)
    n_consts = len(em.const_values)
    init = np.zeros(len(names) + n_consts + em.n_temps, dtype=np.uint64)
    for n, v in params.items():
        init[slots[n]] = v
    for i, v in enumerate(em.const_values):
        init[len(names) + i] = v & mask(MAX_WIDTH)
    inputs = tuple(d.name for d in m.decls if d.direction == "input" and d.name in slots)
    # de-duplicate while keeping order
    inputs = tuple(dict.fromkeys(inputs))
    assigned: Dict[str, None] = {}
    for block in m.always_blocks:
        for s in iter_stmts(block.body):
            if isinstance(s, Assign):
                assigned.setdefault(s.lhs.name, None)
    return Program(
        names=tuple(names),
        widths=tuple(widths[n] for n in names),
        inputs=inputs,
        input_slots=np.array([slots[n] for n in inputs], dtype=np.int64),
        comb=_resolve(comb_code, len(names), n_consts),
        seq=_resolve(seq_code, len(names), n_consts),
        init=init,
        assigned=tuple(assigned),
    )


def referenced_names(m: RtlModule) -> Tuple[str, ...]:
    """Every identifier read or written by the module's always blocks."""
    seen: Dict[str, None] = {}
    for block in m.always_blocks:
        for s in iter_stmts(block.body):
            if isinstance(s, Assign):
                seen.setdefault(s.lhs.name, None)
                for n in identifiers(s.rhs):
                    seen.setdefault(n, None)
            elif isinstance(s, If):
                for arm in s.arms:
                    for n in identifiers(arm.cond):
                        seen.setdefault(n, None)
            elif isinstance(s, Case):
                for n in identifiers(s.selector):
                    seen.setdefault(n, None)
    return tuple(seen)


__all__ = ["MAX_WIDTH", "Program", "compile_module", "referenced_names"]
