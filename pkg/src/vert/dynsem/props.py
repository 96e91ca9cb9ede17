"""Trace-level evaluation of single-implication properties.

Sampling convention for an attempt starting at cycle ``c``:

* the antecedent and ``disable iff`` read pre-edge values at ``c``;
* for a clocked property the consequent is checked at ``t = c + delay``:
  the left side of every comparison reads post-edge values at ``t``, the
  right side pre-edge values at ``t``, and any other identifier reads
  post-edge values;
* an unclocked property reads its consequent from the same settled pre-edge
  snapshot as its antecedent, since combinational outputs follow the
  registers of that instant;
* ``$past(x, n)`` reads the post-edge value of ``x`` at ``t - n``; cycles
  before the start of the trace read as zero.

Attempts whose consequent would fall beyond the end of the trace are skipped.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from vert.dynsem.simulate import Trace
from vert.errors import SignalMissing
from vert.hdl.ast import (
    Binary,
    Cast,
    Expr,
    Ident,
    Literal,
    Past,
    Property,
    Stable,
    Ternary,
    Unary,
    identifiers,
)
from vert.hdl.values import BitVec, eval_expr, join_widths, literal_width, mask

_COMPARE = ("==", "!=", "<", "<=", ">", ">=")
_U64 = np.uint64


@dataclass(frozen=True)
class Verdict:
    holds: bool
    failures: Tuple[int, ...]
    triggered_count: int
    attempts: int


def _check_signals(p: Property, t: Trace) -> None:
    for part in (p.antecedent, p.consequent, p.disable_iff):
        if part is None:
            continue
        for n in identifiers(part):
            if n not in t:
                raise SignalMissing(f"signal {n!r} used by property {p.name!r} is not in the trace")


class _Vec:
    """Vectorised evaluation over ``n`` attempts, reading cycle ``c + offset``."""

    def __init__(self, t: Trace, n: int):
        self.t = t
        self.n = n
        self._cols: Dict[Tuple[str, str, int], np.ndarray] = {}

    def column(self, name, phase, offset):
        key = (name, phase, offset)
        hit = self._cols.get(key)
        if hit is not None:
            return hit
        col = self.t.column(name, phase)
        n = self.n
        if offset >= 0:
            out = col[offset : offset + n]
        else:
            k = min(-offset, n)
            out = np.concatenate([np.zeros(k, dtype=_U64), col[: n - k]])
        self._cols[key] = out
        return out

    def const(self, v):
        return np.full(self.n, v, dtype=_U64)

    def fill(self, v, w):
        return self.const(mask(w) if v else 0)

    def ev(self, e: Expr, phase: str, offset: int, ctx: Optional[int]):
        """phase is 'pre', 'post' or 'cons' (consequent: comparisons split sides)."""
        if isinstance(e, Ident):
            read = "post" if phase in ("post", "cons") else "pre"
            col = self.column(e.name, read, offset)
            w = self.t.width(e.name)
            if e.index is None:
                return col, w
            if isinstance(e.index, int):
                if e.index >= 64:
                    return self.const(0), 1
                return (col >> _U64(e.index)) & _U64(1), 1
            idx = self.column(e.index, read, offset)
            safe = np.minimum(idx, _U64(63))
            return np.where(idx < _U64(64), (col >> safe) & _U64(1), _U64(0)), 1
        if isinstance(e, Literal):
            if e.base == "fill":
                if ctx is None:
                    return e.value, None
                return self.fill(e.value, ctx), ctx
            return self.const(e.value), literal_width(e)
        if isinstance(e, Cast):
            v, w = self.ev(e.inner, phase, offset, e.width)
            if w is None:
                v = self.fill(v, e.width)
            return v & _U64(mask(e.width)), e.width
        if isinstance(e, Unary):
            if e.op in ("!", "|"):
                v, w = self.ev(e.inner, phase, offset, None)
                if w is None:
                    v = self.const(v)
                r = (v == 0) if e.op == "!" else (v != 0)
                return r.astype(_U64), 1
            v, w = self.ev(e.inner, phase, offset, ctx)
            if w is None:
                w = 1
                v = self.const(v)
            if e.op == "~":
                return ~v & _U64(mask(w)), w
            return (_U64(0) - v) & _U64(mask(w)), w
        if isinstance(e, Binary):
            op = e.op
            if phase == "cons" and op in _COMPARE:
                lphase, rphase = "cons", "pre"
            else:
                lphase = rphase = phase
            if op in ("&&", "||"):
                lv, lw = self.ev(e.lhs, lphase, offset, None)
                rv, rw = self.ev(e.rhs, rphase, offset, None)
                lb = (self.const(lv) if lw is None else lv) != 0
                rb = (self.const(rv) if rw is None else rv) != 0
                return ((lb & rb) if op == "&&" else (lb | rb)).astype(_U64), 1
            lv, lw = self.ev(e.lhs, lphase, offset, None)
            rv, rw = self.ev(e.rhs, rphase, offset, None)
            w = join_widths(lw, rw)
            if w is None:
                w = ctx if ctx is not None else 1
            if lw is None:
                lv = self.fill(lv, w)
            if rw is None:
                rv = self.fill(rv, w)
            if op in _COMPARE:
                r = {
                    "==": np.equal, "!=": np.not_equal, "<": np.less,
                    "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal,
                }[op](lv, rv)
                return r.astype(_U64), 1
            m = _U64(mask(w))
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
            tv, tw = self.ev(e.test, phase, offset, None)
            if tw is None:
                tv = self.const(tv)
            av, aw = self.ev(e.then, phase, offset, None)
            bv, bw = self.ev(e.orelse, phase, offset, None)
            w = join_widths(aw, bw) or ctx or 1
            if aw is None:
                av = self.fill(av, w)
            if bw is None:
                bv = self.fill(bv, w)
            return np.where(tv != 0, av, bv), w
        if isinstance(e, Past):
            return self.ev(e.inner, "post", offset - e.depth, ctx)
        if isinstance(e, Stable):
            now, _ = self.ev(e.inner, phase, offset, None)
            old, _ = self.ev(Past(e.inner, 1), phase, offset, None)
            now = self.const(now) if np.isscalar(now) or isinstance(now, int) else now
            old = self.const(old) if np.isscalar(old) or isinstance(old, int) else old
            return (now == old).astype(_U64), 1
        raise TypeError(f"not an expression: {e!r}")

    def truth(self, e, phase, offset) -> np.ndarray:
        v, w = self.ev(e, phase, offset, None)
        if w is None:
            return np.full(self.n, bool(v))
        return v != 0


def _consequent_phase(p: Property) -> str:
    return "cons" if p.is_synchronous else "pre"


def eval_property(p: Property, t: Trace) -> Verdict:
    """Check ``p`` at every attempt cycle of ``t``; vacuous attempts hold."""
    _check_signals(p, t)
    n = max(t.cycles - p.delay, 0)
    if n == 0:
        return Verdict(True, (), 0, 0)
    vec = _Vec(t, n)
    trig = vec.truth(p.antecedent, "pre", 0)
    if p.disable_iff is not None:
        trig &= ~vec.truth(p.disable_iff, "pre", 0)
    cons = vec.truth(p.consequent, _consequent_phase(p), p.delay)
    bad = np.flatnonzero(trig & ~cons)
    return Verdict(len(bad) == 0, tuple(int(i) for i in bad), int(np.count_nonzero(trig)), n)


# ------------------------------------------------------- scalar reference


def _rename(e: Expr, phase: str, offset: int):
    """Rewrite ``e`` so each identifier names a (signal, phase, cycle offset) slot."""
    if isinstance(e, Ident):
        read = "post" if phase in ("post", "cons") else "pre"
        idx = e.index
        if isinstance(idx, str):
            idx = f"{idx}@{read}@{offset}"
        return Ident(f"{e.name}@{read}@{offset}", idx)
    if isinstance(e, Literal):
        return e
    if isinstance(e, Cast):
        return Cast(e.width, _rename(e.inner, phase, offset))
    if isinstance(e, Unary):
        return Unary(e.op, _rename(e.inner, phase, offset))
    if isinstance(e, Binary):
        if phase == "cons" and e.op in _COMPARE:
            return Binary(e.op, _rename(e.lhs, "cons", offset), _rename(e.rhs, "pre", offset))
        return Binary(e.op, _rename(e.lhs, phase, offset), _rename(e.rhs, phase, offset))
    if isinstance(e, Ternary):
        return Ternary(*(_rename(x, phase, offset) for x in (e.test, e.then, e.orelse)))
    if isinstance(e, Past):
        return _rename(e.inner, "post", offset - e.depth)
    if isinstance(e, Stable):
        return Binary("==", _rename(e.inner, phase, offset), _rename(e.inner, "post", offset - 1))
    raise TypeError(f"not an expression: {e!r}")


def eval_property_scalar(p: Property, t: Trace) -> Verdict:
    """Cycle-by-cycle reference built on :func:`vert.hdl.values.eval_expr`."""
    _check_signals(p, t)
    n = max(t.cycles - p.delay, 0)
    ante = _rename(p.antecedent, "pre", 0)
    dis = _rename(p.disable_iff, "pre", 0) if p.disable_iff is not None else None
    cons = _rename(p.consequent, _consequent_phase(p), p.delay)
    needed = set()
    for part in (ante, dis, cons):
        if part is not None:
            needed.update(identifiers(part))
    failures = []
    triggered = 0
    for c in range(n):
        env = {}
        for key in needed:
            name, phase, off = key.split("@")
            cyc = c + int(off)
            w = t.width(name)
            v = int(t.column(name, phase)[cyc]) if cyc >= 0 else 0
            env[key] = BitVec(v, w)
        if not eval_expr(ante, env).value:
            continue
        if dis is not None and eval_expr(dis, env).value:
            continue
        triggered += 1
        if not eval_expr(cons, env).value:
            failures.append(c)
    return Verdict(not failures, tuple(failures), triggered, n)


__all__ = ["Verdict", "eval_property", "eval_property_scalar"]
