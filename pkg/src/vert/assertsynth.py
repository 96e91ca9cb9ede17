"""Oracle assertion synthesis from the conditional structure of an always block.

Each assignment-bearing path through an if/case region yields one property
whose antecedent is the path condition: the arm guard conjoined with the
negation of every earlier guard in the same chain, plus the terms of every
enclosing arm. Paths that assign nothing are skipped unless stability checks
are requested.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from vert.errors import NoClockFound, SpanNotOnPath, UnsupportedStmt
from vert.hdl.ast import (
    TRUE,
    AlwaysBlock,
    Assign,
    Binary,
    Block,
    Case,
    Expr,
    Ident,
    If,
    Literal,
    Past,
    Property,
    Span,
    Unary,
    conjoin,
    disjoin,
    identifiers,
)
from vert.hdl.values import expr_width

NEGATED_OP = {"==": "!=", "!=": "==", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}
RESET_HINTS = ("rst", "reset")
_SUFFIX_ALPHABET = "abcdefghijklmnopqrstuvwxyz"

KIND_ASSIGN = "assign"
KIND_STABILITY = "stability"
KIND_DELAYED = "delayed"


@dataclass(frozen=True)
class PathAssertion:
    kind: str
    path_condition: Expr
    terms: Tuple[Expr, ...]
    assignments: Tuple[Tuple[Ident, Expr], ...]
    source_span: Optional[Span]
    guard_spans: Tuple[Span, ...]
    assign_spans: Tuple[Span, ...]
    region: int
    from_case: bool
    property: Property

    @property
    def lhs_names(self) -> Tuple[str, ...]:
        return tuple(_target_name(lhs) for lhs, _ in self.assignments)


def _target_name(e: Expr) -> str:
    while isinstance(e, Past):
        e = e.inner
    return e.name


def neg(e: Expr, widths: Optional[Mapping[str, int]] = None) -> Expr:
    """Logical negation, pushed through ``!``, 1-bit ``~``, De Morgan and comparisons."""
    widths = widths or {}
    if isinstance(e, Unary):
        if e.op == "!":
            return e.inner
        if e.op == "~" and expr_width(e.inner, widths) == 1:
            return e.inner
    if isinstance(e, Binary):
        if e.op == "&&":
            return Binary("||", neg(e.lhs, widths), neg(e.rhs, widths))
        if e.op == "||":
            return Binary("&&", neg(e.lhs, widths), neg(e.rhs, widths))
        if e.op in NEGATED_OP:
            return Binary(NEGATED_OP[e.op], e.lhs, e.rhs)
    return Unary("!", e)


@dataclass
class _Path:
    terms: List[Expr]
    guard_spans: List[Span]
    assigns: List[Assign]
    span: Optional[Span]
    region: int
    from_case: bool
    # every signal assigned on the way down to this point (for stability)
    along: Tuple[str, ...] = ()


def _flatten(body) -> List:
    out = []
    for s in body:
        if isinstance(s, Block):
            out.extend(_flatten(s.body))
        else:
            out.append(s)
    return out


class _Walker:
    def __init__(self, widths):
        self.widths = widths
        self.assign_paths: List[_Path] = []
        self.leaf_paths: List[_Path] = []

    def body(self, stmts, terms, guards, span, region, from_case, along):
        stmts = _flatten(stmts)
        direct = [s for s in stmts if isinstance(s, Assign)]
        nested = [s for s in stmts if not isinstance(s, Assign)]
        for s in nested:
            if not isinstance(s, (If, Case)):
                raise UnsupportedStmt(f"unsupported statement {type(s).__name__}")
        here = along + tuple(a.lhs.name for a in direct)
        if direct:
            self.assign_paths.append(_Path(list(terms), list(guards), direct, span, region, from_case, here))
        if not nested:
            self.leaf_paths.append(_Path(list(terms), list(guards), direct, span, region, from_case, here))
            return
        for s in nested:
            self.stmt(s, terms, guards, region, from_case, here)

    def stmt(self, s, terms, guards, region, from_case, along):
        if isinstance(s, If):
            prior: List[Expr] = []
            prior_spans: List[Span] = []
            for arm in s.arms:
                cond_span = arm.cond.span or arm.span
                arm_terms = terms + [neg(c, self.widths) for c in prior] + [arm.cond]
                arm_guards = guards + prior_spans + ([cond_span] if cond_span else [])
                self.body(arm.body, arm_terms, arm_guards, arm.span, region, from_case, along)
                prior.append(arm.cond)
                if cond_span:
                    prior_spans.append(cond_span)
            else_terms = terms + [neg(c, self.widths) for c in prior]
            else_guards = guards + prior_spans
            if s.else_body is not None:
                self.body(s.else_body, else_terms, else_guards, s.else_span, region, from_case, along)
            else:
                self.leaf_paths.append(_Path(else_terms, else_guards, [], None, region, from_case, along))
        elif isinstance(s, Case):
            sel = s.selector
            sel_span = [sel.span] if sel.span else []
            all_labels: List[Expr] = []
            for arm in s.arms:
                term = disjoin(Binary("==", sel, lbl) for lbl in arm.labels)
                label_spans = [lbl.span for lbl in arm.labels if lbl.span]
                self.body(arm.body, terms + [term], guards + sel_span + label_spans, arm.span, region, True, along)
                all_labels.extend(arm.labels)
            default_term = conjoin(Binary("!=", sel, lbl) for lbl in all_labels)
            # every label decides whether the default arm runs
            default_guards = guards + sel_span + [lbl.span for lbl in all_labels if lbl.span]
            if s.default_body is not None:
                self.body(s.default_body, terms + [default_term], default_guards, s.default_span, region, True, along)
            else:
                self.leaf_paths.append(_Path(terms + [default_term], default_guards, [], None, region, True, along))
        else:
            raise UnsupportedStmt(f"unsupported statement {type(s).__name__}")


def _last_per_lhs(assigns: Sequence[Assign]) -> List[Assign]:
    last: Dict[str, Assign] = {}
    for a in assigns:
        last.pop(a.lhs.name, None)
        last[a.lhs.name] = a
    return list(last.values())


def _walk_block(body, widths) -> Tuple[List[_Path], List[_Path], Dict[int, Tuple[str, ...]]]:
    """Assignment paths, leaf paths, and the signals assigned per region."""
    w = _Walker(widths)
    stmts = _flatten(body)
    region_signals: Dict[int, Tuple[str, ...]] = {}
    region = 0
    run: List[Assign] = []

    def flush():
        nonlocal region
        if run:
            w.assign_paths.append(_Path([], [], list(run), _cover(run), region, False, ()))
            region_signals[region] = tuple(dict.fromkeys(a.lhs.name for a in run))
            run.clear()
            region += 1

    for s in stmts:
        if isinstance(s, Assign):
            run.append(s)
            continue
        flush()
        if not isinstance(s, (If, Case)):
            raise UnsupportedStmt(f"unsupported statement {type(s).__name__}")
        start = len(w.assign_paths)
        w.stmt(s, [], [], region, False, ())
        names: Dict[str, None] = {}
        for p in w.assign_paths[start:]:
            for a in p.assigns:
                names.setdefault(a.lhs.name, None)
        region_signals[region] = tuple(names)
        region += 1
    flush()
    # a top-level assignment that a later region overrides is not unconditional
    later: Dict[int, set] = {}
    for p in w.assign_paths:
        later.setdefault(p.region, set()).update(a.lhs.name for a in p.assigns)
    for p in w.assign_paths:
        if p.terms:
            continue
        overridden = set()
        for r, names in later.items():
            if r > p.region:
                overridden |= names
        p.assigns = [a for a in p.assigns if a.lhs.name not in overridden]
    w.assign_paths = [p for p in w.assign_paths if p.assigns]
    return w.assign_paths, w.leaf_paths, region_signals


def _cover(stmts) -> Optional[Span]:
    spans = [s.span for s in stmts if s.span]
    if not spans:
        return None
    return (min(a for a, _ in spans), max(b for _, b in spans))


def _is_reset_term(t: Expr, reset_names: Iterable[str]) -> bool:
    names = set(reset_names)
    if isinstance(t, Unary) and t.op in ("!", "~") and isinstance(t.inner, Ident):
        n = t.inner.name
        return n in names or any(h in n.lower() for h in RESET_HINTS)
    if isinstance(t, Binary) and t.op == "==" and isinstance(t.lhs, Ident) and isinstance(t.rhs, Literal):
        n = t.lhs.name
        return t.rhs.value == 0 and (n in names or any(h in n.lower() for h in RESET_HINTS))
    return False


def _suffix(seed: int, index: int, salt: str) -> str:
    h = hashlib.blake2b(f"{seed}:{index}:{salt}".encode(), digest_size=8).digest()
    n = int.from_bytes(h, "big")
    chars = []
    for _ in range(6):
        n, r = divmod(n, 26)
        chars.append(_SUFFIX_ALPHABET[r])
    return "".join(chars)


def _block_parts(block) -> Tuple[Tuple, Optional[Tuple[str, str]], Tuple[str, ...], bool]:
    if isinstance(block, AlwaysBlock):
        if block.kind == "always_ff" and not block.is_sequential:
            raise NoClockFound("always_ff block has no posedge/negedge sensitivity entry")
        clock = block.clock if block.is_sequential else None
        resets = tuple(sig for _, sig in block.resets)
        return block.body, clock, resets, block.is_sequential
    return tuple(block), None, (), False


def leaf_conditions(block: Union[AlwaysBlock, Sequence], widths: Optional[Mapping[str, int]] = None) -> List[Expr]:
    """Conditions of every maximal path through ``block``.

    Each assignment path is a prefix of some maximal path, so these are
    all satisfiable exactly when every oracle antecedent is.
    """
    body = block.body if isinstance(block, AlwaysBlock) else tuple(block)
    _, leaf_paths, _ = _walk_block(body, dict(widths or {}))
    return [conjoin(p.terms) for p in leaf_paths]


def synthesize(
    block: Union[AlwaysBlock, Sequence],
    clock_hint: Optional[Tuple[str, str]] = None,
    *,
    widths: Optional[Mapping[str, int]] = None,
    seed: int = 0,
    stability: bool = False,
    delayed: bool = False,
) -> List[PathAssertion]:
    """Oracle properties for ``block`` (an always block or a bare statement list).

    A bare statement list is treated as asynchronous unless ``clock_hint`` is
    given. ``stability`` adds ``P |-> sig == $past(sig)`` for each signal of a
    region that path ``P`` leaves untouched; ``delayed`` adds a one-cycle
    delayed check for clocked paths whose right-hand sides read no assigned
    signal.
    """
    widths = dict(widths or {})
    body, clock, resets, sequential = _block_parts(block)
    if clock is None and clock_hint is not None:
        clock = clock_hint
    if sequential and clock is None:
        raise NoClockFound("sequential block without a clock")
    assign_paths, leaf_paths, region_signals = _walk_block(body, widths)
    all_assigned = {a.lhs.name for p in assign_paths for a in p.assigns}
    out: List[PathAssertion] = []
    used_names = set()
    sync = clock is not None

    def make(kind, path: _Path, consequent, assignments, delay=0):
        index = len(out)
        if any(_is_reset_term(t, resets) for t in path.terms):
            role = "Reset"
        elif any("err" in _target_name(lhs).lower() for lhs, _ in assignments):
            role = "Err"
        elif path.from_case:
            role = "Case"
        else:
            role = "Cond"
        prefix = ("Sync" if sync else "Async") + role
        salt = kind
        name = prefix + _suffix(seed, index, salt)
        while name in used_names:
            salt += "'"
            name = prefix + _suffix(seed, index, salt)
        used_names.add(name)
        cond = conjoin(path.terms)
        prop = Property(name, clock, cond, consequent, delay)
        out.append(
            PathAssertion(
                kind=kind,
                path_condition=cond,
                terms=tuple(path.terms),
                assignments=tuple(assignments),
                source_span=path.span,
                guard_spans=tuple(path.guard_spans),
                assign_spans=tuple(a.span for a in path.assigns if a.span),
                region=path.region,
                from_case=path.from_case,
                property=prop,
            )
        )

    for path in assign_paths:
        assigns = _last_per_lhs(path.assigns)
        pairs = [(a.lhs, a.rhs) for a in assigns]
        make(KIND_ASSIGN, path, conjoin(Binary("==", lhs, rhs) for lhs, rhs in pairs), pairs)

    if stability:
        for path in leaf_paths:
            signals = region_signals.get(path.region, ())
            missing = [s for s in signals if s not in path.along]
            if not missing or not path.terms:
                continue
            pairs = [(Ident(s), Past(Ident(s))) for s in missing]
            make(KIND_STABILITY, path, conjoin(Binary("==", lhs, rhs) for lhs, rhs in pairs), pairs)

    if delayed and sync:
        for path in assign_paths:
            assigns = _last_per_lhs(path.assigns)
            keep = [a for a in assigns if not (set(identifiers(a.rhs)) & all_assigned)]
            if not keep:
                continue
            pairs = []
            for a in keep:
                rhs = a.rhs if not identifiers(a.rhs) else Past(a.rhs)
                pairs.append((Past(a.lhs), rhs))
            make(KIND_DELAYED, path, conjoin(Binary("==", lhs, rhs) for lhs, rhs in pairs), pairs, delay=1)
    return out


def properties(assertions: Iterable[PathAssertion]) -> List[Property]:
    return [a.property for a in assertions]


def oracle_antecedent(
    block: Union[AlwaysBlock, Sequence],
    span: Span,
    widths: Optional[Mapping[str, int]] = None,
) -> Expr:
    """Full path condition of the assignment-bearing path containing ``span``."""
    body, _, _, _ = _block_parts(block)
    assign_paths, _, _ = _walk_block(body, dict(widths or {}))
    lo, hi = span
    best = None
    for path in assign_paths:
        candidates = [a.span for a in path.assigns if a.span]
        if path.span:
            candidates.append(path.span)
        for a, b in candidates:
            if a <= lo and hi <= b:
                size = b - a
                if best is None or size < best[0]:
                    best = (size, path)
    if best is None:
        raise SpanNotOnPath(f"span {span} is not inside any assignment-bearing path")
    path = best[1]
    return conjoin(path.terms) if path.terms else TRUE


__all__ = [
    "KIND_ASSIGN",
    "KIND_DELAYED",
    "KIND_STABILITY",
    "PathAssertion",
    "leaf_conditions",
    "neg",
    "oracle_antecedent",
    "properties",
    "synthesize",
]
