"""Abstract syntax for the supported RTL subset and single-implication SVA properties.

All nodes are frozen dataclasses. Source spans are carried for diagnostics and
mutation sites but never take part in equality, so a parsed tree compares equal
to a hand-built one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

Span = Tuple[int, int]

UNARY_OPS = ("!", "~", "|", "-")
LOGICAL_OPS = ("&&", "||")
EQUALITY_OPS = ("==", "!=")
RELATIONAL_OPS = ("<", "<=", ">", ">=")
ARITH_OPS = ("+", "-")
BITWISE_OPS = ("&", "|", "^")
BINARY_OPS = LOGICAL_OPS + EQUALITY_OPS + RELATIONAL_OPS + ARITH_OPS + BITWISE_OPS
COMPARISON_OPS = EQUALITY_OPS + RELATIONAL_OPS

LITERAL_BASES = ("bin", "hex", "dec", "fill")
ALWAYS_KINDS = ("always", "always_ff", "always_comb")
EDGES = ("posedge", "negedge", "level")
DIRECTIONS = ("input", "output", "internal")


def _span():
    return field(default=None, compare=False, repr=False)


# --------------------------------------------------------------------- Expr


@dataclass(frozen=True)
class Ident:
    name: str
    index: Union[int, str, None] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Literal:
    width: Optional[int]
    base: str
    value: int
    span: Optional[Span] = _span()

    def __post_init__(self):
        if self.base not in LITERAL_BASES:
            raise ValueError(f"unknown literal base {self.base!r}")
        if self.value < 0:
            raise ValueError("literal values are unsigned")
        if self.base == "fill":
            if self.width is not None or self.value not in (0, 1):
                raise ValueError("fill literals are '0 or '1 and unsized")
        elif self.width is not None:
            if self.width < 1:
                raise ValueError("literal width must be positive")
            if self.value >> self.width:
                raise ValueError(f"value {self.value} does not fit in {self.width} bits")


@dataclass(frozen=True)
class Cast:
    width: int
    inner: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Unary:
    op: str
    inner: "Expr"
    span: Optional[Span] = _span()

    def __post_init__(self):
        if self.op not in UNARY_OPS:
            raise ValueError(f"unknown unary operator {self.op!r}")


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    span: Optional[Span] = _span()

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown binary operator {self.op!r}")


@dataclass(frozen=True)
class Ternary:
    test: "Expr"
    then: "Expr"
    orelse: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Past:
    inner: "Expr"
    depth: int = 1
    span: Optional[Span] = _span()

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("$past depth must be >= 1")


@dataclass(frozen=True)
class Stable:
    inner: "Expr"
    span: Optional[Span] = _span()


Expr = Union[Ident, Literal, Cast, Unary, Binary, Ternary, Past, Stable]

TRUE = Literal(1, "bin", 1)
FALSE = Literal(1, "bin", 0)


def children(e: Expr) -> Tuple[Expr, ...]:
    if isinstance(e, (Cast, Unary, Past, Stable)):
        return (e.inner,)
    if isinstance(e, Binary):
        return (e.lhs, e.rhs)
    if isinstance(e, Ternary):
        return (e.test, e.then, e.orelse)
    return ()


def walk(e: Expr):
    """Pre-order traversal of an expression tree."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def _has_ternary(e: Expr) -> bool:
    t = type(e)
    if t is Ident or t is Literal:
        return False
    if t is Ternary:
        return True
    if t is Binary:
        return _has_ternary(e.lhs) or _has_ternary(e.rhs)
    return any(_has_ternary(c) for c in children(e))


def identifiers(e: Expr) -> Tuple[str, ...]:
    """Signal names read by ``e`` in first-occurrence order (index names included)."""
    seen: dict = {}
    for node in walk(e):
        if isinstance(node, Ident):
            seen.setdefault(node.name, None)
            if isinstance(node.index, str):
                seen.setdefault(node.index, None)
    return tuple(seen)


def conjoin(terms) -> Expr:
    """Left-associated ``&&`` chain; the empty conjunction is ``1'b1``."""
    terms = list(terms)
    if not terms:
        return TRUE
    acc = terms[0]
    for t in terms[1:]:
        acc = Binary("&&", acc, t)
    return acc


def disjoin(terms) -> Expr:
    terms = list(terms)
    if not terms:
        return FALSE
    acc = terms[0]
    for t in terms[1:]:
        acc = Binary("||", acc, t)
    return acc


# --------------------------------------------------------------------- Stmt


@dataclass(frozen=True)
class Assign:
    lhs: Ident
    rhs: Expr
    nonblocking: bool
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class IfArm:
    cond: Expr
    body: Tuple["Stmt", ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class If:
    arms: Tuple[IfArm, ...]
    else_body: Optional[Tuple["Stmt", ...]] = None
    span: Optional[Span] = _span()
    else_span: Optional[Span] = _span()

    def __post_init__(self):
        if not self.arms:
            raise ValueError("if statement needs at least one arm")


@dataclass(frozen=True)
class CaseArm:
    labels: Tuple[Expr, ...]
    body: Tuple["Stmt", ...]
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Case:
    selector: Expr
    arms: Tuple[CaseArm, ...]
    default_body: Optional[Tuple["Stmt", ...]] = None
    span: Optional[Span] = _span()
    default_span: Optional[Span] = _span()

    def __post_init__(self):
        if not self.arms:
            raise ValueError("case statement needs at least one arm")
        seen = set()
        for arm in self.arms:
            for label in arm.labels:
                key = label.value if isinstance(label, Literal) else label
                if key in seen:
                    raise ValueError(f"duplicate case label {label!r}")
                seen.add(key)


@dataclass(frozen=True)
class Block:
    body: Tuple["Stmt", ...]
    span: Optional[Span] = _span()


Stmt = Union[Assign, If, Case, Block]


def iter_stmts(body):
    """Every statement in ``body``, recursively, in source order."""
    for s in body:
        yield s
        if isinstance(s, If):
            for arm in s.arms:
                yield from iter_stmts(arm.body)
            if s.else_body is not None:
                yield from iter_stmts(s.else_body)
        elif isinstance(s, Case):
            for arm in s.arms:
                yield from iter_stmts(arm.body)
            if s.default_body is not None:
                yield from iter_stmts(s.default_body)
        elif isinstance(s, Block):
            yield from iter_stmts(s.body)


def assigned_names(body) -> Tuple[str, ...]:
    seen: dict = {}
    for s in iter_stmts(body):
        if isinstance(s, Assign):
            seen.setdefault(s.lhs.name, None)
    return tuple(seen)


# ------------------------------------------------------------------- Module


@dataclass(frozen=True)
class AlwaysBlock:
    kind: str
    sensitivity: Tuple[Tuple[str, str], ...]
    body: Tuple[Stmt, ...]
    span: Optional[Span] = _span()

    def __post_init__(self):
        if self.kind not in ALWAYS_KINDS:
            raise ValueError(f"unknown always kind {self.kind!r}")
        for edge, _ in self.sensitivity:
            if edge not in EDGES:
                raise ValueError(f"unknown edge {edge!r}")
        if self.kind == "always_comb" and self.sensitivity:
            raise ValueError("always_comb takes no sensitivity list")

    @property
    def is_sequential(self) -> bool:
        return any(edge != "level" for edge, _ in self.sensitivity)

    @property
    def clock(self) -> Optional[Tuple[str, str]]:
        """The clocking event: first posedge entry, else first negedge entry."""
        for want in ("posedge", "negedge"):
            for edge, sig in self.sensitivity:
                if edge == want:
                    return (edge, sig)
        return None

    @property
    def resets(self) -> Tuple[Tuple[str, str], ...]:
        """Edge-triggered sensitivity entries other than the clock."""
        clk = self.clock
        return tuple(e for e in self.sensitivity if e[0] != "level" and e != clk)


@dataclass(frozen=True)
class Decl:
    name: str
    width: int = 1
    direction: str = "internal"

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.width < 1:
            raise ValueError("declared width must be positive")


@dataclass(frozen=True)
class Param:
    name: str
    value: Literal


@dataclass(frozen=True)
class Instance:
    """A module instantiation kept as raw text; never elaborated."""

    text: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class IfdefRegion:
    macro: str
    then_span: Span
    else_span: Optional[Span] = None


@dataclass(frozen=True)
class RtlModule:
    name: str
    decls: Tuple[Decl, ...] = ()
    always_blocks: Tuple[AlwaysBlock, ...] = ()
    instances: Tuple[Instance, ...] = ()
    params: Tuple[Param, ...] = ()
    ifdef_regions: Tuple[IfdefRegion, ...] = field(default=(), compare=False)
    # byte offsets just after statements that sit inside begin/end lists
    stmt_slots: Tuple[int, ...] = field(default=(), compare=False, repr=False)
    item_slots: Tuple[int, ...] = field(default=(), compare=False, repr=False)

    def widths(self) -> dict:
        w = {d.name: d.width for d in self.decls}
        for p in self.params:
            w[p.name] = p.value.width or 32
        return w

    def decl(self, name: str) -> Optional[Decl]:
        for d in self.decls:
            if d.name == name:
                return d
        return None

    @property
    def inputs(self) -> Tuple[Decl, ...]:
        return tuple(d for d in self.decls if d.direction == "input")


# ----------------------------------------------------------------- Property


@dataclass(frozen=True)
class Property:
    name: str
    clocking: Optional[Tuple[str, str]]
    antecedent: Expr
    consequent: Expr
    delay: int = 0
    disable_iff: Optional[Expr] = None
    span: Optional[Span] = _span()

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError("delay must be >= 0")
        for part in (self.antecedent, self.consequent, self.disable_iff):
            if part is not None and _has_ternary(part):
                raise ValueError("ternary expressions are not allowed in properties")

    @property
    def is_synchronous(self) -> bool:
        return self.clocking is not None
