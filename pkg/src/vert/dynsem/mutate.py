"""Single-site AST mutation operators for mutation-based assertion grading."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from vert.errors import ParseFailure
from vert.hdl.ast import (
    Assign,
    Binary,
    Block,
    Case,
    Cast,
    If,
    Literal,
    Past,
    RtlModule,
    Span,
    Stable,
    Ternary,
    Unary,
)
from vert.hdl.parser import parse_module
from vert.hdl.printer import pretty_print_module
from vert.hdl.values import literal_width

OPERATORS = (
    "NegateCond",
    "RelOpSwap",
    "LogicOpSwap",
    "ConstPerturb",
    "BranchAssignSwap",
    "StuckTrue",
    "StuckFalse",
)

REL_SWAP = {"==": "!=", "!=": "==", "<": ">=", ">=": "<", ">": "<=", "<=": ">"}
LOGIC_SWAP = {"&&": "||", "||": "&&"}

Path = Tuple[Tuple[str, Optional[int]], ...]


@dataclass(frozen=True)
class Mutant:
    operator: str
    site: Span
    module: RtlModule
    description: str = ""


# ------------------------------------------------------------ addressing


def _get(node, path: Path):
    for attr, idx in path:
        node = getattr(node, attr)
        if idx is not None:
            node = node[idx]
    return node


def _set(node, path: Path, new):
    if not path:
        return new
    (attr, idx), rest = path[0], path[1:]
    child = getattr(node, attr)
    if idx is None:
        return dataclasses.replace(node, **{attr: _set(child, rest, new)})
    items = list(child)
    items[idx] = _set(items[idx], rest, new)
    return dataclasses.replace(node, **{attr: tuple(items)})


_EXPR_CHILDREN = {
    Cast: ("inner",),
    Unary: ("inner",),
    Binary: ("lhs", "rhs"),
    Ternary: ("test", "then", "orelse"),
    Past: ("inner",),
    Stable: ("inner",),
}


def _walk_expr(e, path: Path) -> Iterator[Tuple[object, Path]]:
    yield e, path
    for attr in _EXPR_CHILDREN.get(type(e), ()):
        yield from _walk_expr(getattr(e, attr), path + ((attr, None),))


# ------------------------------------------------------------ enumeration


class _Sites:
    def __init__(self, module: RtlModule, ops):
        self.module = module
        self.ops = ops
        self.found: List[Tuple[int, str, int, Mutant]] = []

    def add(self, op: str, site: Optional[Span], path: Path, new, description: str):
        if op not in self.ops or site is None:
            return
        mutated = _set(self.module, path, new)
        self.found.append((site[0], op, len(self.found), Mutant(op, site, mutated, description)))

    def add_module(self, op, site, mutated, description):
        if op not in self.ops or site is None:
            return
        self.found.append((site[0], op, len(self.found), Mutant(op, site, mutated, description)))

    def run(self):
        for bi, block in enumerate(self.module.always_blocks):
            self.body(block.body, (("always_blocks", bi),), "body")
        self.found.sort(key=lambda x: (x[0], x[1], x[2]))
        return [m for *_, m in self.found]

    def body(self, stmts, owner: Path, attr: str):
        for i, s in enumerate(stmts):
            self.stmt(s, owner + ((attr, i),))

    def stmt(self, s, path: Path):
        if isinstance(s, Assign):
            self.expr(s.rhs, path + (("rhs", None),))
        elif isinstance(s, Block):
            self.body(s.body, path, "body")
        elif isinstance(s, If):
            for k, arm in enumerate(s.arms):
                cpath = path + (("arms", k), ("cond", None))
                site = arm.cond.span
                self.add("NegateCond", site, cpath, Unary("!", arm.cond), "negate guard")
                self.add("StuckTrue", site, cpath, Literal(1, "bin", 1), "guard stuck at 1")
                self.add("StuckFalse", site, cpath, Literal(1, "bin", 0), "guard stuck at 0")
                self.expr(arm.cond, cpath)
                self.body(arm.body, path + (("arms", k),), "body")
            if s.else_body is not None:
                self.body(s.else_body, path, "else_body")
            bodies = [(path + (("arms", k),), "body", arm.body) for k, arm in enumerate(s.arms)]
            if s.else_body is not None:
                bodies.append((path, "else_body", s.else_body))
            self.branch_swaps(bodies)
        elif isinstance(s, Case):
            self.expr(s.selector, path + (("selector", None),))
            values = [lbl.value for arm in s.arms for lbl in arm.labels if isinstance(lbl, Literal)]
            for k, arm in enumerate(s.arms):
                for j, lbl in enumerate(arm.labels):
                    lpath = path + (("arms", k), ("labels", j))
                    if isinstance(lbl, Literal):
                        flipped = _perturb_label(lbl, values)
                        if flipped is None:
                            continue  # every single-bit flip duplicates a label
                        self.add("ConstPerturb", lbl.span, lpath, flipped, "flip lowest free bit of case label")
                    else:
                        self.expr(lbl, lpath)
                self.body(arm.body, path + (("arms", k),), "body")
            if s.default_body is not None:
                self.body(s.default_body, path, "default_body")
            bodies = [(path + (("arms", k),), "body", arm.body) for k, arm in enumerate(s.arms)]
            if s.default_body is not None:
                bodies.append((path, "default_body", s.default_body))
            self.branch_swaps(bodies)

    def expr(self, e, path: Path):
        for node, p in _walk_expr(e, path):
            if isinstance(node, Binary):
                if node.op in REL_SWAP:
                    self.add("RelOpSwap", node.span, p, dataclasses.replace(node, op=REL_SWAP[node.op]), f"{node.op} -> {REL_SWAP[node.op]}")
                elif node.op in LOGIC_SWAP:
                    self.add("LogicOpSwap", node.span, p, dataclasses.replace(node, op=LOGIC_SWAP[node.op]), f"{node.op} -> {LOGIC_SWAP[node.op]}")
            elif isinstance(node, Literal):
                self.add("ConstPerturb", node.span, p, _perturb(node), "flip low bit of constant")

    def branch_swaps(self, bodies):
        """Swap right-hand sides between consecutive arms that assign the same signal."""
        if "BranchAssignSwap" not in self.ops:
            return
        by_lhs = {}
        for owner, attr, body in bodies:
            seen = set()
            for i, s in enumerate(body):
                if isinstance(s, Assign) and s.lhs.name not in seen:
                    seen.add(s.lhs.name)
                    by_lhs.setdefault(s.lhs.name, []).append((owner + ((attr, i),), s))
        for name, sites in by_lhs.items():
            for (pa, a), (pb, b) in zip(sites, sites[1:]):
                if a.rhs == b.rhs or a.span is None or b.span is None:
                    continue
                mutated = _set(self.module, pa + (("rhs", None),), b.rhs)
                mutated = _set(mutated, pb + (("rhs", None),), a.rhs)
                site = (min(a.span[0], b.span[0]), max(a.span[1], b.span[1]))
                self.add_module("BranchAssignSwap", site, mutated, f"swap right-hand sides of {name}")


def _perturb(lit: Literal) -> Literal:
    if lit.base == "fill":
        return dataclasses.replace(lit, value=1 - lit.value)
    return dataclasses.replace(lit, value=lit.value ^ 1)


def _perturb_label(lbl: Literal, taken) -> Optional[Literal]:
    """Flip the lowest bit whose result is not already a label, so arms stay distinct."""
    if lbl.base == "fill":
        flipped = _perturb(lbl)
        return None if flipped.value in taken else flipped
    for bit in range(literal_width(lbl)):
        value = lbl.value ^ (1 << bit)
        if value not in taken:
            return dataclasses.replace(lbl, value=value)
    return None


def has_spans(m: RtlModule) -> bool:
    return all(b.span is not None for b in m.always_blocks)


def with_spans(m: RtlModule) -> RtlModule:
    """``m`` itself when it was parsed from text, else the parse of its canonical printing."""
    if has_spans(m):
        return m
    parsed, diags = parse_module(pretty_print_module(m))
    if parsed is None:
        raise ParseFailure("canonical printing of the module failed to parse", diags)
    return parsed


def mutate(m: RtlModule, ops: Optional[Iterable[str]] = None, seed: int = 0) -> List[Mutant]:
    """Every applicable single-site mutant, ordered by (site offset, operator name).

    Sites are byte ranges in the text ``m`` was parsed from; a module built in
    memory is first printed and re-parsed so that sites exist. ``seed`` is
    accepted for interface symmetry; enumeration is exhaustive and needs no
    randomness.
    """
    ops = set(OPERATORS if ops is None else ops)
    unknown = ops - set(OPERATORS)
    if unknown:
        raise ValueError(f"unknown mutation operators: {sorted(unknown)}")
    return _Sites(with_spans(m), ops).run()


def parse_ops(text: Optional[str]) -> Tuple[str, ...]:
    """Comma-separated operator names; empty or None means all operators."""
    if not text:
        return OPERATORS
    names = tuple(x.strip() for x in text.split(",") if x.strip())
    unknown = [n for n in names if n not in OPERATORS]
    if unknown:
        raise ValueError(f"unknown mutation operators: {unknown}")
    return names


__all__ = ["Mutant", "OPERATORS", "has_spans", "mutate", "parse_ops", "with_spans"]
