"""Truth-table equivalence over the boolean structure of guard expressions.

An expression is abstracted to a propositional formula whose leaves are
*atoms*: ``x != 0`` for a non-boolean operand, ``a == b`` for an equality
between non-constant operands or against a non-zero constant, and ``a < b``
for relational tests. Atoms that compare the same operand against different
constants are constrained to be mutually exclusive, and ``x == c`` with
``c != 0`` implies ``x != 0``. The abstraction is sound for "equivalent" (a
True answer is never wrong) and conservative otherwise.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Tuple

from vert.errors import AtomBudgetExceeded
from vert.hdl.ast import Binary, Expr, Literal, Unary
from vert.hdl.values import expr_width, mask

MAX_ATOMS = 20

_BOOLEAN_OPS = ("&&", "||", "==", "!=", "<", "<=", ">", ">=")


class _Atoms:
    def __init__(self, widths: Mapping[str, int]):
        self.widths = widths
        self.index: Dict[tuple, int] = {}
        self.keys: List[tuple] = []

    def atom(self, key) -> tuple:
        if key not in self.index:
            self.index[key] = len(self.keys)
            self.keys.append(key)
        return ("atom", self.index[key])

    def width(self, e) -> int:
        w = expr_width(e, self.widths)
        return 1 if w is None else w


def _is_boolean(e, atoms: _Atoms) -> bool:
    if isinstance(e, Binary) and e.op in _BOOLEAN_OPS:
        return True
    if isinstance(e, Unary) and e.op in ("!", "|"):
        return True
    return atoms.width(e) == 1


def _not(f):
    if f[0] == "const":
        return ("const", not f[1])
    if f[0] == "not":
        return f[1]
    return ("not", f)


def _formula(e: Expr, atoms: _Atoms):
    if isinstance(e, Literal):
        return ("const", e.value != 0)
    if isinstance(e, Unary):
        if e.op == "!":
            return _not(_formula(e.inner, atoms))
        if e.op == "|":
            return _formula(e.inner, atoms)
        if e.op == "~" and _is_boolean(e.inner, atoms):
            return _not(_formula(e.inner, atoms))
        return atoms.atom(("truth", e))
    if isinstance(e, Binary):
        if e.op in ("&&", "||"):
            tag = "and" if e.op == "&&" else "or"
            return (tag, _formula(e.lhs, atoms), _formula(e.rhs, atoms))
        if e.op in ("==", "!="):
            f = _equality(e.lhs, e.rhs, atoms)
            return f if e.op == "==" else _not(f)
        if e.op in ("<", "<=", ">", ">="):
            return _relational(e.op, e.lhs, e.rhs, atoms)
        if e.op in ("&", "|", "^") and _is_boolean(e.lhs, atoms) and _is_boolean(e.rhs, atoms):
            tag = {"&": "and", "|": "or", "^": "xor"}[e.op]
            return (tag, _formula(e.lhs, atoms), _formula(e.rhs, atoms))
        return atoms.atom(("truth", e))
    return atoms.atom(("truth", e))


def _const_value(e: Expr, other: Expr, atoms: _Atoms) -> Optional[int]:
    if not isinstance(e, Literal):
        return None
    if e.base == "fill":
        return mask(atoms.width(other)) if e.value else 0
    return e.value


def _equality(a: Expr, b: Expr, atoms: _Atoms):
    ca, cb = _const_value(a, b, atoms), _const_value(b, a, atoms)
    if ca is not None and cb is not None:
        return ("const", ca == cb)
    if ca is not None:
        a, b, ca, cb = b, a, cb, ca
    if cb is not None:
        if cb == 0:
            return _not(_formula(a, atoms))
        if _is_boolean(a, atoms):
            return _formula(a, atoms) if cb == 1 else ("const", False)
        if cb >> atoms.width(a):
            return ("const", False)
        return atoms.atom(("eq", a, ("lit", cb)))
    if a == b:
        return ("const", True)
    if _is_boolean(a, atoms) and _is_boolean(b, atoms):
        return _not(("xor", _formula(a, atoms), _formula(b, atoms)))
    x, y = sorted((a, b), key=repr)
    return atoms.atom(("eq", x, y))


def _relational(op, a, b, atoms):
    # every relational test is an ordering atom lt(x, y) or its negation
    if op == "<":
        return atoms.atom(("lt", _rel_key(a), _rel_key(b)))
    if op == ">=":
        return _not(atoms.atom(("lt", _rel_key(a), _rel_key(b))))
    if op == ">":
        return atoms.atom(("lt", _rel_key(b), _rel_key(a)))
    return _not(atoms.atom(("lt", _rel_key(b), _rel_key(a))))


def _rel_key(e):
    if isinstance(e, Literal) and e.base != "fill":
        return ("lit", e.value)
    return e


# ------------------------------------------------------------- evaluation
#
# A truth table over k atoms is held column-wise: column i is a Python int
# whose bit r is bit i of the row number r, so every connective is a single
# big-integer operation over all 2**k rows at once.


@lru_cache(maxsize=None)
def _column(i: int, k: int) -> int:
    n = 1 << k
    half = 1 << i
    block = ((1 << half) - 1) << half
    period = half << 1
    return block * (((1 << n) - 1) // ((1 << period) - 1))


def _evaluate(f, k: int, full: int) -> int:
    tag = f[0]
    if tag == "atom":
        return _column(f[1], k)
    if tag == "const":
        return full if f[1] else 0
    if tag == "not":
        return full ^ _evaluate(f[1], k, full)
    a = _evaluate(f[1], k, full)
    b = _evaluate(f[2], k, full)
    if tag == "and":
        return a & b
    if tag == "or":
        return a | b
    return a ^ b


def _constraints(atoms: _Atoms, k: int, full: int) -> int:
    valid = full
    by_operand: Dict[object, List[int]] = {}
    truth_of: Dict[object, int] = {}
    for i, key in enumerate(atoms.keys):
        if key[0] == "eq" and isinstance(key[2], tuple) and key[2][0] == "lit":
            by_operand.setdefault(key[1], []).append(i)
        elif key[0] == "truth":
            truth_of[key[1]] = i
    for operand, items in by_operand.items():
        for i, j in combinations(items, 2):
            valid &= full ^ (_column(i, k) & _column(j, k))
        t = truth_of.get(operand)
        if t is not None:
            for i in items:
                valid &= (full ^ _column(i, k)) | _column(t, k)
    return valid


class Checker:
    """Shared atom space for a batch of formulas."""

    def __init__(self, widths: Optional[Mapping[str, int]] = None, max_atoms: int = MAX_ATOMS):
        self.atoms = _Atoms(dict(widths or {}))
        self.max_atoms = max_atoms

    def formula(self, e: Expr):
        return _formula(e, self.atoms)

    def _columns(self, formulas):
        k = len(self.atoms.keys)
        if k > self.max_atoms:
            raise AtomBudgetExceeded(f"{k} atoms exceed the budget of {self.max_atoms}")
        full = (1 << (1 << k)) - 1
        valid = _constraints(self.atoms, k, full)
        return [_evaluate(f, k, full) for f in formulas], valid, full

    def equivalent(self, a: Expr, b: Expr) -> bool:
        (fa, fb), valid, _ = self._columns([self.formula(a), self.formula(b)])
        return (fa ^ fb) & valid == 0

    def implies(self, a: Expr, b: Expr) -> bool:
        (fa, fb), valid, full = self._columns([self.formula(a), self.formula(b)])
        return fa & (full ^ fb) & valid == 0

    def satisfiable(self, a: Expr) -> bool:
        (fa,), valid, _ = self._columns([self.formula(a)])
        return fa & valid != 0

    def disjoint(self, a: Expr, b: Expr) -> bool:
        (fa, fb), valid, _ = self._columns([self.formula(a), self.formula(b)])
        return fa & fb & valid == 0

    def witnesses(self, a: Expr, limit: int = 1) -> List[Dict[tuple, bool]]:
        """Up to ``limit`` consistent atom assignments (atom key -> truth) satisfying ``a``."""
        (fa,), valid, _ = self._columns([self.formula(a)])
        rows = fa & valid
        out = []
        while rows and len(out) < limit:
            low = rows & -rows
            r = low.bit_length() - 1
            rows ^= low
            out.append({key: bool((r >> i) & 1) for i, key in enumerate(self.atoms.keys)})
        return out

    def witness(self, a: Expr) -> Optional[Dict[tuple, bool]]:
        found = self.witnesses(a, 1)
        return found[0] if found else None


def atoms_of(e: Expr, widths: Optional[Mapping[str, int]] = None) -> Tuple[tuple, ...]:
    """The atom keys of ``e`` in first-occurrence order."""
    c = Checker(widths)
    c.formula(e)
    return tuple(c.atoms.keys)


def equivalent(a: Expr, b: Expr, widths=None) -> bool:
    return Checker(widths).equivalent(a, b)


def implies(a: Expr, b: Expr, widths=None) -> bool:
    return Checker(widths).implies(a, b)


def satisfiable(a: Expr, widths=None) -> bool:
    return Checker(widths).satisfiable(a)


def disjoint(a: Expr, b: Expr, widths=None) -> bool:
    return Checker(widths).disjoint(a, b)


__all__ = [
    "Checker",
    "MAX_ATOMS",
    "atoms_of",
    "disjoint",
    "equivalent",
    "implies",
    "satisfiable",
]
