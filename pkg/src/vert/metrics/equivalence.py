"""Antecedent equivalence used by functional grading and path coverage.

A pair is first evaluated on a batch of random concrete environments; a
differing environment refutes equivalence outright. Only pairs that survive
go to the truth-table checker, which bounds the cost of comparing a property
against many unrelated paths.
"""
from __future__ import annotations

from typing import Dict, List, Mapping, Tuple

import numpy as np

from vert.boolcheck import Checker, atoms_of
from vert.dynsem.props import _Vec
from vert.dynsem.simulate import Trace
from vert.hdl.ast import Binary, Expr, Ident, Literal, identifiers, walk
from vert.hdl.values import mask

SAMPLES = 64


class Equivalence:
    def __init__(self, widths: Mapping[str, int], max_atoms: int = 20, samples: int = SAMPLES, seed: int = 0):
        self.widths = dict(widths)
        self.max_atoms = max_atoms
        self.samples = samples
        self.seed = seed
        self._atoms: Dict[Expr, frozenset] = {}
        self._eq: Dict[Tuple[Expr, Expr], bool] = {}

    def atoms(self, e: Expr) -> frozenset:
        hit = self._atoms.get(e)
        if hit is None:
            hit = frozenset(atoms_of(e, self.widths))
            self._atoms[e] = hit
        return hit

    def _sample(self, exprs) -> Tuple[List[np.ndarray], ...]:
        names = sorted({n for e in exprs for n in identifiers(e)})
        lits: Dict[str, set] = {n: set() for n in names}
        for e in exprs:
            for node in walk(e):
                if isinstance(node, Binary):
                    for a, b in ((node.lhs, node.rhs), (node.rhs, node.lhs)):
                        if isinstance(a, Ident) and a.index is None and isinstance(b, Literal) and b.base != "fill":
                            lits[a.name].update((b.value, b.value + 1, b.value - 1, b.value ^ 1))
        rng = np.random.default_rng(self.seed)
        k = self.samples
        widths = tuple(self.widths.get(n, 1) for n in names)
        cols = np.zeros((k, len(names)), dtype=np.uint64)
        for j, n in enumerate(names):
            m = mask(widths[j])
            pool = sorted({v & m for v in lits[n]} | {0, 1 & m, m})
            picks = rng.choice(np.array(pool, dtype=np.uint64), size=k)
            uni = rng.integers(0, m, size=k, endpoint=True, dtype=np.uint64)
            cols[:, j] = np.where(rng.random(k) < 0.6, picks, uni)
        return Trace(tuple(names), widths, cols, cols.copy())

    def _truth(self, exprs):
        t = self._sample(exprs)
        vec = _Vec(t, self.samples)
        return [vec.truth(e, "pre", 0) for e in exprs]

    def equivalent(self, a: Expr, b: Expr) -> bool:
        """Raises AtomBudgetExceeded when the pair survives sampling but has too many atoms."""
        if a == b:
            return True
        key = (a, b)
        if key in self._eq:
            return self._eq[key]
        ta, tb = self._truth([a, b])
        if np.any(ta != tb):
            result = False
        else:
            result = Checker(self.widths, self.max_atoms).equivalent(a, b)
        self._eq[key] = result
        return result

    def implies(self, a: Expr, b: Expr) -> bool:
        if a == b:
            return True
        ta, tb = self._truth([a, b])
        if np.any(ta & ~tb):
            return False
        return Checker(self.widths, self.max_atoms).implies(a, b)


__all__ = ["Equivalence"]
