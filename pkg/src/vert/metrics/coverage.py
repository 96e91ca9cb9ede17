"""Complete Path Coverage: assignment-bearing paths matched by an accepted property."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from vert.assertsynth import KIND_ASSIGN, PathAssertion, synthesize
from vert.hdl.ast import Property, RtlModule
from vert.hdl.printer import format_expr
from vert.metrics.equivalence import Equivalence


@dataclass(frozen=True)
class PathCoverage:
    block: int
    condition: str
    covered_by: Optional[str]


@dataclass(frozen=True)
class CoverageReport:
    total: int
    covered: int
    paths: Tuple[PathCoverage, ...] = ()

    @property
    def no_paths(self) -> bool:
        return self.total == 0

    @property
    def cpc_pct(self) -> Fraction:
        if self.total == 0:
            return Fraction(100)
        return Fraction(100 * self.covered, self.total)

    def to_dict(self) -> dict:
        return {
            "total_paths": self.total,
            "covered_paths": self.covered,
            "cpc_pct": float(self.cpc_pct),
            "no_paths": self.no_paths,
            "paths": [
                {"block": p.block, "condition": p.condition, "covered_by": p.covered_by}
                for p in self.paths
            ],
        }


def assignment_paths(m: RtlModule) -> List[Tuple[int, PathAssertion]]:
    """(block index, oracle assertion) for every assignment-bearing path of ``m``."""
    widths = m.widths()
    out = []
    for bi, block in enumerate(m.always_blocks):
        for pa in synthesize(block, widths=widths):
            if pa.kind == KIND_ASSIGN:
                out.append((bi, pa))
    return out


def _first_match(pa: PathAssertion, props: Sequence[Property], eq: Equivalence) -> Optional[Property]:
    target = pa.path_condition
    atoms = eq.atoms(target)
    # exact matches first, then by shared atoms, so the usual case costs one comparison
    order = sorted(
        range(len(props)),
        key=lambda i: (props[i].antecedent != target, -len(atoms & eq.atoms(props[i].antecedent)), i),
    )
    for i in order:
        if eq.equivalent(target, props[i].antecedent):
            return props[i]
    return None


def coverage_report(m: RtlModule, props: Sequence[Property], eq: Optional[Equivalence] = None) -> CoverageReport:
    eq = eq or Equivalence(m.widths())
    rows = []
    covered = 0
    for bi, pa in assignment_paths(m):
        hit = _first_match(pa, props, eq)
        covered += hit is not None
        rows.append(PathCoverage(bi, format_expr(pa.path_condition), hit.name if hit else None))
    return CoverageReport(len(rows), covered, tuple(rows))


def cpc(m: RtlModule, props: Sequence[Property]) -> Fraction:
    """Percentage of assignment-bearing paths covered; 100 when there are none."""
    return coverage_report(m, props).cpc_pct


__all__ = ["CoverageReport", "PathCoverage", "assignment_paths", "coverage_report", "cpc"]
