"""Syntactic acceptance of assertion files."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Tuple

from vert.hdl.ast import Property
from vert.hdl.parser import ParseDiagnostic, parse_property_units


@dataclass(frozen=True)
class UnitVerdict:
    name: str
    accepted: bool
    codes: Tuple[str, ...]
    line: int


@dataclass(frozen=True)
class SyntaxReport:
    generated: int
    accepted: int
    units: Tuple[UnitVerdict, ...] = ()
    diagnostics: Tuple[ParseDiagnostic, ...] = field(default=(), repr=False)

    @property
    def empty_input(self) -> bool:
        return self.generated == 0

    @property
    def syntactically_correct_pct(self) -> Fraction:
        if self.generated == 0:
            return Fraction(0)
        return Fraction(100 * self.accepted, self.generated)

    def to_dict(self) -> dict:
        return {
            "generated": self.generated,
            "accepted": self.accepted,
            "syntactically_correct_pct": float(self.syntactically_correct_pct),
            "empty_input": self.empty_input,
            "units": [
                {"name": u.name, "accepted": u.accepted, "codes": list(u.codes), "line": u.line}
                for u in self.units
            ],
            "diagnostics": [
                {"severity": d.severity, "code": d.code, "line": d.line, "column": d.column, "message": d.message}
                for d in self.diagnostics
            ],
        }


def check_syntax(assertion_src) -> Tuple[List[Property], SyntaxReport]:
    """Accepted properties plus a report; every property opener counts as one declared unit."""
    units, diags = parse_property_units(assertion_src)
    text = assertion_src.decode("utf-8", "replace") if isinstance(assertion_src, (bytes, bytearray)) else assertion_src
    accepted = [u.prop for u in units if u.prop is not None]
    verdicts = tuple(
        UnitVerdict(u.name, u.prop is not None, tuple(d.code for d in u.errors), text.count("\n", 0, u.span[0]) + 1)
        for u in units
    )
    return accepted, SyntaxReport(len(units), len(accepted), verdicts, tuple(diags))


__all__ = ["SyntaxReport", "UnitVerdict", "check_syntax"]
