"""Functional grading of assertions against a design.

A property is functionally correct when it

(a) holds on the original trace and fires at least once,
(b) matches an oracle path whose condition is equivalent to its antecedent, and
(c) fails on at least one behavior-changing mutant sited on that path.

Each criterion is reported separately so either view can be studied alone.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from vert.assertsynth import KIND_ASSIGN, PathAssertion, synthesize
from vert.dynsem.mutate import OPERATORS, Mutant, mutate, with_spans
from vert.dynsem.props import eval_property
from vert.dynsem.simulate import StimulusPlan, Trace, build_stimulus, simulate
from vert.dynsem.compile import compile_module
from vert.errors import AtomBudgetExceeded, CombLoopDetected, SignalMissing
from vert.hdl.ast import Binary, Expr, Ident, Past, Property, RtlModule, walk
from vert.hdl.printer import format_expr
from vert.metrics.coverage import coverage_report
from vert.metrics.equivalence import Equivalence

FAILS_ON_ORIGINAL = "fails on original design"
VACUOUS = "never triggered"
UNKNOWN_SIGNAL = "unknown signal"
NO_MATCH = "no matching path"
OMITS_GUARD = "antecedent omits guarding condition"
OVER_CONSTRAINED = "antecedent over-constrained"
NOT_EQUIVALENT = "antecedent not equivalent to path condition"
NO_KILL = "kills no behavior-changing mutant"

_COMPARE = ("==", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class PropertyVerdict:
    name: str
    functionally_correct: bool
    holds: bool
    triggered_count: int
    failures: int
    matched_path: Optional[str]
    antecedent_equivalent: Optional[bool]
    equivalence_skipped: bool
    kills_mutant: bool
    mutants_considered: int
    reasons: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "functionally_correct": self.functionally_correct,
            "holds": self.holds,
            "triggered_count": self.triggered_count,
            "failures": self.failures,
            "matched_path": self.matched_path,
            "antecedent_equivalent": self.antecedent_equivalent,
            "equivalence_skipped": self.equivalence_skipped,
            "kills_mutant": self.kills_mutant,
            "mutants_considered": self.mutants_considered,
            "reason": self.reasons[0] if self.reasons else None,
            "reasons": list(self.reasons),
        }


@dataclass(frozen=True)
class EvalReport:
    generated: int
    syntactically_correct: int
    functionally_correct: int
    cpc_pct: Fraction
    verdicts: Tuple[PropertyVerdict, ...] = ()
    mutants_total: int = 0
    mutants_behavior_changing: int = 0
    no_paths: bool = False

    def _pct(self, k: int) -> Fraction:
        return Fraction(100 * k, self.generated) if self.generated else Fraction(0)

    @property
    def syntactically_correct_pct(self) -> Fraction:
        return self._pct(self.syntactically_correct)

    @property
    def functionally_correct_pct(self) -> Fraction:
        return self._pct(self.functionally_correct)

    @property
    def empty_input(self) -> bool:
        return self.generated == 0

    def verdict(self, name: str) -> PropertyVerdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "generated": self.generated,
            "syntactically_correct_pct": float(self.syntactically_correct_pct),
            "functionally_correct_pct": float(self.functionally_correct_pct),
            "cpc_pct": float(self.cpc_pct),
            "empty_input": self.empty_input,
            "no_paths": self.no_paths,
            "mutants_total": self.mutants_total,
            "mutants_behavior_changing": self.mutants_behavior_changing,
            "verdicts": [v.to_dict() for v in self.verdicts],
        }


# ------------------------------------------------------------ matching


def _strip_past(e: Expr) -> Expr:
    while isinstance(e, Past):
        e = e.inner
    return e


def _conjuncts(e: Expr) -> List[Expr]:
    if isinstance(e, Binary) and e.op == "&&":
        return _conjuncts(e.lhs) + _conjuncts(e.rhs)
    return [e]


def consequent_targets(p: Property) -> FrozenSet[str]:
    """Signals the consequent constrains: left operands of its comparisons."""
    out = set()
    for c in _conjuncts(p.consequent):
        if isinstance(c, Binary) and c.op in _COMPARE:
            lhs = _strip_past(c.lhs)
            out.update(n.name for n in walk(lhs) if isinstance(n, Ident))
        else:
            out.update(n.name for n in walk(_strip_past(c)) if isinstance(n, Ident))
    return frozenset(out)


def _pairs(p: Property) -> FrozenSet[Tuple[Expr, Expr]]:
    return frozenset(
        (_strip_past(c.lhs), _strip_past(c.rhs))
        for c in _conjuncts(p.consequent)
        if isinstance(c, Binary) and c.op == "=="
    )


@dataclass(frozen=True)
class _Oracle:
    block: int
    pa: PathAssertion
    targets: FrozenSet[str]
    pairs: FrozenSet[Tuple[Expr, Expr]]
    spans: Tuple[Tuple[int, int], ...]

    @property
    def label(self) -> str:
        return f"block {self.block}: {format_expr(self.pa.path_condition)} ({self.pa.kind})"


def _score(p: Property, targets, pairs, atoms, o: _Oracle, eq: Equivalence):
    return (
        len(targets & o.targets),
        len(pairs & o.pairs),
        len(atoms & eq.atoms(o.pa.path_condition)),
        int(p.delay == o.pa.property.delay),
        o.pa.kind == KIND_ASSIGN,
    )


def _match(p: Property, oracles: Sequence[_Oracle], eq: Equivalence):
    """(oracle, equivalent, skipped): an equivalent best-overlap path when one exists."""
    targets = consequent_targets(p)
    pairs = _pairs(p)
    atoms = eq.atoms(p.antecedent)
    ranked = []
    for i, o in enumerate(oracles):
        s = _score(p, targets, pairs, atoms, o, eq)
        if s[0]:
            ranked.append((s, -i, o))
    if not ranked:
        return None, None, False
    ranked.sort(key=lambda x: (x[0], x[1]), reverse=True)
    skipped = False
    for _, _, o in ranked:
        try:
            if eq.equivalent(p.antecedent, o.pa.path_condition):
                return o, True, False
        except AtomBudgetExceeded:
            skipped = True
    best = ranked[0][2]
    return best, (None if skipped else False), skipped


def _mismatch_reason(p: Property, o: _Oracle, eq: Equivalence) -> str:
    try:
        if eq.implies(o.pa.path_condition, p.antecedent):
            return OMITS_GUARD
        if eq.implies(p.antecedent, o.pa.path_condition):
            return OVER_CONSTRAINED
    except AtomBudgetExceeded:
        pass
    return NOT_EQUIVALENT


def _overlaps(a, b) -> bool:
    return a[0] < b[1] and b[0] < a[1]


# ------------------------------------------------------------ driver


def _oracles(m: RtlModule) -> List[_Oracle]:
    widths = m.widths()
    out = []
    for bi, block in enumerate(m.always_blocks):
        for pa in synthesize(block, widths=widths, stability=True, delayed=block.is_sequential):
            spans = tuple(s for s in pa.guard_spans + pa.assign_spans if s)
            out.append(_Oracle(bi, pa, consequent_targets(pa.property), _pairs(pa.property), spans))
    return out


def eval_functional(
    m: RtlModule,
    props: Sequence[Property],
    plan: StimulusPlan = StimulusPlan(),
    ops: Optional[Sequence[str]] = None,
    *,
    generated: Optional[int] = None,
) -> EvalReport:
    """Grade accepted properties ``props`` against ``m``.

    ``generated`` is the number of declared properties including rejected
    ones (defaults to ``len(props)``), so percentages can be reported over
    everything a model produced.
    """
    mc = with_spans(m)
    widths = mc.widths()
    eq = Equivalence(widths)
    oracles = _oracles(mc)
    program = compile_module(mc)
    stimulus = build_stimulus(mc, plan, program)
    original = simulate(mc, plan, stimulus, program)
    watched = tuple(n for n in program.names if n in set(program.assigned))

    mutants: List[Tuple[Mutant, Trace]] = []
    all_mutants = mutate(mc, OPERATORS if ops is None else ops)
    for mu in all_mutants:
        try:
            t = simulate(mu.module, plan, stimulus)
        except CombLoopDetected:
            continue
        if not original.same_values(t, watched):
            mutants.append((mu, t))

    verdicts = []
    for p in props:
        verdicts.append(_grade(p, original, oracles, mutants, eq))
    cov = coverage_report(mc, props, eq)
    n_gen = len(props) if generated is None else generated
    if n_gen < len(props):
        raise ValueError("generated count is smaller than the number of accepted properties")
    return EvalReport(
        generated=n_gen,
        syntactically_correct=len(props),
        functionally_correct=sum(v.functionally_correct for v in verdicts),
        cpc_pct=cov.cpc_pct,
        verdicts=tuple(verdicts),
        mutants_total=len(all_mutants),
        mutants_behavior_changing=len(mutants),
        no_paths=cov.no_paths,
    )


def _grade(p: Property, original: Trace, oracles, mutants, eq: Equivalence) -> PropertyVerdict:
    reasons = []
    try:
        v = eval_property(p, original)
    except SignalMissing:
        return PropertyVerdict(p.name, False, False, 0, 0, None, None, False, False, 0, (UNKNOWN_SIGNAL,))
    holds = v.holds
    if not holds:
        reasons.append(FAILS_ON_ORIGINAL)
    elif v.triggered_count == 0:
        reasons.append(VACUOUS)

    o, equivalent, skipped = _match(p, oracles, eq)
    if o is None:
        reasons.append(NO_MATCH)
    elif equivalent is False:
        reasons.append(_mismatch_reason(p, o, eq))

    if o is None:
        considered = mutants
    else:
        considered = [(mu, t) for mu, t in mutants if any(_overlaps(mu.site, s) for s in o.spans)]
    # one kill settles criterion (c), so stop at the first
    killed = any(not eval_property(p, t).holds for _, t in considered)
    if not killed:
        reasons.append(NO_KILL)
    return PropertyVerdict(
        name=p.name,
        functionally_correct=not reasons,
        holds=holds,
        triggered_count=v.triggered_count,
        failures=len(v.failures),
        matched_path=o.label if o else None,
        antecedent_equivalent=equivalent,
        equivalence_skipped=skipped,
        kills_mutant=killed,
        mutants_considered=len(considered),
        reasons=tuple(reasons),
    )


__all__ = [
    "EvalReport",
    "FAILS_ON_ORIGINAL",
    "NOT_EQUIVALENT",
    "NO_KILL",
    "NO_MATCH",
    "OMITS_GUARD",
    "OVER_CONSTRAINED",
    "PropertyVerdict",
    "UNKNOWN_SIGNAL",
    "VACUOUS",
    "consequent_targets",
    "eval_functional",
]
