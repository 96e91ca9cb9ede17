import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

import strategies as S
from oracles import brute_force_equivalent, brute_force_satisfiable
from vert import boolcheck
from vert.errors import AtomBudgetExceeded
from vert.hdl.ast import Binary, Ident, Literal, Unary, disjoin, identifiers
from vert.hdl.parser import parse_expr
from vert.metrics.equivalence import Equivalence

SETTINGS = settings(max_examples=300, deadline=None, suppress_health_check=list(HealthCheck))
# small enough to enumerate every value
SMALL = {"a": 1, "b": 1, "c": 1, "s": 3, "x": 4}


def _names(*es):
    return sorted({n for e in es for n in identifiers(e)})


def _small(e):
    return set(identifiers(e)) <= set(SMALL)


@SETTINGS
@given(S.condition(), S.condition())
def test_equivalent_is_sound(a, b):
    assume(_small(a) and _small(b))
    names = _names(a, b)
    if boolcheck.equivalent(a, b, SMALL):
        assert brute_force_equivalent(a, b, SMALL, names)


@SETTINGS
@given(S.condition())
def test_self_and_double_negation(a):
    assert boolcheck.equivalent(a, a, S.SIGNALS)
    assert boolcheck.equivalent(a, Unary("!", Unary("!", a)), S.SIGNALS)
    assert boolcheck.disjoint(a, Unary("!", a), S.SIGNALS)


bits = st.sampled_from(["a", "b", "c"]).map(Ident)
pure = st.recursive(
    bits,
    lambda inner: st.one_of(
        st.builds(Binary, st.sampled_from(["&&", "||"]), inner, inner),
        st.builds(lambda e: Unary("!", e), inner),
    ),
    max_leaves=8,
)


@SETTINGS
@given(pure, pure)
def test_complete_on_single_bit_signals(a, b):
    names = ["a", "b", "c"]
    assert boolcheck.equivalent(a, b, SMALL) == brute_force_equivalent(a, b, SMALL, names)
    assert boolcheck.satisfiable(a, SMALL) == brute_force_satisfiable(a, SMALL, names)


@SETTINGS
@given(S.condition())
def test_satisfiable_is_sound(a):
    assume(_small(a))
    if not boolcheck.satisfiable(a, SMALL):
        assert not brute_force_satisfiable(a, SMALL, _names(a))


def test_constant_comparisons_exclusive():
    w = {"s": 3}
    assert boolcheck.disjoint(parse_expr("s == 3'd1"), parse_expr("s == 3'd2"), w)
    assert boolcheck.implies(parse_expr("s == 3'd1"), parse_expr("s != 3'd0"), w)
    assert boolcheck.equivalent(parse_expr("!(s == 3'd5)"), parse_expr("s != 3'd5"), w)


def test_de_morgan():
    assert boolcheck.equivalent(parse_expr("!(a && !b)"), parse_expr("!a || b"), {"a": 1, "b": 1})


def test_atom_budget():
    big = disjoin(Binary("==", Ident(f"v{i}"), Literal(8, "dec", 1)) for i in range(21))
    with pytest.raises(AtomBudgetExceeded):
        boolcheck.satisfiable(big, {f"v{i}": 8 for i in range(21)})


@SETTINGS
@given(S.condition(), S.condition())
def test_sampled_equivalence_is_sound(a, b):
    assume(_small(a) and _small(b))
    truth = brute_force_equivalent(a, b, SMALL, _names(a, b))
    got = Equivalence(SMALL).equivalent(a, b)
    if got:
        assert truth
    if not truth:
        assert not got
