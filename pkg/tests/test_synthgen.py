import json
from collections import Counter
from fractions import Fraction

import pytest

from vert import synthgen
from vert.errors import EmptyPool, PoolTooSmall
from vert.hdl.ast import Assign, Binary, Ident, Unary, identifiers, iter_stmts
from vert.hdl.parser import parse_expr, parse_module, parse_properties
from vert.hdl.printer import format_expr, pretty_print_module
from vert.identifiers import IdentifierPool, synthesize
from vert.synthgen import GenConfig, assemble, gen_block, gen_condition, largest_remainder, plan_labels


def _atoms(e):
    if isinstance(e, Binary) and e.op in ("&&", "||"):
        return _atoms(e.lhs) + _atoms(e.rhs)
    return [e]


def test_largest_remainder_paper_split():
    assert largest_remainder(20000, (Fraction(52, 100), Fraction(28, 100), Fraction(20, 100))) == [10400, 5600, 4000]


def test_largest_remainder_ties_go_first():
    assert largest_remainder(1, (Fraction(1, 2), Fraction(1, 2))) == [1, 0]
    assert largest_remainder(7, (Fraction(1, 3),) * 3) == [3, 2, 2]


def test_plan_counts_small():
    labels = plan_labels(GenConfig(sample_count=101))
    cats = Counter(c for c, _ in labels)
    assert sum(cats.values()) == 101
    for cat in synthgen.CATEGORIES:
        sync = sum(1 for c, s in labels if c == cat and s)
        assert abs(2 * sync - cats[cat]) <= 1


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(ratios=(0.5, 0.5, 0.5))
    with pytest.raises(ValueError):
        GenConfig(max_nesting=2)
    with pytest.raises(ValueError):
        GenConfig(sample_count=-1)


@pytest.mark.parametrize("atoms", [1, 2, 3, 5, 8])
def test_gen_condition_atom_count(pool, atoms):
    for seed in range(50):
        e = gen_condition(pool, atoms, seed)
        leaves = _atoms(e)
        assert len(leaves) == atoms
        for leaf in leaves:
            assert isinstance(leaf, (Ident, Unary, Binary))
            if isinstance(leaf, Binary):
                assert leaf.op in ("==", "!=")
        if atoms == 1:
            assert not (isinstance(e, Binary) and e.op in ("&&", "||"))


def test_gen_condition_round_trip(pool):
    for seed in range(1000):
        e = gen_condition(pool, 1 + seed % 6, seed)
        assert parse_expr(format_expr(e)) == e


def test_gen_condition_empty_pool():
    with pytest.raises(EmptyPool):
        gen_condition(IdentifierPool(), 2, 0)


def test_gen_block_pool_too_small():
    with pytest.raises(PoolTooSmall):
        gen_block("if_else", True, synthesize(5, 0), 0)


def test_gen_block_shapes(pool):
    config = GenConfig(sample_count=0)
    allowed = set(pool.names) | {synthgen.CLOCK, synthgen.RESET}
    deep = 0
    n = 300
    for seed in range(n):
        cat = synthgen.CATEGORIES[seed % 3]
        sync = seed % 2 == 0
        m, trace = gen_block(cat, sync, pool, seed, config)
        (block,) = m.always_blocks
        if sync:
            assert block.kind in ("always", "always_ff")
            assert block.sensitivity[0] == ("posedge", synthgen.CLOCK)
        else:
            assert block.kind == "always_comb"
        declared = set(m.widths())
        assert declared <= allowed
        for s in iter_stmts(block.body):
            if isinstance(s, Assign):
                assert s.lhs.name in declared
                assert set(identifiers(s.rhs)) <= declared
                assert s.nonblocking == sync
        parsed, diags = parse_module(pretty_print_module(m))
        assert parsed == m and not [d for d in diags if d.severity == "error"]
        if cat == "if_else" and trace.nesting_depth >= 3:
            deep += 1
    assert deep >= 0.2 * (n // 3)


def test_assemble_empty():
    assert list(assemble(GenConfig(sample_count=0))) == []


def test_assemble_needs_pool():
    with pytest.raises(EmptyPool):
        list(assemble(GenConfig(sample_count=3)))


def test_assemble_samples(pool):
    config = GenConfig(sample_count=60, pool=pool, seed=4)
    samples = list(assemble(config))
    assert len(samples) == 60
    for s in samples:
        props, diags = parse_properties(s.response)
        assert not [d for d in diags if d.severity == "error"]
        assert len(props) == s.n_assertions > 0
        if s.sync:
            assert s.prompt.startswith(synthgen.SYNC_PROMPT)
            assert all(p.clocking == ("posedge", synthgen.CLOCK) for p in props)
        else:
            assert s.prompt.startswith(synthgen.ASYNC_PROMPT)
            assert all(p.clocking is None for p in props)
        record = json.loads(s.to_json())
        assert set(record) == {"prompt", "response", "meta"}


def test_assemble_deterministic(pool):
    config = GenConfig(sample_count=40, pool=pool, seed=9)
    a = [s.to_json() for s in assemble(config)]
    b = [s.to_json() for s in assemble(config)]
    assert a == b
    c = [s.to_json() for s in assemble(GenConfig(sample_count=40, pool=pool, seed=10))]
    assert a != c


def test_sample_module_rebuilds(pool):
    config = GenConfig(sample_count=5, pool=pool, seed=2)
    for s in assemble(config):
        m, _ = synthgen.sample_module(s.seed, s.category, s.sync, pool, config)
        assert pretty_print_module(m).count("always") >= 1
