"""Synthetic conditional-block generator and prompt/response dataset assembly.

Every sample is one module with one always block whose conditions read only
module inputs. The response is the oracle property list for that block, so
a sample is correct by construction.
"""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from vert import assertsynth
from vert.boolcheck import Checker
from vert.errors import EmptyPool, PoolTooSmall
from vert.hdl.ast import (
    AlwaysBlock,
    Assign,
    Binary,
    Case,
    CaseArm,
    Decl,
    Expr,
    Ident,
    If,
    IfArm,
    Literal,
    RtlModule,
    Unary,
    conjoin,
    disjoin,
)
from vert.hdl.printer import pretty_print_always, pretty_print_properties
from vert.identifiers import IdentifierPool

CATEGORIES = ("if_else", "case_stmt", "combined")
CLOCK = "clk_i"
RESET = "rst_ni"
MIN_POOL = 8
# distinct atoms allowed along any one path, leaving headroom under the checker budget
PATH_ATOM_BUDGET = 16

SYNC_PROMPT = (
    "Generate a list of synchronous SystemVerilog assertions executing at (posedge clk_i) "
    "from the following code:\n"
)
ASYNC_PROMPT = "Generate a list of asynchronous SystemVerilog Assertions from the following code:\n"


@dataclass(frozen=True)
class GenConfig:
    sample_count: int = 20000
    ratios: Tuple = (Fraction(52, 100), Fraction(28, 100), Fraction(20, 100))
    sync_fraction: object = Fraction(1, 2)
    max_nesting: int = 3
    long_condition_min_atoms: int = 4
    pool: Optional[IdentifierPool] = field(default=None, compare=False)
    seed: int = 0
    reset_probability: float = 0.5
    delayed_fraction: float = 0.1
    deep_fraction: float = 0.3
    long_condition_probability: float = 0.25

    def __post_init__(self):
        ratios = tuple(_fraction(r) for r in self.ratios)
        if len(ratios) != 3:
            raise ValueError("ratios needs three entries (if_else, case_stmt, combined)")
        if any(r < 0 for r in ratios) or abs(float(sum(ratios)) - 1.0) > 1e-9:
            raise ValueError("ratios must be non-negative and sum to 1")
        if self.sample_count < 0:
            raise ValueError("sample_count must be non-negative")
        if self.max_nesting < 3:
            raise ValueError("max_nesting must be at least 3")
        sf = _fraction(self.sync_fraction)
        if not 0 <= sf <= 1:
            raise ValueError("sync_fraction must lie in [0, 1]")
        object.__setattr__(self, "ratios", ratios)
        object.__setattr__(self, "sync_fraction", sf)


def _fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


@dataclass(frozen=True)
class GenTrace:
    """Ground truth recorded while generating: each assigning path and its assignments.

    Conditions use plain ``!(c)`` negation of earlier guards, independent of
    the negation rules used by the assertion synthesiser.
    """

    paths: Tuple[Tuple[Expr, Tuple[Tuple[str, Expr], ...]], ...]
    nesting_depth: int
    max_atoms: int


@dataclass(frozen=True)
class DatasetSample:
    prompt: str
    response: str
    category: str
    sync: bool
    seed: int
    n_assertions: int

    def to_json(self) -> str:
        record = {
            "prompt": self.prompt,
            "response": self.response,
            "meta": {
                "category": self.category,
                "sync": self.sync,
                "seed": self.seed,
                "n_assertions": self.n_assertions,
            },
        }
        return json.dumps(record, ensure_ascii=False)


# ------------------------------------------------------------------ counts


def largest_remainder(total: int, ratios: Sequence) -> List[int]:
    """Integer counts proportional to ``ratios`` summing to ``total``.

    Leftover units go to the largest fractional parts; ties go to the earlier entry.
    """
    quotas = [_fraction(r) * total for r in ratios]
    counts = [int(q) for q in quotas]
    short = total - sum(counts)
    order = sorted(range(len(quotas)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


def plan_labels(config: GenConfig) -> List[Tuple[str, bool]]:
    """(category, sync) for every sample index, shuffled by the master seed."""
    labels: List[Tuple[str, bool]] = []
    per_cat = largest_remainder(config.sample_count, config.ratios)
    for cat, n in zip(CATEGORIES, per_cat):
        n_sync, n_async = largest_remainder(n, (config.sync_fraction, 1 - config.sync_fraction))
        labels.extend([(cat, True)] * n_sync + [(cat, False)] * n_async)
    random.Random(f"labels:{config.seed}").shuffle(labels)
    return labels


def sample_seed(master: int, index: int) -> int:
    h = hashlib.blake2b(f"{master}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(h, "big") >> 1


# --------------------------------------------------------------- generator


class _Gen:
    def __init__(self, names: Sequence[str], rng: random.Random, sync: bool, config: GenConfig):
        self.rng = rng
        self.sync = sync
        self.config = config
        self.fresh = rng.sample(names, min(len(names), 48))
        self.decls: Dict[str, Decl] = {}
        self.order: List[str] = []
        self.cond_inputs: List[str] = []
        self.data_inputs: Dict[int, List[str]] = {}
        self.used_rhs: Dict[str, set] = {}
        self.trace_paths: List[Tuple[Expr, Tuple[Tuple[str, Expr], ...]]] = []
        self.max_depth = 0
        self.max_atoms = 0
        self.widths: Dict[str, int] = {}

    # names --------------------------------------------------------------

    def take(self) -> Optional[str]:
        return self.fresh.pop() if self.fresh else None

    def declare(self, name, width, direction):
        self.decls[name] = Decl(name, width, direction)
        self.widths[name] = width
        self.order.append(name)

    def cond_input(self, avoid) -> str:
        reusable = [n for n in self.cond_inputs if n not in avoid]
        if reusable and (self.rng.random() < 0.35 or len(self.fresh) <= 2):
            return self.rng.choice(reusable)
        name = self.take() if len(self.fresh) > 2 or not self.cond_inputs else None
        if name is None:
            if reusable:
                return self.rng.choice(reusable)
            return self.rng.choice(self.cond_inputs)
        width = 1 if self.rng.random() < 0.6 else self.rng.randint(2, 8)
        self.declare(name, width, "input")
        self.cond_inputs.append(name)
        return name

    def data_input(self, width) -> str:
        pool = self.data_inputs.setdefault(width, [])
        if pool and (self.rng.random() < 0.3 or len(self.fresh) <= 2):
            return self.rng.choice(pool)
        name = self.take() if len(self.fresh) > 2 else None
        if name is None:
            if pool:
                return self.rng.choice(pool)
            return None
        self.declare(name, width, "input")
        pool.append(name)
        return name

    # expressions ------------------------------------------------------------

    def literal(self, width, value=None) -> Literal:
        if value is None:
            value = self.rng.getrandbits(width)
        base = self.rng.choice(("bin", "hex", "dec")) if width > 1 else "bin"
        if base == "bin" and width > 12:
            base = "hex"
        return Literal(width, base, value)

    def atom(self, avoid) -> Tuple[Expr, str]:
        name = self.cond_input(avoid)
        w = self.widths[name]
        if w == 1:
            e = Ident(name) if self.rng.random() < 0.5 else Unary("!", Ident(name))
        else:
            op = self.rng.choice(("==", "!="))
            e = Binary(op, Ident(name), self.literal(w))
        return e, name

    def condition(self, n_atoms, avoid) -> Tuple[Expr, List[str]]:
        avoid = set(avoid)
        leaves = []
        names = []
        for _ in range(n_atoms):
            e, nm = self.atom(avoid)
            avoid.add(nm)
            leaves.append(e)
            names.append(nm)

        def build(items):
            if len(items) == 1:
                return items[0]
            k = self.rng.randint(1, len(items) - 1)
            op = self.rng.choice(("&&", "||"))
            return Binary(op, build(items[:k]), build(items[k:]))

        return build(leaves), names

    def atoms_for(self, budget) -> int:
        cfg = self.config
        if budget >= cfg.long_condition_min_atoms and self.rng.random() < cfg.long_condition_probability:
            hi = min(budget, cfg.long_condition_min_atoms + 2)
            return self.rng.randint(cfg.long_condition_min_atoms, hi)
        return self.rng.randint(1, max(1, min(3, budget)))

    def rhs(self, target) -> Expr:
        w = self.widths[target]
        used = self.used_rhs.setdefault(target, set())
        choice = None
        for _ in range(24):
            r = self.rng.random()
            if r < 0.45:
                value = self.rng.getrandbits(w)
                cand = self.literal(w, value)
                key = ("lit", value)
            else:
                name = self.data_input(w)
                if name is None:
                    continue
                if r < 0.8:
                    cand, key = Ident(name), ("id", name)
                else:
                    cand, key = Unary("~", Ident(name)), ("not", name)
            if key not in used:
                choice = (cand, key)
                break
        if choice is None:
            value = self.rng.getrandbits(w)
            choice = (self.literal(w, value), ("lit", value))
        used.add(choice[1])
        return choice[0]

    def assigns(self, targets, ctx_terms) -> List[Assign]:
        k = self.rng.randint(1, len(targets))
        chosen = sorted(self.rng.sample(range(len(targets)), k))
        out = [Assign(Ident(targets[i]), self.rhs(targets[i]), self.sync) for i in chosen]
        self.trace_paths.append((conjoin(ctx_terms), tuple((a.lhs.name, a.rhs) for a in out)))
        return out

    # structures ------------------------------------------------------------

    def if_chain(self, targets, depth, ctx_terms, ctx_vars, force_depth=0) -> If:
        self.max_depth = max(self.max_depth, depth)
        budget = PATH_ATOM_BUDGET - len(ctx_vars)
        n_arms = self.rng.randint(1, 4)
        arms: List[IfArm] = []
        prior: List[Expr] = []
        chain_vars: List[str] = []
        for i in range(n_arms):
            left = budget - len(chain_vars)
            if left < 1 or (i > 0 and left < 2):
                break
            cond, vars_ = self.condition(self.atoms_for(left - (1 if i + 1 < n_arms else 0)), set(ctx_vars) | set(chain_vars))
            chain_vars.extend(vars_)
            terms = ctx_terms + [Unary("!", p) for p in prior] + [cond]
            path_vars = list(ctx_vars) + chain_vars
            nest = depth < self.config.max_nesting and (
                (i == 0 and force_depth > depth) or self.rng.random() < 0.2
            )
            if nest and PATH_ATOM_BUDGET - len(path_vars) >= 1:
                body = [self.if_chain(targets, depth + 1, terms, path_vars, force_depth)]
            else:
                body = self.assigns(targets, terms)
            self.max_atoms = max(self.max_atoms, len(path_vars))
            arms.append(IfArm(cond, tuple(body)))
            prior.append(cond)
        else_body = None
        if self.rng.random() < 0.5:
            terms = ctx_terms + [Unary("!", p) for p in prior]
            else_body = tuple(self.assigns(targets, terms))
            self.max_atoms = max(self.max_atoms, len(ctx_vars) + len(chain_vars))
        return If(tuple(arms), else_body)

    def case_stmt(self, targets, depth, ctx_terms, ctx_vars, with_ifs) -> Case:
        self.max_depth = max(self.max_depth, depth)
        name = self.take()
        if name is None:
            raise PoolTooSmall("identifier pool exhausted while choosing a case selector")
        width = self.rng.randint(3, 8)
        self.declare(name, width, "input")
        sel = Ident(name)
        n_arms = self.rng.randint(2, 6)
        # one selector value always stays unlabelled so the default (or fall-through) path is reachable
        values = self.rng.sample(range(1 << width), min((1 << width) - 1, 2 * n_arms))
        arms = []
        used_labels = []
        vi = 0
        if_arm = self.rng.randrange(n_arms) if with_ifs else -1
        for i in range(n_arms):
            labels = [values[vi]]
            vi += 1
            if self.rng.random() < 0.15 and len(values) - vi > n_arms - i - 1:
                labels.append(values[vi])
                vi += 1
            lits = tuple(self.literal(width, v) for v in labels)
            used_labels.extend(lits)
            term = disjoin(Binary("==", sel, lit) for lit in lits)
            terms = ctx_terms + [term]
            inner_if = with_ifs and (i == if_arm or self.rng.random() < 0.6)
            if inner_if and depth < self.config.max_nesting:
                body = [self.if_chain(targets, depth + 1, terms, list(ctx_vars) + [name])]
            else:
                body = self.assigns(targets, terms)
            arms.append(CaseArm(lits, tuple(body)))
        default_body = None
        if self.rng.random() < 0.5:
            terms = ctx_terms + [conjoin(Binary("!=", sel, lit) for lit in used_labels)]
            default_body = tuple(self.assigns(targets, terms))
        return Case(sel, tuple(arms), default_body)


_NAMES_CACHE: Dict[int, Tuple[IdentifierPool, List[str]]] = {}


def _pool_names(pool: IdentifierPool) -> List[str]:
    """Distinct pool names minus the reserved clock/reset, cached per pool object."""
    hit = _NAMES_CACHE.get(id(pool))
    if hit is not None and hit[0] is pool:
        return hit[1]
    names = [n for n in dict.fromkeys(pool.names) if n not in (CLOCK, RESET)]
    if len(_NAMES_CACHE) > 8:
        _NAMES_CACHE.clear()
    _NAMES_CACHE[id(pool)] = (pool, names)
    return names


def _satisfiable_paths(block: AlwaysBlock, widths) -> bool:
    for cond in assertsynth.leaf_conditions(block, widths):
        if not Checker(widths).satisfiable(cond):
            return False
    return True


def gen_condition(pool: IdentifierPool, atoms: int, seed: int) -> Expr:
    """A random guard with exactly ``atoms`` leaf atoms over pool names."""
    if atoms < 1:
        raise ValueError("atoms must be at least 1")
    names = _pool_names(pool)
    if not names:
        raise EmptyPool("identifier pool is empty")
    g = _Gen(names, random.Random(seed), False, GenConfig(sample_count=0))
    expr, _ = g.condition(atoms, set())
    return expr


def gen_block(
    category: str,
    sync: bool,
    pool: IdentifierPool,
    seed: int,
    config: Optional[GenConfig] = None,
) -> Tuple[RtlModule, GenTrace]:
    """One single-block module of the given category plus its ground-truth trace."""
    if category not in CATEGORIES:
        raise ValueError(f"unknown category {category!r}")
    config = config or GenConfig(sample_count=0)
    names = _pool_names(pool)
    if len(names) < MIN_POOL:
        raise PoolTooSmall(f"identifier pool has {len(names)} names; at least {MIN_POOL} are needed")
    for attempt in range(64):
        rng = random.Random(f"{seed}:{attempt}")
        g = _Gen(names, rng, sync, config)
        result = _build(g, category, sync, rng, config)
        if result is None:
            continue
        module, block, trace = result
        if trace.max_atoms > 20 or not _satisfiable_paths(block, module.widths()):
            continue
        return module, trace
    raise PoolTooSmall("could not build a well-formed block from this identifier pool")


def _build(g: _Gen, category, sync, rng, config):
    if sync:
        g.declare(CLOCK, 1, "input")
    use_reset = sync and rng.random() < config.reset_probability
    if use_reset:
        g.declare(RESET, 1, "input")
    n_targets = rng.randint(1, 3)
    targets = []
    for _ in range(n_targets):
        name = g.take()
        if name is None:
            break
        targets.append(name)
    if not targets:
        return None
    target_widths = {t: rng.randint(1, 32) for t in targets}
    g.widths.update(target_widths)
    ctx_terms: List[Expr] = []
    ctx_vars: List[str] = []
    depth = 1
    reset_assigns = None
    if use_reset:
        reset_assigns = tuple(Assign(Ident(t), Literal(None, "fill", 0), True) for t in targets)
        for t in targets:
            g.used_rhs.setdefault(t, set()).add(("lit", 0))
        g.trace_paths.append((Unary("~", Ident(RESET)), tuple((t, Literal(None, "fill", 0)) for t in targets)))
        ctx_terms = [Unary("!", Unary("~", Ident(RESET)))]
        ctx_vars = [RESET]
        depth = 2
    if category == "if_else":
        deep = rng.random() < config.deep_fraction
        force = config.max_nesting if deep else 0
        if deep and use_reset:
            # the reset wrapper already supplies one level
            force = config.max_nesting
        body_stmt = g.if_chain(targets, depth, ctx_terms, ctx_vars, force_depth=force)
    else:
        body_stmt = g.case_stmt(targets, depth, ctx_terms, ctx_vars, with_ifs=(category == "combined"))
    if use_reset:
        top = If((IfArm(Unary("~", Ident(RESET)), reset_assigns),), (body_stmt,))
    else:
        top = body_stmt
    if sync:
        kind = "always_ff" if rng.random() < 0.7 else "always"
        sens = [("posedge", CLOCK)] + ([("negedge", RESET)] if use_reset else [])
        block = AlwaysBlock(kind, tuple(sens), (top,))
    else:
        block = AlwaysBlock("always_comb", (), (top,))
    for t in targets:
        g.declare(t, target_widths[t], "output")
    inputs = [g.decls[n] for n in g.order if g.decls[n].direction == "input"]
    outputs = [g.decls[n] for n in g.order if g.decls[n].direction == "output"]
    module = RtlModule("vert_sample", tuple(inputs + outputs), (block,))
    trace = GenTrace(tuple(g.trace_paths), g.max_depth, g.max_atoms)
    return module, block, trace


# ----------------------------------------------------------------- dataset


def make_sample(category: str, sync: bool, pool: IdentifierPool, seed: int, config: GenConfig) -> DatasetSample:
    module, _ = gen_block(category, sync, pool, seed, config)
    block = module.always_blocks[0]
    rng = random.Random(f"delay:{seed}")
    delayed = sync and rng.random() < config.delayed_fraction
    pas = assertsynth.synthesize(block, widths=module.widths(), seed=seed, delayed=delayed)
    props = [pa.property for pa in pas]
    code = pretty_print_always(block)
    prompt = (SYNC_PROMPT if sync else ASYNC_PROMPT) + code
    return DatasetSample(prompt, pretty_print_properties(props), category, sync, seed, len(props))


def assemble(config: GenConfig) -> Iterator[DatasetSample]:
    """Samples in index order; the stream is a pure function of ``config``."""
    if config.sample_count == 0:
        return
    if config.pool is None or not config.pool.entries:
        raise EmptyPool("generation needs a non-empty identifier pool")
    for index, (category, sync) in enumerate(plan_labels(config)):
        yield make_sample(category, sync, config.pool, sample_seed(config.seed, index), config)


def sample_module(sample_seed_value: int, category: str, sync: bool, pool: IdentifierPool, config: GenConfig):
    """Rebuild the module behind a dataset sample from its recorded metadata."""
    module, trace = gen_block(category, sync, pool, sample_seed_value, config)
    return module, trace


__all__ = [
    "ASYNC_PROMPT",
    "CATEGORIES",
    "DatasetSample",
    "GenConfig",
    "GenTrace",
    "SYNC_PROMPT",
    "assemble",
    "gen_block",
    "gen_condition",
    "largest_remainder",
    "make_sample",
    "plan_labels",
    "sample_module",
    "sample_seed",
]
