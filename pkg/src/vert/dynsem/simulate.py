"""Two-valued cycle-based simulation with reset scheduling and directed stimulus.

One cycle: load inputs, settle combinational blocks, snapshot the pre-edge
values, run every edge-triggered block with nonblocking commit, settle
again, snapshot the post-edge values. Registers start at zero.

Random stimulus alone rarely reaches a path guarded by a conjunction of
eight equality tests, so the stimulus also carries *directed* cycles: each
maximal path condition of every block is solved over its atoms and the
solution is written into a reserved cycle. The stimulus depends only on the
module it was built from, which lets mutants be simulated on exactly the
stimulus of their original.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from vert import assertsynth
from vert.boolcheck import Checker
from vert.dynsem import kernels
from vert.dynsem.compile import Program, compile_module
from vert.errors import AtomBudgetExceeded, CombLoopDetected, UnboundIdentifier
from vert.hdl.ast import Binary, Case, Expr, Ident, If, Literal, RtlModule, identifiers, iter_stmts, walk
from vert.hdl.values import BitVec, eval_expr, mask

log = logging.getLogger(__name__)

RESET_HINTS = ("rst", "reset")


@dataclass(frozen=True)
class StimulusPlan:
    cycles: int = 1000
    seed: int = 0
    reset_cycles: int = 2
    reset_probability: float = 0.05
    literal_bias: float = 0.25
    directed: bool = True
    directed_repeats: int = 2

    def __post_init__(self):
        if self.cycles < 1:
            raise ValueError("cycles must be >= 1")
        if not 0 <= self.reset_probability <= 1 or not 0 <= self.literal_bias <= 1:
            raise ValueError("probabilities must lie in [0, 1]")


@dataclass(frozen=True)
class Stimulus:
    inputs: Tuple[str, ...]
    values: np.ndarray  # (cycles, len(inputs)) uint64


@dataclass(frozen=True, eq=False)
class Trace:
    """Per-cycle pre-edge and post-edge values of every declared signal."""

    names: Tuple[str, ...]
    widths: Tuple[int, ...]
    pre: np.ndarray
    post: np.ndarray

    def __post_init__(self):
        self.pre.setflags(write=False)
        self.post.setflags(write=False)
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.names)})

    @property
    def cycles(self) -> int:
        return self.pre.shape[0]

    def __contains__(self, name) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        return self._index[name]

    def width(self, name: str) -> int:
        return self.widths[self._index[name]]

    def column(self, name: str, phase: str = "post") -> np.ndarray:
        arr = self.pre if phase == "pre" else self.post
        return arr[:, self._index[name]]

    def value(self, name: str, cycle: int, phase: str = "post") -> BitVec:
        return BitVec(int(self.column(name, phase)[cycle]), self.width(name))

    @property
    def signals(self) -> Dict[str, List[Tuple[BitVec, BitVec]]]:
        """name -> per-cycle (pre-edge, post-edge) pairs."""
        out = {}
        for i, n in enumerate(self.names):
            w = self.widths[i]
            out[n] = [
                (BitVec(int(a), w), BitVec(int(b), w))
                for a, b in zip(self.pre[:, i].tolist(), self.post[:, i].tolist())
            ]
        return out

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update("\0".join(self.names).encode())
        h.update(np.ascontiguousarray(self.pre).tobytes())
        h.update(np.ascontiguousarray(self.post).tobytes())
        return h.hexdigest()

    def dump(self) -> str:
        """Columnar text: a header, then one line per cycle of post-edge values in hex."""
        lines = ["cycle " + " ".join(self.names)]
        for c in range(self.cycles):
            vals = " ".join(format(int(v), "x") for v in self.post[c].tolist())
            lines.append(f"{c} {vals}")
        return "\n".join(lines) + "\n"

    def same_values(self, other: "Trace", names) -> bool:
        idx_a = [self._index[n] for n in names]
        idx_b = [other._index[n] for n in names]
        return bool(np.array_equal(self.post[:, idx_a], other.post[:, idx_b]))


# ------------------------------------------------------------------ inputs


def clock_signals(m: RtlModule) -> Tuple[str, ...]:
    out: Dict[str, None] = {}
    for b in m.always_blocks:
        if b.clock is not None:
            out.setdefault(b.clock[1], None)
    return tuple(out)


def reset_signals(m: RtlModule) -> Dict[str, int]:
    """Input name -> asserted level, from sensitivity edges and naming."""
    inputs = {d.name for d in m.inputs}
    found: Dict[str, int] = {}
    for b in m.always_blocks:
        for edge, sig in b.resets:
            if sig in inputs:
                found.setdefault(sig, 0 if edge == "negedge" else 1)
    clocks = set(clock_signals(m))
    for d in m.inputs:
        low = d.name.lower()
        if d.name in found or d.name in clocks or d.width != 1:
            continue
        if any(h in low for h in RESET_HINTS):
            found[d.name] = 0 if low.endswith(("n", "ni", "_b")) else 1
    return found


def _literals(m: RtlModule, inputs) -> Dict[str, List[int]]:
    """Constants each input is compared against (and their neighbours for orderings)."""
    widths = m.widths()
    out: Dict[str, set] = {n: set() for n in inputs}

    def note(name, value, ordered):
        if name not in out:
            return
        m_ = mask(widths.get(name, 1))
        out[name].add(value & m_)
        if ordered:
            out[name].add((value + 1) & m_)
            out[name].add((value - 1) & m_)

    def scan(e):
        for node in walk(e):
            if isinstance(node, Binary) and node.op in ("==", "!=", "<", "<=", ">", ">="):
                ordered = node.op not in ("==", "!=")
                for a, b in ((node.lhs, node.rhs), (node.rhs, node.lhs)):
                    if isinstance(a, Ident) and a.index is None and isinstance(b, Literal) and b.base != "fill":
                        note(a.name, b.value, ordered)

    for block in m.always_blocks:
        for s in iter_stmts(block.body):
            if isinstance(s, If):
                for arm in s.arms:
                    scan(arm.cond)
            elif isinstance(s, Case):
                scan(s.selector)
                if isinstance(s.selector, Ident) and s.selector.index is None:
                    for arm in s.arms:
                        for lbl in arm.labels:
                            if isinstance(lbl, Literal) and lbl.base != "fill":
                                note(s.selector.name, lbl.value, False)
    return {n: sorted(v) for n, v in out.items()}


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) & ((1 << 63) - 1))


def _uniform(rng, width, size):
    return rng.integers(0, mask(width), size=size, endpoint=True, dtype=np.uint64)


class _Solver:
    """Maps a satisfying atom assignment onto concrete input values."""

    def __init__(self, m: RtlModule, inputs, widths, literals, resets, clocks, rng):
        self.inputs = inputs
        self.input_set = set(inputs)
        self.widths = widths
        self.literals = literals
        self.resets = resets
        self.clocks = clocks
        self.rng = rng

    def base(self) -> Dict[str, int]:
        env = {}
        for n in self.inputs:
            w = self.widths[n]
            if n in self.clocks:
                env[n] = 0
            elif n in self.resets:
                env[n] = (1 - self.resets[n]) & mask(w)
            elif self.literals.get(n) and self.rng.random() < 0.5:
                env[n] = int(self.rng.choice(self.literals[n]))
            else:
                env[n] = int(_uniform(self.rng, w, 1)[0])
        return env

    def solve(self, cond: Expr, tries: int = 8, search: int = 256) -> Optional[Dict[str, int]]:
        names = set(identifiers(cond))
        verifiable = names <= self.input_set
        try:
            found = Checker(self.widths).witnesses(cond, limit=tries)
        except AtomBudgetExceeded:
            found = []
        for w in found:
            env = self.base()
            self.apply(w, env)
            if not verifiable or self.holds(cond, env):
                return env
        if not verifiable:
            return None
        for _ in range(search):
            env = self.base()
            for n in names:
                if n in self.clocks:
                    continue
                lits = self.literals.get(n)
                if lits and self.rng.random() < 0.5:
                    env[n] = int(self.rng.choice(lits))
                elif self.rng.random() < 0.3:
                    env[n] = int(self.rng.choice([0, 1, mask(self.widths[n])])) & mask(self.widths[n])
                else:
                    env[n] = int(_uniform(self.rng, self.widths[n], 1)[0])
            if self.holds(cond, env):
                return env
        return None

    def holds(self, cond, env) -> bool:
        bv = {n: BitVec(v & mask(self.widths[n]), self.widths[n]) for n, v in env.items()}
        try:
            return bool(eval_expr(cond, bv).value)
        except UnboundIdentifier:
            return False

    def apply(self, assignment: Mapping[tuple, bool], env: Dict[str, int]) -> None:
        cons: Dict[str, dict] = {}
        pairs = []

        def c(name):
            return cons.setdefault(name, {"eq": [], "ne": set(), "nz": None, "lo": 0, "hi": mask(self.widths[name]), "bits": {}})

        def var(e):
            if isinstance(e, Ident) and e.index is None and e.name in self.input_set and e.name not in self.clocks:
                return e.name
            return None

        for key, truth in assignment.items():
            tag = key[0]
            if tag == "truth":
                e = key[1]
                n = var(e)
                if n is not None:
                    c(n)["nz"] = truth
                elif isinstance(e, Ident) and isinstance(e.index, int) and e.name in self.input_set:
                    c(e.name)["bits"][e.index] = truth
            elif tag == "eq":
                a, b = key[1], key[2]
                if isinstance(b, tuple) and b[0] == "lit":
                    n = var(a)
                    if n is not None:
                        (c(n)["eq"].append(b[1]) if truth else c(n)["ne"].add(b[1]))
                else:
                    na, nb = var(a), var(b)
                    if na is not None and nb is not None:
                        pairs.append((na, nb, truth))
            elif tag == "lt":
                a, b = key[1], key[2]
                if isinstance(b, tuple) and b[0] == "lit" and var(a) is not None:
                    n = var(a)
                    if truth:
                        c(n)["hi"] = min(c(n)["hi"], b[1] - 1)
                    else:
                        c(n)["lo"] = max(c(n)["lo"], b[1])
                elif isinstance(a, tuple) and a[0] == "lit" and var(b) is not None:
                    n = var(b)
                    if truth:
                        c(n)["lo"] = max(c(n)["lo"], a[1] + 1)
                    else:
                        c(n)["hi"] = min(c(n)["hi"], a[1])
                elif var(a) is not None and var(b) is not None:
                    pairs.append((var(a), var(b), "lt" if truth else "ge"))
        for n, k in cons.items():
            env[n] = self.pick(n, k, env[n])
        for a, b, rel in pairs:
            w = mask(self.widths[b])
            if rel is True:
                env[b] = env[a] & w
            elif rel is False:
                if env[a] & w == env[b]:
                    env[b] = (env[b] ^ 1) & w
            elif rel == "lt" and not env[a] < env[b]:
                env[a], env[b] = 0, max(1, env[b]) & w
            elif rel == "ge" and env[a] < env[b]:
                env[a], env[b] = env[b] & mask(self.widths[a]), env[a] & w

    def pick(self, name, k, current):
        w = mask(self.widths[name])
        if k["eq"]:
            v = k["eq"][0] & w
        elif k["nz"] is False:
            v = 0
        else:
            lo, hi = k["lo"], min(k["hi"], w)

            def ok(x):
                return lo <= x <= hi and x not in k["ne"] and (k["nz"] is not True or x != 0)

            v = current
            if not ok(v):
                cands = [lo, hi, lo + 1, hi - 1]
                if hi > lo:
                    cands += [int(x) for x in self.rng.integers(lo, hi, size=16, dtype=np.uint64, endpoint=True)]
                v = next((x for x in cands if ok(x)), current)
        for bit, val in k["bits"].items():
            v = (v | (1 << bit)) if val else (v & ~(1 << bit))
        return v & w


def build_stimulus(m: RtlModule, plan: StimulusPlan, program: Optional[Program] = None) -> Stimulus:
    """Input values per cycle for ``m``; a pure function of (m, plan)."""
    program = program or compile_module(m)
    inputs = program.inputs
    widths = dict(zip(program.names, program.widths))
    rng = _rng(plan.seed)
    cycles = plan.cycles
    clocks = set(clock_signals(m))
    resets = reset_signals(m)
    literals = _literals(m, inputs)
    values = np.zeros((cycles, len(inputs)), dtype=np.uint64)
    asserted = rng.random(cycles) < plan.reset_probability
    asserted[: plan.reset_cycles] = True
    for j, n in enumerate(inputs):
        w = widths[n]
        if n in clocks:
            continue
        if n in resets:
            active = resets[n] & mask(w)
            inactive = (1 - resets[n]) & mask(w)
            values[:, j] = np.where(asserted, np.uint64(active), np.uint64(inactive))
            continue
        col = _uniform(rng, w, cycles)
        lits = literals.get(n)
        if lits:
            biased = rng.random(cycles) < plan.literal_bias
            picks = rng.choice(np.array(lits, dtype=np.uint64), size=cycles)
            col = np.where(biased, picks, col)
        values[:, j] = col
    if plan.directed:
        solver = _Solver(m, inputs, widths, literals, resets, clocks, rng)
        conds = []
        for block in m.always_blocks:
            try:
                conds.extend(assertsynth.leaf_conditions(block, widths))
            except Exception as exc:  # unsupported statements are reported by the simulator itself
                log.debug("no directed stimulus for a block: %s", exc)
        pos = plan.reset_cycles
        for _ in range(plan.directed_repeats):
            for cond in conds:
                if pos >= cycles:
                    break
                env = solver.solve(cond)
                if env is None:
                    log.debug("could not solve path condition; left to random stimulus")
                    continue
                values[pos] = [env[n] & mask(widths[n]) for n in inputs]
                pos += 2
    return Stimulus(inputs, values)


def simulate(m: RtlModule, plan: StimulusPlan, stimulus: Optional[Stimulus] = None, program: Optional[Program] = None) -> Trace:
    """Simulate ``plan.cycles`` clock cycles of ``m``."""
    program = program or compile_module(m)
    if stimulus is None:
        stimulus = build_stimulus(m, plan, program)
    if tuple(stimulus.inputs) != program.inputs:
        # stimulus built for another module: line up by name, zero for anything missing
        cols = {n: j for j, n in enumerate(stimulus.inputs)}
        vals = np.zeros((stimulus.values.shape[0], len(program.inputs)), dtype=np.uint64)
        for j, n in enumerate(program.inputs):
            if n in cols:
                vals[:, j] = stimulus.values[:, cols[n]] & np.uint64(mask(program.widths[program.slot(n)]))
        stim = vals
    else:
        stim = stimulus.values
    stim = np.ascontiguousarray(stim[: plan.cycles], dtype=np.uint64)
    pre, post, status = kernels.run_sim(
        np.ascontiguousarray(program.comb),
        np.ascontiguousarray(program.seq),
        program.init,
        program.n_signals,
        stim,
        np.ascontiguousarray(program.input_slots),
    )
    if status != 0:
        raise CombLoopDetected(f"combinational logic did not settle within 16 iterations in module {m.name!r}")
    return Trace(program.names, program.widths, pre, post)


def elaborate(m: RtlModule) -> Program:
    return compile_module(m)


__all__ = [
    "Stimulus",
    "StimulusPlan",
    "Trace",
    "build_stimulus",
    "clock_signals",
    "elaborate",
    "reset_signals",
    "simulate",
]
