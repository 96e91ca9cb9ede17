"""Compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--modules 20] [--cycles 1000] [--repeat 3]

Both backends run on identical inputs; the script checks that their outputs
agree before it reports timings.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from vert import identifiers, synthgen
from vert.dynsem import _fallback
from vert.dynsem.compile import compile_module
from vert.dynsem.simulate import StimulusPlan, build_stimulus

try:
    from vert.dynsem import _vm
except ImportError:
    _vm = None


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def sim_cases(n_modules, cycles):
    pool = identifiers.synthesize(400, 11)
    config = synthgen.GenConfig(sample_count=n_modules, pool=pool, seed=11)
    cases = []
    for i, (cat, sync) in enumerate(synthgen.plan_labels(config)):
        m, _ = synthgen.gen_block(cat, sync, pool, synthgen.sample_seed(11, i), config)
        prog = compile_module(m)
        stim = build_stimulus(m, StimulusPlan(cycles=cycles, seed=i), prog)
        cases.append((prog, np.ascontiguousarray(stim.values)))
    return cases


def run_all(kernel, cases):
    return [
        kernel.run_sim(p.comb, p.seq, p.init, p.n_signals, stim, p.input_slots)
        for p, stim in cases
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--modules", type=int, default=20)
    ap.add_argument("--cycles", type=int, default=1000)
    ap.add_argument("--bytes", type=int, default=1 << 20, help="corpus size for n-gram packing")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _vm is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1

    cases = sim_cases(args.modules, args.cycles)
    fast = run_all(_vm, cases)
    slow = run_all(_fallback, cases)
    for (a_pre, a_post, a_st), (b_pre, b_post, b_st) in zip(fast, slow):
        assert a_st == b_st and np.array_equal(a_pre, b_pre) and np.array_equal(a_post, b_post)
    t_fast = _best(lambda: run_all(_vm, cases), args.repeat)
    t_slow = _best(lambda: run_all(_fallback, cases), args.repeat)
    total = args.modules * args.cycles
    print(f"run_sim     {args.modules} modules x {args.cycles} cycles")
    print(f"  cython    {t_fast * 1e3:9.2f} ms  ({total / t_fast:,.0f} cycles/s)")
    print(f"  python    {t_slow * 1e3:9.2f} ms  ({total / t_slow:,.0f} cycles/s)")
    print(f"  speedup   {t_slow / t_fast:9.1f}x")

    data = np.random.default_rng(0).integers(32, 127, size=args.bytes, dtype=np.uint8)
    hi_a, lo_a = _vm.pack_grams(data, 13)
    hi_b, lo_b = _fallback.pack_grams(data, 13)
    assert np.array_equal(hi_a, hi_b) and np.array_equal(lo_a, lo_b)
    t_fast = _best(lambda: _vm.pack_grams(data, 13), args.repeat)
    t_slow = _best(lambda: _fallback.pack_grams(data, 13), args.repeat)
    print(f"pack_grams  {args.bytes:,} bytes, n=13")
    print(f"  cython    {t_fast * 1e3:9.2f} ms")
    print(f"  python    {t_slow * 1e3:9.2f} ms")
    print(f"  speedup   {t_slow / t_fast:9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
