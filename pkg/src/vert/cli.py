"""Command-line interface: ``vert <command> ...``.

Exit status is 0 on success, 1 when an input fails validation (missing
file, parse error, bad option) and 2 on an internal error. ``--json``
reports go to stdout and are checked against the bundled schemas; logs go
to stderr.

A ``--config FILE`` holds flat ``key = value`` lines whose keys are the
long option names of the chosen command (dashes or underscores); options
given on the command line win.
"""
from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from collections import Counter
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import jsonschema

from vert import __version__, assertsynth, identifiers, synthgen
from vert.dynsem.contaminate import contaminate
from vert.dynsem.mutate import parse_ops
from vert.dynsem.simulate import StimulusPlan
from vert.errors import VertError
from vert.hdl.parser import parse_module
from vert.hdl.printer import pretty_print_properties
from vert.metrics.coverage import coverage_report
from vert.metrics.functional import eval_functional
from vert.metrics.leakage import DEFAULT_N, corpus_bytes, overlap
from vert.metrics.syntax import check_syntax

log = logging.getLogger("vert")

OK, INVALID, INTERNAL = 0, 1, 2


class UsageError(Exception):
    """Bad input or option; reported with exit status 1."""


# ------------------------------------------------------------------ helpers


def _schema(name: str) -> dict:
    text = resources.files("vert").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def emit_json(doc: dict, schema: str, out=None) -> None:
    jsonschema.validate(doc, _schema(schema))
    out = out or sys.stdout
    out.write(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")


def _read(path) -> bytes:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p.read_bytes()


def _write(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def load_module(path, name: Optional[str] = None, defines: Sequence[str] = ()):
    text = _read(path).decode("utf-8", "replace")
    if name is not None:
        hit = re.search(r"\b(?:macro)?module\s+" + re.escape(name) + r"\b", text)
        if hit is None:
            raise UsageError(f"module {name!r} not found in {path}")
        text = text[hit.start():]
    m, diags = parse_module(text, defines)
    if m is None:
        errs = [d for d in diags if d.severity == "error"]
        raise UsageError(f"{path}: {errs[0] if errs else 'parse failure'}")
    return m


def _seed(args) -> int:
    if args.seed is None:
        raise UsageError(f"{args.command} needs --seed")
    return args.seed


def _ratios(text: str):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise UsageError("--ratios needs three comma-separated values")
    try:
        return tuple(Fraction(p) for p in parts)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad --ratios: {exc}") from None


def _pct(x: Fraction) -> str:
    return f"{float(x):.2f}"


# ------------------------------------------------------------------ commands


def cmd_mine_vars(args) -> int:
    pool = identifiers.mine(args.paths)
    raw = len(pool)
    cleaned, summary = identifiers.clean(
        pool,
        keep_invalid=args.keep_invalid,
        keep_duplicates=args.keep_duplicates,
        keep_inconsistent=args.keep_inconsistent,
    )
    cleaned.save(args.out)
    counts = cleaned.source_counts()
    doc = {
        "out": str(args.out),
        "mined": raw,
        "kept": len(cleaned),
        "dropped": {
            "invalid": summary.invalid,
            "duplicate": summary.duplicate,
            "inconsistent": summary.inconsistent,
        },
        "sources": [{"source": k, "count": counts[k]} for k in sorted(counts)],
        "failures": [{"path": p, "reason": r} for p, r in pool.failures],
    }
    if args.json:
        emit_json(doc, "mine")
    else:
        print(f"mined {raw} names, kept {len(cleaned)} -> {args.out}")
    return OK


def cmd_gen(args) -> int:
    seed = _seed(args)
    if args.count < 0:
        raise UsageError("--count must be non-negative")
    if args.vars:
        pool = identifiers.IdentifierPool.load(args.vars)
    else:
        pool = identifiers.synthesize(args.synthetic_vars, seed)
    try:
        config = synthgen.GenConfig(
            sample_count=args.count,
            ratios=_ratios(args.ratios),
            sync_fraction=Fraction(args.sync_ratio),
            max_nesting=args.max_nesting,
            pool=pool,
            seed=seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cats: Counter = Counter()
    n_props = 0
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        for sample in synthgen.assemble(config):
            fh.write(sample.to_json() + "\n")
            cats[(sample.category, sample.sync)] += 1
            n_props += sample.n_assertions
    doc = {
        "out": str(args.out),
        "seed": seed,
        "count": args.count,
        "assertions": n_props,
        "categories": [
            {"category": c, "total": cats[(c, True)] + cats[(c, False)], "sync": cats[(c, True)], "async": cats[(c, False)]}
            for c in synthgen.CATEGORIES
        ],
    }
    if args.json:
        emit_json(doc, "gen")
    else:
        for row in doc["categories"]:
            print(f"{row['category']}: {row['total']} (sync {row['sync']}, async {row['async']})")
        print(f"{args.count} samples, {n_props} assertions -> {args.out}")
    return OK


def cmd_synth(args) -> int:
    m = load_module(args.file, args.module, args.define)
    widths = m.widths()
    props = []
    for block in m.always_blocks:
        pas = assertsynth.synthesize(
            block,
            widths=widths,
            seed=args.seed or 0,
            stability=args.stability,
            delayed=args.delayed and block.is_sequential,
        )
        props.extend(pa.property for pa in pas)
    text = pretty_print_properties(props)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return OK


def _assertions(path):
    return check_syntax(_read(path))


def cmd_check(args) -> int:
    _, report = _assertions(args.file)
    if args.json:
        emit_json(report.to_dict(), "syntax")
    else:
        for u in report.units:
            state = "ok" if u.accepted else "rejected " + ",".join(u.codes)
            print(f"{u.name}: {state} (line {u.line})")
        print(f"generated {report.generated}, syntactically correct {_pct(report.syntactically_correct_pct)}%")
    return OK


def cmd_eval(args) -> int:
    seed = _seed(args)
    m = load_module(args.design, args.module, args.define)
    props, syn = _assertions(args.assertions)
    try:
        ops = parse_ops(args.ops)
        plan = StimulusPlan(cycles=args.cycles, seed=seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    report = eval_functional(m, props, plan, ops, generated=syn.generated)
    if args.json:
        emit_json(report.to_dict(), "eval")
    else:
        for v in report.verdicts:
            state = "correct" if v.functionally_correct else "incorrect: " + "; ".join(v.reasons)
            print(f"{v.name}: {state}")
        print(
            f"generated {report.generated}, syntactic {_pct(report.syntactically_correct_pct)}%, "
            f"functional {_pct(report.functionally_correct_pct)}%, CPC {_pct(report.cpc_pct)}%"
        )
    return OK


def cmd_coverage(args) -> int:
    m = load_module(args.design, args.module, args.define)
    props, _ = _assertions(args.assertions)
    report = coverage_report(m, props)
    if args.json:
        emit_json(report.to_dict(), "coverage")
    else:
        for p in report.paths:
            print(f"[{'x' if p.covered_by else ' '}] {p.condition}" + (f"  <- {p.covered_by}" if p.covered_by else ""))
        print(f"CPC {_pct(report.cpc_pct)}% ({report.covered}/{report.total})")
    return OK


def cmd_leakage(args) -> int:
    for d in (args.a, args.b):
        if not Path(d).exists():
            raise UsageError(f"no such file or directory: {d}")
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    report = overlap(corpus_bytes(args.a), corpus_bytes(args.b), args.n)
    if args.json:
        emit_json(report.to_dict(), "overlap")
    else:
        print(f"{args.n}-gram Jaccard {float(report.score):.6f} ({report.intersection}/{report.union})")
    return OK


def cmd_contaminate(args) -> int:
    seed = _seed(args)
    if args.ifdefs < 0 or args.instances < 0:
        raise UsageError("insertion counts must be non-negative")
    text = contaminate(_read(args.file), args.ifdefs, seed, args.instances)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"vert {__version__}")
    parser.add_argument("--config", help="flat key = value file supplying option defaults")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def design_opts(p):
        p.add_argument("--module", help="module name when the file holds several")
        p.add_argument("-D", "--define", action="append", default=[], help="macro for `ifdef resolution")

    p = sub.add_parser("mine-vars", help="mine and clean an identifier pool from RTL files")
    p.add_argument("paths", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--keep-duplicates", action="store_true")
    p.add_argument("--keep-invalid", action="store_true")
    p.add_argument("--keep-inconsistent", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_mine_vars)

    p = sub.add_parser("gen", help="generate a prompt/response dataset as JSONL")
    p.add_argument("--count", type=int, default=20000)
    p.add_argument("--seed", type=int)
    p.add_argument("--ratios", default="0.52,0.28,0.20", help="if_else,case_stmt,combined")
    p.add_argument("--sync-ratio", default="1/2")
    p.add_argument("--max-nesting", type=int, default=3)
    pool = p.add_mutually_exclusive_group()
    pool.add_argument("--vars", help="identifier pool file")
    pool.add_argument("--synthetic-vars", type=int, default=1000, help="size of a synthetic pool")
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("synth", help="derive oracle assertions from an RTL file")
    p.add_argument("file")
    design_opts(p)
    p.add_argument("--out")
    p.add_argument("--stability", action="store_true", help="add hold properties for untouched signals")
    p.add_argument("--delayed", action="store_true", help="add one-cycle delayed checks on clocked paths")
    p.add_argument("--seed", type=int, help="salt for property names")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("check", help="syntax report for an assertion file")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eval", help="functional grading by simulation and mutation")
    p.add_argument("design")
    p.add_argument("assertions")
    design_opts(p)
    p.add_argument("--cycles", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--ops", help="comma-separated mutation operators (default: all)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("coverage", help="complete path coverage of an assertion file")
    p.add_argument("design")
    p.add_argument("assertions")
    design_opts(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("leakage", help="n-gram Jaccard overlap between two corpora")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--n", type=int, default=DEFAULT_N)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_leakage)

    p = sub.add_parser("contaminate", help="inject `ifdef blocks and dummy instances")
    p.add_argument("file")
    p.add_argument("--ifdefs", type=int, default=10)
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_contaminate)
    return parser


def read_config(path) -> Dict[str, str]:
    out = {}
    for n, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, sep, value = line.partition(":")
        if not sep or not key.strip():
            raise UsageError(f"{path}:{n}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _apply_config(sub: argparse.ArgumentParser, config: Dict[str, str]) -> None:
    """Install config values as defaults of ``sub`` so command-line flags still win."""
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help",)}
    defaults = {}
    for key, value in config.items():
        action = actions.get(key)
        if action is None or not action.option_strings:
            log.debug("config key %r does not apply to this command", key)
            continue
        if isinstance(action, argparse._StoreTrueAction):
            v = value.lower()
            if v not in _TRUE | _FALSE:
                raise UsageError(f"config key {key}: expected a boolean, got {value!r}")
            defaults[key] = v in _TRUE
        elif isinstance(action, argparse._AppendAction):
            defaults[key] = [x.strip() for x in value.split(",") if x.strip()]
        else:
            try:
                defaults[key] = action.type(value) if action.type else value
            except ValueError:
                raise UsageError(f"config key {key}: bad value {value!r}") from None
        action.required = False
    sub.set_defaults(**defaults)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    commands = parser._subparsers._group_actions[0].choices
    try:
        if known.config:
            name = next((a for a in argv if a in commands), None)
            if name is not None:
                _apply_config(commands[name], read_config(known.config))
    except (UsageError, OSError) as exc:
        print(f"vert: {exc}", file=sys.stderr)
        return INVALID
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return OK if exc.code in (0, None) else INVALID
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (UsageError, VertError, OSError, ValueError) as exc:
        print(f"vert {args.command}: {exc}", file=sys.stderr)
        return INVALID
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"vert {args.command}: internal error: {exc!r}", file=sys.stderr)
        return INTERNAL


if __name__ == "__main__":
    sys.exit(main())
