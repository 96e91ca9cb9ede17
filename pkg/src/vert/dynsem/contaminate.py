"""Contamination injection: `ifdef wrappers and dummy instantiations.

Each `ifdef SYNTH_<i> wrapper holds a copy of a randomly chosen statement and
is placed directly after that statement, so with no macros defined the
preprocessor drops it and the design is unchanged. Dummy instantiations go
at module-item boundaries, where the parser records and skips them.
"""
from __future__ import annotations

import random
from typing import List, Tuple

from vert.errors import ParseFailure
from vert.hdl.ast import Assign, Block, Case, If, iter_stmts
from vert.hdl.parser import parse_module
from vert.hdl.preprocess import normalize_source


def _statement_sites(module) -> List[Tuple[int, int]]:
    """(start, end) of statements that sit directly inside a begin/end list."""
    slots = set(module.stmt_slots)
    out = []
    for block in module.always_blocks:
        for s in iter_stmts(block.body):
            if isinstance(s, (Assign, If, Case, Block)) and s.span and s.span[1] in slots:
                out.append(s.span)
    return sorted(set(out))


def contaminate(src, k: int, seed: int, instances: int = None) -> str:
    """Insert ``k`` `ifdef wrappers and ``instances`` (default ``k``) dummy instantiations."""
    if k < 0 or (instances is not None and instances < 0):
        raise ValueError("insertion counts must be non-negative")
    n_inst = k if instances is None else instances
    text = normalize_source(src)
    module, diags = parse_module(text)
    if module is None:
        raise ParseFailure("input does not parse as a module", diags)
    if k == 0 and n_inst == 0:
        return text if isinstance(src, str) else text
    rng = random.Random(f"contaminate:{seed}")
    inserts: List[Tuple[int, int, str]] = []  # (offset, order, text)
    sites = _statement_sites(module)
    for i in range(k):
        if sites:
            start, end = sites[rng.randrange(len(sites))]
            body = text[start:end]
            inserts.append((end, len(inserts), f"\n`ifdef SYNTH_{i}\n{body}\n`endif\n"))
        else:
            # no statement list to borrow from: wrap a comment at an item boundary
            at = module.item_slots[rng.randrange(len(module.item_slots))]
            inserts.append((at, len(inserts), f"\n`ifdef SYNTH_{i}\n// SYNTH_{i}\n`endif\n"))
    for i in range(n_inst):
        at = module.item_slots[rng.randrange(len(module.item_slots))]
        inserts.append((at, len(inserts), f"\n  dummy_mod u_dummy_{i} (.a(1'b0));\n"))
    out = text
    for offset, _, piece in sorted(inserts, key=lambda x: (x[0], x[1]), reverse=True):
        out = out[:offset] + piece + out[offset:]
    return out


__all__ = ["contaminate"]
