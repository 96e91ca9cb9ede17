"""Minimal conditional-compilation pass (`ifdef/`ifndef/`elsif/`else/`endif)."""
from __future__ import annotations

import re
from typing import Iterable, List, Tuple

from vert.errors import UnterminatedIfdef
from vert.hdl.ast import IfdefRegion

_DIRECTIVE = re.compile(r"^\s*`(\w+)\b\s*(\w*)")
_CONDITIONAL = {"ifdef", "ifndef", "elsif", "else", "endif"}


def normalize_source(src) -> str:
    """Decode bytes as UTF-8 (lossy) and normalise line endings to ``\\n``."""
    if isinstance(src, (bytes, bytearray)):
        src = bytes(src).decode("utf-8", errors="replace")
    return src.replace("\r\n", "\n").replace("\r", "\n")


def _lines(src: str) -> List[Tuple[int, str]]:
    out, pos = [], 0
    for line in src.split("\n"):
        out.append((pos, line))
        pos += len(line) + 1
    return out


def preprocess(src: str, defines: Iterable[str] = (), keep_offsets: bool = False) -> str:
    """Resolve conditional directives against ``defines``.

    Kept lines pass through unchanged and directive lines are removed. With
    ``keep_offsets`` every dropped character except newlines becomes a space,
    so byte offsets into the result match offsets into ``src``.
    """
    kept, _ = _run(normalize_source(src), set(defines), keep_offsets)
    return kept


def ifdef_regions(src: str) -> Tuple[IfdefRegion, ...]:
    """Every `ifdef/`ifndef region in ``src`` with its then/else byte spans."""
    _, regions = _run(normalize_source(src), set(), True)
    return tuple(regions)


def _run(src, defines, keep_offsets):
    out: List[str] = []
    # stack entries: [parent_active, taken, active, macro, then_start, then_end, else_start, line_no]
    stack: List[list] = []
    regions: List[IfdefRegion] = []
    active = True
    for line_no, (pos, line) in enumerate(_lines(src)):
        m = _DIRECTIVE.match(line)
        word = m.group(1) if m else None
        if word in _CONDITIONAL:
            arg = m.group(2)
            end_of_line = pos + len(line)
            if word in ("ifdef", "ifndef"):
                cond = (arg in defines) == (word == "ifdef")
                stack.append([active, cond, active and cond, arg, end_of_line + 1, None, None, line_no])
                active = active and cond
            elif not stack:
                raise UnterminatedIfdef(f"`{word} without matching `ifdef on line {line_no + 1}")
            elif word == "elsif":
                top = stack[-1]
                if top[5] is None:
                    top[5] = pos
                cond = arg in defines and not top[1]
                top[1] = top[1] or cond
                top[2] = top[0] and cond
                active = top[2]
            elif word == "else":
                top = stack[-1]
                if top[5] is None:
                    top[5] = pos
                top[6] = end_of_line + 1
                cond = not top[1]
                top[1] = True
                top[2] = top[0] and cond
                active = top[2]
            else:
                top = stack.pop()
                then_end = top[5] if top[5] is not None else pos
                else_span = (top[6], pos) if top[6] is not None else None
                regions.append(IfdefRegion(top[3], (top[4], then_end), else_span))
                active = top[0]
            if keep_offsets:
                out.append(" " * len(line))
            continue
        if m and word is not None and m.group(0).lstrip().startswith("`") and word in (
            "define", "undef", "include", "timescale", "default_nettype", "resetall",
        ):
            if keep_offsets:
                out.append(" " * len(line))
            continue
        if active:
            out.append(line)
        elif keep_offsets:
            out.append(" " * len(line))
    if stack:
        raise UnterminatedIfdef(f"`ifdef {stack[-1][3]} opened on line {stack[-1][7] + 1} is never closed")
    regions.sort(key=lambda r: r.then_span)
    return "\n".join(out), regions
