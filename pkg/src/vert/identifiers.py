"""Identifier pools: mining from RTL, cleaning, synthetic names, and deliberate corruption."""
from __future__ import annotations

import logging
import math
import random
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Tuple

from vert.errors import EmptyPool
from vert.hdl.lexer import KEYWORDS
from vert.hdl.parser import declared_names

log = logging.getLogger(__name__)

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*\Z")

# assertion-language words that are not in the RTL keyword set
SVA_KEYWORDS = frozenset(
    """
    accept_on checker endchecker eventually global implies let nexttime reject_on
    restrict s_always s_eventually s_nexttime s_until s_until_with strong sync_accept_on
    sync_reject_on until until_with untyped weak
    """.split()
)
RESERVED = KEYWORDS | SVA_KEYWORDS

PREFIXES = ("reg", "ctrl", "temp", "cfg", "hw", "core", "chip", "fsm", "tx", "rx", "flag_register")
BASE36 = "0123456789abcdefghijklmnopqrstuvwxyz"
CORRUPT_CHARS = "-!#@"
CORRUPT_MODES = ("invalid_chars", "duplicates", "inconsistent")


def is_valid_name(name: str) -> bool:
    return bool(NAME_RE.match(name)) and name not in RESERVED


@dataclass(frozen=True)
class IdentifierPool:
    entries: Tuple[Tuple[str, str], ...] = ()
    deduplicated: bool = False
    validated: bool = False
    consistent: bool = False
    # (path, reason) for files that failed to parse during mining
    failures: Tuple[Tuple[str, str], ...] = field(default=(), compare=False)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.entries)

    def __len__(self):
        return len(self.entries)

    def source_counts(self) -> Counter:
        """Entries per source tag (the histogram of mined names per project file)."""
        return Counter(src for _, src in self.entries)

    @property
    def is_clean(self) -> bool:
        return self.deduplicated and self.validated and self.consistent

    def to_text(self) -> str:
        lines = [
            "# identifier pool",
            f"# flags: deduplicated={int(self.deduplicated)} validated={int(self.validated)} "
            f"consistent={int(self.consistent)}",
        ]
        current = None
        for name, src in self.entries:
            if src != current:
                lines.append(f"# source: {src}")
                current = src
            lines.append(name)
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def from_text(cls, text: str) -> "IdentifierPool":
        entries = []
        flags = {"deduplicated": False, "validated": False, "consistent": False}
        source = "file"
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("source:"):
                    source = body[len("source:"):].strip()
                elif body.startswith("flags:"):
                    for part in body[len("flags:"):].split():
                        key, _, value = part.partition("=")
                        if key in flags:
                            flags[key] = value == "1"
                continue
            entries.append((line, source))
        return cls(tuple(entries), **flags)

    @classmethod
    def load(cls, path) -> "IdentifierPool":
        return cls.from_text(Path(path).read_text(encoding="utf-8", errors="replace"))


@dataclass(frozen=True)
class CleanSummary:
    invalid: int = 0
    duplicate: int = 0
    inconsistent: int = 0

    @property
    def total(self) -> int:
        return self.invalid + self.duplicate + self.inconsistent


def mine(paths: Iterable) -> IdentifierPool:
    """Declared port and signal names from every file, in sorted path order.

    Files that fail to parse are skipped and listed in ``failures``.
    """
    entries: List[Tuple[str, str]] = []
    failures = []
    for path in sorted(str(p) for p in paths):
        try:
            text = Path(path).read_bytes()
        except OSError as exc:
            failures.append((path, str(exc)))
            log.warning("cannot read %s: %s", path, exc)
            continue
        names, diags = declared_names(text)
        if names is None:
            errs = [d for d in diags if d.severity == "error"]
            failures.append((path, str(errs[0]) if errs else "parse failure"))
            log.warning("skipping %s: %s", path, failures[-1][1])
            continue
        entries.extend((n, f"mined:{path}") for n in names)
    return IdentifierPool(tuple(entries), failures=tuple(failures))


def clean(
    pool: IdentifierPool,
    *,
    keep_invalid: bool = False,
    keep_duplicates: bool = False,
    keep_inconsistent: bool = False,
) -> Tuple[IdentifierPool, CleanSummary]:
    """Drop invalid names, later duplicates and case-only variants; order is kept.

    The ``keep_*`` switches disable single rules (for ablation pools); the
    matching cleanliness flag is then left false.
    """
    kept = []
    seen = set()
    seen_folded = set()
    invalid = duplicate = inconsistent = 0
    for name, src in pool.entries:
        if not keep_invalid and not is_valid_name(name):
            invalid += 1
        elif not keep_duplicates and name in seen:
            duplicate += 1
        elif not keep_inconsistent and name.lower() in seen_folded and name not in seen:
            inconsistent += 1
        else:
            kept.append((name, src))
            seen.add(name)
            seen_folded.add(name.lower())
    out = IdentifierPool(
        tuple(kept),
        deduplicated=not keep_duplicates,
        validated=not keep_invalid,
        consistent=not keep_inconsistent,
        failures=pool.failures,
    )
    return out, CleanSummary(invalid, duplicate, inconsistent)


def synthesize(n: int, seed: int) -> IdentifierPool:
    """``n`` distinct names of the form ``<prefix>_<1-3 base-36 chars>``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    capacity = len(PREFIXES) * sum(36 ** k for k in (1, 2, 3))
    if n > capacity:
        raise ValueError(f"cannot synthesize {n} distinct names (capacity {capacity})")
    rng = random.Random(seed)
    seen = set()
    names = []
    while len(names) < n:
        prefix = rng.choice(PREFIXES)
        length = rng.randint(1, 3)
        suffix = "".join(rng.choice(BASE36) for _ in range(length))
        name = f"{prefix}_{suffix}"
        if name in seen:
            continue
        seen.add(name)
        names.append(name)
    return IdentifierPool(tuple((nm, "synthetic") for nm in names), True, True, True)


def _count(rate, n: int) -> int:
    r = Fraction(str(rate)) if isinstance(rate, float) else Fraction(rate)
    if not 0 <= r <= 1:
        raise ValueError("rate must lie in [0, 1]")
    return math.ceil(r * n)


def corrupt(pool: IdentifierPool, mode: str, rate, seed: int) -> IdentifierPool:
    """Add ``ceil(rate * n)`` corrupted copies of randomly chosen names.

    Corrupted copies are inserted after their originals, so :func:`clean`
    always recovers the original name set.
    """
    if mode not in CORRUPT_MODES:
        raise ValueError(f"unknown corruption mode {mode!r}")
    n = len(pool.entries)
    k = _count(rate, n)
    if n == 0 and _count(rate, 1):
        raise EmptyPool("cannot corrupt an empty pool")
    if k == 0:
        return pool
    rng = random.Random(f"{seed}:{mode}")
    chosen = sorted(rng.sample(range(n), k))
    entries = list(pool.entries)
    inserts = []  # (position, entry); position indexes the original list
    for idx in chosen:
        name, _ = entries[idx]
        if mode == "invalid_chars":
            pos = rng.randint(1, len(name))
            bad = name[:pos] + rng.choice(CORRUPT_CHARS) + name[pos:]
            new = (bad, "corrupt:invalid_chars")
        elif mode == "duplicates":
            new = (name, "corrupt:duplicates")
        else:
            flipped = name.swapcase()
            if flipped == name:
                flipped = name.upper() if name != name.upper() else name.lower()
            new = (flipped, "corrupt:inconsistent")
        inserts.append((rng.randint(idx + 1, n), new))
    out: List[Tuple[str, str]] = []
    by_pos: dict = {}
    for pos, entry in inserts:
        by_pos.setdefault(pos, []).append(entry)
    for i in range(n + 1):
        out.extend(by_pos.get(i, ()))
        if i < n:
            out.append(entries[i])
    flag = {"invalid_chars": "validated", "duplicates": "deduplicated", "inconsistent": "consistent"}[mode]
    return replace(pool, entries=tuple(out), **{flag: False})


__all__ = [
    "CORRUPT_MODES",
    "CleanSummary",
    "IdentifierPool",
    "PREFIXES",
    "clean",
    "corrupt",
    "is_valid_name",
    "mine",
    "synthesize",
]
