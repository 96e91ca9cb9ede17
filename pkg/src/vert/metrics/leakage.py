"""Byte-level n-gram Jaccard overlap between corpora (data leakage check)."""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import FrozenSet, Iterable, Optional, Tuple, Union

import numpy as np

from vert.dynsem import kernels

DEFAULT_N = 13
SEPARATOR = b"\x00"
PACKED_MAX_N = 16

_K1 = np.uint64(0x9E3779B97F4A7C15)
_K2 = np.uint64(0xBF58476D1CE4E5B9)


def _hash(hi: np.ndarray, lo: np.ndarray) -> np.ndarray:
    h = lo ^ (hi * _K1)
    h ^= h >> np.uint64(31)
    return h * _K2


def _unique_packed(hi: np.ndarray, lo: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Distinct (hi, lo) pairs, found by sorting 64-bit hashes.

    Equal hashes are checked against the full gram; any collision falls back
    to an exact lexicographic sort, so the result never depends on the hash.
    """
    if len(lo) == 0:
        return hi, lo
    if not hi.any():
        u = np.unique(lo)
        return np.zeros(len(u), dtype=np.uint64), u
    h = _hash(hi, lo)
    order = np.argsort(h, kind="stable")
    hs, his, los = h[order], hi[order], lo[order]
    same_hash = hs[1:] == hs[:-1]
    same_gram = (his[1:] == his[:-1]) & (los[1:] == los[:-1])
    if np.any(same_hash & ~same_gram):
        order = np.lexsort((lo, hi))
        his, los = hi[order], lo[order]
        same_gram = (his[1:] == his[:-1]) & (los[1:] == los[:-1])
    keep = np.ones(len(los), dtype=bool)
    keep[1:] = ~same_gram
    return his[keep], los[keep]


@dataclass(frozen=True, eq=False)
class NGramSet:
    """Distinct n-grams of a byte sequence.

    For ``n <= 16`` each gram is packed exactly into two 64-bit words; larger
    ``n`` keeps the raw bytes.
    """

    n: int
    hi: Optional[np.ndarray] = None
    lo: Optional[np.ndarray] = None
    raw: Optional[FrozenSet[bytes]] = None

    def __len__(self) -> int:
        return len(self.raw) if self.raw is not None else len(self.lo)

    def grams(self) -> FrozenSet[bytes]:
        if self.raw is not None:
            return self.raw
        out = set()
        n_hi = max(self.n - 8, 0)
        n_lo = self.n - n_hi
        for h, l in zip(self.hi.tolist(), self.lo.tolist()):
            out.add((h.to_bytes(8, "big")[8 - n_hi :] if n_hi else b"") + l.to_bytes(8, "big")[8 - n_lo :])
        return frozenset(out)

    def __contains__(self, gram: bytes) -> bool:
        return bytes(gram) in self.grams()


def ngrams(data: Union[bytes, bytearray, memoryview], n: int = DEFAULT_N) -> NGramSet:
    if n < 1:
        raise ValueError("n must be >= 1")
    data = bytes(data)
    if n > PACKED_MAX_N:
        return NGramSet(n, raw=frozenset(data[i : i + n] for i in range(len(data) - n + 1)))
    hi, lo = kernels.pack_grams(np.frombuffer(data, dtype=np.uint8), n)
    hi, lo = _unique_packed(np.asarray(hi), np.asarray(lo))
    return NGramSet(n, hi=hi, lo=lo)


@dataclass(frozen=True)
class OverlapReport:
    score: Fraction
    size_a: int
    size_b: int
    intersection: int
    union: int
    degenerate: bool
    n: int = DEFAULT_N

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "score": float(self.score),
            "score_exact": f"{self.score.numerator}/{self.score.denominator}",
            "size_a": self.size_a,
            "size_b": self.size_b,
            "intersection": self.intersection,
            "union": self.union,
            "degenerate": self.degenerate,
        }


def jaccard(a: NGramSet, b: NGramSet) -> OverlapReport:
    if a.n != b.n:
        raise ValueError("n-gram sets use different n")
    if a.raw is not None:
        inter = len(a.raw & b.raw)
        union = len(a.raw | b.raw)
    else:
        _, both = _unique_packed(np.concatenate([a.hi, b.hi]), np.concatenate([a.lo, b.lo]))
        union = len(both)
        inter = len(a) + len(b) - union
    if union == 0:
        return OverlapReport(Fraction(0), len(a), len(b), 0, 0, True, a.n)
    return OverlapReport(Fraction(inter, union), len(a), len(b), inter, union, False, a.n)


def overlap(a: bytes, b: bytes, n: int = DEFAULT_N) -> OverlapReport:
    """Jaccard similarity of the n-gram sets of two byte sequences."""
    return jaccard(ngrams(a, n), ngrams(b, n))


def corpus_files(root) -> list:
    """Regular files under ``root`` (or ``root`` itself), sorted by path."""
    root = Path(root)
    if root.is_file():
        return [root]
    files = []
    for dirpath, _, names in os.walk(root):
        for name in names:
            p = Path(dirpath) / name
            if p.is_file():
                files.append(p)
    return sorted(files, key=lambda p: str(p.relative_to(root)))


def corpus_bytes(paths: Union[str, os.PathLike, Iterable]) -> bytes:
    """Files in sorted path order joined by a single 0x00 byte."""
    if isinstance(paths, (str, os.PathLike)):
        files = corpus_files(paths)
    else:
        files = sorted((Path(p) for p in paths), key=str)
    return SEPARATOR.join(p.read_bytes() for p in files)


__all__ = [
    "DEFAULT_N",
    "NGramSet",
    "OverlapReport",
    "corpus_bytes",
    "corpus_files",
    "jaccard",
    "ngrams",
    "overlap",
]
