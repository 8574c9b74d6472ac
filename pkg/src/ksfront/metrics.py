"""Levenshtein distance and character error rate."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass

from .errors import EmptyCorpusError, EmptyReferenceError
from .text import tokenize


@dataclass(frozen=True)
class CerResult:
    distance: int
    ref_len: int

    @property
    def cer_percent(self) -> float:
        return 100.0 * self.distance / self.ref_len


def levenshtein(x, y) -> int:
    """Unit-cost edit distance, keeping one DP row of the shorter sequence."""
    if len(x) < len(y):
        x, y = y, x
    prev = list(range(len(y) + 1))
    for i, a in enumerate(x, 1):
        cur = [i]
        for j, b in enumerate(y, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a != b)))
        prev = cur
    return prev[-1]


def _units(text, unit, ignore_spaces):
    text = unicodedata.normalize("NFC", text)
    if ignore_spaces:
        text = "".join(text.split())
    return tokenize(text, unit)


def cer(hyp: str, ref: str, unit="character", ignore_spaces=False) -> CerResult:
    ref_tokens = _units(ref, unit, ignore_spaces)
    if not ref_tokens:
        raise EmptyReferenceError("reference is empty")
    return CerResult(levenshtein(_units(hyp, unit, ignore_spaces), ref_tokens), len(ref_tokens))


def corpus_cer(pairs, unit="character", ignore_spaces=False) -> CerResult:
    """Pooled CER: total distance over total reference length."""
    d_total = l_total = 0
    n = 0
    for n, (hyp, ref) in enumerate(pairs, 1):
        try:
            r = cer(hyp, ref, unit, ignore_spaces)
        except EmptyReferenceError:
            raise EmptyReferenceError("reference is empty", n - 1) from None
        d_total += r.distance
        l_total += r.ref_len
    if not n:
        raise EmptyCorpusError("no hypothesis/reference pairs")
    return CerResult(d_total, l_total)
