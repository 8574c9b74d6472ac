"""Greedy and beam-search decoding over a token posterior source.

A source maps a prefix of token ids (starting with ``sos``) to a vector of
natural-log probabilities over the vocabulary. :class:`MockModel` is a
table-driven source for tests and the command line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .errors import NegativeProbabilityError, SourceFailureError, ZeroBeamError
from .text import EOS_ID, SOS_ID


class PosteriorSource(Protocol):
    vocab_size: int
    max_len: int
    sos: int
    eos: int

    def log_probs(self, prefix: tuple) -> np.ndarray: ...


@dataclass(frozen=True)
class Hypothesis:
    tokens: tuple
    log_prob: float = 0.0
    finished: bool = False

    @property
    def length(self):
        """Number of emitted tokens, sos excluded."""
        return len(self.tokens) - 1

    def score(self, length_norm=False):
        if length_norm and self.length:
            return self.log_prob / self.length
        return self.log_prob


@dataclass
class MockModel:
    """Posterior table keyed by token-id tuples.

    A query uses the entry for the longest key that is a suffix of the
    prefix, so a key may be a full prefix (``(sos, a)``) or a bounded-order
    context (``(a,)``). Prefixes with no matching key get the uniform vector.
    """

    vocab_size: int
    table: dict = field(default_factory=dict)
    max_len: int = 10
    sos: int = SOS_ID
    eos: int = EOS_ID

    def __post_init__(self):
        if self.vocab_size < 1:
            raise ValueError("vocab_size must be positive")
        normalized = {}
        for key, probs in self.table.items():
            probs = np.asarray(probs, dtype=np.float64)
            if probs.shape != (self.vocab_size,):
                raise ValueError(f"entry {key} has {probs.size} probabilities, expected {self.vocab_size}")
            if np.any(probs < 0):
                raise NegativeProbabilityError(f"entry {key} has negative probabilities")
            total = probs.sum()
            if total <= 0:
                raise NegativeProbabilityError(f"entry {key} has zero total mass")
            normalized[tuple(int(t) for t in key)] = probs / total
        self.table = normalized
        self._order = max((len(k) for k in normalized), default=0)

    def probs(self, prefix) -> np.ndarray:
        prefix = tuple(prefix)
        for n in range(min(self._order, len(prefix)), -1, -1):
            key = prefix[len(prefix) - n:]
            if key in self.table:
                return self.table[key]
        return np.full(self.vocab_size, 1.0 / self.vocab_size)

    def log_probs(self, prefix) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.probs(prefix))


def mock_from_table(entries, vocab_size=None, **kwargs) -> MockModel:
    if vocab_size is None:
        if not entries:
            raise ValueError("vocab_size is required for an empty table")
        vocab_size = len(next(iter(entries.values())))
    return MockModel(vocab_size, dict(entries), **kwargs)


def _step(src: PosteriorSource, tokens):
    try:
        lp = np.asarray(src.log_probs(tuple(tokens)), dtype=np.float64)
    except Exception as exc:  # noqa: BLE001 - any source error is reported uniformly
        raise SourceFailureError(f"source failed on prefix {tuple(tokens)}: {exc}") from exc
    if lp.shape != (src.vocab_size,) or np.isnan(lp).any():
        raise SourceFailureError(f"source returned an invalid vector for prefix {tuple(tokens)}")
    return lp


def greedy_decode(src: PosteriorSource) -> Hypothesis:
    tokens = [src.sos]
    total = 0.0
    while len(tokens) - 1 < src.max_len:
        lp = _step(src, tokens)
        best = int(np.argmax(lp))  # first index on ties
        tokens.append(best)
        total += float(lp[best])
        if best == src.eos:
            return Hypothesis(tuple(tokens), total, True)
    return Hypothesis(tuple(tokens), total, False)


def _rank_key(h: Hypothesis, length_norm):
    return (-h.score(length_norm), h.tokens)


def beam_decode(src: PosteriorSource, k: int, length_norm=False) -> list[Hypothesis]:
    """Beam search of width ``k``.

    Every live hypothesis is expanded by every token; the best ``k``
    expansions survive, and those ending in eos move to the finished pool.
    Search ends when no live hypothesis remains, ``max_len`` is reached, or
    ``k`` hypotheses have finished and (without length normalisation) no live
    one can still beat the worst of them. Returns finished hypotheses if any,
    otherwise live ones, best first.
    """
    if k < 1:
        raise ZeroBeamError(f"beam width must be >= 1, got {k}")
    live = [Hypothesis((src.sos,))]
    finished = []
    for _ in range(src.max_len):
        candidates = []
        for hyp in live:
            lp = _step(src, hyp.tokens)
            for token in range(src.vocab_size):
                candidates.append(Hypothesis(hyp.tokens + (token,), hyp.log_prob + float(lp[token]),
                                             token == src.eos))
        candidates.sort(key=lambda h: _rank_key(h, length_norm))
        live = []
        for hyp in candidates[:k]:
            (finished if hyp.finished else live).append(hyp)
        if not live:
            break
        if len(finished) >= k:
            if length_norm:
                break
            finished.sort(key=lambda h: _rank_key(h, False))
            # extending a hypothesis only lowers its log probability
            if live[0].log_prob <= finished[k - 1].log_prob:
                break
    pool = finished if finished else live
    return sorted(pool, key=lambda h: _rank_key(h, length_norm))[:k]


def rescore(src: PosteriorSource, tokens) -> float:
    """Independent log probability of a full token sequence under ``src``."""
    tokens = tuple(tokens)
    total = 0.0
    for i in range(1, len(tokens)):
        total += float(_step(src, tokens[:i])[tokens[i]])
    return total


def load_mock_model(path, max_len=10, sos=SOS_ID, eos=EOS_ID) -> MockModel:
    """Parse ``prefix_tokens -> p_0 p_1 ... p_{V-1}`` lines; ``#`` starts a comment."""
    entries = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "->" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'prefix -> probabilities'")
            lhs, rhs = line.split("->", 1)
            try:
                key = tuple(int(t) for t in lhs.split())
                probs = [float(p) for p in rhs.split()]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            entries[key] = probs
    sizes = {len(p) for p in entries.values()}
    if len(sizes) > 1:
        raise ValueError(f"{path}: entries have differing vocabulary sizes {sorted(sizes)}")
    return mock_from_table(entries, max_len=max_len, sos=sos, eos=eos)


def dump_mock_model(model: MockModel, path):
    with open(path, "w", encoding="utf-8") as fh:
        for key, probs in model.table.items():
            fh.write(" ".join(map(str, key)) + " -> " + " ".join(repr(float(p)) for p in probs) + "\n")
