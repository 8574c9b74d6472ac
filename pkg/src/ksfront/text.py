"""Transcript cleanup for ETRI-style (KsponSpeech) scripts, Hangul jamo
handling, vocabularies and transcript length statistics."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

from .errors import EmptyCorpusError, EmptyInputError, InvalidSequenceError, UnbalancedParensError

# Hangul syllable block arithmetic
SYLLABLE_BASE = 0xAC00
SYLLABLE_LAST = 0xD7A3
N_MEDIALS = 21
N_FINALS = 28  # index 0 = no final
BLOCK = N_MEDIALS * N_FINALS  # 588

# compatibility jamo (U+3131..), standard Unicode ordering
INITIALS = "ㄱㄲㄴㄷㄸㄹㅁㅂㅃㅅㅆㅇㅈㅉㅊㅋㅌㅍㅎ"
MEDIALS = "ㅏㅐㅑㅒㅓㅔㅕㅖㅗㅘㅙㅚㅛㅜㅝㅞㅟㅠㅡㅢㅣ"
FINALS = "ㄱㄲㄳㄴㄵㄶㄷㄹㄺㄻㄼㄽㄾㄿㅀㅁㅂㅄㅅㅆㅇㅈㅊㅋㅌㅍㅎ"

_INITIAL_IDX = {c: i for i, c in enumerate(INITIALS)}
_MEDIAL_IDX = {c: i for i, c in enumerate(MEDIALS)}
_FINAL_IDX = {c: i + 1 for i, c in enumerate(FINALS)}

SPECIALS = ("<pad>", "<sos>", "<eos>", "<unk>")
PAD_ID, SOS_ID, EOS_ID, UNK_ID = range(4)
UNITS = ("character", "jamo")

_DUAL = re.compile(r"\(([^()]*)\)/\(([^()]*)\)")
_NOISE = re.compile(r"(?<![A-Za-z])[blonu]/")
_SPECIAL = re.compile(r"[+*/]")
_SPACES = re.compile(r"\s+")


@dataclass(frozen=True)
class CleanupRules:
    transcription_choice: str = "spelling"
    strip_noise_markers: bool = True
    strip_special_chars: bool = True
    collapse_whitespace: bool = True

    def __post_init__(self):
        if self.transcription_choice not in ("spelling", "phonetic"):
            raise ValueError("transcription_choice must be 'spelling' or 'phonetic'")


def clean_transcript(raw: str, rules: CleanupRules = CleanupRules()) -> str:
    """Turn an ETRI-convention script into plain ASR text.

    ``(spelling)/(phonetic)`` pairs collapse to the chosen side, noise tags
    such as ``b/`` or ``n/`` are dropped, then ``+ * /`` and extra
    whitespace.
    """
    group = 1 if rules.transcription_choice == "spelling" else 2
    text = raw
    while True:
        replaced = _DUAL.sub(lambda m: m.group(group), text)
        if replaced == text:
            break
        text = replaced
    for pos, ch in enumerate(text):
        if ch in "()":
            raise UnbalancedParensError(f"malformed dual transcription in {raw!r}", pos)
    if rules.strip_noise_markers:
        text = _NOISE.sub("", text)
    if rules.strip_special_chars:
        text = _SPECIAL.sub("", text)
    if rules.collapse_whitespace:
        text = _SPACES.sub(" ", text).strip()
    return text


def decompose_jamo(s: str) -> list[str]:
    out = []
    for ch in s:
        cp = ord(ch)
        if SYLLABLE_BASE <= cp <= SYLLABLE_LAST:
            code = cp - SYLLABLE_BASE
            out.append(INITIALS[code // BLOCK])
            out.append(MEDIALS[(code % BLOCK) // N_FINALS])
            final = code % N_FINALS
            if final:
                out.append(FINALS[final - 1])
        else:
            out.append(ch)
    return out


def compose_jamo(jamos) -> str:
    """Inverse of :func:`decompose_jamo` on its image.

    A consonant after an initial+medial pair is read as the final unless a
    medial follows it, in which case it starts the next syllable.
    """
    jamos = list(jamos)
    out = []
    i, n = 0, len(jamos)
    while i < n:
        ch = jamos[i]
        if ch in _INITIAL_IDX and i + 1 < n and jamos[i + 1] in _MEDIAL_IDX:
            code = _INITIAL_IDX[ch] * BLOCK + _MEDIAL_IDX[jamos[i + 1]] * N_FINALS
            i += 2
            if i < n and jamos[i] in _FINAL_IDX and not (i + 1 < n and jamos[i + 1] in _MEDIAL_IDX):
                code += _FINAL_IDX[jamos[i]]
                i += 1
            out.append(chr(SYLLABLE_BASE + code))
        elif ch in _INITIAL_IDX or ch in _MEDIAL_IDX or ch in _FINAL_IDX:
            raise InvalidSequenceError(f"dangling jamo {ch!r} at position {i}")
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def tokenize(text: str, unit="character") -> list[str]:
    if unit == "character":
        return list(text)
    if unit == "jamo":
        return decompose_jamo(text)
    raise ValueError(f"unknown unit {unit!r}; expected one of {UNITS}")


@dataclass
class Vocabulary:
    id_to_token: list
    unit: str = "character"

    def __post_init__(self):
        if tuple(self.id_to_token[:4]) != SPECIALS:
            raise ValueError("vocabulary must start with the special tokens")
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self):
        return len(self.id_to_token)

    def encode(self, text: str) -> list[int]:
        return [self.token_to_id.get(t, UNK_ID) for t in tokenize(text, self.unit)]

    def decode(self, ids, strip_specials=True) -> str:
        tokens = [self.id_to_token[i] for i in ids]
        if strip_specials:
            tokens = [t for t in tokens if t not in SPECIALS]
        return compose_jamo(tokens) if self.unit == "jamo" else "".join(tokens)

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for token in self.id_to_token:
                fh.write(token + "\n")

    @classmethod
    def load(cls, path, unit="character"):
        with open(path, encoding="utf-8", newline="\n") as fh:
            tokens = [line[:-1] if line.endswith("\n") else line for line in fh]
        return cls(tokens, unit)


def build_vocab(corpus, unit="character") -> Vocabulary:
    """Tokens by descending frequency, ties by code point, after the four specials."""
    counts = Counter()
    n_lines = 0
    for line in corpus:
        counts.update(tokenize(line, unit))
        n_lines += 1
    if not n_lines:
        raise EmptyCorpusError("cannot build a vocabulary from an empty corpus")
    ordered = sorted(counts, key=lambda t: (-counts[t], t))
    return Vocabulary(list(SPECIALS) + ordered, unit)


@dataclass(frozen=True)
class LengthStats:
    count: int
    min: int
    q1: float
    median: float
    q3: float
    max: int
    iqr_outlier_threshold: float


def _median(sorted_vals):
    n = len(sorted_vals)
    mid = n // 2
    if n % 2:
        return float(sorted_vals[mid])
    return (sorted_vals[mid - 1] + sorted_vals[mid]) / 2.0


def corpus_length_stats(lengths) -> LengthStats:
    """Five-number summary with quartiles as medians of the lower/upper halves
    (the middle element excluded for odd counts) and the boxplot whisker
    q3 + 1.5 * IQR."""
    vals = sorted(int(x) for x in lengths)
    if not vals:
        raise EmptyInputError("no lengths given")
    n = len(vals)
    half = n // 2
    lower = vals[:half] or vals
    upper = vals[n - half:] or vals
    q1, q3 = _median(lower), _median(upper)
    return LengthStats(n, vals[0], q1, _median(vals), q3, vals[-1], q3 + 1.5 * (q3 - q1))


def filter_by_length(items, max_len=100, key=len):
    """Keep items whose length is at most ``max_len``."""
    return [item for item in items if key(item) <= max_len]
