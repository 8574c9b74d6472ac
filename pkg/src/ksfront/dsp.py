"""Framing, analysis windows and a radix-2 FFT.

Power-of-two transforms use an iterative Cooley-Tukey kernel vectorised
over frames. Other lengths (needed when frames are not zero padded, e.g.
a 320-sample frame giving 161 bins) go through Bluestein's chirp-z
algorithm on top of the same kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .audio import AudioBuffer
from .errors import DegenerateLengthError, NotPowerOfTwoError, TooShortError

WINDOW_KINDS = ("hamming_paper", "hamming_standard", "rectangular")
_HAMMING_COEF = {"hamming_paper": 0.45, "hamming_standard": 0.46}


@dataclass(frozen=True)
class FrameConfig:
    frame_len_ms: float = 20.0
    hop_ms: float = 10.0
    pad_to_pow2: bool = True

    def __post_init__(self):
        if self.hop_ms <= 0 or self.frame_len_ms <= 0:
            raise ValueError("frame length and hop must be positive")
        if self.frame_len_ms < self.hop_ms:
            raise ValueError("frame_len_ms must be >= hop_ms")

    def frame_len_samples(self, sample_rate: int) -> int:
        n = int(round(self.frame_len_ms * sample_rate / 1000.0))
        if n < 2:
            raise DegenerateLengthError(f"frame of {self.frame_len_ms} ms is {n} samples at {sample_rate} Hz")
        return n

    def hop_samples(self, sample_rate: int) -> int:
        return max(1, int(round(self.hop_ms * sample_rate / 1000.0)))

    def n_fft(self, sample_rate: int) -> int:
        n = self.frame_len_samples(sample_rate)
        return next_pow2(n) if self.pad_to_pow2 else n


@dataclass(frozen=True)
class WindowSpec:
    kind: str = "hamming_paper"

    def __post_init__(self):
        if self.kind not in WINDOW_KINDS:
            raise ValueError(f"unknown window kind {self.kind!r}; expected one of {WINDOW_KINDS}")

    @property
    def coefficient(self):
        return _HAMMING_COEF.get(self.kind)


@dataclass(frozen=True)
class ComplexSpectrum:
    """Half spectrum of one frame (1-D ``bins``) or of many (frames x bins)."""

    bins: np.ndarray
    n_fft: int

    def __post_init__(self):
        if self.bins.shape[-1] != self.n_fft // 2 + 1:
            raise ValueError(f"expected {self.n_fft // 2 + 1} bins for n_fft={self.n_fft}, got {self.bins.shape[-1]}")

    def __len__(self):
        return self.bins.shape[0] if self.bins.ndim == 2 else 1

    def __getitem__(self, t):
        if self.bins.ndim != 2:
            raise TypeError("single-frame spectrum is not indexable")
        return ComplexSpectrum(self.bins[t], self.n_fft)

    def full(self) -> np.ndarray:
        """Rebuild all ``n_fft`` bins through conjugate symmetry."""
        half = self.bins
        tail = np.conj(half[..., 1:(self.n_fft + 1) // 2][..., ::-1])
        return np.concatenate([half, tail], axis=-1)


def is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n) - 1).bit_length()


def frame_signal(buf: AudioBuffer, cfg: FrameConfig) -> np.ndarray:
    """Slice ``buf`` into overlapping frames, dropping the incomplete tail.

    Returns a (T, N) array where frame t starts at ``t * hop``.
    """
    n = cfg.frame_len_samples(buf.sample_rate)
    hop = cfg.hop_samples(buf.sample_rate)
    length = len(buf)
    if length < n:
        raise TooShortError(f"signal of {length} samples is shorter than one {n}-sample frame")
    count = (length - n) // hop + 1
    return np.lib.stride_tricks.sliding_window_view(buf.samples, n)[::hop][:count].copy()


def make_window(spec: WindowSpec, n: int) -> np.ndarray:
    """w(n) = 0.54 - a*cos(2*pi*n/(N-1)); ``a`` is 0.45 for ``hamming_paper``."""
    if n < 2:
        raise DegenerateLengthError(f"window length must be >= 2, got {n}")
    if spec.kind == "rectangular":
        return np.ones(n)
    idx = np.arange(n)
    # fold onto the first half so w[i] and w[N-1-i] come from the same cosine
    idx = np.minimum(idx, n - 1 - idx)
    return 0.54 - spec.coefficient * np.cos(2.0 * np.pi * idx / (n - 1))


def zero_pad_pow2(frame) -> np.ndarray:
    frame = np.asarray(frame)
    n = frame.shape[-1]
    target = next_pow2(n)
    if target == n:
        return frame
    pad = [(0, 0)] * (frame.ndim - 1) + [(0, target - n)]
    return np.pad(frame, pad)


@lru_cache(maxsize=32)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.flags.writeable = False
    return rev


@lru_cache(maxsize=64)
def _twiddles(size: int) -> np.ndarray:
    tw = np.exp(-2j * np.pi * np.arange(size // 2) / size)
    tw.flags.writeable = False
    return tw


def _fft_pow2(x: np.ndarray) -> np.ndarray:
    """Complex DFT along the last axis; length must be a power of two."""
    n = x.shape[-1]
    lead = x.shape[:-1]
    y = np.asarray(x, dtype=np.complex128)[..., _bit_reversal(n)]
    size = 2
    while size <= n:
        half = size // 2
        y = y.reshape(*lead, n // size, size)
        even = y[..., :half]
        odd = y[..., half:] * _twiddles(size)
        y = np.concatenate([even + odd, even - odd], axis=-1)
        size *= 2
    return y.reshape(*lead, n)


def _ifft_pow2(x: np.ndarray) -> np.ndarray:
    return np.conj(_fft_pow2(np.conj(x))) / x.shape[-1]


@lru_cache(maxsize=16)
def _chirp(n: int):
    k = np.arange(n)
    # reduce k^2 modulo 2n before scaling to keep the phase accurate
    chirp = np.exp(-1j * np.pi * ((k * k) % (2 * n)) / n)
    m = next_pow2(2 * n - 1)
    b = np.zeros(m, dtype=np.complex128)
    b[:n] = np.conj(chirp)
    b[m - n + 1:] = np.conj(chirp[1:])[::-1]
    return chirp, _fft_pow2(b), m


def _fft_any(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    if is_pow2(n):
        return _fft_pow2(x)
    chirp, b_hat, m = _chirp(n)
    a = np.zeros(x.shape[:-1] + (m,), dtype=np.complex128)
    a[..., :n] = x * chirp
    conv = _ifft_pow2(_fft_pow2(a) * b_hat)
    return conv[..., :n] * chirp


def rfft(frames, n_fft: int) -> np.ndarray:
    """Half spectrum (n_fft//2 + 1 bins) of real frames zero padded to ``n_fft``.

    Accepts any ``n_fft`` no smaller than the frame length.
    """
    frames = np.asarray(frames, dtype=np.float64)
    length = frames.shape[-1]
    if length > n_fft:
        raise ValueError(f"frame length {length} exceeds n_fft {n_fft}")
    if length < n_fft:
        pad = [(0, 0)] * (frames.ndim - 1) + [(0, n_fft - length)]
        frames = np.pad(frames, pad)
    return _fft_any(frames)[..., : n_fft // 2 + 1]


def fft_real(frame, n_fft: int) -> ComplexSpectrum:
    """Power-of-two real FFT of one frame (or a stack of frames)."""
    if not is_pow2(n_fft):
        raise NotPowerOfTwoError(f"n_fft={n_fft} is not a power of two")
    return ComplexSpectrum(rfft(frame, n_fft), n_fft)


def stft(buf: AudioBuffer, cfg: FrameConfig, win: WindowSpec, n_fft=None) -> ComplexSpectrum:
    """Frame, window, pad and transform. Returns a (T, n_fft//2+1) spectrum.

    ``n_fft`` defaults to the next power of two when ``cfg.pad_to_pow2``
    and to the frame length otherwise.
    """
    frames = frame_signal(buf, cfg)
    n = frames.shape[1]
    if n_fft is None:
        n_fft = cfg.n_fft(buf.sample_rate)
    elif cfg.pad_to_pow2 and not is_pow2(n_fft):
        raise NotPowerOfTwoError(f"n_fft={n_fft} is not a power of two")
    return ComplexSpectrum(rfft(frames * make_window(win, n), n_fft), n_fft)
