"""Audio loading, int16 serialization and edge-silence trimming."""

from __future__ import annotations

import os
import wave
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyInputError,
    MalformedHeaderError,
    MissingFileError,
    MissingRateError,
    UnsupportedFormatError,
)

FORMATS = ("wav_pcm16", "raw_pcm16")
INT16_SCALE = 32768.0


@dataclass(frozen=True)
class AudioBuffer:
    """Mono samples in [-1, 1] plus their sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if samples.size and (np.abs(samples).max() > 1.0 or not np.isfinite(samples).all()):
            raise ValueError("samples must be finite and lie in [-1.0, 1.0]")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.size

    @property
    def duration(self):
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class TrimReport:
    leading_samples_removed: int
    trailing_samples_removed: int
    threshold_db: float
    all_silent: bool = False

    @property
    def status(self):
        return "all_silent" if self.all_silent else "ok"


def _from_int16(raw: bytes) -> np.ndarray:
    ints = np.frombuffer(raw, dtype="<i2")
    return ints.astype(np.float64) / INT16_SCALE


def to_int16(samples) -> np.ndarray:
    """Quantize [-1, 1] floats to int16 with rounding and clipping."""
    scaled = np.rint(np.asarray(samples, dtype=np.float64) * INT16_SCALE)
    return np.clip(scaled, -32768, 32767).astype("<i2")


def load_audio(path, format="wav_pcm16", sample_rate_hint=None) -> AudioBuffer:
    """Read a mono 16-bit PCM file.

    ``raw_pcm16`` is a headerless little-endian int16 stream and needs
    ``sample_rate_hint``. For wav files the header rate wins.
    """
    if format not in FORMATS:
        raise UnsupportedFormatError(f"unknown audio format {format!r}")
    if not os.path.isfile(path):
        raise MissingFileError(f"no such file: {path}")

    if format == "raw_pcm16":
        if sample_rate_hint is None:
            raise MissingRateError("raw_pcm16 input needs a sample rate hint")
        with open(path, "rb") as fh:
            raw = fh.read()
        if len(raw) % 2:
            raise MalformedHeaderError(f"{path}: odd byte count for int16 stream")
        return AudioBuffer(_from_int16(raw), int(sample_rate_hint))

    try:
        with wave.open(os.fspath(path), "rb") as wf:
            channels = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        # the stdlib reader rejects non-PCM format codes with this message
        if "unknown format" in str(exc):
            raise UnsupportedFormatError(f"{path}: {exc}") from exc
        raise MalformedHeaderError(f"{path}: {exc}") from exc
    except EOFError as exc:
        raise MalformedHeaderError(f"{path}: truncated header") from exc

    if channels != 1:
        raise UnsupportedFormatError(f"{path}: expected mono, got {channels} channels")
    if width != 2:
        raise UnsupportedFormatError(f"{path}: expected 16-bit samples, got {8 * width}-bit")
    if rate <= 0:
        raise MalformedHeaderError(f"{path}: invalid sample rate {rate}")
    return AudioBuffer(_from_int16(raw), rate)


def write_audio(buf: AudioBuffer, path, format="wav_pcm16"):
    """Write ``buf`` as 16-bit PCM (wav or raw)."""
    if format not in FORMATS:
        raise UnsupportedFormatError(f"unknown audio format {format!r}")
    payload = to_int16(buf.samples).tobytes()
    if format == "raw_pcm16":
        with open(path, "wb") as fh:
            fh.write(payload)
        return
    with wave.open(os.fspath(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(buf.sample_rate)
        wf.writeframes(payload)


def window_rms(samples: np.ndarray, window: int) -> np.ndarray:
    """RMS of consecutive non-overlapping windows; the last one may be short."""
    n = samples.size
    n_full = n // window
    rms = []
    if n_full:
        blocks = samples[: n_full * window].reshape(n_full, window)
        rms.append(np.sqrt(np.mean(blocks**2, axis=1)))
    if n % window:
        rms.append(np.sqrt(np.mean(samples[n_full * window:] ** 2, keepdims=True)))
    return np.concatenate(rms)


def trim_silence(buf: AudioBuffer, threshold_db=30.0, window_ms=20.0):
    """Drop leading and trailing windows that sit more than ``threshold_db``
    below the loudest window's RMS.

    Interior windows are never touched, so the result is always a
    contiguous slice of the input. If every window is silent the returned
    buffer is empty and ``report.all_silent`` is set.
    """
    if threshold_db <= 0:
        raise ValueError("threshold_db must be positive")
    if window_ms <= 0:
        raise ValueError("window_ms must be positive")
    n = len(buf)
    if n == 0:
        raise EmptyInputError("cannot trim an empty buffer")

    window = max(1, int(round(window_ms * buf.sample_rate / 1000.0)))
    rms = window_rms(buf.samples, window)
    peak = rms.max()
    if peak == 0.0:
        report = TrimReport(n, 0, float(threshold_db), all_silent=True)
        return AudioBuffer(np.zeros(0), buf.sample_rate), report

    floor = peak * 10.0 ** (-threshold_db / 20.0)
    loud = np.flatnonzero(rms >= floor)
    first, last = int(loud[0]), int(loud[-1])
    start = first * window
    stop = min(n, (last + 1) * window)
    report = TrimReport(start, n - stop, float(threshold_db))
    return AudioBuffer(buf.samples[start:stop], buf.sample_rate), report
