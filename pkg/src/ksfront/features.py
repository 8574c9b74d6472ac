"""Spectrogram, mel filterbank and MFCC features as (frames x dims) matrices."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .audio import AudioBuffer
from .dsp import ComplexSpectrum, FrameConfig, WindowSpec, frame_signal, is_pow2, stft
from .errors import (
    BadBandError,
    DimensionMismatchError,
    NegativeFrequencyError,
    NegativeMelError,
    NotPowerOfTwoError,
    RaggedInputError,
    TooManyCepsError,
    TooManyFiltersError,
    WrongKindError,
)

KINDS = (
    "spectrogram",
    "log_spectrogram",
    "mel_spectrogram",
    "log_mel_spectrogram",
    "fbank",
    "mfcc",
)
LOG_KIND = {
    "spectrogram": "log_spectrogram",
    "mel_spectrogram": "log_mel_spectrogram",
    "fbank": "log_mel_spectrogram",
}
NON_NEGATIVE_KINDS = ("spectrogram", "mel_spectrogram", "fbank")
DEFAULT_FLOOR = 1e-10


@dataclass(frozen=True)
class FeatureMatrix:
    data: np.ndarray
    kind: str
    frame_len_ms: float = 0.0
    hop_ms: float = 0.0
    sample_rate: int = 0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"feature data must be 2-D, got shape {data.shape}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if not np.isfinite(data).all():
            raise ValueError("feature matrix contains NaN or infinite entries")
        if self.kind in NON_NEGATIVE_KINDS and data.size and data.min() < 0:
            raise ValueError(f"{self.kind} entries must be non-negative")
        object.__setattr__(self, "data", data)

    @property
    def n_frames(self):
        return self.data.shape[0]

    @property
    def feature_dim(self):
        return self.data.shape[1]

    def with_data(self, data, kind=None):
        return replace(self, data=data, kind=kind or self.kind)


def hz_to_mel(f):
    f = np.asarray(f, dtype=np.float64)
    if np.any(f < 0):
        raise NegativeFrequencyError("frequency must be non-negative")
    m = 2595.0 * np.log10(1.0 + f / 700.0)
    return float(m) if m.ndim == 0 else m


def mel_to_hz(m):
    m = np.asarray(m, dtype=np.float64)
    if np.any(m < 0):
        raise NegativeMelError("mel value must be non-negative")
    f = 700.0 * (10.0 ** (m / 2595.0) - 1.0)
    return float(f) if f.ndim == 0 else f


def power_spectrogram(spectra, **meta) -> FeatureMatrix:
    """|STFT|^2 per frame and bin.

    ``spectra`` is a (T, K) ComplexSpectrum or a sequence of single-frame
    spectra, which must all share one bin count.
    """
    if isinstance(spectra, ComplexSpectrum):
        bins = np.atleast_2d(spectra.bins)
    else:
        spectra = list(spectra)
        if not spectra:
            raise RaggedInputError("no spectra given")
        widths = {np.shape(s.bins if isinstance(s, ComplexSpectrum) else s)[-1] for s in spectra}
        if len(widths) != 1:
            raise RaggedInputError(f"spectra have differing bin counts {sorted(widths)}")
        bins = np.stack([s.bins if isinstance(s, ComplexSpectrum) else np.asarray(s) for s in spectra])
    if bins.shape[0] == 0:
        raise RaggedInputError("no spectra given")
    return FeatureMatrix(bins.real**2 + bins.imag**2, "spectrogram", **meta)


def log_compress(m: FeatureMatrix, floor_eps=DEFAULT_FLOOR) -> FeatureMatrix:
    """Natural log with a floor: ln(max(x, floor_eps))."""
    if m.kind not in LOG_KIND:
        raise WrongKindError(f"cannot log-compress a {m.kind} matrix")
    if floor_eps <= 0:
        raise ValueError("floor_eps must be positive")
    return m.with_data(np.log(np.maximum(m.data, floor_eps)), LOG_KIND[m.kind])


@dataclass(frozen=True)
class MelFilterbank:
    """Triangular filters over FFT bins.

    ``edge_freqs_hz`` holds the B+2 band edges; filter i rises from edge i to
    edge i+1 and falls to edge i+2, with a continuous peak of 1.
    """

    weights: np.ndarray
    edge_freqs_hz: np.ndarray
    f_min_hz: float
    f_max_hz: float
    n_fft: int
    sample_rate: int
    edge_bins: np.ndarray = field(repr=False, default=None)

    @property
    def b_count(self):
        return self.weights.shape[0]

    @property
    def n_bins(self):
        return self.weights.shape[1]

    @property
    def center_bins(self):
        """Fractional FFT-bin position of every filter peak."""
        return self.edge_bins[1:-1]


def build_mel_filterbank(b_count, n_fft, sample_rate, f_min_hz=0.0, f_max_hz=None) -> MelFilterbank:
    nyquist = sample_rate / 2.0
    if f_max_hz is None:
        f_max_hz = nyquist
    if b_count < 1:
        raise ValueError("need at least one filter")
    if not 0 <= f_min_hz < f_max_hz or f_max_hz > nyquist:
        raise BadBandError(f"band [{f_min_hz}, {f_max_hz}] Hz invalid for Nyquist {nyquist} Hz")

    mel_edges = np.linspace(hz_to_mel(f_min_hz), hz_to_mel(f_max_hz), b_count + 2)
    hz_edges = mel_to_hz(mel_edges)
    hz_edges[0], hz_edges[-1] = f_min_hz, f_max_hz
    edge_bins = hz_edges * n_fft / sample_rate

    k = np.arange(n_fft // 2 + 1, dtype=np.float64)
    lo, mid, hi = edge_bins[:-2, None], edge_bins[1:-1, None], edge_bins[2:, None]
    rising = (k - lo) / (mid - lo)
    falling = (hi - k) / (hi - mid)
    weights = np.maximum(0.0, np.minimum(rising, falling))

    empty = np.flatnonzero(weights.max(axis=1) == 0)
    if empty.size:
        raise TooManyFiltersError(
            f"{b_count} filters are too narrow for n_fft={n_fft}: filter {int(empty[0])} covers no FFT bin"
        )
    for a in (weights, hz_edges, edge_bins):
        a.flags.writeable = False
    return MelFilterbank(weights, hz_edges, float(f_min_hz), float(f_max_hz), int(n_fft), int(sample_rate), edge_bins)


def fbank_energies(spec: FeatureMatrix, bank: MelFilterbank, kind="fbank") -> FeatureMatrix:
    if spec.kind != "spectrogram":
        raise WrongKindError(f"filterbank energies need a spectrogram, got {spec.kind}")
    if spec.feature_dim != bank.n_bins:
        raise DimensionMismatchError(f"spectrogram has {spec.feature_dim} bins, filterbank expects {bank.n_bins}")
    return spec.with_data(spec.data @ bank.weights.T, kind)


def dct_basis(n_ceps: int, b_count: int) -> np.ndarray:
    """cos(i*pi/B*(j - 0.5)) for i < n_ceps, j = 1..B."""
    i = np.arange(n_ceps)[:, None]
    j = np.arange(1, b_count + 1)[None, :]
    return np.cos(i * np.pi / b_count * (j - 0.5))


def frame_log_energy(frames, eps=DEFAULT_FLOOR) -> np.ndarray:
    frames = np.asarray(frames, dtype=np.float64)
    return np.log(np.sum(frames**2, axis=1) + eps)


def mfcc(fbank_log: FeatureMatrix, n_ceps=13, append_log_energy=True, frames=None) -> FeatureMatrix:
    """Unnormalised DCT-II of log filterbank energies, optionally followed by a
    log frame-energy column computed from the raw ``frames``."""
    if fbank_log.kind != "log_mel_spectrogram":
        raise WrongKindError(f"mfcc needs log filterbank energies, got {fbank_log.kind}")
    b_count = fbank_log.feature_dim
    if not 1 <= n_ceps <= b_count:
        raise TooManyCepsError(f"n_ceps={n_ceps} must lie in [1, {b_count}]")
    ceps = fbank_log.data @ dct_basis(n_ceps, b_count).T
    if append_log_energy:
        if frames is None:
            raise ValueError("append_log_energy needs the original frames")
        energy = frame_log_energy(frames)
        if energy.shape[0] != ceps.shape[0]:
            raise DimensionMismatchError(f"{energy.shape[0]} frames for {ceps.shape[0]} feature rows")
        ceps = np.column_stack([ceps, energy])
    return fbank_log.with_data(ceps, "mfcc")


@dataclass(frozen=True)
class FeatureParams:
    n_mels: int = 80
    n_ceps: int = 13
    append_log_energy: bool = True
    n_fft: int | None = None
    f_min_hz: float = 0.0
    f_max_hz: float | None = None
    floor_eps: float = DEFAULT_FLOOR


# 13 cepstra + energy over 23 filters, or 40 cepstra over 40 filters
MFCC_PROFILES = {
    "mfcc13e": FeatureParams(n_mels=23, n_ceps=13, append_log_energy=True),
    "mfcc40": FeatureParams(n_mels=40, n_ceps=40, append_log_energy=False),
}


def extract(buf: AudioBuffer, kind: str, cfg: FrameConfig = FrameConfig(), win: WindowSpec = WindowSpec(),
            params: FeatureParams = FeatureParams()) -> FeatureMatrix:
    """Run the full chain for ``kind``:
    frame -> window -> pad -> FFT -> |.|^2 -> [mel] -> [log] -> [DCT]."""
    if kind not in KINDS:
        raise WrongKindError(f"unknown feature kind {kind!r}")
    frame_len = cfg.frame_len_samples(buf.sample_rate)
    n_fft = params.n_fft
    if n_fft is None:
        n_fft = cfg.n_fft(buf.sample_rate)
    elif n_fft < frame_len:
        raise ValueError(f"n_fft={n_fft} is shorter than the {frame_len}-sample frame")
    elif cfg.pad_to_pow2 and not is_pow2(n_fft):
        raise NotPowerOfTwoError(f"n_fft={n_fft} is not a power of two")

    meta = dict(frame_len_ms=cfg.frame_len_ms, hop_ms=cfg.hop_ms, sample_rate=buf.sample_rate)
    spec = power_spectrogram(stft(buf, cfg, win, n_fft), **meta)
    if kind == "spectrogram":
        return spec
    if kind == "log_spectrogram":
        return log_compress(spec, params.floor_eps)

    bank = build_mel_filterbank(params.n_mels, n_fft, buf.sample_rate, params.f_min_hz, params.f_max_hz)
    mel_kind = "fbank" if kind == "fbank" else "mel_spectrogram"
    mel = fbank_energies(spec, bank, mel_kind)
    if kind in ("fbank", "mel_spectrogram"):
        return mel
    log_mel = log_compress(mel, params.floor_eps)
    if kind == "log_mel_spectrogram":
        return log_mel
    frames = frame_signal(buf, cfg) if params.append_log_energy else None
    return mfcc(log_mel, params.n_ceps, params.append_log_energy, frames)
