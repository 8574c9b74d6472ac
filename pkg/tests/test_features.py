import numpy as np
import pytest

from ksfront.audio import AudioBuffer
from ksfront.dsp import FrameConfig, WindowSpec, fft_real, frame_signal, make_window
from ksfront.errors import (
    BadBandError,
    DimensionMismatchError,
    NegativeFrequencyError,
    NegativeMelError,
    RaggedInputError,
    TooManyCepsError,
    TooManyFiltersError,
    WrongKindError,
)
from ksfront.features import (
    MFCC_PROFILES,
    FeatureMatrix,
    FeatureParams,
    build_mel_filterbank,
    extract,
    fbank_energies,
    hz_to_mel,
    log_compress,
    mel_to_hz,
    mfcc,
    power_spectrogram,
)
from oracles import dct_cosine_sum, filterbank_double_loop

RATE = 16000


def _noise(n=16000, seed=0):
    return AudioBuffer(np.random.default_rng(seed).uniform(-0.5, 0.5, n), RATE)


def test_mel_scale_points():
    assert hz_to_mel(0.0) == 0.0
    assert hz_to_mel(700.0) == pytest.approx(781.172838748, abs=1e-6)
    assert hz_to_mel(8000.0) == pytest.approx(2840.0230467, abs=1e-4)
    assert mel_to_hz(781.17) == pytest.approx(699.99647, abs=1e-3)


def test_mel_round_trip_and_monotone():
    f = np.linspace(0, 8000, 1601)
    np.testing.assert_allclose(mel_to_hz(hz_to_mel(f)), f, atol=1e-9)
    assert np.all(np.diff(hz_to_mel(f)) > 0)
    with pytest.raises(NegativeFrequencyError):
        hz_to_mel(-1.0)
    with pytest.raises(NegativeMelError):
        mel_to_hz(-0.5)


def test_power_spectrogram():
    bins = np.array([[3 + 4j, 1j], [0, -2]])
    out = power_spectrogram([b for b in bins])
    np.testing.assert_array_equal(out.data, [[25, 1], [0, 4]])
    assert out.kind == "spectrogram"
    with pytest.raises(RaggedInputError):
        power_spectrogram([np.zeros(3), np.zeros(4)])


def test_log_compress_floor():
    m = FeatureMatrix(np.array([[0.0, 1.0, 0.6]]), "spectrogram")
    out = log_compress(m)
    np.testing.assert_allclose(out.data, [[np.log(1e-10), 0.0, -0.5108256238]], rtol=1e-9)
    assert out.kind == "log_spectrogram"
    with pytest.raises(WrongKindError):
        log_compress(out)


def test_feature_matrix_validation():
    with pytest.raises(ValueError):
        FeatureMatrix(np.array([[np.nan]]), "log_spectrogram")
    with pytest.raises(ValueError):
        FeatureMatrix(np.array([[-1.0]]), "spectrogram")
    FeatureMatrix(np.array([[-1.0]]), "log_spectrogram")


def test_filterbank_properties():
    bank = build_mel_filterbank(40, 512, RATE)
    w = bank.weights
    assert w.shape == (40, 257)
    assert np.all(w >= 0) and np.all(w <= 1)
    centers = bank.center_bins
    assert np.all(np.diff(centers) > 0)
    for i, c in enumerate(centers):
        near = w[i, int(np.floor(c)):int(np.ceil(c)) + 1]
        assert near.max() >= 0.5
    # each filter covers a contiguous run of bins
    for row in w:
        nz = np.flatnonzero(row)
        assert np.all(np.diff(nz) == 1)
    # centers equally spaced in mel
    mel_c = hz_to_mel(bank.edge_freqs_hz[1:-1])
    assert np.allclose(np.diff(mel_c), np.diff(mel_c)[0])


def test_filterbank_edges_are_band_limits():
    bank = build_mel_filterbank(10, 512, RATE, 100.0, 4000.0)
    assert bank.edge_freqs_hz[0] == 100.0 and bank.edge_freqs_hz[-1] == 4000.0
    assert not bank.weights[:, : int(100 * 512 / RATE)].any()
    assert not bank.weights[:, int(np.ceil(4000 * 512 / RATE)) + 1:].any()


def test_filterbank_errors():
    with pytest.raises(BadBandError):
        build_mel_filterbank(10, 512, RATE, 0.0, 9000.0)
    with pytest.raises(BadBandError):
        build_mel_filterbank(10, 512, RATE, 500.0, 400.0)
    with pytest.raises(TooManyFiltersError):
        build_mel_filterbank(200, 64, RATE)


def test_fbank_matches_double_loop():
    spec = extract(_noise(4000), "spectrogram")
    bank = build_mel_filterbank(23, 512, RATE)
    got = fbank_energies(spec, bank).data
    np.testing.assert_allclose(got, filterbank_double_loop(spec.data.tolist(), bank.weights.tolist()), rtol=1e-10)
    with pytest.raises(DimensionMismatchError):
        fbank_energies(spec, build_mel_filterbank(23, 1024, RATE))
    with pytest.raises(WrongKindError):
        fbank_energies(log_compress(spec), bank)


def test_mfcc_cosine_sum():
    rng = np.random.default_rng(5)
    logmel = FeatureMatrix(rng.normal(size=(6, 23)), "log_mel_spectrogram")
    out = mfcc(logmel, 13, append_log_energy=False)
    for row_in, row_out in zip(logmel.data, out.data):
        np.testing.assert_allclose(row_out, dct_cosine_sum(row_in.tolist(), 13), atol=1e-9)
    # constant input: all energy in C0
    flat = mfcc(FeatureMatrix(np.full((2, 23), 3.0), "log_mel_spectrogram"), 13, False)
    assert flat.data[0, 0] == pytest.approx(69.0)
    assert np.max(np.abs(flat.data[:, 1:])) < 1e-9


def test_mfcc_log_energy_column():
    frames = np.array([[0.0, 0.0], [1.0, 2.0]])
    logmel = FeatureMatrix(np.zeros((2, 4)), "log_mel_spectrogram")
    out = mfcc(logmel, 2, True, frames)
    assert out.feature_dim == 3
    np.testing.assert_allclose(out.data[:, -1], [np.log(1e-10), np.log(5 + 1e-10)])


def test_mfcc_errors():
    logmel = FeatureMatrix(np.zeros((2, 4)), "log_mel_spectrogram")
    with pytest.raises(TooManyCepsError):
        mfcc(logmel, 5, False)
    with pytest.raises(WrongKindError):
        mfcc(FeatureMatrix(np.zeros((2, 4)), "fbank"), 2, False)


@pytest.mark.parametrize(
    "kind, pad, expected",
    [
        ("spectrogram", False, (99, 161)),
        ("log_spectrogram", False, (99, 161)),
        ("spectrogram", True, (99, 257)),
        ("log_mel_spectrogram", True, (99, 80)),
        ("mel_spectrogram", True, (99, 80)),
        ("fbank", True, (99, 80)),
    ],
)
def test_extract_shapes(kind, pad, expected):
    m = extract(_noise(), kind, FrameConfig(20, 10, pad), WindowSpec())
    assert m.data.shape == expected and m.kind == kind
    assert np.all(np.isfinite(m.data))


def test_extract_mfcc_profiles():
    buf = _noise()
    a = extract(buf, "mfcc", params=MFCC_PROFILES["mfcc13e"])
    b = extract(buf, "mfcc", params=MFCC_PROFILES["mfcc40"])
    assert a.data.shape == (99, 14) and b.data.shape == (99, 40)


def test_extract_chain_matches_manual_steps():
    buf = _noise(3200, seed=9)
    frames = frame_signal(buf, FrameConfig())
    windowed = frames * make_window(WindowSpec(), 320)
    power = np.abs(fft_real(windowed, 512).bins) ** 2
    bank = build_mel_filterbank(23, 512, RATE)
    logmel = np.log(np.maximum(power @ bank.weights.T, 1e-10))
    np.testing.assert_allclose(extract(buf, "log_mel_spectrogram", params=FeatureParams(n_mels=23)).data, logmel)
    cep = extract(buf, "mfcc", params=MFCC_PROFILES["mfcc13e"]).data
    manual = [dct_cosine_sum(r.tolist(), 13) + [np.log(np.sum(f**2) + 1e-10)] for r, f in zip(logmel, frames)]
    np.testing.assert_allclose(cep, manual, atol=1e-8)


def test_extract_silence_hits_floor():
    m = extract(AudioBuffer(np.zeros(1600), RATE), "log_mel_spectrogram")
    assert np.all(m.data == np.log(1e-10))
