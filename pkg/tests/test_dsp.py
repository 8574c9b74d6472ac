import numpy as np
import pytest

from ksfront.audio import AudioBuffer
from ksfront.dsp import (
    ComplexSpectrum,
    FrameConfig,
    WindowSpec,
    fft_real,
    frame_signal,
    make_window,
    rfft,
    stft,
    zero_pad_pow2,
)
from ksfront.errors import DegenerateLengthError, NotPowerOfTwoError, TooShortError
from oracles import naive_dft

RATE = 16000


def _buf(n, rng=None):
    rng = rng or np.random.default_rng(0)
    return AudioBuffer(rng.uniform(-1, 1, n), RATE)


@pytest.mark.parametrize("length, expected", [(16000, 99), (320, 1), (1000, 5)])
def test_frame_counts(length, expected):
    frames = frame_signal(_buf(length), FrameConfig(20, 10))
    assert frames.shape == (expected, 320)


def test_frame_offsets():
    buf = _buf(1000)
    frames = frame_signal(buf, FrameConfig(20, 10))
    for t, start in enumerate([0, 160, 320, 480, 640]):
        assert np.array_equal(frames[t], buf.samples[start:start + 320])


def test_too_short():
    with pytest.raises(TooShortError):
        frame_signal(_buf(319), FrameConfig(20, 10))


def test_frame_config_invariants():
    with pytest.raises(ValueError):
        FrameConfig(10, 20)
    with pytest.raises(DegenerateLengthError):
        FrameConfig(0.05, 0.05).frame_len_samples(16000)


@pytest.mark.parametrize("n", [2, 5, 320, 401])
def test_paper_hamming_endpoints(n):
    w = make_window(WindowSpec("hamming_paper"), n)
    assert w[0] == pytest.approx(0.09) and w[-1] == pytest.approx(0.09)
    assert np.array_equal(w, w[::-1])


def test_paper_hamming_center_odd():
    w = make_window(WindowSpec("hamming_paper"), 321)
    assert w[160] == pytest.approx(0.99)


def test_standard_hamming_five_points():
    # 0.54 - 0.46*cos(2*pi*n/4) evaluated at n = 0..4
    np.testing.assert_allclose(make_window(WindowSpec("hamming_standard"), 5), [0.08, 0.54, 1.0, 0.54, 0.08], atol=1e-12)


def test_window_errors():
    with pytest.raises(DegenerateLengthError):
        make_window(WindowSpec(), 1)
    with pytest.raises(ValueError):
        WindowSpec("hann")
    assert np.array_equal(make_window(WindowSpec("rectangular"), 4), np.ones(4))


@pytest.mark.parametrize("n, expected", [(320, 512), (256, 256), (400, 512), (1, 1), (3, 4)])
def test_zero_pad_pow2(n, expected):
    frame = np.arange(1, n + 1, dtype=float)
    out = zero_pad_pow2(frame)
    assert out.size == expected
    assert np.array_equal(out[:n], frame) and not out[n:].any()


def test_fft_zero_and_impulse():
    assert not fft_real(np.zeros(8), 8).bins.any()
    imp = np.zeros(8)
    imp[0] = 1
    np.testing.assert_array_equal(fft_real(imp, 8).bins, np.ones(5, dtype=complex))


@pytest.mark.parametrize("n_fft", [1, 2, 4, 8, 16, 64, 256, 1024])
def test_fft_matches_naive_dft(n_fft):
    rng = np.random.default_rng(n_fft)
    x = rng.normal(size=max(1, n_fft - 3))
    got = fft_real(x, n_fft).bins
    np.testing.assert_allclose(got, naive_dft(x.tolist(), n_fft), atol=1e-9)


@pytest.mark.parametrize("n_fft", [3, 10, 320, 400, 161])
def test_non_pow2_transform_matches_naive(n_fft):
    x = np.random.default_rng(n_fft).normal(size=n_fft)
    np.testing.assert_allclose(rfft(x, n_fft), naive_dft(x.tolist(), n_fft), atol=1e-8)
    with pytest.raises(NotPowerOfTwoError):
        fft_real(x, n_fft)


def test_fft_linearity_and_parseval():
    rng = np.random.default_rng(3)
    x, y = rng.normal(size=(2, 512))
    a, b = 1.7, -0.3
    lhs = fft_real(a * x + b * y, 512).bins
    rhs = a * fft_real(x, 512).bins + b * fft_real(y, 512).bins
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * np.max(np.abs(lhs))
    spec = fft_real(x, 512)
    assert np.sum(np.abs(spec.full()) ** 2) / 512 == pytest.approx(np.sum(x**2), rel=1e-6)


def test_conjugate_symmetry_reconstruction():
    x = np.random.default_rng(4).normal(size=64)
    spec = fft_real(x, 64)
    full_naive = np.array([sum(x[n] * np.exp(-2j * np.pi * k * n / 64) for n in range(64)) for k in range(64)])
    np.testing.assert_allclose(spec.full(), full_naive, atol=1e-9)
    odd = ComplexSpectrum(rfft(x[:9], 9), 9)
    assert odd.full().size == 9


def test_stft_shapes_and_zero():
    assert not stft(AudioBuffer(np.zeros(16000), RATE), FrameConfig(), WindowSpec()).bins.any()
    spec = stft(_buf(16000), FrameConfig(20, 10, pad_to_pow2=True), WindowSpec())
    assert spec.bins.shape == (99, 257) and spec.n_fft == 512
    assert len(spec) == 99 and spec[0].bins.shape == (257,)
    unpadded = stft(_buf(16000), FrameConfig(20, 10, pad_to_pow2=False), WindowSpec())
    assert unpadded.bins.shape == (99, 161)


def test_stft_sine_peak_bin():
    t = np.arange(16000) / RATE
    buf = AudioBuffer(0.5 * np.sin(2 * np.pi * 1000 * t), RATE)
    spec = stft(buf, FrameConfig(), WindowSpec())
    assert np.all(np.argmax(np.abs(spec.bins), axis=1) == 32)
    # oracle check on one frame
    frame = frame_signal(buf, FrameConfig())[5] * make_window(WindowSpec(), 320)
    naive = np.abs(naive_dft(frame.tolist(), 512))
    assert int(np.argmax(naive)) == 32


def test_stft_equals_window_then_transform():
    buf = _buf(4000)
    cfg, win = FrameConfig(25, 10), WindowSpec("hamming_standard")
    frames = frame_signal(buf, cfg) * make_window(win, 400)
    np.testing.assert_allclose(stft(buf, cfg, win).bins, fft_real(frames, 512).bins, atol=0)
