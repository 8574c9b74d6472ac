import numpy as np
import pytest

from ksfront.audio import AudioBuffer, write_audio


def tone(seconds=1.0, rate=16000, freq=440.0, lead=0.0, tail=0.0, amp=0.5):
    """Sine burst padded with exact-zero silence."""
    t = np.arange(int(seconds * rate)) / rate
    body = amp * np.sin(2 * np.pi * freq * t)
    return AudioBuffer(np.concatenate([np.zeros(int(lead * rate)), body, np.zeros(int(tail * rate))]), rate)


@pytest.fixture
def corpus(tmp_path):
    """Three short wavs plus a manifest with transcripts."""
    audio = tmp_path / "audio"
    audio.mkdir()
    lines = []
    for i, (freq, text) in enumerate([(300.0, "안녕"), (700.0, "하세요"), (1200.0, "네")]):
        write_audio(tone(1.0, freq=freq, lead=0.2, tail=0.3), audio / f"u{i}.wav")
        lines.append(f"u{i}\taudio/u{i}.wav\t{text}")
    manifest = tmp_path / "manifest.tsv"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
