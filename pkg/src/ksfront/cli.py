"""Batch command line: ``ksfront <command> [options]``.

Option values are resolved in this order, later winning: built-in
defaults, the selected profile, ``--config FILE`` (flat ``key = value``
lines), explicit command-line flags.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import __version__, ksfm, selftest
from .audio import load_audio, trim_silence, write_audio
from .augment import AugmentPolicy, augment, derive_seed
from .decode import beam_decode, greedy_decode, load_mock_model
from .dsp import WINDOW_KINDS, FrameConfig, WindowSpec
from .errors import KsfrontError
from .features import FeatureParams, extract
from .metrics import cer, corpus_cer
from .schedules import LrScheduleState, schedule_trace
from .text import CleanupRules, Vocabulary, build_vocab, clean_transcript, corpus_length_stats, tokenize

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

FEATURE_KINDS = {
    "spectrogram": "spectrogram",
    "logspec": "log_spectrogram",
    "melspec": "mel_spectrogram",
    "logmel": "log_mel_spectrogram",
    "fbank": "fbank",
    "mfcc": "mfcc",
}
UNIT_NAMES = {"char": "character", "jamo": "jamo"}


def _bool(text):
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_int(text):
    return None if text in (None, "", "none", "None") else int(text)


# every configurable key: (type, default)
SETTINGS = {
    "jobs": (int, 1),
    "keep_going": (_bool, False),
    "seed": (int, 0),
    "format": (str, "wav_pcm16"),
    "rate": (_opt_int, None),
    "trim": (_bool, False),
    "trim_db": (float, 30.0),
    "trim_window_ms": (float, 20.0),
    "frame_ms": (float, 20.0),
    "hop_ms": (float, 10.0),
    "window": (str, "hamming_paper"),
    "pad_pow2": (_bool, True),
    "feature": (str, "logmel"),
    "n_mels": (int, 80),
    "n_ceps": (int, 13),
    "log_energy": (_bool, True),
    "n_fft": (_opt_int, None),
    "spec_augment": (_bool, False),
    "freq_mask_F": (int, 20),
    "n_freq_masks": (int, 1),
    "time_mask_T": (int, 100),
    "n_time_masks": (int, 10),
    "ps": (float, 0.05),
    "mask_value": (float, 0.0),
    "unit": (str, "char"),
    "transcription": (str, "spelling"),
    "max_len": (int, 100),
    "beam": (int, 1),
    "greedy": (_bool, False),
    "length_norm": (_bool, False),
    "ignore_spaces": (_bool, False),
    "epochs": (int, 30),
    "steps_per_epoch": (int, 100),
    "warmup_steps": (int, 400),
    "peak_lr": (float, 3e-4),
    "reduce_factor": (float, 0.5),
    "patience": (int, 1),
    "threshold": (float, 1e-4),
    "val_losses": (str, ""),
    "instances": (int, 100),
}
COMMAND_DEFAULTS = {"decode": {"max_len": 20}}

PROFILES = {
    "paper-baseline": {
        "feature": "logmel",
        "n_mels": 80,
        "frame_ms": 20.0,
        "hop_ms": 10.0,
        "freq_mask_F": 20,
        "n_time_masks": 10,
        "ps": 0.05,
    },
    "custom": {},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_config(path):
    """Parse a flat ``key = value`` file. Dashes in keys may stand for underscores."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key != "profile" and key not in SETTINGS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def resolve_settings(command, args):
    cli = vars(args)
    config = read_config(cli["config"]) if cli.get("config") else {}
    profile = cli.get("profile") or config.get("profile", "paper-baseline")
    if profile not in PROFILES:
        raise UsageError(f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}")
    merged = {key: default for key, (_, default) in SETTINGS.items()}
    merged.update(COMMAND_DEFAULTS.get(command, {}))
    merged.update(PROFILES[profile])
    for key, value in config.items():
        if key == "profile":
            continue
        convert = SETTINGS[key][0]
        try:
            merged[key] = convert(value)
        except ValueError as exc:
            raise UsageError(f"config key {key}: {exc}") from exc
    for key in SETTINGS:
        if key in cli:
            merged[key] = cli[key]
    merged["profile"] = profile
    for key in ("config", "command", "func"):
        cli.pop(key, None)
    merged.update({k: v for k, v in cli.items() if k not in SETTINGS})
    _validate(merged)
    return argparse.Namespace(**merged)


def _validate(s):
    if s["feature"] not in FEATURE_KINDS:
        raise UsageError(f"unknown feature {s['feature']!r}")
    if s["unit"] not in UNIT_NAMES:
        raise UsageError(f"unknown unit {s['unit']!r}")
    if s["window"] not in WINDOW_KINDS:
        raise UsageError(f"unknown window {s['window']!r}")
    if s["format"] not in ("wav_pcm16", "raw_pcm16"):
        raise UsageError(f"unknown format {s['format']!r}")
    if s["transcription"] not in ("spelling", "phonetic"):
        raise UsageError(f"unknown transcription {s['transcription']!r}")
    if s["jobs"] < 1:
        raise UsageError("--jobs must be >= 1")
    if s["format"] == "raw_pcm16" and s["rate"] is None:
        raise UsageError("--format raw_pcm16 needs --rate")


# ---------------------------------------------------------------- manifests

@dataclass(frozen=True)
class Entry:
    utt_id: str
    path: str
    transcript: str | None = None


def read_manifest(path):
    """``utt_id<TAB>path[<TAB>transcript]`` lines; relative paths resolve
    against the manifest's directory."""
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) < 2:
                raise KsfrontError(f"{path}:{lineno}: expected utt_id<TAB>path[<TAB>transcript]")
            audio = cols[1] if os.path.isabs(cols[1]) else os.path.join(base, cols[1])
            entries.append(Entry(cols[0], audio, cols[2] if len(cols) > 2 else None))
    return entries


def write_manifest(path, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write("\t".join(c for c in row if c is not None) + "\n")


def fmt(x):
    return f"{x:.6g}"


def _open_out(path):
    if path in (None, "-"):
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="\n")


def run_batch(entries, work, jobs, keep_going):
    """Run ``work(index, entry)`` for every entry; results come back in
    manifest order as (entry, result, error)."""
    outcomes = []
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_capture, work, i, e) for i, e in enumerate(entries)]
        for entry, fut in zip(entries, futures):
            result, error = fut.result()
            outcomes.append((entry, result, error))
            if error is not None and not keep_going:
                for later in futures:
                    later.cancel()
                break
    for entry, _, error in outcomes:
        if error is not None:
            print(f"FAIL\t{entry.utt_id}\t{error}", file=sys.stderr)
    return outcomes


def _capture(work, index, entry):
    try:
        return work(index, entry), None
    except (KsfrontError, OSError, ValueError) as exc:
        return None, exc


def _batch_exit(outcomes, keep_going):
    failed = any(err is not None for _, _, err in outcomes)
    return EXIT_DATA if failed and not keep_going else EXIT_OK


def _policy(s, seed):
    return AugmentPolicy(s.freq_mask_F, s.n_freq_masks, s.time_mask_T, s.n_time_masks, s.ps, s.mask_value, seed)


def _load(s, path):
    return load_audio(path, s.format, s.rate)


# ---------------------------------------------------------------- commands

def cmd_trim(s):
    os.makedirs(s.out_dir, exist_ok=True)

    def work(_, entry):
        buf, report = trim_silence(_load(s, entry.path), s.trim_db, s.trim_window_ms)
        name = f"{entry.utt_id}.wav"
        if not report.all_silent:
            write_audio(buf, os.path.join(s.out_dir, name))
        return name, report

    outcomes = run_batch(read_manifest(s.input), work, s.jobs, s.keep_going)
    rows, report_rows = [], []
    for entry, result, error in outcomes:
        if error is not None:
            continue
        name, report = result
        report_rows.append((entry.utt_id, str(report.leading_samples_removed),
                            str(report.trailing_samples_removed), report.status))
        if not report.all_silent:
            rows.append((entry.utt_id, name, entry.transcript))
    write_manifest(os.path.join(s.out_dir, "manifest.tsv"), rows)
    write_manifest(os.path.join(s.out_dir, "trim_report.tsv"), report_rows)
    failures = sum(err is not None for _, _, err in outcomes)
    silent = sum(r[3] == "all_silent" for r in report_rows)
    print(f"trim: count={len(report_rows)} all_silent={silent} failures={failures}")
    return _batch_exit(outcomes, s.keep_going)


def _feature_setup(s):
    cfg = FrameConfig(s.frame_ms, s.hop_ms, s.pad_pow2)
    params = FeatureParams(n_mels=s.n_mels, n_ceps=s.n_ceps, append_log_energy=s.log_energy, n_fft=s.n_fft)
    return cfg, WindowSpec(s.window), params


def cmd_featurize(s):
    os.makedirs(s.out_dir, exist_ok=True)
    cfg, win, params = _feature_setup(s)
    kind = FEATURE_KINDS[s.feature]

    def work(index, entry):
        buf = _load(s, entry.path)
        if s.trim:
            buf, report = trim_silence(buf, s.trim_db, s.trim_window_ms)
            if report.all_silent:
                raise KsfrontError("audio is silent throughout")
        feats = extract(buf, kind, cfg, win, params)
        masks = []
        if s.spec_augment:
            feats, masks = augment(feats, _policy(s, derive_seed(s.seed, index)))
        name = f"{entry.utt_id}.ksfm"
        ksfm.write(feats, os.path.join(s.out_dir, name))
        return name, feats.n_frames, masks

    outcomes = run_batch(read_manifest(s.input), work, s.jobs, s.keep_going)
    ok = [(entry, res) for entry, res, err in outcomes if err is None]
    write_manifest(os.path.join(s.out_dir, "manifest.tsv"),
                   [(e.utt_id, name, e.transcript) for e, (name, _, _) in ok])
    if s.spec_augment:
        write_manifest(os.path.join(s.out_dir, "masks.tsv"),
                       [(e.utt_id, m.to_record()) for e, (_, _, masks) in ok for m in masks])
    failures = len(outcomes) - len(ok)
    frames = sum(n for _, (_, n, _) in ok)
    print(f"featurize: count={len(ok)} frames={frames} failures={failures}")
    return _batch_exit(outcomes, s.keep_going)


def cmd_augment(s):
    os.makedirs(s.out_dir, exist_ok=True)

    def work(index, entry):
        feats, masks = augment(ksfm.read(entry.path), _policy(s, derive_seed(s.seed, index)))
        name = f"{entry.utt_id}.ksfm"
        ksfm.write(feats, os.path.join(s.out_dir, name))
        return name, masks

    outcomes = run_batch(read_manifest(s.input), work, s.jobs, s.keep_going)
    ok = [(entry, res) for entry, res, err in outcomes if err is None]
    write_manifest(os.path.join(s.out_dir, "manifest.tsv"), [(e.utt_id, name, e.transcript) for e, (name, _) in ok])
    write_manifest(os.path.join(s.out_dir, "masks.tsv"), [(e.utt_id, m.to_record()) for e, (_, masks) in ok for m in masks])
    print(f"augment: count={len(ok)} masks={sum(len(m) for _, (_, m) in ok)} failures={len(outcomes) - len(ok)}")
    return _batch_exit(outcomes, s.keep_going)


def _read_transcripts(path):
    """Accepts ``path<TAB>transcript`` or ``utt_id<TAB>path<TAB>transcript`` lines."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) < 2:
                raise KsfrontError(f"{path}:{lineno}: expected at least two tab-separated columns")
            rows.append((lineno, cols))
    return rows


def cmd_prep(s):
    rules = CleanupRules(transcription_choice=s.transcription)
    unit = UNIT_NAMES[s.unit]
    kept, dropped, failures = [], 0, 0
    for lineno, cols in _read_transcripts(s.input):
        try:
            text = clean_transcript(cols[-1], rules)
        except KsfrontError as exc:
            failures += 1
            print(f"FAIL\tline {lineno}\t{exc}", file=sys.stderr)
            if not s.keep_going:
                return EXIT_DATA
            continue
        if len(text) > s.max_len or not text:
            dropped += 1
            continue
        kept.append(cols[:-1] + [text])
    write_manifest(s.output, kept)
    vocab_size = 0
    if s.vocab_out:
        if not kept:
            raise KsfrontError("no transcripts left to build a vocabulary from")
        vocab = build_vocab([row[-1] for row in kept], unit)
        vocab.save(s.vocab_out)
        vocab_size = len(vocab)
    print(f"prep: kept={len(kept)} dropped={dropped} failures={failures} vocab={vocab_size}")
    return EXIT_DATA if failures and not s.keep_going else EXIT_OK


def cmd_stats(s):
    unit = UNIT_NAMES[s.unit]
    lengths = []
    for _, cols in _read_transcripts(s.input):
        text = cols[-1]
        lengths.append(len(tokenize(text, unit)))
    st = corpus_length_stats(lengths)
    outliers = sum(n > st.iqr_outlier_threshold for n in lengths)
    over = sum(n > s.max_len for n in lengths)
    print("count\tmin\tq1\tmedian\tq3\tmax\tiqr_threshold\toutliers\tover_max_len")
    print("\t".join([str(st.count), str(st.min), fmt(st.q1), fmt(st.median), fmt(st.q3), str(st.max),
                     fmt(st.iqr_outlier_threshold), str(outliers), str(over)]))
    return EXIT_OK


def cmd_decode(s):
    model = load_mock_model(s.mock_model, max_len=s.max_len)
    entries = read_manifest(s.input)
    with _open_out(s.output) as out:
        for entry in entries:
            if s.greedy:
                hyp = greedy_decode(model)
            else:
                hyp = beam_decode(model, s.beam, s.length_norm)[0]
            ids = " ".join(str(t) for t in hyp.tokens[1:])
            out.write(f"{entry.utt_id}\t{ids}\t{fmt(hyp.score(s.length_norm and not s.greedy))}\n")
    return EXIT_OK


def _read_keyed(path, text_col):
    rows = {}
    order = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            cols = line.split("\t")
            text = cols[text_col] if len(cols) > 1 else ""
            if cols[0] not in rows:
                order.append(cols[0])
            rows[cols[0]] = text
    return order, rows


def cmd_score(s):
    unit = UNIT_NAMES[s.unit]
    ref_order, refs = _read_keyed(s.ref, -1)
    _, hyps = _read_keyed(s.hyp, 1 if s.vocab else -1)
    if s.vocab:
        vocab = Vocabulary.load(s.vocab, unit)
        hyps = {k: vocab.decode([int(t) for t in v.split()]) for k, v in hyps.items()}
    for utt in sorted(set(hyps) - set(refs)):
        print(f"WARN\t{utt}\thypothesis without reference ignored", file=sys.stderr)
    pairs = []
    with _open_out(s.output) as out:
        out.write("utt_id\tD\tL\tCER\n")
        for utt in ref_order:
            if utt not in hyps:
                print(f"WARN\t{utt}\tmissing hypothesis scored as empty", file=sys.stderr)
            pair = (hyps.get(utt, ""), refs[utt])
            r = cer(*pair, unit=unit, ignore_spaces=s.ignore_spaces)
            pairs.append(pair)
            out.write(f"{utt}\t{r.distance}\t{r.ref_len}\t{fmt(r.cer_percent)}\n")
        pooled = corpus_cer(pairs, unit, s.ignore_spaces)
        out.write(f"POOLED\t{pooled.distance}\t{pooled.ref_len}\t{fmt(pooled.cer_percent)}\n")
    return EXIT_OK


def cmd_schedule_trace(s):
    losses = [float(x) for x in s.val_losses.split(",") if x.strip()]
    state = LrScheduleState(s.warmup_steps, s.peak_lr, s.reduce_factor, s.patience, s.threshold)
    with _open_out(s.output) as out:
        out.write("step\tlr\ttf_ratio\n")
        for step, lr, ratio in schedule_trace(s.epochs, s.steps_per_epoch, state, losses):
            out.write(f"{step}\t{fmt(lr)}\t{fmt(ratio)}\n")
    return EXIT_OK


def cmd_selftest(s):
    results = selftest.run(s.seed, s.instances)
    failed = False
    for name, (passed, total) in results.items():
        print(f"{name}: {passed}/{total} passed")
        failed |= passed != total
    return EXIT_INTERNAL if failed else EXIT_OK


# ---------------------------------------------------------------- parser

S = argparse.SUPPRESS


def _common(p, randomness=False):
    p.add_argument("--config", metavar="FILE", help="flat 'key = value' settings file")
    p.add_argument("--profile", choices=sorted(PROFILES), default=S,
                   help="preset applied before --config (default: paper-baseline)")
    if randomness:
        p.add_argument("--seed", type=int, default=S, help="base random seed (default 0)")


def _batch(p):
    p.add_argument("--jobs", type=int, default=S, help="worker threads (default 1)")
    p.add_argument("--keep-going", action=argparse.BooleanOptionalAction, default=S,
                   help="process every entry and exit 0 despite per-file failures")


def _io(p, out_dir=True):
    p.add_argument("--in", dest="input", required=True, metavar="MANIFEST", help="input manifest")
    if out_dir:
        p.add_argument("--out-dir", required=True, metavar="DIR", help="output directory")


def _audio(p):
    p.add_argument("--format", choices=("wav_pcm16", "raw_pcm16"), default=S, help="input audio format (default wav_pcm16)")
    p.add_argument("--rate", type=int, default=S, help="sample rate in Hz for raw_pcm16 input")
    p.add_argument("--trim-db", type=float, default=S, help="silence threshold below the loudest window, dB (default 30)")
    p.add_argument("--trim-window-ms", type=float, default=S, help="trimming window length, ms (default 20)")


def _frames(p):
    p.add_argument("--frame-ms", type=float, default=S, help="frame length, ms (default 20)")
    p.add_argument("--hop-ms", type=float, default=S, help="frame hop, ms (default 10)")
    p.add_argument("--window", choices=WINDOW_KINDS, default=S, help="analysis window (default hamming_paper)")
    p.add_argument("--pad-pow2", action=argparse.BooleanOptionalAction, default=S,
                   help="zero pad frames to a power of two before the FFT (default on)")


def _features(p):
    p.add_argument("--feature", choices=tuple(FEATURE_KINDS), default=S, help="feature kind (default logmel)")
    p.add_argument("--n-mels", type=int, default=S, help="mel filter count (default 80)")
    p.add_argument("--n-ceps", type=int, default=S, help="cepstral coefficients for mfcc (default 13)")
    p.add_argument("--log-energy", action=argparse.BooleanOptionalAction, default=S,
                   help="append a log frame-energy column to mfcc (default on)")
    p.add_argument("--n-fft", type=int, default=S, help="FFT size (default: from the frame length)")


def _masking(p, switch):
    if switch:
        p.add_argument("--spec-augment", action=argparse.BooleanOptionalAction, default=S,
                       help="apply SpecAugment masks to the extracted features")
    p.add_argument("--freq-mask-F", dest="freq_mask_F", type=int, default=S, help="max frequency-mask width (default 20)")
    p.add_argument("--n-freq-masks", type=int, default=S, help="frequency masks per utterance (default 1)")
    p.add_argument("--time-mask-T", dest="time_mask_T", type=int, default=S, help="max time-mask width (default 100)")
    p.add_argument("--n-time-masks", type=int, default=S, help="time masks per utterance (default 10)")
    p.add_argument("--ps", type=float, default=S, help="max time-mask width as a fraction of length (default 0.05)")
    p.add_argument("--mask-value", type=float, default=S, help="fill value for masked cells (default 0.0)")


def _unit(p):
    p.add_argument("--unit", choices=tuple(UNIT_NAMES), default=S, help="token unit (default char)")


def build_parser():
    parser = _Parser(prog="ksfront", description="Speech frontend, decoding and scoring tools.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("trim", help="remove leading/trailing silence from audio files")
    _io(p); _audio(p); _batch(p); _common(p)  # noqa: E702
    p.set_defaults(func=cmd_trim)

    p = sub.add_parser("featurize", help="extract features into KSFM files")
    _io(p); _audio(p)  # noqa: E702
    p.add_argument("--trim", action=argparse.BooleanOptionalAction, default=S, help="trim silence before extraction")
    _frames(p); _features(p); _masking(p, switch=True); _batch(p); _common(p, randomness=True)  # noqa: E702
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("augment", help="apply SpecAugment masks to KSFM files")
    _io(p); _masking(p, switch=False); _batch(p); _common(p, randomness=True)  # noqa: E702
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("prep", help="clean transcripts and build a vocabulary")
    _io(p, out_dir=False)
    p.add_argument("--out", dest="output", required=True, metavar="FILE", help="cleaned transcript manifest")
    p.add_argument("--vocab-out", metavar="FILE", help="write the vocabulary, one token per line")
    _unit(p)
    p.add_argument("--transcription", choices=("spelling", "phonetic"), default=S,
                   help="side of (spelling)/(phonetic) pairs to keep (default spelling)")
    p.add_argument("--max-len", type=int, default=S, help="drop transcripts longer than this many characters (default 100)")
    p.add_argument("--keep-going", action=argparse.BooleanOptionalAction, default=S,
                   help="skip malformed transcripts instead of stopping")
    _common(p)
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("stats", help="transcript length statistics")
    _io(p, out_dir=False); _unit(p)  # noqa: E702
    p.add_argument("--max-len", type=int, default=S, help="length limit to count violations of (default 100)")
    _common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("decode", help="greedy or beam decoding against a mock posterior table")
    _io(p, out_dir=False)
    p.add_argument("--mock-model", required=True, metavar="FILE", help="'prefix -> probabilities' table")
    p.add_argument("--beam", type=int, default=S, help="beam width (default 1)")
    p.add_argument("--greedy", action=argparse.BooleanOptionalAction, default=S, help="use greedy search")
    p.add_argument("--length-norm", action=argparse.BooleanOptionalAction, default=S,
                   help="rank beams by log probability per token")
    p.add_argument("--max-len", type=int, default=S, help="maximum emitted tokens (default 20)")
    p.add_argument("--out", dest="output", metavar="FILE", help="output file (default stdout)")
    _common(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("score", help="per-utterance and pooled CER")
    p.add_argument("--hyp", required=True, metavar="FILE", help="hypotheses keyed by utterance id")
    p.add_argument("--ref", required=True, metavar="FILE", help="reference manifest keyed by utterance id")
    p.add_argument("--vocab", metavar="FILE", help="read hypotheses as decode output and map ids through this vocabulary")
    _unit(p)
    p.add_argument("--ignore-spaces", action=argparse.BooleanOptionalAction, default=S, help="drop whitespace before scoring")
    p.add_argument("--out", dest="output", metavar="FILE", help="output file (default stdout)")
    _common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("schedule-trace", help="print step, learning rate and teacher forcing ratio")
    p.add_argument("--epochs", type=int, default=S, help="epochs to trace (default 30)")
    p.add_argument("--steps-per-epoch", type=int, default=S, help="optimizer steps per epoch (default 100)")
    p.add_argument("--warmup-steps", type=int, default=S, help="linear warmup length (default 400)")
    p.add_argument("--peak-lr", type=float, default=S, help="learning rate after warmup (default 3e-4)")
    p.add_argument("--reduce-factor", type=float, default=S, help="plateau reduction factor (default 0.5)")
    p.add_argument("--patience", type=int, default=S, help="non-improving epochs tolerated (default 1)")
    p.add_argument("--threshold", type=float, default=S, help="minimum validation loss improvement (default 1e-4)")
    p.add_argument("--val-losses", default=S, help="comma-separated validation loss per epoch")
    p.add_argument("--out", dest="output", metavar="FILE", help="output file (default stdout)")
    _common(p)
    p.set_defaults(func=cmd_schedule_trace)

    p = sub.add_parser("selftest", help="run randomised FFT, attention and edit-distance checks")
    p.add_argument("--instances", type=int, default=S, help="random instances per suite (default 100)")
    _common(p, randomness=True)
    p.set_defaults(func=cmd_selftest)
    return parser



def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    command, func = args.command, args.func
    try:
        settings = resolve_settings(command, args)
        return func(settings)
    except UsageError as exc:
        print(f"ksfront {command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (KsfrontError, OSError, ValueError) as exc:
        print(f"ksfront {command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except AssertionError as exc:
        print(f"ksfront {command}: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
