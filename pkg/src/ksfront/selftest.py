"""Randomised property checks runnable outside pytest (``ksfront selftest``)."""

from __future__ import annotations

import numpy as np

from . import attention as att
from .dsp import fft_real
from .metrics import levenshtein


def _naive_dft(x, n_fft):
    padded = np.zeros(n_fft)
    padded[: x.size] = x
    k = np.arange(n_fft // 2 + 1)[:, None]
    n = np.arange(n_fft)[None, :]
    return (padded[None, :] * np.exp(-2j * np.pi * k * n / n_fft)).sum(axis=1)


def _full_table_distance(a, b):
    d = np.zeros((len(a) + 1, len(b) + 1), dtype=int)
    d[:, 0] = np.arange(len(a) + 1)
    d[0, :] = np.arange(len(b) + 1)
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            d[i, j] = min(d[i - 1, j] + 1, d[i, j - 1] + 1, d[i - 1, j - 1] + (a[i - 1] != b[j - 1]))
    return int(d[-1, -1])


def check_fft(rng, instances):
    passed = 0
    for _ in range(instances):
        n_fft = 1 << int(rng.integers(3, 11))
        x = rng.normal(size=int(rng.integers(1, n_fft + 1)))
        spec = fft_real(x, n_fft)
        ok = np.max(np.abs(spec.bins - _naive_dft(x, n_fft))) < 1e-6
        energy = np.sum(np.abs(spec.full()) ** 2) / n_fft
        ok &= abs(energy - np.sum(x**2)) <= 1e-6 * max(1.0, np.sum(x**2))
        passed += bool(ok)
    return passed


def _random_input(rng, d_k=None):
    n_q, n_k = rng.integers(1, 6, size=2)
    d_k = d_k or int(rng.integers(1, 6))
    d_v = int(rng.integers(1, 6))
    return att.AttentionInput(rng.normal(size=(n_q, d_k)), rng.normal(size=(n_k, d_k)), rng.normal(size=(n_k, d_v)))


def _valid(result, V):
    w = result.weights
    rows_ok = np.all(np.abs(w.sum(axis=1) - 1.0) < 1e-6) and np.all(w >= 0)
    hull_ok = np.all(result.context >= V.min(axis=0) - 1e-9) and np.all(result.context <= V.max(axis=0) + 1e-9)
    return bool(rows_ok and hull_ok)


def check_attention(rng, instances):
    passed = 0
    for _ in range(instances):
        inp = _random_input(rng)
        d_q, d_k = inp.Q.shape[1], inp.K.shape[1]
        ok = _valid(att.dot_attention(inp, scaled=True), inp.V)
        ok &= _valid(att.dot_attention(inp, scaled=False), inp.V)
        h = int(rng.integers(1, 6))
        add = att.AdditiveParams(rng.normal(size=(h, d_q + d_k)), rng.normal(size=h))
        ok &= _valid(att.additive_attention(inp, add), inp.V)
        loc = att.LocationParams(rng.normal(size=(4, 3)), rng.normal(size=(h, 4)), rng.normal(size=(h, d_q)),
                                 rng.normal(size=(h, d_k)), rng.normal(size=h), rng.normal(size=h))
        prev = rng.dirichlet(np.ones(inp.K.shape[0]))
        ok &= _valid(att.location_aware_attention(inp, prev, loc), inp.V)
        heads = int(rng.integers(1, 4))
        d_model = heads * int(rng.integers(1, 4))
        mh_inp = att.AttentionInput(rng.normal(size=(inp.Q.shape[0], d_model)),
                                    rng.normal(size=(inp.K.shape[0], d_model)),
                                    rng.normal(size=(inp.K.shape[0], d_model)))
        mh = att.multi_head_attention(mh_inp, att.MultiHeadParams.identity(d_model))
        ref = att.dot_attention(mh_inp, scaled=True)
        ok &= np.array_equal(mh.context, ref.context)
        passed += bool(ok)
    return passed


def check_levenshtein(rng, instances):
    passed = 0
    for _ in range(instances):
        a, b, c = (rng.integers(0, 3, size=int(rng.integers(0, 8))).tolist() for _ in range(3))
        dab = levenshtein(a, b)
        ok = dab == _full_table_distance(a, b) == levenshtein(b, a)
        ok &= (dab == 0) == (a == b)
        ok &= dab <= levenshtein(a, c) + levenshtein(c, b)
        passed += bool(ok)
    return passed


SUITES = {"fft": check_fft, "attention": check_attention, "levenshtein": check_levenshtein}


def run(seed=0, instances=100):
    """Returns {suite: (passed, total)}."""
    rng = np.random.default_rng(seed)
    return {name: (fn(rng, instances), instances) for name, fn in SUITES.items()}
