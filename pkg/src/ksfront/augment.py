"""SpecAugment frequency and time masking (no time warping).

Randomness comes from numpy's counter-based Philox generator, keyed by an
explicit 64-bit seed, so a given (matrix, policy) pair always yields the
same masks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MaskOutOfRangeError
from .features import FeatureMatrix

AXES = ("frequency", "time")


@dataclass(frozen=True)
class AugmentPolicy:
    freq_mask_param: int = 20
    n_freq_masks: int = 1
    time_mask_param: int = 100
    n_time_masks: int = 10
    max_time_mask_ratio: float = 0.05
    mask_value: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.max_time_mask_ratio <= 1.0:
            raise ValueError("max_time_mask_ratio must lie in [0, 1]")
        for name in ("freq_mask_param", "n_freq_masks", "time_mask_param", "n_time_masks"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class MaskSpec:
    axis: str
    offset: int
    width: int

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")
        if self.offset < 0 or self.width < 0:
            raise ValueError("mask offset and width must be non-negative")

    def to_record(self):
        return f"{self.axis}\t{self.offset}\t{self.width}"


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def derive_seed(seed: int, index: int) -> int:
    """Independent per-item seed (e.g. per utterance in a batch)."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def sample_freq_mask(v: int, F: int, rng: np.random.Generator) -> MaskSpec:
    """Width uniform on [0, min(F, v)], offset uniform on [0, v - width]."""
    if v < 1:
        raise ValueError("need at least one frequency channel")
    f = int(rng.integers(0, min(F, v), endpoint=True))
    f0 = int(rng.integers(0, v - f, endpoint=True))
    return MaskSpec("frequency", f0, f)


def sample_time_mask(tau: int, T: int, p_s: float, rng: np.random.Generator) -> MaskSpec:
    """Width uniform on [0, min(T, floor(p_s * tau))], offset on [0, tau - width]."""
    if tau < 1:
        raise ValueError("need at least one frame")
    cap = min(T, int(np.floor(p_s * tau)), tau)
    t = int(rng.integers(0, cap, endpoint=True))
    t0 = int(rng.integers(0, tau - t, endpoint=True))
    return MaskSpec("time", t0, t)


def apply_masks(m: FeatureMatrix, masks, mask_value=0.0) -> FeatureMatrix:
    n_frames, n_dims = m.data.shape
    data = m.data.copy()
    for mask in masks:
        limit = n_dims if mask.axis == "frequency" else n_frames
        if mask.offset + mask.width > limit:
            raise MaskOutOfRangeError(f"{mask} exceeds {mask.axis} axis of length {limit}")
        span = slice(mask.offset, mask.offset + mask.width)
        if mask.axis == "frequency":
            data[:, span] = mask_value
        else:
            data[span, :] = mask_value
    return m.with_data(data)


def augment(m: FeatureMatrix, policy: AugmentPolicy):
    """Draw the policy's masks (frequency first, then time) and apply them.

    Returns the masked copy and the masks for auditing; ``m`` is untouched.
    """
    rng = make_rng(policy.seed)
    n_frames, n_dims = m.data.shape
    masks = [sample_freq_mask(n_dims, policy.freq_mask_param, rng) for _ in range(policy.n_freq_masks)]
    masks += [
        sample_time_mask(n_frames, policy.time_mask_param, policy.max_time_mask_ratio, rng)
        for _ in range(policy.n_time_masks)
    ]
    return apply_masks(m, masks, policy.mask_value), masks
