"""Training-schedule functions: teacher forcing decay, label smoothing, and
linear warmup followed by reduce-on-plateau learning rates.

Everything here is framework free; an external trainer calls these per
step or per epoch.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import IdOutOfRangeError

TF_DECAY_PER_EPOCH = 0.02
TF_FLOOR = 0.8


def teacher_forcing_ratio(epoch: int, decay_per_epoch=TF_DECAY_PER_EPOCH, floor=TF_FLOOR) -> float:
    """max(1.0 - decay * epoch, floor)."""
    if epoch < 0:
        raise ValueError("epoch must be non-negative")
    return max(1.0 - decay_per_epoch * epoch, floor)


@dataclass(frozen=True)
class LabelSmoothingSpec:
    vocab_size: int
    epsilon: float = 0.1

    def __post_init__(self):
        if self.vocab_size < 1:
            raise ValueError("vocab_size must be positive")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")


def smooth_labels(true_id: int, spec: LabelSmoothingSpec) -> np.ndarray:
    """(1 - eps) * onehot(true_id) + eps / V."""
    if not 0 <= true_id < spec.vocab_size:
        raise IdOutOfRangeError(f"label {true_id} outside [0, {spec.vocab_size})")
    dist = np.full(spec.vocab_size, spec.epsilon / spec.vocab_size)
    dist[true_id] += 1.0 - spec.epsilon
    return dist


@dataclass(frozen=True)
class LrScheduleState:
    """Warmup plus plateau state. Updates return a new state object."""

    warmup_steps: int = 400
    peak_lr: float = 3e-4
    reduce_factor: float = 0.5
    patience_epochs: int = 1
    threshold: float = 1e-4
    best_val_loss: float = float("inf")
    current_lr: float | None = None
    bad_epochs: int = 0
    n_reductions: int = 0

    def __post_init__(self):
        if not 0.0 < self.reduce_factor < 1.0:
            raise ValueError("reduce_factor must lie in (0, 1)")
        if self.warmup_steps < 0 or self.patience_epochs < 0:
            raise ValueError("warmup_steps and patience_epochs must be non-negative")
        if self.current_lr is None:
            object.__setattr__(self, "current_lr", self.peak_lr)


def lr_on_step(state: LrScheduleState, global_step: int) -> float:
    if global_step < 0:
        raise ValueError("step must be non-negative")
    if global_step < state.warmup_steps:
        return state.peak_lr * global_step / state.warmup_steps
    return state.current_lr


def lr_on_epoch_end(state: LrScheduleState, val_loss: float) -> LrScheduleState:
    """A loss counts as an improvement only if it beats the best by more than
    ``threshold``; the rate is cut once non-improving epochs exceed
    ``patience_epochs``."""
    if val_loss < state.best_val_loss - state.threshold:
        return replace(state, best_val_loss=val_loss, bad_epochs=0)
    bad = state.bad_epochs + 1
    if bad > state.patience_epochs:
        return replace(state, current_lr=state.current_lr * state.reduce_factor, bad_epochs=0,
                       n_reductions=state.n_reductions + 1)
    return replace(state, bad_epochs=bad)


def schedule_trace(epochs: int, steps_per_epoch: int, state: LrScheduleState | None = None, val_losses=()):
    """Rows of (global_step, lr, teacher_forcing_ratio) for every step.

    ``val_losses[e]``, when given, is fed to the plateau logic at the end of
    epoch ``e``.
    """
    state = state or LrScheduleState()
    rows = []
    step = 0
    for epoch in range(epochs):
        ratio = teacher_forcing_ratio(epoch)
        for _ in range(steps_per_epoch):
            rows.append((step, lr_on_step(state, step), ratio))
            step += 1
        if epoch < len(val_losses):
            state = lr_on_epoch_end(state, val_losses[epoch])
    return rows
