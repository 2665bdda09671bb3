"""Entropy confidence and the history-normalized update gate.

Confidence of a token prediction is one minus the normalized entropy of
its logits: a one-hot-like distribution scores near 1, a uniform one
scores 0. The gate weight for a memory update divides the current
confidence by (historical mean + current confidence), so a confident
prediction after a run of poor ones gets extra pull.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def confidence(logits) -> float:
    """1 - H(softmax(logits)) / log(K), clamped to [0, 1].

    Natural log on both sides (the base cancels; fixing one keeps replays
    bit-exact). Requires at least two logits, otherwise log(K) is zero.
    """
    x = np.asarray(logits, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError(f"need a 1-D logit vector of length >= 2, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("logits must be finite")
    z = x - x.max()
    p = np.exp(z)
    p /= p.sum()
    # 0 * log(0) := 0
    nz = p[p > 0.0]
    h = -float(np.sum(nz * np.log(nz)))
    c = 1.0 - h / math.log(x.size)
    return min(1.0, max(0.0, c))


@dataclass(frozen=True)
class ConfidenceTrace:
    """Running record of per-step confidences: count, sum and the most
    recent value. Value-semantic; ``record`` returns a new trace."""

    count: int = 0
    total: float = 0.0
    last: float = 0.0

    @property
    def mean(self) -> float:
        return self.total / self.count if self.count > 0 else 0.0

    def record(self, c: float) -> "ConfidenceTrace":
        if not (0.0 <= c <= 1.0):
            raise ValueError(f"confidence {c} outside [0, 1]")
        return ConfidenceTrace(count=self.count + 1, total=self.total + c, last=c)


def gate_weight(trace: ConfidenceTrace, c_prev: float) -> float:
    """Blend weight c / (mean + c) for the next memory update.

    Returns 0 when both the history mean and the current confidence are
    zero: with no information on either side the memory stays frozen.
    """
    if not (0.0 <= c_prev <= 1.0):
        raise ValueError(f"confidence {c_prev} outside [0, 1]")
    if trace.count < 1:
        raise ValueError("gate_weight needs at least one recorded confidence")
    denom = trace.mean + c_prev
    if denom == 0.0:
        return 0.0
    return c_prev / denom
