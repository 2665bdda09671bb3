"""Target appearance memory with confidence-gated updates.

The memory holds a small bank of feature slots describing what the target
looks like. It starts empty, adopts the first confidently-seen feature
wholesale, and afterwards blends each new candidate in with a weight set
by the entropy confidence of the prediction relative to its history. An
invalid token freezes the slots and records zero confidence, so the last
reliable appearance survives occlusions untouched.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .gating import ConfidenceTrace, confidence, gate_weight
from .polar import PolarGrid

DEFAULT_SLOTS = 4
DEFAULT_FEATURE_DIM = 16


@dataclass(frozen=True)
class TargetMemory:
    """Feature slots (num_slots x dim) or None before the first valid
    sighting, plus the confidence history feeding the gate."""

    slots: Optional[np.ndarray]
    trace: ConfidenceTrace
    num_slots: int = DEFAULT_SLOTS

    @classmethod
    def empty(cls, num_slots: int = DEFAULT_SLOTS) -> "TargetMemory":
        if num_slots < 1:
            raise ValueError("need at least one slot")
        return cls(slots=None, trace=ConfidenceTrace(), num_slots=num_slots)

    @property
    def is_empty(self) -> bool:
        return self.slots is None

    def digest(self) -> str:
        """Stable fingerprint of the slot contents, for logs and replay
        checks. Distinct strings imply distinct slot bytes."""
        if self.slots is None:
            return "empty"
        h = hashlib.sha256(np.ascontiguousarray(self.slots).tobytes())
        return h.hexdigest()[:16]


def update_memory(
    mem: TargetMemory,
    token: int,
    logits,
    candidate: Optional[np.ndarray],
    grid: PolarGrid,
    count_invalid_in_mean: bool = True,
    precomputed_confidence: Optional[float] = None,
) -> TargetMemory:
    """One memory step for the reasoner output produced last step.

    Invalid token: slots unchanged, confidence zero recorded (unless
    ``count_invalid_in_mean`` is off, which skips the record entirely; the
    default matches a history sum over every step). First valid sighting:
    the candidate is copied into every slot. Otherwise each slot moves
    toward the candidate by the gate weight.

    ``precomputed_confidence`` lets a caller that already scored the
    logits skip the second entropy pass; it must equal
    ``confidence(logits)``.
    """
    if token == grid.invalid_index:
        if candidate is not None:
            raise ValueError("invalid token must not carry a candidate feature")
        if not count_invalid_in_mean:
            return mem
        return TargetMemory(mem.slots, mem.trace.record(0.0), mem.num_slots)

    if not grid.is_valid_token(token):
        raise ValueError(f"token {token} out of range for grid")
    if candidate is None:
        raise ValueError("valid token requires a candidate feature")
    cand = np.asarray(candidate, dtype=np.float64)
    if cand.ndim != 1:
        raise ValueError(f"candidate must be 1-D, got shape {cand.shape}")
    if not np.all(np.isfinite(cand)):
        raise ValueError("candidate feature must be finite")

    c = precomputed_confidence if precomputed_confidence is not None else confidence(logits)
    if mem.is_empty:
        slots = np.tile(cand, (mem.num_slots, 1))
        return TargetMemory(slots, mem.trace.record(c), mem.num_slots)

    if cand.shape[0] != mem.slots.shape[1]:
        raise ValueError(
            f"candidate dim {cand.shape[0]} != memory dim {mem.slots.shape[1]}"
        )
    w = gate_weight(mem.trace, c)
    slots = (1.0 - w) * mem.slots + w * cand
    return TargetMemory(slots, mem.trace.record(c), mem.num_slots)


def memory_similarity(mem: TargetMemory, feature) -> float:
    """Cosine similarity between a feature and the mean of the slots.
    Zero-norm inputs score 0."""
    if mem.is_empty:
        raise ValueError("similarity against empty memory; callers must branch")
    f = np.asarray(feature, dtype=np.float64)
    if f.shape != (mem.slots.shape[1],):
        raise ValueError(f"feature shape {f.shape} != ({mem.slots.shape[1]},)")
    ref = mem.slots.mean(axis=0)
    nf = np.linalg.norm(f)
    nr = np.linalg.norm(ref)
    if nf == 0.0 or nr == 0.0:
        return 0.0
    return float(np.dot(f, ref) / (nf * nr))
