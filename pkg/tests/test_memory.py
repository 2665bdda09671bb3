import numpy as np
import pytest

from polartrack.gating import confidence
from polartrack.memory import TargetMemory, memory_similarity, update_memory
from polartrack.polar import PolarGrid

# minimal grid: one cell (token 0) plus invalid (token 1), K = 2
TINY = PolarGrid(r_min=1.0, r_max=2.0, n_angle=1, n_dist=1)
VALID, INVALID = 0, TINY.invalid_index


def logits_with_confidence(target: float, k: int = 2) -> np.ndarray:
    """Bisect the logit gap of a two-mass vector until the entropy
    confidence hits the target."""
    lo, hi = 0.0, 500.0
    for _ in range(200):
        mid = (lo + hi) / 2
        v = np.zeros(k)
        v[0] = mid
        if confidence(v) < target:
            lo = mid
        else:
            hi = mid
    v = np.zeros(k)
    v[0] = (lo + hi) / 2
    return v


def test_logit_constructor_oracle():
    for target in (0.1, 0.4, 0.8):
        got = confidence(logits_with_confidence(target))
        assert got == pytest.approx(target, abs=1e-9)


def test_bootstrap_adopts_first_valid_feature():
    mem = TargetMemory.empty(num_slots=4)
    f1 = np.array([1.0, 0.0, 0.0])
    out = update_memory(mem, VALID, logits_with_confidence(0.2), f1, TINY)
    assert out.slots.shape == (4, 3)
    assert np.array_equal(out.slots, np.tile(f1, (4, 1)))
    # sharpness of the bootstrap logits must not matter
    out2 = update_memory(mem, VALID, logits_with_confidence(0.95), f1, TINY)
    assert np.array_equal(out2.slots, out.slots)


def test_blend_midpoint_at_half_weight():
    mem = TargetMemory.empty(num_slots=2)
    f1 = np.array([1.0, 0.0])
    f2 = np.array([0.0, 1.0])
    c1 = 0.8
    mem = update_memory(mem, VALID, logits_with_confidence(c1), f1, TINY)
    # trace = {0.8}: picking c2 = mean yields w = 0.5 exactly
    mem = update_memory(mem, VALID, logits_with_confidence(c1), f2, TINY)
    assert mem.slots == pytest.approx(np.tile([0.5, 0.5], (2, 1)), abs=1e-8)


def test_invalid_freezes_slots_and_records_zero():
    mem = TargetMemory.empty(num_slots=3)
    f1 = np.array([0.3, -0.7, 2.0, 0.0])
    mem = update_memory(mem, VALID, logits_with_confidence(0.9), f1, TINY)
    before = mem.slots.tobytes()
    out = update_memory(mem, INVALID, logits_with_confidence(0.9), None, TINY)
    assert out.slots.tobytes() == before
    assert out.trace.count == mem.trace.count + 1
    assert out.trace.last == 0.0


def test_freeze_exactness_over_a_long_run():
    mem = TargetMemory.empty()
    f1 = np.array([1.0, 2.0])
    mem = update_memory(mem, VALID, logits_with_confidence(0.7), f1, TINY)
    before = mem.slots.tobytes()
    count0 = mem.trace.count
    for _ in range(50):
        mem = update_memory(mem, INVALID, logits_with_confidence(0.0), None, TINY)
    assert mem.slots.tobytes() == before
    assert mem.trace.count == count0 + 50
    assert mem.trace.total == pytest.approx(0.7)


def test_invalid_exclusion_variant_skips_the_trace():
    mem = TargetMemory.empty()
    f1 = np.array([1.0, 2.0])
    mem = update_memory(mem, VALID, logits_with_confidence(0.7), f1, TINY)
    out = update_memory(mem, INVALID, None, None, TINY, count_invalid_in_mean=False)
    assert out.trace.count == mem.trace.count
    assert out.slots.tobytes() == mem.slots.tobytes()


def test_contract_violations():
    mem = TargetMemory.empty()
    f = np.array([1.0, 0.0])
    with pytest.raises(ValueError):
        update_memory(mem, INVALID, None, f, TINY)  # candidate with invalid
    with pytest.raises(ValueError):
        update_memory(mem, VALID, logits_with_confidence(0.5), None, TINY)
    mem = update_memory(mem, VALID, logits_with_confidence(0.5), f, TINY)
    with pytest.raises(ValueError):
        update_memory(mem, VALID, logits_with_confidence(0.5), np.ones(5), TINY)
    with pytest.raises(ValueError):
        update_memory(mem, 7, logits_with_confidence(0.5), f, TINY)  # token range


def test_similarity_examples():
    mem = TargetMemory.empty(num_slots=2)
    mem = update_memory(mem, VALID, logits_with_confidence(0.5), np.array([1.0, 0.0]), TINY)
    assert memory_similarity(mem, [1.0, 0.0]) == pytest.approx(1.0)
    assert memory_similarity(mem, [0.0, 1.0]) == pytest.approx(0.0, abs=1e-12)
    f = np.array([1.0, 1.0]) / np.sqrt(2)
    assert memory_similarity(mem, f) == pytest.approx(np.sqrt(0.5), abs=1e-9)
    assert memory_similarity(mem, [0.0, 0.0]) == 0.0
    with pytest.raises(ValueError):
        memory_similarity(TargetMemory.empty(), [1.0, 0.0])
    with pytest.raises(ValueError):
        memory_similarity(mem, [1.0, 0.0, 0.0])


def test_convexity_and_boundedness():
    rng = np.random.default_rng(31)
    dim, bound = 6, 3.0
    mem = TargetMemory.empty()
    first = rng.uniform(-bound, bound, size=dim)
    mem = update_memory(mem, VALID, logits_with_confidence(0.5), first, TINY)
    for _ in range(100):
        cand = rng.uniform(-bound, bound, size=dim)
        prev = mem.slots.copy()
        mem = update_memory(
            mem, VALID, logits_with_confidence(float(rng.uniform(0, 1))), cand, TINY
        )
        lo = np.minimum(prev, cand[None, :])
        hi = np.maximum(prev, cand[None, :])
        assert np.all(mem.slots >= lo - 1e-12)
        assert np.all(mem.slots <= hi + 1e-12)
        assert np.all(np.linalg.norm(mem.slots, axis=1) <= bound * np.sqrt(dim) + 1e-9)


def test_norm_bound_is_preserved():
    rng = np.random.default_rng(37)
    b = 2.0
    mem = TargetMemory.empty()
    v = rng.normal(size=8)
    mem = update_memory(mem, VALID, logits_with_confidence(0.6), b * v / np.linalg.norm(v), TINY)
    for _ in range(200):
        v = rng.normal(size=8)
        cand = rng.uniform(0, b) * v / np.linalg.norm(v)
        mem = update_memory(
            mem, VALID, logits_with_confidence(float(rng.uniform(0, 1))), cand, TINY
        )
        assert np.all(np.linalg.norm(mem.slots, axis=1) <= b + 1e-9)


def test_idempotent_convergence():
    mem = TargetMemory.empty()
    mem = update_memory(mem, VALID, logits_with_confidence(0.5), np.array([0.0, 0.0]), TINY)
    goal = np.array([1.0, -2.0])
    errs = []
    for _ in range(40):
        mem = update_memory(mem, VALID, logits_with_confidence(0.8), goal, TINY)
        errs.append(float(np.abs(mem.slots - goal[None, :]).max()))
    assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-3


def test_digest_tracks_slot_bytes():
    mem = TargetMemory.empty()
    assert mem.digest() == "empty"
    mem = update_memory(mem, VALID, logits_with_confidence(0.5), np.array([1.0, 0.0]), TINY)
    d1 = mem.digest()
    frozen = update_memory(mem, INVALID, None, None, TINY)
    assert frozen.digest() == d1
    moved = update_memory(mem, VALID, logits_with_confidence(0.9), np.array([0.0, 1.0]), TINY)
    assert moved.digest() != d1
