import pytest

from polartrack.memory import TargetMemory, update_memory
from polartrack.metrics import MetricRules
from polartrack.perception import CameraRig, PerceptionParams
from polartrack.polar import PolarGrid
from polartrack.runner import ARMS, AgentRuntime, arm_switches, run_episode
from polartrack.scenarios import ScenarioSpec, make_scenario

GRID = PolarGrid()


def runtime(arm="full", noiseless=False, **kwargs):
    params = PerceptionParams().noiseless() if noiseless else PerceptionParams()
    return AgentRuntime.for_arm(
        arm, grid=GRID, rig=CameraRig.ring(4), params=params, rules=MetricRules(), **kwargs
    )


def test_arm_switches():
    assert arm_switches("full") == (True, True)
    assert arm_switches("no_tim") == (True, False)
    assert arm_switches("no_cot") == (False, False)
    with pytest.raises(ValueError):
        arm_switches("half")
    for arm in ARMS:
        assert AgentRuntime.for_arm(
            arm, grid=GRID, rig=CameraRig.ring(4), params=PerceptionParams(), rules=MetricRules()
        ).arm == arm


def test_stt_noiseless_succeeds_end_to_end():
    spec = ScenarioSpec("stt")
    for seed in (0, 1, 2):
        log = run_episode(make_scenario(spec, seed), runtime(noiseless=True), spec, seed)
        assert log.outcome.success
        assert log.outcome.episode_length == 500


def test_requires_fresh_world():
    spec = ScenarioSpec("stt")
    w = make_scenario(spec, 0)
    from polartrack.world import Command

    w.step(Command(0.0, 0.0))
    with pytest.raises(ValueError):
        run_episode(w, runtime(), spec, 0)


def test_memory_frozen_through_occlusion_window():
    spec = ScenarioSpec("obstacle")
    log = run_episode(make_scenario(spec, 1), runtime(), spec, 1)
    frames = log.frames
    # find the long invalid stretch of acted tokens and check the memory
    # digest never changes from one step after the stretch begins
    runs = []
    i = 0
    while i < len(frames):
        if frames[i].token == GRID.invalid_index:
            j = i
            while j < len(frames) and frames[j].token == GRID.invalid_index:
                j += 1
            runs.append((i, j))
            i = j
        else:
            i += 1
    start, end = max(runs, key=lambda r: r[1] - r[0])
    assert end - start >= 30
    # memory updates lag one step: the digest may change at the first
    # invalid step (consuming the last valid output), never afterwards
    digests = {f.mem_digest for f in frames[start + 1 : end]}
    assert len(digests) == 1


def test_lag_correctness_via_independent_replay():
    spec = ScenarioSpec("dt")
    sink = []
    log = run_episode(make_scenario(spec, 3), runtime(), spec, 3, output_sink=sink)
    assert len(sink) == len(log.frames)

    # replay: the memory logged at step T is the fold of outputs < T
    mem = TargetMemory.empty()
    for t, frame in enumerate(log.frames):
        if t > 0:
            prev = sink[t - 1]
            mem = update_memory(mem, prev.token, prev.logits, prev.candidate, GRID)
        assert frame.mem_digest == mem.digest(), f"step {t}"


def test_bootstrap_timing():
    spec = ScenarioSpec("stt")
    log = run_episode(make_scenario(spec, 4), runtime(), spec, 4)
    first_valid = next(
        i for i, f in enumerate(log.frames) if f.token != GRID.invalid_index
    )
    for f in log.frames[: first_valid + 1]:
        assert f.mem_slot0 is None
    assert log.frames[first_valid + 1].mem_slot0 is not None


def test_no_tim_arm_never_fills_memory():
    spec = ScenarioSpec("dt")
    log = run_episode(make_scenario(spec, 5), runtime("no_tim"), spec, 5)
    assert all(f.mem_slot0 is None for f in log.frames)
    assert all(f.mem_digest == "empty" for f in log.frames)
    assert log.header.arm == "no_tim"


def test_no_cot_arm_runs_and_logs_raw_tokens():
    spec = ScenarioSpec("dt")
    log = run_episode(make_scenario(spec, 6), runtime("no_cot"), spec, 6)
    assert log.header.arm == "no_cot"
    assert all(f.confidence == 0.0 for f in log.frames)
    assert any(f.token != GRID.invalid_index for f in log.frames)


def test_episode_determinism_bitwise():
    spec = ScenarioSpec("dt")
    a = run_episode(make_scenario(spec, 7), runtime(), spec, 7)
    b = run_episode(make_scenario(spec, 7), runtime(), spec, 7)
    assert a.to_jsonl() == b.to_jsonl()


def test_collision_terminates_episode():
    # drive the agent into the stt scenario's off-path box via a rigged
    # runtime? simpler: dt traffic occasionally collides; find one seed
    spec = ScenarioSpec("dt")
    for seed in range(40):
        log = run_episode(make_scenario(spec, seed), runtime("no_tim"), spec, seed)
        if log.outcome.collided:
            assert log.frames[-1].collided
            assert log.outcome.episode_length == len(log.frames)
            assert log.outcome.reason == "collision"
            break
    else:
        pytest.skip("no collision found in 40 seeds")


def test_lost_termination_respects_patience():
    rules = MetricRules()
    spec = ScenarioSpec("obstacle")
    log = run_episode(make_scenario(spec, 2), runtime(), spec, 2)
    if log.outcome.reason == "lost":
        tail = [f.target_dist for f in log.frames[-(rules.lost_patience + 1) :]]
        assert all(d > rules.lost_radius for d in tail)
    # and a healthy run never strings together that many far frames
    log = run_episode(make_scenario(ScenarioSpec("stt"), 0), runtime(), ScenarioSpec("stt"), 0)
    run = 0
    worst = 0
    for f in log.frames:
        run = run + 1 if f.target_dist > rules.lost_radius else 0
        worst = max(worst, run)
    assert worst <= rules.lost_patience


def test_logits_topk_logging():
    spec = ScenarioSpec("dt")
    log = run_episode(make_scenario(spec, 8), runtime(log_topk=8), spec, 8)
    f = next(f for f in log.frames if f.token != GRID.invalid_index)
    assert f.logits_topk is not None
    assert len(f.logits_topk) == 8
    # entries are (index, value) sorted by value descending
    vals = [v for _, v in f.logits_topk]
    assert vals == sorted(vals, reverse=True)
    # the acted token's logit is among them
    assert any(i == f.token for i, _ in f.logits_topk)
