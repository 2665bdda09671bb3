"""Per-step orchestration: observe, update memory, plan, act, log.

The memory consumes the reasoner output of the *previous* step, one step
behind the observation that produced it, so the snapshot logged at step T
depends only on outputs 1..T-1 and the first valid sighting lands in the
memory at the step after it happened.

Three arms share this loop:

* ``full``    token reasoning plus gated appearance memory
* ``no_tim``  token reasoning, memory stays empty (kind-blind scores)
* ``no_cot``  no tokens at all: the raw noisy position of the nearest
              detected entity, held stale when nothing is detected
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .episodes import (
    EpisodeHeader,
    EpisodeLog,
    FrameRecord,
    VisibilityRules,
    annotate_frame,
    view_visibility,
)
from .gating import confidence
from .memory import DEFAULT_SLOTS, TargetMemory, update_memory
from .metrics import MetricRules, score_episode
from .perception import (
    CameraRig,
    PerceptionParams,
    ReasonerOutput,
    nearest_detection,
    observe,
)
from .policy import (
    HOLD,
    NUM_WAYPOINTS,
    PursuitState,
    advance_hold,
    execute_first,
    plan,
    plan_from_polar,
)
from .polar import PolarGrid, encode
from .scenarios import ScenarioSpec
from .world import MotionLimits, World

ARMS = ("full", "no_tim", "no_cot")


def arm_switches(arm: str) -> tuple[bool, bool]:
    """(use_tokens, use_memory) for an arm name."""
    if arm not in ARMS:
        raise ValueError(f"unknown arm {arm!r}, expected one of {ARMS}")
    return {"full": (True, True), "no_tim": (True, False), "no_cot": (False, False)}[arm]


@dataclass
class AgentRuntime:
    """Everything the episode loop needs besides the world itself."""

    grid: PolarGrid
    rig: CameraRig
    params: PerceptionParams
    rules: MetricRules
    limits: MotionLimits = MotionLimits()
    standoff: float = 2.0
    invalid_mode: str = HOLD
    use_tokens: bool = True
    use_memory: bool = True
    num_slots: int = DEFAULT_SLOTS
    count_invalid_in_mean: bool = True
    vis_rules: VisibilityRules = VisibilityRules()
    log_topk: int = 0

    @property
    def arm(self) -> str:
        if self.use_tokens:
            return "full" if self.use_memory else "no_tim"
        return "no_cot"

    @classmethod
    def for_arm(cls, arm: str, **kwargs) -> "AgentRuntime":
        use_tokens, use_memory = arm_switches(arm)
        return cls(use_tokens=use_tokens, use_memory=use_memory, **kwargs)


def _topk(logits: np.ndarray, k: int) -> list:
    idx = np.argpartition(logits, -k)[-k:]
    order = sorted(idx.tolist(), key=lambda i: (-logits[i], i))
    return [[int(i), float(logits[i])] for i in order]


def run_episode(
    world: World,
    runtime: AgentRuntime,
    scenario: Optional[ScenarioSpec] = None,
    seed: int = 0,
    output_sink: Optional[list] = None,
) -> EpisodeLog:
    """Run one episode to termination (collision, prolonged loss, or the
    step cap) and return the complete scored log.

    ``output_sink``, when given, collects every ReasonerOutput in order;
    replay checks use it to verify the memory lag independently.
    """
    if world.step_index != 0:
        raise ValueError("run_episode needs a fresh world")

    grid, rig, params = runtime.grid, runtime.rig, runtime.params
    mem = TargetMemory.empty(runtime.num_slots)
    pstate = PursuitState(standoff=runtime.standoff)
    expert_state = PursuitState(standoff=runtime.standoff)
    pending: Optional[ReasonerOutput] = None
    pending_conf = 0.0
    frames: list[FrameRecord] = []
    lost_run = 0

    header = EpisodeHeader(
        scenario=scenario.to_dict() if scenario is not None else {"name": "custom"},
        seed=seed,
        grid=grid,
        rig=rig,
        perception=params,
        rules=runtime.rules,
        vis_rules=runtime.vis_rules,
        max_steps=world.max_steps,
        standoff=runtime.standoff,
        invalid_mode=runtime.invalid_mode,
        max_speed=runtime.limits.max_speed,
        max_turn=runtime.limits.max_turn,
        arm=runtime.arm,
    )

    while not world.terminated:
        try:
            gt_polar, gt_token = annotate_frame(world, rig, grid, runtime.vis_rules)
            views = view_visibility(world, rig, grid)
            expert_traj, expert_state = plan(
                gt_token, grid, expert_state, runtime.limits, runtime.invalid_mode
            )

            if runtime.use_tokens:
                out = observe(world, rig, mem, grid, params, world.rng)
                if output_sink is not None:
                    output_sink.append(out)
                conf = confidence(out.logits)
                if runtime.use_memory and pending is not None:
                    mem = update_memory(
                        mem,
                        pending.token,
                        pending.logits,
                        pending.candidate,
                        grid,
                        runtime.count_invalid_in_mean,
                        precomputed_confidence=pending_conf,
                    )
                pending, pending_conf = out, conf
                traj, pstate = plan(
                    out.token, grid, pstate, runtime.limits, runtime.invalid_mode
                )
                acted_token = out.token
                topk = _topk(out.logits, runtime.log_topk) if runtime.log_topk > 0 else None
            else:
                # no tokens, no invalid semantics: steer at the latest raw
                # reading, or the dead-reckoned previous one when nothing
                # is detected this step
                raw = nearest_detection(world, rig, grid, params, world.rng)
                if raw is not None:
                    pstate = PursuitState(
                        standoff=pstate.standoff, hold_rel=raw
                    )
                if pstate.hold_rel is None:
                    traj = np.zeros((NUM_WAYPOINTS, 3))
                else:
                    traj = plan_from_polar(pstate.hold_rel, pstate, runtime.limits)
                acted_token = grid.invalid_index if raw is None else encode(grid, raw)
                conf = 0.0
                topk = None

            cmd = execute_first(traj, runtime.limits)
            events = world.step(cmd)
            pstate = advance_hold(pstate, cmd)
        except Exception as e:
            raise RuntimeError(f"episode failed at step {world.step_index}: {e}") from e

        slot0 = None if mem.is_empty else [float(v) for v in mem.slots[0][:3]]
        frames.append(
            FrameRecord(
                step=len(frames),
                agent_x=world.agent.x,
                agent_y=world.agent.y,
                agent_heading=world.agent.heading,
                target_x=world.target.pose.x,
                target_y=world.target.pose.y,
                target_theta=events.target_rel.theta,
                target_dist=events.target_rel.dist,
                view_visible=views,
                gt_invalid=gt_polar is None,
                gt_theta=None if gt_polar is None else gt_polar.theta,
                gt_dist=None if gt_polar is None else gt_polar.dist,
                gt_token=gt_token,
                token=acted_token,
                confidence=conf,
                expert_traj=[[float(v) for v in wp] for wp in expert_traj],
                mem_digest=mem.digest(),
                mem_slot0=slot0,
                collided=events.collided,
                logits_topk=topk,
            )
        )

        if events.collided:
            break
        if events.target_rel.dist > runtime.rules.lost_radius:
            lost_run += 1
            if lost_run > runtime.rules.lost_patience:
                break
        else:
            lost_run = 0

    log = EpisodeLog(header=header, frames=frames)
    log.outcome = score_episode(log, runtime.rules)
    return log
