"""Episode logs: JSONL schema, ground-truth annotation, dataset generation.

One episode is one JSONL file: a header line, one line per frame, and a
footer line with the scored outcome. Frames mix two viewpoints on a step:
pose fields describe the world *after* the step's motion (what metrics
consume), while decision fields (token, confidence, ground-truth
annotation, expert trajectory, memory digest) describe what the agent saw
and chose at the step's start. Writing is deterministic, so re-writing a
parsed log reproduces the file byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .metrics import EpisodeOutcome, MetricRules
from .perception import CameraRig, CameraView, PerceptionParams
from .polar import PolarGrid, PolarPoint, encode
from .scenarios import ScenarioSpec, make_scenario
from .world import World, relative_polar

SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class VisibilityRules:
    """Ground-truth annotation knobs. ``min_apparent_size`` is the
    radius/distance ratio below which the target counts as too small to
    see, standing in for a pixel-count cutoff. The default puts the
    cutoff at 4 m for the default 0.3 m entity radius, calibrated so the
    obstacle split annotates 10-30% of frames invalid."""

    min_apparent_size: float = 0.075

    def to_dict(self) -> dict:
        return {"min_apparent_size": self.min_apparent_size}

    @classmethod
    def from_dict(cls, d: dict) -> "VisibilityRules":
        return cls(min_apparent_size=float(d["min_apparent_size"]))


def annotate_frame(
    world: World, rig: CameraRig, grid: PolarGrid, vis_rules: VisibilityRules
) -> tuple[Optional[PolarPoint], int]:
    """Ground-truth polar position and token for the target right now.

    Invalid when the target is occluded, outside every camera's field of
    view, outside the annulus, or apparently too small."""
    target = world.target
    rel = relative_polar(world.agent, target.position())
    if not (grid.r_min <= rel.dist <= grid.r_max):
        return None, grid.invalid_index
    if not rig.covers(rel.theta):
        return None, grid.invalid_index
    if not world.line_of_sight((world.agent.x, world.agent.y), target.position()):
        return None, grid.invalid_index
    if rel.dist > 0 and target.radius / rel.dist < vis_rules.min_apparent_size:
        return None, grid.invalid_index
    return rel, encode(grid, rel)


def view_visibility(world: World, rig: CameraRig, grid: PolarGrid) -> list[bool]:
    """Per-view summary: does this view see the target (annulus, field of
    view, line of sight)."""
    target = world.target
    rel = relative_polar(world.agent, target.position())
    in_range = grid.r_min <= rel.dist <= grid.r_max
    los = world.line_of_sight((world.agent.x, world.agent.y), target.position())
    return [bool(in_range and los and v.covers(rel.theta)) for v in rig.views]


@dataclass
class FrameRecord:
    step: int
    agent_x: float
    agent_y: float
    agent_heading: float
    target_x: float
    target_y: float
    target_theta: float  # post-step ground truth, deg ccw from heading
    target_dist: float
    view_visible: list[bool]  # at observation time, one flag per view
    gt_invalid: bool
    gt_theta: Optional[float]  # observation-time annotation
    gt_dist: Optional[float]
    gt_token: int
    token: int  # token the policy actually consumed
    confidence: float
    expert_traj: list  # 8 x [x, y, theta]
    mem_digest: str
    mem_slot0: Optional[list]  # first 3 coords of slot 0
    collided: bool
    logits_topk: Optional[list] = None  # [[index, value], ...]

    def to_json_dict(self) -> dict:
        return {
            "type": "frame",
            "step": self.step,
            "agent": [self.agent_x, self.agent_y, self.agent_heading],
            "target": [self.target_x, self.target_y],
            "target_rel": [self.target_theta, self.target_dist],
            "view_visible": self.view_visible,
            "gt_invalid": self.gt_invalid,
            "gt_polar": None if self.gt_invalid else [self.gt_theta, self.gt_dist],
            "gt_token": self.gt_token,
            "token": self.token,
            "confidence": self.confidence,
            "expert_traj": self.expert_traj,
            "mem_digest": self.mem_digest,
            "mem_slot0": self.mem_slot0,
            "collided": self.collided,
            "logits_topk": self.logits_topk,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "FrameRecord":
        gt_polar = d["gt_polar"]
        return cls(
            step=int(d["step"]),
            agent_x=float(d["agent"][0]),
            agent_y=float(d["agent"][1]),
            agent_heading=float(d["agent"][2]),
            target_x=float(d["target"][0]),
            target_y=float(d["target"][1]),
            target_theta=float(d["target_rel"][0]),
            target_dist=float(d["target_rel"][1]),
            view_visible=[bool(v) for v in d["view_visible"]],
            gt_invalid=bool(d["gt_invalid"]),
            gt_theta=None if gt_polar is None else float(gt_polar[0]),
            gt_dist=None if gt_polar is None else float(gt_polar[1]),
            gt_token=int(d["gt_token"]),
            token=int(d["token"]),
            confidence=float(d["confidence"]),
            expert_traj=d["expert_traj"],
            mem_digest=str(d["mem_digest"]),
            mem_slot0=d["mem_slot0"],
            collided=bool(d["collided"]),
            logits_topk=d["logits_topk"],
        )


@dataclass
class EpisodeHeader:
    scenario: dict
    seed: int
    grid: PolarGrid
    rig: CameraRig
    perception: PerceptionParams
    rules: MetricRules
    vis_rules: VisibilityRules
    max_steps: int
    standoff: float = 2.0
    invalid_mode: str = "hold"
    max_speed: float = 0.25
    max_turn: float = 30.0
    arm: str = "full"
    expert: str = "noiseless oracle pursuit"

    def to_json_dict(self) -> dict:
        return {
            "type": "header",
            "version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "seed": self.seed,
            "grid": self.grid.to_dict(),
            "rig": self.rig.to_dict(),
            "perception": self.perception.to_dict(),
            "rules": self.rules.to_dict(),
            "vis_rules": self.vis_rules.to_dict(),
            "max_steps": self.max_steps,
            "policy": {
                "standoff": self.standoff,
                "invalid_mode": self.invalid_mode,
                "max_speed": self.max_speed,
                "max_turn": self.max_turn,
            },
            "arm": self.arm,
            "expert": self.expert,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "EpisodeHeader":
        pol = d["policy"]
        return cls(
            scenario=d["scenario"],
            seed=int(d["seed"]),
            grid=PolarGrid.from_dict(d["grid"]),
            rig=CameraRig.from_dict(d["rig"]),
            perception=PerceptionParams.from_dict(d["perception"]),
            rules=MetricRules.from_dict(d["rules"]),
            vis_rules=VisibilityRules.from_dict(d["vis_rules"]),
            max_steps=int(d["max_steps"]),
            standoff=float(pol["standoff"]),
            invalid_mode=str(pol["invalid_mode"]),
            max_speed=float(pol["max_speed"]),
            max_turn=float(pol["max_turn"]),
            arm=str(d["arm"]),
            expert=str(d["expert"]),
        )


@dataclass
class EpisodeLog:
    header: EpisodeHeader
    frames: list[FrameRecord]
    outcome: Optional[EpisodeOutcome] = None

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header.to_json_dict(), separators=(",", ":"))]
        lines.extend(
            json.dumps(f.to_json_dict(), separators=(",", ":")) for f in self.frames
        )
        if self.outcome is not None:
            lines.append(
                json.dumps(
                    {"type": "footer", "outcome": self.outcome.to_dict()},
                    separators=(",", ":"),
                )
            )
        return "\n".join(lines) + "\n"


class EpisodeFormatError(ValueError):
    """Raised on malformed, truncated or inconsistent episode files."""


def write_episode(log: EpisodeLog, path) -> None:
    Path(path).write_text(log.to_jsonl(), encoding="utf-8")


def read_episode(path) -> EpisodeLog:
    """Parse and validate one episode file. Errors carry the 1-based line
    number of the offending line."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise EpisodeFormatError(f"{path}: empty file")

    def parse(i: int) -> dict:
        try:
            return json.loads(lines[i])
        except json.JSONDecodeError as e:
            raise EpisodeFormatError(
                f"{path}: malformed JSON at line {i + 1} (last good line {i})"
            ) from e

    head = parse(0)
    if head.get("type") != "header":
        raise EpisodeFormatError(f"{path}: line 1 is not a header")
    if head.get("version") != SCHEMA_VERSION:
        raise EpisodeFormatError(
            f"{path}: schema version {head.get('version')!r} unsupported "
            f"(expected {SCHEMA_VERSION!r})"
        )
    header = EpisodeHeader.from_json_dict(head)

    frames: list[FrameRecord] = []
    outcome: Optional[EpisodeOutcome] = None
    for i in range(1, len(lines)):
        d = parse(i)
        kind = d.get("type")
        if kind == "frame":
            if outcome is not None:
                raise EpisodeFormatError(f"{path}: frame after footer at line {i + 1}")
            f = FrameRecord.from_json_dict(d)
            if f.step != len(frames):
                raise EpisodeFormatError(
                    f"{path}: line {i + 1}: step {f.step}, expected {len(frames)}"
                )
            if not (0 <= f.gt_token <= header.grid.invalid_index) or not (
                0 <= f.token <= header.grid.invalid_index
            ):
                raise EpisodeFormatError(
                    f"{path}: line {i + 1}: token outside the header grid's "
                    f"range [0, {header.grid.invalid_index}]"
                )
            frames.append(f)
        elif kind == "footer":
            outcome = EpisodeOutcome.from_dict(d["outcome"])
        else:
            raise EpisodeFormatError(f"{path}: line {i + 1}: unknown record type {kind!r}")
    if outcome is None:
        raise EpisodeFormatError(
            f"{path}: missing footer (last good line {len(lines)})"
        )
    return EpisodeLog(header=header, frames=frames, outcome=outcome)


def schema_description() -> str:
    """Human-readable field-by-field schema, printed by the CLI."""
    return f"""JSONL episode schema, version {SCHEMA_VERSION}
One JSON object per line.

Line 1   header:
  type             "header"
  version          schema version string (this file: "{SCHEMA_VERSION}")
  scenario         scenario spec: name, n_distractors, sigma_app,
                   feature_dim, max_steps
  seed             episode world seed
  grid             polar grid: r_min, r_max, n_angle, n_dist
  rig              camera views: [{{yaw, fov}} ...], degrees
  perception       perception parameters (noise, scores, gating knobs)
  rules            metric rules (orientation tolerance, tracked flag,
                   lost-termination, success band)
  vis_rules        annotation rules (min_apparent_size)
  max_steps        episode cap
  arm              "full" | "no_tim" | "no_cot"
  expert           provenance of the expert trajectories

Lines 2..N-1  frame (one per executed step):
  type             "frame"
  step             0-based step index, strictly increasing
  agent            [x, y, heading_deg] after the step's motion
  target           [x, y] after the step's motion
  target_rel       [theta_deg, dist_m] of the target, post-step ground truth
  view_visible     per-view target visibility at observation time
  gt_invalid       true when the target was not annotatable at observation
                   time (occluded / out of view / out of range / too small)
  gt_polar         [theta_deg, dist_m] at observation time, null if invalid
  gt_token         token index of gt_polar (last index = invalid)
  token            token the policy consumed this step
  confidence       entropy confidence of this step's prediction
  expert_traj      8 x [x, y, theta]: oracle pursuit plan from gt_token
  mem_digest       fingerprint of the memory slots after this step's update
  mem_slot0        first 3 coords of slot 0, null while memory is empty
  collided         whether this step's motion caused a collision
  logits_topk      [[token, logit] ...] of the top-k logits, null if not kept

Last line  footer:
  type             "footer"
  outcome          success, tracking_rate, collided, episode_length, reason
"""


def derive_seed(master: int, scenario_index: int, episode_index: int) -> int:
    """Deterministic per-episode seed from the master seed and indices."""
    ss = np.random.SeedSequence([master, scenario_index, episode_index])
    return int(ss.generate_state(1)[0])


def generate_dataset(
    specs: list[ScenarioSpec],
    n_episodes: int,
    seed: int,
    out_dir,
    randomize_rig: bool = False,
    rig: Optional[CameraRig] = None,
    grid: Optional[PolarGrid] = None,
) -> list[Path]:
    """Roll out annotated expert episodes and write one JSONL file each.

    Deterministic given ``seed``. With ``randomize_rig``, each episode
    draws per-view fields of view and keeps a random subset of the
    non-front views; the front view is always present.
    """
    from .runner import AgentRuntime, run_episode  # deferred: runner imports us

    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = grid or PolarGrid()
    base_rig = rig or CameraRig.ring(4)

    written: list[Path] = []
    for si, spec in enumerate(specs):
        for ei in range(n_episodes):
            ep_seed = derive_seed(seed, si, ei)
            if randomize_rig:
                rig_rng = np.random.default_rng(
                    np.random.SeedSequence([seed, si, ei, 1])
                )
                # front view always retained; other views kept at random
                views = [CameraView(0.0, float(rig_rng.uniform(70.0, 110.0)))]
                for yaw in (90.0, 180.0, 270.0):
                    keep = rig_rng.random() < 0.5
                    fov = float(rig_rng.uniform(70.0, 110.0))
                    if keep:
                        views.append(CameraView(yaw, fov))
                ep_rig = CameraRig(views=tuple(views))
            else:
                ep_rig = base_rig
            # top-8 covers every scored cell with the default entity
            # counts, so the sparse dump rebuilds the dense logits exactly
            runtime = AgentRuntime(
                grid=grid,
                rig=ep_rig,
                params=PerceptionParams().noiseless(),
                rules=MetricRules(),
                log_topk=8,
            )
            world = make_scenario(spec, ep_seed)
            log = run_episode(world, runtime, scenario=spec, seed=ep_seed)
            path = out / f"{spec.name}_{ei:04d}.jsonl"
            write_episode(log, path)
            written.append(path)
    return written
