"""Episode scoring and offline loss kernels.

Success means the episode ends correctly oriented inside the 1-3 m
follow band without ever colliding. The per-step tracked flag, episode
termination rules and the orientation tolerance are operationalizations,
kept configurable in ``MetricRules``. The loss kernels evaluate logged
predictions offline: summed per-waypoint MSE for trajectories (angles
compared on the circle), negative log-likelihood for the reasoning token,
and their weighted combination.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .policy import NUM_WAYPOINTS
from .polar import signed_degrees


@dataclass(frozen=True)
class MetricRules:
    orient_tol: float = 30.0  # deg, final-step "correctly oriented"
    track_dist: float = 3.0  # m, per-step tracked flag
    track_bearing: float = 60.0  # deg, per-step tracked flag
    lost_radius: float = 6.0  # m, early termination when exceeded...
    lost_patience: int = 50  # ...for this many consecutive steps
    band: tuple[float, float] = (1.0, 3.0)

    def to_dict(self) -> dict:
        return {
            "orient_tol": self.orient_tol,
            "track_dist": self.track_dist,
            "track_bearing": self.track_bearing,
            "lost_radius": self.lost_radius,
            "lost_patience": self.lost_patience,
            "band": list(self.band),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricRules":
        d = dict(d)
        if "band" in d:
            d["band"] = tuple(d["band"])
        return cls(**d)


@dataclass(frozen=True)
class EpisodeOutcome:
    success: bool
    tracking_rate: float
    collided: bool
    episode_length: int
    reason: str  # cap | collision | lost

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "tracking_rate": self.tracking_rate,
            "collided": self.collided,
            "episode_length": self.episode_length,
            "reason": self.reason,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EpisodeOutcome":
        return cls(
            success=bool(d["success"]),
            tracking_rate=float(d["tracking_rate"]),
            collided=bool(d["collided"]),
            episode_length=int(d["episode_length"]),
            reason=str(d["reason"]),
        )


def frame_tracked(dist: float, theta: float, rules: MetricRules) -> bool:
    return dist <= rules.track_dist and abs(signed_degrees(theta)) <= rules.track_bearing


def score_episode(log, rules: MetricRules) -> EpisodeOutcome:
    """Recompute the outcome from a complete episode log.

    Works on any log object exposing ``frames`` (each with
    ``target_theta``, ``target_dist``, ``collided``) and a header with
    ``max_steps``.
    """
    frames = log.frames
    if not frames:
        raise ValueError("cannot score an empty episode")
    n = len(frames)
    collided = bool(frames[-1].collided)
    if any(f.collided for f in frames[:-1]):
        raise ValueError("collision before the final frame: log is not terminated")

    tracked = sum(
        1 for f in frames if frame_tracked(f.target_dist, f.target_theta, rules)
    )
    last = frames[-1]
    lo, hi = rules.band
    success = (
        not collided
        and lo <= last.target_dist <= hi
        and abs(signed_degrees(last.target_theta)) <= rules.orient_tol
    )
    if collided:
        reason = "collision"
    elif n < log.header.max_steps:
        reason = "lost"
    else:
        reason = "cap"
    return EpisodeOutcome(
        success=success,
        tracking_rate=tracked / n,
        collided=collided,
        episode_length=n,
        reason=reason,
    )


def traj_loss(pred: np.ndarray, gt: np.ndarray) -> float:
    """Sum over waypoints of the per-waypoint MSE across (x, y, theta);
    heading errors are wrapped onto (-180, 180]."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != (NUM_WAYPOINTS, 3) or gt.shape != (NUM_WAYPOINTS, 3):
        raise ValueError(
            f"trajectories must be ({NUM_WAYPOINTS}, 3), got {pred.shape} vs {gt.shape}"
        )
    dxy = pred[:, :2] - gt[:, :2]
    dth = np.array([signed_degrees(a) for a in pred[:, 2] - gt[:, 2]])
    per_wp = (dxy[:, 0] ** 2 + dxy[:, 1] ** 2 + dth**2) / 3.0
    return float(per_wp.sum())


def reason_loss(logits, token: int) -> float:
    """Negative log softmax probability of the ground-truth token."""
    x = np.asarray(logits, dtype=np.float64)
    if not (0 <= token < x.size):
        raise ValueError(f"token {token} out of range for {x.size} logits")
    z = x - x.max()
    return float(np.log(np.exp(z).sum()) - z[token])


def total_loss(
    l_traj: float, l_reason: float, l_text: float = 0.0, alpha: float = 0.2, beta: float = 0.5
) -> float:
    """Weighted sum of the three training terms. There is no text head in
    this package, so the text term is an externally supplied scalar."""
    if l_traj < 0 or l_reason < 0 or l_text < 0:
        raise ValueError("loss terms must be >= 0")
    return l_traj + alpha * l_reason + beta * l_text


@dataclass
class ArmResult:
    """Aggregate over one (scenario, arm) block of episodes."""

    scenario: str
    arm: str
    episodes: int
    sr: float  # percent
    tr: float  # percent
    cr: float  # percent
    mean_el: float
    seeds: list[int]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "arm": self.arm,
            "episodes": self.episodes,
            "sr": self.sr,
            "tr": self.tr,
            "cr": self.cr,
            "mean_el": self.mean_el,
            "seeds": self.seeds,
        }


def aggregate(
    scenario: str, arm: str, outcomes: Sequence[EpisodeOutcome], seeds: Sequence[int]
) -> ArmResult:
    if not outcomes:
        raise ValueError("cannot aggregate zero episodes")
    n = len(outcomes)
    return ArmResult(
        scenario=scenario,
        arm=arm,
        episodes=n,
        sr=100.0 * sum(o.success for o in outcomes) / n,
        tr=100.0 * sum(o.tracking_rate for o in outcomes) / n,
        cr=100.0 * sum(o.collided for o in outcomes) / n,
        mean_el=sum(o.episode_length for o in outcomes) / n,
        seeds=list(seeds),
    )


@dataclass
class SuiteReport:
    rows: list[ArmResult]

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows]}

    def to_table(self) -> str:
        """Fixed-width text table; column order matches the JSON form."""
        header = f"{'scenario':<10} {'arm':<8} {'n':>5} {'SR%':>7} {'TR%':>7} {'CR%':>7} {'mean EL':>8}"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            lines.append(
                f"{r.scenario:<10} {r.arm:<8} {r.episodes:>5} "
                f"{r.sr:>7.1f} {r.tr:>7.1f} {r.cr:>7.1f} {r.mean_el:>8.1f}"
            )
        return "\n".join(lines)
