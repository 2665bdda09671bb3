"""Receding-horizon pursuit planner.

Every step the planner emits a fresh 8-waypoint egocentric trajectory and
the simulator executes only the first waypoint. A valid token decodes to
its cell centroid and the goal is that point pulled back along the
bearing to the standoff distance; the straight segment to the goal is
split into 8 equal pieces, each waypoint facing the target bearing as far
as the cumulative turn limit allows. An invalid token falls back to the
last confidently-seen cell (walking all the way into it, which rounds
corners after a disappearance) or, with no history, a rotate-in-place
scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .polar import PolarGrid, PolarPoint, decode, signed_degrees
from .world import Command, MotionLimits

NUM_WAYPOINTS = 8
SEARCH_RANGE = 8.0  # carrot distance for the press-on sweep after a lost hold

HOLD = "hold"  # invalid token: head for the last valid cell
STOP = "stop"  # invalid token: stand still
INVALID_MODES = (HOLD, STOP)


@dataclass(frozen=True)
class PursuitState:
    """Carry-over between plans: the last valid cell seen, for how many
    steps the token has been invalid, and the dead-reckoned body-frame
    position of that last sighting (``hold_rel``). Standoff is the
    desired following distance (success band is 1-3 m).

    ``hold_rel`` exists because a remembered egocentric point goes stale
    as soon as the agent moves: steering at a fixed relative bearing
    turns the pursuit into a spiral. ``advance_hold`` re-expresses the
    point in the new body frame after every executed command."""

    last_valid_cell: Optional[int] = None
    steps_since_valid: int = 0
    standoff: float = 2.0
    hold_rel: Optional[PolarPoint] = None

    def __post_init__(self):
        if not (1.0 <= self.standoff <= 3.0):
            raise ValueError(f"standoff {self.standoff} outside the [1, 3] follow band")


def advance_hold(state: PursuitState, cmd: Command) -> PursuitState:
    """Propagate the remembered target position through an executed
    motion (rotate by dtheta, then translate v along the new heading)."""
    if state.hold_rel is None:
        return state
    th = math.radians(state.hold_rel.theta - cmd.dtheta)
    x = state.hold_rel.dist * math.cos(th) - cmd.v
    y = state.hold_rel.dist * math.sin(th)
    rel = PolarPoint(math.degrees(math.atan2(y, x)), math.hypot(x, y))
    return replace(state, hold_rel=rel)


def _segment_plan(goal_range: float, bearing: float, limits: MotionLimits) -> np.ndarray:
    """Equal subdivision of the straight segment to the goal. ``bearing``
    is signed degrees; negative goal_range backs away along the bearing."""
    traj = np.zeros((NUM_WAYPOINTS, 3))
    gx = goal_range * math.cos(math.radians(bearing))
    gy = goal_range * math.sin(math.radians(bearing))
    length = math.hypot(gx, gy)
    if length > 1e-12:
        step = min(length / NUM_WAYPOINTS, limits.max_speed)
        ux, uy = gx / length, gy / length
        for i in range(NUM_WAYPOINTS):
            traj[i, 0] = ux * step * (i + 1)
            traj[i, 1] = uy * step * (i + 1)
    for i in range(NUM_WAYPOINTS):
        turn_cap = (i + 1) * limits.max_turn
        traj[i, 2] = max(-turn_cap, min(turn_cap, bearing))
    return traj


def _scan_plan(limits: MotionLimits) -> np.ndarray:
    traj = np.zeros((NUM_WAYPOINTS, 3))
    for i in range(NUM_WAYPOINTS):
        traj[i, 2] = min((i + 1) * limits.max_turn, 180.0)
    return traj


def plan_from_polar(
    p: PolarPoint, state: PursuitState, limits: MotionLimits, pull_back: bool = True
) -> np.ndarray:
    """Plan toward an un-tokenized relative position (used directly by
    the no-reasoning ablation arm)."""
    bearing = signed_degrees(p.theta)
    goal_range = p.dist - state.standoff if pull_back else p.dist
    return _segment_plan(goal_range, bearing, limits)


def plan(
    token: int,
    grid: PolarGrid,
    state: PursuitState,
    limits: MotionLimits,
    invalid_mode: str = HOLD,
) -> tuple[np.ndarray, PursuitState]:
    """Trajectory for the current token plus the updated pursuit state."""
    if invalid_mode not in INVALID_MODES:
        raise ValueError(f"invalid_mode must be one of {INVALID_MODES}")

    if grid.is_valid_token(token):
        p = decode(grid, token)
        traj = _segment_plan(p.dist - state.standoff, signed_degrees(p.theta), limits)
        return traj, replace(state, last_valid_cell=token, steps_since_valid=0, hold_rel=p)

    if token != grid.invalid_index:
        raise ValueError(f"token {token} out of range for grid")

    new_state = replace(state, steps_since_valid=state.steps_since_valid + 1)
    if invalid_mode == STOP or state.last_valid_cell is None:
        traj = (
            np.zeros((NUM_WAYPOINTS, 3))
            if invalid_mode == STOP
            else _scan_plan(limits)
        )
        return traj, new_state
    # walk into the remembered point, no pull-back: standing off from a
    # stale sighting would stall short of wherever the target went. Once
    # the point is reached with the target still unseen, press on along
    # the current heading: the sighting is stale by however long the
    # target has had to move, so the sweep continues beyond it. The
    # search carrot is re-planted ahead so dead reckoning cannot swing
    # the pursuit back onto the consumed point.
    p = state.hold_rel if state.hold_rel is not None else decode(grid, state.last_valid_cell)
    if p.dist < 0.5:
        p = PolarPoint(0.0, SEARCH_RANGE)
        new_state = replace(new_state, hold_rel=p)
    traj = _segment_plan(p.dist, signed_degrees(p.theta), limits)
    return traj, new_state


def execute_first(traj: np.ndarray, limits: MotionLimits) -> Command:
    """Command that reproduces the first waypoint as closely as the
    limits allow (exactly, when it is within them)."""
    if traj.shape != (NUM_WAYPOINTS, 3):
        raise ValueError(f"trajectory must be ({NUM_WAYPOINTS}, 3), got {traj.shape}")
    x1, y1, th1 = traj[0]
    length = math.hypot(x1, y1)
    if length < 1e-12:
        dtheta = max(-limits.max_turn, min(limits.max_turn, signed_degrees(th1)))
        return Command(v=0.0, dtheta=dtheta)
    heading_to = signed_degrees(math.degrees(math.atan2(y1, x1)))
    dtheta = max(-limits.max_turn, min(limits.max_turn, heading_to))
    return Command(v=min(length, limits.max_speed), dtheta=dtheta)
