"""Deterministic 2D pursuit world.

Discrete time, one command per step, velocities in meters per step. The
agent is a unicycle (rotate, then translate along the new heading); every
other entity follows a scripted closed waypoint loop at per-leg speeds.
Obstacles are convex polygons that block line of sight and collide with
the agent disc. All randomness comes from the per-world generator seeded
at construction, so a (scenario, seed, command sequence) triple replays
bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .polar import PolarPoint, wrap_degrees

TARGET = "target"
DISTRACTOR = "distractor"


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    heading: float  # degrees in [0, 360)

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.heading)):
            raise ValueError("pose must be finite")
        object.__setattr__(self, "heading", wrap_degrees(self.heading))


@dataclass(frozen=True)
class MotionLimits:
    max_speed: float = 0.25  # m/step
    max_turn: float = 30.0  # deg/step


@dataclass(frozen=True)
class Command:
    v: float
    dtheta: float


def relative_polar(pose: Pose2D, point) -> PolarPoint:
    """Bearing (ccw from heading) and range of a world point as seen from
    a pose."""
    dx = point[0] - pose.x
    dy = point[1] - pose.y
    theta = wrap_degrees(math.degrees(math.atan2(dy, dx)) - pose.heading)
    return PolarPoint(theta=theta, dist=math.hypot(dx, dy))


def discs_collide(p1, r1: float, p2, r2: float) -> bool:
    return math.hypot(p1[0] - p2[0], p1[1] - p2[1]) < r1 + r2


@dataclass
class Entity:
    """A scripted actor: the target or a look-alike distractor.

    ``path`` is a closed loop of world waypoints; ``speeds[i]`` is the
    speed while walking toward ``path[i]``. ``leg`` indexes the waypoint
    currently being approached.
    """

    id: int
    kind: str
    pose: Pose2D
    radius: float
    appearance: np.ndarray
    path: np.ndarray  # (P, 2)
    speeds: np.ndarray  # (P,)
    leg: int = 1

    def __post_init__(self):
        if self.kind not in (TARGET, DISTRACTOR):
            raise ValueError(f"unknown entity kind {self.kind!r}")
        if self.radius <= 0:
            raise ValueError("entity radius must be positive")
        self.path = np.asarray(self.path, dtype=np.float64)
        self.speeds = np.asarray(self.speeds, dtype=np.float64)
        if self.path.ndim != 2 or self.path.shape[1] != 2 or len(self.path) < 1:
            raise ValueError("path must be a (P, 2) array")
        if self.speeds.shape != (len(self.path),):
            raise ValueError("need one speed per path waypoint")

    def position(self) -> tuple[float, float]:
        return (self.pose.x, self.pose.y)

    def advance(self):
        """Walk one step along the loop, wrapping at the end. Crossing a
        waypoint mid-step carries the leftover distance onto the next leg
        (capped at that leg's speed, so a step never moves farther than
        the fastest leg involved)."""
        x, y = self.pose.x, self.pose.y
        remaining = float(self.speeds[self.leg])
        for _ in range(len(self.path) + 1):
            if remaining <= 0.0:
                break
            tx, ty = self.path[self.leg]
            d = math.hypot(tx - x, ty - y)
            if d > remaining:
                x += (tx - x) / d * remaining
                y += (ty - y) / d * remaining
                remaining = 0.0
            else:
                x, y = float(tx), float(ty)
                remaining -= d
                self.leg = (self.leg + 1) % len(self.path)
                remaining = min(remaining, float(self.speeds[self.leg]))
        # face the waypoint being approached
        nx, ny = self.path[self.leg]
        heading = self.pose.heading
        if math.hypot(nx - x, ny - y) > 1e-12:
            heading = math.degrees(math.atan2(ny - y, nx - x))
        self.pose = Pose2D(x, y, heading)


@dataclass(frozen=True)
class Obstacle:
    """Convex polygon, stored counterclockwise."""

    vertices: np.ndarray  # (V, 2)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("obstacle needs >= 3 vertices")
        area2 = _signed_area2(v)
        if abs(area2) < 1e-12:
            raise ValueError("degenerate obstacle polygon")
        if area2 < 0:
            v = v[::-1].copy()
        n = len(v)
        for i in range(n):
            a, b, c = v[i], v[(i + 1) % n], v[(i + 2) % n]
            if _cross(a, b, c) <= 0:
                raise ValueError("obstacle polygon must be strictly convex")
        object.__setattr__(self, "vertices", v)
        # axis-aligned bounds for cheap rejection in the hot predicates
        object.__setattr__(
            self,
            "bounds",
            (
                float(v[:, 0].min()),
                float(v[:, 1].min()),
                float(v[:, 0].max()),
                float(v[:, 1].max()),
            ),
        )

    @classmethod
    def rect(cls, x0: float, y0: float, x1: float, y1: float) -> "Obstacle":
        return cls(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]]))

    def contains(self, p) -> bool:
        """Strict interior test."""
        v = self.vertices
        n = len(v)
        return all(_cross(v[i], v[(i + 1) % n], p) > 0 for i in range(n))

    def distance_to(self, p) -> float:
        """Distance from a point to the polygon (0 inside)."""
        if self.contains(p):
            return 0.0
        v = self.vertices
        n = len(v)
        return min(_point_segment_dist(p, v[i], v[(i + 1) % n]) for i in range(n))


def _signed_area2(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _cross(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _point_segment_dist(p, a, b) -> float:
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    t = 0.0 if den == 0 else max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / den))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _proper_intersect(p, q, a, b) -> bool:
    """True iff open segments (p,q) and (a,b) cross strictly. Touching at
    an endpoint or grazing a vertex does not count."""
    d1 = _cross(p, q, a)
    d2 = _cross(p, q, b)
    d3 = _cross(a, b, p)
    d4 = _cross(a, b, q)
    return d1 * d2 < 0 and d3 * d4 < 0


@dataclass
class StepEvents:
    """What one world step produced: collision flag (and who), the exact
    target position in agent polar coordinates, and per-entity line-of-
    sight from the agent."""

    collided: bool
    collided_with: Optional[str]
    target_rel: PolarPoint
    visible: dict[int, bool] = field(default_factory=dict)


class World:
    """Mutable episode state. One world per episode; the owning runner is
    the only mutator."""

    def __init__(
        self,
        agent: Pose2D,
        entities: list[Entity],
        obstacles: list[Obstacle],
        rng: np.random.Generator,
        agent_radius: float = 0.3,
        limits: MotionLimits = MotionLimits(),
        max_steps: int = 500,
    ):
        targets = [e for e in entities if e.kind == TARGET]
        if len(targets) != 1:
            raise ValueError(f"world needs exactly 1 target, got {len(targets)}")
        self.agent = agent
        self.agent_radius = agent_radius
        self.entities = entities
        self.obstacles = obstacles
        self.rng = rng
        self.limits = limits
        self.max_steps = max_steps
        self.step_index = 0

    @property
    def target(self) -> Entity:
        for e in self.entities:
            if e.kind == TARGET:
                return e
        raise RuntimeError("unreachable: no target")

    @property
    def terminated(self) -> bool:
        return self.step_index >= self.max_steps

    def line_of_sight(self, a, b) -> bool:
        """True iff the open segment between two points crosses no
        obstacle. Grazing a vertex exactly does not block."""
        ax, ay = a[0], a[1]
        bx, by = b[0], b[1]
        mid = None
        for obs in self.obstacles:
            x0, y0, x1, y1 = obs.bounds
            if (
                max(ax, bx) < x0
                or min(ax, bx) > x1
                or max(ay, by) < y0
                or min(ay, by) > y1
            ):
                continue
            v = obs.vertices
            n = len(v)
            for i in range(n):
                if _proper_intersect(a, b, v[i], v[(i + 1) % n]):
                    return False
            # segment threading the interior through two vertices
            if mid is None:
                mid = ((ax + bx) / 2.0, (ay + by) / 2.0)
            if obs.contains(mid):
                return False
        return True

    def step(self, cmd: Command) -> StepEvents:
        if self.terminated:
            raise RuntimeError(f"step on terminated world (step {self.step_index})")
        eps = 1e-9
        if abs(cmd.v) > self.limits.max_speed + eps:
            raise ValueError(f"speed {cmd.v} exceeds limit {self.limits.max_speed}")
        if abs(cmd.dtheta) > self.limits.max_turn + eps:
            raise ValueError(f"turn {cmd.dtheta} exceeds limit {self.limits.max_turn}")

        # rotate, then translate along the new heading
        heading = wrap_degrees(self.agent.heading + cmd.dtheta)
        rad = math.radians(heading)
        self.agent = Pose2D(
            self.agent.x + cmd.v * math.cos(rad),
            self.agent.y + cmd.v * math.sin(rad),
            heading,
        )

        for e in self.entities:
            e.advance()

        self.step_index += 1

        apos = (self.agent.x, self.agent.y)
        collided = False
        collided_with: Optional[str] = None
        for e in self.entities:
            if discs_collide(apos, self.agent_radius, e.position(), e.radius):
                collided = True
                collided_with = f"{e.kind}:{e.id}"
                break
        if not collided:
            for k, obs in enumerate(self.obstacles):
                x0, y0, x1, y1 = obs.bounds
                if (
                    apos[0] < x0 - self.agent_radius
                    or apos[0] > x1 + self.agent_radius
                    or apos[1] < y0 - self.agent_radius
                    or apos[1] > y1 + self.agent_radius
                ):
                    continue
                if obs.distance_to(apos) < self.agent_radius:
                    collided = True
                    collided_with = f"obstacle:{k}"
                    break

        visible = {
            e.id: self.line_of_sight(apos, e.position()) for e in self.entities
        }
        return StepEvents(
            collided=collided,
            collided_with=collided_with,
            target_rel=relative_polar(self.agent, self.target.position()),
            visible=visible,
        )
