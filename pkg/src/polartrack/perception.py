"""Oracle reasoner over the polar vocabulary.

Stands in for a learned perception stack: ground-truth visibility plus
appearance similarity against the target memory are turned into a logit
vector over the cell tokens. An entity is observable when it sits inside
the annulus, inside some camera's field of view, and has line of sight to
the agent. Each detected entity puts mass on its (noise-jittered) cell;
how much depends on how similar it looks to the remembered target, which
is what lets a bootstrapped memory pull the argmax onto the true target
and away from look-alikes. The invalid entry gets a small standing bias,
plus a large bonus when nothing is detected at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .memory import TargetMemory, memory_similarity
from .polar import PolarGrid, PolarPoint, encode, signed_degrees
from .world import Entity, World, relative_polar


@dataclass(frozen=True)
class CameraView:
    yaw: float  # degrees ccw from agent heading
    fov: float  # degrees

    def covers(self, theta: float) -> bool:
        return abs(signed_degrees(theta - self.yaw)) <= self.fov / 2.0


@dataclass(frozen=True)
class CameraRig:
    views: tuple[CameraView, ...]

    def __post_init__(self):
        if not (1 <= len(self.views) <= 8):
            raise ValueError("rig needs 1..8 views")
        for v in self.views:
            if not (0.0 < v.fov <= 360.0):
                raise ValueError(f"fov {v.fov} outside (0, 360]")

    @classmethod
    def front(cls, fov: float = 90.0) -> "CameraRig":
        return cls(views=(CameraView(0.0, fov),))

    @classmethod
    def ring(cls, n: int = 4, fov: float = 90.0) -> "CameraRig":
        return cls(views=tuple(CameraView(i * 360.0 / n, fov) for i in range(n)))

    def covers(self, theta: float) -> bool:
        return any(v.covers(theta) for v in self.views)

    def to_dict(self) -> dict:
        return {"views": [{"yaw": v.yaw, "fov": v.fov} for v in self.views]}

    @classmethod
    def from_dict(cls, d: dict) -> "CameraRig":
        return cls(views=tuple(CameraView(float(v["yaw"]), float(v["fov"])) for v in d["views"]))


@dataclass(frozen=True)
class PerceptionParams:
    """Noise and logit-construction knobs.

    ``base_detectability`` is the per-step probability that an observable
    entity actually registers; the remaining score constants shape the
    softmax sharpness and through it the entropy confidence. The default
    scores are ordered so that, once the memory is bootstrapped,

        look-alike (sim ~0.6) < invalid bias < kind-blind < true target,

    meaning a memory-equipped reasoner answers "target absent" when only
    a look-alike is in view (freezing the memory), while a memory-less
    one scores every entity identically and chases whatever bins first.
    """

    angle_noise: float = 1.5  # deg stddev
    dist_noise: float = 0.10  # m stddev
    sim_temperature: float = 4.0
    base_detectability: float = 1.0
    invalid_bias: float = 10.9
    detect_score: float = 8.0
    feature_noise: float = 0.05
    no_detection_bonus: float = 9.5
    empty_mem_similarity: float = 0.85  # kind-blind stand-in before bootstrap

    def __post_init__(self):
        if self.angle_noise < 0 or self.dist_noise < 0 or self.feature_noise < 0:
            raise ValueError("noise stddevs must be >= 0")
        if self.sim_temperature <= 0:
            raise ValueError("sim_temperature must be > 0")
        if not (0.0 <= self.base_detectability <= 1.0):
            raise ValueError("base_detectability must be in [0, 1]")

    def noiseless(self) -> "PerceptionParams":
        from dataclasses import replace

        return replace(self, angle_noise=0.0, dist_noise=0.0, feature_noise=0.0)

    def to_dict(self) -> dict:
        from dataclasses import asdict

        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PerceptionParams":
        return cls(**d)


@dataclass
class ReasonerOutput:
    """Logits over the token vocabulary, the argmax token, and the
    observed appearance of whatever entity won the argmax cell (absent
    when the argmax is the invalid token)."""

    logits: np.ndarray
    token: int
    candidate: Optional[np.ndarray]


def is_observable(world: World, rig: CameraRig, grid: PolarGrid, entity: Entity) -> bool:
    rel = relative_polar(world.agent, entity.position())
    if not (grid.r_min <= rel.dist <= grid.r_max):
        return False
    if not rig.covers(rel.theta):
        return False
    return world.line_of_sight((world.agent.x, world.agent.y), entity.position())


def observe(
    world: World,
    rig: CameraRig,
    mem: TargetMemory,
    grid: PolarGrid,
    params: PerceptionParams,
    rng: np.random.Generator,
) -> ReasonerOutput:
    """One reasoning step: build logits from the currently detectable
    entities and pick the argmax token.

    Deterministic given the generator state; draws happen in entity-list
    order so replays are bit-exact.
    """
    logits = np.zeros(grid.vocab_size)
    logits[grid.invalid_index] = params.invalid_bias

    cell_owner: dict[int, tuple[float, np.ndarray]] = {}
    detected_any = False
    for e in world.entities:
        if not is_observable(world, rig, grid, e):
            continue
        if params.base_detectability < 1.0 and rng.random() >= params.base_detectability:
            continue
        detected_any = True
        rel = relative_polar(world.agent, e.position())
        theta = rel.theta + rng.normal() * params.angle_noise
        dist = rel.dist + rng.normal() * params.dist_noise
        # the entity was deemed observable from its true range; noise only
        # jitters the cell, it cannot push the detection out of the annulus
        dist = min(max(dist, grid.r_min), grid.r_max)
        cell = encode(grid, PolarPoint(theta, dist))
        feat = e.appearance
        if params.feature_noise > 0.0:
            feat = feat + rng.normal(size=feat.size) * params.feature_noise
        if mem.is_empty:
            sim = params.empty_mem_similarity
        else:
            sim = memory_similarity(mem, feat)
        score = params.detect_score + params.sim_temperature * sim
        best = cell_owner.get(cell)
        if best is None or score > best[0]:
            cell_owner[cell] = (score, feat)
            logits[cell] = max(logits[cell], score)

    if not detected_any:
        logits[grid.invalid_index] += params.no_detection_bonus

    # argmax with a deterministic tie policy: ties (which arise when the
    # memory is empty and every detection scores identically) go to the
    # most dead-ahead cell, then the nearest ring, then the lowest index
    token = grid.invalid_index
    if cell_owner:
        def rank(item):
            cell, (score, _) = item
            a, r = divmod(cell, grid.n_dist)
            return (score, -min(a, grid.n_angle - a), -r, -cell)

        best_cell, (best_score, _) = max(cell_owner.items(), key=rank)
        if best_score >= logits[grid.invalid_index]:
            token = best_cell
    candidate = None if token == grid.invalid_index else cell_owner[token][1]
    return ReasonerOutput(logits=logits, token=token, candidate=candidate)


def nearest_detection(
    world: World,
    rig: CameraRig,
    grid: PolarGrid,
    params: PerceptionParams,
    rng: np.random.Generator,
) -> Optional[PolarPoint]:
    """Kind-blind raw readout: the noisy polar position of the nearest
    detected entity, with no tokenization, no invalid semantics and no
    appearance handling. This is the degraded front end used by the arm
    that runs without spatial-token reasoning."""
    best: Optional[tuple[float, Entity]] = None
    for e in world.entities:
        if not is_observable(world, rig, grid, e):
            continue
        if params.base_detectability < 1.0 and rng.random() >= params.base_detectability:
            continue
        rel = relative_polar(world.agent, e.position())
        if best is None or rel.dist < best[0]:
            best = (rel.dist, e)
    if best is None:
        return None
    rel = relative_polar(world.agent, best[1].position())
    theta = rel.theta + rng.normal() * params.angle_noise
    dist = max(rel.dist + rng.normal() * params.dist_noise, 0.0)
    return PolarPoint(theta, dist)
