"""Agent-centric polar tokenization.

The perceivable space is an annulus around the agent, discretized into
``n_angle`` angular sectors times ``n_dist`` radial rings. Each cell is a
token index; one extra index signals "no target visible" (occluded, too
close, too far, or outside every camera's field of view). Token indices
are plain ints: cell ``(a, r)`` maps to ``a * n_dist + r`` and the final
index ``n_angle * n_dist`` is the invalid token.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def wrap_degrees(angle: float) -> float:
    """Normalize an angle in degrees into [0, 360)."""
    a = math.fmod(angle, 360.0)
    return a + 360.0 if a < 0.0 else a


def signed_degrees(angle: float) -> float:
    """Normalize an angle in degrees into (-180, 180]."""
    a = wrap_degrees(angle)
    return a - 360.0 if a > 180.0 else a


@dataclass(frozen=True)
class PolarGrid:
    """Annular discretization parameters.

    Angular bins start at the agent heading and run counterclockwise;
    radial bins start at ``r_min``. Both are lower-inclusive, except the
    exact outer boundary ``dist == r_max`` which falls into the last ring
    so the closed annulus is fully covered.
    """

    r_min: float = 0.6
    r_max: float = 5.0
    n_angle: int = 60
    n_dist: int = 30

    def __post_init__(self):
        if not (0.0 < self.r_min < self.r_max):
            raise ValueError(f"need 0 < r_min < r_max, got [{self.r_min}, {self.r_max}]")
        if self.n_angle < 1 or self.n_dist < 1:
            raise ValueError("n_angle and n_dist must be >= 1")

    @property
    def angle_width(self) -> float:
        return 360.0 / self.n_angle

    @property
    def dist_width(self) -> float:
        return (self.r_max - self.r_min) / self.n_dist

    @property
    def n_cells(self) -> int:
        return self.n_angle * self.n_dist

    @property
    def invalid_index(self) -> int:
        return self.n_cells

    @property
    def vocab_size(self) -> int:
        """Token count including the invalid token (the K of the entropy norm)."""
        return self.n_cells + 1

    def is_valid_token(self, token: int) -> bool:
        return 0 <= token < self.n_cells

    def to_dict(self) -> dict:
        return {
            "r_min": self.r_min,
            "r_max": self.r_max,
            "n_angle": self.n_angle,
            "n_dist": self.n_dist,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PolarGrid":
        return cls(
            r_min=float(d["r_min"]),
            r_max=float(d["r_max"]),
            n_angle=int(d["n_angle"]),
            n_dist=int(d["n_dist"]),
        )


@dataclass(frozen=True)
class PolarPoint:
    """A position relative to the agent: bearing counterclockwise from the
    heading, in degrees [0, 360), and range in meters."""

    theta: float
    dist: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.dist)):
            raise ValueError(f"non-finite polar point ({self.theta}, {self.dist})")
        if self.dist < 0.0:
            raise ValueError(f"negative distance {self.dist}")
        object.__setattr__(self, "theta", wrap_degrees(self.theta))


# nudges values sitting exactly on a bin edge into the upper bin, which
# is where lower-inclusive binning puts them in exact arithmetic
_BIN_EPS = 1e-9


def encode(grid: PolarGrid, p: PolarPoint) -> int:
    """Map a relative position to its cell token, or the invalid token when
    the point lies outside the annulus. Bins are lower-inclusive; the
    exact outer boundary dist == r_max falls into the last ring."""
    if p.dist < grid.r_min or p.dist > grid.r_max:
        return grid.invalid_index
    a = min(int(p.theta / grid.angle_width + _BIN_EPS), grid.n_angle - 1)
    r = min(int((p.dist - grid.r_min) / grid.dist_width + _BIN_EPS), grid.n_dist - 1)
    return a * grid.n_dist + r


def decode(grid: PolarGrid, token: int) -> PolarPoint | None:
    """Centroid of a cell token; None for the invalid token."""
    if not (0 <= token <= grid.invalid_index):
        raise ValueError(f"token {token} out of range [0, {grid.invalid_index}]")
    if token == grid.invalid_index:
        return None
    a, r = divmod(token, grid.n_dist)
    return PolarPoint(
        theta=(a + 0.5) * grid.angle_width,
        dist=grid.r_min + (r + 0.5) * grid.dist_width,
    )


def roundtrip_cell(grid: PolarGrid, token: int) -> int:
    """Re-encode a valid token's centroid. Must return the token itself."""
    p = decode(grid, token)
    if p is None:
        raise ValueError("invalid token has no cell to round-trip")
    return encode(grid, p)


def to_world(agent_pose, p: PolarPoint) -> tuple[float, float]:
    """World coordinates of a point seen from ``agent_pose`` at relative
    bearing ``p.theta`` and range ``p.dist``.

    ``agent_pose`` needs ``x``, ``y`` and ``heading`` (degrees) attributes.
    """
    bearing = math.radians(agent_pose.heading + p.theta)
    return (
        agent_pose.x + p.dist * math.cos(bearing),
        agent_pose.y + p.dist * math.sin(bearing),
    )
