"""2D primitives, containment/collision counting, and trajectory resampling.

All coordinates are in centimeters, workspace frame, origin at the
workspace lower-left corner. Everything here is a pure function on
immutable values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class DegenerateTrajectoryError(ValueError):
    """Raised when a trajectory has zero path length and cannot be resampled."""


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class Rect:
    min: Point2
    max: Point2

    def __post_init__(self):
        if not (self.min.x < self.max.x and self.min.y < self.max.y):
            raise ValueError("rect requires min < max on both axes")

    @property
    def width(self) -> float:
        return self.max.x - self.min.x

    @property
    def height(self) -> float:
        return self.max.y - self.min.y

    def contains(self, p: Point2) -> bool:
        """Boundary counts as inside."""
        return self.min.x <= p.x <= self.max.x and self.min.y <= p.y <= self.max.y

    def intersects(self, other: "Rect") -> bool:
        return not (
            other.max.x < self.min.x
            or other.min.x > self.max.x
            or other.max.y < self.min.y
            or other.min.y > self.max.y
        )


@dataclass(frozen=True)
class ObstacleSet:
    obstacles: tuple[Rect, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    def contains(self, p: Point2) -> bool:
        return any(r.contains(p) for r in self.obstacles)

    def segment_hits(self, a: Point2, b: Point2) -> bool:
        """True if segment a-b touches any obstacle (boundary counts)."""
        return any(_segment_intersects_rect(a, b, r) for r in self.obstacles)


def _segment_intersects_rect(a: Point2, b: Point2, r: Rect) -> bool:
    # Liang-Barsky slab clipping; touching the boundary counts as a hit.
    dx, dy = b.x - a.x, b.y - a.y
    t0, t1 = 0.0, 1.0
    for p, q in (
        (-dx, a.x - r.min.x),
        (dx, r.max.x - a.x),
        (-dy, a.y - r.min.y),
        (dy, r.max.y - a.y),
    ):
        if p == 0.0:
            if q < 0.0:
                return False
        else:
            t = q / p
            if p < 0.0:
                if t > t1:
                    return False
                t0 = max(t0, t)
            else:
                if t < t0:
                    return False
                t1 = min(t1, t)
    return t0 <= t1


class Trajectory:
    """Time-stamped 2D polyline with normalized time in [0, 1].

    Invariants: at least 2 samples, strictly increasing times,
    t[0] == 0 and t[-1] == 1.
    """

    __slots__ = ("times", "points")

    def __init__(self, times, points):
        times = np.asarray(times, dtype=float)
        points = np.asarray(points, dtype=float)
        if times.ndim != 1 or points.shape != (times.size, 2):
            raise ValueError("times must be (n,), points must be (n, 2)")
        if times.size < 2:
            raise ValueError("trajectory needs at least 2 samples")
        if not (np.all(np.diff(times) > 0) and times[0] == 0.0 and times[-1] == 1.0):
            raise ValueError("times must be strictly increasing from 0 to 1")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(points))):
            raise ValueError("non-finite trajectory data")
        self.times = times
        self.points = points
        self.times.setflags(write=False)
        self.points.setflags(write=False)

    def __len__(self) -> int:
        return self.times.size

    @classmethod
    def from_points(cls, points) -> "Trajectory":
        """Build a trajectory with uniform times from a bare point sequence."""
        points = np.asarray(points, dtype=float)
        return cls(np.linspace(0.0, 1.0, len(points)), points)

    @classmethod
    def from_raw_times(cls, times, points) -> "Trajectory":
        """Normalize arbitrary monotone timestamps onto [0, 1]."""
        times = np.asarray(times, dtype=float)
        span = times[-1] - times[0]
        if span <= 0:
            raise ValueError("timestamps must span a positive interval")
        return cls((times - times[0]) / span, points)

    @property
    def start(self) -> Point2:
        return Point2(*self.points[0])

    @property
    def end(self) -> Point2:
        return Point2(*self.points[-1])

    def translated(self, dx: float, dy: float) -> "Trajectory":
        return Trajectory(self.times, self.points + np.array([dx, dy]))


def point_in_rect(p: Point2, r: Rect) -> bool:
    return r.contains(p)


def count_collisions(traj: Trajectory, obs: ObstacleSet) -> int:
    """Number of trajectory samples inside any obstacle (boundary inclusive)."""
    n = 0
    for x, y in traj.points:
        if obs.contains(Point2(x, y)):
            n += 1
    return n


def count_outside(traj: Trajectory, workspace: Rect) -> int:
    """Number of trajectory samples outside the workspace rectangle."""
    inside = (
        (traj.points[:, 0] >= workspace.min.x)
        & (traj.points[:, 0] <= workspace.max.x)
        & (traj.points[:, 1] >= workspace.min.y)
        & (traj.points[:, 1] <= workspace.max.y)
    )
    return int(np.sum(~inside))


def endpoint_distance(traj: Trajectory, goal: Point2) -> float:
    return traj.end.distance_to(goal)


def resample(traj: Trajectory, n: int) -> Trajectory:
    """Resample to n samples at uniform normalized times.

    Positions are interpolated linearly in time along the polyline;
    first and last points are preserved exactly. Resampling its own
    output at the same n is an exact fixed point.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    seg = np.diff(traj.points, axis=0)
    if float(np.hypot(seg[:, 0], seg[:, 1]).sum()) == 0.0:
        raise DegenerateTrajectoryError("zero-length path cannot be resampled")
    s = np.linspace(0.0, 1.0, n)
    if n == len(traj) and np.array_equal(traj.times, s):
        return traj
    x = np.interp(s, traj.times, traj.points[:, 0])
    y = np.interp(s, traj.times, traj.points[:, 1])
    out = np.column_stack([x, y])
    out[0] = traj.points[0]
    out[-1] = traj.points[-1]
    return Trajectory(s, out)


def path_length(traj: Trajectory) -> float:
    seg = np.diff(traj.points, axis=0)
    return float(np.hypot(seg[:, 0], seg[:, 1]).sum())
