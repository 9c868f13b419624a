"""Task definitions: maze layout, test grid, and success evaluation.

Tasks are loaded from TOML files (units: centimeters). Two configs ship
with the repo: the training maze (start zone to goal point, 4x14 grid)
and the flipped transfer task (fixed start to goal zone, 4x8 grid).
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .geometry import (
    ObstacleSet,
    Point2,
    Rect,
    Trajectory,
    count_collisions,
    count_outside,
    endpoint_distance,
)
from .tpgmm import TPGMMModel, make_frames, reproduce

ZONE_TO_POINT = "zone-to-point"
POINT_TO_ZONE = "point-to-zone"

TASKS_DIR = Path(__file__).resolve().parent / "tasks"


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int
    pitch: float
    origin: Point2

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1 or self.pitch <= 0:
            raise ValueError("invalid grid spec")

    @property
    def size(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class SuccessCriteria:
    goal_tolerance: float = 1.5
    max_collision_samples: int = 0
    max_outside_samples: int = 0
    coverage_threshold: float = 0.9

    def __post_init__(self):
        if self.goal_tolerance <= 0:
            raise ValueError("goal_tolerance must be positive")
        if not 0.0 < self.coverage_threshold <= 1.0:
            raise ValueError("coverage_threshold must be in (0, 1]")


@dataclass(frozen=True)
class Outcome:
    success: bool
    d_goal: float
    n_collision: int
    n_outside: int


@dataclass(frozen=True)
class EvaluationResult:
    outcomes: tuple[Outcome, ...]
    coverage: float

    @classmethod
    def from_outcomes(cls, outcomes) -> "EvaluationResult":
        outcomes = tuple(outcomes)
        successes = sum(1 for o in outcomes if o.success)
        return cls(outcomes, successes / len(outcomes))


@dataclass(frozen=True)
class TaskSpec:
    name: str
    direction: str
    workspace: Rect
    obstacles: ObstacleSet
    grid: GridSpec
    criteria: SuccessCriteria = field(default_factory=SuccessCriteria)
    # zone-to-point: demos start in start_region, goal is a fixed point.
    start_region: Rect | None = None
    goal: Point2 | None = None
    # point-to-zone: demos start at a fixed point, goal varies over goal_region.
    start: Point2 | None = None
    goal_region: Rect | None = None

    def __post_init__(self):
        if self.direction == ZONE_TO_POINT:
            if self.start_region is None or self.goal is None:
                raise ValueError("zone-to-point needs start_region and goal")
            if not self.workspace.contains(self.goal):
                raise ValueError("goal outside workspace")
            if self.obstacles.contains(self.goal):
                raise ValueError("goal inside an obstacle")
            region = self.start_region
        elif self.direction == POINT_TO_ZONE:
            if self.start is None or self.goal_region is None:
                raise ValueError("point-to-zone needs start and goal_region")
            if not self.workspace.contains(self.start):
                raise ValueError("start outside workspace")
            region = self.goal_region
        else:
            raise ValueError(f"unknown direction {self.direction!r}")
        for r in self.obstacles.obstacles:
            if not r.intersects(self.workspace):
                raise ValueError("obstacle outside workspace")
        # The grid must sit inside its owning region.
        for p in build_grid(self.grid):
            if not region.contains(p):
                raise ValueError(f"grid point {p} escapes its region")

    @property
    def grid_region(self) -> Rect:
        return self.start_region if self.direction == ZONE_TO_POINT else self.goal_region

    def query_frames(self, grid_point: Point2):
        """Frames for reproducing toward/from a test grid point."""
        if self.direction == ZONE_TO_POINT:
            return make_frames(grid_point, self.goal)
        return make_frames(self.start, grid_point)

    def goal_for(self, grid_point: Point2) -> Point2:
        return self.goal if self.direction == ZONE_TO_POINT else grid_point

    def start_for(self, grid_point: Point2) -> Point2:
        return grid_point if self.direction == ZONE_TO_POINT else self.start


def build_grid(spec: GridSpec, region: Rect | None = None) -> list[Point2]:
    """Row-major grid centers at origin + (col*pitch, row*pitch)."""
    points = [
        Point2(spec.origin.x + c * spec.pitch, spec.origin.y + r * spec.pitch)
        for r in range(spec.rows)
        for c in range(spec.cols)
    ]
    if region is not None:
        for p in points:
            if not region.contains(p):
                raise ValueError(f"grid point {p} escapes the region")
    return points


def evaluate_trajectory(traj: Trajectory, spec: TaskSpec, goal: Point2) -> Outcome:
    d_goal = endpoint_distance(traj, goal)
    n_col = count_collisions(traj, spec.obstacles)
    n_out = count_outside(traj, spec.workspace)
    c = spec.criteria
    success = (
        d_goal <= c.goal_tolerance
        and n_col <= c.max_collision_samples
        and n_out <= c.max_outside_samples
    )
    return Outcome(success, d_goal, n_col, n_out)


def evaluate_model(model: TPGMMModel, spec: TaskSpec) -> EvaluationResult:
    """Reproduce from/to every grid point and score each trajectory."""
    outcomes = []
    for p in build_grid(spec.grid):
        traj = reproduce(model, spec.query_frames(p))
        outcomes.append(evaluate_trajectory(traj, spec, spec.goal_for(p)))
    return EvaluationResult.from_outcomes(outcomes)


def _point(v) -> Point2:
    return Point2(float(v[0]), float(v[1]))


def _rect(d) -> Rect:
    return Rect(_point(d["min"]), _point(d["max"]))


def load_task(path: str | Path) -> TaskSpec:
    path = Path(path)
    with open(path, "rb") as f:
        raw = tomllib.load(f)
    grid = GridSpec(
        rows=int(raw["grid"]["rows"]),
        cols=int(raw["grid"]["cols"]),
        pitch=float(raw["grid"]["pitch"]),
        origin=_point(raw["grid"]["origin"]),
    )
    crit = SuccessCriteria(**raw.get("criteria", {}))
    return TaskSpec(
        name=raw.get("name", path.stem),
        direction=raw["direction"],
        workspace=_rect(raw["workspace"]),
        obstacles=ObstacleSet(tuple(_rect(o) for o in raw.get("obstacles", []))),
        grid=grid,
        criteria=crit,
        start_region=_rect(raw["start_region"]) if "start_region" in raw else None,
        goal=_point(raw["goal"]) if "goal" in raw else None,
        start=_point(raw["start"]) if "start" in raw else None,
        goal_region=_rect(raw["goal_region"]) if "goal_region" in raw else None,
    )


def builtin_task_path(name: str, tasks_dir: str | Path | None = None) -> Path:
    d = Path(tasks_dir) if tasks_dir else TASKS_DIR
    path = d / f"{name}.toml"
    if not path.exists():
        raise FileNotFoundError(f"no task config {path}")
    return path


def available_tasks(tasks_dir: str | Path | None = None) -> list[str]:
    d = Path(tasks_dir) if tasks_dir else TASKS_DIR
    return sorted(p.stem for p in d.glob("*.toml"))
