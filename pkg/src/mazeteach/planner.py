"""RRT-Connect demonstration synthesis and a quality-degradation noise model.

Planner paths stand in for clean demonstrations; the noise model
produces lower-quality copies (jittered waypoints, offset endpoint)
standing in for imperfect human teaching. Everything is deterministic
given the seed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .geometry import ObstacleSet, Point2, Trajectory, path_length, resample
from .task import TaskSpec, build_grid
from .tpgmm import Demonstration, make_frames

BANK_SAMPLES = 100


class PlanningError(RuntimeError):
    """Raised when the planner fails to connect start and goal."""


@dataclass(frozen=True)
class PlannerParams:
    step: float = 2.0
    max_iters: int = 5000
    goal_tolerance: float = 1.5
    seed: int = 0
    shortcut_iters: int = 200
    # Obstacles are inflated by this margin while planning, so demos keep
    # clearance; corner rounding then stays collision-free.
    clearance: float = 3.0
    smoothing_rounds: int = 2

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.clearance < 0:
            raise ValueError("clearance must be >= 0")


@dataclass(frozen=True)
class NoiseParams:
    waypoint_jitter_sd: float = 0.8
    endpoint_offset_sd: float = 0.8
    smoothing_window: int = 9
    seed: int = 0

    def __post_init__(self):
        if self.waypoint_jitter_sd < 0 or self.endpoint_offset_sd < 0:
            raise ValueError("noise standard deviations must be >= 0")


def _segment_free(a: np.ndarray, b: np.ndarray, obs: ObstacleSet) -> bool:
    return not obs.segment_hits(Point2(*a), Point2(*b))


class _Tree:
    def __init__(self, root: np.ndarray):
        self.nodes = [root]
        self.parents = [-1]

    def nearest(self, q: np.ndarray) -> int:
        pts = np.array(self.nodes)
        return int(np.argmin(np.sum((pts - q) ** 2, axis=1)))

    def add(self, q: np.ndarray, parent: int) -> int:
        self.nodes.append(q)
        self.parents.append(parent)
        return len(self.nodes) - 1

    def path_to_root(self, i: int) -> list[np.ndarray]:
        out = []
        while i != -1:
            out.append(self.nodes[i])
            i = self.parents[i]
        return out


def _extend(tree: _Tree, q: np.ndarray, step: float, obs: ObstacleSet):
    """One RRT extend step toward q; returns (status, new index)."""
    near_i = tree.nearest(q)
    near = tree.nodes[near_i]
    d = np.linalg.norm(q - near)
    if d <= step:
        new = q
        reached = True
    else:
        new = near + (q - near) * (step / d)
        reached = False
    if not _segment_free(near, new, obs):
        return "trapped", -1
    idx = tree.add(new, near_i)
    return ("reached" if reached else "advanced"), idx


def _connect(tree: _Tree, q: np.ndarray, step: float, obs: ObstacleSet):
    status, idx = _extend(tree, q, step, obs)
    while status == "advanced":
        status, idx = _extend(tree, q, step, obs)
    return status, idx


def _shortcut(path: np.ndarray, obs: ObstacleSet, iters: int, rng) -> np.ndarray:
    pts = [p for p in path]
    for _ in range(iters):
        n = len(pts)
        if n <= 2:
            break
        i = int(rng.integers(0, n - 1))
        j = int(rng.integers(0, n - 1))
        if abs(i - j) < 2:
            continue
        i, j = min(i, j), max(i, j)
        if _segment_free(pts[i], pts[j], obs):
            pts = pts[: i + 1] + pts[j:]
    return np.array(pts)


def _inflated(obs: ObstacleSet, margin: float) -> ObstacleSet:
    from .geometry import Rect

    return ObstacleSet(
        tuple(
            Rect(
                Point2(r.min.x - margin, r.min.y - margin),
                Point2(r.max.x + margin, r.max.y + margin),
            )
            for r in obs.obstacles
        )
    )


def _subdivide(pts: np.ndarray, step: float) -> np.ndarray:
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        n = max(1, int(np.ceil(np.linalg.norm(b - a) / step)))
        for i in range(1, n + 1):
            out.append(a + (b - a) * (i / n))
    return np.array(out)


def _round_corners(pts: np.ndarray, rounds: int) -> np.ndarray:
    # Chaikin corner cutting; endpoints stay fixed. On a polyline
    # pre-subdivided to <= step spacing the cut depth is <= step/4 per
    # round, so a clearance margin of step/2 keeps the result free.
    for _ in range(rounds):
        new = [pts[0]]
        for a, b in zip(pts[:-1], pts[1:]):
            new.append(0.75 * a + 0.25 * b)
            new.append(0.25 * a + 0.75 * b)
        new.append(pts[-1])
        pts = np.array(new)
    return pts


def plan(
    start: Point2, goal: Point2, spec: TaskSpec, params: PlannerParams
) -> Trajectory:
    """RRT-Connect path from start to goal, shortcut-smoothed, corner
    rounded, and resampled to 100 uniformly timed samples."""
    obs = spec.obstacles
    ws = spec.workspace
    for name, p in (("start", start), ("goal", goal)):
        if not ws.contains(p):
            raise PlanningError(f"{name} outside workspace")
        if obs.contains(p):
            raise PlanningError(f"{name} inside an obstacle")
    # Plan with clearance when the endpoints allow it.
    if params.clearance > 0:
        fat = _inflated(obs, params.clearance)
        if not (fat.contains(start) or fat.contains(goal)):
            obs = fat

    a = start.as_array()
    b = goal.as_array()
    if np.linalg.norm(b - a) <= params.goal_tolerance:
        return Trajectory(np.array([0.0, 1.0]), np.array([a, b]))

    rng = np.random.default_rng(params.seed)
    t_start, t_goal = _Tree(a), _Tree(b)
    path = None
    if _segment_free(a, b, obs):
        path = np.array([a, b])
    else:
        for _ in range(params.max_iters):
            q = np.array(
                [
                    rng.uniform(ws.min.x, ws.max.x),
                    rng.uniform(ws.min.y, ws.max.y),
                ]
            )
            status, idx = _extend(t_start, q, params.step, obs)
            if status != "trapped":
                target = t_start.nodes[idx]
                status2, idx2 = _connect(t_goal, target, params.step, obs)
                if status2 == "reached":
                    seg_a = t_start.path_to_root(idx)[::-1]
                    seg_b = t_goal.path_to_root(idx2)
                    path = np.array(seg_a + seg_b)
                    break
            t_start, t_goal = t_goal, t_start
        if path is None:
            raise PlanningError(
                f"no path from ({start.x}, {start.y}) within {params.max_iters} iterations"
            )
        # Trees swap every iteration; make sure the path runs start -> goal.
        if np.linalg.norm(path[0] - a) > np.linalg.norm(path[0] - b):
            path = path[::-1]

    path = _shortcut(path, obs, params.shortcut_iters, rng)
    if len(path) < 2:
        path = np.array([a, b])
    if params.smoothing_rounds > 0:
        path = _round_corners(_subdivide(path, params.step), params.smoothing_rounds)
    return resample(Trajectory.from_points(path), BANK_SAMPLES)


def perturb(demo: Trajectory, noise: NoiseParams) -> Trajectory:
    """Degrade a demonstration: correlated waypoint jitter plus a ramped
    endpoint offset. The first sample stays fixed; nothing is re-clamped,
    so degraded demos may clip obstacles or leave the workspace."""
    rng = np.random.default_rng(noise.seed)
    pts = demo.points.copy()
    n = len(pts)

    if noise.waypoint_jitter_sd > 0:
        raw = rng.normal(0.0, 1.0, size=(n, 2))
        w = max(1, noise.smoothing_window)
        kernel = np.ones(w) / w
        smooth = np.column_stack(
            [np.convolve(raw[:, i], kernel, mode="same") for i in range(2)]
        )
        sd = smooth.std()
        if sd > 0:
            smooth *= noise.waypoint_jitter_sd / sd
        smooth[0] = 0.0
        pts += smooth

    if noise.endpoint_offset_sd > 0:
        offset = rng.normal(0.0, noise.endpoint_offset_sd, size=2)
        pts += demo.times[:, None] * offset

    return Trajectory(demo.times, pts)


class DemoBank:
    """Per-task store of one demonstration per grid point and source."""

    def __init__(self, task_name: str, seed: int):
        self.task_name = task_name
        self.seed = seed
        self._demos: dict[tuple[str, int], Trajectory] = {}

    def put(self, source: str, point_index: int, traj: Trajectory) -> None:
        self._demos[(source, point_index)] = traj

    def trajectory(self, source: str, point_index: int) -> Trajectory:
        key = (source, point_index)
        if key not in self._demos:
            raise KeyError(
                f"bank for {self.task_name!r} has no {source} demo for point {point_index}"
            )
        return self._demos[key]

    def demonstration(self, source: str, point_index: int) -> Demonstration:
        """Demonstration with frames anchored at the stored path's endpoints."""
        traj = self.trajectory(source, point_index)
        return Demonstration(traj, make_frames(traj.start, traj.end), source)

    def sources(self) -> list[str]:
        return sorted({s for s, _ in self._demos})

    def indices(self, source: str) -> list[int]:
        return sorted(i for s, i in self._demos if s == source)

    def __len__(self) -> int:
        return len(self._demos)

    def save(self, path: str | Path) -> None:
        records = [
            {
                "point_index": i,
                "source": s,
                "samples": np.column_stack(
                    [self._demos[(s, i)].times, self._demos[(s, i)].points]
                ).tolist(),
            }
            for s, i in sorted(self._demos)
        ]
        doc = {"task": self.task_name, "seed": self.seed, "demos": records}
        Path(path).write_text(json.dumps(doc, indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "DemoBank":
        doc = json.loads(Path(path).read_text())
        bank = cls(doc["task"], doc["seed"])
        for rec in doc["demos"]:
            samples = np.asarray(rec["samples"], dtype=float)
            bank.put(
                rec["source"],
                int(rec["point_index"]),
                Trajectory(samples[:, 0], samples[:, 1:]),
            )
        return bank


def build_demo_bank(
    spec: TaskSpec,
    params: PlannerParams,
    noise: NoiseParams | None = None,
) -> DemoBank:
    """Plan one demonstration per grid point; optionally add perturbed
    copies under the 'noisy' source tag. Per-point seeds are
    base_seed + point index."""
    bank = DemoBank(spec.name, params.seed)
    for i, p in enumerate(build_grid(spec.grid)):
        start = spec.start_for(p)
        goal = spec.goal_for(p)
        try:
            traj = plan(start, goal, spec, replace(params, seed=params.seed + i))
        except PlanningError as e:
            raise PlanningError(f"grid point {i} at ({p.x}, {p.y}): {e}") from e
        bank.put("planner", i, traj)
        if noise is not None:
            bank.put(
                "noisy", i, perturb(traj, replace(noise, seed=noise.seed + i))
            )
    return bank
