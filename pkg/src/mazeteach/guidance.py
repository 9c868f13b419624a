"""Demonstration-selection rules and shared teaching-loop state.

Two rules pick where the next demonstration should come from:

* entropy rule: each grid region gets a failure probability
  p = alpha*d_goal + beta*n_collision + gamma*n_outside (features
  max-normalized over the grid), scored by -p*ln(p); the next
  demonstration comes from the highest-scoring undemonstrated region.
* heuristic rule: the three-phase locality baseline (first demo
  anywhere, then grow a 4 cm neighborhood around it, then target the
  densest failure cluster adjacent to successes).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Point2
from .task import EvaluationResult, SuccessCriteria

P_FLOOR = 1e-9
HEURISTIC_RADIUS = 4.0


class ExhaustedError(RuntimeError):
    """Every grid point has already been demonstrated."""


@dataclass(frozen=True)
class RegionFeatures:
    d_goal: float
    n_collision: int
    n_outside: int
    d_goal_norm: float
    n_collision_norm: float
    n_outside_norm: float


@dataclass(frozen=True)
class EntropyWeights:
    alpha: float = 1.0 / 3.0
    beta: float = 1.0 / 3.0
    gamma: float = 1.0 / 3.0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0 or self.gamma < 0:
            raise ValueError("weights must be non-negative")
        if abs(self.alpha + self.beta + self.gamma - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")


def compute_features(result: EvaluationResult) -> list[RegionFeatures]:
    """Per-region raw features, each normalized by its maximum over the grid
    (zero when the maximum is zero)."""
    d = np.array([o.d_goal for o in result.outcomes])
    nc = np.array([o.n_collision for o in result.outcomes], dtype=float)
    no = np.array([o.n_outside for o in result.outcomes], dtype=float)

    def norm(v: np.ndarray) -> np.ndarray:
        m = v.max()
        return v / m if m > 0 else np.zeros_like(v)

    dn, ncn, non = norm(d), norm(nc), norm(no)
    return [
        RegionFeatures(d[i], int(nc[i]), int(no[i]), dn[i], ncn[i], non[i])
        for i in range(len(result.outcomes))
    ]


def region_probability(f: RegionFeatures, w: EntropyWeights) -> float:
    """Weighted sum of normalized failure features, clamped into (0, 1]."""
    p = w.alpha * f.d_goal_norm + w.beta * f.n_collision_norm + w.gamma * f.n_outside_norm
    return min(max(p, P_FLOOR), 1.0)


def region_entropy(p: float) -> float:
    """Per-region entropy term -p*ln(p)."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must be in (0, 1], got {p}")
    return -p * math.log(p)


@dataclass
class GuidanceState:
    """One teaching session's view of the grid: latest evaluation, scores,
    and the ordered demonstration history."""

    grid: list[Point2]
    rule: str = "entropy"
    evaluation: EvaluationResult | None = None
    history: list[int] = field(default_factory=list)
    probabilities: list[float] = field(default_factory=list)
    entropies: list[float] = field(default_factory=list)

    def record_demo(self, point_index: int) -> None:
        if not 0 <= point_index < len(self.grid):
            raise IndexError(f"grid index {point_index} out of range")
        self.history.append(point_index)

    def update_evaluation(
        self, result: EvaluationResult, weights: EntropyWeights | None = None
    ) -> None:
        if len(result.outcomes) != len(self.grid):
            raise ValueError("evaluation size does not match grid")
        weights = weights or EntropyWeights()
        self.evaluation = result
        feats = compute_features(result)
        self.probabilities = [region_probability(f, weights) for f in feats]
        self.entropies = [region_entropy(p) for p in self.probabilities]

    @property
    def total_entropy(self) -> float:
        """Diagnostic sum of per-region entropy terms."""
        return float(sum(self.entropies))


def _check_not_exhausted(state: GuidanceState) -> set[int]:
    remaining = set(range(len(state.grid))) - set(state.history)
    if not remaining:
        raise ExhaustedError("every grid point has been demonstrated")
    return remaining


def entropy_next(state: GuidanceState, w: EntropyWeights | None = None) -> int:
    """Undemonstrated grid index with the highest -p*ln(p) score.

    Ties break toward failed points, then toward the lowest row-major
    index.
    """
    if state.evaluation is None:
        raise ValueError("state has no evaluation")
    remaining = _check_not_exhausted(state)
    if w is not None:
        state.update_evaluation(state.evaluation, w)

    def key(i: int):
        failed = not state.evaluation.outcomes[i].success
        return (-state.entropies[i], not failed, i)

    return min(remaining, key=key)


def is_done(state: GuidanceState, criteria: SuccessCriteria) -> bool:
    if state.evaluation is None:
        raise ValueError("state has no evaluation")
    return state.evaluation.coverage >= criteria.coverage_threshold


def _dist(a: Point2, b: Point2) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def _eight_neighbors(grid: list[Point2], i: int, pitch: float) -> list[int]:
    # Grid is row-major but only point positions are stored; neighbors are
    # the points within ~1 pitch step on each axis.
    p = grid[i]
    out = []
    for j, q in enumerate(grid):
        if j == i:
            continue
        if abs(q.x - p.x) <= pitch * 1.01 and abs(q.y - p.y) <= pitch * 1.01:
            out.append(j)
    return out


def heuristic_next(state: GuidanceState) -> int:
    """Three-phase locality baseline.

    Phase (ii): while any 8-neighbor of the first demonstrated point is
    unsuccessful, return the nearest failed point within 4 cm of it.
    Phase (iii): among failed points within 4 cm of some successful
    point, return the one whose own 4 cm ball holds the most failures.
    Falls back to the failed point nearest a success when no candidate
    lies within 4 cm.
    """
    if state.evaluation is None:
        raise ValueError("state has no evaluation")
    remaining = _check_not_exhausted(state)
    grid = state.grid
    outcomes = state.evaluation.outcomes
    failed = [i for i in range(len(grid)) if not outcomes[i].success]
    failed_remaining = [i for i in failed if i in remaining]
    if not failed_remaining:
        # Nothing failed is left to demonstrate; pick any remaining point.
        return min(remaining)

    xs = sorted({round(p.x, 9) for p in grid})
    pitch = xs[1] - xs[0] if len(xs) > 1 else 1.0

    first = state.history[0] if state.history else None
    if first is not None:
        neighbors = _eight_neighbors(grid, first, pitch)
        if any(not outcomes[j].success for j in neighbors):
            near = [
                i for i in failed_remaining if _dist(grid[i], grid[first]) <= HEURISTIC_RADIUS
            ]
            if near:
                return min(near, key=lambda i: (_dist(grid[i], grid[first]), i))
            # No failed point within reach of the first demo; behave as (iii).

    successes = [i for i in range(len(grid)) if outcomes[i].success]
    if successes:
        candidates = [
            i
            for i in failed_remaining
            if any(_dist(grid[i], grid[s]) <= HEURISTIC_RADIUS for s in successes)
        ]
        if candidates:
            def cluster_size(i: int) -> int:
                return sum(
                    1 for j in failed if _dist(grid[i], grid[j]) <= HEURISTIC_RADIUS
                )

            return min(candidates, key=lambda i: (-cluster_size(i), i))
        return min(
            failed_remaining,
            key=lambda i: (min(_dist(grid[i], grid[s]) for s in successes), i),
        )
    # No successes anywhere: stay local to the first demo if any, else lowest.
    if first is not None:
        return min(failed_remaining, key=lambda i: (_dist(grid[i], grid[first]), i))
    return min(failed_remaining)
