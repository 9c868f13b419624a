from __future__ import annotations

import numpy as np
import pytest

from mazeteach.geometry import ObstacleSet, Point2, Rect, Trajectory
from mazeteach.task import (
    GridSpec,
    SuccessCriteria,
    TaskSpec,
    available_tasks,
    build_grid,
    builtin_task_path,
    evaluate_trajectory,
    load_task,
)


def test_builtin_tasks_available():
    names = available_tasks()
    assert "training" in names and "transfer" in names


def test_training_grid_has_56_points(training_spec):
    pts = build_grid(training_spec.grid)
    assert len(pts) == 56
    assert training_spec.grid.size == 56
    # Row-major: the first row shares y and x grows by one pitch.
    assert pts[1].y == pts[0].y
    assert pts[1].x - pts[0].x == pytest.approx(training_spec.grid.pitch)
    cols = training_spec.grid.cols
    assert pts[cols].x == pts[0].x
    assert pts[cols].y - pts[0].y == pytest.approx(training_spec.grid.pitch)


def test_transfer_grid_has_32_points(transfer_spec):
    assert len(build_grid(transfer_spec.grid)) == 32
    assert transfer_spec.direction == "point-to-zone"


def test_grid_points_inside_their_region(training_spec, transfer_spec):
    for spec in (training_spec, transfer_spec):
        region = spec.grid_region
        for p in build_grid(spec.grid):
            assert region.contains(p)


def test_build_grid_region_check():
    spec = GridSpec(rows=1, cols=2, pitch=5.0, origin=Point2(0.0, 0.0))
    with pytest.raises(ValueError):
        build_grid(spec, region=Rect(Point2(-1, -1), Point2(3, 3)))


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(rows=0, cols=3, pitch=1.0, origin=Point2(0, 0))
    with pytest.raises(ValueError):
        GridSpec(rows=1, cols=1, pitch=0.0, origin=Point2(0, 0))


def test_success_criteria_validation():
    with pytest.raises(ValueError):
        SuccessCriteria(goal_tolerance=0.0)
    with pytest.raises(ValueError):
        SuccessCriteria(coverage_threshold=1.5)


def test_task_spec_direction_validation():
    ws = Rect(Point2(0, 0), Point2(10, 10))
    grid = GridSpec(rows=1, cols=2, pitch=2.0, origin=Point2(1, 1))
    with pytest.raises(ValueError):
        TaskSpec(
            name="bad",
            direction="sideways",
            workspace=ws,
            obstacles=ObstacleSet(),
            grid=grid,
        )
    with pytest.raises(ValueError):
        TaskSpec(
            name="bad",
            direction="zone-to-point",
            workspace=ws,
            obstacles=ObstacleSet(),
            grid=grid,
            start_region=Rect(Point2(0, 0), Point2(10, 5)),
            goal=Point2(20, 20),  # outside workspace
        )
    with pytest.raises(ValueError):
        TaskSpec(
            name="bad",
            direction="zone-to-point",
            workspace=ws,
            obstacles=ObstacleSet(),
            grid=grid,
            start_region=Rect(Point2(5, 5), Point2(6, 6)),  # grid escapes
            goal=Point2(9, 9),
        )


def test_query_frames_and_endpoints(training_spec, transfer_spec):
    p = Point2(5.0, 5.0)
    assert training_spec.start_for(p) == p
    assert training_spec.goal_for(p) == training_spec.goal
    fs, fg = training_spec.query_frames(p)
    np.testing.assert_array_equal(fs.b[1:], [5.0, 5.0])

    assert transfer_spec.start_for(p) == transfer_spec.start
    assert transfer_spec.goal_for(p) == p


def test_evaluate_trajectory_outcomes(mini_spec):
    goal = mini_spec.goal
    ok = Trajectory.from_points([[14.0, 2.0], [5.0, 27.0], [goal.x, goal.y]])
    out = evaluate_trajectory(ok, mini_spec, goal)
    assert out.success and out.d_goal == 0.0

    off = Trajectory.from_points([[14.0, 2.0], [5.0, 27.0], [goal.x, goal.y - 3.0]])
    assert not evaluate_trajectory(off, mini_spec, goal).success

    through = Trajectory.from_points([[14.0, 2.0], [20.0, 27.0], [goal.x, goal.y]])
    out = evaluate_trajectory(through, mini_spec, goal)
    assert out.n_collision > 0 and not out.success


def test_load_task_round_trip(mini_task_path):
    spec = load_task(mini_task_path)
    assert spec.name == "mini"
    assert spec.grid.size == 6
    assert len(spec.obstacles.obstacles) == 1
    with pytest.raises(FileNotFoundError):
        builtin_task_path("nonexistent")
