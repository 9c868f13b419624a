"""Session-oriented HTTP service for interactive teaching.

The browser UI submits freehand demonstrations; the server owns all
learning state: it refits the TP-GMM on every accepted demonstration,
re-evaluates the grid, recomputes entropy, and returns success flags
plus either a full entropy overlay (heatmap mode) or just the most
uncertain cell (single-point mode).

Demonstrations are the persisted source of truth: with a persistence
directory configured, each session keeps an append-only log and is
restored (model refit) on startup.
"""
from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import tpgmm
from .geometry import DegenerateTrajectoryError, Trajectory, resample
from .guidance import EntropyWeights, GuidanceState, entropy_next, is_done
from .task import (
    TaskSpec,
    available_tasks,
    build_grid,
    builtin_task_path,
    evaluate_model,
    load_task,
)

HEATMAP = "heatmap"
SINGLE_POINT = "single-point"
MODES = (HEATMAP, SINGLE_POINT)
DEMO_SAMPLES = 100


class CreateSessionRequest(BaseModel):
    task: str
    mode: str = HEATMAP


class DemonstrationRequest(BaseModel):
    # Raw pointer samples [timestamp, x_cm, y_cm]; timestamps in any
    # monotone unit, renormalized server-side.
    samples: list[list[float]]


@dataclass
class Session:
    id: str
    task_name: str
    spec: TaskSpec
    mode: str
    state: GuidanceState
    demos: list = field(default_factory=list)
    model: object = None
    evaluation: object = None
    created_at: float = field(default_factory=time.time)
    updated_at: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _parse_demonstration(samples: list[list[float]]) -> Trajectory:
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 2:
        raise ValueError("need at least 2 samples of [t, x, y]")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite sample values")
    order = np.argsort(arr[:, 0], kind="stable")
    arr = arr[order]
    # Collapse duplicate timestamps (pointer events can batch).
    keep = np.concatenate([[True], np.diff(arr[:, 0]) > 0])
    arr = arr[keep]
    if arr.shape[0] < 2:
        raise ValueError("timestamps do not span a positive interval")
    traj = Trajectory.from_raw_times(arr[:, 0], arr[:, 1:])
    return resample(traj, DEMO_SAMPLES)


def create_app(
    tasks_dir: str | Path | None = None,
    persist_dir: str | Path | None = None,
    static_dir: str | Path | None = None,
    weights: EntropyWeights | None = None,
) -> FastAPI:
    app = FastAPI(title="mazeteach teaching server")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    weights = weights or EntropyWeights()
    persist = Path(persist_dir) if persist_dir else None
    if persist:
        persist.mkdir(parents=True, exist_ok=True)

    def log_path(session_id: str) -> Path:
        return persist / f"{session_id}.jsonl"

    def append_event(session: Session, event: dict) -> None:
        if persist:
            with open(log_path(session.id), "a") as f:
                f.write(json.dumps(event) + "\n")

    def new_session(task_name: str, mode: str, session_id: str | None = None) -> Session:
        try:
            spec = load_task(builtin_task_path(task_name, tasks_dir))
        except FileNotFoundError:
            raise HTTPException(status_code=404, detail=f"unknown task {task_name!r}")
        if mode not in MODES:
            raise HTTPException(status_code=422, detail=f"mode must be one of {MODES}")
        grid = build_grid(spec.grid)
        return Session(
            id=session_id or uuid.uuid4().hex,
            task_name=task_name,
            spec=spec,
            mode=mode,
            state=GuidanceState(grid, rule="entropy"),
        )

    def ingest(session: Session, traj: Trajectory) -> None:
        """Append a demonstration, refit, and re-evaluate. Caller holds the lock."""
        frames = tpgmm.make_frames(traj.start, traj.end)
        session.demos.append(tpgmm.Demonstration(traj, frames, source="human"))
        session.model = tpgmm.fit(session.demos)
        session.evaluation = evaluate_model(session.model, session.spec)
        session.state.update_evaluation(session.evaluation, weights)
        session.updated_at = time.time()

    def restore_sessions() -> None:
        if not persist:
            return
        for path in sorted(persist.glob("*.jsonl")):
            session = None
            for line in path.read_text().splitlines():
                event = json.loads(line)
                if event["event"] == "created":
                    session = new_session(event["task"], event["mode"], event["id"])
                elif event["event"] == "reset" and session:
                    session.demos.clear()
                    session.model = None
                    session.evaluation = None
                    session.state = GuidanceState(session.state.grid, rule="entropy")
                elif event["event"] == "demo" and session:
                    samples = np.asarray(event["samples"], dtype=float)
                    ingest(session, Trajectory(samples[:, 0], samples[:, 1:]))
            if session:
                sessions[session.id] = session

    def get_session(session_id: str) -> Session:
        s = sessions.get(session_id)
        if s is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return s

    def state_view(s: Session) -> dict:
        grid = s.state.grid
        done = False
        coverage = 0.0
        suggestion = None
        entropies = None
        statuses = ["untested"] * len(grid)
        if s.evaluation is not None:
            coverage = s.evaluation.coverage
            done = is_done(s.state, s.spec.criteria)
            statuses = [
                "success" if o.success else "fail" for o in s.evaluation.outcomes
            ]
            entropies = list(s.state.entropies)
            if not done:
                suggestion = entropy_next(s.state)
        cells = []
        for i, p in enumerate(grid):
            cell = {"index": i, "x": p.x, "y": p.y, "status": statuses[i]}
            if s.mode == HEATMAP and entropies is not None:
                cell["entropy"] = entropies[i]
            cells.append(cell)
        return {
            "id": s.id,
            "task": s.task_name,
            "mode": s.mode,
            "demo_count": len(s.demos),
            "coverage": coverage,
            "done": done,
            "elapsed_seconds": time.time() - s.created_at,
            "suggestion": suggestion,
            "cells": cells,
        }

    def task_descriptor(spec: TaskSpec) -> dict:
        grid = build_grid(spec.grid)
        return {
            "name": spec.name,
            "direction": spec.direction,
            "workspace": {
                "min": [spec.workspace.min.x, spec.workspace.min.y],
                "max": [spec.workspace.max.x, spec.workspace.max.y],
            },
            "obstacles": [
                {"min": [r.min.x, r.min.y], "max": [r.max.x, r.max.y]}
                for r in spec.obstacles.obstacles
            ],
            "goal": [spec.goal.x, spec.goal.y] if spec.goal else None,
            "start": [spec.start.x, spec.start.y] if spec.start else None,
            "grid": {
                "rows": spec.grid.rows,
                "cols": spec.grid.cols,
                "pitch": spec.grid.pitch,
                "cells": [[p.x, p.y] for p in grid],
            },
            "goal_tolerance": spec.criteria.goal_tolerance,
            "coverage_threshold": spec.criteria.coverage_threshold,
        }

    @app.get("/tasks")
    def list_tasks():
        names = available_tasks(tasks_dir)
        return {
            "tasks": [
                task_descriptor(load_task(builtin_task_path(n, tasks_dir)))
                for n in names
            ]
        }

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        session = new_session(req.task, req.mode)
        with registry_lock:
            sessions[session.id] = session
        append_event(
            session,
            {"event": "created", "id": session.id, "task": req.task, "mode": req.mode},
        )
        view = state_view(session)
        view["task_descriptor"] = task_descriptor(session.spec)
        return view

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str):
        return state_view(get_session(session_id))

    @app.post("/sessions/{session_id}/demonstrations")
    def submit_demonstration(session_id: str, req: DemonstrationRequest):
        session = get_session(session_id)
        try:
            traj = _parse_demonstration(req.samples)
        except (ValueError, DegenerateTrajectoryError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        with session.lock:
            ingest(session, traj)
            append_event(
                session,
                {
                    "event": "demo",
                    "samples": np.column_stack([traj.times, traj.points]).tolist(),
                },
            )
            return state_view(session)

    @app.post("/sessions/{session_id}/reset")
    def reset_session(session_id: str):
        session = get_session(session_id)
        with session.lock:
            session.demos.clear()
            session.model = None
            session.evaluation = None
            session.state = GuidanceState(session.state.grid, rule="entropy")
            session.updated_at = time.time()
            append_event(session, {"event": "reset"})
            return {"ok": True, "id": session.id, "mode": session.mode}

    restore_sessions()

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
