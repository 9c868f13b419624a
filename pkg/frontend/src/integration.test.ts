/** End-to-end tests against a live teaching server.
 *
 * A real `mazeteach serve` process is spawned; demonstrations are
 * scripted pointer streams built exactly the way the canvas handlers
 * build them (pixel samples mapped through the canvas transform). */
import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiError, Client, type PointerSample, type SessionState, type TaskDescriptor } from "./api.js";
import { CanvasTransform, buildScene } from "./scene.js";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;
const CANVAS = { width: 560, height: 820 };

let server: ChildProcess;
const client = new Client(BASE);

async function waitForServer(timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      await client.listTasks();
      return;
    } catch {
      await new Promise((resolve) => setTimeout(resolve, 250));
    }
  }
  throw new Error("server did not come up in time");
}

beforeAll(async () => {
  server = spawn("mazeteach", ["serve", "--addr", `127.0.0.1:${PORT}`], {
    stdio: "ignore",
  });
  await waitForServer();
}, 40000);

afterAll(() => {
  server?.kill();
});

/** Scripted pointer stream along waypoints, generated the same way the
 * canvas handlers do it: pixel positions mapped back to workspace cm,
 * with monotonically increasing timestamps. */
function scriptedStroke(
  task: TaskDescriptor,
  waypointsCm: [number, number][],
  samples = 60,
): PointerSample[] {
  const transform = new CanvasTransform(task.workspace, CANVAS);
  const pixels = waypointsCm.map(([x, y]) => transform.toCanvas(x, y));
  const stream: PointerSample[] = [];
  for (let i = 0; i < samples; i++) {
    const pos = (i / (samples - 1)) * (pixels.length - 1);
    const seg = Math.min(Math.floor(pos), pixels.length - 2);
    const f = pos - seg;
    const px = pixels[seg][0] + f * (pixels[seg + 1][0] - pixels[seg][0]);
    const py = pixels[seg][1] + f * (pixels[seg + 1][1] - pixels[seg][1]);
    const [x, y] = transform.toWorkspace(px, py);
    stream.push([1000 + 16 * i, x, y]);
  }
  return stream;
}

/** An S-shaped route through the training maze from a given start. */
function mazeRoute(start: [number, number]): [number, number][] {
  return [start, [37, 15], [37, 35], [8, 40], [8, 55], [22.5, 66]];
}

describe("live server", () => {
  it("lists the built-in tasks", async () => {
    const { tasks } = await client.listTasks();
    const names = tasks.map((t) => t.name);
    expect(names).toContain("training");
    expect(names).toContain("transfer");
  });

  it("renders 56 cells for a heatmap training session", async () => {
    const session = await client.createSession("training", "heatmap");
    const scene = buildScene(session, session.task_descriptor, CANVAS);
    expect(scene.cells).toHaveLength(56);
    expect(session.mode).toBe("heatmap");
    expect(session.done).toBe(false);
  });

  it("renders 32 cells for the transfer task", async () => {
    const session = await client.createSession("transfer", "heatmap");
    const scene = buildScene(session, session.task_descriptor, CANVAS);
    expect(scene.cells).toHaveLength(32);
  });

  it("updates circles and coverage within one round trip", async () => {
    const session = await client.createSession("training", "heatmap");
    const task = session.task_descriptor;
    const view = await client.submitDemonstration(
      session.id,
      scriptedStroke(task, mazeRoute([8, 4])),
    );
    expect(view.demo_count).toBe(1);
    const scene = buildScene(view, task, CANVAS);
    const statuses = new Set(view.cells.map((c) => c.status));
    expect(statuses.has("untested")).toBe(false);
    expect(scene.cells.some((c) => c.heat !== null)).toBe(true);
    expect(view.coverage).toBeGreaterThanOrEqual(0);
    expect(view.elapsed_seconds).toBeGreaterThanOrEqual(0);
  }, 60000);

  it("marks exactly one suggestion in single-point mode", async () => {
    const session = await client.createSession("training", "single-point");
    const task = session.task_descriptor;
    const view = await client.submitDemonstration(
      session.id,
      scriptedStroke(task, mazeRoute([8, 4])),
    );
    const scene = buildScene(view, task, CANVAS);
    if (!view.done) {
      expect(scene.cells.filter((c) => c.suggested)).toHaveLength(1);
    }
    // single-point responses carry no entropy overlay at all
    expect(view.cells.every((c) => c.entropy === undefined)).toBe(true);
    expect(scene.cells.every((c) => c.heat === null)).toBe(true);
  }, 60000);

  it("rejects a sub-2-sample stroke without changing the session", async () => {
    const session = await client.createSession("training", "heatmap");
    await expect(
      client.submitDemonstration(session.id, [[0, 5, 5]]),
    ).rejects.toThrowError(ApiError);
    const after = await client.getSession(session.id);
    expect(after.demo_count).toBe(0);
  });

  it("resets a session in place, keeping its mode", async () => {
    const session = await client.createSession("training", "single-point");
    await client.submitDemonstration(
      session.id,
      scriptedStroke(session.task_descriptor, mazeRoute([8, 4])),
    );
    const result = await client.resetSession(session.id);
    expect(result.mode).toBe("single-point");
    const view = await client.getSession(session.id);
    expect(view.demo_count).toBe(0);
    expect(view.cells.every((c) => c.status === "untested")).toBe(true);
  }, 60000);

  it("reaches done by following the suggestions, which disables drawing", async () => {
    const session = await client.createSession("training", "heatmap");
    const task = session.task_descriptor;
    let view: SessionState = session;
    let start: [number, number] = [8, 4];
    for (let i = 0; i < 14 && !view.done; i++) {
      view = await client.submitDemonstration(
        session.id,
        scriptedStroke(task, mazeRoute(start)),
      );
      if (view.suggestion !== null) {
        const cell = view.cells[view.suggestion];
        start = [cell.x, cell.y];
      }
    }
    expect(view.done).toBe(true);
    expect(view.coverage).toBeGreaterThanOrEqual(task.coverage_threshold);
    expect(view.suggestion).toBeNull();
    const scene = buildScene(view, task, CANVAS);
    expect(scene.drawingEnabled).toBe(false);
    expect(scene.cells.some((c) => c.suggested)).toBe(false);
  }, 180000);
});
