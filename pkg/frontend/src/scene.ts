/** Pure render model: maps server state into drawable primitives.
 *
 * Nothing in here talks to the network or the DOM, and nothing derives
 * entropy/success/suggestions — the scene is a direct projection of the
 * last response body, which keeps the server the single source of truth
 * and makes rendering testable without a canvas. */

import type { SessionState, TaskDescriptor } from "./api.js";

export interface CanvasSize {
  width: number;
  height: number;
}

/** Affine canvas<->workspace mapping: uniform scale, centered, y flipped
 * so the workspace origin sits at the bottom-left. */
export class CanvasTransform {
  readonly scale: number;
  readonly offsetX: number;
  readonly offsetY: number;

  constructor(
    readonly workspace: { min: [number, number]; max: [number, number] },
    readonly canvas: CanvasSize,
    readonly padding = 16,
  ) {
    const w = workspace.max[0] - workspace.min[0];
    const h = workspace.max[1] - workspace.min[1];
    this.scale = Math.min(
      (canvas.width - 2 * padding) / w,
      (canvas.height - 2 * padding) / h,
    );
    this.offsetX = (canvas.width - w * this.scale) / 2;
    this.offsetY = (canvas.height - h * this.scale) / 2;
  }

  toCanvas(xCm: number, yCm: number): [number, number] {
    const x = this.offsetX + (xCm - this.workspace.min[0]) * this.scale;
    const y =
      this.canvas.height -
      this.offsetY -
      (yCm - this.workspace.min[1]) * this.scale;
    return [x, y];
  }

  toWorkspace(xPx: number, yPx: number): [number, number] {
    const x = this.workspace.min[0] + (xPx - this.offsetX) / this.scale;
    const y =
      this.workspace.min[1] +
      (this.canvas.height - this.offsetY - yPx) / this.scale;
    return [x, y];
  }
}

/** Perceptually ordered ramp (dark blue -> yellow), t in [0, 1]. */
export function entropyColor(t: number): string {
  const stops: [number, number, number][] = [
    [68, 1, 84],
    [59, 82, 139],
    [33, 145, 140],
    [94, 201, 98],
    [253, 231, 37],
  ];
  const clamped = Math.min(Math.max(t, 0), 1);
  const pos = clamped * (stops.length - 1);
  const i = Math.min(Math.floor(pos), stops.length - 2);
  const f = pos - i;
  const mix = stops[i].map((a, c) => Math.round(a + f * (stops[i + 1][c] - a)));
  return `rgb(${mix[0]}, ${mix[1]}, ${mix[2]})`;
}

export const STATUS_COLORS: Record<string, string> = {
  untested: "#9e9e9e",
  success: "#1f77b4", // blue circles: successfully learnt
  fail: "#d62728", // red circles: failed
};

export interface CellView {
  index: number;
  px: number;
  py: number;
  radius: number;
  statusColor: string;
  heat: string | null;
  suggested: boolean;
}

export interface RectView {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface Scene {
  transform: CanvasTransform;
  workspaceRect: RectView;
  obstacles: RectView[];
  goal: [number, number] | null;
  start: [number, number] | null;
  cells: CellView[];
  coverage: number;
  demoCount: number;
  done: boolean;
  drawingEnabled: boolean;
  mode: string;
}

function rectView(t: CanvasTransform, r: { min: [number, number]; max: [number, number] }): RectView {
  const [x0, y1] = t.toCanvas(r.min[0], r.min[1]);
  const [x1, y0] = t.toCanvas(r.max[0], r.max[1]);
  return { x: x0, y: y0, width: x1 - x0, height: y1 - y0 };
}

/** Project a server state view onto canvas primitives.
 *
 * Heatmap colors are normalized per response to the current maximum
 * entropy; an all-zero response renders the uniform lowest ramp color.
 * In single-point mode no heat is drawn and only the server's suggested
 * cell is marked. */
export function buildScene(
  state: SessionState,
  task: TaskDescriptor,
  canvas: CanvasSize,
  pending = false,
): Scene {
  if (state.cells.length !== task.grid.cells.length) {
    throw new Error(
      `state has ${state.cells.length} cells but task grid has ${task.grid.cells.length}`,
    );
  }
  const transform = new CanvasTransform(task.workspace, canvas);
  const radius = Math.max(3, (task.grid.pitch * transform.scale) / 2.6);

  const maxEntropy = Math.max(
    0,
    ...state.cells.map((c) => (typeof c.entropy === "number" ? c.entropy : 0)),
  );
  const cells: CellView[] = state.cells.map((c) => {
    const [px, py] = transform.toCanvas(c.x, c.y);
    let heat: string | null = null;
    if (state.mode === "heatmap" && typeof c.entropy === "number") {
      heat = entropyColor(maxEntropy > 0 ? c.entropy / maxEntropy : 0);
    }
    return {
      index: c.index,
      px,
      py,
      radius,
      statusColor: STATUS_COLORS[c.status] ?? STATUS_COLORS.untested,
      heat,
      suggested: !state.done && state.suggestion === c.index,
    };
  });

  const suggestedCount = cells.filter((c) => c.suggested).length;
  if (state.mode === "single-point" && state.suggestion !== null && !state.done && suggestedCount !== 1) {
    throw new Error(`expected exactly one suggestion marker, got ${suggestedCount}`);
  }

  return {
    transform,
    workspaceRect: rectView(transform, task.workspace),
    obstacles: task.obstacles.map((o) => rectView(transform, o)),
    goal: task.goal ? transform.toCanvas(task.goal[0], task.goal[1]) : null,
    start: task.start ? transform.toCanvas(task.start[0], task.start[1]) : null,
    cells,
    coverage: state.coverage,
    demoCount: state.demo_count,
    done: state.done,
    drawingEnabled: !state.done && !pending,
    mode: state.mode,
  };
}
