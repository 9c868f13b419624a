/** Canvas teaching app: draw demonstrations with the pointer, watch the
 * grid update, follow the entropy heatmap or single-point hints.
 *
 * All state shown on screen is the server's last response body; this file
 * only captures pointer samples (mapped canvas -> workspace cm) and
 * re-renders on every response. */

import { ApiError, Client } from "./api.js";
import type { CreatedSession, Mode, PointerSample, SessionState, TaskDescriptor } from "./api.js";
import { buildScene, entropyColor } from "./scene.js";
import type { Scene } from "./scene.js";

const client = new Client("");

interface AppState {
  session: CreatedSession | null;
  /** Last response body, rendered verbatim. */
  view: SessionState | null;
  task: TaskDescriptor | null;
  stroke: PointerSample[];
  drawing: boolean;
  pending: boolean;
  failedStroke: PointerSample[] | null;
}

const app: AppState = {
  session: null,
  view: null,
  task: null,
  stroke: [],
  drawing: false,
  pending: false,
  failedStroke: null,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const canvas = () => el<HTMLCanvasElement>("maze");
const statusLine = () => el<HTMLDivElement>("status");
const banner = () => el<HTMLDivElement>("banner");
const retryButton = () => el<HTMLButtonElement>("retry");

function setStatus(text: string, isError = false) {
  statusLine().textContent = text;
  statusLine().className = isError ? "status error" : "status";
}

function currentScene(): Scene | null {
  if (!app.view || !app.task) return null;
  const c = canvas();
  return buildScene(app.view, app.task, { width: c.width, height: c.height }, app.pending);
}

function render() {
  const c = canvas();
  const ctx = c.getContext("2d")!;
  ctx.clearRect(0, 0, c.width, c.height);
  const scene = currentScene();
  if (!scene) return;

  // Workspace and obstacles.
  ctx.fillStyle = "#fafafa";
  ctx.strokeStyle = "#333";
  const wr = scene.workspaceRect;
  ctx.fillRect(wr.x, wr.y, wr.width, wr.height);
  ctx.strokeRect(wr.x, wr.y, wr.width, wr.height);
  ctx.fillStyle = "#555";
  for (const o of scene.obstacles) ctx.fillRect(o.x, o.y, o.width, o.height);

  // Heatmap underlay, then status circles, then the suggestion marker.
  for (const cell of scene.cells) {
    if (cell.heat) {
      ctx.beginPath();
      ctx.arc(cell.px, cell.py, cell.radius * 1.45, 0, 2 * Math.PI);
      ctx.fillStyle = cell.heat;
      ctx.globalAlpha = 0.55;
      ctx.fill();
      ctx.globalAlpha = 1;
    }
  }
  for (const cell of scene.cells) {
    ctx.beginPath();
    ctx.arc(cell.px, cell.py, cell.radius, 0, 2 * Math.PI);
    ctx.fillStyle = cell.statusColor;
    ctx.fill();
    if (cell.suggested) {
      ctx.beginPath();
      ctx.arc(cell.px, cell.py, cell.radius * 1.8, 0, 2 * Math.PI);
      ctx.lineWidth = 3;
      ctx.strokeStyle = "#ff9800";
      ctx.stroke();
      ctx.lineWidth = 1;
    }
  }

  // Goal / start markers.
  if (scene.goal) {
    ctx.beginPath();
    ctx.arc(scene.goal[0], scene.goal[1], 7, 0, 2 * Math.PI);
    ctx.fillStyle = "#2e7d32";
    ctx.fill();
  }
  if (scene.start) {
    ctx.beginPath();
    ctx.arc(scene.start[0], scene.start[1], 7, 0, 2 * Math.PI);
    ctx.fillStyle = "#6a1b9a";
    ctx.fill();
  }

  // In-progress stroke.
  if (app.stroke.length > 1) {
    ctx.beginPath();
    const [, x0, y0] = app.stroke[0];
    const p0 = scene.transform.toCanvas(x0, y0);
    ctx.moveTo(p0[0], p0[1]);
    for (const [, x, y] of app.stroke.slice(1)) {
      const p = scene.transform.toCanvas(x, y);
      ctx.lineTo(p[0], p[1]);
    }
    ctx.strokeStyle = "#000";
    ctx.lineWidth = 2;
    ctx.stroke();
    ctx.lineWidth = 1;
  }

  renderLegend(scene);
  renderReadouts();
  banner().hidden = !scene.done;
  c.style.cursor = scene.drawingEnabled ? "crosshair" : "not-allowed";
}

function renderLegend(scene: Scene) {
  const legend = el<HTMLCanvasElement>("legend");
  const ctx = legend.getContext("2d")!;
  ctx.clearRect(0, 0, legend.width, legend.height);
  legend.hidden = scene.mode !== "heatmap";
  if (legend.hidden) return;
  for (let x = 0; x < legend.width; x++) {
    ctx.fillStyle = entropyColor(x / (legend.width - 1));
    ctx.fillRect(x, 0, 1, legend.height);
  }
}

function renderReadouts() {
  if (!app.view) return;
  el<HTMLSpanElement>("coverage").textContent = `${(app.view.coverage * 100).toFixed(0)}%`;
  el<HTMLSpanElement>("demos").textContent = String(app.view.demo_count);
}

function tickElapsed() {
  if (!app.view) return;
  // elapsed_seconds comes from the server; tick it locally between
  // responses so the display increases monotonically while teaching.
  const shown = el<HTMLSpanElement>("elapsed");
  const base = Number(shown.dataset.base ?? app.view.elapsed_seconds);
  const at = Number(shown.dataset.at ?? Date.now());
  const seconds = base + (Date.now() - at) / 1000;
  shown.textContent = `${Math.floor(seconds / 60)}:${String(Math.floor(seconds % 60)).padStart(2, "0")}`;
}

function acceptView(view: SessionState) {
  app.view = view;
  const shown = el<HTMLSpanElement>("elapsed");
  shown.dataset.base = String(view.elapsed_seconds);
  shown.dataset.at = String(Date.now());
  render();
}

async function refreshTasks() {
  const { tasks } = await client.listTasks();
  const picker = el<HTMLSelectElement>("task-picker");
  picker.innerHTML = "";
  for (const t of tasks) {
    const option = document.createElement("option");
    option.value = t.name;
    option.textContent = `${t.name} (${t.grid.rows}×${t.grid.cols})`;
    picker.appendChild(option);
  }
}

async function newSession() {
  const task = el<HTMLSelectElement>("task-picker").value;
  const mode = el<HTMLSelectElement>("mode-picker").value as Mode;
  try {
    const session = await client.createSession(task, mode);
    app.session = session;
    app.task = session.task_descriptor;
    app.failedStroke = null;
    retryButton().hidden = true;
    setStatus(`session ${session.id.slice(0, 8)} on ${task} (${mode})`);
    acceptView(session);
  } catch (e) {
    setStatus(e instanceof ApiError ? e.message : `network failure: ${e}`, true);
  }
}

async function resetSession() {
  if (!app.session) return;
  try {
    await client.resetSession(app.session.id);
    acceptView(await client.getSession(app.session.id));
    setStatus("session reset");
  } catch (e) {
    setStatus(e instanceof ApiError ? e.message : `network failure: ${e}`, true);
  }
}

async function submitStroke(samples: PointerSample[]) {
  if (!app.session) return;
  if (samples.length < 2) {
    setStatus("demonstration needs at least 2 samples — draw a path", true);
    return;
  }
  app.pending = true;
  render();
  try {
    const view = await client.submitDemonstration(app.session.id, samples);
    app.failedStroke = null;
    retryButton().hidden = true;
    setStatus(view.done ? "teaching complete" : "demonstration accepted");
    acceptView(view);
  } catch (e) {
    if (e instanceof ApiError) {
      // Server rejected the stroke; it is gone for good.
      setStatus(`rejected: ${e.message}`, true);
    } else {
      // Network failure: keep the stroke and offer a retry.
      app.failedStroke = samples;
      retryButton().hidden = false;
      setStatus(`network failure: ${e} — stroke kept, press retry`, true);
    }
  } finally {
    app.pending = false;
    render();
  }
}

function pointerSample(event: PointerEvent): PointerSample | null {
  const scene = currentScene();
  if (!scene) return null;
  const rect = canvas().getBoundingClientRect();
  const [x, y] = scene.transform.toWorkspace(
    event.clientX - rect.left,
    event.clientY - rect.top,
  );
  return [performance.now(), x, y];
}

function wireCanvas() {
  const c = canvas();
  c.addEventListener("pointerdown", (event) => {
    const scene = currentScene();
    if (!scene || !scene.drawingEnabled) return;
    c.setPointerCapture(event.pointerId);
    app.drawing = true;
    app.stroke = [];
    const s = pointerSample(event);
    if (s) app.stroke.push(s);
  });
  c.addEventListener("pointermove", (event) => {
    if (!app.drawing) return;
    const s = pointerSample(event);
    if (s) app.stroke.push(s);
    render();
  });
  c.addEventListener("pointerup", () => {
    if (!app.drawing) return;
    app.drawing = false;
    const samples = app.stroke;
    app.stroke = [];
    void submitStroke(samples);
  });
}

window.addEventListener("DOMContentLoaded", () => {
  wireCanvas();
  el<HTMLButtonElement>("new-session").addEventListener("click", () => void newSession());
  el<HTMLButtonElement>("reset").addEventListener("click", () => void resetSession());
  retryButton().addEventListener("click", () => {
    if (app.failedStroke) void submitStroke(app.failedStroke);
  });
  setInterval(tickElapsed, 1000);
  void refreshTasks().then(() => newSession());
});
