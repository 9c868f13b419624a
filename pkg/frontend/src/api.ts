/** Typed client for the mazeteach teaching server. The UI never computes
 * entropy, success, or suggestions itself — every render comes from one of
 * these response bodies. */

export type CellStatus = "untested" | "success" | "fail";
export type Mode = "heatmap" | "single-point";

export interface Cell {
  index: number;
  x: number;
  y: number;
  status: CellStatus;
  entropy?: number;
}

export interface RectDescriptor {
  min: [number, number];
  max: [number, number];
}

export interface TaskDescriptor {
  name: string;
  direction: string;
  workspace: RectDescriptor;
  obstacles: RectDescriptor[];
  goal: [number, number] | null;
  start: [number, number] | null;
  grid: {
    rows: number;
    cols: number;
    pitch: number;
    cells: [number, number][];
  };
  goal_tolerance: number;
  coverage_threshold: number;
}

export interface SessionState {
  id: string;
  task: string;
  mode: Mode;
  demo_count: number;
  coverage: number;
  done: boolean;
  elapsed_seconds: number;
  suggestion: number | null;
  cells: Cell[];
}

export interface CreatedSession extends SessionState {
  task_descriptor: TaskDescriptor;
}

/** One raw pointer sample: [timestamp, x_cm, y_cm]. Timestamps may be in
 * any monotone unit; the server renormalizes. */
export type PointerSample = [number, number, number];

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let detail = `${response.status} ${response.statusText}`;
    try {
      const body = await response.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      /* non-JSON error body; keep the status line */
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class Client {
  constructor(private base: string = "") {}

  listTasks(): Promise<{ tasks: TaskDescriptor[] }> {
    return request(this.base, "/tasks");
  }

  createSession(task: string, mode: Mode): Promise<CreatedSession> {
    return request(this.base, "/sessions", {
      method: "POST",
      body: JSON.stringify({ task, mode }),
    });
  }

  getSession(id: string): Promise<SessionState> {
    return request(this.base, `/sessions/${id}`);
  }

  submitDemonstration(id: string, samples: PointerSample[]): Promise<SessionState> {
    return request(this.base, `/sessions/${id}/demonstrations`, {
      method: "POST",
      body: JSON.stringify({ samples }),
    });
  }

  resetSession(id: string): Promise<{ ok: boolean; id: string; mode: Mode }> {
    return request(this.base, `/sessions/${id}/reset`, { method: "POST" });
  }
}
