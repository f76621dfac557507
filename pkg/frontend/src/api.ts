/**
 * Typed client for the scene-editing service.
 *
 * Response shapes mirror the server's JSON verbatim (snake_case and all);
 * the published OpenAPI document in docs/schemas/openapi.json is the
 * contract. Every mutation of a scene goes through sendCommand —
 * everything else is a read.
 */

// ------------------------------------------------------------------ Types

export interface LaneNode {
  x_s: number;
  y_s: number;
  x_e: number;
  y_e: number;
  type: "Centerline" | "Boundary" | "Other";
}

export interface LaneMapDoc {
  name: string;
  crop: { front: number; left: number; right: number };
  nodes: LaneNode[];
}

export interface PoseDoc {
  rotation: number[]; // row-major 3x3
  translation: number[]; // xyz
}

export interface BackgroundVehicleDoc {
  id: string;
  position: number[];
  heading: number;
  type_label: string;
  color: number[];
  dimensions: number[];
}

export interface TrajectoryDoc {
  samples: number[][]; // rows of [time_s, x_m, y_m, heading_rad]
}

export interface VehicleInstanceDoc {
  instance_id: string;
  asset_id: string;
  created_in_round: number;
  color_override: number[] | null;
  trajectory: TrajectoryDoc;
}

export interface EditLogEntryDoc {
  round: number;
  agent: string;
  text: string;
  config: Record<string, unknown>;
}

export interface SceneDoc {
  field_ref: string;
  lane_map: LaneMapDoc;
  ego_pose: PoseDoc;
  background_vehicles: BackgroundVehicleDoc[];
  deleted_background_ids: string[];
  vehicles: Record<string, VehicleInstanceDoc>;
  edit_log: EditLogEntryDoc[];
  rig: unknown[];
}

export interface InstructionDoc {
  agent: string;
  text: string;
  config: Record<string, unknown>;
}

export interface SessionInfo {
  session: string;
  map: string;
  round: number;
  scene_digest: string;
  links: Record<string, string>;
}

export interface CommandResult {
  session: string;
  round: number;
  scene_digest: string;
  instructions: InstructionDoc[];
  render_jobs: unknown[];
  render: { topdown: string; camera: string };
}

export interface LogDoc {
  session: string;
  entries: EditLogEntryDoc[];
}

export type RenderKind = "topdown" | "camera";

// ------------------------------------------------------------------ Client

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.status = status;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  if (!resp.ok) {
    let detail = `${resp.status}`;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return resp.json() as Promise<T>;
}

export class Client {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  createSession(map: string, seed: number): Promise<SessionInfo> {
    return request<SessionInfo>(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ map, seed }),
    });
  }

  sendCommand(session: string, command: string): Promise<CommandResult> {
    return request<CommandResult>(
      `${this.baseUrl}/sessions/${session}/command`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ command }),
      },
    );
  }

  scene(session: string): Promise<SceneDoc> {
    return request<SceneDoc>(`${this.baseUrl}/sessions/${session}/scene`);
  }

  log(session: string): Promise<LogDoc> {
    return request<LogDoc>(`${this.baseUrl}/sessions/${session}/log`);
  }

  /** URL for an <img> tag; the browser does the GET itself. */
  renderUrl(session: string, kind: RenderKind, frame: number): string {
    return `${this.baseUrl}/sessions/${session}/render?kind=${kind}&frame=${frame}`;
  }
}
