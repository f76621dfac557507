/**
 * Shared test scaffolding: the recorded service fixture, a canvas context
 * that records draw calls instead of rasterizing, and a fake fetch that
 * replays the fixture bodies with the same routing as the live service.
 */

import { readFileSync } from "node:fs";
import { resolve } from "node:path";

import type {
  CommandResult,
  LogDoc,
  SceneDoc,
  SessionInfo,
} from "../src/api.js";
import type { Ctx2D } from "../src/draw.js";

// ------------------------------------------------------------------ Fixture

export interface RoundFixture {
  command: CommandResult;
  scene: SceneDoc;
  log: LogDoc;
}

export interface SessionFixture {
  commands: { round1: string; round2: string; ungroundable: string };
  create: SessionInfo;
  scene0: SceneDoc;
  round1: RoundFixture;
  round2: RoundFixture;
  error422: { detail: string };
}

// npm always runs vitest from the package root, so cwd-relative is stable
export function packageFile(relative: string): string {
  return resolve(process.cwd(), relative);
}

export function loadFixture(): SessionFixture {
  const path = packageFile("tests/fixtures/two_round_session.json");
  return JSON.parse(readFileSync(path, "utf8")) as SessionFixture;
}

/** Deep copy so a test can mutate fixture data without leaking. */
export function clone<T>(value: T): T {
  return JSON.parse(JSON.stringify(value)) as T;
}

// ------------------------------------------------------------------ Canvas

interface RecordedCall {
  op: string;
  args: number[];
  fill: string;
  stroke: string;
}

export class RecordingCtx implements Ctx2D {
  fillStyle = "";
  strokeStyle = "";
  lineWidth = 0;
  calls: RecordedCall[] = [];

  private log(op: string, ...args: number[]): void {
    this.calls.push({
      op,
      args,
      fill: this.fillStyle,
      stroke: this.strokeStyle,
    });
  }

  fillRect(x: number, y: number, w: number, h: number): void {
    this.log("fillRect", x, y, w, h);
  }
  beginPath(): void {
    this.log("beginPath");
  }
  moveTo(x: number, y: number): void {
    this.log("moveTo", x, y);
  }
  lineTo(x: number, y: number): void {
    this.log("lineTo", x, y);
  }
  closePath(): void {
    this.log("closePath");
  }
  stroke(): void {
    this.log("stroke");
  }
  fill(): void {
    this.log("fill");
  }

  clear(): void {
    this.calls.length = 0;
  }
}

/** One beginPath..fill/stroke run, with the styles in effect when painted. */
export interface Shape {
  points: [number, number][];
  closed: boolean;
  fill: string | null;
  stroke: string | null;
}

export function shapes(ctx: RecordingCtx): Shape[] {
  const out: Shape[] = [];
  let current: Shape | null = null;
  for (const call of ctx.calls) {
    switch (call.op) {
      case "beginPath":
        current = { points: [], closed: false, fill: null, stroke: null };
        out.push(current);
        break;
      case "moveTo":
      case "lineTo":
        current?.points.push([call.args[0], call.args[1]]);
        break;
      case "closePath":
        if (current) current.closed = true;
        break;
      case "fill":
        if (current) current.fill = call.fill;
        break;
      case "stroke":
        if (current) current.stroke = call.stroke;
        break;
    }
  }
  return out;
}

/** Calls from the newest drawScene run; each run starts by repainting. */
export function lastRender(ctx: RecordingCtx): RecordingCtx {
  let start = 0;
  ctx.calls.forEach((call, i) => {
    if (call.op === "fillRect") start = i;
  });
  const out = new RecordingCtx();
  out.calls = ctx.calls.slice(start);
  return out;
}

export function centroid(points: [number, number][]): [number, number] {
  let sx = 0;
  let sy = 0;
  for (const [x, y] of points) {
    sx += x;
    sy += y;
  }
  return [sx / points.length, sy / points.length];
}

export function near(
  a: [number, number],
  b: [number, number],
  tol = 1e-6,
): boolean {
  return Math.abs(a[0] - b[0]) <= tol && Math.abs(a[1] - b[1]) <= tol;
}

// ------------------------------------------------------------------ Fake API

export interface FakeServer {
  fetch: typeof fetch;
  /** Command texts the app actually POSTed, in order. */
  commandPosts: string[];
  /** When set, command POSTs wait on it; lets a test hold one in flight. */
  hold: Promise<void> | null;
}

function jsonResponse(body: unknown, status: number): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => JSON.parse(JSON.stringify(body)),
  } as Response;
}

/**
 * Routes the same paths as the live service and replays recorded bodies.
 * State advances exactly like the server's: each accepted command moves
 * scene and log to the next recorded stage.
 */
export function fakeServer(fx: SessionFixture): FakeServer {
  let stage = 0;
  const sid = fx.create.session;
  const scenes = [fx.scene0, fx.round1.scene, fx.round2.scene];
  const logs: LogDoc[] = [
    { session: sid, entries: [] },
    fx.round1.log,
    fx.round2.log,
  ];

  const server: FakeServer = {
    commandPosts: [],
    hold: null,
    fetch: (async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = String(input);
      const method = init?.method ?? "GET";
      const path = url.replace(/^https?:\/\/[^/]+/, "").split("?")[0];

      if (method === "POST" && path === "/sessions") {
        return jsonResponse(fx.create, 201);
      }
      if (method === "POST" && path === `/sessions/${sid}/command`) {
        if (server.hold) await server.hold;
        const { command } = JSON.parse(String(init?.body)) as {
          command: string;
        };
        server.commandPosts.push(command);
        if (command === fx.commands.round1) {
          stage = 1;
          return jsonResponse(fx.round1.command, 200);
        }
        if (command === fx.commands.round2) {
          stage = 2;
          return jsonResponse(fx.round2.command, 200);
        }
        return jsonResponse(fx.error422, 422);
      }
      if (method === "GET" && path === `/sessions/${sid}/scene`) {
        return jsonResponse(scenes[stage], 200);
      }
      if (method === "GET" && path === `/sessions/${sid}/log`) {
        return jsonResponse(logs[stage], 200);
      }
      return jsonResponse({ detail: `no route ${method} ${path}` }, 404);
    }) as typeof fetch,
  };
  return server;
}
