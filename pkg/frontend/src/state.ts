/**
 * UI session state and its pure reducer.
 *
 * The state is a function of server responses and nothing else: rounds
 * are rebuilt from GET /log after every command (not accumulated
 * client-side), so reloading the page and replaying the GETs
 * reconstructs the identical view. The only client-owned bits are the
 * command texts (the log stores per-instruction texts, not the original
 * sentence) and the viewing controls (frame index, render kind).
 */

import type {
  CommandResult,
  EditLogEntryDoc,
  InstructionDoc,
  LogDoc,
  RenderKind,
  SceneDoc,
  SessionInfo,
} from "./api.js";

// ------------------------------------------------------------------ Types

export interface RoundRecord {
  round: number;
  command: string;
  instructions: InstructionDoc[];
  sceneDigest: string;
}

export interface UiSessionState {
  session: string | null;
  map: string;
  digest: string;
  rounds: RoundRecord[];
  scene: SceneDoc | null;
  frame: number;
  kind: RenderKind;
  pending: boolean;
  error: string | null;
}

export type UiEvent =
  | { type: "session-created"; info: SessionInfo; scene: SceneDoc }
  | { type: "command-sent"; command: string }
  | {
      type: "command-done";
      command: string;
      result: CommandResult;
      scene: SceneDoc;
      log: LogDoc;
    }
  | { type: "command-failed"; message: string }
  | { type: "frame-set"; frame: number }
  | { type: "kind-set"; kind: RenderKind };

export function initialState(): UiSessionState {
  return {
    session: null,
    map: "",
    digest: "",
    rounds: [],
    scene: null,
    frame: 0,
    kind: "topdown",
    pending: false,
    error: null,
  };
}

// ------------------------------------------------------------------ Reducer

/** Group log entries by round; each group becomes one RoundRecord. */
export function roundsFromLog(
  entries: EditLogEntryDoc[],
  commands: Map<number, string>,
  digests: Map<number, string>,
): RoundRecord[] {
  const byRound = new Map<number, InstructionDoc[]>();
  for (const entry of entries) {
    const list = byRound.get(entry.round) ?? [];
    list.push({ agent: entry.agent, text: entry.text, config: entry.config });
    byRound.set(entry.round, list);
  }
  return [...byRound.keys()].sort((a, b) => a - b).map((round) => ({
    round,
    command: commands.get(round) ?? "",
    instructions: byRound.get(round) as InstructionDoc[],
    sceneDigest: digests.get(round) ?? "",
  }));
}

export function reduce(state: UiSessionState, event: UiEvent): UiSessionState {
  switch (event.type) {
    case "session-created":
      return {
        ...initialState(),
        session: event.info.session,
        map: event.info.map,
        digest: event.info.scene_digest,
        scene: event.scene,
      };

    case "command-sent":
      if (state.pending) return state; // single in-flight command
      return { ...state, pending: true, error: null };

    case "command-done": {
      const commands = new Map(state.rounds.map((r) => [r.round, r.command]));
      commands.set(event.result.round, event.command);
      const digests = new Map(
        state.rounds.map((r) => [r.round, r.sceneDigest]),
      );
      digests.set(event.result.round, event.result.scene_digest);
      return {
        ...state,
        pending: false,
        error: null,
        digest: event.result.scene_digest,
        scene: event.scene,
        rounds: roundsFromLog(event.log.entries, commands, digests),
        frame: Math.min(state.frame, lastFrame(event.scene)),
      };
    }

    case "command-failed":
      // the round never happened server-side; digest and scene stay put
      return { ...state, pending: false, error: event.message };

    case "frame-set":
      return {
        ...state,
        frame: clampFrame(event.frame, state.scene),
      };

    case "kind-set":
      return { ...state, kind: event.kind };
  }
}

// ------------------------------------------------------------------ Selectors

/** Highest valid frame index: trajectories hold their last pose past the end. */
export function lastFrame(scene: SceneDoc | null): number {
  if (!scene) return 0;
  let n = 1;
  for (const vehicle of Object.values(scene.vehicles)) {
    n = Math.max(n, vehicle.trajectory.samples.length);
  }
  return n - 1;
}

export function clampFrame(frame: number, scene: SceneDoc | null): number {
  return Math.max(0, Math.min(Math.floor(frame), lastFrame(scene)));
}

/** Pose [x, y, heading] of a vehicle at a frame, clamped to its samples. */
export function poseAtFrame(
  samples: number[][],
  frame: number,
): [number, number, number] {
  const row = samples[Math.max(0, Math.min(frame, samples.length - 1))];
  return [row[1], row[2], row[3]];
}

export function activeBackground(scene: SceneDoc) {
  const deleted = new Set(scene.deleted_background_ids);
  return scene.background_vehicles.filter((b) => !deleted.has(b.id));
}
