import { describe, expect, it } from "vitest";

import type { EditLogEntryDoc } from "../src/api.js";
import {
  activeBackground,
  clampFrame,
  initialState,
  lastFrame,
  poseAtFrame,
  reduce,
  roundsFromLog,
  type UiSessionState,
} from "../src/state.js";
import { clone, loadFixture } from "./helpers.js";

const fx = loadFixture();

function freshSession(): UiSessionState {
  return reduce(initialState(), {
    type: "session-created",
    info: fx.create,
    scene: fx.scene0,
  });
}

function afterRound1(): UiSessionState {
  let state = freshSession();
  state = reduce(state, { type: "command-sent", command: fx.commands.round1 });
  return reduce(state, {
    type: "command-done",
    command: fx.commands.round1,
    result: fx.round1.command,
    scene: fx.round1.scene,
    log: fx.round1.log,
  });
}

function afterRound2(): UiSessionState {
  let state = afterRound1();
  state = reduce(state, { type: "command-sent", command: fx.commands.round2 });
  return reduce(state, {
    type: "command-done",
    command: fx.commands.round2,
    result: fx.round2.command,
    scene: fx.round2.scene,
    log: fx.round2.log,
  });
}

describe("reduce", () => {
  it("session-created snapshots the fresh scene", () => {
    const state = freshSession();
    expect(state.session).toBe(fx.create.session);
    expect(state.map).toBe("crossroad");
    expect(state.digest).toBe(fx.create.scene_digest);
    expect(state.rounds).toEqual([]);
    expect(state.scene).toBe(fx.scene0);
    expect(state.pending).toBe(false);
    expect(state.error).toBeNull();
  });

  it("command-sent admits a single command in flight", () => {
    const idle = freshSession();
    const busy = reduce(idle, { type: "command-sent", command: "x" });
    expect(busy.pending).toBe(true);
    // a second send while pending is a no-op, not a queue
    expect(reduce(busy, { type: "command-sent", command: "y" })).toBe(busy);
  });

  it("command-done rebuilds rounds from the log", () => {
    const state = afterRound1();
    expect(state.pending).toBe(false);
    expect(state.digest).toBe(fx.round1.command.scene_digest);
    expect(state.scene).toBe(fx.round1.scene);
    expect(state.rounds).toHaveLength(1);
    const round = state.rounds[0];
    expect(round.round).toBe(1);
    expect(round.command).toBe(fx.commands.round1);
    expect(round.sceneDigest).toBe(fx.round1.command.scene_digest);
    expect(round.instructions.map((i) => [i.agent, i.text])).toEqual(
      fx.round1.log.entries.map((e) => [e.agent, e.text]),
    );
  });

  it("earlier rounds keep their command text across later ones", () => {
    const state = afterRound2();
    expect(state.rounds.map((r) => r.round)).toEqual([1, 2]);
    expect(state.rounds[0].command).toBe(fx.commands.round1);
    expect(state.rounds[1].command).toBe(fx.commands.round2);
    expect(state.rounds[1].instructions.map((i) => [i.agent, i.text])).toEqual(
      fx.round2.log.entries
        .filter((e) => e.round === 2)
        .map((e) => [e.agent, e.text]),
    );
    expect(state.digest).toBe(fx.round2.command.scene_digest);
  });

  it("command-failed keeps the scene and digest as they were", () => {
    const before = afterRound1();
    const sent = reduce(before, { type: "command-sent", command: "nope" });
    const failed = reduce(sent, {
      type: "command-failed",
      message: "422: nothing matched",
    });
    expect(failed.pending).toBe(false);
    expect(failed.error).toBe("422: nothing matched");
    expect(failed.digest).toBe(before.digest);
    expect(failed.scene).toBe(before.scene);
    expect(failed.rounds).toEqual(before.rounds);
  });

  it("the next command-sent clears a stale error", () => {
    let state = afterRound1();
    state = reduce(state, { type: "command-sent", command: "nope" });
    state = reduce(state, { type: "command-failed", message: "boom" });
    state = reduce(state, { type: "command-sent", command: "retry" });
    expect(state.error).toBeNull();
    expect(state.pending).toBe(true);
  });

  it("frame-set clamps to the trajectory horizon and floors", () => {
    const state = afterRound1();
    const horizon = lastFrame(state.scene);
    expect(horizon).toBeGreaterThan(0);
    expect(reduce(state, { type: "frame-set", frame: 1e6 }).frame).toBe(
      horizon,
    );
    expect(reduce(state, { type: "frame-set", frame: -3 }).frame).toBe(0);
    expect(reduce(state, { type: "frame-set", frame: 2.7 }).frame).toBe(2);
  });

  it("command-done pulls the frame back inside a shorter horizon", () => {
    let state = afterRound1();
    state = reduce(state, {
      type: "frame-set",
      frame: lastFrame(state.scene),
    });
    const short = clone(fx.round1.scene);
    for (const vehicle of Object.values(short.vehicles)) {
      vehicle.trajectory.samples = vehicle.trajectory.samples.slice(0, 3);
    }
    state = reduce(state, { type: "command-sent", command: "shorten" });
    state = reduce(state, {
      type: "command-done",
      command: "shorten",
      result: fx.round1.command,
      scene: short,
      log: fx.round1.log,
    });
    expect(state.frame).toBe(2);
  });

  it("kind-set switches the render panel source", () => {
    const state = reduce(freshSession(), { type: "kind-set", kind: "camera" });
    expect(state.kind).toBe("camera");
  });
});

describe("roundsFromLog", () => {
  it("groups entries by round in ascending order", () => {
    const entries: EditLogEntryDoc[] = [
      { round: 2, agent: "Motion", text: "b", config: {} },
      { round: 1, agent: "ViewAdjust", text: "a", config: {} },
      { round: 2, agent: "Deletion", text: "c", config: {} },
    ];
    const rounds = roundsFromLog(
      entries,
      new Map([[1, "first"]]),
      new Map([[2, "d2"]]),
    );
    expect(rounds.map((r) => r.round)).toEqual([1, 2]);
    expect(rounds[0].command).toBe("first");
    expect(rounds[1].command).toBe(""); // unknown round: no invented text
    expect(rounds[1].instructions.map((i) => i.text)).toEqual(["b", "c"]);
    expect(rounds[1].sceneDigest).toBe("d2");
  });
});

describe("selectors", () => {
  it("lastFrame is 0 with no scene or no vehicles", () => {
    expect(lastFrame(null)).toBe(0);
    expect(lastFrame(fx.scene0)).toBe(0);
  });

  it("lastFrame follows the longest trajectory", () => {
    const samples = Object.values(fx.round1.scene.vehicles).map(
      (v) => v.trajectory.samples.length,
    );
    expect(lastFrame(fx.round1.scene)).toBe(Math.max(...samples) - 1);
  });

  it("clampFrame stays inside [0, lastFrame]", () => {
    expect(clampFrame(99, fx.scene0)).toBe(0);
    expect(clampFrame(-1, fx.round1.scene)).toBe(0);
  });

  it("poseAtFrame holds the endpoint poses beyond the samples", () => {
    const samples = Object.values(fx.round1.scene.vehicles)[0].trajectory
      .samples;
    const first = samples[0];
    const last = samples[samples.length - 1];
    expect(poseAtFrame(samples, -5)).toEqual([first[1], first[2], first[3]]);
    expect(poseAtFrame(samples, 1e6)).toEqual([last[1], last[2], last[3]]);
  });

  it("activeBackground drops deleted ids", () => {
    expect(activeBackground(fx.scene0)).toHaveLength(
      fx.scene0.background_vehicles.length,
    );
    const edited = clone(fx.scene0);
    edited.deleted_background_ids = [edited.background_vehicles[0].id];
    const keptIds = activeBackground(edited).map((b) => b.id);
    expect(keptIds).toHaveLength(edited.background_vehicles.length - 1);
    expect(keptIds).not.toContain(edited.background_vehicles[0].id);
  });
});
