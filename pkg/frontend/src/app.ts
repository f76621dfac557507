/**
 * DOM wiring: binds the reducer, the API client, and the canvas together.
 *
 * All element lookups go through fixed ids in index.html. mountApp
 * returns the action handlers plus a state getter so tests can drive the
 * app exactly the way the event listeners do.
 */

import { ApiError, Client, type RenderKind } from "./api.js";
import { drawScene, STYLE, type Ctx2D } from "./draw.js";
import {
  initialState,
  lastFrame,
  reduce,
  type UiEvent,
  type UiSessionState,
} from "./state.js";

export const CANVAS_SIZE = 600;

interface Elements {
  banner: HTMLElement;
  trace: HTMLElement;
  history: HTMLElement;
  canvas: HTMLCanvasElement;
  renderImg: HTMLImageElement;
  frameSlider: HTMLInputElement;
  frameLabel: HTMLElement;
  sessionLabel: HTMLElement;
  digestLabel: HTMLElement;
  commandInput: HTMLInputElement | HTMLTextAreaElement;
  sendButton: HTMLButtonElement;
}

function grab(doc: Document): Elements {
  const byId = <T extends HTMLElement>(id: string): T => {
    const el = doc.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el as T;
  };
  return {
    banner: byId("error-banner"),
    trace: byId("instruction-trace"),
    history: byId("history"),
    canvas: byId<HTMLCanvasElement>("scene-canvas"),
    renderImg: byId<HTMLImageElement>("render-panel"),
    frameSlider: byId<HTMLInputElement>("frame-slider"),
    frameLabel: byId("frame-label"),
    sessionLabel: byId("session-label"),
    digestLabel: byId("digest-label"),
    commandInput: byId<HTMLInputElement>("command-input"),
    sendButton: byId<HTMLButtonElement>("command-send"),
  };
}

export interface App {
  getState(): UiSessionState;
  newSession(map: string, seed: number): Promise<void>;
  sendCommand(text: string): Promise<void>;
  setFrame(frame: number): void;
  setKind(kind: RenderKind): void;
}

export function mountApp(doc: Document, client: Client): App {
  const el = grab(doc);
  let state = initialState();

  const dispatch = (event: UiEvent) => {
    state = reduce(state, event);
    render();
  };

  function render(): void {
    el.banner.hidden = state.error === null;
    el.banner.textContent = state.error ?? "";
    el.sessionLabel.textContent = state.session ?? "(no session)";
    el.digestLabel.textContent = state.digest.slice(0, 12);
    el.sendButton.disabled = state.pending || state.session === null;

    const latest = state.rounds[state.rounds.length - 1];
    el.trace.replaceChildren(
      ...(latest ? latest.instructions : []).map((inst) => {
        const li = doc.createElement("li");
        li.textContent = `[${inst.agent}] ${inst.text}`;
        return li;
      }),
    );

    el.history.replaceChildren(
      ...state.rounds.map((round) => {
        const li = doc.createElement("li");
        li.textContent =
          `round ${round.round}: ${round.command} ` +
          `(${round.instructions.length} instructions, ` +
          `digest ${round.sceneDigest.slice(0, 8)})`;
        return li;
      }),
    );

    const horizon = lastFrame(state.scene);
    el.frameSlider.max = String(horizon);
    el.frameSlider.value = String(state.frame);
    el.frameLabel.textContent = `frame ${state.frame} / ${horizon}`;

    if (state.scene) {
      const ctx = el.canvas.getContext("2d") as Ctx2D | null;
      if (ctx) drawScene(ctx, state.scene, state.frame, CANVAS_SIZE);
    }
    if (state.session) {
      // digest as cache buster: same URL, new scene after an edit
      el.renderImg.src =
        client.renderUrl(state.session, state.kind, state.frame) +
        `&v=${state.digest.slice(0, 8)}`;
    }
  }

  const app: App = {
    getState: () => state,

    async newSession(map: string, seed: number): Promise<void> {
      const info = await client.createSession(map, seed);
      const scene = await client.scene(info.session);
      dispatch({ type: "session-created", info, scene });
    },

    async sendCommand(text: string): Promise<void> {
      const command = text.trim();
      if (!command || state.pending || !state.session) return;
      const session = state.session;
      dispatch({ type: "command-sent", command });
      try {
        const result = await client.sendCommand(session, command);
        const [scene, log] = await Promise.all([
          client.scene(session),
          client.log(session),
        ]);
        dispatch({ type: "command-done", command, result, scene, log });
      } catch (err) {
        const message =
          err instanceof ApiError
            ? `${err.status}: ${err.message}`
            : String(err);
        dispatch({ type: "command-failed", message });
      }
    },

    setFrame(frame: number): void {
      dispatch({ type: "frame-set", frame });
    },

    setKind(kind: RenderKind): void {
      dispatch({ type: "kind-set", kind });
    },
  };

  el.canvas.width = CANVAS_SIZE;
  el.canvas.height = CANVAS_SIZE;
  el.canvas.style.background = STYLE.background;
  render();
  return app;
}
