/**
 * Entry point: reads the endpoint setting, mounts the app, and connects
 * the static controls. The service URL is the only configuration —
 * ?api=http://host:port on the page URL, defaulting to localhost:8000.
 */

import { Client } from "./api.js";
import { mountApp } from "./app.js";
import type { RenderKind } from "./api.js";

const params = new URLSearchParams(window.location.search);
const endpoint = params.get("api") ?? "http://localhost:8000";

const client = new Client(endpoint);
const app = mountApp(document, client);

const endpointLabel = document.getElementById("endpoint-label");
if (endpointLabel) endpointLabel.textContent = endpoint;

const commandInput = document.getElementById(
  "command-input",
) as HTMLInputElement;
const sendButton = document.getElementById(
  "command-send",
) as HTMLButtonElement;
const mapSelect = document.getElementById("map-select") as HTMLSelectElement;
const seedInput = document.getElementById("seed-input") as HTMLInputElement;
const newSessionButton = document.getElementById(
  "new-session",
) as HTMLButtonElement;
const frameSlider = document.getElementById(
  "frame-slider",
) as HTMLInputElement;
const kindSelect = document.getElementById("kind-select") as HTMLSelectElement;

async function submit(): Promise<void> {
  const text = commandInput.value;
  await app.sendCommand(text);
  if (app.getState().error === null) commandInput.value = "";
}

sendButton.addEventListener("click", () => void submit());
commandInput.addEventListener("keydown", (e) => {
  if (e.key === "Enter") void submit();
});

newSessionButton.addEventListener("click", () => {
  void app.newSession(mapSelect.value, Number(seedInput.value) || 0);
});

frameSlider.addEventListener("input", () => {
  app.setFrame(Number(frameSlider.value));
});

kindSelect.addEventListener("change", () => {
  app.setKind(kindSelect.value as RenderKind);
});

void app.newSession(mapSelect.value, Number(seedInput.value) || 0);
