/**
 * Canvas top-down view, drawn client-side from the scene JSON.
 *
 * Same framing as the server's reference raster (ego-centered, 0.2 m per
 * pixel) so the interactive canvas and the PNG render panel agree, but
 * this one redraws per frame scrub without a network round trip.
 *
 * Placed vehicles arrive over the wire with an asset id only, so they
 * draw with a generic car footprint and an accent fill unless the scene
 * carries a color override; background traffic embeds its real color and
 * dimensions.
 */

import type { SceneDoc } from "./api.js";
import { activeBackground, poseAtFrame } from "./state.js";

// A structural slice of CanvasRenderingContext2D so tests can record calls.
export interface Ctx2D {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
}

export const METERS_PER_PIXEL = 0.2;

export const STYLE = {
  background: "#222428",
  centerline: "#969ba0",
  boundary: "#5a5e64",
  other: "#46494e",
  trajectory: "#50b4ff",
  vehicleOutline: "#f0f0f0",
  placedVehicle: "#3c78dc",
  ego: "#fac83c",
} as const;

const LANE_COLORS: Record<string, string> = {
  Centerline: STYLE.centerline,
  Boundary: STYLE.boundary,
  Other: STYLE.other,
};

// Wire scenes don't carry per-asset dimensions; a sedan footprint reads fine.
const DEFAULT_DIMENSIONS: [number, number] = [4.5, 1.9];

function cssColor(rgb: number[]): string {
  const [r, g, b] = rgb.map((c) => Math.round(c * 255));
  return `rgb(${r}, ${g}, ${b})`;
}

function boxCorners(
  cx: number,
  cy: number,
  heading: number,
  length: number,
  width: number,
): [number, number][] {
  const c = Math.cos(heading);
  const s = Math.sin(heading);
  const corners: [number, number][] = [];
  for (const [lx, ly] of [
    [length / 2, width / 2],
    [length / 2, -width / 2],
    [-length / 2, -width / 2],
    [-length / 2, width / 2],
  ]) {
    corners.push([cx + c * lx - s * ly, cy + s * lx + c * ly]);
  }
  return corners;
}

// ------------------------------------------------------------------ Drawing

export function drawScene(
  ctx: Ctx2D,
  scene: SceneDoc,
  frame: number,
  size: number,
): void {
  const ex = scene.ego_pose.translation[0];
  const ey = scene.ego_pose.translation[1];
  const toPx = (x: number, y: number): [number, number] => [
    size / 2 + (x - ex) / METERS_PER_PIXEL,
    size / 2 - (y - ey) / METERS_PER_PIXEL,
  ];

  const polygon = (corners: [number, number][], fill: string) => {
    ctx.beginPath();
    corners.forEach(([x, y], i) => {
      const [px, py] = toPx(x, y);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.closePath();
    ctx.fillStyle = fill;
    ctx.fill();
    ctx.strokeStyle = STYLE.vehicleOutline;
    ctx.lineWidth = 1;
    ctx.stroke();
  };

  ctx.fillStyle = STYLE.background;
  ctx.fillRect(0, 0, size, size);

  for (const node of scene.lane_map.nodes) {
    const [ax, ay] = toPx(node.x_s, node.y_s);
    const [bx, by] = toPx(node.x_e, node.y_e);
    ctx.beginPath();
    ctx.moveTo(ax, ay);
    ctx.lineTo(bx, by);
    ctx.strokeStyle = LANE_COLORS[node.type];
    ctx.lineWidth = 2;
    ctx.stroke();
  }

  const vehicleIds = Object.keys(scene.vehicles).sort();
  for (const id of vehicleIds) {
    const samples = scene.vehicles[id].trajectory.samples;
    if (samples.length < 2) continue;
    ctx.beginPath();
    samples.forEach((row, i) => {
      const [px, py] = toPx(row[1], row[2]);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.strokeStyle = STYLE.trajectory;
    ctx.lineWidth = 2;
    ctx.stroke();
  }

  for (const bg of activeBackground(scene)) {
    polygon(
      boxCorners(
        bg.position[0],
        bg.position[1],
        bg.heading,
        bg.dimensions[0],
        bg.dimensions[1],
      ),
      cssColor(bg.color),
    );
  }

  for (const id of vehicleIds) {
    const vehicle = scene.vehicles[id];
    const [x, y, heading] = poseAtFrame(vehicle.trajectory.samples, frame);
    const fill = vehicle.color_override
      ? cssColor(vehicle.color_override)
      : STYLE.placedVehicle;
    polygon(
      boxCorners(x, y, heading, ...DEFAULT_DIMENSIONS),
      fill,
    );
  }

  // ego marker: triangle nosing along +heading
  const yaw = Math.atan2(scene.ego_pose.rotation[3], scene.ego_pose.rotation[0]);
  const c = Math.cos(yaw);
  const s = Math.sin(yaw);
  const tri: [number, number][] = [
    [2.2, 0],
    [-1.2, 1],
    [-1.2, -1],
  ].map(([px, py]) => [ex + c * px - s * py, ey + s * px + c * py]);
  ctx.beginPath();
  tri.forEach(([x, y], i) => {
    const [px, py] = toPx(x, y);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.closePath();
  ctx.fillStyle = STYLE.ego;
  ctx.fill();
}
