"""Deterministic image products: top-down scene raster, trajectory SVG
overlays, and the composed camera view.

The top-down style is fixed here (0.2 m per pixel, ego-centered window) so
repeated renders of the same scene are byte-identical.
"""

from __future__ import annotations

import io
from dataclasses import replace
from typing import Mapping, Optional, Sequence

import numpy as np
from PIL import Image, ImageDraw

from .compositor import composite, render_proxy_boxes
from .field import VoxelGrid, oetf, render_view
from .lighting import EnvironmentMap, blend, surrounding_map
from .motion import Trajectory
from .scene import AssetRecord, CameraModel, SceneGraph

METERS_PER_PIXEL = 0.2
TOPDOWN_EXTENT = 120.0

TOPDOWN_STYLE = {
    "background": (34, 36, 40),
    "centerline": (150, 155, 160),
    "boundary": (90, 94, 100),
    "other": (70, 73, 78),
    "trajectory": (80, 180, 255),
    "vehicle_outline": (240, 240, 240),
    "ego": (250, 200, 60),
    "lane_width_px": 2,
    "trajectory_width_px": 2,
}


def _rgb255(color) -> tuple[int, int, int]:
    return tuple(int(round(float(c) * 255)) for c in color)


def _box_corners_xy(center, heading: float, length: float,
                    width: float) -> list[tuple[float, float]]:
    c, s = np.cos(heading), np.sin(heading)
    out = []
    for lx, ly in ((length / 2, width / 2), (length / 2, -width / 2),
                   (-length / 2, -width / 2), (-length / 2, width / 2)):
        out.append((center[0] + c * lx - s * ly, center[1] + s * lx + c * ly))
    return out


def render_topdown(scene: SceneGraph, bank: Mapping[str, AssetRecord],
                   frame: int = 0, extent: float = TOPDOWN_EXTENT) -> Image.Image:
    """Ego-centered, axis-aligned overhead view of the scene at one frame."""
    size = int(round(extent / METERS_PER_PIXEL))
    style = TOPDOWN_STYLE
    img = Image.new("RGB", (size, size), style["background"])
    draw = ImageDraw.Draw(img)
    ex, ey = scene.ego_pose.translation[:2]

    def to_px(p) -> tuple[float, float]:
        return (size / 2.0 + (p[0] - ex) / METERS_PER_PIXEL,
                size / 2.0 - (p[1] - ey) / METERS_PER_PIXEL)

    lane_colors = {"Centerline": style["centerline"],
                   "Boundary": style["boundary"], "Other": style["other"]}
    for node in scene.lane_map.nodes:
        draw.line([to_px(node.start), to_px(node.end)],
                  fill=lane_colors[node.lane_type.value],
                  width=style["lane_width_px"])

    for vid in sorted(scene.vehicles):
        traj = scene.vehicles[vid].trajectory
        pts = [to_px(p) for p in traj.positions]
        if len(pts) >= 2:
            draw.line(pts, fill=style["trajectory"],
                      width=style["trajectory_width_px"])

    for bg in sorted(scene.active_background(), key=lambda v: v.id):
        corners = _box_corners_xy(bg.position, bg.heading,
                                  bg.dimensions[0], bg.dimensions[1])
        draw.polygon([to_px(c) for c in corners], fill=_rgb255(bg.color),
                     outline=style["vehicle_outline"])

    for vid in sorted(scene.vehicles):
        inst = scene.vehicles[vid]
        asset = bank[inst.asset_id]
        x, y, heading = inst.trajectory.at_frame(frame)
        corners = _box_corners_xy((x, y), heading, asset.dimensions[0],
                                  asset.dimensions[1])
        draw.polygon([to_px(c) for c in corners],
                     fill=_rgb255(inst.color(bank)),
                     outline=style["vehicle_outline"])

    yaw = scene.ego_pose.yaw
    c, s = np.cos(yaw), np.sin(yaw)
    tri = [(2.2, 0.0), (-1.2, 1.0), (-1.2, -1.0)]
    draw.polygon([to_px((ex + c * px - s * py, ey + s * px + c * py))
                  for px, py in tri], fill=style["ego"])
    return img


def png_bytes(img: Image.Image) -> bytes:
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def trajectory_svg(lane_map, trajectories: Sequence[Trajectory],
                   width: int = 640, margin: float = 5.0) -> str:
    """Standalone SVG of the lane map with planned trajectories on top."""
    pts = []
    for node in lane_map.nodes:
        pts.append(node.start)
        pts.append(node.end)
    for traj in trajectories:
        pts.extend((float(p[0]), float(p[1])) for p in traj.positions)
    if not pts:
        pts = [(0.0, 0.0)]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1 = min(xs) - margin, max(xs) + margin
    y0, y1 = min(ys) - margin, max(ys) + margin
    scale = width / (x1 - x0)
    height = int(round((y1 - y0) * scale))

    def to_px(p) -> tuple[float, float]:
        return ((p[0] - x0) * scale, (y1 - p[1]) * scale)

    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="#222428"/>']
    lane_colors = {"Centerline": "#96a0a8", "Boundary": "#5a5e66",
                   "Other": "#46494e"}
    for node in lane_map.nodes:
        (ax, ay), (bx, by) = to_px(node.start), to_px(node.end)
        color = lane_colors[node.lane_type.value]
        lines.append(f'<line x1="{ax:.2f}" y1="{ay:.2f}" x2="{bx:.2f}" '
                     f'y2="{by:.2f}" stroke="{color}" stroke-width="1.5"/>')
    for traj in trajectories:
        coords = " ".join(f"{x:.2f},{y:.2f}"
                          for x, y in (to_px(p) for p in traj.positions))
        lines.append(f'<polyline points="{coords}" fill="none" '
                     f'stroke="#4fb3ff" stroke-width="2"/>')
        if len(traj):
            sx, sy = to_px(traj.positions[0])
            ex_, ey_ = to_px(traj.positions[-1])
            lines.append(f'<circle cx="{sx:.2f}" cy="{sy:.2f}" r="4" '
                         f'fill="#4caf50"/>')
            lines.append(f'<circle cx="{ex_:.2f}" cy="{ey_:.2f}" r="4" '
                         f'fill="#e53935"/>')
    lines.append("</svg>")
    return "\n".join(lines)


DEFAULT_SKY = (0.7, 0.8, 1.0)
ENV_RESOLUTION = (32, 16)


def render_camera_frame(scene: SceneGraph, bank: Mapping[str, AssetRecord],
                        grid: Optional[VoxelGrid], frame: int = 0,
                        skydome: Optional[EnvironmentMap] = None,
                        camera_index: int = 0, k_samples: int = 32) -> np.ndarray:
    """LDR camera view (H, W, 3) in [0, 1]: field background (unit exposure
    factor) behind depth-composited proxy vehicles.

    Every vehicle is lit by the blended environment at its own box center;
    without a grid the skydome lights everything and fills the background.
    """
    cam = scene.world_camera(camera_index)
    env_w, env_h = ENV_RESOLUTION
    if skydome is None:
        skydome = EnvironmentMap.constant(DEFAULT_SKY, env_w, env_h)

    if grid is not None:
        sky_mean = skydome.pixels.mean(axis=(0, 1))
        bg_hdr, bg_depth = render_view(grid, cam, stats=None,
                                       k_samples=k_samples,
                                       background=sky_mean)
    else:
        bg_hdr = np.tile(np.asarray(DEFAULT_SKY), (cam.height, cam.width, 1))
        bg_depth = np.full((cam.height, cam.width), np.inf)

    def env_at(center) -> EnvironmentMap:
        if grid is None:
            return skydome
        surround, t_map = surrounding_map(grid, center, env_w, env_h,
                                          k_samples=k_samples)
        return blend(surround, t_map, skydome)

    envs: dict[str, EnvironmentMap] = {}
    for bg in scene.active_background():
        envs[bg.id] = env_at((bg.position[0], bg.position[1],
                              bg.dimensions[2] / 2.0))
    for vid, inst in scene.vehicles.items():
        x, y, _ = inst.trajectory.at_frame(frame)
        envs[vid] = env_at((x, y, bank[inst.asset_id].dimensions[2] / 2.0))

    fg_rgba, fg_depth = render_proxy_boxes(scene, cam, envs, bank, frame=frame)
    hdr = composite(fg_rgba, fg_depth, bg_hdr, bg_depth)
    return oetf(hdr)


def image_from_array(ldr: np.ndarray) -> Image.Image:
    """[0,1] float array to an 8-bit PIL image."""
    return Image.fromarray(np.round(np.clip(ldr, 0.0, 1.0) * 255.0)
                           .astype(np.uint8), mode="RGB")
