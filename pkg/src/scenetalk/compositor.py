"""Foreground proxy rendering and depth-tested composition.

Vehicles render as oriented boxes with flat Lambertian faces lit by their
own environment maps; composition keeps whichever of foreground and
background is nearer per pixel. Depth maps use non-finite entries for
missing values; segment masks use patch id 0 for unassigned pixels.
"""

from __future__ import annotations

from typing import Mapping, Optional, Union

import numpy as np

from .geometry import Pose
from .lighting import EnvironmentMap, ShapeMismatch, irradiance
from .scene import AssetRecord, CameraModel, SceneGraph


def patch_depths(sparse: np.ndarray, mask: np.ndarray) -> dict[int, float]:
    """Mean valid sparse depth per patch; depthless patches map to +inf."""
    sparse = np.asarray(sparse, dtype=float)
    mask = np.asarray(mask)
    if sparse.shape != mask.shape:
        raise ShapeMismatch(f"depth {sparse.shape} vs mask {mask.shape}")
    out: dict[int, float] = {}
    for patch in np.unique(mask):
        if patch == 0:
            continue
        values = sparse[mask == patch]
        values = values[np.isfinite(values)]
        out[int(patch)] = float(values.mean()) if len(values) else np.inf
    return out


def densify_depth(sparse: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Per-pixel background depth: every pixel takes its patch's mean depth."""
    depths = patch_depths(sparse, mask)
    out = np.full(np.asarray(mask).shape, np.inf)
    for patch, depth in depths.items():
        out[mask == patch] = depth
    return out


# Local box frame: origin at the bottom center, +x toward the front.
_FACES = (
    ((1, -1, 0), (1, 1, 0), (1, 1, 2), (1, -1, 2), (1.0, 0.0, 0.0)),
    ((-1, 1, 0), (-1, -1, 0), (-1, -1, 2), (-1, 1, 2), (-1.0, 0.0, 0.0)),
    ((1, 1, 0), (-1, 1, 0), (-1, 1, 2), (1, 1, 2), (0.0, 1.0, 0.0)),
    ((-1, -1, 0), (1, -1, 0), (1, -1, 2), (-1, -1, 2), (0.0, -1.0, 0.0)),
    ((-1, -1, 2), (1, -1, 2), (1, 1, 2), (-1, 1, 2), (0.0, 0.0, 1.0)),
    ((-1, 1, 0), (1, 1, 0), (1, -1, 0), (-1, -1, 0), (0.0, 0.0, -1.0)),
)


def _box_faces(dimensions) -> list[tuple[np.ndarray, np.ndarray]]:
    """(4 corner points, local normal) per face for a box of (l, w, h)."""
    l, w, h = dimensions
    scale = np.array([l / 2.0, w / 2.0, h / 2.0])
    faces = []
    for face in _FACES:
        corners = np.asarray(face[:4], dtype=float) * scale
        faces.append((corners, np.asarray(face[4])))
    return faces


def _raster_triangle(color_buf, depth_buf, alpha_buf, pts, z, color) -> None:
    """Z-buffered fill of one screen triangle; depth interpolates in 1/z."""
    h, w = depth_buf.shape
    x_min = max(int(np.floor(pts[:, 0].min())), 0)
    x_max = min(int(np.ceil(pts[:, 0].max())), w - 1)
    y_min = max(int(np.floor(pts[:, 1].min())), 0)
    y_max = min(int(np.ceil(pts[:, 1].max())), h - 1)
    if x_min > x_max or y_min > y_max:
        return
    (x0, y0), (x1, y1), (x2, y2) = pts
    area = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
    if abs(area) < 1e-12:
        return
    xs, ys = np.meshgrid(np.arange(x_min, x_max + 1) + 0.5,
                         np.arange(y_min, y_max + 1) + 0.5)
    b1 = ((ys - y0) * (x2 - x0) - (xs - x0) * (y2 - y0)) / -area
    b2 = ((ys - y0) * (x1 - x0) - (xs - x0) * (y1 - y0)) / area
    b0 = 1.0 - b1 - b2
    inside = (b0 >= 0) & (b1 >= 0) & (b2 >= 0)
    if not inside.any():
        return
    inv_z = b0 * (1.0 / z[0]) + b1 * (1.0 / z[1]) + b2 * (1.0 / z[2])
    pix_z = np.where(inv_z > 0, 1.0 / np.maximum(inv_z, 1e-12), np.inf)
    region = depth_buf[y_min:y_max + 1, x_min:x_max + 1]
    win = inside & (pix_z < region)
    region[win] = pix_z[win]
    color_region = color_buf[y_min:y_max + 1, x_min:x_max + 1]
    color_region[win] = color
    alpha_buf[y_min:y_max + 1, x_min:x_max + 1][win] = 1.0


def _draw_box(color_buf, depth_buf, alpha_buf, camera: CameraModel,
              pose: Pose, dimensions, albedo, env: EnvironmentMap,
              z_near: float = 0.05) -> None:
    albedo = np.asarray(albedo, dtype=float)
    for corners_local, n_local in _box_faces(dimensions):
        n_world = pose.rotation @ n_local
        shade = albedo / np.pi * irradiance(env, n_world)
        corners_world = pose.transform(corners_local)
        uv, z = camera.project(corners_world)
        if np.any(z <= z_near):
            continue
        for tri in ((0, 1, 2), (0, 2, 3)):
            _raster_triangle(color_buf, depth_buf, alpha_buf,
                             uv[list(tri)], z[list(tri)], shade)


def render_proxy_boxes(scene: SceneGraph, camera: CameraModel,
                       envs: Union[EnvironmentMap, Mapping[str, EnvironmentMap]],
                       bank: Mapping[str, AssetRecord],
                       frame: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Draw every visible vehicle as a shaded box.

    Returns (RGBA image (H, W, 4), depth (H, W)); uncovered pixels have alpha
    0 and non-finite depth. `envs` is either one map for all vehicles or a
    map keyed by vehicle id.
    """
    h, w = camera.height, camera.width
    color_buf = np.zeros((h, w, 3))
    depth_buf = np.full((h, w), np.inf)
    alpha_buf = np.zeros((h, w))

    def env_for(vid: str) -> EnvironmentMap:
        if isinstance(envs, EnvironmentMap):
            return envs
        return envs[vid]

    for bg in sorted(scene.active_background(), key=lambda v: v.id):
        pose = Pose.from_yaw(bg.heading, (bg.position[0], bg.position[1], 0.0))
        _draw_box(color_buf, depth_buf, alpha_buf, camera, pose,
                  bg.dimensions, bg.color, env_for(bg.id))
    for vid in sorted(scene.vehicles):
        inst = scene.vehicles[vid]
        asset = bank[inst.asset_id]
        pose = inst.trajectory.pose_at_frame(frame)
        _draw_box(color_buf, depth_buf, alpha_buf, camera, pose,
                  asset.dimensions, inst.color(bank), env_for(vid))

    rgba = np.concatenate([color_buf, alpha_buf[:, :, None]], axis=-1)
    depth = np.where(alpha_buf > 0, depth_buf, np.nan)
    return rgba, depth


def composite(fg: np.ndarray, fg_depth: np.ndarray, bg: np.ndarray,
              bg_depth: np.ndarray) -> np.ndarray:
    """Per pixel: the foreground wins only where it is present and strictly
    nearer; missing background depth counts as infinitely far."""
    fg = np.asarray(fg, dtype=float)
    fg_depth = np.asarray(fg_depth, dtype=float)
    bg = np.asarray(bg, dtype=float)
    bg_depth = np.asarray(bg_depth, dtype=float)
    if (fg.shape[:2] != bg.shape[:2] or fg.shape[2] != 4 or bg.shape[2] != 3
            or fg_depth.shape != fg.shape[:2] or bg_depth.shape != bg.shape[:2]):
        raise ShapeMismatch(
            f"fg {fg.shape}, fg_depth {fg_depth.shape}, bg {bg.shape}, "
            f"bg_depth {bg_depth.shape}")
    bgd = np.where(np.isfinite(bg_depth), bg_depth, np.inf)
    fgd = np.where(np.isfinite(fg_depth), fg_depth, np.inf)
    win = (fg[:, :, 3] > 0) & (fgd < bgd)
    return np.where(win[:, :, None], fg[:, :, :3], bg)
