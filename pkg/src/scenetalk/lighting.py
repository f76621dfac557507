"""Hybrid scene lighting: parametric skydome plus field-queried surroundings.

Environment maps are equirectangular with the zenith on row 0 and azimuth
measured from +x toward +y. The skydome is a content map with a spherical
Gaussian sun peak injected on top; surrounding lighting comes from rendering
the radiance field along every map direction, and the two blend through the
final transmittance.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .field import VoxelGrid, oetf, render_rays
from .geometry import Pose, unit


class ShapeMismatch(ValueError):
    """Maps in one operation disagree on resolution."""


class DegenerateMean(ValueError):
    """Fused directions cancelled out; no meaningful mean direction."""


class NonPositiveInput(ValueError):
    """Log-encoded loss received a negative intensity."""


@dataclass(frozen=True, eq=False)
class EnvironmentMap:
    """HDR panorama: pixels is (H, W, 3), nonnegative and finite."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.pixels, dtype=float)
        if p.ndim != 3 or p.shape[2] != 3:
            raise ValueError(f"pixels must be (H, W, 3), got {p.shape}")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValueError("pixels must be finite and nonnegative")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "pixels", p)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @staticmethod
    def constant(value, width: int, height: int) -> "EnvironmentMap":
        value = np.broadcast_to(np.asarray(value, dtype=float), (3,))
        return EnvironmentMap(np.tile(value, (height, width, 1)))


def equirect_dir(u, v, width: int, height: int) -> np.ndarray:
    """Unit direction(s) at pixel center(s) (u, v)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    theta = np.pi * (v + 0.5) / height
    phi = 2.0 * np.pi * (u + 0.5) / width
    sin_t = np.sin(theta)
    return np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi),
                     np.cos(theta)], axis=-1)


def dir_to_pixel(d, width: int, height: int) -> tuple:
    """Nearest pixel center to direction d; azimuth wraps, polar clips."""
    d = unit(np.asarray(d, dtype=float))
    theta = np.arccos(np.clip(d[2], -1.0, 1.0))
    phi = np.arctan2(d[1], d[0]) % (2.0 * np.pi)
    u = int(np.round(phi * width / (2.0 * np.pi) - 0.5)) % width
    v = int(np.clip(np.round(theta * height / np.pi - 0.5), 0, height - 1))
    return u, v


def direction_grid(width: int, height: int) -> np.ndarray:
    """(H, W, 3) unit directions for every pixel center."""
    u, v = np.meshgrid(np.arange(width), np.arange(height))
    return equirect_dir(u, v, width, height)


def solid_angles(width: int, height: int) -> np.ndarray:
    """(H, W) per-pixel solid angle (2 pi / W)(pi / H) sin(theta).

    Heights of 32 and above keep the sum within 0.1% of the full sphere.
    """
    theta = np.pi * (np.arange(height) + 0.5) / height
    omega_row = (2.0 * np.pi / width) * (np.pi / height) * np.sin(theta)
    return np.tile(omega_row[:, None], (1, width))


PEAK_SHARPNESS = 100.0
PEAK_THRESHOLD = 0.9


def peak_direction_map(f_dir, width: int, height: int) -> np.ndarray:
    """Spherical Gaussian lobe exp(100 (d . f_dir - 1)) per pixel."""
    f = unit(np.asarray(f_dir, dtype=float))
    dirs = direction_grid(width, height)
    return np.exp(PEAK_SHARPNESS * (dirs @ f - 1.0))


def peak_intensity_map(m_dir: np.ndarray, f_int,
                       threshold: float = PEAK_THRESHOLD) -> np.ndarray:
    """f_int where the lobe exceeds the threshold, zero elsewhere."""
    f = np.asarray(f_int, dtype=float)
    active = m_dir > threshold
    out = np.zeros(m_dir.shape + (3,))
    out[active] = f
    return out


def inject_peak(content: EnvironmentMap, f_dir, f_int) -> EnvironmentMap:
    """Overwrite the active peak region with the Gaussian-attenuated sun.

    Active pixels get exactly M_dir * f_int regardless of content, so a
    strong sun survives whatever the content map holds.
    """
    m_dir = peak_direction_map(f_dir, content.width, content.height)
    m_int = peak_intensity_map(m_dir, f_int)
    active = np.any(m_int != 0.0, axis=-1)
    out = content.pixels.copy()
    out[active] = (m_dir[active, None] * m_int[active])
    return EnvironmentMap(out)


def surrounding_map(grid: VoxelGrid, origin, width: int, height: int,
                    k_samples: int = 64) -> tuple[EnvironmentMap, np.ndarray]:
    """Field-rendered panorama and final transmittance seen from `origin`.

    Lighting queries ignore exposure: the factor is pinned to 1.
    """
    dirs = direction_grid(width, height).reshape(-1, 3)
    origins = np.tile(np.asarray(origin, dtype=float), (len(dirs), 1))
    hdr, t_final, _ = render_rays(grid, origins, dirs, dts=None, stats=None,
                                  k_samples=k_samples)
    return (EnvironmentMap(hdr.reshape(height, width, 3)),
            t_final.reshape(height, width))


def blend(surround: EnvironmentMap, t_map: np.ndarray,
          skydome: EnvironmentMap) -> EnvironmentMap:
    """Per-pixel surround + t * skydome."""
    t = np.asarray(t_map, dtype=float)
    if (surround.pixels.shape != skydome.pixels.shape
            or t.shape != surround.pixels.shape[:2]):
        raise ShapeMismatch(
            f"surround {surround.pixels.shape}, skydome {skydome.pixels.shape}, "
            f"t {t.shape}")
    return EnvironmentMap(surround.pixels + t[:, :, None] * skydome.pixels)


def fuse_views(dirs: Sequence, ints: Sequence,
               extrinsics: Sequence) -> tuple[np.ndarray, np.ndarray]:
    """Average per-camera peak estimates in the first camera's frame.

    Each direction is rotated camera->world with its own extrinsic, then
    world->camera-0; the mean is renormalized. Intensities average as-is.
    """
    if not (len(dirs) == len(ints) == len(extrinsics)) or not dirs:
        raise ValueError("need matching nonempty dirs, ints, extrinsics")
    rotations = [e.rotation if isinstance(e, Pose) else np.asarray(e, dtype=float)
                 for e in extrinsics]
    r0_inv = rotations[0].T
    acc = np.zeros(3)
    for d, rot in zip(dirs, rotations):
        acc += r0_inv @ (rot @ unit(np.asarray(d, dtype=float)))
    mean = acc / len(dirs)
    norm = float(np.linalg.norm(mean))
    if norm < 1e-6:
        raise DegenerateMean("view directions cancel; cannot fuse")
    fused_int = np.mean(np.asarray(ints, dtype=float), axis=0)
    return mean / norm, fused_int


def _log_encode(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise NonPositiveInput("log-encoded intensities must be nonnegative")
    return np.log1p(x)


def angular_error(pred_dir, gt_dir) -> float:
    """Angle in radians between two directions."""
    cos = float(np.dot(unit(np.asarray(pred_dir, dtype=float)),
                       unit(np.asarray(gt_dir, dtype=float))))
    return float(np.arccos(np.clip(cos, -1.0, 1.0)))


@dataclass(frozen=True, eq=False)
class SkydomeOutput:
    """One skydome estimate: peak direction/intensity, the HDR map, and
    (for the second training stage) the content code."""

    f_dir: np.ndarray
    f_int: np.ndarray
    hdr: EnvironmentMap
    content: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "f_dir", unit(np.asarray(self.f_dir, dtype=float)))
        object.__setattr__(self, "f_int", np.asarray(self.f_int, dtype=float))
        if self.content is not None:
            object.__setattr__(self, "content",
                               np.asarray(self.content, dtype=float))


STAGE1_WEIGHTS = (1.0, 0.1, 2.0, 0.2)
STAGE2_WEIGHTS = (0.5, 0.25, 0.005, 0.1, 0.2)


def _common_losses(pred: SkydomeOutput, gt: SkydomeOutput):
    if pred.hdr.pixels.shape != gt.hdr.pixels.shape:
        raise ShapeMismatch("HDR maps disagree on shape")
    l_dir = angular_error(pred.f_dir, gt.f_dir)
    diff_int = _log_encode(pred.f_int) - _log_encode(gt.f_int)
    l_int = float(np.sum(diff_int ** 2))
    diff_hdr = _log_encode(pred.hdr.pixels) - _log_encode(gt.hdr.pixels)
    l_hdr = float(np.mean(diff_hdr ** 2))
    l_ldr = float(np.mean(np.abs(oetf(pred.hdr.pixels) - oetf(gt.hdr.pixels))))
    return l_dir, l_int, l_hdr, l_ldr


def skydome_losses_stage1(pred: SkydomeOutput, gt: SkydomeOutput) -> dict:
    """First-stage loss stack: direction, intensity, HDR map, LDR map."""
    l_dir, l_int, l_hdr, l_ldr = _common_losses(pred, gt)
    w = STAGE1_WEIGHTS
    total = w[0] * l_dir + w[1] * l_int + w[2] * l_hdr + w[3] * l_ldr
    return {"dir": l_dir, "int": l_int, "hdr": l_hdr, "ldr": l_ldr,
            "total": total}


def skydome_losses_stage2(pred: SkydomeOutput, gt: SkydomeOutput) -> dict:
    """Second-stage stack adds the content-code L1 term at a small weight."""
    if pred.content is None or gt.content is None:
        raise ValueError("stage-2 losses need content codes on both outputs")
    if pred.content.shape != gt.content.shape:
        raise ShapeMismatch("content codes disagree on shape")
    l_dir, l_int, l_hdr, l_ldr = _common_losses(pred, gt)
    l_content = float(np.mean(np.abs(pred.content - gt.content)))
    w = STAGE2_WEIGHTS
    total = (w[0] * l_dir + w[1] * l_int + w[2] * l_content
             + w[3] * l_hdr + w[4] * l_ldr)
    return {"dir": l_dir, "int": l_int, "content": l_content, "hdr": l_hdr,
            "ldr": l_ldr, "total": total}


def irradiance(env: EnvironmentMap, normal) -> np.ndarray:
    """Cosine-weighted integral of the map over the hemisphere around `normal`."""
    n = unit(np.asarray(normal, dtype=float))
    dirs = direction_grid(env.width, env.height)
    cos = np.maximum(dirs @ n, 0.0)
    omega = solid_angles(env.width, env.height)
    return np.einsum("hw,hwc->c", cos * omega, env.pixels)


ENV_MAGIC = b"STEV"
ENV_VERSION = 1


def save_env(env: EnvironmentMap, path) -> None:
    """Binary panorama: magic, version, width, height, then float32 RGB rows."""
    header = ENV_MAGIC + struct.pack("<III", ENV_VERSION, env.width, env.height)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(env.pixels, dtype="<f4").tobytes())


def load_env(path) -> EnvironmentMap:
    raw = Path(path).read_bytes()
    if raw[:4] != ENV_MAGIC:
        raise ValueError("not an environment map file")
    version, width, height = struct.unpack_from("<III", raw, 4)
    if version != ENV_VERSION:
        raise ValueError(f"unsupported environment map version {version}")
    pixels = np.frombuffer(raw, dtype="<f4", count=height * width * 3, offset=16)
    return EnvironmentMap(pixels.reshape(height, width, 3).astype(float))


def env_to_png(env: EnvironmentMap, path) -> None:
    """LDR preview of the map through the sRGB curve."""
    from PIL import Image

    ldr = np.round(oetf(env.pixels) * 255.0).astype(np.uint8)
    Image.fromarray(ldr, mode="RGB").save(path)
