"""Exposure-aware HDR voxel radiance field.

A dense grid stores pre-activation density and emission at lattice nodes;
rendering ray-marches with stratified samples, alpha compositing, and a
per-ray exposure factor. The photometric loss maps HDR output through the
sRGB transfer curve, and its gradients are derived analytically so training
needs no autodiff framework.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit as sigmoid


class Diverged(RuntimeError):
    """Training loss became non-finite."""


def softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


@dataclass(frozen=True)
class ExposureStats:
    """Mean/spread of training exposure times plus the scale hyperparameter."""

    mu: float
    sigma: float
    epsilon: float = 0.5

    def __post_init__(self) -> None:
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.sigma < 0 or self.epsilon < 0:
            raise ValueError("sigma and epsilon must be nonnegative")


FACTOR_FLOOR = 1e-3


def exposure_factor(dt, stats: Optional[ExposureStats]):
    """Brightness multiplier 1 + epsilon*(dt - mu)/sigma.

    Degenerates to 1 when stats are absent or sigma is zero; floored at 1e-3
    so extreme exposures cannot flip the sign.
    """
    dt = np.asarray(dt, dtype=float)
    if stats is None or stats.sigma == 0:
        return np.ones_like(dt) if dt.ndim else 1.0
    f = 1.0 + stats.epsilon * (dt - stats.mu) / stats.sigma
    f = np.maximum(f, FACTOR_FLOOR)
    return f if dt.ndim else float(f)


@dataclass(frozen=True, eq=False)
class Ray:
    origin: np.ndarray
    direction: np.ndarray
    t_near: float = 0.0
    t_far: float = np.inf

    def __post_init__(self) -> None:
        o = np.asarray(self.origin, dtype=float).reshape(3)
        d = np.asarray(self.direction, dtype=float).reshape(3)
        if abs(float(np.linalg.norm(d)) - 1.0) > 1e-9:
            raise ValueError("ray direction must be unit length within 1e-9")
        if not self.t_near < self.t_far:
            raise ValueError("need t_near < t_far")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d)


@dataclass(eq=False)
class VoxelGrid:
    """Dense lattice of pre-activation parameters over an axis-aligned box.

    resolution counts lattice nodes per axis; values between nodes come from
    trilinear interpolation of the softplus-activated node values, so density
    and emission stay positive everywhere.
    """

    resolution: tuple[int, int, int]
    aabb_min: np.ndarray
    aabb_max: np.ndarray
    density_params: np.ndarray
    emission_params: np.ndarray

    def __post_init__(self) -> None:
        self.resolution = tuple(int(n) for n in self.resolution)
        if any(n < 2 for n in self.resolution):
            raise ValueError("need at least 2 lattice nodes per axis")
        self.aabb_min = np.asarray(self.aabb_min, dtype=float).reshape(3)
        self.aabb_max = np.asarray(self.aabb_max, dtype=float).reshape(3)
        if not np.all(self.aabb_max > self.aabb_min):
            raise ValueError("aabb_max must exceed aabb_min on every axis")
        self.density_params = np.asarray(self.density_params, dtype=float)
        self.emission_params = np.asarray(self.emission_params, dtype=float)
        if self.density_params.shape != self.resolution:
            raise ValueError("density_params shape must match resolution")
        if self.emission_params.shape != self.resolution + (3,):
            raise ValueError("emission_params shape must be resolution + (3,)")

    @staticmethod
    def create(resolution, aabb_min, aabb_max, density_init: float = -2.0,
               emission_init: float = -2.0) -> "VoxelGrid":
        res = tuple(int(n) for n in resolution)
        return VoxelGrid(res, aabb_min, aabb_max,
                         np.full(res, float(density_init)),
                         np.full(res + (3,), float(emission_init)))

    def copy(self) -> "VoxelGrid":
        return VoxelGrid(self.resolution, self.aabb_min.copy(),
                         self.aabb_max.copy(), self.density_params.copy(),
                         self.emission_params.copy())

    def corner_weights(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Flat node indices (M, 8) and trilinear weights (M, 8) per point."""
        res = np.asarray(self.resolution)
        u = (np.atleast_2d(points) - self.aabb_min) / (self.aabb_max - self.aabb_min)
        u = np.clip(u, 0.0, 1.0) * (res - 1)
        i0 = np.minimum(u.astype(int), res - 2)
        frac = u - i0
        nx, ny, nz = self.resolution
        idx = np.empty((len(u), 8), dtype=np.int64)
        wts = np.empty((len(u), 8))
        corner = 0
        for dx in (0, 1):
            wx = frac[:, 0] if dx else 1.0 - frac[:, 0]
            for dy in (0, 1):
                wy = frac[:, 1] if dy else 1.0 - frac[:, 1]
                for dz in (0, 1):
                    wz = frac[:, 2] if dz else 1.0 - frac[:, 2]
                    idx[:, corner] = (((i0[:, 0] + dx) * ny + i0[:, 1] + dy) * nz
                                      + i0[:, 2] + dz)
                    wts[:, corner] = wx * wy * wz
                    corner += 1
        return idx, wts

    def sample(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Activated (density, emission) at arbitrary points, shapes (M,), (M, 3)."""
        idx, wts = self.corner_weights(points)
        act_d = softplus(self.density_params).ravel()
        act_e = softplus(self.emission_params).reshape(-1, 3)
        density = np.sum(act_d[idx] * wts, axis=1)
        emission = np.sum(act_e[idx] * wts[:, :, None], axis=1)
        return density, emission


GRID_MAGIC = b"STVG"
GRID_VERSION = 1


def save_grid(grid: VoxelGrid, path) -> None:
    """Little-endian checkpoint: magic, version, resolution, aabb, then the
    density and emission parameter arrays as float64."""
    nx, ny, nz = grid.resolution
    header = GRID_MAGIC + struct.pack("<IIII", GRID_VERSION, nx, ny, nz)
    header += struct.pack("<6d", *grid.aabb_min, *grid.aabb_max)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(grid.density_params, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(grid.emission_params, dtype="<f8").tobytes())


def load_grid(path) -> VoxelGrid:
    raw = Path(path).read_bytes()
    if raw[:4] != GRID_MAGIC:
        raise ValueError("not a voxel grid checkpoint")
    version, nx, ny, nz = struct.unpack_from("<IIII", raw, 4)
    if version != GRID_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    box = struct.unpack_from("<6d", raw, 20)
    offset = 20 + 48
    n = nx * ny * nz
    density = np.frombuffer(raw, dtype="<f8", count=n, offset=offset)
    emission = np.frombuffer(raw, dtype="<f8", count=3 * n, offset=offset + 8 * n)
    return VoxelGrid((nx, ny, nz), box[:3], box[3:],
                     density.reshape(nx, ny, nz).copy(),
                     emission.reshape(nx, ny, nz, 3).copy())


def _clip_to_box(aabb_min, aabb_max, origins, dirs, t_near, t_far):
    """Slab intersection; returns (enter, exit, valid) per ray."""
    d = np.where(np.abs(dirs) < 1e-15, 1e-15, dirs)
    t_a = (aabb_min - origins) / d
    t_b = (aabb_max - origins) / d
    lo = np.minimum(t_a, t_b).max(axis=1)
    hi = np.maximum(t_a, t_b).min(axis=1)
    enter = np.maximum(lo, t_near)
    exit_ = np.minimum(hi, t_far)
    valid = exit_ > enter
    return enter, exit_, valid


class _RenderCache:
    """Intermediate quantities kept for the analytic backward pass."""

    __slots__ = ("valid", "delta", "idx", "wts", "alpha", "trans_before",
                 "weights", "emission", "factor", "base")


def _render_core(grid: VoxelGrid, origins, dirs, dts, stats, k_samples,
                 rng=None, want_cache=False):
    """Shared forward pass.

    Samples sit at stratum midpoints (or jittered inside each stratum when an
    rng is given); the marching step for sample k is the gap to sample k+1,
    and the last step runs to the box exit, so opacity telescopes exactly.
    """
    origins = np.atleast_2d(np.asarray(origins, dtype=float))
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    n_rays = len(origins)
    factor = np.broadcast_to(np.asarray(exposure_factor(dts, stats), dtype=float),
                             (n_rays,))

    t_near = np.zeros(n_rays)
    t_far = np.full(n_rays, np.inf)
    enter, exit_, valid = _clip_to_box(grid.aabb_min, grid.aabb_max,
                                       origins, dirs, t_near, t_far)
    length = np.where(valid, exit_ - enter, 0.0)

    k_idx = np.arange(k_samples)
    if rng is None:
        offsets = np.broadcast_to((k_idx + 0.5) / k_samples, (n_rays, k_samples))
    else:
        offsets = (k_idx + rng.uniform(size=(n_rays, k_samples))) / k_samples
    t = enter[:, None] + offsets * length[:, None]
    delta = np.concatenate([np.diff(t, axis=1),
                            (enter + length)[:, None] - t[:, -1:]], axis=1)

    pts = origins[:, None, :] + t[..., None] * dirs[:, None, :]
    idx, wts = grid.corner_weights(pts.reshape(-1, 3))
    act_d = softplus(grid.density_params).ravel()
    act_e = softplus(grid.emission_params).reshape(-1, 3)
    sigma = np.sum(act_d[idx] * wts, axis=1).reshape(n_rays, k_samples)
    emission = np.sum(act_e[idx] * wts[:, :, None],
                      axis=1).reshape(n_rays, k_samples, 3)
    sigma = np.where(valid[:, None], sigma, 0.0)

    alpha = -np.expm1(-sigma * delta)
    trans = np.cumprod(1.0 - alpha, axis=1)
    trans_before = np.concatenate([np.ones((n_rays, 1)), trans[:, :-1]], axis=1)
    weights = trans_before * alpha
    base = np.einsum("rk,rkc->rc", weights, emission)
    hdr = factor[:, None] * base
    t_final = trans[:, -1]
    # expected termination distance; transparent remainder lands on the exit
    depth = np.einsum("rk,rk->r", weights, t) + t_final * (enter + length)
    depth = np.where(valid, depth, np.inf)

    cache = None
    if want_cache:
        cache = _RenderCache()
        cache.valid = valid
        cache.delta = delta
        cache.idx = idx
        cache.wts = wts
        cache.alpha = alpha
        cache.trans_before = trans_before
        cache.weights = weights
        cache.emission = emission
        cache.factor = factor
        cache.base = base
    return hdr, t_final, weights, depth, cache


@dataclass(frozen=True, eq=False)
class RenderResult:
    hdr: np.ndarray
    transmittance_final: float
    weights: Optional[np.ndarray] = None


def render_hdr(grid: VoxelGrid, ray: Ray, dt: Optional[float] = None,
               stats: Optional[ExposureStats] = None, k_samples: int = 64,
               keep_weights: bool = False) -> RenderResult:
    """Render one ray; a ray that misses the box returns hdr 0 and T 1."""
    if dt is None:
        dt = stats.mu if stats is not None else 1.0
    hdr, t_final, weights, _, _ = _render_core(
        grid, ray.origin[None], ray.direction[None], dt, stats, k_samples)
    return RenderResult(hdr[0], float(t_final[0]),
                        weights[0] if keep_weights else None)


def render_rays(grid: VoxelGrid, origins, dirs, dts=None,
                stats: Optional[ExposureStats] = None, k_samples: int = 64,
                rng=None, chunk: int = 4096):
    """Vectorized render of (N, 3) rays -> (hdr (N, 3), t_final (N,), weights)."""
    origins = np.atleast_2d(np.asarray(origins, dtype=float))
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    if dts is None:
        dts = stats.mu if stats is not None else 1.0
    dts = np.broadcast_to(np.asarray(dts, dtype=float), (len(origins),))
    if len(origins) <= chunk or rng is not None:
        hdr, t_final, weights, _, _ = _render_core(grid, origins, dirs, dts,
                                                   stats, k_samples, rng=rng)
        return hdr, t_final, weights
    parts = [_render_core(grid, origins[i:i + chunk], dirs[i:i + chunk],
                          dts[i:i + chunk], stats, k_samples)[:3]
             for i in range(0, len(origins), chunk)]
    return (np.concatenate([p[0] for p in parts]),
            np.concatenate([p[1] for p in parts]),
            np.concatenate([p[2] for p in parts]))


def render_image(grid: VoxelGrid, camera, dt: Optional[float] = None,
                 stats: Optional[ExposureStats] = None, k_samples: int = 64,
                 background: Optional[np.ndarray] = None) -> np.ndarray:
    """HDR image (H, W, 3) through a CameraModel; optional constant or per-pixel
    background composited against the final transmittance."""
    origins, dirs = camera.pixel_rays()
    if dt is None:
        dt = camera.exposure_time
    hdr, t_final, _ = render_rays(grid, origins, dirs, dt, stats, k_samples)
    if background is not None:
        bg = np.broadcast_to(np.asarray(background, dtype=float),
                             hdr.shape).reshape(hdr.shape)
        hdr = hdr + t_final[:, None] * bg
    return hdr.reshape(camera.height, camera.width, 3)


def render_view(grid: VoxelGrid, camera, dt: Optional[float] = None,
                stats: Optional[ExposureStats] = None, k_samples: int = 64,
                background: Optional[np.ndarray] = None,
                chunk: int = 4096) -> tuple[np.ndarray, np.ndarray]:
    """HDR image plus per-pixel expected termination depth.

    Rays that miss the grid get +inf depth (and the background color when one
    is given), so composition treats them as open sky.
    """
    origins, dirs = camera.pixel_rays()
    if dt is None:
        dt = camera.exposure_time
    dts = np.full(len(origins), float(dt))
    hdr_parts, depth_parts = [], []
    for i in range(0, len(origins), chunk):
        hdr, t_final, _, depth, _ = _render_core(
            grid, origins[i:i + chunk], dirs[i:i + chunk], dts[i:i + chunk],
            stats, k_samples)
        if background is not None:
            bg = np.broadcast_to(np.asarray(background, dtype=float),
                                 hdr.shape).reshape(hdr.shape)
            hdr = hdr + t_final[:, None] * bg
        hdr_parts.append(hdr)
        depth_parts.append(depth)
    h, w = camera.height, camera.width
    return (np.concatenate(hdr_parts).reshape(h, w, 3),
            np.concatenate(depth_parts).reshape(h, w))


SRGB_KNEE = 0.0031308


def oetf(hdr: np.ndarray) -> np.ndarray:
    """sRGB transfer curve, clamped to [0, 1]."""
    x = np.maximum(np.asarray(hdr, dtype=float), 0.0)
    low = 12.92 * x
    high = 1.055 * np.power(np.maximum(x, SRGB_KNEE), 1.0 / 2.4) - 0.055
    return np.clip(np.where(x <= SRGB_KNEE, low, high), 0.0, 1.0)


def oetf_derivative(hdr: np.ndarray) -> np.ndarray:
    """Slope of oetf; 12.92 at and below the knee, 0 where the clamp engages."""
    x = np.asarray(hdr, dtype=float)
    safe = np.maximum(x, SRGB_KNEE)
    high = (1.055 / 2.4) * np.power(safe, 1.0 / 2.4 - 1.0)
    d = np.where(x <= SRGB_KNEE, 12.92, high)
    return np.where((x < 0.0) | (x > 1.0), 0.0, d)


def photometric_loss(grid: VoxelGrid, origins, dirs, targets, dts=None,
                     stats: Optional[ExposureStats] = None,
                     k_samples: int = 64) -> float:
    """Mean over rays and channels of (oetf(render) - target)^2."""
    hdr, _, _ = render_rays(grid, origins, dirs, dts, stats, k_samples)
    err = oetf(hdr) - np.asarray(targets, dtype=float)
    return float(np.mean(err ** 2))


def loss_gradients(grid: VoxelGrid, origins, dirs, targets, dts=None,
                   stats: Optional[ExposureStats] = None, k_samples: int = 64,
                   rng=None) -> tuple[float, np.ndarray, np.ndarray]:
    """(loss, d loss/d density_params, d loss/d emission_params), analytically.

    Density gradients use the suffix-sum form: moving opacity earlier on the
    ray both adds that sample's emission and shadows everything behind it.
    """
    origins = np.atleast_2d(np.asarray(origins, dtype=float))
    dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    n_rays = len(origins)
    if dts is None:
        dts = stats.mu if stats is not None else 1.0
    dts = np.broadcast_to(np.asarray(dts, dtype=float), (n_rays,))

    hdr, _, _, _, cache = _render_core(grid, origins, dirs, dts, stats,
                                       k_samples, rng=rng, want_cache=True)
    err = oetf(hdr) - targets
    loss = float(np.mean(err ** 2))

    denom = err.size
    d_base = (2.0 / denom) * err * oetf_derivative(hdr) * cache.factor[:, None]

    # emission path: d base_c / d e_{k,c} = w_k
    g_e_sample = d_base[:, None, :] * cache.weights[:, :, None]

    # density path: d base_c / d sigma_k = delta_k (T_{k+1} e_{k,c} - S_{k,c})
    we = cache.weights[:, :, None] * cache.emission
    suffix = np.flip(np.cumsum(np.flip(we, axis=1), axis=1), axis=1) - we
    t_next = cache.trans_before * (1.0 - cache.alpha)
    d_base_d_sigma = cache.delta[:, :, None] * (
        t_next[:, :, None] * cache.emission - suffix)
    g_sigma_sample = np.einsum("rc,rkc->rk", d_base, d_base_d_sigma)
    g_sigma_sample = np.where(cache.valid[:, None], g_sigma_sample, 0.0)

    idx, wts = cache.idx, cache.wts
    act_grad_d = sigmoid(grid.density_params).ravel()
    act_grad_e = sigmoid(grid.emission_params).reshape(-1, 3)

    g_density = np.zeros(grid.density_params.size)
    np.add.at(g_density, idx,
              g_sigma_sample.reshape(-1)[:, None] * wts * act_grad_d[idx])
    g_emission = np.zeros((grid.emission_params.size // 3, 3))
    np.add.at(g_emission, idx,
              g_e_sample.reshape(-1, 3)[:, None, :] * wts[:, :, None]
              * act_grad_e[idx])
    return (loss, g_density.reshape(grid.density_params.shape),
            g_emission.reshape(grid.emission_params.shape))


def psnr(image_a: np.ndarray, image_b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for images in [0, 1]."""
    mse = float(np.mean((np.asarray(image_a, dtype=float)
                         - np.asarray(image_b, dtype=float)) ** 2))
    if mse == 0:
        return float("inf")
    return -10.0 * np.log10(mse)


@dataclass
class TrainConfig:
    resolution: tuple[int, int, int] = (16, 16, 16)
    aabb_min: tuple[float, float, float] = (-1.0, -1.0, -1.0)
    aabb_max: tuple[float, float, float] = (1.0, 1.0, 1.0)
    steps: int = 2000
    batch_size: int = 1024
    learning_rate: float = 5e-2
    final_lr_fraction: float = 0.1
    k_samples: int = 32
    epsilon: float = 0.5
    use_exposure: bool = True
    jitter: bool = True
    seed: int = 0


@dataclass
class TrainResult:
    grid: VoxelGrid
    stats: ExposureStats
    final_loss: float


def train(views: Sequence[tuple[np.ndarray, "CameraModel"]],
          config: TrainConfig = TrainConfig()) -> TrainResult:
    """Fit a grid to LDR images by mini-batch Adam on the analytic gradients.

    Exposure statistics come from the views' exposure times; setting
    use_exposure False trains the same model with the factor pinned to 1.
    """
    if len(views) < 2:
        raise ValueError("need at least 2 views")
    exposures = np.array([cam.exposure_time for _, cam in views])
    if np.any(exposures <= 0):
        raise ValueError("exposure times must be positive")
    stats = ExposureStats(mu=float(exposures.mean()),
                          sigma=float(exposures.std()),
                          epsilon=config.epsilon if config.use_exposure else 0.0)

    all_o, all_d, all_c, all_t = [], [], [], []
    for image, cam in views:
        o, d = cam.pixel_rays()
        all_o.append(o)
        all_d.append(d)
        all_c.append(np.asarray(image, dtype=float).reshape(-1, 3))
        all_t.append(np.full(len(o), cam.exposure_time))
    origins = np.concatenate(all_o)
    dirs = np.concatenate(all_d)
    colors = np.concatenate(all_c)
    dts = np.concatenate(all_t)

    grid = VoxelGrid.create(config.resolution, config.aabb_min, config.aabb_max)
    rng = np.random.default_rng(config.seed)
    params = [grid.density_params, grid.emission_params]
    m_state = [np.zeros_like(p) for p in params]
    v_state = [np.zeros_like(p) for p in params]
    beta1, beta2, eps = 0.9, 0.999, 1e-8

    loss = float("nan")
    for step in range(config.steps):
        batch = rng.integers(0, len(origins), config.batch_size)
        loss, g_d, g_e = loss_gradients(
            grid, origins[batch], dirs[batch], colors[batch], dts[batch],
            stats, config.k_samples, rng=rng if config.jitter else None)
        if not np.isfinite(loss):
            raise Diverged(f"loss became non-finite at step {step}")
        lr = config.learning_rate * config.final_lr_fraction ** (
            step / max(config.steps - 1, 1))
        for p, m, v, g in zip(params, m_state, v_state, (g_d, g_e)):
            m *= beta1
            m += (1 - beta1) * g
            v *= beta2
            v += (1 - beta2) * g * g
            m_hat = m / (1 - beta1 ** (step + 1))
            v_hat = v / (1 - beta2 ** (step + 1))
            p -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return TrainResult(grid, stats, loss)
