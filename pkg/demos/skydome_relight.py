"""Build a sky environment with an injected sun peak and relight a patch.

Starts from a smooth gradient sky, injects a sharp spherical-Gaussian sun,
blends it against a darker surround by transmittance, and reports the
irradiance a few surface orientations receive before and after the sun
appears. Writes the environment maps as PNGs.
"""
from pathlib import Path

import numpy as np

from scenetalk.lighting import (EnvironmentMap, blend, direction_grid,
                                env_to_png, inject_peak, irradiance)

WIDTH, HEIGHT = 128, 64


def gradient_sky() -> EnvironmentMap:
    """Blue-to-white ramp by elevation, zero below the horizon."""
    dirs = direction_grid(WIDTH, HEIGHT)
    up = np.clip(dirs[..., 2], 0.0, 1.0)
    horizon = np.array([0.9, 0.9, 0.95])
    zenith = np.array([0.2, 0.4, 0.9])
    pixels = horizon + up[..., None] * (zenith - horizon)
    pixels[dirs[..., 2] < 0.0] = 0.05
    return EnvironmentMap(pixels)


def main() -> None:
    out = Path(__file__).parent / "out"
    out.mkdir(exist_ok=True)

    sky = gradient_sky()
    sun_dir = np.array([0.5, 0.3, 0.81])
    sun_dir /= np.linalg.norm(sun_dir)
    sunny = inject_peak(sky, sun_dir, np.array([60.0, 55.0, 40.0]))

    # a dark street canyon occludes the lower sky
    dirs = direction_grid(WIDTH, HEIGHT)
    surround = EnvironmentMap(
        np.where(dirs[..., 2:3] < 0.35, 0.02, 0.0) * np.ones(3))
    t_map = np.clip((dirs[..., 2] - 0.1) / 0.25, 0.0, 1.0)
    env = blend(surround, t_map, sunny)

    env_to_png(sky, out / "sky_plain.png")
    env_to_png(sunny, out / "sky_sun.png")
    env_to_png(env, out / "sky_blended.png")
    print(f"wrote {out}/sky_plain.png, sky_sun.png, sky_blended.png")

    print("\nirradiance (RGB, W/m^2):")
    for label, normal in (("flat ground  (+z)", (0.0, 0.0, 1.0)),
                          ("facing sun      ", tuple(sun_dir)),
                          ("away from sun   ", tuple(-sun_dir))):
        before = irradiance(sky, normal)
        after = irradiance(env, normal)
        print(f"  {label}  plain {np.round(before, 3)}  "
              f"with sun {np.round(after, 3)}")


if __name__ == "__main__":
    main()
