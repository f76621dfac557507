"""Command line front end: plan-trajectory, train, render, serve."""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bundles import load_scene_template
from .field import (ExposureStats, TrainConfig, load_grid, oetf, render_view,
                    save_grid, train)
from .motion import (ActionKind, DrivingDirection, MovementAttributes,
                     PlacementAttributes, Sector, place_vehicles,
                     plan_vehicle_motion)
from .raster import image_from_array, trajectory_svg
from .scene import CameraModel, crop_lane_map

# Per-vehicle seed separation, matching the orchestrator's convention so a
# CLI plan reproduces what the same attributes would do inside a scene edit.
VEHICLE_SEED_STRIDE = 7919


def _placement_from(entries: dict) -> PlacementAttributes:
    rng = entries.get("distance_range")
    return PlacementAttributes(
        count=int(entries.get("count", 1)),
        distance_range=None if rng is None else (float(rng[0]), float(rng[1])),
        sector=Sector(entries.get("sector", "Front")),
        driving_direction=DrivingDirection(
            entries.get("driving_direction", "Away")),
        crazy_mode=bool(entries.get("crazy_mode", False)))


def _movement_from(entries: dict) -> MovementAttributes:
    return MovementAttributes(
        speed=float(entries.get("speed", 8.0)),
        action=ActionKind(entries.get("action", "Straight")),
        duration=float(entries.get("duration", 4.0)),
        sample_rate=float(entries.get("sample_rate", 10.0)))


def cmd_plan_trajectory(args) -> int:
    attrs = json.loads(Path(args.attrs).read_text())
    placement = _placement_from(attrs.get("placement", {}))
    movement = _movement_from(attrs.get("movement", {}))

    lane_map, background, ego = load_scene_template(args.map)
    cropped = crop_lane_map(lane_map, ego)
    existing = [b.position for b in background]
    placements = place_vehicles(cropped, placement, ego,
                                existing=existing, seed=args.seed)
    plans = [plan_vehicle_motion(cropped, pos, heading, movement,
                                 seed=args.seed + VEHICLE_SEED_STRIDE * (j + 1))
             for j, (pos, heading) in enumerate(placements)]

    doc = {"map": cropped.name, "seed": args.seed, "vehicles": []}
    for (pos, heading), plan in zip(placements, plans):
        doc["vehicles"].append({
            "start": [float(pos[0]), float(pos[1])],
            "heading": float(heading),
            "converged": plan.converged,
            "samples": plan.trajectory.to_dict()["samples"],
        })
    Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {len(plans)} trajectories to {args.out}")

    if args.svg:
        svg = trajectory_svg(cropped, [p.trajectory for p in plans])
        Path(args.svg).write_text(svg)
        print(f"wrote overlay to {args.svg}")
    return 0


def _load_views(path: str) -> list[tuple[np.ndarray, CameraModel]]:
    doc = json.loads(Path(path).read_text())
    base = Path(path).parent
    views = []
    for rec in doc["views"]:
        image = np.load(base / rec["image"])
        views.append((image, CameraModel.from_dict(rec["camera"])))
    return views


def cmd_train(args) -> int:
    overrides = {}
    if args.config:
        overrides = json.loads(Path(args.config).read_text())
    for key in ("resolution", "aabb_min", "aabb_max"):
        if key in overrides:
            overrides[key] = tuple(overrides[key])
    config = TrainConfig(**overrides)

    views = _load_views(args.views)
    result = train(views, config)
    save_grid(result.grid, args.out)
    print(f"trained {config.steps} steps, final loss {result.final_loss:.6f}")
    print(f"exposure stats mu={result.stats.mu:.4f} "
          f"sigma={result.stats.sigma:.4f} epsilon={result.stats.epsilon}")
    print(f"wrote checkpoint to {args.out}")
    return 0


def cmd_render(args) -> int:
    grid = load_grid(args.grid)
    camera = CameraModel.from_dict(json.loads(Path(args.camera).read_text()))
    stats = None
    if args.mu is not None:
        stats = ExposureStats(mu=args.mu, sigma=args.sigma,
                              epsilon=args.epsilon)
    hdr, _ = render_view(grid, camera, dt=args.dt, stats=stats,
                         k_samples=args.k_samples)
    image_from_array(oetf(hdr)).save(args.png)
    print(f"wrote {camera.width}x{camera.height} PNG to {args.png}")
    if args.hdr:
        np.save(args.hdr, hdr)
        print(f"wrote float HDR dump to {args.hdr}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("scenetalk.service:app", host=args.host, port=args.port,
                log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenetalk",
        description="Language-driven driving scene editing toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan-trajectory",
                       help="plan vehicle trajectories on a lane map")
    p.add_argument("--map", required=True,
                   help="bundled map name or lane map JSON path")
    p.add_argument("--attrs", required=True,
                   help="JSON file with placement/movement attributes")
    p.add_argument("--out", required=True, help="trajectory JSON output path")
    p.add_argument("--svg", default=None, help="optional SVG overlay path")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_plan_trajectory)

    p = sub.add_parser("train", help="fit a radiance field to posed views")
    p.add_argument("--views", required=True,
                   help="JSON file listing image/camera pairs")
    p.add_argument("--config", default=None,
                   help="JSON training config (TrainConfig fields)")
    p.add_argument("--out", required=True, help="grid checkpoint output path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("render", help="render a view from a grid checkpoint")
    p.add_argument("--grid", required=True, help="grid checkpoint path")
    p.add_argument("--camera", required=True, help="camera model JSON path")
    p.add_argument("--png", required=True, help="tone-mapped PNG output path")
    p.add_argument("--hdr", default=None, help="optional .npy HDR dump path")
    p.add_argument("--dt", type=float, default=None,
                   help="exposure time (defaults to the camera's)")
    p.add_argument("--mu", type=float, default=None,
                   help="training exposure mean; enables the exposure factor")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--k-samples", type=int, default=64)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, LookupError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
