#!/usr/bin/env python3
"""Regenerate the bundled lane maps and the asset catalog.

Standalone on purpose: writes plain JSON into src/scenetalk/data so it can
run before the package is installed. Conventions baked into the maps:

- right-hand traffic, lane spacing 3.5 m, segments 10 m long
- the ego starts at the origin heading +x, on a lane centerline
- background vehicles sit at least 6 m from the lane nodes the edit
  corpus relies on, so scripted placements never get crowded out
"""

from __future__ import annotations

import json
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "scenetalk" / "data"
STEP = 10.0


def seg(x_s, y_s, x_e, y_e, kind="Centerline"):
    return {"x_s": float(x_s), "y_s": float(y_s),
            "x_e": float(x_e), "y_e": float(y_e), "type": kind}


def run(p0, p1, kind="Centerline"):
    """Consecutive STEP-long segments from p0 toward p1."""
    (x0, y0), (x1, y1) = p0, p1
    length = ((x1 - x0) ** 2 + (y1 - y0) ** 2) ** 0.5
    n = max(1, int(round(length / STEP)))
    ux, uy = (x1 - x0) / n, (y1 - y0) / n
    return [seg(x0 + i * ux, y0 + i * uy, x0 + (i + 1) * ux, y0 + (i + 1) * uy,
                kind) for i in range(n)]


def east_west_road(y, x0, x1, twin_lane=True):
    """Lanes at y (+x), y+3.5 (-x, oncoming) and optionally y-3.5 (+x)."""
    nodes = run((x0, y), (x1, y))
    nodes += run((x1, y + 3.5), (x0, y + 3.5))
    if twin_lane:
        nodes += run((x0, y - 3.5), (x1, y - 3.5))
    lo = y - (5.25 if twin_lane else 1.75)
    nodes += run((x0, lo), (x1, lo), "Boundary")
    nodes += run((x0, y + 5.25), (x1, y + 5.25), "Boundary")
    return nodes


def north_south_road(x, y0, y1):
    """Lanes at x+3.5 (+y, northbound) and x-3.5 (-y, southbound)."""
    nodes = run((x + 3.5, y0), (x + 3.5, y1))
    nodes += run((x - 3.5, y1), (x - 3.5, y0))
    nodes += run((x - 5.25, y0), (x - 5.25, y1), "Boundary")
    nodes += run((x + 5.25, y0), (x + 5.25, y1), "Boundary")
    return nodes


def bg(bid, type_label, color, position, heading, dims):
    return {"id": bid, "type_label": type_label, "color": list(color),
            "position": list(position), "heading": heading,
            "dimensions": list(dims)}


CAR_DIMS = (4.6, 1.85, 1.45)
TRUCK_DIMS = (5.9, 2.0, 1.9)

MAPS = {
    "straight": {
        "nodes": east_west_road(0.0, -60.0, 150.0),
        "background_vehicles": [
            bg("bg-0", "car", (0.5, 0.5, 0.5), (30.0, 3.5), 3.14159265,
               CAR_DIMS),
            bg("bg-1", "car", (0.95, 0.95, 0.95), (50.0, 3.5), 3.14159265,
               CAR_DIMS),
            bg("bg-2", "truck", (0.45, 0.47, 0.5), (-15.0, 0.0), 0.0,
               TRUCK_DIMS),
        ],
    },
    # intersection close to the ego so anchored sectors reach the cross
    # street inside the crop rectangle
    "crossroad": {
        "nodes": (east_west_road(0.0, -60.0, 120.0)
                  + north_south_road(10.0, -40.0, 80.0)),
        "background_vehicles": [
            bg("bg-0", "car", (0.95, 0.95, 0.95), (45.0, 3.5), 3.14159265,
               CAR_DIMS),
            bg("bg-1", "car", (0.1, 0.15, 0.9), (70.0, 0.0), 0.0, CAR_DIMS),
            bg("bg-2", "car", (0.5, 0.5, 0.5), (6.5, -20.0), -1.5707963,
               CAR_DIMS),
        ],
    },
    "town": {
        "nodes": (east_west_road(0.0, -60.0, 150.0)
                  + east_west_road(60.0, -60.0, 150.0, twin_lane=False)
                  + north_south_road(30.0, -40.0, 100.0)
                  + north_south_road(90.0, -40.0, 100.0)),
        "background_vehicles": [
            bg("bg-0", "car", (0.5, 0.5, 0.5), (50.0, 3.5), 3.14159265,
               CAR_DIMS),
            bg("bg-1", "car", (0.1, 0.85, 0.15), (26.5, 20.0), -1.5707963,
               CAR_DIMS),
            bg("bg-2", "truck", (0.45, 0.47, 0.5), (75.0, 0.0), 0.0,
               TRUCK_DIMS),
            bg("bg-3", "car", (0.95, 0.85, 0.1), (93.5, 30.0), 1.5707963,
               CAR_DIMS),
        ],
    },
}

# First car id must be the compact default so a bare "add a car" picks it.
ASSETS = [
    {"id": "car-001-mini", "type_label": "car",
     "brand_tags": ["Mini", "Cooper"], "color": [0.1, 0.85, 0.15],
     "dimensions": [3.8, 1.7, 1.4]},
    {"id": "car-002-porsche", "type_label": "car",
     "brand_tags": ["Porsche", "911"], "color": [0.85, 0.05, 0.05],
     "dimensions": [4.5, 1.9, 1.3]},
    {"id": "car-003-chevrolet", "type_label": "car",
     "brand_tags": ["Chevrolet", "Malibu"], "color": [0.1, 0.15, 0.9],
     "dimensions": [4.9, 1.85, 1.45]},
    {"id": "car-004-audi", "type_label": "car",
     "brand_tags": ["Audi"], "color": [0.05, 0.05, 0.05],
     "dimensions": [4.8, 1.85, 1.4]},
    {"id": "car-005-tesla", "type_label": "car",
     "brand_tags": ["Tesla"], "color": [0.95, 0.95, 0.95],
     "dimensions": [4.7, 1.85, 1.45]},
    {"id": "car-006-taxi", "type_label": "car",
     "brand_tags": ["Toyota", "Taxi"], "color": [0.95, 0.85, 0.1],
     "dimensions": [4.6, 1.85, 1.5]},
    {"id": "police-001-dodge", "type_label": "police",
     "brand_tags": ["Dodge", "Charger"], "color": [0.15, 0.15, 0.18],
     "dimensions": [5.0, 1.9, 1.5]},
    {"id": "suv-001-toyota", "type_label": "suv",
     "brand_tags": ["Toyota"], "color": [0.7, 0.7, 0.72],
     "dimensions": [4.6, 1.87, 1.7]},
    {"id": "truck-001-ford", "type_label": "truck",
     "brand_tags": ["Ford"], "color": [0.45, 0.47, 0.5],
     "dimensions": [5.9, 2.0, 1.9]},
    {"id": "van-001-honda", "type_label": "van",
     "brand_tags": ["Honda"], "color": [0.42, 0.28, 0.12],
     "dimensions": [5.1, 1.9, 2.0]},
]


def main() -> None:
    maps_dir = DATA / "maps"
    maps_dir.mkdir(parents=True, exist_ok=True)
    for name, payload in MAPS.items():
        doc = {
            "name": name,
            "crop": {"front": 80.0, "left": 20.0, "right": 20.0},
            "ego": {"x": 0.0, "y": 0.0, "yaw": 0.0},
            "nodes": payload["nodes"],
            "background_vehicles": payload["background_vehicles"],
        }
        path = maps_dir / f"{name}.json"
        path.write_text(json.dumps(doc, indent=1) + "\n")
        print(f"wrote {path} ({len(payload['nodes'])} nodes)")
    assets_path = DATA / "assets.json"
    assets_path.write_text(json.dumps(ASSETS, indent=1) + "\n")
    print(f"wrote {assets_path} ({len(ASSETS)} assets)")


if __name__ == "__main__":
    main()
