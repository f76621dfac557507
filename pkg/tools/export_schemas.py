#!/usr/bin/env python3
"""Publish the repo's external JSON contracts into docs/schemas/.

Sources of truth stay in code: agent config schemas come from
scenetalk.agents.schemas, the HTTP surface from the FastAPI app's own
OpenAPI document. The file-format schemas (lane maps, asset catalog,
planned trajectories, training config) are authored here because the
loaders accept plain JSON. tests/test_docs.py fails when the published
files drift from what this script produces, so regenerate with:

    python3 tools/export_schemas.py
"""

from __future__ import annotations

import json
from pathlib import Path

from scenetalk.agents.schemas import DEFAULTS, SCHEMAS
from scenetalk.service import create_app

OUT = Path(__file__).resolve().parents[1] / "docs" / "schemas"
DRAFT = "https://json-schema.org/draft/2020-12/schema"

LANE_MAP = {
    "$schema": DRAFT,
    "title": "Lane map bundle",
    "description": "A named 2D lane graph with the default ego start pose, "
                   "the placement crop box, and scripted background traffic.",
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "crop": {
            "description": "Placement region in ego-relative meters; "
                           "candidates behind the ego or outside the "
                           "lateral band are discarded.",
            "type": "object",
            "properties": {
                "front": {"type": "number", "exclusiveMinimum": 0},
                "left": {"type": "number", "exclusiveMinimum": 0},
                "right": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["front", "left", "right"],
            "additionalProperties": False,
        },
        "ego": {
            "type": "object",
            "properties": {"x": {"type": "number"},
                           "y": {"type": "number"},
                           "yaw": {"type": "number"}},
            "required": ["x", "y", "yaw"],
            "additionalProperties": False,
        },
        "nodes": {
            "description": "Directed lane segments from (x_s, y_s) to "
                           "(x_e, y_e).",
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "x_s": {"type": "number"}, "y_s": {"type": "number"},
                    "x_e": {"type": "number"}, "y_e": {"type": "number"},
                    "type": {"enum": ["Centerline", "Boundary", "Other"]},
                },
                "required": ["x_s", "y_s", "x_e", "y_e", "type"],
                "additionalProperties": False,
            },
            "minItems": 1,
        },
        "background_vehicles": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "id": {"type": "string"},
                    "position": {"type": "array", "minItems": 2,
                                 "maxItems": 2,
                                 "items": {"type": "number"}},
                    "heading": {"type": "number"},
                    "type_label": {"type": "string"},
                    "color": {"$ref": "#/$defs/rgb"},
                    "dimensions": {"$ref": "#/$defs/vec3"},
                },
                "required": ["id", "position", "heading", "type_label",
                             "color", "dimensions"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["name", "crop", "ego", "nodes", "background_vehicles"],
    "additionalProperties": False,
    "$defs": {
        "rgb": {"type": "array", "minItems": 3, "maxItems": 3,
                "items": {"type": "number", "minimum": 0, "maximum": 1}},
        "vec3": {"type": "array", "minItems": 3, "maxItems": 3,
                 "items": {"type": "number", "exclusiveMinimum": 0}},
    },
}

ASSET_CATALOG = {
    "$schema": DRAFT,
    "title": "Asset catalog",
    "description": "Flat list of vehicle assets addressable by type label "
                   "and brand tags. Dimensions are length, width, height "
                   "in meters; color is linear RGB in [0, 1].",
    "type": "array",
    "items": {
        "type": "object",
        "properties": {
            "id": {"type": "string"},
            "type_label": {"type": "string"},
            "brand_tags": {"type": "array", "items": {"type": "string"}},
            "color": {"type": "array", "minItems": 3, "maxItems": 3,
                      "items": {"type": "number", "minimum": 0,
                                "maximum": 1}},
            "dimensions": {"type": "array", "minItems": 3, "maxItems": 3,
                           "items": {"type": "number",
                                     "exclusiveMinimum": 0}},
        },
        "required": ["id", "type_label", "brand_tags", "color",
                     "dimensions"],
        "additionalProperties": False,
    },
    "minItems": 1,
}

TRAJECTORY = {
    "$schema": DRAFT,
    "title": "Planned trajectory document",
    "description": "Output of `scenetalk plan-trajectory`. Each sample row "
                   "is [time_s, x_m, y_m, heading_rad].",
    "type": "object",
    "properties": {
        "map": {"type": "string"},
        "seed": {"type": "integer"},
        "vehicles": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "start": {"type": "array", "minItems": 2, "maxItems": 2,
                              "items": {"type": "number"}},
                    "heading": {"type": "number"},
                    "converged": {"type": "boolean"},
                    "samples": {
                        "type": "array",
                        "items": {"type": "array", "minItems": 4,
                                  "maxItems": 4,
                                  "items": {"type": "number"}},
                        "minItems": 1,
                    },
                },
                "required": ["start", "heading", "converged", "samples"],
                "additionalProperties": False,
            },
        },
    },
    "required": ["map", "seed", "vehicles"],
    "additionalProperties": False,
}

TRAIN_CONFIG = {
    "$schema": DRAFT,
    "title": "Training config overrides",
    "description": "Optional JSON passed to `scenetalk train --config`; "
                   "every field falls back to the built-in default.",
    "type": "object",
    "properties": {
        "resolution": {"type": "array", "minItems": 3, "maxItems": 3,
                       "items": {"type": "integer", "minimum": 1}},
        "aabb_min": {"type": "array", "minItems": 3, "maxItems": 3,
                     "items": {"type": "number"}},
        "aabb_max": {"type": "array", "minItems": 3, "maxItems": 3,
                     "items": {"type": "number"}},
        "steps": {"type": "integer", "minimum": 1},
        "batch_size": {"type": "integer", "minimum": 1},
        "learning_rate": {"type": "number", "exclusiveMinimum": 0},
        "final_lr_fraction": {"type": "number", "exclusiveMinimum": 0,
                              "maximum": 1},
        "k_samples": {"type": "integer", "minimum": 1},
        "epsilon": {"type": "number", "minimum": 0},
        "use_exposure": {"type": "boolean"},
        "jitter": {"type": "boolean"},
        "seed": {"type": "integer"},
    },
    "additionalProperties": False,
}


def agent_configs() -> dict:
    defs = {}
    for agent, schema in SCHEMAS.items():
        entry = dict(schema)
        entry["default"] = DEFAULTS[agent]
        defs[agent.value] = entry
    return {
        "$schema": DRAFT,
        "title": "Agent config schemas",
        "description": "Validated shape of each agent's structured config "
                       "after defaults are merged; the `default` member of "
                       "every definition is that full default object.",
        "$defs": defs,
    }


def documents() -> dict[str, dict]:
    return {
        "lane_map.schema.json": LANE_MAP,
        "asset_catalog.schema.json": ASSET_CATALOG,
        "trajectory.schema.json": TRAJECTORY,
        "train_config.schema.json": TRAIN_CONFIG,
        "agent_configs.schema.json": agent_configs(),
        "openapi.json": create_app().openapi(),
    }


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, doc in documents().items():
        path = OUT / name
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
