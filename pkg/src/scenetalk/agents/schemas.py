"""Per-agent config schemas and defaults.

Configs are plain JSON objects. Validation merges agent defaults first,
then checks the result against the agent's schema, so a backend may emit
only the entries it cares about.
"""

from __future__ import annotations

import copy
from typing import Any

import jsonschema

from .types import AgentKind, SchemaViolation

_VEC3 = {"type": "array", "items": {"type": "number"},
         "minItems": 3, "maxItems": 3}
_RGB = {"type": "array", "items": {"type": "number", "minimum": 0.0,
                                   "maximum": 1.0},
        "minItems": 3, "maxItems": 3}
_RANGE = {"type": ["array", "null"], "items": {"type": "number"},
          "minItems": 2, "maxItems": 2}

_TARGET = {
    "type": "object",
    "properties": {
        "all": {"type": "boolean"},
        "type": {"type": "string"},
        "brand": {"type": "string"},
        "color": _RGB,
        "reference": {"type": "string"},
        "instance_id": {"type": "string"},
    },
    "additionalProperties": False,
}

_MOVEMENT = {
    "type": "object",
    "properties": {
        "speed": {"type": "number", "minimum": 0.0},
        "action": {"enum": ["Straight", "TurnLeft", "TurnRight", "Park",
                            "Backward"]},
        "duration": {"type": "number", "exclusiveMinimum": 0.0},
        "sample_rate": {"type": "number", "exclusiveMinimum": 0.0},
    },
    "required": ["speed", "action", "duration", "sample_rate"],
    "additionalProperties": False,
}

_PLACEMENT = {
    "type": "object",
    "properties": {
        "sector": {"enum": ["Front", "LeftFront", "RightFront", "Left",
                            "Right", "Back"]},
        "distance_range": _RANGE,
        "driving_direction": {"enum": ["Toward", "Away"]},
        "crazy_mode": {"type": "boolean"},
        "anchor": {"type": ["string", "null"]},
    },
    "required": ["sector", "distance_range", "driving_direction",
                 "crazy_mode", "anchor"],
    "additionalProperties": False,
}

_ASSET = {
    "type": "object",
    "properties": {
        "type": {"type": "string"},
        "brand": {"type": "string"},
        "color": _RGB,
    },
    "additionalProperties": False,
}

_FRAMES = {"type": ["array", "null"],
           "items": {"type": "integer", "minimum": 0},
           "minItems": 2, "maxItems": 2}

SCHEMAS: dict[AgentKind, dict[str, Any]] = {
    AgentKind.VIEW_ADJUST: {
        "type": "object",
        "properties": {"delta_position": _VEC3, "delta_angles": _VEC3},
        "required": ["delta_position", "delta_angles"],
        "additionalProperties": False,
    },
    AgentKind.VEHICLE_DELETE: {
        "type": "object",
        "properties": {"target": _TARGET},
        "required": ["target"],
        "additionalProperties": False,
    },
    AgentKind.ASSET_MANAGE: {
        "type": "object",
        "properties": {"target": _TARGET, "color": _RGB},
        "required": ["target", "color"],
        "additionalProperties": False,
    },
    AgentKind.MOTION: {
        "type": "object",
        "properties": {
            "mode": {"enum": ["add", "modify"]},
            "count": {"type": "integer", "minimum": 1},
            "asset": _ASSET,
            "placement": _PLACEMENT,
            "movement": _MOVEMENT,
            "target": _TARGET,
        },
        "required": ["mode", "movement"],
        "additionalProperties": False,
    },
    AgentKind.BACKGROUND_RENDER: {
        "type": "object",
        "properties": {"frames": _FRAMES},
        "required": ["frames"],
        "additionalProperties": False,
    },
    AgentKind.FOREGROUND_RENDER: {
        "type": "object",
        "properties": {"frames": _FRAMES},
        "required": ["frames"],
        "additionalProperties": False,
    },
}

DEFAULTS: dict[AgentKind, dict[str, Any]] = {
    AgentKind.VIEW_ADJUST: {
        "delta_position": [0.0, 0.0, 0.0],
        "delta_angles": [0.0, 0.0, 0.0],
    },
    AgentKind.VEHICLE_DELETE: {"target": {}},
    AgentKind.ASSET_MANAGE: {"target": {}, "color": [1.0, 1.0, 1.0]},
    AgentKind.MOTION: {
        "mode": "add",
        "count": 1,
        "asset": {},
        "placement": {
            "sector": "Front",
            "distance_range": None,
            "driving_direction": "Away",
            "crazy_mode": False,
            "anchor": None,
        },
        "movement": {
            "speed": 8.0,
            "action": "Straight",
            "duration": 4.0,
            "sample_rate": 10.0,
        },
    },
    AgentKind.BACKGROUND_RENDER: {"frames": None},
    AgentKind.FOREGROUND_RENDER: {"frames": None},
}


def merge_defaults(agent: AgentKind, entries: dict[str, Any]) -> dict[str, Any]:
    """Overlay entries onto the agent defaults, one nesting level deep."""
    merged = copy.deepcopy(DEFAULTS[agent])
    for key, value in entries.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = {**merged[key], **value}
        else:
            merged[key] = value
    return merged


def validate_config(agent: AgentKind, entries: dict[str, Any]) -> dict[str, Any]:
    """Merge defaults and validate; raises SchemaViolation on mismatch."""
    if agent not in SCHEMAS:
        raise SchemaViolation(f"agent {agent.value} takes no config")
    if not isinstance(entries, dict):
        raise SchemaViolation("config must be a JSON object")
    merged = merge_defaults(agent, entries)
    try:
        jsonschema.validate(merged, SCHEMAS[agent])
    except jsonschema.ValidationError as exc:
        raise SchemaViolation(
            f"{agent.value} config invalid at "
            f"{'/'.join(str(p) for p in exc.absolute_path) or '<root>'}: "
            f"{exc.message}") from exc
    return merged
