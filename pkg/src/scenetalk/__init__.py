"""Language-driven driving-scene simulation.

Natural-language commands are decomposed into per-agent instructions, parsed
into structured configs, and executed against an immutable scene graph; HDR
voxel rendering, hybrid lighting, trajectory planning, and depth compositing
produce the frames.
"""

__version__ = "0.1.0"

from .bundles import (bundled_map_names, default_rig, load_bank,
                      load_scene_template)
from .geometry import Pose
from .motion import (ActionKind, DrivingDirection, MovementAttributes,
                     PlacementAttributes, Sector, place_vehicles,
                     plan_vehicle_motion)
from .scene import (AssetRecord, BackgroundVehicle, CameraModel, LaneMap,
                    SceneGraph, VehicleInstance, canonical_json,
                    crop_lane_map, load_asset_bank, load_lane_map,
                    select_asset)

__all__ = [
    "__version__",
    "ActionKind",
    "AssetRecord",
    "BackgroundVehicle",
    "CameraModel",
    "DrivingDirection",
    "LaneMap",
    "MovementAttributes",
    "PlacementAttributes",
    "Pose",
    "SceneGraph",
    "Sector",
    "VehicleInstance",
    "bundled_map_names",
    "canonical_json",
    "crop_lane_map",
    "default_rig",
    "load_asset_bank",
    "load_bank",
    "load_lane_map",
    "load_scene_template",
    "place_vehicles",
    "plan_vehicle_motion",
    "select_asset",
]
