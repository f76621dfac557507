"""Access to the bundled maps, asset catalog, and default camera rig.

Map files double as scene templates: besides the lane nodes they carry
the starting ego pose and the annotated background vehicles. Names
resolve against the packaged data; anything containing a path separator
or ending in .json is treated as a filesystem path instead.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .geometry import Pose
from .scene import (
    AssetRecord,
    BackgroundVehicle,
    CameraModel,
    LaneMap,
    camera_pose_from_ego,
)


def _data_root():
    return resources.files("scenetalk").joinpath("data")


def bundled_map_names() -> list[str]:
    maps = _data_root().joinpath("maps")
    return sorted(p.name[:-len(".json")] for p in maps.iterdir()
                  if p.name.endswith(".json"))


def _read_map_text(name_or_path: str) -> str:
    text = str(name_or_path)
    if "/" in text or text.endswith(".json"):
        path = Path(text)
        if not path.is_file():
            raise FileNotFoundError(f"no such map file: {text}")
        return path.read_text()
    candidate = _data_root().joinpath("maps").joinpath(f"{text}.json")
    try:
        return candidate.read_text()
    except (FileNotFoundError, NotADirectoryError):
        raise FileNotFoundError(
            f"no such map file: {text} (bundled: "
            f"{', '.join(bundled_map_names())})") from None


def load_scene_template(
        name_or_path: str
) -> tuple[LaneMap, tuple[BackgroundVehicle, ...], Pose]:
    """Lane map, background vehicles, and starting ego pose from a map file."""
    doc = json.loads(_read_map_text(name_or_path))
    lane_map = LaneMap.from_dict(doc)
    background = tuple(BackgroundVehicle.from_dict(b)
                       for b in doc.get("background_vehicles", ()))
    ego_doc = doc.get("ego", {})
    ego = Pose.from_yaw(float(ego_doc.get("yaw", 0.0)),
                        (float(ego_doc.get("x", 0.0)),
                         float(ego_doc.get("y", 0.0)), 0.0))
    return lane_map, background, ego


def load_bank(path: str | None = None) -> tuple[AssetRecord, ...]:
    """Asset catalog from a path, or the bundled one when path is None."""
    if path is None:
        text = _data_root().joinpath("assets.json").read_text()
    else:
        p = Path(path)
        if not p.is_file():
            raise FileNotFoundError(f"no such asset file: {path}")
        text = p.read_text()
    return tuple(AssetRecord.from_dict(d) for d in json.loads(text))


def default_rig(width: int = 120, height: int = 80) -> tuple[CameraModel, ...]:
    """One forward camera on the ego roof with a 90 degree horizontal FOV."""
    fx = width / 2.0  # tan(45 deg) = 1
    mount = camera_pose_from_ego(Pose.identity())
    cam = CameraModel(fx=fx, fy=fx, cx=width / 2.0, cy=height / 2.0,
                      width=width, height=height, exposure_time=1.0,
                      pose=mount)
    return (cam,)
