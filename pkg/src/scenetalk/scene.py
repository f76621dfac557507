"""Scene data model shared by every agent.

Lane maps, camera rigs, the asset catalog, vehicle instances, and the
append-only edit log live here; everything downstream (planning, rendering,
the HTTP service) reads and functionally updates these structures.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Optional, Sequence

import numpy as np

from .geometry import Pose

if TYPE_CHECKING:
    from .motion import Trajectory


class NoMatch(LookupError):
    """No asset in the bank scored above zero for the requested attributes."""


class OutOfRange(ValueError):
    """A color component fell outside [0, 1]."""


class LaneType(Enum):
    CENTERLINE = "Centerline"
    BOUNDARY = "Boundary"
    OTHER = "Other"


@dataclass(frozen=True)
class LaneNode:
    """Directed lane segment from start to end in world meters."""

    start: tuple[float, float]
    end: tuple[float, float]
    lane_type: LaneType = LaneType.CENTERLINE

    def __post_init__(self) -> None:
        s = (float(self.start[0]), float(self.start[1]))
        e = (float(self.end[0]), float(self.end[1]))
        if not all(np.isfinite(v) for v in s + e):
            raise ValueError("lane node coordinates must be finite")
        if s == e:
            raise ValueError("lane node start and end must differ")
        object.__setattr__(self, "start", s)
        object.__setattr__(self, "end", e)
        if not isinstance(self.lane_type, LaneType):
            object.__setattr__(self, "lane_type", LaneType(self.lane_type))

    @property
    def midpoint(self) -> np.ndarray:
        return (np.asarray(self.start) + np.asarray(self.end)) / 2.0

    @property
    def direction(self) -> np.ndarray:
        d = np.asarray(self.end, dtype=float) - np.asarray(self.start)
        return d / np.linalg.norm(d)

    @property
    def length(self) -> float:
        return float(np.hypot(self.end[0] - self.start[0],
                              self.end[1] - self.start[1]))

    def reversed(self) -> "LaneNode":
        return LaneNode(self.end, self.start, self.lane_type)

    def to_dict(self) -> dict:
        return {"x_s": self.start[0], "y_s": self.start[1],
                "x_e": self.end[0], "y_e": self.end[1],
                "type": self.lane_type.value}

    @staticmethod
    def from_dict(d: Mapping) -> "LaneNode":
        return LaneNode((d["x_s"], d["y_s"]), (d["x_e"], d["y_e"]),
                        LaneType(d.get("type", "Centerline")))


@dataclass(frozen=True)
class CropRect:
    """Ego-frame keep region: x in [0, front], y in [-right, left]."""

    front: float = 80.0
    left: float = 20.0
    right: float = 20.0

    def contains(self, xy_ego: np.ndarray) -> np.ndarray:
        p = np.atleast_2d(np.asarray(xy_ego, dtype=float))
        return ((p[:, 0] >= 0.0) & (p[:, 0] <= self.front)
                & (p[:, 1] <= self.left) & (p[:, 1] >= -self.right))


@dataclass(frozen=True)
class LaneMap:
    name: str = ""
    nodes: tuple[LaneNode, ...] = ()
    crop: CropRect = field(default_factory=CropRect)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))

    def __len__(self) -> int:
        return len(self.nodes)

    def midpoints(self) -> np.ndarray:
        if not self.nodes:
            return np.zeros((0, 2))
        return np.stack([n.midpoint for n in self.nodes])

    def filter(self, lane_type: LaneType) -> tuple[LaneNode, ...]:
        return tuple(n for n in self.nodes if n.lane_type == lane_type)

    def nearest_node(self, point, lane_type: LaneType = LaneType.CENTERLINE) -> LaneNode:
        """Node of the given type whose midpoint is closest to `point`."""
        candidates = self.filter(lane_type)
        if not candidates:
            raise ValueError(f"map has no {lane_type.value} nodes")
        mids = np.stack([n.midpoint for n in candidates])
        d = np.linalg.norm(mids - np.asarray(point, dtype=float), axis=1)
        return candidates[int(np.argmin(d))]

    def distance_to_centerline(self, points) -> np.ndarray:
        """Distance from each (N, 2) point to the nearest centerline segment."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        segs = self.filter(LaneType.CENTERLINE)
        if not segs:
            return np.full(len(pts), np.inf)
        a = np.stack([np.asarray(n.start) for n in segs])
        b = np.stack([np.asarray(n.end) for n in segs])
        ab = b - a
        ab_len2 = np.sum(ab * ab, axis=1)
        # point-to-segment distance, vectorized over points x segments
        ap = pts[:, None, :] - a[None, :, :]
        t = np.clip(np.sum(ap * ab[None, :, :], axis=2) / ab_len2[None, :], 0.0, 1.0)
        closest = a[None, :, :] + t[:, :, None] * ab[None, :, :]
        d = np.linalg.norm(pts[:, None, :] - closest, axis=2)
        return d.min(axis=1)

    def to_dict(self) -> dict:
        return {"name": self.name,
                "crop": {"front": self.crop.front, "left": self.crop.left,
                         "right": self.crop.right},
                "nodes": [n.to_dict() for n in self.nodes]}

    @staticmethod
    def from_dict(d: Mapping) -> "LaneMap":
        crop = d.get("crop", {})
        return LaneMap(name=d.get("name", ""),
                       nodes=tuple(LaneNode.from_dict(n) for n in d["nodes"]),
                       crop=CropRect(front=crop.get("front", 80.0),
                                     left=crop.get("left", 20.0),
                                     right=crop.get("right", 20.0)))


def load_lane_map(path) -> LaneMap:
    """Read a lane map JSON file: {name?, crop?, nodes: [{x_s, y_s, x_e, y_e, type}]}.

    A bare array of node records is also accepted.
    """
    raw = json.loads(Path(path).read_text())
    if isinstance(raw, list):
        raw = {"name": Path(path).stem, "nodes": raw}
    return LaneMap.from_dict(raw)


def save_lane_map(lane_map: LaneMap, path) -> None:
    Path(path).write_text(json.dumps(lane_map.to_dict(), indent=2))


def crop_lane_map(lane_map: LaneMap, ego_pose: Pose) -> LaneMap:
    """Keep nodes whose midpoint sits in the ego-frame crop rectangle."""
    if not lane_map.nodes:
        return lane_map
    mids_ego = ego_pose.world_to_ego_xy(lane_map.midpoints())
    keep = lane_map.crop.contains(mids_ego)
    return replace(lane_map, nodes=tuple(
        n for n, k in zip(lane_map.nodes, keep) if k))


# Columns are the camera axes (x right, y down, z forward) expressed in the
# ego frame (x forward, y left, z up).
CAMERA_AXES_IN_EGO = np.array([[0.0, 0.0, 1.0],
                               [-1.0, 0.0, 0.0],
                               [0.0, -1.0, 0.0]])


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera: z-forward / x-right / y-down axes, pose maps camera to world."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    exposure_time: float
    pose: Pose

    def __post_init__(self) -> None:
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not self.exposure_time > 0:
            raise ValueError("exposure time must be positive")

    def pixel_rays(self) -> tuple[np.ndarray, np.ndarray]:
        """World-space (origins, unit directions), shape (H*W, 3), row-major pixels."""
        u, v = np.meshgrid(np.arange(self.width), np.arange(self.height))
        x = (u.ravel() + 0.5 - self.cx) / self.fx
        y = (v.ravel() + 0.5 - self.cy) / self.fy
        d_cam = np.stack([x, y, np.ones_like(x)], axis=-1)
        d_cam /= np.linalg.norm(d_cam, axis=1, keepdims=True)
        d_world = d_cam @ self.pose.rotation.T
        origins = np.broadcast_to(self.pose.translation, d_world.shape).copy()
        return origins, d_world

    def project(self, points_world: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Project (N, 3) world points to pixel (u, v); second output is camera depth."""
        p = self.pose.inverse().transform(points_world)
        z = p[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.fx * p[:, 0] / z + self.cx
            v = self.fy * p[:, 1] / z + self.cy
        return np.stack([u, v], axis=-1), z

    def to_dict(self) -> dict:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
                "width": self.width, "height": self.height,
                "exposure_time": self.exposure_time,
                "pose": self.pose.to_dict()}

    @staticmethod
    def from_dict(d: Mapping) -> "CameraModel":
        return CameraModel(fx=d["fx"], fy=d["fy"], cx=d["cx"], cy=d["cy"],
                           width=d["width"], height=d["height"],
                           exposure_time=d["exposure_time"],
                           pose=Pose.from_dict(d["pose"]))


def camera_pose_from_ego(ego_pose: Pose, height: float = 1.6,
                         forward: float = 0.5) -> Pose:
    """Forward-facing camera pose mounted on the ego vehicle."""
    offset = ego_pose.rotation @ np.array([forward, 0.0, height])
    return Pose(ego_pose.rotation @ CAMERA_AXES_IN_EGO,
                ego_pose.translation + offset)


@dataclass(frozen=True)
class AssetRecord:
    """Catalog entry for one vehicle model; meshes are not stored."""

    id: str
    type_label: str
    brand_tags: tuple[str, ...]
    color: tuple[float, float, float]
    dimensions: tuple[float, float, float]
    origin_at_bottom_center: bool = True
    faces_plus_x: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "brand_tags", tuple(self.brand_tags))
        object.__setattr__(self, "color", tuple(float(c) for c in self.color))
        object.__setattr__(self, "dimensions",
                           tuple(float(v) for v in self.dimensions))
        if any(v <= 0 for v in self.dimensions):
            raise ValueError("asset dimensions must be positive")
        if any(c < 0 or c > 1 for c in self.color):
            raise OutOfRange(f"asset color out of [0,1]: {self.color}")

    def to_dict(self) -> dict:
        return {"id": self.id, "type_label": self.type_label,
                "brand_tags": list(self.brand_tags), "color": list(self.color),
                "dimensions": list(self.dimensions),
                "origin_at_bottom_center": self.origin_at_bottom_center,
                "faces_plus_x": self.faces_plus_x}

    @staticmethod
    def from_dict(d: Mapping) -> "AssetRecord":
        return AssetRecord(id=d["id"], type_label=d["type_label"],
                           brand_tags=tuple(d.get("brand_tags", ())),
                           color=tuple(d["color"]),
                           dimensions=tuple(d["dimensions"]),
                           origin_at_bottom_center=d.get("origin_at_bottom_center", True),
                           faces_plus_x=d.get("faces_plus_x", True))


def load_asset_bank(path) -> tuple[AssetRecord, ...]:
    raw = json.loads(Path(path).read_text())
    return tuple(AssetRecord.from_dict(d) for d in raw)


def select_asset(bank: Sequence[AssetRecord], attrs: Mapping) -> AssetRecord:
    """Pick the best-matching record: type or brand match 2 points each,
    color within max-channel distance 0.2 scores 1; ties break on id.

    Raises NoMatch when attrs are non-empty but nothing scores.
    """
    if not bank:
        raise NoMatch("asset bank is empty")

    def score(rec: AssetRecord) -> int:
        s = 0
        want_type = attrs.get("type")
        if want_type and str(want_type).lower() == rec.type_label.lower():
            s += 2
        want_brand = attrs.get("brand")
        if want_brand and str(want_brand).lower() in (t.lower() for t in rec.brand_tags):
            s += 2
        want_color = attrs.get("color")
        if want_color is not None:
            delta = np.abs(np.asarray(want_color, dtype=float)
                           - np.asarray(rec.color))
            if float(delta.max()) <= 0.2:
                s += 1
        return s

    best = max(sorted(bank, key=lambda r: r.id), key=score)
    if score(best) == 0 and attrs:
        raise NoMatch(f"no asset matches {dict(attrs)}")
    return best


def recolor_asset(asset: AssetRecord, color) -> AssetRecord:
    """Copy of `asset` with the color replaced; rejects out-of-range channels."""
    c = tuple(float(v) for v in color)
    if len(c) != 3 or any(v < 0 or v > 1 for v in c):
        raise OutOfRange(f"color out of [0,1]: {c}")
    return replace(asset, color=c)


@dataclass(frozen=True)
class BackgroundVehicle:
    """Annotated vehicle already present in the captured background."""

    id: str
    type_label: str
    color: tuple[float, float, float]
    position: tuple[float, float]
    heading: float
    dimensions: tuple[float, float, float]

    def to_dict(self) -> dict:
        return {"id": self.id, "type_label": self.type_label,
                "color": list(self.color), "position": list(self.position),
                "heading": self.heading, "dimensions": list(self.dimensions)}

    @staticmethod
    def from_dict(d: Mapping) -> "BackgroundVehicle":
        return BackgroundVehicle(id=d["id"], type_label=d["type_label"],
                                 color=tuple(d["color"]),
                                 position=tuple(d["position"]),
                                 heading=d["heading"],
                                 dimensions=tuple(d["dimensions"]))


@dataclass(frozen=True)
class VehicleInstance:
    """A vehicle added by an edit: asset reference, look, and planned motion."""

    instance_id: str
    asset_id: str
    trajectory: "Trajectory"
    created_in_round: int
    color_override: Optional[tuple[float, float, float]] = None

    def color(self, bank: Mapping[str, AssetRecord]) -> tuple[float, float, float]:
        if self.color_override is not None:
            return self.color_override
        return bank[self.asset_id].color

    def to_dict(self) -> dict:
        return {"instance_id": self.instance_id, "asset_id": self.asset_id,
                "trajectory": self.trajectory.to_dict(),
                "created_in_round": self.created_in_round,
                "color_override": (list(self.color_override)
                                   if self.color_override is not None else None)}

    @staticmethod
    def from_dict(d: Mapping) -> "VehicleInstance":
        from .motion import Trajectory
        co = d.get("color_override")
        return VehicleInstance(instance_id=d["instance_id"],
                               asset_id=d["asset_id"],
                               trajectory=Trajectory.from_dict(d["trajectory"]),
                               created_in_round=d["created_in_round"],
                               color_override=tuple(co) if co is not None else None)


@dataclass(frozen=True)
class EditLogEntry:
    """One executed instruction: the round it ran in, the agent, and its config."""

    round: int
    agent: str
    text: str
    config: dict

    def to_dict(self) -> dict:
        return {"round": self.round, "agent": self.agent, "text": self.text,
                "config": self.config}

    @staticmethod
    def from_dict(d: Mapping) -> "EditLogEntry":
        return EditLogEntry(round=d["round"], agent=d["agent"], text=d["text"],
                            config=dict(d["config"]))


def _sanitize_zeros(obj):
    # -0.0 and 0.0 are semantically equal but serialize differently, and
    # rotation math flips the sign freely; collapse so digests don't notice
    if isinstance(obj, float):
        return obj + 0.0
    if isinstance(obj, dict):
        return {k: _sanitize_zeros(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize_zeros(v) for v in obj]
    return obj


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, no whitespace, no negative zero."""
    return json.dumps(_sanitize_zeros(obj), sort_keys=True,
                      separators=(",", ":"))


@dataclass(frozen=True, eq=False)
class SceneGraph:
    """Immutable scene snapshot; edits produce new graphs via the with_* methods.

    The digest covers everything except the edit log, so a round that only
    logged a no-op leaves the digest unchanged.
    """

    field_ref: str
    lane_map: LaneMap
    rig: tuple[CameraModel, ...]
    ego_pose: Pose
    background_vehicles: tuple[BackgroundVehicle, ...] = ()
    vehicles: Mapping[str, VehicleInstance] = field(default_factory=dict)
    deleted_background_ids: frozenset = frozenset()
    edit_log: tuple[EditLogEntry, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "rig", tuple(self.rig))
        object.__setattr__(self, "background_vehicles",
                           tuple(self.background_vehicles))
        object.__setattr__(self, "vehicles", dict(self.vehicles))
        object.__setattr__(self, "deleted_background_ids",
                           frozenset(self.deleted_background_ids))
        object.__setattr__(self, "edit_log", tuple(self.edit_log))
        rounds = [e.round for e in self.edit_log]
        if rounds != sorted(rounds):
            raise ValueError("edit log rounds must be non-decreasing")

    @property
    def next_round(self) -> int:
        return (self.edit_log[-1].round + 1) if self.edit_log else 1

    def world_camera(self, index: int = 0) -> CameraModel:
        """Rig camera with its mount pose composed onto the current ego pose.

        Rig poses are stored in the ego frame, so view adjustments move every
        camera along with the ego.
        """
        cam = self.rig[index]
        return replace(cam, pose=self.ego_pose.compose(cam.pose))

    def active_background(self) -> tuple[BackgroundVehicle, ...]:
        return tuple(v for v in self.background_vehicles
                     if v.id not in self.deleted_background_ids)

    def with_ego_pose(self, pose: Pose) -> "SceneGraph":
        return replace(self, ego_pose=pose)

    def with_vehicle(self, inst: VehicleInstance) -> "SceneGraph":
        vehicles = dict(self.vehicles)
        vehicles[inst.instance_id] = inst
        return replace(self, vehicles=vehicles)

    def without_vehicles(self, instance_ids: Iterable[str]) -> "SceneGraph":
        drop = set(instance_ids)
        vehicles = {k: v for k, v in self.vehicles.items() if k not in drop}
        return replace(self, vehicles=vehicles)

    def with_deleted_background(self, ids: Iterable[str]) -> "SceneGraph":
        return replace(self,
                       deleted_background_ids=self.deleted_background_ids | set(ids))

    def with_log_entries(self, entries: Iterable[EditLogEntry]) -> "SceneGraph":
        return replace(self, edit_log=self.edit_log + tuple(entries))

    def to_dict(self, include_log: bool = True) -> dict:
        d = {"field_ref": self.field_ref,
             "lane_map": self.lane_map.to_dict(),
             "rig": [c.to_dict() for c in self.rig],
             "ego_pose": self.ego_pose.to_dict(),
             "background_vehicles": [v.to_dict() for v in self.background_vehicles],
             "vehicles": {k: v.to_dict() for k, v in sorted(self.vehicles.items())},
             "deleted_background_ids": sorted(self.deleted_background_ids)}
        if include_log:
            d["edit_log"] = [e.to_dict() for e in self.edit_log]
        return d

    @staticmethod
    def from_dict(d: Mapping) -> "SceneGraph":
        return SceneGraph(
            field_ref=d["field_ref"],
            lane_map=LaneMap.from_dict(d["lane_map"]),
            rig=tuple(CameraModel.from_dict(c) for c in d["rig"]),
            ego_pose=Pose.from_dict(d["ego_pose"]),
            background_vehicles=tuple(BackgroundVehicle.from_dict(v)
                                      for v in d.get("background_vehicles", ())),
            vehicles={k: VehicleInstance.from_dict(v)
                      for k, v in d.get("vehicles", {}).items()},
            deleted_background_ids=frozenset(d.get("deleted_background_ids", ())),
            edit_log=tuple(EditLogEntry.from_dict(e)
                           for e in d.get("edit_log", ())))

    def digest(self) -> str:
        """sha256 of the canonical scene JSON, edit log excluded."""
        text = canonical_json(self.to_dict(include_log=False))
        return hashlib.sha256(text.encode()).hexdigest()
