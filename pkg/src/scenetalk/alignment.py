"""Multi-camera pose alignment between a reconstruction space and the
vehicle's global space.

Recalibration tools return all camera poses in their own coordinate system
("M" space). Two anchor poses of camera 0 in the vehicle system ("V" space)
fix the similarity transform back: one for the frame change, two for the
scale. Everything here is pure matrix algebra.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .geometry import Pose


class DegenerateMotion(ValueError):
    """Camera 0 did not move between the two triggers, so scale is undefined."""


class MissingPose(KeyError):
    """Requested (camera, trigger) pose is absent from the frame."""


@dataclass(frozen=True)
class AlignmentFrame:
    """Poses in M space plus the two V-space anchors of camera 0.

    poses_M is keyed by (camera index, trigger index). anchor_V is camera 0
    at trigger 0, anchor2_V camera 0 at trigger 1.
    """

    poses_M: Mapping[tuple[int, int], Pose]
    anchor_V: Pose
    anchor2_V: Pose

    def __post_init__(self) -> None:
        object.__setattr__(self, "poses_M", dict(self.poses_M))
        for key in ((0, 0), (0, 1)):
            if key not in self.poses_M:
                raise MissingPose(f"frame lacks M-space pose for camera/trigger {key}")


def scale_factor(frame: AlignmentFrame) -> float:
    """Length-unit ratio between spaces: the norm of camera 0's displacement
    in M over the same displacement in V."""
    d_m = frame.poses_M[(0, 1)].translation - frame.poses_M[(0, 0)].translation
    d_v = frame.anchor2_V.translation - frame.anchor_V.translation
    n_m = float(np.linalg.norm(d_m))
    n_v = float(np.linalg.norm(d_v))
    if n_m < 1e-12 or n_v < 1e-12:
        raise DegenerateMotion("camera 0 displacement is zero; cannot set scale")
    return n_m / n_v


def align_pose(frame: AlignmentFrame, camera: int, trigger: int) -> Pose:
    """Map pose (camera, trigger) from M space into V space.

    The rotation is re-anchored through camera 0 at trigger 0; the translation
    is re-anchored the same way and divided by the scale factor.
    """
    key = (camera, trigger)
    if key not in frame.poses_M:
        raise MissingPose(f"no M-space pose for camera/trigger {key}")
    if key == (0, 0):
        # the anchor maps to itself by construction; return it directly so
        # the fixpoint holds exactly rather than to rounding error
        return frame.anchor_V
    s = scale_factor(frame)
    r_v0 = frame.anchor_V.rotation
    r_m0_inv = frame.poses_M[(0, 0)].rotation.T
    bridge = r_v0 @ r_m0_inv
    pose_m = frame.poses_M[key]
    rotation = bridge @ pose_m.rotation
    translation = (bridge @ (pose_m.translation
                             - frame.poses_M[(0, 0)].translation) / s
                   + frame.anchor_V.translation)
    return Pose(rotation, translation)


def load_alignment_frame(path) -> AlignmentFrame:
    """Read a pose JSON file: array of records {camera_id, trigger,
    rotation: 9 row-major floats, translation: 3 floats, space: "M"|"V"}.

    V-space records are only meaningful for camera 0 at triggers 0 and 1.
    """
    records = json.loads(Path(path).read_text())
    poses_m: dict[tuple[int, int], Pose] = {}
    anchors: dict[int, Pose] = {}
    for rec in records:
        pose = Pose(np.asarray(rec["rotation"], dtype=float).reshape(3, 3),
                    np.asarray(rec["translation"], dtype=float))
        key = (int(rec["camera_id"]), int(rec["trigger"]))
        if rec["space"] == "M":
            poses_m[key] = pose
        elif rec["space"] == "V":
            if key[0] == 0 and key[1] in (0, 1):
                anchors[key[1]] = pose
        else:
            raise ValueError(f"unknown space {rec['space']!r}")
    if 0 not in anchors or 1 not in anchors:
        raise MissingPose("pose file lacks V-space anchors for camera 0 "
                          "at triggers 0 and 1")
    return AlignmentFrame(poses_m, anchors[0], anchors[1])
