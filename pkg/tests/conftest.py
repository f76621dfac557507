"""Shared fixtures: bundled data, synthetic grids, and camera rings."""

import math

import numpy as np
import pytest

from scenetalk.bundles import default_rig, load_bank, load_scene_template
from scenetalk.field import VoxelGrid
from scenetalk.geometry import Pose
from scenetalk.scene import CameraModel, SceneGraph


@pytest.fixture(scope="session")
def bank():
    return load_bank()


@pytest.fixture(scope="session")
def bank_map(bank):
    return {a.id: a for a in bank}


@pytest.fixture(scope="session")
def straight_template():
    return load_scene_template("straight")


@pytest.fixture(scope="session")
def crossroad_template():
    return load_scene_template("crossroad")


@pytest.fixture
def straight_scene(straight_template):
    lane_map, background, ego = straight_template
    return SceneGraph(field_ref="none", lane_map=lane_map, rig=default_rig(),
                      ego_pose=ego, background_vehicles=background)


@pytest.fixture
def crossroad_scene(crossroad_template):
    lane_map, background, ego = crossroad_template
    return SceneGraph(field_ref="none", lane_map=lane_map, rig=default_rig(),
                      ego_pose=ego, background_vehicles=background)


def random_grid(resolution, seed, density_loc=-1.0, emission_loc=-1.0):
    """Moderate-density random grid on the unit cube."""
    rng = np.random.default_rng(seed)
    n = resolution
    return VoxelGrid((n, n, n), (-1.0, -1.0, -1.0), (1.0, 1.0, 1.0),
                     rng.normal(density_loc, 0.8, (n, n, n)),
                     rng.normal(emission_loc, 0.5, (n, n, n, 3)))


def look_at_camera(position, target, width=24, height=18,
                   exposure_time=1.0, focal=24.0):
    """Camera at `position` looking at `target`, world +z up."""
    pos = np.asarray(position, dtype=float)
    fwd = np.asarray(target, dtype=float) - pos
    fwd = fwd / np.linalg.norm(fwd)
    up = np.array([0.0, 0.0, 1.0])
    if abs(float(np.dot(fwd, up))) > 0.99:
        up = np.array([0.0, 1.0, 0.0])
    right = np.cross(fwd, up)
    right /= np.linalg.norm(right)
    down = np.cross(fwd, right)
    down /= np.linalg.norm(down)
    R = np.stack([right, down, fwd], axis=1)
    return CameraModel(fx=focal, fy=focal, cx=width / 2.0, cy=height / 2.0,
                       width=width, height=height,
                       exposure_time=exposure_time, pose=Pose(R, pos))


def ring_views(n, radius=2.5, exposures=None, **camera_kwargs):
    """Cameras on a horizontal ring, all looking at the origin."""
    cams = []
    for i in range(n):
        a = 2.0 * math.pi * i / n
        pos = (radius * math.cos(a), radius * math.sin(a), 0.3)
        dt = 1.0 if exposures is None else exposures[i % len(exposures)]
        cams.append(look_at_camera(pos, (0.0, 0.0, 0.0),
                                   exposure_time=dt, **camera_kwargs))
    return cams
