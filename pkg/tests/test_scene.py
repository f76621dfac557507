import json
import math

import numpy as np
import pytest

from scenetalk.geometry import Pose
from scenetalk.motion import Trajectory
from scenetalk.scene import (AssetRecord, BackgroundVehicle, CameraModel,
                             CropRect, EditLogEntry, LaneMap, LaneNode,
                             LaneType, NoMatch, OutOfRange, SceneGraph,
                             VehicleInstance, camera_pose_from_ego,
                             canonical_json, crop_lane_map, load_lane_map,
                             recolor_asset, save_lane_map, select_asset)

# ---------------------------------------------------------------- lane maps


def test_lane_node_geometry():
    node = LaneNode((0.0, 0.0), (10.0, 0.0))
    assert np.allclose(node.midpoint, [5.0, 0.0])
    assert np.allclose(node.direction, [1.0, 0.0])
    assert node.length == pytest.approx(10.0)
    rev = node.reversed()
    assert rev.start == node.end and rev.end == node.start


def test_lane_node_rejects_degenerate():
    with pytest.raises(ValueError):
        LaneNode((1.0, 1.0), (1.0, 1.0))
    with pytest.raises(ValueError):
        LaneNode((0.0, np.inf), (1.0, 1.0))


def test_lane_node_dict_roundtrip():
    node = LaneNode((0.0, 1.0), (2.0, 3.0), LaneType.BOUNDARY)
    assert LaneNode.from_dict(node.to_dict()) == node


def _two_lane_map():
    nodes = [LaneNode((x, 0.0), (x + 10.0, 0.0)) for x in range(0, 40, 10)]
    nodes += [LaneNode((x + 10.0, 3.5), (x, 3.5)) for x in range(0, 40, 10)]
    nodes += [LaneNode((0.0, -2.0), (40.0, -2.0), LaneType.BOUNDARY)]
    return LaneMap(name="twolane", nodes=nodes)


def test_nearest_node_and_filter():
    m = _two_lane_map()
    assert len(m.filter(LaneType.CENTERLINE)) == 8
    near = m.nearest_node((12.0, 0.4))
    assert np.allclose(near.midpoint, [15.0, 0.0])
    with pytest.raises(ValueError):
        LaneMap(nodes=[]).nearest_node((0.0, 0.0))


def test_distance_to_centerline_uses_segments_not_midpoints():
    m = LaneMap(nodes=[LaneNode((0.0, 0.0), (100.0, 0.0))])
    # close to the segment but far from its midpoint
    d = m.distance_to_centerline(np.array([[90.0, 1.0], [50.0, 2.0]]))
    assert np.allclose(d, [1.0, 2.0])
    # beyond the endpoint the distance is to the endpoint
    d = m.distance_to_centerline(np.array([[103.0, 4.0]]))
    assert d[0] == pytest.approx(5.0)


def test_crop_lane_map_is_ego_relative():
    m = _two_lane_map()
    ego = Pose.from_yaw(0.0, (20.0, 0.0, 0.0))
    cropped = crop_lane_map(m, ego)
    mids = cropped.midpoints()
    ego_x = mids[:, 0] - 20.0
    assert np.all(ego_x >= 0.0)
    # facing backward keeps the other half
    back = crop_lane_map(m, Pose.from_yaw(math.pi, (20.0, 0.0, 0.0)))
    assert np.all(back.midpoints()[:, 0] <= 20.0)


def test_crop_rect_contains():
    rect = CropRect(front=80.0, left=20.0, right=20.0)
    inside = rect.contains(np.array([[0.0, 0.0], [80.0, 20.0], [40.0, -20.0]]))
    outside = rect.contains(np.array([[-0.1, 0.0], [80.1, 0.0], [0.0, 20.1]]))
    assert inside.all() and not outside.any()


def test_lane_map_file_roundtrip(tmp_path):
    m = _two_lane_map()
    path = tmp_path / "m.json"
    save_lane_map(m, path)
    back = load_lane_map(path)
    assert back == m


def test_load_lane_map_accepts_bare_array(tmp_path):
    path = tmp_path / "bare.json"
    path.write_text(json.dumps([
        {"x_s": 0.0, "y_s": 0.0, "x_e": 5.0, "y_e": 0.0},
    ]))
    m = load_lane_map(path)
    assert m.name == "bare" and len(m) == 1
    assert m.nodes[0].lane_type is LaneType.CENTERLINE

# ------------------------------------------------------------------ cameras


def test_pixel_rays_shapes_and_center_ray():
    cam = CameraModel(fx=50.0, fy=50.0, cx=20.0, cy=15.0, width=40, height=30,
                      exposure_time=1.0, pose=Pose.identity())
    origins, dirs = cam.pixel_rays()
    assert origins.shape == dirs.shape == (40 * 30, 3)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0)
    # the ray nearest the principal point looks essentially down +z
    idx = 15 * 40 + 20
    assert dirs[idx][2] > 0.999


def test_project_inverts_pixel_rays():
    cam = CameraModel(fx=60.0, fy=55.0, cx=16.0, cy=12.0, width=32, height=24,
                      exposure_time=1.0,
                      pose=Pose.from_yaw(0.4, (1.0, 2.0, 0.5)))
    origins, dirs = cam.pixel_rays()
    pts = origins + 3.0 * dirs
    uv, depth = cam.project(pts)
    u_expect, v_expect = np.meshgrid(np.arange(32) + 0.5, np.arange(24) + 0.5)
    assert np.allclose(uv[:, 0], u_expect.ravel(), atol=1e-9)
    assert np.allclose(uv[:, 1], v_expect.ravel(), atol=1e-9)
    assert np.all(depth > 0)


def test_camera_rejects_bad_values():
    with pytest.raises(ValueError):
        CameraModel(fx=0.0, fy=1.0, cx=0.0, cy=0.0, width=2, height=2,
                    exposure_time=1.0, pose=Pose.identity())
    with pytest.raises(ValueError):
        CameraModel(fx=1.0, fy=1.0, cx=0.0, cy=0.0, width=2, height=2,
                    exposure_time=0.0, pose=Pose.identity())


def test_camera_pose_from_ego_axes():
    ego = Pose.from_yaw(0.0, (5.0, 1.0, 0.0))
    cam_pose = camera_pose_from_ego(ego)
    # camera z (forward) is world +x, camera y (down) is world -z
    assert np.allclose(cam_pose.rotation[:, 2], [1.0, 0.0, 0.0])
    assert np.allclose(cam_pose.rotation[:, 1], [0.0, 0.0, -1.0])
    assert np.allclose(cam_pose.translation, [5.5, 1.0, 1.6])

# -------------------------------------------------------------- asset bank


def _bank():
    return (
        AssetRecord("car-a", "car", ("Mini", "Cooper"), (0.1, 0.8, 0.1),
                    (3.8, 1.7, 1.5)),
        AssetRecord("car-b", "car", ("Porsche",), (0.9, 0.05, 0.05),
                    (4.5, 1.9, 1.3)),
        AssetRecord("truck-a", "truck", ("Ford",), (0.5, 0.5, 0.5),
                    (7.5, 2.4, 2.8)),
    )


def test_select_asset_scores_type_brand_color():
    bank = _bank()
    assert select_asset(bank, {"brand": "Porsche"}).id == "car-b"
    assert select_asset(bank, {"type": "truck"}).id == "truck-a"
    # color within 0.2 max-channel distance counts
    assert select_asset(bank, {"color": (1.0, 0.0, 0.0)}).id == "car-b"
    # brand+type outweighs a color-only match
    assert select_asset(bank, {"type": "car", "brand": "Mini",
                               "color": (1.0, 0.0, 0.0)}).id == "car-a"


def test_select_asset_tie_breaks_on_id():
    bank = _bank()
    # both cars tie on {"type": "car"}; the lexicographically first id wins
    assert select_asset(bank, {"type": "car"}).id == "car-a"


def test_select_asset_no_match():
    with pytest.raises(NoMatch):
        select_asset(_bank(), {"type": "bicycle"})
    with pytest.raises(NoMatch):
        select_asset((), {"type": "car"})
    # empty attrs fall back to the first id rather than failing
    assert select_asset(_bank(), {}).id == "car-a"


def test_recolor_asset_bounds():
    rec = recolor_asset(_bank()[0], (0.2, 0.3, 0.4))
    assert rec.color == (0.2, 0.3, 0.4)
    assert rec.id == "car-a"
    with pytest.raises(OutOfRange):
        recolor_asset(_bank()[0], (1.2, 0.0, 0.0))


def test_asset_record_validation():
    with pytest.raises(ValueError):
        AssetRecord("x", "car", (), (0.5, 0.5, 0.5), (0.0, 1.0, 1.0))
    with pytest.raises(OutOfRange):
        AssetRecord("x", "car", (), (1.5, 0.5, 0.5), (1.0, 1.0, 1.0))

# -------------------------------------------------------------- scene graph


def _trajectory():
    return Trajectory(np.array([[0.0, 10.0, 0.0, 0.0],
                                [0.1, 10.8, 0.0, 0.0]]))


def _scene():
    lane_map = _two_lane_map()
    cam = CameraModel(fx=50.0, fy=50.0, cx=16.0, cy=12.0, width=32, height=24,
                      exposure_time=1.0,
                      pose=camera_pose_from_ego(Pose.identity()))
    bg = BackgroundVehicle("bg-1", "car", (0.5, 0.5, 0.5), (20.0, 0.0), 0.0,
                           (4.0, 1.8, 1.5))
    return SceneGraph(field_ref="none", lane_map=lane_map, rig=(cam,),
                      ego_pose=Pose.identity(), background_vehicles=(bg,))


def test_scene_edits_are_functional():
    scene = _scene()
    inst = VehicleInstance("veh-r1-0", "car-a", _trajectory(), 1)
    added = scene.with_vehicle(inst)
    assert "veh-r1-0" in added.vehicles and not scene.vehicles
    removed = added.without_vehicles(["veh-r1-0"])
    assert not removed.vehicles
    hidden = scene.with_deleted_background(["bg-1"])
    assert scene.active_background() and not hidden.active_background()


def test_digest_tracks_content_not_log():
    scene = _scene()
    entry = EditLogEntry(round=1, agent="ViewAdjust", text="noop",
                         config={"delta_position": [0, 0, 0]})
    logged = scene.with_log_entries([entry])
    assert logged.digest() == scene.digest()
    moved = scene.with_ego_pose(Pose.from_yaw(0.0, (1.0, 0.0, 0.0)))
    assert moved.digest() != scene.digest()


def test_scene_dict_roundtrip_is_canonical():
    scene = _scene().with_vehicle(
        VehicleInstance("veh-r1-0", "car-a", _trajectory(), 1,
                        color_override=(1.0, 0.0, 0.0)))
    text = canonical_json(scene.to_dict())
    back = SceneGraph.from_dict(json.loads(text))
    assert canonical_json(back.to_dict()) == text


def test_edit_log_rounds_must_be_nondecreasing():
    scene = _scene()
    e1 = EditLogEntry(1, "Motion", "a", {})
    e2 = EditLogEntry(2, "Motion", "b", {})
    scene.with_log_entries([e1, e2])  # fine
    with pytest.raises(ValueError):
        scene.with_log_entries([e2, e1])


def test_next_round_counts_from_log():
    scene = _scene()
    assert scene.next_round == 1
    logged = scene.with_log_entries([EditLogEntry(1, "Motion", "a", {})])
    assert logged.next_round == 2


def test_world_camera_follows_ego():
    scene = _scene()
    moved = scene.with_ego_pose(Pose.from_yaw(math.pi / 2, (3.0, 4.0, 0.0)))
    cam = moved.world_camera(0)
    # the mount offset (0.5 forward) now points along world +y
    assert np.allclose(cam.pose.translation, [3.0, 4.5, 1.6])
    # camera forward (z) points along world +y as well
    assert np.allclose(cam.pose.rotation[:, 2], [0.0, 1.0, 0.0], atol=1e-12)


def test_vehicle_instance_color_falls_back_to_asset():
    bank = {a.id: a for a in _bank()}
    inst = VehicleInstance("v", "car-b", _trajectory(), 1)
    assert inst.color(bank) == bank["car-b"].color
    tinted = VehicleInstance("v", "car-b", _trajectory(), 1,
                             color_override=(0.0, 0.0, 1.0))
    assert tinted.color(bank) == (0.0, 0.0, 1.0)


def test_canonical_json_is_sorted_and_compact():
    assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'
