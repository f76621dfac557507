import json

import numpy as np
import pytest
from PIL import Image

from scenetalk.bundles import (bundled_map_names, default_rig, load_bank,
                               load_scene_template)
from scenetalk.cli import main
from scenetalk.field import load_grid, oetf, psnr, render_view, save_grid

from conftest import look_at_camera, random_grid, ring_views


# --- bundled data -------------------------------------------------------------

def test_bundled_maps_exist():
    names = bundled_map_names()
    assert "straight" in names and "crossroad" in names


@pytest.mark.parametrize("name", ["straight", "crossroad"])
def test_scene_templates_are_well_formed(name):
    lane_map, background, ego = load_scene_template(name)
    assert lane_map.name == name
    assert len(lane_map.nodes) > 10
    # the ego starts on a lane
    xy = ego.translation[:2]
    assert lane_map.distance_to_centerline([xy])[0] < 2.0
    for bg in background:
        assert len(bg.dimensions) == 3
        assert all(d > 0 for d in bg.dimensions)


def test_scene_template_from_path(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_scene_template("atlantis")
    with pytest.raises(FileNotFoundError):
        load_scene_template(str(tmp_path / "missing.json"))


def test_bundled_bank_is_usable():
    bank = load_bank()
    assert len(bank) >= 8
    ids = [a.id for a in bank]
    assert len(ids) == len(set(ids))
    types = {a.type_label for a in bank}
    assert {"car", "truck", "police", "suv", "van"} <= types


def test_load_bank_from_path(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_bank(str(tmp_path / "nothing.json"))
    records = [a.to_dict() for a in load_bank()[:2]]
    path = tmp_path / "bank.json"
    path.write_text(json.dumps(records))
    loaded = load_bank(str(path))
    assert [a.id for a in loaded] == [r["id"] for r in records]


def test_default_rig_geometry():
    rig = default_rig()
    assert len(rig) == 1
    cam = rig[0]
    assert cam.width == 120 and cam.height == 80
    # 90 degree horizontal FOV: fx equals half the width
    assert cam.fx == cam.width / 2.0


# --- CLI ------------------------------------------------------------------------

def test_cli_plan_trajectory(tmp_path, capsys):
    attrs = {"placement": {"sector": "Front", "count": 2},
             "movement": {"speed": 8.0, "action": "Straight"}}
    attrs_path = tmp_path / "attrs.json"
    attrs_path.write_text(json.dumps(attrs))
    out = tmp_path / "plan.json"
    svg = tmp_path / "plan.svg"

    rc = main(["plan-trajectory", "--map", "straight",
               "--attrs", str(attrs_path), "--out", str(out),
               "--svg", str(svg), "--seed", "3"])
    assert rc == 0
    doc = json.loads(out.read_text())
    assert doc["map"] == "straight"
    assert doc["seed"] == 3
    assert len(doc["vehicles"]) == 2
    for veh in doc["vehicles"]:
        assert veh["converged"] is True
        assert len(veh["samples"]) >= 2
    assert svg.read_text().startswith("<svg")
    assert "wrote 2 trajectories" in capsys.readouterr().out


def test_cli_plan_trajectory_is_seed_stable(tmp_path):
    attrs_path = tmp_path / "attrs.json"
    attrs_path.write_text(json.dumps({"placement": {"sector": "Front"}}))
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        main(["plan-trajectory", "--map", "straight", "--attrs",
              str(attrs_path), "--out", str(out), "--seed", "5"])
        outs.append(out.read_text())
    assert outs[0] == outs[1]


def _write_views(tmp_path, n=6, width=12, height=9):
    truth = random_grid(4, seed=21, density_loc=0.5, emission_loc=-0.5)
    cams = ring_views(n, width=width, height=height)
    records = []
    for i, cam in enumerate(cams):
        hdr, _ = render_view(truth, cam, k_samples=24)
        name = f"view{i}.npy"
        np.save(tmp_path / name, oetf(hdr))
        records.append({"image": name, "camera": cam.to_dict()})
    views_path = tmp_path / "views.json"
    views_path.write_text(json.dumps({"views": records}))
    return views_path, truth, cams


def test_cli_train_then_render(tmp_path, capsys):
    views_path, truth, cams = _write_views(tmp_path)
    config = {"resolution": [4, 4, 4], "steps": 80, "batch_size": 256,
              "k_samples": 24, "jitter": False, "seed": 1}
    config_path = tmp_path / "train.json"
    config_path.write_text(json.dumps(config))
    grid_path = tmp_path / "grid.stvg"

    rc = main(["train", "--views", str(views_path),
               "--config", str(config_path), "--out", str(grid_path)])
    assert rc == 0
    assert "trained 80 steps" in capsys.readouterr().out

    grid = load_grid(str(grid_path))
    assert grid.resolution == (4, 4, 4)

    cam_path = tmp_path / "camera.json"
    cam_path.write_text(json.dumps(cams[0].to_dict()))
    png_path = tmp_path / "out.png"
    hdr_path = tmp_path / "out.npy"
    rc = main(["render", "--grid", str(grid_path), "--camera", str(cam_path),
               "--png", str(png_path), "--hdr", str(hdr_path),
               "--k-samples", "24"])
    assert rc == 0
    with Image.open(png_path) as img:
        assert img.size == (12, 9)
    hdr = np.load(hdr_path)
    assert hdr.shape == (9, 12, 3)
    # the fit is rough at this size, but it must resemble the target
    want, _ = render_view(truth, cams[0], k_samples=24)
    assert psnr(oetf(hdr), oetf(want)) > 15.0


def test_cli_render_with_exposure_stats(tmp_path):
    grid = random_grid(4, seed=22)
    grid_path = tmp_path / "grid.stvg"
    save_grid(grid, str(grid_path))
    cam = look_at_camera((-2.5, 0.0, 0.3), (0.0, 0.0, 0.0),
                         width=8, height=6)
    cam_path = tmp_path / "camera.json"
    cam_path.write_text(json.dumps(cam.to_dict()))

    short = tmp_path / "short.npy"
    long = tmp_path / "long.npy"
    for dt, hdr_out in ((0.5, short), (2.0, long)):
        main(["render", "--grid", str(grid_path), "--camera", str(cam_path),
              "--png", str(tmp_path / "ldr.png"), "--hdr", str(hdr_out),
              "--dt", str(dt), "--mu", "1.0", "--sigma", "0.5",
              "--k-samples", "16"])
    a = np.load(short)
    b = np.load(long)
    assert np.all(b >= a)
    assert b.mean() > a.mean()


def test_cli_rejects_unknown_subcommand(capsys):
    with pytest.raises(SystemExit):
        main(["drive"])
