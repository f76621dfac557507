"""Published schema files must match the code they document."""
import json
import sys
from pathlib import Path

import jsonschema
import pytest

ROOT = Path(__file__).resolve().parents[1]
SCHEMAS = ROOT / "docs" / "schemas"
DATA = ROOT / "src" / "scenetalk" / "data"

sys.path.insert(0, str(ROOT / "tools"))
import export_schemas  # noqa: E402


def _published(name: str) -> dict:
    return json.loads((SCHEMAS / name).read_text())


@pytest.mark.parametrize("name", sorted(export_schemas.documents()))
def test_published_schema_is_current(name):
    assert _published(name) == json.loads(
        json.dumps(export_schemas.documents()[name])), \
        f"{name} is stale; rerun tools/export_schemas.py"


@pytest.mark.parametrize("map_name", ["straight", "crossroad", "town"])
def test_bundled_maps_validate(map_name):
    doc = json.loads((DATA / "maps" / f"{map_name}.json").read_text())
    jsonschema.validate(doc, _published("lane_map.schema.json"))


def test_bundled_catalog_validates():
    doc = json.loads((DATA / "assets.json").read_text())
    jsonschema.validate(doc, _published("asset_catalog.schema.json"))


def test_planned_trajectory_validates(tmp_path):
    from scenetalk.cli import main

    attrs = tmp_path / "attrs.json"
    attrs.write_text(json.dumps({
        "placement": {"sector": "Front", "driving_direction": "Away"},
        "movement": {"action": "Straight", "speed": 8.0},
    }))
    out = tmp_path / "traj.json"
    assert main(["plan-trajectory", "--map", "straight",
                 "--attrs", str(attrs), "--out", str(out)]) == 0
    jsonschema.validate(json.loads(out.read_text()),
                        _published("trajectory.schema.json"))
