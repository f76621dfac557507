import json

import numpy as np
import pytest

from scenetalk.agents.backends import rule_backend
from scenetalk.agents.orchestrator import (RenderJob, execute_round,
                                           scene_horizon)
from scenetalk.agents.types import (AgentKind, EmptyDecomposition,
                                    MalformedResponse, UnresolvedReference)
from scenetalk.scene import canonical_json


def _scene_json(scene):
    return canonical_json(scene.to_dict(include_log=False))


def _log_config(result, agent):
    return [cfg for instr, cfg in result.executed
            if instr.agent is agent]


# --- basic round mechanics ---------------------------------------------------

def test_add_round_creates_vehicle(straight_scene, bank):
    before = _scene_json(straight_scene)
    result = execute_round("Add a car to the close front.", straight_scene,
                           bank, rule_backend, seed=4)
    assert result.round == 1
    assert list(result.scene.vehicles) == ["veh-r1-0"]
    inst = result.scene.vehicles["veh-r1-0"]
    assert inst.created_in_round == 1
    start = inst.trajectory.positions[0]
    assert 0.0 <= start[0] <= 15.0
    assert result.scene.next_round == 2
    # the input graph is untouched
    assert _scene_json(straight_scene) == before
    assert straight_scene.vehicles == {}


def test_round_numbers_and_ids_advance(straight_scene, bank):
    r1 = execute_round("Add a car to the close front.", straight_scene,
                       bank, rule_backend, seed=4)
    r2 = execute_round("Add a truck to the far front.", r1.scene, bank,
                       rule_backend, seed=4)
    assert r2.round == 2
    assert sorted(r2.scene.vehicles) == ["veh-r1-0", "veh-r2-0"]
    rounds = [e.round for e in r2.scene.edit_log]
    assert rounds == [1, 2]


def test_two_adds_in_one_round_share_the_counter(straight_scene, bank):
    result = execute_round(
        "Add a car to the close front and add a truck to the far front.",
        straight_scene, bank, rule_backend, seed=4)
    assert sorted(result.scene.vehicles) == ["veh-r1-0", "veh-r1-1"]


def test_round_is_deterministic(straight_scene, bank):
    cmd = "Add two cars to the front and move the view 2 meters up."
    a = execute_round(cmd, straight_scene, bank, rule_backend, seed=9)
    b = execute_round(cmd, straight_scene, bank, rule_backend, seed=9)
    assert _scene_json(a.scene) == _scene_json(b.scene)
    c = execute_round(cmd, straight_scene, bank, rule_backend, seed=10)
    assert _scene_json(a.scene) != _scene_json(c.scene)


def test_empty_command_rejected(straight_scene, bank):
    with pytest.raises(EmptyDecomposition):
        execute_round("   ", straight_scene, bank, rule_backend)


# --- execution order ---------------------------------------------------------

def test_view_moves_after_placement(straight_scene, bank):
    # textual order is view first, but placement must use the pose the
    # command was issued from, so the add executes before the move
    result = execute_round(
        "Move the view 40 meters ahead and add a car to the close front.",
        straight_scene, bank, rule_backend, seed=4)
    start = result.scene.vehicles["veh-r1-0"].trajectory.positions[0]
    assert start[0] <= 15.0
    assert result.scene.ego_pose.translation[0] == pytest.approx(40.0)


def test_delete_frees_space_before_addition(straight_scene, bank):
    result = execute_round(
        "Add a Porsche 30 meters ahead and remove all cars.",
        straight_scene, bank, rule_backend, seed=4)
    # all three annotated vehicles went away even though the delete came
    # second in the text
    removed = _log_config(result, AgentKind.VEHICLE_DELETE)[0]["removed"]
    assert removed == ["bg-0", "bg-1", "bg-2"]
    assert result.scene.active_background() == ()
    assert list(result.scene.vehicles) == ["veh-r1-0"]


# --- reference resolution ------------------------------------------------------

def test_reference_resolves_to_most_recent(straight_scene, bank):
    r1 = execute_round("Add a car to the close front.", straight_scene,
                       bank, rule_backend, seed=4)
    r2 = execute_round("Add a car to the far front.", r1.scene, bank,
                       rule_backend, seed=4)
    r3 = execute_round("Make the added car park.", r2.scene, bank,
                       rule_backend, seed=4)
    cfg = _log_config(r3, AgentKind.MOTION)[0]
    assert cfg["target"]["instance_id"] == "veh-r2-0"
    parked = r3.scene.vehicles["veh-r2-0"].trajectory
    assert np.allclose(parked.positions, parked.positions[0])
    # the earlier vehicle kept its motion
    first = r3.scene.vehicles["veh-r1-0"].trajectory
    assert not np.allclose(first.positions, first.positions[0])


def test_reference_resolves_by_color(straight_scene, bank):
    r1 = execute_round("Add a red car to the close front.", straight_scene,
                       bank, rule_backend, seed=4)
    r2 = execute_round("Add a blue car to the far front.", r1.scene, bank,
                       rule_backend, seed=4)
    r3 = execute_round("Paint the red car green.", r2.scene, bank,
                       rule_backend, seed=4)
    cfg = _log_config(r3, AgentKind.ASSET_MANAGE)[0]
    assert cfg["target"]["instance_id"] == "veh-r1-0"
    assert r3.scene.vehicles["veh-r1-0"].color_override == (0.0, 1.0, 0.0)
    assert r3.scene.vehicles["veh-r2-0"].color_override is None


def test_pronoun_resolves_by_recency(straight_scene, bank):
    r1 = execute_round("Add a car to the close front.", straight_scene,
                       bank, rule_backend, seed=4)
    r2 = execute_round("Paint it red.", r1.scene, bank, rule_backend, seed=4)
    assert r2.scene.vehicles["veh-r1-0"].color_override == (1.0, 0.0, 0.0)


def test_anchor_placement_behind_named_vehicle(straight_scene, bank):
    r1 = execute_round("Add a Porsche to the close front.", straight_scene,
                       bank, rule_backend, seed=4)
    r2 = execute_round("Add a police car driving behind the Porsche.",
                       r1.scene, bank, rule_backend, seed=4)
    cfg = _log_config(r2, AgentKind.MOTION)[0]
    assert cfg["placement"]["anchor"] == "the porsche"
    assert cfg["placement"]["anchor_id"] == "veh-r1-0"
    porsche = r1.scene.vehicles["veh-r1-0"].trajectory
    police = r2.scene.vehicles["veh-r2-0"].trajectory
    heading = porsche.headings[0]
    h = np.array([np.cos(heading), np.sin(heading)])
    gap = police.positions[0] - porsche.positions[0]
    assert float(gap @ h) < 0.0
    assert np.linalg.norm(gap) >= 6.0


def test_unresolvable_reference_fails_round(straight_scene, bank):
    with pytest.raises(UnresolvedReference):
        execute_round("Make the added car park.", straight_scene, bank,
                      rule_backend, seed=4)


# --- deletion variants ------------------------------------------------------------

def test_delete_by_attribute_hits_background(straight_scene, bank):
    result = execute_round("Remove the truck.", straight_scene, bank,
                           rule_backend, seed=4)
    cfg = _log_config(result, AgentKind.VEHICLE_DELETE)[0]
    assert cfg["removed"] == ["bg-2"]
    assert {b.id for b in result.scene.active_background()} == {"bg-0",
                                                                "bg-1"}


def test_delete_by_color(straight_scene, bank):
    result = execute_round("Remove the white car.", straight_scene, bank,
                           rule_backend, seed=4)
    cfg = _log_config(result, AgentKind.VEHICLE_DELETE)[0]
    assert cfg["removed"] == ["bg-1"]


def test_delete_reference_spares_background(straight_scene, bank):
    r1 = execute_round("Add a car to the close front.", straight_scene,
                       bank, rule_backend, seed=4)
    r2 = execute_round("Remove the added car.", r1.scene, bank,
                       rule_backend, seed=4)
    assert r2.scene.vehicles == {}
    assert len(r2.scene.active_background()) == 3


def test_delete_without_match_fails(straight_scene, bank):
    with pytest.raises(UnresolvedReference):
        execute_round("Remove the van.", straight_scene, bank,
                      rule_backend, seed=4)


# --- view adjustments ----------------------------------------------------------------

def test_view_translation_composes_in_ego_frame(straight_scene, bank):
    r1 = execute_round(
        "Move the view 5 meters ahead and 0.5 meters up.", straight_scene,
        bank, rule_backend, seed=4)
    assert r1.scene.ego_pose.translation == pytest.approx([5.0, 0.0, 0.5])
    r2 = execute_round("Rotate the view 90 degrees to the left.", r1.scene,
                       bank, rule_backend, seed=4)
    r3 = execute_round("Move the view 2 meters ahead.", r2.scene, bank,
                       rule_backend, seed=4)
    # after the yaw, "ahead" points along world +y
    assert r3.scene.ego_pose.translation == pytest.approx([5.0, 2.0, 0.5])


# --- render jobs -----------------------------------------------------------------------

def test_render_jobs_fill_scene_horizon(straight_scene, bank):
    r1 = execute_round("Add a car to the close front.", straight_scene,
                       bank, rule_backend, seed=4)
    r2 = execute_round("Render the scene as a video.", r1.scene, bank,
                       rule_backend, seed=4)
    # default movement: 4 s at 10 Hz plus the starting sample
    assert r2.render_jobs == [RenderJob("background", (0, 40)),
                              RenderJob("foreground", (0, 40))]
    assert r2.scene.vehicles == r1.scene.vehicles


def test_render_jobs_respect_explicit_frames(straight_scene, bank):
    result = execute_round("Render frames 2 to 5.", straight_scene, bank,
                           rule_backend, seed=4)
    assert result.render_jobs == [RenderJob("background", (2, 5)),
                                  RenderJob("foreground", (2, 5))]


def test_scene_horizon(straight_scene, bank):
    assert scene_horizon(straight_scene) == 0
    r1 = execute_round("Add a car to the close front.", straight_scene,
                       bank, rule_backend, seed=4)
    assert scene_horizon(r1.scene) == 40


# --- atomicity -------------------------------------------------------------------------

def test_failure_after_partial_progress_leaves_scene_intact(straight_scene,
                                                            bank):
    before = _scene_json(straight_scene)
    # the add executes first (a Mini), then the recolor cannot resolve
    with pytest.raises(UnresolvedReference):
        execute_round(
            "Add a car to the close front and paint the porsche red.",
            straight_scene, bank, rule_backend, seed=4)
    assert _scene_json(straight_scene) == before
    assert straight_scene.vehicles == {}
    assert straight_scene.edit_log == ()


def test_backend_failure_leaves_scene_intact(straight_scene, bank):
    calls = {"n": 0}

    def flaky(prompt, text):
        calls["n"] += 1
        if "AGENT: Motion" in prompt.splitlines()[0]:
            return "not json at all"
        return rule_backend(prompt, text)

    before = _scene_json(straight_scene)
    with pytest.raises(MalformedResponse):
        execute_round("Remove all cars and add a car to the close front.",
                      straight_scene, bank, flaky, seed=4)
    assert _scene_json(straight_scene) == before
    assert calls["n"] >= 2  # the malformed call was retried


def test_malformed_decomposition_rejected(straight_scene, bank):
    def bad_pm(prompt, text):
        if "ProjectManager" in prompt.splitlines()[0]:
            return json.dumps({"instructions": [{"agent": "Motion"}]})
        return rule_backend(prompt, text)

    with pytest.raises(MalformedResponse):
        execute_round("Add a car.", straight_scene, bank, bad_pm, seed=4)


# --- asset choice ------------------------------------------------------------------------

def test_add_picks_matching_asset_and_override(straight_scene, bank):
    result = execute_round("Add a purple Tesla to the close front.",
                           straight_scene, bank, rule_backend, seed=4)
    inst = result.scene.vehicles["veh-r1-0"]
    assert inst.asset_id == "car-005-tesla"
    # no purple car in the catalog, so the look is overridden
    assert inst.color_override == (0.5, 0.0, 0.5)
    assert inst.color({a.id: a for a in bank}) == (0.5, 0.0, 0.5)


def test_add_without_override_keeps_catalog_color(straight_scene, bank):
    result = execute_round("Add a red Porsche to the close front.",
                           straight_scene, bank, rule_backend, seed=4)
    inst = result.scene.vehicles["veh-r1-0"]
    assert inst.asset_id == "car-002-porsche"
    assert inst.color_override is None
