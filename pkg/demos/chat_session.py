"""Two-round conversational edit of the bundled crossroad scene.

Round 1 nudges the ego forward and drops a car ahead; round 2 refers back
to that car ("the added car", "the added Mini"), retargets its motion to a
left turn, and anchors two more vehicles to it. Writes a top-down PNG per
round plus a lane-map SVG with every planned trajectory.
"""
from pathlib import Path

from scenetalk.agents.backends import rule_backend
from scenetalk.agents.orchestrator import execute_round
from scenetalk.bundles import default_rig, load_bank, load_scene_template
from scenetalk.raster import render_topdown, trajectory_svg
from scenetalk.scene import SceneGraph

ROUNDS = (
    "Ego vehicle drives ahead slowly. Add a car to the close front that "
    "is moving ahead.",
    "Modify the added car to turn left. Add a Chevrolet to the front of "
    "the added car. Add another vehicle to the left of the added Mini "
    "driving toward me.",
)


def main() -> None:
    out = Path(__file__).parent / "out"
    out.mkdir(exist_ok=True)

    lane_map, background, ego = load_scene_template("crossroad")
    scene = SceneGraph(field_ref="none", lane_map=lane_map,
                       rig=default_rig(), ego_pose=ego,
                       background_vehicles=background)
    bank = load_bank()
    bank_map = {a.id: a for a in bank}

    for i, command in enumerate(ROUNDS, start=1):
        print(f"\n=== round {i}: {command!r}")
        result = execute_round(command, scene, bank, rule_backend, seed=11)
        scene = result.scene
        for inst, _ in result.executed:
            print(f"  [{inst.agent.value}] {inst.text}")
        for vid in sorted(scene.vehicles):
            inst = scene.vehicles[vid]
            x, y, _ = inst.trajectory.at_frame(0)
            print(f"  {vid}: {inst.asset_id} at ({x:.1f}, {y:.1f})")
        png = out / f"round{i}_topdown.png"
        render_topdown(scene, bank_map).save(png)
        print(f"  wrote {png}")

    svg = out / "trajectories.svg"
    svg.write_text(trajectory_svg(
        scene.lane_map,
        [scene.vehicles[v].trajectory for v in sorted(scene.vehicles)]))
    print(f"\nwrote {svg}")


if __name__ == "__main__":
    main()
