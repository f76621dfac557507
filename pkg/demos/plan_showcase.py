"""One trajectory per action kind, planned on the bundled crossroad map.

Places a vehicle for each of the five supported actions, plans its motion,
reports how far the sampled path strays from the nearest lane centerline,
and writes a single SVG overlay with all five paths.
"""
from pathlib import Path

from scenetalk.bundles import load_scene_template
from scenetalk.motion import (ActionKind, DrivingDirection,
                              MovementAttributes, PlacementAttributes,
                              Sector, place_vehicles, plan_vehicle_motion)
from scenetalk.raster import trajectory_svg

CASES = (
    (ActionKind.STRAIGHT, 8.0, Sector.FRONT, DrivingDirection.AWAY),
    (ActionKind.TURN_LEFT, 6.0, Sector.FRONT, DrivingDirection.AWAY),
    (ActionKind.TURN_RIGHT, 6.0, Sector.FRONT, DrivingDirection.AWAY),
    (ActionKind.BACKWARD, 4.0, Sector.FRONT, DrivingDirection.AWAY),
    (ActionKind.PARK, 0.0, Sector.RIGHT_FRONT, DrivingDirection.AWAY),
)


def main() -> None:
    out = Path(__file__).parent / "out"
    out.mkdir(exist_ok=True)
    lane_map, _, ego = load_scene_template("crossroad")

    trajectories = []
    for seed, (action, speed, sector, direction) in enumerate(CASES):
        attrs = PlacementAttributes(count=1, distance_range=(0.0, 12.0),
                                    sector=sector,
                                    driving_direction=direction,
                                    crazy_mode=False)
        [(pos, heading)] = place_vehicles(lane_map, attrs, ego, seed=seed)
        movement = MovementAttributes(action=action, speed=speed,
                                      duration=5.0, sample_rate=10.0)
        plan = plan_vehicle_motion(lane_map, pos, heading, movement,
                                   seed=seed)
        traj = plan.trajectory
        worst = float(lane_map.distance_to_centerline(
            traj.positions).max())
        end = traj.positions[-1]
        print(f"{action.value:<10} start ({pos[0]:6.1f}, {pos[1]:6.1f})  "
              f"end ({end[0]:6.1f}, {end[1]:6.1f})  "
              f"max centerline distance {worst:.3f} m")
        trajectories.append(traj)

    svg = out / "five_actions.svg"
    svg.write_text(trajectory_svg(lane_map, trajectories))
    print(f"\nwrote {svg}")


if __name__ == "__main__":
    main()
