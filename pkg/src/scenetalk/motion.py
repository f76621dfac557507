"""Vehicle placement and trajectory planning on the lane map.

Placement picks lane-node midpoints by sector, distance, and driving side;
destinations are chosen per action class; paths are cubic Bezier chains
that get split at lane nodes until every sample is near a centerline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .geometry import Pose, unit
from .scene import LaneMap, LaneNode, LaneType


class NoCandidate(LookupError):
    """Placement or destination constraints filtered out every lane node."""


class DegenerateInput(ValueError):
    """Bezier endpoints coincide."""


class Sector(Enum):
    FRONT = "Front"
    LEFT_FRONT = "LeftFront"
    RIGHT_FRONT = "RightFront"
    LEFT = "Left"
    RIGHT = "Right"
    BACK = "Back"


class DrivingDirection(Enum):
    TOWARD = "Toward"
    AWAY = "Away"


class ActionKind(Enum):
    STRAIGHT = "Straight"
    TURN_LEFT = "TurnLeft"
    TURN_RIGHT = "TurnRight"
    PARK = "Park"
    BACKWARD = "Backward"


@dataclass(frozen=True)
class PlacementAttributes:
    count: int = 1
    distance_range: Optional[tuple[float, float]] = None
    sector: Sector = Sector.FRONT
    driving_direction: DrivingDirection = DrivingDirection.AWAY
    crazy_mode: bool = False

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError("count must be positive")
        if self.distance_range is not None:
            d_min, d_max = self.distance_range
            if not 0 <= d_min < d_max:
                raise ValueError("need 0 <= d_min < d_max")


@dataclass(frozen=True)
class MovementAttributes:
    speed: float = 8.0
    action: ActionKind = ActionKind.STRAIGHT
    duration: float = 4.0
    sample_rate: float = 10.0
    # The source material lists an "interval" attribute but never defines it
    # operationally; only sample_rate drives timing here.

    def __post_init__(self) -> None:
        if self.speed < 0:
            raise ValueError("speed must be >= 0")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.sample_rate <= 0:
            raise ValueError("sample rate must be positive")


SECTOR_FRONT_DEG = 15.0
SECTOR_LEFTFRONT_DEG = 75.0
SECTOR_LEFT_DEG = 120.0

MIN_SPACING = 6.0
TURN_LATERAL_RANGE = (5.0, 30.0)


def classify_sector(ego_pose: Pose, point) -> Sector:
    """Sector of a world point by bearing in the ego frame (x forward, y left)."""
    x, y = ego_pose.world_to_ego_xy(np.asarray(point, dtype=float))
    theta = math.degrees(math.atan2(y, x))
    a = abs(theta)
    if a <= SECTOR_FRONT_DEG:
        return Sector.FRONT
    if a > SECTOR_LEFT_DEG:
        return Sector.BACK
    if a <= SECTOR_LEFTFRONT_DEG:
        return Sector.LEFT_FRONT if theta > 0 else Sector.RIGHT_FRONT
    return Sector.LEFT if theta > 0 else Sector.RIGHT


def place_vehicles(lane_map: LaneMap, attrs: PlacementAttributes, ego_pose: Pose,
                   existing: Sequence = (), seed: int = 0,
                   anchor_pose: Pose | None = None) -> list[tuple[np.ndarray, float]]:
    """Choose (position, heading) starts on lane-node midpoints.

    Candidates must sit in the requested sector and distance range and drive
    toward or away from the ego as asked; crazy_mode reverses every node first.
    With anchor_pose set ("behind that car"), sector and distance are measured
    from the anchor instead, while toward/away stays relative to the ego.
    Picks are uniform with the given seed, keeping 6 m spacing from each other
    and from existing footprints.
    """
    nodes = lane_map.filter(LaneType.CENTERLINE)
    if attrs.crazy_mode:
        nodes = tuple(n.reversed() for n in nodes)

    origin = ego_pose if anchor_pose is None else anchor_pose
    origin_xy = origin.translation[:2]
    ego_xy = ego_pose.translation[:2]
    candidates = []
    for node in nodes:
        mid = node.midpoint
        if attrs.distance_range is not None:
            d = float(np.linalg.norm(mid - origin_xy))
            if not (attrs.distance_range[0] <= d <= attrs.distance_range[1]):
                continue
        if classify_sector(origin, mid) != attrs.sector:
            continue
        approach = float(np.dot(node.direction, ego_xy - mid))
        if attrs.driving_direction == DrivingDirection.TOWARD:
            if approach <= 0:
                continue
        elif approach >= 0:
            continue
        heading = math.atan2(node.direction[1], node.direction[0])
        candidates.append((mid, heading))

    rng = np.random.default_rng(seed)
    taken = [np.asarray(p, dtype=float) for p in existing]
    placements: list[tuple[np.ndarray, float]] = []
    pool = list(candidates)
    for _ in range(attrs.count):
        feasible = [c for c in pool
                    if all(np.linalg.norm(c[0] - q) >= MIN_SPACING for q in taken)]
        if not feasible:
            raise NoCandidate(
                f"no lane node satisfies sector={attrs.sector.value}, "
                f"range={attrs.distance_range}, "
                f"direction={attrs.driving_direction.value}, "
                f"crazy_mode={attrs.crazy_mode} with {MIN_SPACING} m spacing")
        pick = feasible[int(rng.integers(len(feasible)))]
        placements.append(pick)
        taken.append(pick[0])
        # identity, not ==: candidate positions are arrays
        pool = [c for c in pool if c is not pick]
    return placements


def plan_destination(start, heading, movement: MovementAttributes,
                     lane_map: LaneMap, seed: int = 0) -> LaneNode:
    """Destination lane node for one movement.

    Straight/Park/Backward project the raw endpoint along the heading and take
    the nearest node. Turns collect nodes whose lateral offset from the heading
    line is 5-30 m on the turn side and whose direction leads away from the
    start, then pick one with the seed.
    """
    start = np.asarray(start, dtype=float)
    h = unit(np.asarray(heading, dtype=float))

    if movement.action in (ActionKind.STRAIGHT, ActionKind.PARK, ActionKind.BACKWARD):
        travel = movement.speed * movement.duration
        if movement.action == ActionKind.PARK:
            raw = start
        elif movement.action == ActionKind.BACKWARD:
            raw = start - h * travel
        else:
            raw = start + h * travel
        try:
            return lane_map.nearest_node(raw)
        except ValueError as exc:
            raise NoCandidate(str(exc)) from exc

    left_normal = np.array([-h[1], h[0]])
    lo, hi = TURN_LATERAL_RANGE
    candidates = []
    for node in lane_map.filter(LaneType.CENTERLINE):
        disp = node.midpoint - start
        lateral = float(np.dot(disp, left_normal))
        if movement.action == ActionKind.TURN_LEFT:
            if not (lo <= lateral <= hi):
                continue
        else:
            if not (-hi <= lateral <= -lo):
                continue
        # a tight turn may end slightly behind the start, never far behind
        if float(np.dot(disp, h)) < -lo:
            continue
        # the node must lead away from the start, not back toward it
        if float(np.dot(node.direction, disp)) <= 0:
            continue
        candidates.append(node)
    if not candidates:
        raise NoCandidate(f"no lane node in the {movement.action.value} "
                          f"lateral band {TURN_LATERAL_RANGE}")
    rng = np.random.default_rng(seed)
    return candidates[int(rng.integers(len(candidates)))]


@dataclass(frozen=True, eq=False)
class CubicBezier:
    """B(t) = (1-t)^3 P0 + 3(1-t)^2 t P1 + 3(1-t) t^2 P2 + t^3 P3."""

    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    p3: np.ndarray

    def __post_init__(self) -> None:
        for name in ("p0", "p1", "p2", "p3"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(2)
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)[..., None]
        s = 1.0 - t
        return (s ** 3 * self.p0 + 3 * s ** 2 * t * self.p1
                + 3 * s * t ** 2 * self.p2 + t ** 3 * self.p3)

    def derivative(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)[..., None]
        s = 1.0 - t
        return (3 * s ** 2 * (self.p1 - self.p0)
                + 6 * s * t * (self.p2 - self.p1)
                + 3 * t ** 2 * (self.p3 - self.p2))


def fit_cubic_bezier(p0, d0, p3, d3) -> CubicBezier:
    """Hermite-style fit: inner control points sit a third of the chord along
    each end tangent, so B'(0) is parallel to d0 and B'(1) to d3."""
    p0 = np.asarray(p0, dtype=float)
    p3 = np.asarray(p3, dtype=float)
    chord = float(np.linalg.norm(p3 - p0))
    if chord < 1e-12:
        raise DegenerateInput("bezier endpoints coincide")
    d0 = unit(d0)
    d3 = unit(d3)
    return CubicBezier(p0, p0 + d0 * chord / 3.0, p3 - d3 * chord / 3.0, p3)


@dataclass(frozen=True)
class AdjustedChain:
    curves: tuple[CubicBezier, ...]
    converged: bool


ROAD_TOLERANCE = 2.0
ADJUST_SAMPLES = 50
ADJUST_MAX_DEPTH = 4


def _within_road(lane_map: LaneMap, curve: CubicBezier, tol: float) -> bool:
    pts = curve.evaluate(np.linspace(0.0, 1.0, ADJUST_SAMPLES))
    return bool(np.all(lane_map.distance_to_centerline(pts) <= tol))


def _adjust_curve(lane_map: LaneMap, curve: CubicBezier, tol: float,
                  depth: int, max_depth: int) -> tuple[list[CubicBezier], bool]:
    if _within_road(lane_map, curve, tol):
        return [curve], True
    if depth >= max_depth:
        return [curve], False
    mid = curve.evaluate(0.5)
    try:
        node = lane_map.nearest_node(mid)
    except ValueError:
        return [curve], False
    m, dm = node.midpoint, node.direction
    try:
        left = fit_cubic_bezier(curve.p0, curve.derivative(0.0), m, dm)
        right = fit_cubic_bezier(m, dm, curve.p3, curve.derivative(1.0))
    except (DegenerateInput, ValueError):
        # the replacement midpoint collapsed onto an endpoint; splitting
        # cannot make progress
        return [curve], False
    left_curves, left_ok = _adjust_curve(lane_map, left, tol, depth + 1, max_depth)
    right_curves, right_ok = _adjust_curve(lane_map, right, tol, depth + 1, max_depth)
    return left_curves + right_curves, left_ok and right_ok


def adjust_trajectory(lane_map: LaneMap, chain: Sequence[CubicBezier],
                      road_tolerance: float = ROAD_TOLERANCE,
                      max_depth: int = ADJUST_MAX_DEPTH) -> AdjustedChain:
    """Split curves at nearest lane-node midpoints until all 50-point samples
    lie within road_tolerance of a centerline; gives up past max_depth."""
    if not chain:
        raise ValueError("chain must be non-empty")
    out: list[CubicBezier] = []
    converged = True
    for curve in chain:
        curves, ok = _adjust_curve(lane_map, curve, road_tolerance, 0, max_depth)
        out.extend(curves)
        converged = converged and ok
    return AdjustedChain(tuple(out), converged)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Timed poses: rows of (t seconds, x, y meters, heading radians)."""

    samples: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[1] != 4:
            raise ValueError(f"samples must be (N, 4), got {s.shape}")
        if len(s) and np.any(np.diff(s[:, 0]) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def positions(self) -> np.ndarray:
        return self.samples[:, 1:3]

    @property
    def headings(self) -> np.ndarray:
        return self.samples[:, 3]

    def at_frame(self, k: int) -> tuple[float, float, float]:
        """(x, y, heading) at frame k, clamped to the horizon."""
        k = int(np.clip(k, 0, len(self.samples) - 1))
        row = self.samples[k]
        return float(row[1]), float(row[2]), float(row[3])

    def pose_at_frame(self, k: int) -> Pose:
        x, y, heading = self.at_frame(k)
        return Pose.from_yaw(heading, (x, y, 0.0))

    def to_dict(self) -> dict:
        return {"samples": [[float(v) for v in row] for row in self.samples]}

    @staticmethod
    def from_dict(d) -> "Trajectory":
        return Trajectory(np.asarray(d["samples"], dtype=float))


def make_stationary(position, heading: float,
                    movement: MovementAttributes) -> Trajectory:
    """Trajectory that holds one pose for the whole duration."""
    n = int(round(movement.duration * movement.sample_rate)) + 1
    t = np.arange(n) / movement.sample_rate
    x, y = float(position[0]), float(position[1])
    rows = np.stack([t, np.full(n, x), np.full(n, y),
                     np.full(n, float(heading))], axis=1)
    return Trajectory(rows)


_DENSE_PER_CURVE = 512


def sample_trajectory(chain: Sequence[CubicBezier],
                      movement: MovementAttributes) -> Trajectory:
    """Arc-length resample of a C0 chain at speed/sample_rate spacing.

    Samples past the end of the chain hold the final pose; zero speed holds
    the initial pose. Headings are the path tangents.
    """
    if not chain:
        raise ValueError("chain must be non-empty")
    n = int(round(movement.duration * movement.sample_rate)) + 1
    t_axis = np.arange(n) / movement.sample_rate

    if movement.speed == 0:
        start = chain[0].evaluate(0.0)
        d = chain[0].derivative(0.0)
        heading = math.atan2(d[1], d[0])
        rows = np.stack([t_axis, np.full(n, start[0]), np.full(n, start[1]),
                         np.full(n, heading)], axis=1)
        return Trajectory(rows)

    # dense arc-length table over the whole chain
    ts = np.linspace(0.0, 1.0, _DENSE_PER_CURVE + 1)
    cum = [0.0]
    tables = []
    for curve in chain:
        pts = curve.evaluate(ts)
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        s = cum[-1] + np.concatenate([[0.0], np.cumsum(seg)])
        tables.append(s)
        cum.append(float(s[-1]))
    total = cum[-1]

    targets = np.minimum(t_axis * movement.speed, total)
    rows = np.empty((n, 4))
    rows[:, 0] = t_axis
    for j, s_target in enumerate(targets):
        # locate the curve then the dense interval holding this arc length
        ci = int(np.searchsorted(np.asarray(cum[1:]), s_target, side="left"))
        ci = min(ci, len(chain) - 1)
        s_tab = tables[ci]
        k = int(np.clip(np.searchsorted(s_tab, s_target) - 1, 0,
                        _DENSE_PER_CURVE - 1))
        span = s_tab[k + 1] - s_tab[k]
        frac = 0.0 if span == 0 else (s_target - s_tab[k]) / span
        t_local = (k + frac) / _DENSE_PER_CURVE
        p = chain[ci].evaluate(t_local)
        d = chain[ci].derivative(t_local)
        if np.linalg.norm(d) < 1e-12:
            d = chain[ci].derivative(min(t_local + 1e-3, 1.0))
        rows[j, 1:3] = p
        rows[j, 3] = math.atan2(d[1], d[0])
    return Trajectory(rows)


@dataclass(frozen=True)
class MotionPlan:
    trajectory: Trajectory
    chain: tuple[CubicBezier, ...]
    converged: bool


def plan_vehicle_motion(lane_map: LaneMap, start, heading: float,
                        movement: MovementAttributes,
                        seed: int = 0) -> MotionPlan:
    """Full pipeline for one vehicle: destination, Bezier fit, off-road
    correction, arc-length sampling."""
    start = np.asarray(start, dtype=float)
    h = np.array([math.cos(heading), math.sin(heading)])

    if movement.action == ActionKind.PARK or movement.speed == 0:
        return MotionPlan(make_stationary(start, heading, movement), (), True)

    node = plan_destination(start, h, movement, lane_map, seed=seed)
    end = node.midpoint
    if float(np.linalg.norm(end - start)) < 1e-9:
        return MotionPlan(make_stationary(start, heading, movement), (), True)

    # path tangents follow the direction of travel: reversing flips the
    # start tangent, and the destination tangent takes whichever sign of
    # the node direction agrees with the displacement (wrong-way driving
    # travels against the stored node direction)
    d0 = -h if movement.action == ActionKind.BACKWARD else h
    disp = end - start
    d3 = node.direction if float(np.dot(node.direction, disp)) >= 0 \
        else -node.direction
    chain = [fit_cubic_bezier(start, d0, end, d3)]
    adjusted = adjust_trajectory(lane_map, chain)
    trajectory = sample_trajectory(adjusted.curves, movement)
    return MotionPlan(trajectory, adjusted.curves, adjusted.converged)
