"""Round orchestration.

A round turns one natural-language command into an atomic scene update:
decompose into per-agent instructions, parse each into a validated
config, resolve references to existing vehicles, then execute in
dependency order (deletions, vehicle motion, recolors, view changes,
renders). Any failure leaves the input scene untouched.
"""

from __future__ import annotations

import copy
import functools
import json
import re
from dataclasses import dataclass, replace
from importlib import resources
from typing import Any, Mapping, Sequence

import numpy as np

from ..geometry import Pose, rotation_from_euler_deg
from ..motion import (
    ActionKind,
    DrivingDirection,
    MovementAttributes,
    PlacementAttributes,
    Sector,
    place_vehicles,
    plan_vehicle_motion,
)
from ..scene import (
    AssetRecord,
    EditLogEntry,
    SceneGraph,
    VehicleInstance,
    crop_lane_map,
    select_asset,
)
from . import vocabulary as vocab
from .schemas import validate_config
from .types import (
    AgentKind,
    Backend,
    EmptyDecomposition,
    Instruction,
    MalformedResponse,
    StructuredConfig,
    UnresolvedReference,
)

_PROMPT_FILES = {
    AgentKind.PROJECT_MANAGER: "project_manager.txt",
    AgentKind.VIEW_ADJUST: "view_adjust.txt",
    AgentKind.VEHICLE_DELETE: "vehicle_delete.txt",
    AgentKind.ASSET_MANAGE: "asset_manage.txt",
    AgentKind.MOTION: "motion.txt",
    AgentKind.BACKGROUND_RENDER: "background_render.txt",
    AgentKind.FOREGROUND_RENDER: "foreground_render.txt",
}

# deletions free lane space for additions; recolors may target vehicles
# added this round; the view moves last so placements use the pose the
# command was issued from; renders see the finished scene
_EXECUTION_PRIORITY = {
    AgentKind.VEHICLE_DELETE: 0,
    AgentKind.MOTION: 1,
    AgentKind.ASSET_MANAGE: 2,
    AgentKind.VIEW_ADJUST: 3,
    AgentKind.BACKGROUND_RENDER: 4,
    AgentKind.FOREGROUND_RENDER: 4,
}

_ID_RE = re.compile(r"^veh-r(\d+)-(\d+)$")
_COLOR_TOL = 0.2


@functools.lru_cache(maxsize=None)
def prompt_for(agent: AgentKind) -> str:
    name = _PROMPT_FILES[agent]
    return (resources.files(__package__).joinpath("prompts")
            .joinpath(name).read_text(encoding="utf-8"))


def _call_backend(backend: Backend, prompt: str, text: str) -> Any:
    """Invoke the backend, allowing one retry on unparsable JSON."""
    last: Exception | None = None
    for _ in range(2):
        raw = backend(prompt, text)
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            last = exc
    raise MalformedResponse(f"backend returned invalid JSON twice: {last}")


def decompose(command: str, backend: Backend,
              round_no: int = 0) -> list[Instruction]:
    """Split a command into per-agent instructions, in command order."""
    if not command or not command.strip():
        raise EmptyDecomposition("command is empty")
    data = _call_backend(backend, prompt_for(AgentKind.PROJECT_MANAGER),
                         command)
    records = data.get("instructions") if isinstance(data, dict) else None
    if not isinstance(records, list):
        raise MalformedResponse(
            "decomposition must be {'instructions': [...]}")
    out: list[Instruction] = []
    for rec in records:
        try:
            agent = AgentKind(rec["agent"])
            text = str(rec["text"]).strip()
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponse(
                f"bad instruction record: {rec!r}") from exc
        if agent is AgentKind.PROJECT_MANAGER or not text:
            raise MalformedResponse(f"bad instruction record: {rec!r}")
        out.append(Instruction(agent=agent, text=text, round=round_no))
    if not out:
        raise EmptyDecomposition(
            f"no actionable instruction in {command!r}")
    return out


def parse_to_config(instruction: Instruction,
                    backend: Backend) -> StructuredConfig:
    """Run one instruction through its agent and validate the result."""
    data = _call_backend(backend, prompt_for(instruction.agent),
                         instruction.text)
    return StructuredConfig(instruction.agent,
                            validate_config(instruction.agent, data))


def _creation_key(inst: VehicleInstance) -> tuple[int, int, str]:
    m = _ID_RE.match(inst.instance_id)
    serial = int(m.group(2)) if m is not None else -1
    return (inst.created_in_round, serial, inst.instance_id)


def _phrase_matches(phrase: str, asset: AssetRecord,
                    color: Sequence[float]) -> bool:
    """Does a descriptor like 'the added red mini' fit this vehicle?"""
    toks = [w for w in re.findall(r"[a-z]+", phrase.lower())
            if w not in vocab.REFERENCE_FILLERS]
    for t in toks:
        if t in vocab.BRAND_WORDS:
            want = vocab.BRAND_WORDS[t].lower()
            if want not in (b.lower() for b in asset.brand_tags):
                return False
        elif t in vocab.TYPE_WORDS:
            label = vocab.TYPE_WORDS[t]
            # bare "car"/"vehicle" is generic and matches anything added
            if label != "car" and asset.type_label.lower() != label:
                return False
        elif t in vocab.COLOR_WORDS:
            want_c = vocab.COLOR_WORDS[t]
            delta = max(abs(a - b) for a, b in zip(color, want_c))
            if delta > _COLOR_TOL:
                return False
    return True


def _resolve_phrase(graph: SceneGraph, bank_map: Mapping[str, AssetRecord],
                    phrase: str) -> str:
    matches = []
    for inst in graph.vehicles.values():
        asset = bank_map.get(inst.asset_id)
        if asset is None:
            continue
        color = inst.color_override or asset.color
        if _phrase_matches(phrase, asset, color):
            matches.append(inst)
    if not matches:
        raise UnresolvedReference(f"nothing matches {phrase!r}")
    return max(matches, key=_creation_key).instance_id


def _resolve_target(graph: SceneGraph, bank_map: Mapping[str, AssetRecord],
                    target: dict[str, Any]) -> str:
    """Bind a target descriptor to a single added-vehicle id."""
    iid = target.get("instance_id")
    if iid is not None:
        if iid not in graph.vehicles:
            raise UnresolvedReference(f"no vehicle {iid!r}")
        return iid
    phrase = target.get("reference")
    if phrase is None:
        # fall back to attribute words so {"brand": "Mini"} still binds
        parts = [target.get("brand", ""), target.get("type", "")]
        phrase = " ".join(p for p in parts if p)
    if not phrase:
        raise UnresolvedReference("target descriptor is empty")
    return _resolve_phrase(graph, bank_map, phrase)


def _movement_from(m: Mapping[str, Any]) -> MovementAttributes:
    return MovementAttributes(speed=float(m["speed"]),
                              action=ActionKind(m["action"]),
                              duration=float(m["duration"]),
                              sample_rate=float(m["sample_rate"]))


def _matches_attrs(type_label: str, brands: Sequence[str],
                   color: Sequence[float], target: Mapping[str, Any]) -> bool:
    want_type = target.get("type")
    if want_type and type_label.lower() != str(want_type).lower():
        return False
    want_brand = target.get("brand")
    if want_brand and str(want_brand).lower() not in (b.lower()
                                                      for b in brands):
        return False
    want_color = target.get("color")
    if want_color is not None:
        if max(abs(a - b) for a, b in zip(color, want_color)) > _COLOR_TOL:
            return False
    return True


def _execute_delete(graph: SceneGraph,
                    entries: dict[str, Any],
                    bank_map: Mapping[str, AssetRecord]) -> SceneGraph:
    target = entries["target"]
    bg_ids: set[str] = set()
    inst_ids: set[str] = set()
    if target.get("all"):
        bg_ids = {b.id for b in graph.active_background()}
        inst_ids = set(graph.vehicles)
    elif target.get("instance_id") or target.get("reference"):
        iid = _resolve_target(graph, bank_map, target)
        target["instance_id"] = iid
        inst_ids = {iid}
    elif any(k in target for k in ("type", "brand", "color")):
        for bg in graph.active_background():
            if _matches_attrs(bg.type_label, (), bg.color, target):
                bg_ids.add(bg.id)
        for inst in graph.vehicles.values():
            asset = bank_map.get(inst.asset_id)
            if asset is None:
                continue
            color = inst.color_override or asset.color
            if _matches_attrs(asset.type_label, asset.brand_tags, color,
                              target):
                inst_ids.add(inst.instance_id)
        if not bg_ids and not inst_ids:
            raise UnresolvedReference(f"nothing matches delete target "
                                      f"{target!r}")
    else:
        raise UnresolvedReference("delete target is empty")
    entries["removed"] = sorted(bg_ids | inst_ids)
    return graph.with_deleted_background(bg_ids).without_vehicles(inst_ids)


def _execute_motion(graph: SceneGraph, entries: dict[str, Any],
                    bank: Sequence[AssetRecord],
                    bank_map: Mapping[str, AssetRecord],
                    round_no: int, counter: int,
                    seed: int) -> tuple[SceneGraph, list[str]]:
    cropped = crop_lane_map(graph.lane_map, graph.ego_pose)

    if entries["mode"] == "modify":
        iid = _resolve_target(graph, bank_map, entries["target"])
        entries["target"]["instance_id"] = iid
        inst = graph.vehicles[iid]
        movement = _movement_from(entries["movement"])
        start = inst.trajectory.positions[0]
        heading = float(inst.trajectory.headings[0])
        plan = plan_vehicle_motion(cropped, start, heading, movement,
                                   seed=seed)
        return graph.with_vehicle(replace(inst,
                                          trajectory=plan.trajectory)), []

    placement = entries["placement"]
    anchor_pose = None
    if placement.get("anchor"):
        anchor_id = _resolve_phrase(graph, bank_map, placement["anchor"])
        placement["anchor_id"] = anchor_id
        anchor_pose = graph.vehicles[anchor_id].trajectory.pose_at_frame(0)

    asset = select_asset(bank, entries["asset"])
    override = None
    want = entries["asset"].get("color")
    if want is not None:
        delta = max(abs(a - b) for a, b in zip(asset.color, want))
        if delta > _COLOR_TOL:
            override = tuple(float(v) for v in want)

    rng_pair = placement["distance_range"]
    attrs = PlacementAttributes(
        count=int(entries["count"]),
        distance_range=(tuple(float(v) for v in rng_pair)
                        if rng_pair is not None else None),
        sector=Sector(placement["sector"]),
        driving_direction=DrivingDirection(placement["driving_direction"]),
        crazy_mode=bool(placement["crazy_mode"]))
    existing = [np.asarray(b.position, dtype=float)
                for b in graph.active_background()]
    existing += [v.trajectory.positions[0] for v in graph.vehicles.values()]
    movement = _movement_from(entries["movement"])

    placements = place_vehicles(cropped, attrs, graph.ego_pose, existing,
                                seed=seed, anchor_pose=anchor_pose)
    created: list[str] = []
    for j, (pos, heading) in enumerate(placements):
        plan = plan_vehicle_motion(cropped, pos, heading, movement,
                                   seed=seed + 7919 * (j + 1))
        iid = f"veh-r{round_no}-{counter + j}"
        graph = graph.with_vehicle(VehicleInstance(
            instance_id=iid, asset_id=asset.id, trajectory=plan.trajectory,
            created_in_round=round_no, color_override=override))
        created.append(iid)
    entries["instances"] = created
    return graph, created


def _execute_recolor(graph: SceneGraph, entries: dict[str, Any],
                     bank_map: Mapping[str, AssetRecord]) -> SceneGraph:
    iid = _resolve_target(graph, bank_map, entries["target"])
    entries["target"]["instance_id"] = iid
    inst = graph.vehicles[iid]
    color = tuple(float(v) for v in entries["color"])
    return graph.with_vehicle(replace(inst, color_override=color))


def _execute_view(graph: SceneGraph, entries: dict[str, Any]) -> SceneGraph:
    yaw, pitch, roll = entries["delta_angles"]
    delta = Pose(rotation_from_euler_deg(float(yaw), float(pitch),
                                         float(roll)),
                 np.asarray(entries["delta_position"], dtype=float))
    return graph.with_ego_pose(graph.ego_pose.compose(delta))


def scene_horizon(graph: SceneGraph) -> int:
    """Last valid frame index over all vehicle trajectories."""
    n = max((len(v.trajectory) for v in graph.vehicles.values()), default=1)
    return max(n - 1, 0)


@dataclass(frozen=True)
class RenderJob:
    kind: str  # "background" or "foreground"
    frames: tuple[int, int]  # inclusive


@dataclass
class RoundResult:
    """Outcome of one command: the new scene plus what ran to produce it."""

    round: int
    scene: SceneGraph
    executed: list[tuple[Instruction, dict[str, Any]]]
    render_jobs: list[RenderJob]


def execute_round(command: str, scene: SceneGraph,
                  bank: Sequence[AssetRecord], backend: Backend,
                  seed: int = 0) -> RoundResult:
    """Apply one command to the scene, all instructions or none.

    The input scene is never mutated; every error (backend, schema,
    reference, placement) propagates before a new graph is returned, so
    callers keep the previous state on failure. With the rule backend
    and a fixed seed the result is deterministic.
    """
    round_no = scene.next_round
    instructions = decompose(command, backend, round_no)
    parsed = [(instr, parse_to_config(instr, backend).entries)
              for instr in instructions]
    parsed.sort(key=lambda pair: _EXECUTION_PRIORITY[pair[0].agent])

    bank_map = {a.id: a for a in bank}
    graph = scene
    executed: list[tuple[Instruction, dict[str, Any]]] = []
    jobs: list[RenderJob] = []
    add_counter = 0
    for index, (instr, parsed_entries) in enumerate(parsed):
        entries = copy.deepcopy(parsed_entries)
        step_seed = seed * 100003 + round_no * 1009 + index
        if instr.agent is AgentKind.VEHICLE_DELETE:
            graph = _execute_delete(graph, entries, bank_map)
        elif instr.agent is AgentKind.MOTION:
            graph, created = _execute_motion(graph, entries, bank, bank_map,
                                             round_no, add_counter,
                                             step_seed)
            add_counter += len(created)
        elif instr.agent is AgentKind.ASSET_MANAGE:
            graph = _execute_recolor(graph, entries, bank_map)
        elif instr.agent is AgentKind.VIEW_ADJUST:
            graph = _execute_view(graph, entries)
        else:
            frames = entries["frames"]
            if frames is None:
                frames = [0, scene_horizon(graph)]
            frames = [int(frames[0]), int(frames[1])]
            entries["frames"] = frames
            kind = ("background"
                    if instr.agent is AgentKind.BACKGROUND_RENDER
                    else "foreground")
            jobs.append(RenderJob(kind, (frames[0], frames[1])))
        executed.append((instr, entries))

    log = [EditLogEntry(round=round_no, agent=instr.agent.value,
                        text=instr.text, config=entries)
           for instr, entries in executed]
    graph = graph.with_log_entries(log)
    return RoundResult(round=round_no, scene=graph, executed=executed,
                       render_jobs=jobs)
