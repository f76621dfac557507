"""HTTP facade over editing sessions.

Each session owns an immutable scene graph that commands replace
atomically: a failed command leaves the stored scene untouched and maps
to a structured error (400 bad inputs, 404 unknown session, 409 busy,
422 ungroundable command). Responses carry no timestamps, and session
ids are a plain counter, so replays are byte-reproducible.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field as dc_field
from typing import Optional

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .agents import (
    Backend,
    BackendError,
    EmptyDecomposition,
    SchemaViolation,
    UnresolvedReference,
    backend_from_env,
    execute_round,
)
from .bundles import default_rig, load_bank, load_scene_template
from .field import VoxelGrid, load_grid
from .motion import DegenerateInput, NoCandidate
from .raster import (
    image_from_array,
    png_bytes,
    render_camera_frame,
    render_topdown,
)
from .scene import AssetRecord, NoMatch, OutOfRange, SceneGraph, canonical_json

# command failures that mean "the request cannot be grounded in this scene"
_UNGROUNDABLE = (EmptyDecomposition, SchemaViolation, UnresolvedReference,
                 NoCandidate, NoMatch, OutOfRange, DegenerateInput)


class SessionRequest(BaseModel):
    map: str = "straight"
    assets: Optional[str] = None
    field: Optional[str] = None
    seed: int = 0


class CommandRequest(BaseModel):
    command: str


@dataclass
class Session:
    id: str
    scene: SceneGraph
    bank: tuple[AssetRecord, ...]
    bank_map: dict[str, AssetRecord]
    grid: Optional[VoxelGrid]
    seed: int
    lock: threading.Lock = dc_field(default_factory=threading.Lock)


def create_app(backend: Optional[Backend] = None) -> FastAPI:
    """Build the API app; pass a backend to bypass the environment."""
    app = FastAPI(title="scenetalk")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    sessions: dict[str, Session] = {}
    counter = itertools.count(1)
    app.state.sessions = sessions

    backend_box: dict[str, Optional[Backend]] = {"value": backend}

    def _backend() -> Backend:
        if backend_box["value"] is None:
            backend_box["value"] = backend_from_env()
        return backend_box["value"]

    def _get(sid: str) -> Session:
        session = sessions.get(sid)
        if session is None:
            raise HTTPException(404, f"no session {sid!r}")
        return session

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "sessions": len(sessions)}

    @app.post("/sessions", status_code=201)
    def create_session(req: SessionRequest) -> dict:
        try:
            lane_map, background, ego = load_scene_template(req.map)
            bank = load_bank(req.assets)
            grid = load_grid(req.field) if req.field else None
        except FileNotFoundError as exc:
            raise HTTPException(400, str(exc)) from exc
        sid = f"s-{next(counter):04d}"
        scene = SceneGraph(field_ref=req.field or "none", lane_map=lane_map,
                           rig=default_rig(), ego_pose=ego,
                           background_vehicles=background)
        sessions[sid] = Session(id=sid, scene=scene, bank=bank,
                                bank_map={a.id: a for a in bank},
                                grid=grid, seed=req.seed)
        return {
            "session": sid,
            "map": lane_map.name,
            "round": 0,
            "scene_digest": scene.digest(),
            "links": {
                "command": f"/sessions/{sid}/command",
                "scene": f"/sessions/{sid}/scene",
                "log": f"/sessions/{sid}/log",
                "render": f"/sessions/{sid}/render?kind=topdown&frame=0",
            },
        }

    @app.post("/sessions/{sid}/command")
    def run_command(sid: str, req: CommandRequest) -> dict:
        session = _get(sid)
        if not session.lock.acquire(blocking=False):
            raise HTTPException(409, f"session {sid} is busy")
        try:
            try:
                result = execute_round(req.command, session.scene,
                                       session.bank, _backend(),
                                       seed=session.seed)
            except _UNGROUNDABLE as exc:
                raise HTTPException(422, str(exc)) from exc
            except BackendError as exc:
                raise HTTPException(502, str(exc)) from exc
            session.scene = result.scene
            return {
                "session": sid,
                "round": result.round,
                "scene_digest": result.scene.digest(),
                "instructions": [
                    {"agent": instr.agent.value, "text": instr.text,
                     "config": cfg}
                    for instr, cfg in result.executed
                ],
                "render_jobs": [{"kind": j.kind, "frames": list(j.frames)}
                                for j in result.render_jobs],
                "render": {
                    "topdown": f"/sessions/{sid}/render?kind=topdown&frame=0",
                    "camera": f"/sessions/{sid}/render?kind=camera&frame=0",
                },
            }
        finally:
            session.lock.release()

    @app.get("/sessions/{sid}/scene")
    def get_scene(sid: str) -> Response:
        session = _get(sid)
        return Response(canonical_json(session.scene.to_dict()),
                        media_type="application/json")

    @app.get("/sessions/{sid}/log")
    def get_log(sid: str) -> dict:
        session = _get(sid)
        return {"session": sid,
                "entries": [e.to_dict() for e in session.scene.edit_log]}

    @app.get("/sessions/{sid}/render")
    def render(sid: str, kind: str = Query("topdown"),
               frame: int = Query(0)) -> Response:
        session = _get(sid)
        if kind not in ("topdown", "camera"):
            raise HTTPException(
                400, f"kind must be 'topdown' or 'camera', got {kind!r}")
        if frame < 0:
            raise HTTPException(400, "frame must be >= 0")
        if kind == "topdown":
            img = render_topdown(session.scene, session.bank_map,
                                 frame=frame)
        else:
            ldr = render_camera_frame(session.scene, session.bank_map,
                                      session.grid, frame=frame)
            img = image_from_array(ldr)
        return Response(png_bytes(img), media_type="image/png")

    return app


app = create_app()
