#!/usr/bin/env python3
"""Record real service responses for the frontend test suite.

Drives the two-round conversation the UI round-trip test replays, plus an
ungroundable command for the error path, and saves every body verbatim to
frontend/tests/fixtures/two_round_session.json. Rerun after changing the
service or the bundled scenes; the frontend tests consume these bytes as
the wire contract.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

from scenetalk.agents.backends import rule_backend
from scenetalk.service import create_app

OUT = Path(__file__).resolve().parents[1] / "frontend" / "tests" / "fixtures"

ROUND1 = ("Ego vehicle drives ahead slowly. Add a car to the close front "
          "that is moving ahead.")
ROUND2 = ("Modify the added car to turn left. Add a Chevrolet to the front "
          "of the added car. Add another vehicle to the left of the added "
          "Mini driving toward me.")
UNGROUNDABLE = "Remove the Lamborghini."


def main() -> None:
    client = TestClient(create_app(backend=rule_backend))
    fixture: dict = {"commands": {"round1": ROUND1, "round2": ROUND2,
                                  "ungroundable": UNGROUNDABLE}}

    create = client.post("/sessions", json={"map": "crossroad", "seed": 11})
    assert create.status_code == 201, create.text
    fixture["create"] = create.json()
    sid = fixture["create"]["session"]
    fixture["scene0"] = client.get(f"/sessions/{sid}/scene").json()

    for name, command in (("round1", ROUND1), ("round2", ROUND2)):
        resp = client.post(f"/sessions/{sid}/command",
                           json={"command": command})
        assert resp.status_code == 200, resp.text
        fixture[name] = {
            "command": resp.json(),
            "scene": client.get(f"/sessions/{sid}/scene").json(),
            "log": client.get(f"/sessions/{sid}/log").json(),
        }

    err = client.post(f"/sessions/{sid}/command",
                      json={"command": UNGROUNDABLE})
    assert err.status_code == 422, err.text
    fixture["error422"] = err.json()

    OUT.mkdir(parents=True, exist_ok=True)
    path = OUT / "two_round_session.json"
    path.write_text(json.dumps(fixture, indent=1, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
