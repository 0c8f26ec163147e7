#!/usr/bin/env python3
"""Record real service exchanges as replayable fixtures for the UI tests.

Run from the repository root after changing models or the service:

    python3 frontend/scripts/capture-fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

from ldekit.service import create_app

ROOT = Path(__file__).resolve().parent.parent.parent
MODEL_DIR = ROOT / "tests" / "fixtures"
OUT_DIR = ROOT / "frontend" / "tests" / "fixtures"


class Recorder:
    def __init__(self, client: TestClient):
        self.client = client
        self.exchanges = []

    def request(self, method: str, path: str, body=None):
        if method == "GET":
            response = self.client.get(path)
        else:
            response = self.client.post(path, json=body)
        payload = response.json()
        self.exchanges.append({
            "method": method,
            "path": path,
            "body": body,
            "status": response.status_code,
            "response": payload,
        })
        return payload


def capture_statechart(client: TestClient, triggers) -> dict:
    r = Recorder(client)
    r.request("GET", "/api/models")
    r.request("GET", "/api/models/coffee-machine")
    session = r.request("POST", "/api/statechart/coffee-machine/sessions")
    sid = session["sessionId"]
    for trigger in triggers:
        r.request("POST", f"/api/sessions/{sid}/fire", {"trigger": trigger})
    r.request("GET", f"/api/sessions/{sid}")
    return {"exchanges": r.exchanges}


def capture_webstory(client: TestClient, clicks, name: str) -> dict:
    r = Recorder(client)
    r.request("GET", "/api/models")
    r.request("GET", "/api/models/treasure-hunt")
    session = r.request("POST", "/api/webstory/treasure-hunt/sessions")
    sid = session["sessionId"]
    for area in clicks:
        r.request("POST", f"/api/sessions/{sid}/click", {"clickArea": area})
    r.request("GET", f"/api/sessions/{sid}")
    return {"exchanges": r.exchanges}


SEQUENCES = {
    "statechart.json": ["Power", "Brew", "Stop"],
    "statechart_seq2.json": ["Power", "Brew", "GrindDone", "HeatDone", "Done"],
    "statechart_seq3.json": ["Power", "Stop", "Resume", "Brew"],
}


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    scenarios = {}
    for name, triggers in SEQUENCES.items():
        with TestClient(create_app(MODEL_DIR)) as client:
            scenarios[name] = capture_statechart(client, triggers)
    with TestClient(create_app(MODEL_DIR)) as client:
        scenarios["webstory_withkey.json"] = capture_webstory(
            client, ["areaA", "areaC", "areaE", "areaB"], "withkey")
    with TestClient(create_app(MODEL_DIR)) as client:
        scenarios["webstory_nokey.json"] = capture_webstory(
            client, ["areaB"], "nokey")
    for name, data in scenarios.items():
        path = OUT_DIR / name
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        print(f"wrote {path.relative_to(ROOT)} "
              f"({len(data['exchanges'])} exchanges)")


if __name__ == "__main__":
    main()
