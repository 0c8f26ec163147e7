import threading

import pytest
from fastapi.testclient import TestClient

from ldekit.service import create_app

from conftest import FIXTURES


@pytest.fixture(scope="module")
def client():
    app = create_app(FIXTURES)
    with TestClient(app) as c:
        yield c


class TestModels:
    def test_listing_sorted_by_id(self, client):
        body = client.get("/api/models").json()
        ids = [m["id"] for m in body]
        assert ids == sorted(ids)
        assert {"id": "coffee-machine", "modelType": "statechart"} in body
        assert {"id": "treasure-hunt", "modelType": "webstory"} in body

    def test_model_document(self, client):
        body = client.get("/api/models/coffee-machine").json()
        assert body["modelType"] == "statechart"
        assert {n["id"] for n in body["nodes"]} >= {"On", "Off", "Paused"}

    def test_unknown_model(self, client):
        assert client.get("/api/models/ghost").status_code == 404


class TestStatechartSessions:
    def test_create_session(self, client):
        r = client.post("/api/statechart/coffee-machine/sessions")
        assert r.status_code == 201
        body = r.json()
        assert body["kind"] == "statechart"
        assert body["configuration"]["activeStates"] == ["Off"]
        assert body["configuration"]["env"] == {"beans": 2}
        assert not body["configuration"]["terminated"]

    def test_session_lookup(self, client):
        created = client.post("/api/statechart/coffee-machine/sessions").json()
        fetched = client.get(f"/api/sessions/{created['sessionId']}").json()
        assert fetched == created

    def test_unknown_session(self, client):
        assert client.get("/api/sessions/nope").status_code == 404

    def test_fire_stop_sequence(self, client):
        session = client.post("/api/statechart/coffee-machine/sessions").json()
        sid = session["sessionId"]
        for trigger, expected in [
            ("Power", ["Idle", "On"]),
            ("Brew", ["Grinding", "Heating", "On", "Preparing"]),
            ("Stop", ["Paused"]),
        ]:
            r = client.post(f"/api/sessions/{sid}/fire",
                            json={"trigger": trigger})
            assert r.status_code == 200
            assert r.json()["configuration"]["activeStates"] == expected
        body = r.json()
        assert body["configuration"]["history"] == {"On": ["Preparing"]}
        assert body["event"]["takenTransitions"] == ["t_stop"]

    def test_fire_unknown_trigger(self, client):
        session = client.post("/api/statechart/coffee-machine/sessions").json()
        r = client.post(f"/api/sessions/{session['sessionId']}/fire",
                        json={"trigger": "Nope"})
        assert r.status_code == 400

    def test_fire_malformed_body(self, client):
        session = client.post("/api/statechart/coffee-machine/sessions").json()
        r = client.post(f"/api/sessions/{session['sessionId']}/fire",
                        json={"nope": 1})
        assert r.status_code == 400

    def test_fire_after_termination_conflicts(self, client):
        session = client.post("/api/statechart/coffee-machine/sessions").json()
        sid = session["sessionId"]
        for trigger in ("Power", "Stop", "PowerOff"):
            assert client.post(f"/api/sessions/{sid}/fire",
                               json={"trigger": trigger}).status_code == 200
        r = client.post(f"/api/sessions/{sid}/fire", json={"trigger": "Power"})
        assert r.status_code == 409

    def test_log_replays_the_run(self, client):
        session = client.post("/api/statechart/coffee-machine/sessions").json()
        sid = session["sessionId"]
        for trigger in ("Power", "Brew"):
            client.post(f"/api/sessions/{sid}/fire", json={"trigger": trigger})
        log = client.get(f"/api/sessions/{sid}/log").json()
        assert log["kind"] == "statechart"
        assert [e["event"]["firedTrigger"] for e in log["events"]] == \
            ["Power", "Brew"]

    def test_click_on_statechart_session_rejected(self, client):
        session = client.post("/api/statechart/coffee-machine/sessions").json()
        r = client.post(f"/api/sessions/{session['sessionId']}/click",
                        json={"clickArea": "areaA"})
        assert r.status_code == 400


class TestWebstorySessions:
    def test_create_and_play(self, client):
        session = client.post("/api/webstory/treasure-hunt/sessions").json()
        assert session["kind"] == "webstory"
        assert session["state"]["currentScreen"] == "screen1"
        sid = session["sessionId"]
        for area, screen in [("areaA", "screen2"), ("areaC", "screen3"),
                             ("areaE", "screen1"), ("areaB", "screen4")]:
            r = client.post(f"/api/sessions/{sid}/click",
                            json={"clickArea": area})
            assert r.status_code == 200
            assert r.json()["state"]["currentScreen"] == screen
        assert r.json()["state"]["finished"]
        assert r.json()["state"]["valuation"] == {"key": True}

    def test_wrong_screen_click(self, client):
        session = client.post("/api/webstory/treasure-hunt/sessions").json()
        r = client.post(f"/api/sessions/{session['sessionId']}/click",
                        json={"clickArea": "areaC"})
        assert r.status_code == 400

    def test_statechart_session_for_webstory_model_404(self, client):
        r = client.post("/api/statechart/treasure-hunt/sessions")
        assert r.status_code == 404


class TestServiceProperties:
    def test_restart_replay_reproduces_state(self, client):
        session = client.post("/api/statechart/coffee-machine/sessions").json()
        sid = session["sessionId"]
        triggers = ["Power", "Brew", "GrindDone", "HeatDone", "Done"]
        final = None
        for trigger in triggers:
            final = client.post(f"/api/sessions/{sid}/fire",
                                json={"trigger": trigger}).json()

        replay_app = create_app(FIXTURES)
        with TestClient(replay_app) as fresh:
            replay = fresh.post(
                "/api/statechart/coffee-machine/sessions").json()
            rid = replay["sessionId"]
            for trigger in triggers:
                last = fresh.post(f"/api/sessions/{rid}/fire",
                                  json={"trigger": trigger}).json()
        assert last["configuration"] == final["configuration"]

    def test_parallel_sessions_do_not_interfere(self, client):
        sids = [client.post("/api/statechart/coffee-machine/sessions")
                .json()["sessionId"] for _ in range(4)]
        errors = []

        def drive(sid, triggers):
            try:
                for trigger in triggers:
                    r = client.post(f"/api/sessions/{sid}/fire",
                                    json={"trigger": trigger})
                    assert r.status_code == 200
            except Exception as exc:  # noqa: BLE001
                errors.append(exc)

        plans = [["Power", "Brew"], ["Power"], ["Power", "Stop"],
                 ["Power", "Brew", "Stop"]]
        threads = [threading.Thread(target=drive, args=(sid, plan))
                   for sid, plan in zip(sids, plans)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
        expected = [["Grinding", "Heating", "On", "Preparing"],
                    ["Idle", "On"], ["Paused"], ["Paused"]]
        for sid, states in zip(sids, expected):
            body = client.get(f"/api/sessions/{sid}").json()
            assert body["configuration"]["activeStates"] == states

    def test_assets_mounted(self, client):
        r = client.get("/assets/img/cabin.png")
        assert r.status_code == 200
        assert r.content.startswith(b"\x89PNG")
