"""HTTP/WS surface: /state, /history, /live, /env/command."""
import time

import pytest
from fastapi.testclient import TestClient

from plantavatar.api import create_app
from plantavatar.plant import SensorSnapshot
from plantavatar.service import AvatarLoop, DevicePoller

from test_service import FakePoller, healthy_snapshot


@pytest.fixture
def fake_loop(profile):
    poller = FakePoller(healthy_snapshot())
    loop = AvatarLoop(poller, profile)
    loop.tick()
    return loop


@pytest.fixture
def client(fake_loop):
    return TestClient(create_app(fake_loop))


STATE_KEYS = {"seq", "ts", "snapshot", "affect", "emotion", "percent", "stale"}


class TestState:
    def test_schema(self, client):
        body = client.get("/state").json()
        assert STATE_KEYS <= set(body)
        assert set(body["snapshot"]) == {"ts", "brightness", "moisture", "people"}
        assert set(body["affect"]) == {"arousal", "valence"}
        assert set(body["emotion"]) == {"label", "code"}
        assert body["emotion"]["code"] in (1, 2, 3, 4, 5)

    def test_matches_latest_record(self, client, fake_loop):
        record = fake_loop.tick()
        assert client.get("/state").json() == record.as_dict()

    def test_no_state_yet_503(self, profile):
        loop = AvatarLoop(FakePoller(healthy_snapshot()), profile)
        app_client = TestClient(create_app(loop))
        assert app_client.get("/state").status_code == 503


class TestHistory:
    def test_since_zero_returns_everything(self, client, fake_loop):
        fake_loop.tick()
        fake_loop.tick()
        records = client.get("/history", params={"since": 0}).json()
        assert [r["seq"] for r in records] == [1, 2, 3]

    def test_since_cursor(self, client, fake_loop):
        fake_loop.tick()
        records = client.get("/history", params={"since": 1}).json()
        assert [r["seq"] for r in records] == [2]

    def test_future_seq_empty(self, client):
        assert client.get("/history", params={"since": 10_000}).json() == []


class TestLive:
    def test_greeting_then_change_pushes(self, client, fake_loop):
        with client.websocket_connect("/live") as ws:
            greeting = ws.receive_json()
            assert greeting["seq"] == fake_loop.current.seq
            # a state change lands on the socket
            fake_loop.poller.snapshot = healthy_snapshot(people=0, brightness=700.0,
                                                         moisture=2450.0)
            fake_loop.tick()
            pushed = ws.receive_json()
            assert pushed["seq"] == fake_loop.current.seq
            assert pushed["emotion"]["label"] != greeting["emotion"]["label"]

    def test_constant_environment_no_extra_push(self, client, fake_loop):
        with client.websocket_connect("/live") as ws:
            ws.receive_json()
            for _ in range(10):
                fake_loop.tick()
            fake_loop.poller.snapshot = healthy_snapshot(people=4)
            fake_loop.tick()
            pushed = ws.receive_json()  # only the real change arrives next
            assert pushed["snapshot"]["people"] == 4


class TestCommandProxy:
    def test_round_trip_through_devices(self, cluster, profile):
        poller = DevicePoller(cluster.plant_url, cluster.people_url)
        loop = AvatarLoop(poller, profile, command_url=cluster.plant_url)
        loop.tick()
        client = TestClient(create_app(loop))

        before = loop.current.state.snapshot.moisture
        response = client.post("/env/command", json={"action": "water", "value": 600})
        assert response.status_code == 200
        # visible within two poll cycles
        deadline = time.monotonic() + 2.0
        raised = False
        while time.monotonic() < deadline and not raised:
            loop.tick()
            raised = loop.current.state.snapshot.moisture > before + 500
            time.sleep(0.02)
        assert raised

    def test_invalid_command_passes_422_through(self, cluster, profile):
        poller = DevicePoller(cluster.plant_url, cluster.people_url)
        loop = AvatarLoop(poller, profile, command_url=cluster.plant_url)
        loop.tick()
        client = TestClient(create_app(loop))
        response = client.post("/env/command", json={"action": "set_people", "value": 99})
        assert response.status_code == 422
        assert "error" in response.json()

    def test_malformed_body_422(self, client):
        response = client.post("/env/command", content=b"{nope",
                               headers={"Content-Type": "application/json"})
        assert response.status_code == 422

    def test_unreachable_devices_502(self, profile):
        loop = AvatarLoop(FakePoller(healthy_snapshot()), profile,
                          command_url="http://127.0.0.1:1")
        loop.tick()
        client = TestClient(create_app(loop))
        response = client.post("/env/command", json={"action": "water", "value": 600})
        assert response.status_code == 502

    def test_viewer_mode_404(self, client):
        response = client.post("/env/command", json={"action": "water", "value": 600})
        assert response.status_code == 404
