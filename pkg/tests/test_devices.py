"""The two HTTP device nodes and their outage behavior."""
import time

import pytest
import requests

from plantavatar.devices import DeviceCluster
from plantavatar.plant import BRIGHTNESS_RANGE, MOISTURE_RANGE
from plantavatar.sim import EnvironmentState


def wait_for(predicate, timeout=2.0, interval=0.02):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if predicate():
            return True
        time.sleep(interval)
    return predicate()


class TestEndpoints:
    def test_sensor_reading_schema(self, cluster):
        body = requests.get(f"{cluster.plant_url}/sensors", timeout=2).json()
        assert set(body) == {"brightness", "moisture", "ts"}
        assert BRIGHTNESS_RANGE[0] <= body["brightness"] <= BRIGHTNESS_RANGE[1]
        assert MOISTURE_RANGE[0] <= body["moisture"] <= MOISTURE_RANGE[1]
        assert "T" in body["ts"]  # ISO-8601

    def test_people_reading_schema(self, cluster):
        body = requests.get(f"{cluster.people_url}/people", timeout=2).json()
        assert set(body) == {"count", "ts"}
        assert 0 <= body["count"] <= 4

    def test_unknown_path_404(self, cluster):
        assert requests.get(f"{cluster.plant_url}/nope", timeout=2).status_code == 404

    def test_command_round_trip(self, cluster):
        response = requests.post(
            f"{cluster.plant_url}/command",
            json={"action": "set_people", "value": 3},
            timeout=2,
        )
        assert response.status_code == 200
        assert response.json() == {"ok": True}
        assert wait_for(
            lambda: requests.get(f"{cluster.people_url}/people", timeout=2).json()["count"] == 3
        )

    def test_water_command_raises_moisture(self, cluster):
        before = requests.get(f"{cluster.plant_url}/sensors", timeout=2).json()["moisture"]
        requests.post(
            f"{cluster.plant_url}/command", json={"action": "water", "value": 300}, timeout=2
        )
        assert wait_for(
            lambda: requests.get(f"{cluster.plant_url}/sensors", timeout=2).json()["moisture"]
            > before + 250
        )

    @pytest.mark.parametrize("body", [
        {"action": "set_people", "value": 9},
        {"action": "set_lights", "value": -1},
        {"action": "water", "value": -10},
        {"action": "levitate", "value": 1},
        {"action": "set_people"},
        {"value": 2},
    ])
    def test_invalid_command_422(self, cluster, body):
        response = requests.post(f"{cluster.plant_url}/command", json=body, timeout=2)
        assert response.status_code == 422
        assert "error" in response.json()

    def test_malformed_json_422(self, cluster):
        response = requests.post(
            f"{cluster.plant_url}/command",
            data=b"{nope",
            headers={"Content-Type": "application/json"},
            timeout=2,
        )
        assert response.status_code == 422


class TestOutage:
    def test_stopped_people_node_refuses_connections(self, cluster):
        people_url = cluster.people_url
        cluster.stop_people_node()
        with pytest.raises(requests.ConnectionError):
            requests.get(f"{people_url}/people", timeout=1)
        # the plant node is unaffected and state is intact
        body = requests.get(f"{cluster.plant_url}/sensors", timeout=2).json()
        assert MOISTURE_RANGE[0] <= body["moisture"] <= MOISTURE_RANGE[1]

    def test_stopped_plant_node_refuses_connections(self, cluster):
        plant_url = cluster.plant_url
        cluster.stop_plant_node()
        with pytest.raises(requests.ConnectionError):
            requests.get(f"{plant_url}/sensors", timeout=1)
        assert requests.get(f"{cluster.people_url}/people", timeout=2).status_code == 200

    def test_outage_does_not_corrupt_state(self, cluster):
        requests.post(
            f"{cluster.plant_url}/command", json={"action": "set_people", "value": 2}, timeout=2
        )
        wait_for(lambda: cluster.env.people == 2)
        cluster.stop_people_node()
        assert cluster.env.people == 2


class TestSimulationThread:
    def test_time_scaled_drying(self):
        cluster = DeviceCluster(
            initial=EnvironmentState(moisture=3100.0),
            time_scale=36000.0,  # 10 sim-hours per wall-second
            tick=0.02,
        )
        cluster.start()
        try:
            start = cluster.env.moisture
            assert wait_for(lambda: cluster.env.moisture < start - 50.0, timeout=3.0)
        finally:
            cluster.stop()

    def test_scenario_playback_applies_events(self):
        from plantavatar.sim import Scenario, ScenarioEvent

        scenario = Scenario(
            events=(
                ScenarioEvent(at=0.0, action="set_people", value=2),
                ScenarioEvent(at=30.0, action="set_lights", value=1),
            ),
            duration=60.0,
            time_scale=600.0,  # 30 sim-seconds in 50 wall-ms
        )
        cluster = DeviceCluster(tick=0.02)
        cluster.start()
        try:
            cluster.play_scenario(scenario)
            assert wait_for(lambda: cluster.env.people == 2 and cluster.env.lights_on == 1)
        finally:
            cluster.stop()
