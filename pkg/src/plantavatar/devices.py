"""HTTP facades for the simulated devices.

Two independent nodes mirror a sensor-hub/camera split: the plant node
serves brightness and soil moisture (and accepts steering commands), the
people node serves the visitor count. Each node can be stopped on its own
to exercise partial-outage handling. A single background thread owns the
environment; HTTP handlers talk to it through a command queue and read
immutable state snapshots.
"""
from __future__ import annotations

import json
import logging
import queue
import threading
import time
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from .sim import (
    ActionError,
    EnvironmentState,
    Scenario,
    apply_action,
    brightness_of,
    step,
    validate_action,
)

log = logging.getLogger(__name__)


def _iso_now() -> str:
    return datetime.now(timezone.utc).isoformat()


class DeviceCluster:
    """Owns the environment and its two HTTP nodes.

    The sim thread is the only writer: it integrates drying between ticks
    (scaled by time_scale) and applies queued commands as they arrive.
    Readers grab the current immutable EnvironmentState reference.
    """

    def __init__(
        self,
        initial: Optional[EnvironmentState] = None,
        time_scale: float = 1.0,
        tick: float = 0.2,
    ) -> None:
        self._env = initial if initial is not None else EnvironmentState()
        self.time_scale = time_scale
        self.tick = tick
        self._commands: queue.Queue = queue.Queue()
        self._stopping = threading.Event()
        self._sim_thread: Optional[threading.Thread] = None
        self._plant_server: Optional[ThreadingHTTPServer] = None
        self._people_server: Optional[ThreadingHTTPServer] = None
        self._threads: list[threading.Thread] = []
        self._scenario_thread: Optional[threading.Thread] = None

    # -- state access ---------------------------------------------------

    @property
    def env(self) -> EnvironmentState:
        return self._env

    def sensor_reading(self) -> dict:
        env = self._env
        return {"brightness": brightness_of(env), "moisture": env.moisture, "ts": _iso_now()}

    def people_reading(self) -> dict:
        return {"count": self._env.people, "ts": _iso_now()}

    def submit(self, action: str, value) -> None:
        """Validate a steering command and hand it to the sim thread."""
        validate_action(action, value)
        self._commands.put(("action", action, value))
        if self._sim_thread is None:
            # no loop running (tests drive the cluster directly)
            self._drain_commands()

    def _apply_command(self, command: tuple) -> None:
        if command[0] == "reset":
            self._env = command[1]
            self.time_scale = command[2]
            log.info("environment reset for scenario playback")
        else:
            _, action, value = command
            self._env = apply_action(self._env, action, value)
            log.info("applied %s %s", action, value)

    def _drain_commands(self) -> None:
        while True:
            try:
                command = self._commands.get_nowait()
            except queue.Empty:
                return
            self._apply_command(command)

    # -- lifecycle ------------------------------------------------------

    def start(self, plant_port: int = 0, people_port: int = 0, host: str = "127.0.0.1") -> None:
        self._plant_server = _serve(host, plant_port, _PlantHandler, self)
        self._people_server = _serve(host, people_port, _PeopleHandler, self)
        for server in (self._plant_server, self._people_server):
            t = threading.Thread(
                target=server.serve_forever, kwargs={"poll_interval": 0.05}, daemon=True
            )
            t.start()
            self._threads.append(t)
        self._sim_thread = threading.Thread(target=self._run_sim, daemon=True)
        self._sim_thread.start()

    def _run_sim(self) -> None:
        last = time.monotonic()
        while not self._stopping.is_set():
            try:
                command = self._commands.get(timeout=self.tick)
            except queue.Empty:
                command = None
            now = time.monotonic()
            dt = (now - last) * self.time_scale
            last = now
            if dt > 0:
                self._env = step(self._env, dt)
            if command is not None:
                self._apply_command(command)

    @property
    def plant_url(self) -> str:
        assert self._plant_server is not None
        host, port = self._plant_server.server_address[:2]
        return f"http://{host}:{port}"

    @property
    def people_url(self) -> str:
        assert self._people_server is not None
        host, port = self._people_server.server_address[:2]
        return f"http://{host}:{port}"

    def stop_plant_node(self) -> None:
        if self._plant_server is not None:
            self._plant_server.shutdown()
            self._plant_server.server_close()
            self._plant_server = None

    def stop_people_node(self) -> None:
        if self._people_server is not None:
            self._people_server.shutdown()
            self._people_server.server_close()
            self._people_server = None

    def stop(self) -> None:
        self._stopping.set()
        if self._sim_thread is not None:
            self._sim_thread.join(timeout=2.0)
            self._sim_thread = None
        self.stop_plant_node()
        self.stop_people_node()

    # -- scripted steering ----------------------------------------------

    def play_scenario(self, scenario: Scenario, block: bool = False) -> None:
        """Apply scenario events on wall time scaled by the scenario's factor.

        One simulated hour at time scale 60 finishes in one wall minute.
        """
        initial = EnvironmentState(
            lights_on=scenario.initial.lights_on,
            curtain_open=scenario.initial.curtain_open,
            moisture=scenario.initial.moisture,
            people=scenario.initial.people,
        )
        self._commands.put(("reset", initial, scenario.time_scale))
        if self._sim_thread is None:
            self._drain_commands()

        def run() -> None:
            started = time.monotonic()
            for event in scenario.events:
                wall_at = started + event.at / scenario.time_scale
                while not self._stopping.is_set():
                    remaining = wall_at - time.monotonic()
                    if remaining <= 0:
                        break
                    time.sleep(min(remaining, 0.1))
                if self._stopping.is_set():
                    return
                self.submit(event.action, event.value)

        self._scenario_thread = threading.Thread(target=run, daemon=True)
        self._scenario_thread.start()
        if block:
            self._scenario_thread.join()


def _serve(host: str, port: int, handler: type, cluster: DeviceCluster) -> ThreadingHTTPServer:
    server = ThreadingHTTPServer((host, port), handler)
    server.cluster = cluster  # type: ignore[attr-defined]
    server.daemon_threads = True
    return server


class _JsonHandler(BaseHTTPRequestHandler):
    # one request per connection (default HTTP/1.0): stopping a node must
    # refuse the very next poll, so keep-alive pooling is not wanted here
    @property
    def cluster(self) -> DeviceCluster:
        return self.server.cluster  # type: ignore[attr-defined]

    def send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def read_json(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        try:
            parsed = json.loads(raw or b"{}")
        except json.JSONDecodeError as exc:
            raise ActionError(f"body is not valid JSON: {exc}") from None
        if not isinstance(parsed, dict):
            raise ActionError("body must be a JSON object")
        return parsed

    def log_message(self, fmt: str, *args) -> None:
        log.debug("%s %s", self.address_string(), fmt % args)


class _PlantHandler(_JsonHandler):
    def do_GET(self) -> None:
        if self.path.split("?")[0] == "/sensors":
            self.send_json(200, self.cluster.sensor_reading())
        else:
            self.send_json(404, {"error": f"unknown path {self.path}"})

    def do_POST(self) -> None:
        if self.path.split("?")[0] != "/command":
            self.send_json(404, {"error": f"unknown path {self.path}"})
            return
        try:
            body = self.read_json()
            action = body.get("action")
            if not isinstance(action, str):
                raise ActionError("missing or non-string 'action'")
            self.cluster.submit(action, body.get("value"))
        except ActionError as exc:
            self.send_json(422, {"error": str(exc)})
            return
        self.send_json(200, {"ok": True})


class _PeopleHandler(_JsonHandler):
    def do_GET(self) -> None:
        if self.path.split("?")[0] == "/people":
            self.send_json(200, self.cluster.people_reading())
        else:
            self.send_json(404, {"error": f"unknown path {self.path}"})
