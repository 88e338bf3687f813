"""Polling, inference, history, and push fan-out for the avatar.

One loop thread polls the device nodes, scores the snapshot through the
plant profile, and appends the result to an append-only JSONL history.
Subscribers get a push only when something meaningful changed (emotion,
staleness, or the integer-rounded affect). A slow subscriber is dropped,
never waited on.
"""
from __future__ import annotations

import json
import logging
import queue
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import requests

from .fuzzy import ConfigurationError
from .plant import (
    AffectScore,
    Emotion,
    PlantProfile,
    SensorSnapshot,
    classify,
    normalize,
    score_affect,
)

log = logging.getLogger(__name__)

DEFAULT_POLL_INTERVAL = 1.0
REQUEST_TIMEOUT = 2.0
SUBSCRIBER_QUEUE_SIZE = 64


@dataclass
class ServiceConfig:
    """Wiring for a live service run, loaded from a JSON file."""

    sensors_url: str = "http://127.0.0.1:9001"
    people_url: str = "http://127.0.0.1:9002"
    command_url: Optional[str] = None  # defaults to sensors_url
    poll_interval: float = DEFAULT_POLL_INTERVAL
    profile_path: Optional[str] = None
    history_path: Optional[str] = None
    api_host: str = "127.0.0.1"
    api_port: int = 8080
    static_dir: Optional[str] = None
    builtin_devices: bool = False
    scenario_path: Optional[str] = None
    time_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.poll_interval <= 0:
            raise ConfigurationError(f"poll_interval must be > 0, got {self.poll_interval}")
        if self.command_url is None:
            self.command_url = self.sensors_url


def load_service_config(path: str | Path) -> ServiceConfig:
    p = Path(path)
    try:
        raw = json.loads(p.read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {p} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config {p} must be a JSON object")
    known = set(ServiceConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigurationError(f"config {p}: unknown keys {sorted(unknown)}")
    return ServiceConfig(**raw)


@dataclass(frozen=True)
class AvatarState:
    """What the avatar knows at one instant."""

    ts: float
    snapshot: SensorSnapshot
    affect: AffectScore
    emotion: Emotion
    percent: dict
    stale: bool = False

    def as_dict(self) -> dict:
        return {
            "ts": self.ts,
            "snapshot": self.snapshot.as_dict(),
            "affect": self.affect.as_dict(),
            "emotion": {"label": self.emotion.label, "code": self.emotion.code},
            "percent": dict(self.percent),
            "stale": self.stale,
        }


@dataclass(frozen=True)
class HistoryRecord:
    seq: int
    state: AvatarState
    event_index: Optional[int] = None  # set by replay, None in live mode

    def as_dict(self) -> dict:
        payload = {"seq": self.seq, **self.state.as_dict()}
        if self.event_index is not None:
            payload["event"] = self.event_index
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "HistoryRecord":
        snapshot = SensorSnapshot(
            ts=payload["snapshot"]["ts"],
            brightness=payload["snapshot"]["brightness"],
            moisture=payload["snapshot"]["moisture"],
            people=payload["snapshot"]["people"],
        )
        state = AvatarState(
            ts=payload["ts"],
            snapshot=snapshot,
            affect=AffectScore(
                arousal=payload["affect"]["arousal"],
                valence=payload["affect"]["valence"],
            ),
            emotion=Emotion.from_code(payload["emotion"]["code"]),
            percent=payload.get("percent", {}),
            stale=payload.get("stale", False),
        )
        return cls(seq=payload["seq"], state=state, event_index=payload.get("event"))


def state_from_snapshot(
    snapshot: SensorSnapshot,
    profile: PlantProfile,
    stale: bool = False,
) -> AvatarState:
    """Score one snapshot; incomplete snapshots land on NORMAL, undefined."""
    if snapshot.complete():
        affect = score_affect(snapshot, profile)
    else:
        affect = AffectScore(arousal=None, valence=None)
    emotion = classify(affect, deadband=profile.deadband)
    percent = {
        "brightness": None if snapshot.brightness is None
        else normalize(snapshot.brightness, profile.brightness),
        "moisture": None if snapshot.moisture is None
        else normalize(snapshot.moisture, profile.moisture),
        "people": None if snapshot.people is None
        else normalize(float(snapshot.people), profile.people),
    }
    return AvatarState(
        ts=snapshot.ts,
        snapshot=snapshot,
        affect=affect,
        emotion=emotion,
        percent=percent,
        stale=stale,
    )


class DevicePoller:
    """Fetches readings over HTTP, falling back to the last good value."""

    def __init__(self, sensors_url: str, people_url: str, timeout: float = REQUEST_TIMEOUT):
        self.sensors_url = sensors_url.rstrip("/")
        self.people_url = people_url.rstrip("/")
        self.timeout = timeout
        self._last_sensors: Optional[dict] = None
        self._last_people: Optional[dict] = None

    def poll(self) -> tuple[SensorSnapshot, bool]:
        """One round of device queries. Returns (snapshot, stale)."""
        stale = False
        try:
            response = requests.get(f"{self.sensors_url}/sensors", timeout=self.timeout)
            response.raise_for_status()
            self._last_sensors = response.json()
        except (requests.RequestException, ValueError) as exc:
            log.warning("plant node unreachable: %s", exc)
            stale = True
        try:
            response = requests.get(f"{self.people_url}/people", timeout=self.timeout)
            response.raise_for_status()
            self._last_people = response.json()
        except (requests.RequestException, ValueError) as exc:
            log.warning("people node unreachable: %s", exc)
            stale = True
        sensors = self._last_sensors or {}
        people = self._last_people or {}
        snapshot = SensorSnapshot(
            ts=time.time(),
            brightness=sensors.get("brightness"),
            moisture=sensors.get("moisture"),
            people=people.get("count"),
        )
        return snapshot, stale


class Subscriber:
    """Bounded mailbox for one push-channel consumer."""

    def __init__(self, maxsize: int = SUBSCRIBER_QUEUE_SIZE):
        self.queue: queue.Queue = queue.Queue(maxsize=maxsize)
        self.dropped = False

    def offer(self, record: HistoryRecord) -> None:
        try:
            self.queue.put_nowait(record)
        except queue.Full:
            self.dropped = True


class AvatarLoop:
    """Single-writer polling loop with atomic reads for API consumers."""

    def __init__(
        self,
        poller: DevicePoller,
        profile: PlantProfile,
        poll_interval: float = DEFAULT_POLL_INTERVAL,
        history_path: Optional[str | Path] = None,
        command_url: Optional[str] = None,
    ) -> None:
        self.poller = poller
        self.profile = profile
        self.poll_interval = poll_interval
        self.command_url = command_url.rstrip("/") if command_url else None
        self.history_path = Path(history_path) if history_path else None
        self._history: list[HistoryRecord] = []
        self._history_lock = threading.Lock()
        self._seq = 0
        self._current: Optional[HistoryRecord] = None
        self._last_push_key = None
        self._subscribers: list[Subscriber] = []
        self._subscribers_lock = threading.Lock()
        self._stopping = threading.Event()
        self._thread: Optional[threading.Thread] = None
        if self.history_path is not None:
            self._resume_history()

    def _resume_history(self) -> None:
        if not self.history_path.exists():
            return
        count = 0
        with self.history_path.open() as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    record = HistoryRecord.from_dict(json.loads(line))
                except (ValueError, KeyError) as exc:
                    log.warning("skipping corrupt history line: %s", exc)
                    continue
                self._history.append(record)
                self._seq = max(self._seq, record.seq)
                count += 1
        if count:
            log.info("resumed history at seq %d (%d records)", self._seq, count)

    # -- polling --------------------------------------------------------

    def poll_once(self) -> AvatarState:
        snapshot, stale = self.poller.poll()
        return state_from_snapshot(snapshot, self.profile, stale=stale)

    def tick(self) -> HistoryRecord:
        """One poll cycle: score, record, and push if changed."""
        state = self.poll_once()
        self._seq += 1
        record = HistoryRecord(seq=self._seq, state=state)
        with self._history_lock:
            self._history.append(record)
        self._current = record
        self._persist(record)
        self._push_if_changed(record)
        return record

    def _persist(self, record: HistoryRecord) -> None:
        if self.history_path is None:
            return
        try:
            with self.history_path.open("a") as fh:
                fh.write(json.dumps(record.as_dict()) + "\n")
        except OSError as exc:
            # history is best-effort; polling must not stop
            log.error("cannot append history: %s", exc)

    def _push_key(self, record: HistoryRecord):
        affect = record.state.affect
        return (
            record.state.emotion.code,
            record.state.stale,
            None if affect.arousal is None else round(affect.arousal),
            None if affect.valence is None else round(affect.valence),
        )

    def _push_if_changed(self, record: HistoryRecord) -> None:
        key = self._push_key(record)
        if key == self._last_push_key:
            return
        self._last_push_key = key
        with self._subscribers_lock:
            subscribers = list(self._subscribers)
        for sub in subscribers:
            sub.offer(record)
            if sub.dropped:
                self.unsubscribe(sub)
                log.warning("dropped a slow push subscriber")

    # -- lifecycle ------------------------------------------------------

    def start(self) -> None:
        self.tick()  # populate state before anyone asks
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()

    def _run(self) -> None:
        while not self._stopping.wait(self.poll_interval):
            try:
                self.tick()
            except Exception:
                log.exception("poll cycle failed; continuing")

    def stop(self) -> None:
        self._stopping.set()
        if self._thread is not None:
            self._thread.join(timeout=self.poll_interval + 2.0)
            self._thread = None

    # -- readers --------------------------------------------------------

    @property
    def current(self) -> Optional[HistoryRecord]:
        return self._current

    def history_since(self, seq: int) -> list[HistoryRecord]:
        with self._history_lock:
            return [r for r in self._history if r.seq > seq]

    def subscribe(self) -> Subscriber:
        sub = Subscriber()
        with self._subscribers_lock:
            self._subscribers.append(sub)
        return sub

    def unsubscribe(self, sub: Subscriber) -> None:
        with self._subscribers_lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)

    # -- steering proxy ---------------------------------------------------

    def submit_command(self, body: dict) -> tuple[int, dict]:
        """Forward a steering command to the device command endpoint."""
        if self.command_url is None:
            return 404, {"error": "no command endpoint configured"}
        try:
            response = requests.post(
                f"{self.command_url}/command", json=body, timeout=REQUEST_TIMEOUT
            )
        except requests.RequestException as exc:
            return 502, {"error": f"device command endpoint unreachable: {exc}"}
        try:
            payload = response.json()
        except ValueError:
            payload = {"error": "device returned a non-JSON response"}
        return response.status_code, payload
