"""Polling loop: degradation, change-only push, and persistence."""
import json
import time

import pytest
import requests

from plantavatar.plant import Emotion, SensorSnapshot, classify, default_profile
from plantavatar.service import (
    AvatarLoop,
    DevicePoller,
    HistoryRecord,
    ServiceConfig,
    Subscriber,
    load_service_config,
    state_from_snapshot,
)
from plantavatar.fuzzy import ConfigurationError


class FakePoller:
    """Deterministic poller for loop tests that need no sockets."""

    def __init__(self, snapshot: SensorSnapshot, stale: bool = False):
        self.snapshot = snapshot
        self.stale = stale

    def poll(self):
        return self.snapshot, self.stale


def healthy_snapshot(people=2, brightness=10.0, moisture=1900.0):
    return SensorSnapshot(ts=1000.0, brightness=brightness, moisture=moisture, people=people)


class TestStateFromSnapshot:
    def test_complete_snapshot_matches_classify(self, profile):
        state = state_from_snapshot(healthy_snapshot(), profile)
        assert state.emotion is classify(state.affect, profile.deadband)
        assert state.percent["people"] == pytest.approx(50.0)
        assert not state.stale

    def test_incomplete_snapshot_is_normal_undefined(self, profile):
        snapshot = SensorSnapshot(ts=0.0, brightness=None, moisture=None, people=None)
        state = state_from_snapshot(snapshot, profile, stale=True)
        assert state.emotion is Emotion.NORMAL
        assert state.affect.arousal is None
        assert state.affect.valence is None
        assert state.percent == {"brightness": None, "moisture": None, "people": None}
        assert state.stale


class TestPolling:
    def test_happy_path(self, cluster, profile):
        poller = DevicePoller(cluster.plant_url, cluster.people_url)
        loop = AvatarLoop(poller, profile)
        state = loop.poll_once()
        assert state.snapshot.complete()
        assert not state.stale
        assert state.emotion is classify(state.affect, profile.deadband)

    def test_people_outage_uses_last_known(self, cluster, profile):
        requests.post(
            f"{cluster.plant_url}/command", json={"action": "set_people", "value": 2}, timeout=2
        )
        time.sleep(0.1)
        poller = DevicePoller(cluster.plant_url, cluster.people_url)
        fresh = poller.poll()[0]
        assert fresh.people == 2
        cluster.stop_people_node()
        snapshot, stale = poller.poll()
        assert stale
        assert snapshot.people == 2  # last known value
        assert snapshot.brightness is not None  # plant node still live

    def test_cold_start_all_down(self, profile):
        poller = DevicePoller("http://127.0.0.1:1", "http://127.0.0.1:1")
        loop = AvatarLoop(poller, profile)
        state = loop.poll_once()
        assert state.stale
        assert state.emotion is Emotion.NORMAL
        assert state.affect.arousal is None and state.affect.valence is None


class TestChangeOnlyPush:
    def test_constant_environment_pushes_at_most_once(self, profile):
        loop = AvatarLoop(FakePoller(healthy_snapshot()), profile)
        sub = loop.subscribe()
        for _ in range(10):
            loop.tick()
        assert sub.queue.qsize() <= 1

    def test_change_pushes_within_one_tick(self, profile):
        poller = FakePoller(healthy_snapshot())
        loop = AvatarLoop(poller, profile)
        sub = loop.subscribe()
        loop.tick()
        assert sub.queue.qsize() == 1
        poller.snapshot = healthy_snapshot(people=0, brightness=700.0, moisture=2450.0)
        loop.tick()
        assert sub.queue.qsize() == 2
        first = sub.queue.get_nowait()
        second = sub.queue.get_nowait()
        assert first.state.emotion is not second.state.emotion

    def test_no_duplicate_consecutive_payloads(self, profile):
        poller = FakePoller(healthy_snapshot())
        loop = AvatarLoop(poller, profile)
        sub = loop.subscribe()
        for people in (2, 2, 0, 0, 2, 2):
            poller.snapshot = healthy_snapshot(people=people)
            loop.tick()
        keys = []
        while not sub.queue.empty():
            record = sub.queue.get_nowait()
            keys.append(loop._push_key(record))
        assert len(keys) >= 2
        assert all(a != b for a, b in zip(keys, keys[1:]))

    def test_stale_flip_counts_as_change(self, profile):
        poller = FakePoller(healthy_snapshot())
        loop = AvatarLoop(poller, profile)
        sub = loop.subscribe()
        loop.tick()
        poller.stale = True
        loop.tick()
        assert sub.queue.qsize() == 2

    def test_slow_subscriber_is_dropped(self, profile):
        loop = AvatarLoop(FakePoller(healthy_snapshot()), profile)
        sub = Subscriber(maxsize=2)
        with loop._subscribers_lock:
            loop._subscribers.append(sub)
        for people in (0, 1, 2, 3, 4):
            loop.poller.snapshot = healthy_snapshot(people=people)
            loop.tick()
        assert sub.dropped
        assert sub not in loop._subscribers


class TestPersistence:
    def test_history_appended_and_resumed(self, tmp_path, profile):
        path = tmp_path / "history.jsonl"
        loop = AvatarLoop(FakePoller(healthy_snapshot()), profile, history_path=path)
        for _ in range(3):
            loop.tick()
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 3
        assert [json.loads(line)["seq"] for line in lines] == [1, 2, 3]

        # a restarted service continues the sequence
        resumed = AvatarLoop(FakePoller(healthy_snapshot()), profile, history_path=path)
        record = resumed.tick()
        assert record.seq == 4
        assert [r.seq for r in resumed.history_since(0)] == [1, 2, 3, 4]

    def test_history_records_recompute_their_emotion(self, tmp_path, profile):
        path = tmp_path / "history.jsonl"
        loop = AvatarLoop(FakePoller(healthy_snapshot()), profile, history_path=path)
        loop.tick()
        payload = json.loads(path.read_text().strip())
        record = HistoryRecord.from_dict(payload)
        assert record.state.emotion is classify(record.state.affect, profile.deadband)

    def test_write_failure_does_not_stop_polling(self, tmp_path, profile):
        path = tmp_path / "not-a-dir" / "history.jsonl"
        loop = AvatarLoop(FakePoller(healthy_snapshot()), profile, history_path=path)
        record = loop.tick()  # logged, not raised
        assert record.seq == 1
        assert loop.current is record

    def test_history_since_future_seq_is_empty(self, profile):
        loop = AvatarLoop(FakePoller(healthy_snapshot()), profile)
        loop.tick()
        assert loop.history_since(999) == []


class TestLoopThread:
    def test_emits_every_interval_through_outage(self, cluster, profile):
        poller = DevicePoller(cluster.plant_url, cluster.people_url)
        loop = AvatarLoop(poller, profile, poll_interval=0.05)
        loop.start()
        try:
            time.sleep(0.2)
            cluster.stop_people_node()
            time.sleep(0.5)
            records = loop.history_since(0)
            stale = [r for r in records if r.state.stale]
            assert stale, "outage should mark states stale"
            # emissions continued: no gap much larger than the poll interval
            times = [r.state.ts for r in records]
            gaps = [b - a for a, b in zip(times, times[1:])]
            assert max(gaps) < 0.05 * 3
            # sequence numbers strictly increase
            seqs = [r.seq for r in records]
            assert seqs == sorted(set(seqs))
        finally:
            loop.stop()


class TestServiceConfig:
    def test_defaults(self):
        config = ServiceConfig()
        assert config.command_url == config.sensors_url
        assert config.poll_interval == 1.0

    def test_load_and_unknown_keys(self, tmp_path):
        path = tmp_path / "service.json"
        path.write_text(json.dumps({"poll_interval": 0.5, "api_port": 9999}))
        config = load_service_config(path)
        assert config.poll_interval == 0.5
        assert config.api_port == 9999

        path.write_text(json.dumps({"pollinterval": 0.5}))
        with pytest.raises(ConfigurationError, match="pollinterval"):
            load_service_config(path)

    def test_bad_json_rejected(self, tmp_path):
        path = tmp_path / "service.json"
        path.write_text("{nope")
        with pytest.raises(ConfigurationError, match="JSON"):
            load_service_config(path)

    def test_nonpositive_interval_rejected(self):
        with pytest.raises(ConfigurationError):
            ServiceConfig(poll_interval=0.0)
