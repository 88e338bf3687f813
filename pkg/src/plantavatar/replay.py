"""Deterministic scenario replay.

Replays run entirely on simulated time: the scenario walk applies events
and samples the environment once per simulated minute, every point is
scored through the profile, and the result is written as CSV (and
optionally JSONL history). Two runs of the same scenario and profile are
byte-identical.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .plant import PlantProfile
from .service import HistoryRecord, state_from_snapshot
from .sim import Scenario, iter_scenario, snapshot_of

CSV_COLUMNS = ("event", "people", "brightness", "moisture", "arousal", "valence", "state_code", "sim_time")

DEFAULT_SAMPLE_EVERY = 60.0


@dataclass
class ReplayResult:
    records: list[HistoryRecord]

    @property
    def event_records(self) -> dict[int, HistoryRecord]:
        return {r.event_index: r for r in self.records if r.event_index is not None}

    def state_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for record in self.records:
            label = record.state.emotion.label
            counts[label] = counts.get(label, 0) + 1
        return counts


def run_replay(
    scenario: Scenario,
    profile: PlantProfile,
    sample_every: float = DEFAULT_SAMPLE_EVERY,
) -> ReplayResult:
    """Walk the scenario and score every breakpoint."""
    records: list[HistoryRecord] = []
    seq = 0
    for point in iter_scenario(scenario, sample_every=sample_every):
        snapshot = snapshot_of(point.env, ts=point.sim_time)
        state = state_from_snapshot(snapshot, profile)
        seq += 1
        records.append(HistoryRecord(seq=seq, state=state, event_index=point.event_index))
    return ReplayResult(records=records)


def _format_affect(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.2f}"


def records_to_csv(records: list[HistoryRecord]) -> str:
    """Fixed-format CSV so goldens diff cleanly."""
    lines = [",".join(CSV_COLUMNS)]
    for record in records:
        state = record.state
        snapshot = state.snapshot
        lines.append(",".join((
            "" if record.event_index is None else str(record.event_index),
            "" if snapshot.people is None else str(snapshot.people),
            "" if snapshot.brightness is None else f"{snapshot.brightness:.1f}",
            "" if snapshot.moisture is None else f"{snapshot.moisture:.1f}",
            _format_affect(state.affect.arousal),
            _format_affect(state.affect.valence),
            str(state.emotion.code),
            f"{state.ts:.0f}",
        )))
    return "\n".join(lines) + "\n"


def write_csv(records: list[HistoryRecord], path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(records_to_csv(records))
    return p


def write_history(records: list[HistoryRecord], path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w") as fh:
        for record in records:
            fh.write(json.dumps(record.as_dict()) + "\n")
    return p


def read_history(path: str | Path) -> list[HistoryRecord]:
    records = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(HistoryRecord.from_dict(json.loads(line)))
    return records
