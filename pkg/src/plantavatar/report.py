"""Figures rendered next to the delimited output.

Two plots summarise a run: the arousal/valence traces against the 150
midline, and the emotion state codes as a step chart with event markers.
Both work for replay results and for exported live history.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .plant import AFFECT_RANGE, DEFAULT_DEADBAND, NEUTRAL_SCORE, Emotion
from .service import HistoryRecord

AFFECT_FIGURE = "affect_timeline.png"
STATES_FIGURE = "emotion_states.png"


def _minutes(records: list[HistoryRecord]) -> list[float]:
    t0 = records[0].state.ts
    return [(r.state.ts - t0) / 60.0 for r in records]


def render_affect_timeline(records: list[HistoryRecord], path: Path,
                           deadband: float = DEFAULT_DEADBAND) -> None:
    xs = _minutes(records)
    arousal = [r.state.affect.arousal for r in records]
    valence = [r.state.affect.valence for r in records]

    fig, ax = plt.subplots(figsize=(9, 4))
    ax.plot(xs, arousal, label="arousal", color="#d62728", linewidth=1.6)
    ax.plot(xs, valence, label="valence", color="#1f77b4", linewidth=1.6)
    ax.axhline(NEUTRAL_SCORE, color="gray", linestyle="--", linewidth=1.0)
    ax.axhspan(NEUTRAL_SCORE - deadband, NEUTRAL_SCORE + deadband,
               color="gray", alpha=0.12, label="neutral band")
    for record in records:
        if record.event_index is not None:
            ax.axvline(record.state.ts / 60.0 - records[0].state.ts / 60.0,
                       color="black", alpha=0.15, linewidth=0.8)
    ax.set_xlabel("minutes")
    ax.set_ylabel("score")
    ax.set_ylim(AFFECT_RANGE[0] - 10, AFFECT_RANGE[1] + 10)
    ax.set_title("Arousal and valence")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_state_chart(records: list[HistoryRecord], path: Path) -> None:
    xs = _minutes(records)
    codes = [r.state.emotion.code for r in records]

    fig, ax = plt.subplots(figsize=(9, 3.2))
    ax.step(xs, codes, where="post", color="#2ca02c", linewidth=1.8)
    for record, x in zip(records, xs):
        if record.event_index is not None:
            ax.annotate(str(record.event_index), (x, record.state.emotion.code),
                        textcoords="offset points", xytext=(0, 8),
                        fontsize=7, ha="center", color="black")
    ax.set_yticks([e.code for e in Emotion])
    ax.set_yticklabels([f"{e.code} {e.label}" for e in Emotion], fontsize=8)
    ax.set_ylim(0.5, 5.5)
    ax.set_xlabel("minutes")
    ax.set_title("Avatar emotion state")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report(records: list[HistoryRecord], outdir: str | Path,
                  deadband: float = DEFAULT_DEADBAND) -> list[Path]:
    """Write both figures into outdir; returns the created paths."""
    if not records:
        return []
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    affect_path = out / AFFECT_FIGURE
    states_path = out / STATES_FIGURE
    render_affect_timeline(records, affect_path, deadband=deadband)
    render_state_chart(records, states_path)
    return [affect_path, states_path]
