"""Virtual plant corner: lamps, a curtain, drying soil, passing visitors.

The environment is a tiny physics-lite model. Soil moisture decays
exponentially toward the dry floor, brightness is an additive function of
lit lamps and the curtain, and people only change when told to. Scenario
files script timed changes against this model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterator, Optional, Union

from .plant import BRIGHTNESS_RANGE, MOISTURE_RANGE, SensorSnapshot

# Drying time constant: ~3 days without water lands the soil deep in the
# dry band (two time constants).
TAU_DRY_S = 36.0 * 3600.0

BRIGHTNESS_BASE = 10.0
BRIGHTNESS_PER_LAMP = 330.0
BRIGHTNESS_CURTAIN = 110.0
MAX_LAMPS = 2
MAX_PEOPLE = 4

# One press of the UI watering button adds this many raw moisture units.
WATERING_DEFAULT_AMOUNT = 600.0

ACTIONS = ("set_lights", "set_curtain", "water", "set_people")


class ActionError(ValueError):
    """A steering action carried an out-of-bounds or malformed parameter."""


class ScenarioError(ValueError):
    """A scenario file failed to parse or violates ordering constraints."""


@dataclass(frozen=True)
class EnvironmentState:
    """Single source of truth for the simulated plant corner."""

    lights_on: int = 0
    curtain_open: bool = False
    moisture: float = 2450.0
    people: int = 0
    sim_clock: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "moisture", _clamp(self.moisture, *MOISTURE_RANGE))
        object.__setattr__(self, "people", int(_clamp(self.people, 0, MAX_PEOPLE)))
        object.__setattr__(self, "lights_on", int(_clamp(self.lights_on, 0, MAX_LAMPS)))


def _clamp(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


def brightness_of(env: EnvironmentState) -> float:
    """Additive light model: base glow + lamps + daylight through the curtain."""
    level = BRIGHTNESS_BASE + BRIGHTNESS_PER_LAMP * env.lights_on
    if env.curtain_open:
        level += BRIGHTNESS_CURTAIN
    return _clamp(level, *BRIGHTNESS_RANGE)


def snapshot_of(env: EnvironmentState, ts: Optional[float] = None) -> SensorSnapshot:
    return SensorSnapshot(
        ts=env.sim_clock if ts is None else ts,
        brightness=brightness_of(env),
        moisture=env.moisture,
        people=env.people,
    )


def step(env: EnvironmentState, dt: float, tau_dry: float = TAU_DRY_S) -> EnvironmentState:
    """Advance the environment by dt seconds.

    Moisture decays exponentially toward the dry floor; the decay is
    composable, so stepping twice by dt/2 equals one step by dt. People
    and lighting only change through actions.
    """
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    if dt == 0:
        return env
    floor = MOISTURE_RANGE[0]
    moisture = floor + (env.moisture - floor) * math.exp(-dt / tau_dry)
    return replace(env, moisture=moisture, sim_clock=env.sim_clock + dt)


def validate_action(action: str, value) -> None:
    """Reject out-of-bounds steering parameters before they touch the state."""
    if action == "set_lights":
        if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value <= MAX_LAMPS:
            raise ActionError(f"set_lights takes an integer 0..{MAX_LAMPS}, got {value!r}")
    elif action == "set_people":
        if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value <= MAX_PEOPLE:
            raise ActionError(f"set_people takes an integer 0..{MAX_PEOPLE}, got {value!r}")
    elif action == "set_curtain":
        if not isinstance(value, bool):
            raise ActionError(f"set_curtain takes a boolean, got {value!r}")
    elif action == "water":
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not value > 0:
            raise ActionError(f"water takes a positive amount of raw units, got {value!r}")
    else:
        raise ActionError(f"unknown action {action!r}; expected one of {ACTIONS}")


def apply_action(env: EnvironmentState, action: str, value) -> EnvironmentState:
    """Apply one validated steering action; watering clamps at the wet ceiling."""
    validate_action(action, value)
    if action == "set_lights":
        return replace(env, lights_on=value)
    if action == "set_people":
        return replace(env, people=value)
    if action == "set_curtain":
        return replace(env, curtain_open=value)
    return replace(env, moisture=_clamp(env.moisture + value, *MOISTURE_RANGE))


@dataclass(frozen=True)
class ScenarioEvent:
    """One timed action: at `at` sim-seconds, do `action(value)`."""

    at: float
    action: str
    value: Union[int, float, bool]

    def __post_init__(self) -> None:
        if self.at < 0:
            raise ScenarioError(f"event time must be >= 0, got {self.at}")
        try:
            validate_action(self.action, self.value)
        except ActionError as exc:
            raise ScenarioError(str(exc)) from None

    def describe(self) -> str:
        if self.action == "set_curtain":
            value = "open" if self.value else "closed"
        else:
            value = self.value
        return f"{self.action} {value}"


@dataclass(frozen=True)
class Scenario:
    """Ordered timed events plus the initial environment they run against."""

    events: tuple[ScenarioEvent, ...]
    duration: float
    time_scale: float = 1.0
    initial: EnvironmentState = EnvironmentState()

    def __post_init__(self) -> None:
        times = [e.at for e in self.events]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ScenarioError("events must be sorted by time")
        if times and self.duration < times[-1]:
            raise ScenarioError(
                f"duration {self.duration} is before the last event at {times[-1]}"
            )
        if self.time_scale <= 0:
            raise ScenarioError(f"time scale must be > 0, got {self.time_scale}")


def _parse_bool(token: str) -> Optional[bool]:
    t = token.lower()
    if t in ("open", "on", "true", "1"):
        return True
    if t in ("closed", "close", "off", "false", "0"):
        return False
    return None


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    """Parse the line-oriented scenario format.

    Directives: `duration S`, `timescale K`, `init <field> <value>`.
    Event lines: `<offset-seconds> <action> <value>`. Comments run from
    `#` to end of line.
    """
    duration: Optional[float] = None
    time_scale = 1.0
    init_kwargs: dict = {}
    events: list[ScenarioEvent] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{line_no}"
        tokens = line.split()
        head = tokens[0].lower()

        if head == "duration":
            duration = _require_number(tokens, 1, where, "duration")
        elif head == "timescale":
            time_scale = _require_number(tokens, 1, where, "timescale")
        elif head == "init":
            if len(tokens) != 3:
                raise ScenarioError(f"{where}: init takes a field and a value")
            field_name, value = tokens[1].lower(), tokens[2]
            if field_name == "lights":
                init_kwargs["lights_on"] = _int_or_error(value, where, "lights")
            elif field_name == "curtain":
                flag = _parse_bool(value)
                if flag is None:
                    raise ScenarioError(f"{where}: curtain must be open or closed, got {value!r}")
                init_kwargs["curtain_open"] = flag
            elif field_name == "moisture":
                init_kwargs["moisture"] = _float_or_error(value, where, "moisture")
            elif field_name == "people":
                init_kwargs["people"] = _int_or_error(value, where, "people")
            else:
                raise ScenarioError(f"{where}: unknown init field {tokens[1]!r}")
        else:
            if len(tokens) != 3:
                raise ScenarioError(
                    f"{where}: event lines look like '<offset> <action> <value>', got {line!r}"
                )
            at = _float_or_error(tokens[0], where, "event offset")
            action = tokens[1].lower()
            if action not in ACTIONS:
                raise ScenarioError(f"{where}: unknown action {tokens[1]!r}")
            value: Union[int, float, bool]
            if action == "set_curtain":
                flag = _parse_bool(tokens[2])
                if flag is None:
                    raise ScenarioError(f"{where}: set_curtain takes open/closed, got {tokens[2]!r}")
                value = flag
            elif action == "water":
                value = _float_or_error(tokens[2], where, "water amount")
            else:
                value = _int_or_error(tokens[2], where, action)
            try:
                events.append(ScenarioEvent(at=at, action=action, value=value))
            except ScenarioError as exc:
                raise ScenarioError(f"{where}: {exc}") from None

    if duration is None:
        duration = events[-1].at if events else 0.0
    try:
        return Scenario(
            events=tuple(events),
            duration=duration,
            time_scale=time_scale,
            initial=EnvironmentState(**init_kwargs),
        )
    except ScenarioError as exc:
        raise ScenarioError(f"{source}: {exc}") from None


def _require_number(tokens: list[str], index: int, where: str, what: str) -> float:
    if len(tokens) != index + 1:
        raise ScenarioError(f"{where}: {what} takes a single number")
    return _float_or_error(tokens[index], where, what)


def _float_or_error(token: str, where: str, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ScenarioError(f"{where}: {what} must be a number, got {token!r}") from None


def _int_or_error(token: str, where: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ScenarioError(f"{where}: {what} must be an integer, got {token!r}") from None


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {p}: {exc}") from exc
    return parse_scenario(text, source=str(p))


@dataclass(frozen=True)
class ScenarioPoint:
    """One breakpoint of a scenario walk: the state right after `sim_time`."""

    sim_time: float
    env: EnvironmentState
    event_index: Optional[int]  # 1-based; None for plain samples
    event: Optional[ScenarioEvent]


def iter_scenario(scenario: Scenario, sample_every: float = 60.0) -> Iterator[ScenarioPoint]:
    """Walk a scenario on simulated time, yielding events and samples.

    Yields a point for every applied event and one per sampling period;
    when an event lands exactly on a sampling boundary only the event
    point is emitted. Purely simulated time, so the walk is deterministic
    and as fast as the interpreter allows.
    """
    if sample_every <= 0:
        raise ScenarioError(f"sample interval must be > 0, got {sample_every}")

    env = replace(scenario.initial, sim_clock=0.0)
    breakpoints: dict[float, list[int]] = {}
    for idx, event in enumerate(scenario.events, start=1):
        breakpoints.setdefault(event.at, []).append(idx)
    n_samples = int(math.floor(scenario.duration / sample_every + 1e-9))
    sample_times = {round(i * sample_every, 9) for i in range(n_samples + 1)}
    all_times = sorted(set(breakpoints) | sample_times)

    now = 0.0
    for t in all_times:
        if t > scenario.duration:
            break
        env = step(env, t - now)
        now = t
        if t in breakpoints:
            for idx in breakpoints[t]:
                event = scenario.events[idx - 1]
                env = apply_action(env, event.action, event.value)
                yield ScenarioPoint(sim_time=t, env=env, event_index=idx, event=event)
        else:
            yield ScenarioPoint(sim_time=t, env=env, event_index=None, event=None)
