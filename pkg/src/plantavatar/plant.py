"""The smart plant's personality: sensor universes, rule matrices, emotions.

A profile bundles the three input variables (brightness, soil moisture,
people present), the two affect outputs (arousal and valence on [0, 300]),
and six 3x3 rule matrices pairing the inputs. Affect scores above/below
the 150 midline (outside a small dead band) select one of five avatar
emotions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from .fuzzy import (
    INPUT_LABELS,
    OUTPUT_LABELS,
    ConfigurationError,
    FuzzyEngine,
    FuzzyRule,
    InvocationError,
    LinguisticVariable,
    auto_partition3,
)

BRIGHTNESS_RANGE = (0.0, 780.0)
MOISTURE_RANGE = (1800.0, 3100.0)
PEOPLE_RANGE = (0.0, 4.0)
AFFECT_RANGE = (0.0, 300.0)

NEUTRAL_SCORE = 150.0
DEFAULT_DEADBAND = 15.0

# Config sections may use the colloquial sensor names.
_VARIABLE_ALIASES = {
    "light": "brightness",
    "brightness": "brightness",
    "soil": "moisture",
    "moisture": "moisture",
    "people": "people",
}

# The three input pairings, in (row variable, column variable) order.
_MATRIX_PAIRS = (
    ("moisture", "brightness"),
    ("people", "brightness"),
    ("people", "moisture"),
)

_CELL_LABELS = {"L": "Low", "M": "Medium", "H": "High"}


class Emotion(Enum):
    """The five avatar states and their wire codes."""

    SAD = 1
    ANGRY = 2
    NORMAL = 3
    RELAXATION = 4
    HAPPY = 5

    @property
    def code(self) -> int:
        return self.value

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_code(cls, code: int) -> "Emotion":
        return cls(code)

    @classmethod
    def from_label(cls, label: str) -> "Emotion":
        return cls[label.upper()]


@dataclass(frozen=True)
class AffectScore:
    """Defuzzified arousal/valence; None marks an undefined dimension."""

    arousal: Optional[float]
    valence: Optional[float]

    def as_dict(self) -> dict:
        return {"arousal": self.arousal, "valence": self.valence}


@dataclass(frozen=True)
class SensorSnapshot:
    """One timestamped set of readings; None marks a never-seen channel."""

    ts: float
    brightness: Optional[float]
    moisture: Optional[float]
    people: Optional[int]

    def complete(self) -> bool:
        return self.brightness is not None and self.moisture is not None and self.people is not None

    def as_dict(self) -> dict:
        return {
            "ts": self.ts,
            "brightness": self.brightness,
            "moisture": self.moisture,
            "people": self.people,
        }


@dataclass(frozen=True)
class RuleMatrix:
    """3x3 grid of consequent labels over (row term, column term) pairs."""

    output: str
    rows: str
    cols: str
    cells: tuple[tuple[str, str, str], ...]

    def __post_init__(self) -> None:
        if self.output not in ("arousal", "valence"):
            raise ConfigurationError(f"matrix output must be arousal or valence, got {self.output!r}")
        if (self.rows, self.cols) not in _MATRIX_PAIRS:
            pairs = ", ".join(f"{r} x {c}" for r, c in _MATRIX_PAIRS)
            raise ConfigurationError(
                f"matrix pair {self.rows} x {self.cols} is not one of: {pairs}"
            )
        if len(self.cells) != 3 or any(len(row) != 3 for row in self.cells):
            raise ConfigurationError(f"matrix {self.key()} must be 3x3")
        for row in self.cells:
            for label in row:
                if label not in OUTPUT_LABELS:
                    raise ConfigurationError(
                        f"matrix {self.key()}: cell label {label!r} is not one of {OUTPUT_LABELS}"
                    )

    def key(self) -> str:
        return f"{self.output}: {self.rows} x {self.cols}"

    def rules(self) -> list[FuzzyRule]:
        out = []
        for i, row_label in enumerate(INPUT_LABELS):
            for j, col_label in enumerate(INPUT_LABELS):
                out.append(
                    FuzzyRule(
                        antecedents=((self.rows, row_label), (self.cols, col_label)),
                        consequent=(self.output, self.cells[i][j]),
                    )
                )
        return out


def _matrix(output: str, rows: str, cols: str, grid: str) -> RuleMatrix:
    """Build a matrix from a compact 'LMM/LLL/HMH' spec string."""
    cells = tuple(tuple(_CELL_LABELS[ch] for ch in row) for row in grid.split("/"))
    return RuleMatrix(output=output, rows=rows, cols=cols, cells=cells)


# Default personality. Comfortable mid conditions push arousal down and
# valence up; deprivation (dark, dry, lonely) or excess (flooded, crowded)
# push arousal up and valence down.
DEFAULT_MATRICES = (
    _matrix("arousal", "moisture", "brightness", "LMM/LLL/HMH"),
    _matrix("arousal", "people", "brightness", "LLL/LMM/HHH"),
    _matrix("arousal", "people", "moisture", "LLM/MLM/HMH"),
    _matrix("valence", "moisture", "brightness", "LLM/MHH/LMM"),
    _matrix("valence", "people", "brightness", "LMH/LMH/MMH"),
    _matrix("valence", "people", "moisture", "LHM/LHM/LML"),
)


@dataclass(frozen=True)
class PlantProfile:
    """Immutable plant configuration plus its compiled inference engine."""

    brightness: LinguisticVariable
    moisture: LinguisticVariable
    people: LinguisticVariable
    arousal: LinguisticVariable
    valence: LinguisticVariable
    matrices: tuple[RuleMatrix, ...]
    deadband: float = DEFAULT_DEADBAND
    moisture_inverted: bool = False
    _engine: FuzzyEngine = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.deadband < NEUTRAL_SCORE:
            raise ConfigurationError(f"deadband must be in [0, {NEUTRAL_SCORE}), got {self.deadband}")
        expected = {
            (output, rows, cols)
            for output in ("arousal", "valence")
            for rows, cols in _MATRIX_PAIRS
        }
        seen = {}
        for m in self.matrices:
            ident = (m.output, m.rows, m.cols)
            if ident in seen:
                raise ConfigurationError(f"duplicate matrix {m.key()}")
            seen[ident] = m
        missing = expected - set(seen)
        if missing:
            names = ", ".join(f"{o}: {r} x {c}" for o, r, c in sorted(missing))
            raise ConfigurationError(f"missing matrices: {names}")
        rules = [rule for m in self.matrices for rule in m.rules()]
        engine = FuzzyEngine(
            inputs=(self.brightness, self.moisture, self.people),
            outputs=(self.arousal, self.valence),
            rules=rules,
        )
        object.__setattr__(self, "_engine", engine)

    @property
    def engine(self) -> FuzzyEngine:
        return self._engine

    def input_variables(self) -> tuple[LinguisticVariable, ...]:
        return (self.brightness, self.moisture, self.people)


def default_profile(deadband: float = DEFAULT_DEADBAND) -> PlantProfile:
    return PlantProfile(
        brightness=auto_partition3("brightness", *BRIGHTNESS_RANGE),
        moisture=auto_partition3("moisture", *MOISTURE_RANGE),
        people=auto_partition3("people", *PEOPLE_RANGE),
        arousal=auto_partition3("arousal", *AFFECT_RANGE, labels=OUTPUT_LABELS),
        valence=auto_partition3("valence", *AFFECT_RANGE, labels=OUTPUT_LABELS),
        matrices=DEFAULT_MATRICES,
    )


def _resolve_variable(name: str, where: str) -> str:
    try:
        return _VARIABLE_ALIASES[name.lower()]
    except KeyError:
        raise ConfigurationError(f"{where}: unknown variable {name!r}") from None


def parse_profile(text: str, source: str = "<profile>") -> PlantProfile:
    """Parse the profile config format.

    Settings are `key value` lines; each `[output: rowvar x colvar]`
    section is followed by three rows of three L/M/H letters which replace
    that matrix wholesale. Anything not overridden keeps its default.
    """
    deadband = DEFAULT_DEADBAND
    moisture_inverted = False
    overrides: dict[tuple[str, str, str], RuleMatrix] = {}

    section: Optional[tuple[str, str, str]] = None
    section_rows: list[tuple[str, str, str]] = []
    section_where = ""

    def close_section() -> None:
        nonlocal section, section_rows
        if section is None:
            return
        if len(section_rows) != 3:
            raise ConfigurationError(
                f"{section_where}: expected 3 rows of 3 cells, got {len(section_rows)}"
            )
        output, rows_var, cols_var = section
        matrix = RuleMatrix(output=output, rows=rows_var, cols=cols_var, cells=tuple(section_rows))
        if (output, rows_var, cols_var) in overrides:
            raise ConfigurationError(f"{section_where}: duplicate matrix")
        overrides[(output, rows_var, cols_var)] = matrix
        section = None
        section_rows = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{line_no}"
        if line.startswith("["):
            close_section()
            if not line.endswith("]"):
                raise ConfigurationError(f"{where}: unterminated section header {line!r}")
            header = line[1:-1]
            if ":" not in header:
                raise ConfigurationError(
                    f"{where}: section header must look like [arousal: soil x light]"
                )
            output_part, pair_part = header.split(":", 1)
            output = output_part.strip().lower()
            if output not in ("arousal", "valence"):
                raise ConfigurationError(f"{where}: unknown output {output_part.strip()!r}")
            pair_tokens = pair_part.lower().split("x")
            if len(pair_tokens) != 2:
                raise ConfigurationError(f"{where}: section pair must be '<row> x <col>'")
            rows_var = _resolve_variable(pair_tokens[0].strip(), where)
            cols_var = _resolve_variable(pair_tokens[1].strip(), where)
            if (rows_var, cols_var) not in _MATRIX_PAIRS:
                pairs = ", ".join(f"{r} x {c}" for r, c in _MATRIX_PAIRS)
                raise ConfigurationError(
                    f"{where}: pair {rows_var} x {cols_var} is not one of: {pairs}"
                )
            section = (output, rows_var, cols_var)
            section_where = where
            continue
        if section is not None:
            tokens = line.replace(",", " ").split()
            if len(tokens) != 3:
                raise ConfigurationError(f"{where}: matrix rows take 3 cells, got {len(tokens)}")
            row = []
            for token in tokens:
                label = _CELL_LABELS.get(token.upper()) if len(token) == 1 else None
                if label is None:
                    label = token.capitalize() if token.capitalize() in OUTPUT_LABELS else None
                if label is None:
                    raise ConfigurationError(
                        f"{where}: cell {token!r} is not one of L/M/H (or Low/Medium/High)"
                    )
                row.append(label)
            section_rows.append(tuple(row))
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ConfigurationError(f"{where}: expected 'key value', got {line!r}")
        key, value = tokens
        key = key.lower()
        if key == "deadband":
            try:
                deadband = float(value)
            except ValueError:
                raise ConfigurationError(f"{where}: deadband must be a number, got {value!r}") from None
        elif key == "moisture_polarity":
            if value.lower() not in ("wet_high", "wet_low"):
                raise ConfigurationError(
                    f"{where}: moisture_polarity must be wet_high or wet_low, got {value!r}"
                )
            moisture_inverted = value.lower() == "wet_low"
        else:
            raise ConfigurationError(f"{where}: unknown setting {key!r}")
    close_section()

    matrices = []
    for default in DEFAULT_MATRICES:
        ident = (default.output, default.rows, default.cols)
        matrices.append(overrides.pop(ident, default))
    # overrides maps only canonical idents, so nothing can remain
    assert not overrides

    return PlantProfile(
        brightness=auto_partition3("brightness", *BRIGHTNESS_RANGE),
        moisture=auto_partition3("moisture", *MOISTURE_RANGE),
        people=auto_partition3("people", *PEOPLE_RANGE),
        arousal=auto_partition3("arousal", *AFFECT_RANGE, labels=OUTPUT_LABELS),
        valence=auto_partition3("valence", *AFFECT_RANGE, labels=OUTPUT_LABELS),
        matrices=tuple(matrices),
        deadband=deadband,
        moisture_inverted=moisture_inverted,
    )


def load_profile(path: Optional[str | Path]) -> PlantProfile:
    """Load a profile file; None falls back to the built-in defaults."""
    if path is None:
        return default_profile()
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read profile {p}: {exc}") from exc
    return parse_profile(text, source=str(p))


def normalize(value: float, var: LinguisticVariable) -> float:
    """Reading as a display percentage of the variable's universe."""
    span = var.umax - var.umin
    fraction = (var.clamp(value) - var.umin) / span
    return fraction * 100.0


def score_affect(snapshot: SensorSnapshot, profile: PlantProfile) -> AffectScore:
    """Run the profile's engine over one snapshot."""
    if not snapshot.complete():
        missing = [
            name for name in ("brightness", "moisture", "people")
            if getattr(snapshot, name) is None
        ]
        raise InvocationError(f"snapshot is missing readings: {missing}")
    moisture = snapshot.moisture
    if profile.moisture_inverted:
        moisture = MOISTURE_RANGE[0] + MOISTURE_RANGE[1] - moisture
    scores = profile.engine.infer(
        {
            "brightness": snapshot.brightness,
            "moisture": moisture,
            "people": float(snapshot.people),
        }
    )
    return AffectScore(arousal=scores["arousal"], valence=scores["valence"])


def classify(affect: AffectScore, deadband: float = DEFAULT_DEADBAND) -> Emotion:
    """Map an affect score onto one of the five emotions.

    A dimension is High above 150 + deadband, Low below 150 - deadband,
    and mid otherwise; undefined dimensions are mid. Any mid dimension
    lands on NORMAL.
    """

    def band(score: Optional[float]) -> str:
        if score is None:
            return "mid"
        if score > NEUTRAL_SCORE + deadband:
            return "High"
        if score < NEUTRAL_SCORE - deadband:
            return "Low"
        return "mid"

    valence_band = band(affect.valence)
    arousal_band = band(affect.arousal)
    table = {
        ("High", "Low"): Emotion.RELAXATION,
        ("High", "High"): Emotion.HAPPY,
        ("Low", "High"): Emotion.ANGRY,
        ("Low", "Low"): Emotion.SAD,
    }
    return table.get((valence_band, arousal_band), Emotion.NORMAL)
