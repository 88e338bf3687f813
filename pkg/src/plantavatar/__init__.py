"""Smart-plant avatar runtime.

Simulated IoT sensors feed a Mamdani fuzzy engine that scores arousal and
valence; the scores map onto five avatar emotions served over HTTP and a
WebSocket push channel, with deterministic scenario replay for testing.
"""

from .fuzzy import (
    ConfigurationError,
    FuzzyEngine,
    FuzzyRule,
    InvocationError,
    LinguisticVariable,
    TriangularMF,
    aggregate,
    auto_partition3,
    defuzz_centroid,
    fuzzify,
    trimf,
)
from .plant import (
    AffectScore,
    Emotion,
    PlantProfile,
    RuleMatrix,
    SensorSnapshot,
    classify,
    default_profile,
    load_profile,
    normalize,
    parse_profile,
    score_affect,
)
from .sim import (
    ActionError,
    EnvironmentState,
    Scenario,
    ScenarioError,
    ScenarioEvent,
    apply_action,
    brightness_of,
    load_scenario,
    parse_scenario,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "ActionError",
    "AffectScore",
    "ConfigurationError",
    "Emotion",
    "EnvironmentState",
    "FuzzyEngine",
    "FuzzyRule",
    "InvocationError",
    "LinguisticVariable",
    "PlantProfile",
    "RuleMatrix",
    "Scenario",
    "ScenarioError",
    "ScenarioEvent",
    "SensorSnapshot",
    "TriangularMF",
    "aggregate",
    "apply_action",
    "auto_partition3",
    "brightness_of",
    "classify",
    "default_profile",
    "defuzz_centroid",
    "fuzzify",
    "load_profile",
    "load_scenario",
    "normalize",
    "parse_profile",
    "parse_scenario",
    "score_affect",
    "step",
    "trimf",
]
