"""Mamdani inference on three-term triangular partitions.

Every variable carries exactly three triangular terms over a closed
universe, produced by the equal-spaced auto partition (Poor/Average/Good
for inputs, Low/Medium/High for outputs). Rules AND their two antecedents
with min, consequents are clipped at the rule activation, aggregation is
pointwise max, and the crisp output is the centroid of the sampled
aggregate curve.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

INPUT_LABELS = ("Poor", "Average", "Good")
OUTPUT_LABELS = ("Low", "Medium", "High")

# Minimum resolution of an aggregated output curve. The default is ten
# samples per unit on a 300-unit universe: a 1-unit step leaves the
# centroid of a shoulder term ~1e-3 off its analytic value, which is the
# same order as the accuracy we promise callers.
MIN_CURVE_SAMPLES = 301
DEFAULT_CURVE_SAMPLES = 3001

_AREA_EPS = 1e-12


class ConfigurationError(ValueError):
    """Invalid membership function, variable, or rule wiring."""


class InvocationError(ValueError):
    """An inference call is missing a required input."""


@dataclass(frozen=True)
class TriangularMF:
    """Triangle with feet at a and c and peak at b; a <= b <= c.

    Degenerate shoulders (a == b or b == c) are allowed and evaluate to 1
    at the shared endpoint.
    """

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        if not (self.a <= self.b <= self.c):
            raise ConfigurationError(
                f"triangular MF requires a <= b <= c, got ({self.a}, {self.b}, {self.c})"
            )


def trimf(x: float, mf: TriangularMF) -> float:
    """Membership degree of x in a triangular term, in [0, 1]."""
    if x < mf.a or x > mf.c:
        return 0.0
    if x < mf.b:
        return (x - mf.a) / (mf.b - mf.a)
    if x > mf.b:
        return (mf.c - x) / (mf.c - mf.b)
    return 1.0


def trimf_curve(u: np.ndarray, mf: TriangularMF) -> np.ndarray:
    """Vectorised trimf over a sample grid."""
    out = np.zeros(u.shape, dtype=float)
    if mf.b > mf.a:
        rising = (u >= mf.a) & (u < mf.b)
        out[rising] = (u[rising] - mf.a) / (mf.b - mf.a)
    if mf.c > mf.b:
        falling = (u > mf.b) & (u <= mf.c)
        out[falling] = (mf.c - u[falling]) / (mf.c - mf.b)
    out[u == mf.b] = 1.0
    return out


@dataclass(frozen=True)
class LinguisticVariable:
    """Named universe with exactly three labelled triangular terms."""

    name: str
    umin: float
    umax: float
    terms: tuple[tuple[str, TriangularMF], ...]

    def __post_init__(self) -> None:
        if not self.umin < self.umax:
            raise ConfigurationError(
                f"variable {self.name!r}: universe [{self.umin}, {self.umax}] is empty"
            )
        if len(self.terms) != 3:
            raise ConfigurationError(
                f"variable {self.name!r}: expected exactly 3 terms, got {len(self.terms)}"
            )
        labels = [label for label, _ in self.terms]
        if len(set(labels)) != 3:
            raise ConfigurationError(f"variable {self.name!r}: duplicate term labels {labels}")
        for label, mf in self.terms:
            if mf.a < self.umin or mf.c > self.umax:
                raise ConfigurationError(
                    f"variable {self.name!r}: term {label!r} exceeds the universe"
                )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.terms)

    def term(self, label: str) -> TriangularMF:
        for name, mf in self.terms:
            if name == label:
                return mf
        raise ConfigurationError(f"variable {self.name!r} has no term {label!r}")

    def clamp(self, x: float) -> float:
        return min(max(x, self.umin), self.umax)


def auto_partition3(
    name: str,
    umin: float,
    umax: float,
    labels: Sequence[str] = INPUT_LABELS,
) -> LinguisticVariable:
    """Equal-spaced three-term split of [umin, umax].

    Shoulder terms peak at the universe ends, the middle term at the
    midpoint; together they sum to membership 1 everywhere.
    """
    if not umin < umax:
        raise ConfigurationError(f"auto partition needs umin < umax, got [{umin}, {umax}]")
    if len(labels) != 3:
        raise ConfigurationError(f"auto partition needs 3 labels, got {list(labels)}")
    mid = (umin + umax) / 2.0
    terms = (
        (labels[0], TriangularMF(umin, umin, mid)),
        (labels[1], TriangularMF(umin, mid, umax)),
        (labels[2], TriangularMF(mid, umax, umax)),
    )
    return LinguisticVariable(name=name, umin=umin, umax=umax, terms=terms)


def fuzzify(value: float, var: LinguisticVariable) -> dict[str, float]:
    """Per-term memberships of a crisp value, clamped to the universe."""
    x = var.clamp(value)
    return {label: trimf(x, mf) for label, mf in var.terms}


@dataclass(frozen=True)
class FuzzyRule:
    """IF a AND b THEN c, with exactly two antecedent (variable, term) pairs."""

    antecedents: tuple[tuple[str, str], tuple[str, str]]
    consequent: tuple[str, str]

    def __post_init__(self) -> None:
        if len(self.antecedents) != 2:
            raise ConfigurationError("a rule takes exactly two antecedents")
        (va, _), (vb, _) = self.antecedents
        if va == vb:
            raise ConfigurationError(f"rule antecedents must use distinct variables, got {va!r} twice")


def activate(rule: FuzzyRule, memberships: Mapping[str, Mapping[str, float]]) -> float:
    """Rule activation: min over the two antecedent term memberships."""
    degree = 1.0
    for var_name, term_label in rule.antecedents:
        try:
            vector = memberships[var_name]
        except KeyError:
            raise ConfigurationError(f"rule references unknown variable {var_name!r}") from None
        try:
            degree = min(degree, vector[term_label])
        except KeyError:
            raise ConfigurationError(
                f"rule references unknown term {term_label!r} of variable {var_name!r}"
            ) from None
    return degree


@dataclass(frozen=True, eq=False)
class AggregatedOutput:
    """Sampled max-aggregate of the clipped consequent sets for one output."""

    variable: str
    universe: np.ndarray
    curve: np.ndarray

    def __post_init__(self) -> None:
        if len(self.universe) < MIN_CURVE_SAMPLES:
            raise ConfigurationError(
                f"aggregate curve needs >= {MIN_CURVE_SAMPLES} samples, got {len(self.universe)}"
            )
        if len(self.universe) != len(self.curve):
            raise ConfigurationError("universe and curve sample counts differ")


def aggregate(
    activations: Sequence[tuple[FuzzyRule, float]],
    outvar: LinguisticVariable,
    samples: int = DEFAULT_CURVE_SAMPLES,
) -> AggregatedOutput:
    """Clip each rule's consequent at its activation and take the pointwise max.

    No activated rules yields the all-zero curve.
    """
    u = np.linspace(outvar.umin, outvar.umax, samples)
    curve = np.zeros(samples, dtype=float)
    for rule, degree in activations:
        var_name, term_label = rule.consequent
        if var_name != outvar.name:
            raise ConfigurationError(
                f"rule targets {var_name!r} but aggregation is over {outvar.name!r}"
            )
        if degree <= 0.0:
            continue
        mf = outvar.term(term_label)
        np.maximum(curve, np.minimum(degree, trimf_curve(u, mf)), out=curve)
    return AggregatedOutput(variable=outvar.name, universe=u, curve=curve)


def defuzz_centroid(agg: AggregatedOutput) -> Optional[float]:
    """Centroid of the aggregate curve, or None when its area is ~0.

    Callers are expected to map None onto the neutral state rather than
    treat it as an error.
    """
    area = float(np.trapezoid(agg.curve, agg.universe))
    if area < _AREA_EPS:
        return None
    moment = float(np.trapezoid(agg.curve * agg.universe, agg.universe))
    return moment / area


class FuzzyEngine:
    """A fixed set of variables and rules, evaluated as a pure function.

    Immutable after construction; concurrent infer() calls are safe.
    """

    def __init__(
        self,
        inputs: Sequence[LinguisticVariable],
        outputs: Sequence[LinguisticVariable],
        rules: Sequence[FuzzyRule],
    ) -> None:
        self.inputs = {var.name: var for var in inputs}
        self.outputs = {var.name: var for var in outputs}
        if len(self.inputs) != len(inputs) or len(self.outputs) != len(outputs):
            raise ConfigurationError("duplicate variable names")
        overlap = set(self.inputs) & set(self.outputs)
        if overlap:
            raise ConfigurationError(f"variables used as both input and output: {sorted(overlap)}")
        for rule in rules:
            for var_name, term_label in rule.antecedents:
                if var_name not in self.inputs:
                    raise ConfigurationError(
                        f"rule antecedent references unknown input {var_name!r}"
                    )
                self.inputs[var_name].term(term_label)
            out_name, out_term = rule.consequent
            if out_name not in self.outputs:
                raise ConfigurationError(f"rule consequent references unknown output {out_name!r}")
            self.outputs[out_name].term(out_term)
        self.rules = tuple(rules)

    def infer(
        self,
        values: Mapping[str, float],
        samples: int = DEFAULT_CURVE_SAMPLES,
    ) -> dict[str, Optional[float]]:
        """Crisp inputs to crisp outputs; None where no rule produced area."""
        missing = [name for name in self.inputs if name not in values]
        if missing:
            raise InvocationError(f"missing input value(s): {missing}")
        memberships = {name: fuzzify(values[name], var) for name, var in self.inputs.items()}
        results: dict[str, Optional[float]] = {}
        for out_name, outvar in self.outputs.items():
            fired = [
                (rule, activate(rule, memberships))
                for rule in self.rules
                if rule.consequent[0] == out_name
            ]
            agg = aggregate(fired, outvar, samples=samples)
            results[out_name] = defuzz_centroid(agg)
        return results
