"""Gain schemes and assessor-label aggregation."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

DEFAULT_UPGRADE_P = 0.2


class GainSchemeError(ValueError):
    pass


@dataclass(frozen=True)
class GainScheme:
    """Relevance level -> gain, with gain(L0) = 0 and gains non-decreasing in level."""

    name: str
    values: Mapping[int, float]

    def __post_init__(self):
        values = dict(self.values)
        values.setdefault(0, 0.0)
        if values[0] != 0:
            raise GainSchemeError(f"gain for L0 must be 0, got {values[0]}")
        prev = 0.0
        for level in sorted(values):
            gain = values[level]
            if level < 0:
                raise GainSchemeError(f"negative level {level}")
            if gain < 0:
                raise GainSchemeError(f"negative gain {gain} for L{level}")
            if gain < prev:
                raise GainSchemeError(f"gains must be non-decreasing in level (L{level}: {gain} < {prev})")
            prev = gain
        object.__setattr__(self, "values", MappingProxyType({k: float(values[k]) for k in sorted(values)}))

    @property
    def max_level(self) -> int:
        return max(self.values)

    def gain(self, level: int) -> float:
        try:
            return self.values[level]
        except KeyError:
            raise GainSchemeError(f"scheme {self.name!r} has no gain for L{level}") from None

    def __call__(self, level: int) -> float:
        return self.gain(level)


def gains_linear(max_level: int) -> GainScheme:
    if max_level < 1:
        raise GainSchemeError("max_level must be >= 1")
    return GainScheme("linear", {x: float(x) for x in range(max_level + 1)})


def gains_quadratic(max_level: int) -> GainScheme:
    if max_level < 1:
        raise GainSchemeError("max_level must be >= 1")
    return GainScheme("quadratic", {x: float(2**x - 1) for x in range(max_level + 1)})


def parse_gain_spec(spec: str, max_level: int) -> GainScheme:
    """``linear``, ``quadratic`` or an explicit ``level:gain`` list such as ``0:0,1:1,2:3``."""
    spec = spec.strip()
    if spec == "linear":
        return gains_linear(max(max_level, 1))
    if spec == "quadratic":
        return gains_quadratic(max(max_level, 1))
    table = {}
    for item in spec.split(","):
        try:
            level_tok, gain_tok = item.split(":")
            level, gain = int(level_tok), float(gain_tok)
        except ValueError:
            raise GainSchemeError(f"bad gain spec item {item!r}; want level:gain") from None
        if level in table:
            raise GainSchemeError(f"level {level} listed twice in gain spec")
        table[level] = gain
    return GainScheme("explicit", table)


def aggregate_sum(labels: Sequence, weights: Mapping) -> int:
    """Sum per-assessor points, e.g. AAAB with A=2, B=1 -> 7."""
    try:
        return sum(weights[label] for label in labels)
    except KeyError as err:
        raise ValueError(f"no weight for label {err.args[0]!r}") from None


def aggregate_average(labels: Sequence, weights: Mapping | None = None) -> float:
    if not labels:
        raise ValueError("at least one assessor label is required")
    if weights is None:
        scores = [float(x) for x in labels]
    else:
        try:
            scores = [float(weights[x]) for x in labels]
        except KeyError as err:
            raise ValueError(f"no weight for label {err.args[0]!r}") from None
    return sum(scores) / len(scores)


def aggregate_majority_l0_fallback(labels: Sequence[int]) -> int:
    """Strict-majority level; L0 whenever no level has more than half the votes."""
    if not labels:
        raise ValueError("at least one assessor label is required")
    level, votes = Counter(labels).most_common(1)[0]
    return level if 2 * votes > len(labels) else 0


@dataclass(frozen=True)
class UnanimityParams:
    n_assessors: int
    d_max: float
    p: float = DEFAULT_UPGRADE_P

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("upgrade strength p must be >= 0")
        if self.d_max < 0:
            raise ValueError("d_max must be >= 0")
        if self.n_assessors < 1:
            raise ValueError("need at least one assessor")


def unanimity_upgrade(gv: float, spread: float, params: UnanimityParams) -> float:
    """Raise ``gv`` by p * N * (D_max - D), where D is the max-min assessor spread."""
    if spread < 0 or spread > params.d_max:
        raise ValueError(f"assessor spread {spread} outside [0, {params.d_max}]")
    return gv + params.p * params.n_assessors * (params.d_max - spread)


def upgrade_labels(scores: Sequence[float], d_max: float, p: float = DEFAULT_UPGRADE_P) -> float:
    """Unanimity-aware gain from raw per-assessor scores (raw gain = their sum)."""
    params = UnanimityParams(len(scores), d_max, p)
    return unanimity_upgrade(sum(scores), max(scores) - min(scores), params)


def dedup_equivalence(
    ranking: Sequence[str],
    classes: Iterable[frozenset[str]],
    gains: Mapping[str, float],
) -> dict[str, float]:
    """Zero the gain of every class member ranked below the class's first occurrence."""
    adjusted = dict(gains)
    owner = {doc: k for k, members in enumerate(classes) for doc in members}
    claimed = set()
    for doc in ranking:
        k = owner.get(doc)
        if k is None:
            continue
        if k in claimed:
            adjusted[doc] = 0.0
        else:
            claimed.add(k)
    return adjusted
