"""Single-intent ranked retrieval measures over a gained ranked list.

Every measure takes a ``ScoredList``. Measures normalised by the ideal list
raise ``UndefinedTopicError`` for topics without relevant documents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import accumulate
from typing import Iterable, Mapping, Optional, Sequence

from .gains import GainScheme, dedup_equivalence

DEFAULT_BETA = 1.0
DEFAULT_LOG_BASE = 2.0
DEFAULT_ERR_BASE = 2.0

UNIFORM_RELEVANT = "uniform-over-relevant"
UNIFORM_ABOVE_RP = "uniform-over-relevant-above-rp"
STOP_AT_L = "stop-at-l"
STOP_AT_R1 = "stop-at-r1"
BLENDED_RATIO = "blended-ratio"
PRECISION = "precision"
RECIPROCAL_RANK = "reciprocal-rank"


class UndefinedTopicError(ValueError):
    """The measure is undefined for this topic (no relevant documents)."""


@dataclass(frozen=True)
class ScoredList:
    """Per-rank quantities of a system ranking, aligned with the topic's ideal list.

    Ranks are 1-based in the docs; tuples are 0-based. ``levels`` and
    ``ideal_levels`` are only needed by ERR and may be None when gains were
    supplied directly.
    """

    gains: tuple[float, ...]
    relevant: tuple[bool, ...]
    ideal_gains: tuple[float, ...]
    docs: tuple[str, ...] = ()
    levels: Optional[tuple[int, ...]] = None
    ideal_levels: Optional[tuple[int, ...]] = None
    max_level: Optional[int] = None

    def __post_init__(self):
        if len(self.gains) != len(self.relevant):
            raise ValueError("gains and relevance flags differ in length")
        if any(g < 0 for g in self.gains) or any(g < 0 for g in self.ideal_gains):
            raise ValueError("gains must be non-negative")
        if any(a < b for a, b in zip(self.ideal_gains, self.ideal_gains[1:])):
            raise ValueError("ideal gains must be non-increasing")
        object.__setattr__(self, "cum_relevant", tuple(accumulate(int(f) for f in self.relevant)))
        object.__setattr__(self, "cum_gain", tuple(accumulate(self.gains)))
        object.__setattr__(self, "ideal_cum_gain", tuple(accumulate(self.ideal_gains)))

    def __len__(self) -> int:
        return len(self.gains)

    @property
    def n_relevant(self) -> int:
        """R, the number of known relevant documents (the ideal list's length)."""
        return len(self.ideal_gains)

    def g(self, r: int) -> float:
        return self.gains[r - 1] if r <= len(self.gains) else 0.0

    def C(self, r: int) -> int:
        if r <= 0 or not self.gains:
            return 0
        return self.cum_relevant[min(r, len(self.gains)) - 1]

    def cg(self, r: int) -> float:
        if r <= 0 or not self.gains:
            return 0.0
        return self.cum_gain[min(r, len(self.gains)) - 1]

    def ideal_g(self, r: int) -> float:
        return self.ideal_gains[r - 1] if r <= len(self.ideal_gains) else 0.0

    def ideal_cg(self, r: int) -> float:
        if r <= 0 or not self.ideal_gains:
            return 0.0
        return self.ideal_cum_gain[min(r, len(self.ideal_gains)) - 1]

    def relevant_ranks(self, cutoff: Optional[int] = None) -> list[int]:
        n = len(self.relevant) if cutoff is None else min(cutoff, len(self.relevant))
        return [r for r in range(1, n + 1) if self.relevant[r - 1]]

    def require_relevant(self):
        if self.n_relevant == 0:
            raise UndefinedTopicError("topic has no relevant documents")


def _ideal_order(gains: Mapping[str, float], relevant: Iterable[str]) -> list[str]:
    # equal gains are ordered by document id for determinism
    return sorted(relevant, key=lambda d: (-gains[d], d))


def scored_list_from_gains(
    ranking: Sequence[str],
    gains: Mapping[str, float],
    relevant: Optional[Iterable[str]] = None,
    *,
    levels: Optional[Mapping[str, int]] = None,
    max_level: Optional[int] = None,
    ideal_pool: Optional[Iterable[str]] = None,
    condensed: bool = False,
) -> ScoredList:
    """Build a ScoredList from per-document real-valued gains.

    ``gains`` covers every judged document. ``relevant`` defaults to the
    documents with positive gain. ``ideal_pool`` restricts which relevant
    documents enter the ideal list (default: all of them).
    """
    rel = {d for d, g in gains.items() if g > 0} if relevant is None else set(relevant)
    if condensed:
        ranking = [d for d in ranking if d in gains]
    pool = rel if ideal_pool is None else rel & set(ideal_pool)
    ideal = _ideal_order(gains, pool)
    return ScoredList(
        gains=tuple(float(gains.get(d, 0.0)) for d in ranking),
        relevant=tuple(d in rel for d in ranking),
        ideal_gains=tuple(float(gains[d]) for d in ideal),
        docs=tuple(ranking),
        levels=None if levels is None else tuple(levels.get(d, 0) for d in ranking),
        ideal_levels=None if levels is None else tuple(levels[d] for d in ideal),
        max_level=max_level,
    )


def build_scored_list(
    ranking: Sequence[str],
    judgments: Mapping[str, int],
    scheme: GainScheme,
    condensed: bool = False,
    classes: Iterable[frozenset[str]] = (),
) -> ScoredList:
    """Gain a ranking against one topic's graded judgments.

    Unjudged documents get gain 0 and are nonrelevant, or are dropped first
    when ``condensed``. A document is relevant iff its level is above L0.
    With equivalence classes only the first-ranked member of a class earns
    credit, and the ideal list holds one (most relevant) member per class.
    """
    if condensed:
        ranking = [d for d in ranking if d in judgments]
    gains = {d: scheme.gain(x) for d, x in judgments.items()}
    relevant = {d for d, x in judgments.items() if x > 0}
    classes = [c for c in classes if c]
    if not classes:
        return scored_list_from_gains(ranking, gains, relevant, levels=judgments, max_level=scheme.max_level)

    deduped = dedup_equivalence(ranking, classes, gains)
    owner = {d: k for k, members in enumerate(classes) for d in members}
    claimed, demoted = set(), set()
    for d in ranking:
        if d not in owner:
            continue
        if owner[d] in claimed:
            demoted.add(d)
        claimed.add(owner[d])
    ideal_pool, represented = [], set()
    for d in _ideal_order(gains, relevant):
        if d not in owner:
            ideal_pool.append(d)
        elif owner[d] not in represented:
            represented.add(owner[d])
            ideal_pool.append(d)
    return ScoredList(
        gains=tuple(deduped.get(d, 0.0) for d in ranking),
        relevant=tuple(d in relevant and d not in demoted for d in ranking),
        ideal_gains=tuple(gains[d] for d in ideal_pool),
        docs=tuple(ranking),
        levels=tuple(0 if d in demoted else judgments.get(d, 0) for d in ranking),
        ideal_levels=tuple(judgments[d] for d in ideal_pool),
        max_level=scheme.max_level,
    )


def _check_cutoff(l: int):
    if l < 1:
        raise ValueError(f"cutoff must be >= 1, got {l}")


def blended_ratio(sl: ScoredList, r: int, beta: float = DEFAULT_BETA) -> float:
    return (sl.C(r) + beta * sl.cg(r)) / (r + beta * sl.ideal_cg(r))


def precision_at(sl: ScoredList, l: int) -> float:
    _check_cutoff(l)
    return sl.C(l) / l


def r_precision(sl: ScoredList) -> float:
    sl.require_relevant()
    return sl.C(sl.n_relevant) / sl.n_relevant


def average_precision(sl: ScoredList) -> float:
    sl.require_relevant()
    return sum(sl.C(r) / r for r in sl.relevant_ranks()) / sl.n_relevant


def reciprocal_rank(sl: ScoredList, l: Optional[int] = None) -> float:
    if l is not None:
        _check_cutoff(l)
    ranks = sl.relevant_ranks(l)
    return 1 / ranks[0] if ranks else 0.0


def hit_at_1(sl: ScoredList) -> int:
    return int(bool(sl.relevant) and sl.relevant[0])


def ng_at_1(sl: ScoredList) -> float:
    sl.require_relevant()
    if sl.ideal_g(1) == 0:
        raise UndefinedTopicError("ideal list has zero gain")
    return sl.g(1) / sl.ideal_g(1)


def ncg_at(sl: ScoredList, l: int) -> float:
    """Normalised cumulative gain at l; blind to order within the top l."""
    _check_cutoff(l)
    sl.require_relevant()
    if sl.ideal_cg(l) == 0:
        raise UndefinedTopicError("ideal list has zero gain")
    return sl.cg(l) / sl.ideal_cg(l)


def _original_discounted(gains: Sequence[float], l: int, b: float) -> float:
    # no discount up to rank b, since log_b(r) <= 1 there
    return sum(g / max(1.0, math.log(r, b)) for r, g in enumerate(gains[:l], start=1))


def dcg_original(sl: ScoredList, l: int, b: float = DEFAULT_LOG_BASE) -> float:
    _check_cutoff(l)
    if b < 2:
        raise ValueError("logarithm base must be >= 2")
    return _original_discounted(sl.gains, l, b)


def ndcg_original(sl: ScoredList, l: int, b: float = DEFAULT_LOG_BASE) -> float:
    sl.require_relevant()
    ideal = _original_discounted(sl.ideal_gains, l, b)
    if ideal == 0:
        raise UndefinedTopicError("ideal list has zero gain")
    return dcg_original(sl, l, b) / ideal


def _ms_discounted(gains: Sequence[float], l: int, log) -> float:
    return sum(g / log(1 + r) for r, g in enumerate(gains[:l], start=1))


def ms_ndcg(sl: ScoredList, l: int, log=math.log2) -> float:
    """nDCG with a 1/log(1+r) discount at every rank.

    The base of ``log`` cancels between the system and ideal sums.
    """
    _check_cutoff(l)
    sl.require_relevant()
    ideal = _ms_discounted(sl.ideal_gains, l, log)
    if ideal == 0:
        raise UndefinedTopicError("ideal list has zero gain")
    return _ms_discounted(sl.gains, l, log) / ideal


def q_measure(sl: ScoredList, beta: float = DEFAULT_BETA) -> float:
    if beta < 0:
        raise ValueError("beta must be >= 0")
    sl.require_relevant()
    return sum(blended_ratio(sl, r, beta) for r in sl.relevant_ranks()) / sl.n_relevant


def q_at(sl: ScoredList, l: int, beta: float = DEFAULT_BETA) -> float:
    _check_cutoff(l)
    if beta < 0:
        raise ValueError("beta must be >= 0")
    sl.require_relevant()
    return sum(blended_ratio(sl, r, beta) for r in sl.relevant_ranks(l)) / min(l, sl.n_relevant)


def preferred_rank(sl: ScoredList, l: Optional[int] = None) -> Optional[int]:
    """Highest rank holding a most-relevant (maximum gain) document within the top l."""
    ranks = sl.relevant_ranks(l)
    if not ranks:
        return None
    top = max(sl.g(r) for r in ranks)
    return next(r for r in ranks if sl.g(r) == top)


def p_plus(sl: ScoredList, l: Optional[int] = None, beta: float = DEFAULT_BETA) -> float:
    if l is not None:
        _check_cutoff(l)
    rp = preferred_rank(sl, l)
    if rp is None:
        return 0.0
    return sum(blended_ratio(sl, r, beta) for r in sl.relevant_ranks(rp)) / sl.C(rp)


def _stop_probability(sl: ScoredList, x: int, base: float) -> float:
    return (base**x - 1) / base**sl.max_level


def _err(sl: ScoredList, levels: Sequence[int], l: int, base: float) -> float:
    total, keep_going = 0.0, 1.0
    for r, x in enumerate(levels[:l], start=1):
        stop = _stop_probability(sl, x, base)
        total += keep_going * stop / r
        keep_going *= 1 - stop
    return total


def _require_levels(sl: ScoredList):
    if sl.levels is None or sl.max_level is None:
        raise ValueError("ERR needs relevance levels; build the list from graded judgments")


def err_at(sl: ScoredList, l: int, base: float = DEFAULT_ERR_BASE) -> float:
    _check_cutoff(l)
    if base < 2:
        raise ValueError("ERR level base must be >= 2")
    _require_levels(sl)
    return _err(sl, sl.levels, l, base)


def nerr_at(sl: ScoredList, l: int, base: float = DEFAULT_ERR_BASE) -> float:
    sl.require_relevant()
    value = err_at(sl, l, base)
    ideal = _err(sl, sl.ideal_levels, l, base)
    if ideal == 0:
        raise UndefinedTopicError("ideal list has zero ERR")
    return value / ideal


def ncu(
    sl: ScoredList,
    stop: str,
    utility: str,
    l: Optional[int] = None,
    beta: float = DEFAULT_BETA,
) -> float:
    """Expected normalised utility under one of the uniform stopping distributions.

    Each supported distribution is uniform over its support, so the expectation
    is the support's mean utility. An empty support scores 0.
    """
    if stop == UNIFORM_RELEVANT:
        sl.require_relevant()
        support, mass = sl.relevant_ranks(), sl.n_relevant
    elif stop == UNIFORM_ABOVE_RP:
        rp = preferred_rank(sl, l)
        support, mass = ([], 1) if rp is None else (sl.relevant_ranks(rp), sl.C(rp))
    elif stop == STOP_AT_L:
        if l is None:
            raise ValueError("stop-at-l needs a cutoff")
        support, mass = [l], 1
    elif stop == STOP_AT_R1:
        support, mass = sl.relevant_ranks(l)[:1], 1
    else:
        raise ValueError(f"unknown stopping distribution {stop!r}")

    if utility == BLENDED_RATIO:
        nu = lambda r: blended_ratio(sl, r, beta)
    elif utility == PRECISION:
        nu = lambda r: sl.C(r) / r
    elif utility == RECIPROCAL_RANK:
        nu = lambda r: 1 / r
    else:
        raise ValueError(f"unknown utility {utility!r}")

    if not support:
        return 0.0
    return sum(nu(r) for r in support) / mass
