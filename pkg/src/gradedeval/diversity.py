"""Diversity measures built on intent-weighted global gains.

A ranking is scored against per-intent judgments and intent probabilities.
Global gains feed the adhoc kernels unchanged (D-nDCG, D-Q); I-rec, D#,
DIN, P+Q, H-measure, V-score, QU-score and the vertical-weighted VI variant
are layered on top.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from . import adhoc
from .adhoc import ScoredList, UndefinedTopicError
from .corpus import Intent
from .gains import GainScheme

DEFAULT_GAMMA = 0.5
DEFAULT_ALPHA = 0.5
DEFAULT_LAMBDA = 0.5
DEFAULT_VERTICAL_GAIN = 2.0
WEB = "Web"

D_BASES = ("ms-ndcg", "q")

IntentJudgments = Mapping[str, Mapping[str, int]]


@dataclass(frozen=True)
class GlobalGainList:
    docs: tuple[str, ...]
    global_gains: tuple[float, ...]
    # intents each ranked document is relevant to
    covers: tuple[frozenset[str], ...]
    ideal_docs: tuple[str, ...]
    ideal_gains: tuple[float, ...]
    n_intents: int

    def scored_list(self) -> ScoredList:
        """View the global gains as an ordinary gained list."""
        return ScoredList(
            gains=self.global_gains,
            relevant=tuple(bool(c) for c in self.covers),
            ideal_gains=self.ideal_gains,
            docs=self.docs,
        )


def _check_weight(name: str, value: float):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def _require_intents(intents: Sequence[Intent]):
    if not intents:
        raise ValueError("no intent probabilities for this topic")


def _intent_gain(judgments: IntentJudgments, intent: str, doc: str, scheme: GainScheme) -> float:
    level = judgments.get(intent, {}).get(doc)
    return 0.0 if level is None else scheme.gain(level)


def _covers(judgments: IntentJudgments, intents: Sequence[Intent], doc: str) -> frozenset[str]:
    return frozenset(i.id for i in intents if judgments.get(i.id, {}).get(doc, 0) > 0)


def _global_gain(judgments, intents, doc, scheme) -> float:
    return sum(i.prob * _intent_gain(judgments, i.id, doc, scheme) for i in intents)


def _global_ideal(judgments, intents, scheme) -> tuple[tuple[str, ...], tuple[float, ...]]:
    pool = {d for i in intents for d, x in judgments.get(i.id, {}).items() if x > 0}
    gg = {d: _global_gain(judgments, intents, d, scheme) for d in pool}
    order = sorted(pool, key=lambda d: (-gg[d], d))
    return tuple(order), tuple(gg[d] for d in order)


def _judged(judgments: IntentJudgments, intents: Sequence[Intent]) -> set[str]:
    return {d for i in intents for d in judgments.get(i.id, {})}


def global_gain_list(
    ranking: Sequence[str],
    judgments: IntentJudgments,
    intents: Sequence[Intent],
    scheme: GainScheme,
    condensed: bool = False,
) -> GlobalGainList:
    _require_intents(intents)
    if condensed:
        ranking = [d for d in ranking if d in _judged(judgments, intents)]
    ideal_docs, ideal_gains = _global_ideal(judgments, intents, scheme)
    return GlobalGainList(
        docs=tuple(ranking),
        global_gains=tuple(_global_gain(judgments, intents, d, scheme) for d in ranking),
        covers=tuple(_covers(judgments, intents, d) for d in ranking),
        ideal_docs=ideal_docs,
        ideal_gains=ideal_gains,
        n_intents=len(intents),
    )


def din_global_gain_list(
    ranking: Sequence[str],
    judgments: IntentJudgments,
    intents: Sequence[Intent],
    scheme: GainScheme,
    condensed: bool = False,
) -> GlobalGainList:
    """Global gains where a navigational intent only rewards its first relevant document.

    The ideal list is the plain global ideal list.
    """
    plain = global_gain_list(ranking, judgments, intents, scheme, condensed)
    seen_nav: set[str] = set()
    gains = []
    for doc, covers in zip(plain.docs, plain.covers):
        total = 0.0
        for i in intents:
            if i.navigational and i.id in seen_nav:
                continue
            total += i.prob * _intent_gain(judgments, i.id, doc, scheme)
        gains.append(total)
        seen_nav |= {i.id for i in intents if i.navigational and i.id in covers}
    return GlobalGainList(
        docs=plain.docs,
        global_gains=tuple(gains),
        covers=plain.covers,
        ideal_docs=plain.ideal_docs,
        ideal_gains=plain.ideal_gains,
        n_intents=plain.n_intents,
    )


def vi_global_gain_list(
    entries: Sequence[tuple[str, Optional[str]]],
    judgments: IntentJudgments,
    intents: Sequence[Intent],
    scheme: GainScheme,
    vertical_gain: float = DEFAULT_VERTICAL_GAIN,
    web: str = WEB,
) -> GlobalGainList:
    """Global gains with each intentwise gain weighted by Pr(v(r)|i).

    ``entries`` are (doc, vertical) pairs; a missing vertical means ``web``.
    Entries of any other vertical are embedded vertical results: they earn
    ``vertical_gain`` for every intent (only the first entry per vertical
    counts). The ideal list ranks every relevant web document plus one entry
    per non-web vertical known to the topic's intents.
    """
    _require_intents(intents)

    def weight(intent: Intent, vertical: str) -> float:
        return intent.verticals.get(vertical, 0.0)

    def web_gain(doc: str) -> float:
        return sum(i.prob * weight(i, web) * _intent_gain(judgments, i.id, doc, scheme) for i in intents)

    def vertical_entry_gain(vertical: str) -> float:
        return sum(i.prob * weight(i, vertical) * vertical_gain for i in intents)

    docs, gains, covers = [], [], []
    used_verticals: set[str] = set()
    for doc, vertical in entries:
        vertical = vertical or web
        docs.append(doc)
        if vertical == web:
            gains.append(web_gain(doc))
            covers.append(_covers(judgments, intents, doc))
        elif vertical in used_verticals:
            gains.append(0.0)
            covers.append(frozenset())
        else:
            used_verticals.add(vertical)
            gains.append(vertical_entry_gain(vertical))
            covers.append(frozenset(i.id for i in intents if weight(i, vertical) > 0))

    pool = {d: web_gain(d) for i in intents for d, x in judgments.get(i.id, {}).items() if x > 0}
    for v in {v for i in intents for v in i.verticals if v != web}:
        pool[f"<{v}>"] = vertical_entry_gain(v)
    order = sorted(pool, key=lambda d: (-pool[d], d))
    return GlobalGainList(
        docs=tuple(docs),
        global_gains=tuple(gains),
        covers=tuple(covers),
        ideal_docs=tuple(order),
        ideal_gains=tuple(pool[d] for d in order),
        n_intents=len(intents),
    )


def i_rec_at(ggl: GlobalGainList, l: int) -> float:
    """Proportion of the topic's intents covered by the top l."""
    if l < 1:
        raise ValueError("cutoff must be >= 1")
    if ggl.n_intents == 0:
        raise ValueError("topic has no intents")
    covered = frozenset().union(*ggl.covers[:l])
    return len(covered) / ggl.n_intents


def d_measure_at(ggl: GlobalGainList, l: int, base: str = "ms-ndcg", beta: float = adhoc.DEFAULT_BETA) -> float:
    if not ggl.ideal_gains:
        raise UndefinedTopicError("global ideal list is empty")
    sl = ggl.scored_list()
    if base == "ms-ndcg":
        return adhoc.ms_ndcg(sl, l)
    if base == "q":
        return adhoc.q_at(sl, l, beta)
    raise ValueError(f"unknown D-measure base {base!r}; expected one of {D_BASES}")


def d_sharp(i_rec: float, d_measure: float, gamma: float = DEFAULT_GAMMA) -> float:
    _check_weight("gamma", gamma)
    return gamma * i_rec + (1 - gamma) * d_measure


def d_sharp_at(ggl: GlobalGainList, l: int, base: str = "ms-ndcg", gamma: float = DEFAULT_GAMMA, beta: float = adhoc.DEFAULT_BETA) -> float:
    return d_sharp(i_rec_at(ggl, l), d_measure_at(ggl, l, base, beta), gamma)


def p_plus_q_at(
    ranking: Sequence[str],
    judgments: IntentJudgments,
    intents: Sequence[Intent],
    scheme: GainScheme,
    l: int,
    beta: float = adhoc.DEFAULT_BETA,
    condensed: bool = False,
) -> float:
    """Intent-weighted mix of intentwise Q@l (informational) and P+ (navigational)."""
    _require_intents(intents)
    if condensed:
        ranking = [d for d in ranking if d in _judged(judgments, intents)]
    total = 0.0
    for intent in intents:
        sl = adhoc.build_scored_list(ranking, judgments.get(intent.id, {}), scheme)
        if sl.n_relevant == 0:
            continue
        score = adhoc.p_plus(sl, l, beta) if intent.navigational else adhoc.q_at(sl, l, beta)
        total += intent.prob * score
    return total


def h_score(system: Mapping[str, str], gold: Mapping[str, str]) -> float:
    """Fraction of second-level items assigned to their gold first-level parent."""
    if not system:
        raise ValueError("no hierarchy assignments to score")
    missing = [child for child in system if child not in gold]
    if missing:
        raise ValueError(f"items without a gold parent: {', '.join(sorted(missing))}")
    return sum(system[c] == gold[c] for c in system) / len(system)


def h_measure(hscore: float, d1_sharp: float, d2_sharp: float, alpha: float = DEFAULT_ALPHA) -> float:
    _check_weight("alpha", alpha)
    return hscore * (alpha * d1_sharp + (1 - alpha) * d2_sharp)


def v_score_at(
    entries: Sequence[tuple[str, Optional[str]]],
    subtopic_intent: Mapping[str, str],
    intents: Sequence[Intent],
    l: int,
    web: str = WEB,
) -> float:
    """Mean over the top l of Pr(v(r)|i(r)) relative to the intent's best vertical.

    Items that belong to no intent contribute 0, as do ranks past the list's end.
    """
    if l < 1:
        raise ValueError("cutoff must be >= 1")
    by_id = {i.id: i for i in intents}
    total = 0.0
    for item, vertical in entries[:l]:
        intent_id = subtopic_intent.get(item)
        if intent_id is None:
            continue
        try:
            intent = by_id[intent_id]
        except KeyError:
            raise ValueError(f"subtopic {item} maps to unknown intent {intent_id}") from None
        best = max(intent.verticals.values(), default=0.0)
        if best == 0:
            raise ValueError(f"intent {intent_id} has no vertical with positive probability")
        total += intent.verticals.get(vertical or web, 0.0) / best
    return total / l


def qu_score_at(d_sharp_ndcg: float, v_score: float, lam: float = DEFAULT_LAMBDA) -> float:
    _check_weight("lambda", lam)
    return lam * d_sharp_ndcg + (1 - lam) * v_score
