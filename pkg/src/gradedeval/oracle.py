"""Brute-force reference implementations of the measures.

Each measure is transcribed directly from its formula, recomputing prefix
sums at every rank. Nothing here calls the kernels in ``adhoc`` or
``diversity``; the point is to have a second, independent derivation to test
them against. Expect it to be slow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Optional, Sequence

from .adhoc import UndefinedTopicError

MAX_DOCS = 7


@dataclass
class SmallInstance:
    """A topic small enough to enumerate every ranking of its judged documents.

    ``levels`` holds topic-level judgments; ``gain`` maps level -> gain value.
    For diversity measures, ``intents`` lists (intent id, Pr(i|q), navigational)
    and ``intent_levels`` the intentwise judgments.
    """

    levels: dict[str, int]
    gain: dict[int, float]
    intents: list[tuple[str, float, bool]] = field(default_factory=list)
    intent_levels: dict[str, dict[str, int]] = field(default_factory=dict)

    def docs(self) -> list[str]:
        docs = set(self.levels)
        for judged in self.intent_levels.values():
            docs |= set(judged)
        return sorted(docs)


def _undefined():
    raise UndefinedTopicError("no relevant documents")


def _adhoc_parts(inst: SmallInstance, ranking: Sequence[str]):
    lv = [inst.levels.get(d, 0) for d in ranking]
    g = [inst.gain[x] for x in lv]
    rel = [1 if x > 0 else 0 for x in lv]
    ideal_levels = sorted((x for x in inst.levels.values() if x > 0), reverse=True)
    ideal = [inst.gain[x] for x in ideal_levels]
    return lv, g, rel, ideal_levels, ideal


def _br(rel, g, ideal, r, beta):
    count = sum(rel[:r])
    cum = sum(g[:r])
    cum_ideal = sum(ideal[:r])
    return (count + beta * cum) / (r + beta * cum_ideal)


def _q_family(rel, g, ideal, beta, cutoff=None):
    R = len(ideal)
    if R == 0:
        _undefined()
    n = len(rel) if cutoff is None else min(cutoff, len(rel))
    total = 0.0
    for r in range(1, n + 1):
        if rel[r - 1]:
            total += _br(rel, g, ideal, r, beta)
    return total / (R if cutoff is None else min(cutoff, R))


def _err(levels, l, base, lmax):
    value = 0.0
    for r in range(1, min(l, len(levels)) + 1):
        p_stop_here = (base ** levels[r - 1] - 1) / base**lmax
        p_reach = 1.0
        for i in range(1, r):
            p_reach *= 1 - (base ** levels[i - 1] - 1) / base**lmax
        value += p_reach * p_stop_here / r
    return value


def _ms_dcg(gains, l):
    return sum(gains[r - 1] / math.log2(r + 1) for r in range(1, min(l, len(gains)) + 1))


def _orig_dcg(gains, l, b):
    total = 0.0
    for r in range(1, min(l, len(gains)) + 1):
        disc = 1.0 if r <= b else math.log(r) / math.log(b)
        total += gains[r - 1] / disc
    return total


def _global(inst: SmallInstance, doc: str, ranked_before: Sequence[str] = (), din: bool = False) -> float:
    gg = 0.0
    for iid, prob, nav in inst.intents:
        judged = inst.intent_levels.get(iid, {})
        if din and nav and any(judged.get(prev, 0) > 0 for prev in ranked_before):
            continue
        gg += prob * inst.gain[judged.get(doc, 0)]
    return gg


def _global_ideal(inst: SmallInstance) -> list[float]:
    pool = [d for d in inst.docs() if any(inst.intent_levels.get(i, {}).get(d, 0) > 0 for i, _, _ in inst.intents)]
    return sorted((_global(inst, d) for d in pool), reverse=True)


def _intent_instance(inst: SmallInstance, iid: str) -> SmallInstance:
    return SmallInstance(dict(inst.intent_levels.get(iid, {})), inst.gain)


def _p_plus(rel, g, ideal, l, beta):
    n = min(l, len(rel))
    rel_ranks = [r for r in range(1, n + 1) if rel[r - 1]]
    if not rel_ranks:
        return 0.0
    top = max(g[r - 1] for r in rel_ranks)
    rp = min(r for r in rel_ranks if g[r - 1] == top)
    return sum(_br(rel, g, ideal, r, beta) for r in rel_ranks if r <= rp) / sum(rel[:rp])


def naive_measure(inst: SmallInstance, ranking: Sequence[str], measure: str, params: Optional[dict] = None) -> float:
    """Compute ``measure`` for ``ranking`` from first principles.

    ``params`` may carry ``l`` (cutoff), ``beta``, ``b`` (original DCG log
    base), ``base`` (ERR), ``gamma``.
    """
    p = {"beta": 1.0, "b": 2.0, "base": 2.0, "gamma": 0.5}
    p.update(params or {})
    l = p.get("l", len(ranking) if ranking else 1)
    beta = p["beta"]
    lv, g, rel, ideal_levels, ideal = _adhoc_parts(inst, ranking)
    R = len(ideal)

    if measure == "precision":
        return sum(rel[:l]) / l
    if measure == "r-precision":
        if R == 0:
            _undefined()
        return sum(rel[:R]) / R
    if measure == "ap":
        return _q_family(rel, g, ideal, 0.0)
    if measure == "q":
        return _q_family(rel, g, ideal, beta)
    if measure == "q@l":
        return _q_family(rel, g, ideal, beta, cutoff=l)
    if measure == "rr":
        for r in range(1, min(l, len(rel)) + 1):
            if rel[r - 1]:
                return 1.0 / r
        return 0.0
    if measure == "hit@1":
        return float(bool(rel) and rel[0] == 1)
    if measure == "ng@1":
        if R == 0:
            _undefined()
        return (g[0] if g else 0.0) / ideal[0]
    if measure == "ncg":
        if R == 0:
            _undefined()
        return sum(g[:l]) / sum(ideal[:l])
    if measure == "dcg":
        return _orig_dcg(g, l, p["b"])
    if measure == "ndcg":
        if R == 0:
            _undefined()
        return _orig_dcg(g, l, p["b"]) / _orig_dcg(ideal, l, p["b"])
    if measure == "ms-ndcg":
        if R == 0:
            _undefined()
        return _ms_dcg(g, l) / _ms_dcg(ideal, l)
    if measure == "p+":
        return _p_plus(rel, g, ideal, l, beta)
    if measure in ("err", "nerr"):
        lmax = max(inst.gain)
        value = _err(lv, l, p["base"], lmax)
        if measure == "err":
            return value
        if R == 0:
            _undefined()
        return value / _err(ideal_levels, l, p["base"], lmax)

    # diversity
    if not inst.intents:
        raise ValueError(f"measure {measure!r} needs intents")
    gideal = _global_ideal(inst)

    def i_rec():
        covered = set()
        for d in ranking[:l]:
            for iid, _, _ in inst.intents:
                if inst.intent_levels.get(iid, {}).get(d, 0) > 0:
                    covered.add(iid)
        return len(covered) / len(inst.intents)

    def d_ndcg(din=False):
        if not gideal:
            _undefined()
        gg = [_global(inst, d, ranking[: r - 1], din) for r, d in enumerate(ranking, start=1)]
        return _ms_dcg(gg, l) / _ms_dcg(gideal, l)

    if measure == "i-rec":
        return i_rec()
    if measure == "d-ndcg":
        return d_ndcg()
    if measure == "din-ndcg":
        return d_ndcg(din=True)
    if measure == "d#-ndcg":
        return p["gamma"] * i_rec() + (1 - p["gamma"]) * d_ndcg()
    if measure == "d-q":
        if not gideal:
            _undefined()
        gg = [_global(inst, d) for d in ranking]
        grel = [1 if any(inst.intent_levels.get(i, {}).get(d, 0) > 0 for i, _, _ in inst.intents) else 0 for d in ranking]
        return _q_family(grel, gg, gideal, beta, cutoff=l)
    if measure == "p+q":
        total = 0.0
        for iid, prob, nav in inst.intents:
            sub = _intent_instance(inst, iid)
            _, ig, irel, _, iideal = _adhoc_parts(sub, ranking)
            if not iideal:
                continue
            score = _p_plus(irel, ig, iideal, l, beta) if nav else _q_family(irel, ig, iideal, beta, cutoff=l)
            total += prob * score
        return total
    raise ValueError(f"unknown measure {measure!r}")


def exhaustive_max(inst: SmallInstance, measure: str, params: Optional[dict] = None) -> tuple[float, list[str]]:
    """Best value of ``measure`` over every ordering of the judged documents."""
    docs = inst.docs()
    if len(docs) > MAX_DOCS:
        raise ValueError(f"{len(docs)} documents is too many to enumerate (max {MAX_DOCS})")
    best_value, best_perm = -math.inf, []
    for perm in permutations(docs):
        value = naive_measure(inst, list(perm), measure, params)
        if value > best_value:
            best_value, best_perm = value, list(perm)
    return best_value, best_perm
