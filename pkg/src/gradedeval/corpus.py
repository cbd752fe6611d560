"""Readers and writers for qrels, runs, intents, verticals and equivalence classes.

All formats are whitespace-separated text with ``#`` comments:

    qrels       topic intent doc level        (intent ``0`` = topic-level)
    run         topic Q0 doc rank score tag [vertical]
    intents     topic intent prob [inf|nav]
    verticals   topic intent vertical prob
    classes     topic class-id doc
    submap      topic subtopic intent

Parsed values are immutable. Every rejected line produces a ``ParseError``
(syntax) or ``ValidationError`` (semantics) carrying its 1-based line number.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

TOPIC_LEVEL = "0"
INFORMATIONAL = "informational"
NAVIGATIONAL = "navigational"
PROB_SLACK = 1e-9

_TAGS = {
    "inf": INFORMATIONAL,
    "informational": INFORMATIONAL,
    "nav": NAVIGATIONAL,
    "navigational": NAVIGATIONAL,
}

Source = Union[str, Iterable[str]]


class CorpusError(ValueError):
    """Base class for input errors; ``line`` is 1-based or None."""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.message = message
        self.line = line
        self.path = path
        super().__init__(str(self))

    def __str__(self) -> str:
        where = ""
        if self.path is not None:
            where = f"{self.path}:"
        if self.line is not None:
            where += f"{self.line}:"
        return f"{where} {self.message}" if where else self.message


class ParseError(CorpusError):
    pass


class ValidationError(CorpusError):
    pass


class RankOrderWarning(UserWarning):
    """The rank column disagrees with file order; file order is kept."""


def _records(source: Source) -> Iterator[tuple[int, list[str]]]:
    lines = source.splitlines() if isinstance(source, str) else source
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if text:
            yield lineno, text.split()


def _float(token: str, what: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"non-numeric {what} {token!r}", lineno) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite {what} {token!r}", lineno)
    return value


def _probability(token: str, lineno: int) -> float:
    p = _float(token, "probability", lineno)
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"probability {token} outside [0, 1]", lineno)
    return p


def _fmt(value: float) -> str:
    return repr(float(value))


# ---------------------------------------------------------------------------
# qrels


@dataclass(frozen=True)
class Judgment:
    topic: str
    intent: str
    doc: str
    level: int


@dataclass(frozen=True)
class GradedQrels:
    """Graded judgments keyed by topic, intent (or ``TOPIC_LEVEL``) and document."""

    judgments: tuple[Judgment, ...] = ()

    def __post_init__(self):
        seen = set()
        for j in self.judgments:
            if j.level < 0:
                raise ValidationError(f"negative level {j.level} for {j.topic}/{j.doc}")
            key = (j.topic, j.intent, j.doc)
            if key in seen:
                raise ValidationError(f"duplicate judgment {' '.join(key)}")
            seen.add(key)

    @cached_property
    def _index(self) -> dict[str, dict[str, dict[str, int]]]:
        index: dict[str, dict[str, dict[str, int]]] = {}
        for j in self.judgments:
            index.setdefault(j.topic, {}).setdefault(j.intent, {})[j.doc] = j.level
        return index

    def topics(self) -> list[str]:
        return list(self._index)

    def __contains__(self, topic: str) -> bool:
        return topic in self._index

    def intents(self, topic: str) -> list[str]:
        """Intent ids with judgments for ``topic``, excluding the topic-level key."""
        return [i for i in self._index.get(topic, {}) if i != TOPIC_LEVEL]

    def for_intent(self, topic: str, intent: str) -> Mapping[str, int]:
        return MappingProxyType(self._index.get(topic, {}).get(intent, {}))

    def for_topic(self, topic: str) -> Mapping[str, int]:
        """Topic-level judgments.

        Topics judged only per intent fall back to each document's highest
        intentwise level, so a document relevant to any intent is relevant.
        """
        if topic not in self._index:
            raise KeyError(topic)
        per_intent = self._index[topic]
        if TOPIC_LEVEL in per_intent:
            return MappingProxyType(per_intent[TOPIC_LEVEL])
        merged: dict[str, int] = {}
        for judged in per_intent.values():
            for doc, level in judged.items():
                merged[doc] = max(level, merged.get(doc, 0))
        return MappingProxyType(merged)

    def judged_docs(self, topic: str) -> frozenset[str]:
        """Every document judged for ``topic`` at any intent."""
        return frozenset(doc for judged in self._index.get(topic, {}).values() for doc in judged)

    @property
    def max_level(self) -> int:
        return max((j.level for j in self.judgments), default=0)


def parse_qrels(source: Source) -> GradedQrels:
    judgments = []
    seen: dict[tuple[str, str, str], int] = {}
    for lineno, fields in _records(source):
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields 'topic intent doc level', got {len(fields)}", lineno)
        topic, intent, doc, level_tok = fields
        try:
            level = int(level_tok)
        except ValueError:
            raise ParseError(f"non-integer level {level_tok!r}", lineno) from None
        if level < 0:
            raise ParseError(f"negative level {level}", lineno)
        key = (topic, intent, doc)
        if key in seen:
            raise ValidationError(f"duplicate judgment {topic} {intent} {doc} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        judgments.append(Judgment(topic, intent, doc, level))
    return GradedQrels(tuple(judgments))


def serialize_qrels(qrels: GradedQrels) -> str:
    return "".join(f"{j.topic} {j.intent} {j.doc} {j.level}\n" for j in qrels.judgments)


# ---------------------------------------------------------------------------
# runs


@dataclass(frozen=True)
class RunEntry:
    doc: str
    score: float
    rank: int
    vertical: Optional[str] = None


@dataclass(frozen=True)
class RankedRun:
    """Per-topic rankings in file order; scores are carried, never used to re-sort."""

    tag: str = ""
    topics: Mapping[str, tuple[RunEntry, ...]] = field(default_factory=dict)

    def __post_init__(self):
        for topic, entries in self.topics.items():
            docs = [e.doc for e in entries]
            if len(set(docs)) != len(docs):
                raise ValidationError(f"duplicate document in topic {topic}")
        object.__setattr__(self, "topics", MappingProxyType(dict(self.topics)))

    def ranking(self, topic: str) -> list[str]:
        return [e.doc for e in self.topics.get(topic, ())]


def parse_run(source: Source) -> RankedRun:
    topics: dict[str, list[RunEntry]] = {}
    docs_seen: dict[str, dict[str, int]] = {}
    tag = None
    for lineno, fields in _records(source):
        if len(fields) not in (6, 7):
            raise ParseError(f"expected 6 or 7 fields 'topic Q0 doc rank score tag [vertical]', got {len(fields)}", lineno)
        topic, _q0, doc, rank_tok, score_tok, line_tag = fields[:6]
        vertical = fields[6] if len(fields) == 7 else None
        try:
            rank = int(rank_tok)
        except ValueError:
            raise ParseError(f"non-integer rank {rank_tok!r}", lineno) from None
        score = _float(score_tok, "score", lineno)
        if tag is None:
            tag = line_tag
        seen = docs_seen.setdefault(topic, {})
        if doc in seen:
            raise ValidationError(f"duplicate document {doc} in topic {topic} (first on line {seen[doc]})", lineno)
        seen[doc] = lineno
        entries = topics.setdefault(topic, [])
        if entries and rank <= entries[-1].rank:
            warnings.warn(
                f"line {lineno}: rank {rank} does not increase in topic {topic}; using file order",
                RankOrderWarning,
                stacklevel=2,
            )
        entries.append(RunEntry(doc, score, rank, vertical))
    return RankedRun(tag or "", {t: tuple(e) for t, e in topics.items()})


def serialize_run(run: RankedRun) -> str:
    out = []
    for topic, entries in run.topics.items():
        for e in entries:
            line = f"{topic} Q0 {e.doc} {e.rank} {_fmt(e.score)} {run.tag}"
            if e.vertical is not None:
                line += f" {e.vertical}"
            out.append(line + "\n")
    return "".join(out)


# ---------------------------------------------------------------------------
# intents and verticals


@dataclass(frozen=True)
class Intent:
    id: str
    prob: float
    tag: str = INFORMATIONAL
    verticals: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.prob <= 1.0:
            raise ValidationError(f"intent {self.id}: probability {self.prob} outside [0, 1]")
        if self.tag not in (INFORMATIONAL, NAVIGATIONAL):
            raise ValidationError(f"intent {self.id}: unknown tag {self.tag!r}")
        for v, p in self.verticals.items():
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"intent {self.id}: Pr({v}) = {p} outside [0, 1]")
        object.__setattr__(self, "verticals", MappingProxyType(dict(self.verticals)))

    @property
    def navigational(self) -> bool:
        return self.tag == NAVIGATIONAL


@dataclass(frozen=True)
class IntentSet:
    topics: Mapping[str, tuple[Intent, ...]] = field(default_factory=dict)

    def __post_init__(self):
        for topic, intents in self.topics.items():
            ids = [i.id for i in intents]
            if len(set(ids)) != len(ids):
                raise ValidationError(f"duplicate intent id in topic {topic}")
            total = sum(i.prob for i in intents)
            if total > 1.0 + PROB_SLACK:
                raise ValidationError(f"intent probabilities for topic {topic} sum to {total} > 1")
        object.__setattr__(self, "topics", MappingProxyType(dict(self.topics)))

    def __getitem__(self, topic: str) -> tuple[Intent, ...]:
        return self.topics[topic]

    def __contains__(self, topic: str) -> bool:
        return topic in self.topics


def parse_intents(source: Source, verticals: Optional[Source] = None) -> IntentSet:
    """Read an intent file and, optionally, its companion vertical file."""
    rows: dict[str, dict[str, list]] = {}
    totals: dict[str, float] = {}
    for lineno, fields in _records(source):
        if len(fields) not in (3, 4):
            raise ParseError(f"expected 'topic intent prob [tag]', got {len(fields)} fields", lineno)
        topic, intent, prob_tok = fields[:3]
        if intent == TOPIC_LEVEL:
            raise ValidationError(f"intent id {TOPIC_LEVEL!r} is reserved for topic-level judgments", lineno)
        prob = _probability(prob_tok, lineno)
        tag = INFORMATIONAL
        if len(fields) == 4:
            try:
                tag = _TAGS[fields[3].lower()]
            except KeyError:
                raise ParseError(f"unknown intent tag {fields[3]!r}", lineno) from None
        per_topic = rows.setdefault(topic, {})
        if intent in per_topic:
            raise ValidationError(f"duplicate intent {intent} in topic {topic}", lineno)
        totals[topic] = totals.get(topic, 0.0) + prob
        if totals[topic] > 1.0 + PROB_SLACK:
            raise ValidationError(f"intent probabilities for topic {topic} sum to {totals[topic]} > 1", lineno)
        per_topic[intent] = [prob, tag, {}]

    if verticals is not None:
        for lineno, fields in _records(verticals):
            if len(fields) != 4:
                raise ParseError(f"expected 'topic intent vertical prob', got {len(fields)} fields", lineno)
            topic, intent, vertical, prob_tok = fields
            try:
                vmap = rows[topic][intent][2]
            except KeyError:
                raise ValidationError(f"vertical probability for unknown intent {topic}/{intent}", lineno) from None
            if vertical in vmap:
                raise ValidationError(f"duplicate vertical {vertical} for {topic}/{intent}", lineno)
            vmap[vertical] = _probability(prob_tok, lineno)

    return IntentSet({
        topic: tuple(Intent(iid, p, tag, vmap) for iid, (p, tag, vmap) in per_topic.items())
        for topic, per_topic in rows.items()
    })


def serialize_intents(intents: IntentSet) -> str:
    return "".join(
        f"{topic} {i.id} {_fmt(i.prob)} {'nav' if i.navigational else 'inf'}\n"
        for topic, items in intents.topics.items()
        for i in items
    )


def serialize_verticals(intents: IntentSet) -> str:
    return "".join(
        f"{topic} {i.id} {v} {_fmt(p)}\n"
        for topic, items in intents.topics.items()
        for i in items
        for v, p in i.verticals.items()
    )


# ---------------------------------------------------------------------------
# equivalence classes and subtopic maps


@dataclass(frozen=True)
class EquivalenceClasses:
    """Per-topic groups of documents that count as one answer."""

    topics: Mapping[str, Mapping[str, frozenset[str]]] = field(default_factory=dict)

    def __post_init__(self):
        for topic, classes in self.topics.items():
            seen: set[str] = set()
            for members in classes.values():
                if seen & members:
                    raise ValidationError(f"document in more than one class in topic {topic}")
                seen |= members
        object.__setattr__(self, "topics", MappingProxyType(dict(self.topics)))

    def classes(self, topic: str) -> list[frozenset[str]]:
        return list(self.topics.get(topic, {}).values())


def parse_classes(source: Source) -> EquivalenceClasses:
    rows: dict[str, dict[str, list[str]]] = {}
    owner: dict[tuple[str, str], str] = {}
    for lineno, fields in _records(source):
        if len(fields) != 3:
            raise ParseError(f"expected 'topic class-id doc', got {len(fields)} fields", lineno)
        topic, cid, doc = fields
        prev = owner.get((topic, doc))
        if prev is not None:
            if prev == cid:
                raise ValidationError(f"duplicate member {doc} in class {cid}", lineno)
            raise ValidationError(f"document {doc} already in class {prev} of topic {topic}", lineno)
        owner[(topic, doc)] = cid
        rows.setdefault(topic, {}).setdefault(cid, []).append(doc)
    return EquivalenceClasses({t: {c: frozenset(m) for c, m in cl.items()} for t, cl in rows.items()})


def serialize_classes(classes: EquivalenceClasses) -> str:
    return "".join(
        f"{topic} {cid} {doc}\n"
        for topic, cl in classes.topics.items()
        for cid, members in cl.items()
        for doc in sorted(members)
    )


def parse_submap(source: Source) -> dict[str, dict[str, str]]:
    """Read ``topic subtopic intent`` lines into topic -> subtopic -> intent."""
    out: dict[str, dict[str, str]] = {}
    for lineno, fields in _records(source):
        if len(fields) != 3:
            raise ParseError(f"expected 'topic subtopic intent', got {len(fields)} fields", lineno)
        topic, sub, intent = fields
        per_topic = out.setdefault(topic, {})
        if sub in per_topic:
            raise ValidationError(f"subtopic {sub} of topic {topic} mapped twice", lineno)
        per_topic[sub] = intent
    return out


def serialize_submap(submap: Mapping[str, Mapping[str, str]]) -> str:
    return "".join(f"{t} {s} {i}\n" for t, subs in submap.items() for s, i in subs.items())


def read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load(parser, path: str, *args):
    """Run ``parser`` over a file, tagging any CorpusError with the path."""
    try:
        return parser(read_text(path), *args)
    except CorpusError as err:
        err.path = path
        raise


def condense_ranking(ranking: Sequence[str], judged: Iterable[str]) -> list[str]:
    """Drop unjudged documents, preserving order."""
    judged = set(judged)
    return [doc for doc in ranking if doc in judged]
