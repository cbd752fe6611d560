"""Batch evaluation: wire parsed files to the measure kernels and build reports."""

from __future__ import annotations

import re
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from . import adhoc, diversity
from .adhoc import UndefinedTopicError
from .corpus import (
    EquivalenceClasses,
    GradedQrels,
    IntentSet,
    RankedRun,
    RunEntry,
    ValidationError,
    load,
    parse_classes,
    parse_intents,
    parse_qrels,
    parse_run,
    parse_submap,
    read_text,
)
from .gains import (
    DEFAULT_UPGRADE_P,
    GainScheme,
    aggregate_average,
    aggregate_majority_l0_fallback,
    parse_gain_spec,
    upgrade_labels,
)

R0_ZERO = "zero"
R0_EXCLUDE = "exclude"
ALL_TOPICS = "all"


class MeasureSpecError(ValidationError):
    pass


@dataclass(frozen=True)
class Measure:
    key: str
    cutoff: Optional[int]

    @property
    def label(self) -> str:
        name = MEASURES[self.key].label
        return name if self.cutoff is None or self.key in FIXED_CUTOFF else f"{name}@{self.cutoff}"

    @property
    def diversity(self) -> bool:
        return MEASURES[self.key].diversity


@dataclass
class EvalConfig:
    qrels: Optional[str] = None
    run: Optional[str] = None
    intents: Optional[str] = None
    verticals: Optional[str] = None
    submap: Optional[str] = None
    classes: Optional[str] = None
    gains: str = "linear"
    measures: Sequence[str] = ("ap", "q", "ms-ndcg@10", "nerr@10")
    cutoffs: Sequence[int] = ()
    beta: float = adhoc.DEFAULT_BETA
    gamma: float = diversity.DEFAULT_GAMMA
    alpha: float = diversity.DEFAULT_ALPHA
    lam: float = diversity.DEFAULT_LAMBDA
    log_base: float = adhoc.DEFAULT_LOG_BASE
    err_base: float = adhoc.DEFAULT_ERR_BASE
    unanimity_p: float = DEFAULT_UPGRADE_P
    vertical_gain: float = diversity.DEFAULT_VERTICAL_GAIN
    condensed: bool = False
    r0_policy: str = R0_ZERO
    missing_zero: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.r0_policy not in (R0_ZERO, R0_EXCLUDE):
            raise ValidationError(f"unknown R=0 policy {self.r0_policy!r}")
        if not self.measures:
            raise MeasureSpecError("at least one measure is required")
        if any(c < 1 for c in self.cutoffs):
            raise MeasureSpecError("cutoffs must be >= 1")
        for name, value in (("gamma", self.gamma), ("alpha", self.alpha), ("lambda", self.lam)):
            if not 0 <= value <= 1:
                raise ValidationError(f"{name} must lie in [0, 1]")
        if self.beta < 0:
            raise ValidationError("beta must be >= 0")
        if self.log_base < 2 or self.err_base < 2:
            raise ValidationError("logarithm and ERR bases must be >= 2")


@dataclass
class TopicData:
    """Everything one topic's measures may need, built lazily."""

    topic: str
    entries: tuple[RunEntry, ...]
    qrels: GradedQrels
    scheme: GainScheme
    config: EvalConfig
    intents: Optional[IntentSet] = None
    classes: Optional[EquivalenceClasses] = None
    submap: Mapping[str, str] = field(default_factory=dict)
    _cache: dict = field(default_factory=dict)

    @property
    def ranking(self) -> list[str]:
        return [e.doc for e in self.entries]

    def _cached(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    @property
    def scored(self) -> adhoc.ScoredList:
        classes = self.classes.classes(self.topic) if self.classes else ()
        return self._cached("sl", lambda: adhoc.build_scored_list(
            self.ranking, self.qrels.for_topic(self.topic), self.scheme, classes=classes))

    @property
    def topic_intents(self):
        if self.intents is None or self.topic not in self.intents:
            raise ValidationError(f"no intent probabilities for topic {self.topic}")
        return self.intents[self.topic]

    @property
    def intent_judgments(self) -> dict[str, Mapping[str, int]]:
        return {i.id: self.qrels.for_intent(self.topic, i.id) for i in self.topic_intents}

    def ggl(self, kind: str = "plain") -> diversity.GlobalGainList:
        def build():
            args = (self.intent_judgments, self.topic_intents, self.scheme)
            if kind == "din":
                return diversity.din_global_gain_list(self.ranking, *args)
            if kind == "vi":
                pairs = [(e.doc, e.vertical) for e in self.entries]
                return diversity.vi_global_gain_list(pairs, *args, vertical_gain=self.config.vertical_gain)
            return diversity.global_gain_list(self.ranking, *args)
        return self._cached(("ggl", kind), build)


@dataclass(frozen=True)
class MeasureDef:
    label: str
    cutoff: str  # "required" | "optional" | "none"
    compute: Callable[[TopicData, Optional[int]], float]
    diversity: bool = False


def _d_sharp(t: TopicData, l: int, kind: str = "plain", base: str = "ms-ndcg") -> float:
    c = t.config
    g = t.ggl(kind)
    return diversity.d_sharp(diversity.i_rec_at(g, l), diversity.d_measure_at(g, l, base, c.beta), c.gamma)


def _v_score(t: TopicData, l: int) -> float:
    pairs = [(e.doc, e.vertical) for e in t.entries]
    return diversity.v_score_at(pairs, t.submap, t.topic_intents, l)


MEASURES: dict[str, MeasureDef] = {
    "p": MeasureDef("P", "required", lambda t, l: adhoc.precision_at(t.scored, l)),
    "rprec": MeasureDef("RPrec", "none", lambda t, l: adhoc.r_precision(t.scored)),
    "ap": MeasureDef("AP", "none", lambda t, l: adhoc.average_precision(t.scored)),
    "rr": MeasureDef("RR", "optional", lambda t, l: adhoc.reciprocal_rank(t.scored, l)),
    "hit@1": MeasureDef("Hit@1", "none", lambda t, l: float(adhoc.hit_at_1(t.scored))),
    "ng@1": MeasureDef("nG@1", "none", lambda t, l: adhoc.ng_at_1(t.scored)),
    "ncg": MeasureDef("nCG", "required", lambda t, l: adhoc.ncg_at(t.scored, l)),
    "dcg": MeasureDef("DCG", "required", lambda t, l: adhoc.dcg_original(t.scored, l, t.config.log_base)),
    "ndcg": MeasureDef("nDCG", "required", lambda t, l: adhoc.ndcg_original(t.scored, l, t.config.log_base)),
    "ms-ndcg": MeasureDef("MSnDCG", "required", lambda t, l: adhoc.ms_ndcg(t.scored, l)),
    "q": MeasureDef(
        "Q", "optional",
        lambda t, l: adhoc.q_measure(t.scored, t.config.beta) if l is None else adhoc.q_at(t.scored, l, t.config.beta),
    ),
    "p+": MeasureDef("P+", "optional", lambda t, l: adhoc.p_plus(t.scored, l, t.config.beta)),
    "err": MeasureDef("ERR", "required", lambda t, l: adhoc.err_at(t.scored, l, t.config.err_base)),
    "nerr": MeasureDef("nERR", "required", lambda t, l: adhoc.nerr_at(t.scored, l, t.config.err_base)),
    "i-rec": MeasureDef("I-rec", "required", lambda t, l: diversity.i_rec_at(t.ggl(), l), True),
    "d-ndcg": MeasureDef("D-nDCG", "required", lambda t, l: diversity.d_measure_at(t.ggl(), l, "ms-ndcg"), True),
    "d-q": MeasureDef("D-Q", "required", lambda t, l: diversity.d_measure_at(t.ggl(), l, "q", t.config.beta), True),
    "d#-ndcg": MeasureDef("D#-nDCG", "required", lambda t, l: _d_sharp(t, l), True),
    "d#-q": MeasureDef("D#-Q", "required", lambda t, l: _d_sharp(t, l, base="q"), True),
    "din-ndcg": MeasureDef("DIN-nDCG", "required", lambda t, l: diversity.d_measure_at(t.ggl("din"), l), True),
    "p+q": MeasureDef(
        "P+Q", "required",
        lambda t, l: diversity.p_plus_q_at(t.ranking, t.intent_judgments, t.topic_intents, t.scheme, l, t.config.beta),
        True,
    ),
    "v-score": MeasureDef("V-score", "required", _v_score, True),
    "qu-score": MeasureDef(
        "QU-score", "required",
        lambda t, l: diversity.qu_score_at(_d_sharp(t, l), _v_score(t, l), t.config.lam),
        True,
    ),
    "vi-d-ndcg": MeasureDef("VI-D-nDCG", "required", lambda t, l: diversity.d_measure_at(t.ggl("vi"), l), True),
    "vi-d#-ndcg": MeasureDef("VI-D#-nDCG", "required", lambda t, l: _d_sharp(t, l, "vi"), True),
}
FIXED_CUTOFF = {"hit@1", "ng@1"}

_TOKEN = re.compile(r"^(?P<name>[a-z#+\-]+?)(?:@(?P<cut>\d+))?$")


def parse_measures(tokens: Sequence[str], cutoffs: Sequence[int] = ()) -> list[Measure]:
    """Expand measure tokens such as ``ap``, ``q@10`` or ``ms-ndcg`` (with ``cutoffs``)."""
    out: list[Measure] = []
    for raw in tokens:
        for token in re.split(r"[,\s]+", raw.strip()):
            if not token:
                continue
            key = token.lower()
            if key in FIXED_CUTOFF:
                out.append(Measure(key, 1))
                continue
            m = _TOKEN.match(key)
            if not m or m["name"] not in MEASURES:
                raise MeasureSpecError(f"unknown measure {token!r}")
            name, spec = m["name"], MEASURES[m["name"]]
            if m["cut"] is not None:
                if spec.cutoff == "none":
                    raise MeasureSpecError(f"measure {token!r} takes no cutoff")
                cut = int(m["cut"])
                if cut < 1:
                    raise MeasureSpecError(f"cutoff must be >= 1 in {token!r}")
                out.append(Measure(name, cut))
            elif spec.cutoff != "none" and cutoffs:
                out.extend(Measure(name, c) for c in cutoffs)
            elif spec.cutoff == "required":
                raise MeasureSpecError(f"measure {token!r} needs a cutoff (e.g. {token}@10 or --cutoffs)")
            else:
                out.append(Measure(name, None))
    if not out:
        raise MeasureSpecError("at least one measure is required")
    return out


@dataclass
class EvalReport:
    rows: list[tuple[str, str, float]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    n_topics: int = 0
    n_undefined: int = 0
    n_missing: int = 0
    n_unknown: int = 0

    def format(self) -> str:
        return "".join(f"{topic}\t{label}\t{value:.4f}\n" for topic, label, value in self.rows)

    def values(self, topic: str) -> dict[str, float]:
        return {label: v for t, label, v in self.rows if t == topic}


def condense(run: RankedRun, qrels: GradedQrels, notes: Optional[list[str]] = None) -> RankedRun:
    """Remove unjudged documents from each topic, keeping order.

    Topics absent from the qrels are dropped; judged topics left empty are
    kept (and noted), although the text format cannot represent them.
    """
    topics = {}
    for topic, entries in run.topics.items():
        if topic not in qrels:
            continue
        judged = qrels.judged_docs(topic)
        kept = tuple(e for e in entries if e.doc in judged)
        if not kept and notes is not None:
            notes.append(f"topic {topic}: every document is unjudged")
        topics[topic] = kept
    return RankedRun(run.tag, topics)


def evaluate_collection(
    qrels: GradedQrels,
    run: RankedRun,
    config: EvalConfig,
    intents: Optional[IntentSet] = None,
    classes: Optional[EquivalenceClasses] = None,
    submap: Optional[Mapping[str, Mapping[str, str]]] = None,
) -> EvalReport:
    measures = parse_measures(config.measures, config.cutoffs)
    scheme = parse_gain_spec(config.gains, qrels.max_level)
    report = EvalReport()
    if not run.topics:
        report.warnings.append("run contains no topics")
        return report
    if config.condensed:
        run = condense(run, qrels, report.warnings)

    topics = set(run.topics)
    if config.missing_zero:
        missing = set(qrels.topics()) - topics
        report.n_missing = len(missing)
        topics |= missing
    unknown = {t for t in run.topics if t not in qrels}
    report.n_unknown = len(unknown)
    if unknown:
        report.warnings.append(f"{len(unknown)} run topic(s) absent from qrels")
    if report.n_missing:
        report.warnings.append(f"{report.n_missing} qrels topic(s) absent from run, scored as empty rankings")

    def score_topic(topic: str) -> list[tuple[str, Optional[float]]]:
        if topic in unknown:
            return [(m.label, None) for m in measures]
        data = TopicData(
            topic, run.topics.get(topic, ()), qrels, scheme, config,
            intents=intents, classes=classes, submap=(submap or {}).get(topic, {}),
        )
        values = []
        for m in measures:
            try:
                values.append((m.label, MEASURES[m.key].compute(data, m.cutoff)))
            except UndefinedTopicError:
                values.append((m.label, None))
        return values

    ordered = sorted(topics)
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(score_topic, ordered))
    else:
        results = [score_topic(t) for t in ordered]

    sums: dict[str, list[float]] = {m.label: [] for m in measures}
    undefined_topics = set()
    for topic, values in zip(ordered, results):
        for label, value in values:
            if value is None:
                undefined_topics.add(topic)
                if config.r0_policy == R0_EXCLUDE:
                    continue
                value = 0.0
            report.rows.append((topic, label, value))
            sums[label].append(value)
    report.n_topics = len(ordered)
    report.n_undefined = len(undefined_topics)
    if undefined_topics:
        policy = "scored 0" if config.r0_policy == R0_ZERO else "excluded"
        report.warnings.append(f"{len(undefined_topics)} topic(s) with undefined measures (R=0 or unjudged), {policy}")
    for m in measures:
        if sums[m.label]:
            report.rows.append((ALL_TOPICS, m.label, sum(sums[m.label]) / len(sums[m.label])))
    return report


def evaluate(config: EvalConfig) -> EvalReport:
    """Load the configured files and evaluate the run."""
    if config.qrels is None or config.run is None:
        raise ValidationError("eval needs both --qrels and --run")
    qrels = load(parse_qrels, config.qrels)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        run = load(parse_run, config.run)
    intents = None
    if config.intents:
        vert = read_text(config.verticals) if config.verticals else None
        intents = load(parse_intents, config.intents, vert)
    classes = load(parse_classes, config.classes) if config.classes else None
    submap = load(parse_submap, config.submap) if config.submap else None
    report = evaluate_collection(qrels, run, config, intents, classes, submap)
    report.warnings[:0] = [str(w.message) for w in caught]
    return report


@dataclass
class GainReport:
    scheme: GainScheme
    label_rows: list[tuple[str, str, float, float, Optional[int], float]] = field(default_factory=list)

    def format(self) -> str:
        lines = ["level\tgain\n"]
        lines += [f"L{x}\t{g:.4f}\n" for x, g in sorted(self.scheme.values.items(), reverse=True)]
        if self.label_rows:
            lines.append("topic\tdoc\tsum\tmean\tmajority\tupgraded\n")
            for topic, doc, total, mean, majority, ugv in self.label_rows:
                maj = "-" if majority is None else f"L{majority}"
                lines.append(f"{topic}\t{doc}\t{total:.4f}\t{mean:.4f}\t{maj}\t{ugv:.4f}\n")
        return "".join(lines)


def parse_labels(text: str) -> list[tuple[str, str, list[float]]]:
    """Read ``topic doc score score ...`` lines of per-assessor scores."""
    rows, width = [], None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        fields = raw.split("#", 1)[0].split()
        if not fields:
            continue
        if len(fields) < 3:
            raise ValidationError("expected 'topic doc score [score ...]'", lineno)
        try:
            scores = [float(x) for x in fields[2:]]
        except ValueError:
            raise ValidationError("non-numeric assessor score", lineno) from None
        if width is not None and len(scores) != width:
            raise ValidationError(f"expected {width} assessor scores, got {len(scores)}", lineno)
        width = len(scores)
        rows.append((fields[0], fields[1], scores))
    return rows


def show_gains(
    spec: str,
    max_level: int,
    labels: Sequence[tuple[str, str, Sequence[float]]] = (),
    p: float = DEFAULT_UPGRADE_P,
    d_max: Optional[float] = None,
) -> GainReport:
    scheme = parse_gain_spec(spec, max_level)
    report = GainReport(scheme)
    if labels:
        if d_max is None:
            d_max = max(max(scores) for _, _, scores in labels)
        for topic, doc, scores in labels:
            integral = all(float(s).is_integer() for s in scores)
            majority = aggregate_majority_l0_fallback([int(s) for s in scores]) if integral else None
            report.label_rows.append(
                (topic, doc, sum(scores), aggregate_average(scores), majority, upgrade_labels(scores, d_max, p))
            )
    return report
