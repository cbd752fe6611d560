import itertools
import math
import random

import pytest
from hypothesis import given, strategies as st

from gradedeval import adhoc, diversity
from gradedeval.adhoc import UndefinedTopicError
from gradedeval.corpus import INFORMATIONAL, NAVIGATIONAL, Intent
from gradedeval.gains import GainScheme, gains_linear

from randomized import intents_of, random_diversity_instance, scheme_of

BINARY = gains_linear(1)
F2_JUDGED = {"i1": {"d1": 1, "d3": 1, "d2": 0}, "i2": {"d2": 1, "d3": 1}}
F2_INTENTS = [Intent("i1", 0.6, INFORMATIONAL), Intent("i2", 0.4, NAVIGATIONAL)]


def ggl(ranking, judged=F2_JUDGED, intents=F2_INTENTS, scheme=BINARY):
    return diversity.global_gain_list(ranking, judged, intents, scheme)


class TestGlobalGains:
    def test_f2(self):
        g = ggl(["d1", "d2"])
        assert g.global_gains == (0.6, 0.4)
        assert g.ideal_docs == ("d3", "d1", "d2")
        assert g.ideal_gains == pytest.approx((1.0, 0.6, 0.4), abs=1e-15)

    def test_single_intent_reduces_to_adhoc(self):
        judged = {"d1": 2, "d2": 1, "d3": 0, "d4": 0}
        scheme = gains_linear(2)
        one = [Intent("i", 1.0, INFORMATIONAL)]
        for ranking in (["d2", "d3", "d1"], ["d1", "d2"], ["d3", "d4"]):
            g = ggl(ranking, {"i": judged}, one, scheme)
            sl = adhoc.build_scored_list(ranking, judged, scheme)
            assert g.global_gains == sl.gains
            for l in (1, 2, 3, 5):
                assert diversity.d_measure_at(g, l) == adhoc.ms_ndcg(sl, l)
                assert diversity.p_plus_q_at(ranking, {"i": judged}, one, scheme, l) == adhoc.q_at(sl, l)

    def test_missing_intents(self):
        with pytest.raises(ValueError):
            ggl(["d1"], intents=[])

    def test_unjudged_document_has_zero_gain(self):
        g = ggl(["dX", "d3"])
        assert g.global_gains == (0.0, 1.0)
        assert diversity.global_gain_list(["dX", "d3"], F2_JUDGED, F2_INTENTS, BINARY, condensed=True).docs == ("d3",)


class TestIRec:
    def test_f2(self):
        assert diversity.i_rec_at(ggl(["d3"]), 1) == 1
        assert diversity.i_rec_at(ggl(["d1", "d2"]), 1) == 0.5
        assert diversity.i_rec_at(ggl(["d1", "d2"]), 2) == 1
        assert diversity.i_rec_at(ggl(["dX"]), 1) == 0

    def test_bad_cutoff(self):
        with pytest.raises(ValueError):
            diversity.i_rec_at(ggl(["d1"]), 0)


class TestDMeasures:
    def test_d_ndcg_f2(self):
        expected = (1 + 0.4 / math.log2(3) + 0.6 / 2) / (1 + 0.6 / math.log2(3) + 0.4 / 2)
        value = diversity.d_measure_at(ggl(["d3", "d2", "d1"]), 3)
        assert value == pytest.approx(expected, abs=1e-12)
        assert round(value, 4) == 0.9834

    def test_d_sharp_f2(self):
        value = diversity.d_sharp_at(ggl(["d3", "d2", "d1"]), 3)
        assert value == pytest.approx(0.5 + 0.5 * diversity.d_measure_at(ggl(["d3", "d2", "d1"]), 3), abs=1e-15)
        assert round(value, 4) == 0.9917

    def test_d_sharp_boundaries(self):
        assert diversity.d_sharp(0.5, 0.9, 0) == 0.9
        assert diversity.d_sharp(0.5, 0.9, 1) == 0.5
        with pytest.raises(ValueError):
            diversity.d_sharp(0.5, 0.9, 1.5)

    def test_ideal_prefix(self):
        g = ggl(["d3", "d1", "d2"])
        for l in (1, 2, 3, 10):
            assert diversity.d_measure_at(g, l) == pytest.approx(1, abs=1e-12)
            assert diversity.d_measure_at(g, l, "q") == pytest.approx(1, abs=1e-12)

    def test_empty_ideal_is_undefined(self):
        with pytest.raises(UndefinedTopicError):
            diversity.d_measure_at(ggl(["d1"], judged={"i1": {"d1": 0}, "i2": {}}), 1)

    def test_unknown_base(self):
        with pytest.raises(ValueError):
            diversity.d_measure_at(ggl(["d1"]), 1, "err")


class TestDIN:
    def test_f2(self):
        g = diversity.din_global_gain_list(["d3", "d2", "d1"], F2_JUDGED, F2_INTENTS, BINARY)
        assert g.global_gains == pytest.approx((1.0, 0.0, 0.6), abs=1e-15)
        assert g.ideal_gains == ggl(["d3"]).ideal_gains
        assert round(diversity.d_measure_at(g, 3), 4) == 0.8235

    def test_first_navigational_hit_counts(self):
        g = diversity.din_global_gain_list(["d2", "d3"], F2_JUDGED, F2_INTENTS, BINARY)
        assert g.global_gains == pytest.approx((0.4, 0.6), abs=1e-15)

    def test_no_navigational_intents_equals_plain(self):
        intents = [Intent("i1", 0.6, INFORMATIONAL), Intent("i2", 0.4, INFORMATIONAL)]
        ranking = ["d3", "d2", "d1", "d3x"]
        assert (diversity.din_global_gain_list(ranking, F2_JUDGED, intents, BINARY).global_gains
                == ggl(ranking, intents=intents).global_gains)


class TestPPlusQ:
    def test_f2(self):
        value = diversity.p_plus_q_at(["d3", "d2", "d1"], F2_JUDGED, F2_INTENTS, BINARY, 3)
        assert value == pytest.approx(0.94, abs=1e-12)

    def test_no_relevant(self):
        assert diversity.p_plus_q_at(["dX", "dY"], F2_JUDGED, F2_INTENTS, BINARY, 2) == 0


class TestHierarchy:
    def test_h_score(self):
        gold = {f"s{i}": "a" for i in range(10)}
        system = dict(gold, s9="b")
        assert diversity.h_score(system, gold) == 0.9
        assert diversity.h_score(gold, gold) == 1
        with pytest.raises(ValueError):
            diversity.h_score({}, gold)
        with pytest.raises(ValueError):
            diversity.h_score({"zz": "a"}, gold)

    def test_h_measure(self):
        assert diversity.h_measure(0.9, 0.8, 0.6, 0.5) == pytest.approx(0.63, abs=1e-12)
        assert diversity.h_measure(0, 0.8, 0.6) == 0
        assert diversity.h_measure(0.9, 0.8, 0.6, 1) == pytest.approx(0.72, abs=1e-12)
        with pytest.raises(ValueError):
            diversity.h_measure(0.9, 0.8, 0.6, -0.1)


class TestVerticals:
    intents = [
        Intent("i1", 0.6, INFORMATIONAL, {"Web": 0.5, "Image": 0.3}),
        Intent("i2", 0.4, NAVIGATIONAL, {"Image": 0.8, "Web": 0.1}),
    ]
    submap = {"s1": "i1", "s2": "i2"}

    def test_v_score(self):
        entries = [("s1", "Image"), ("s2", "Image")]
        assert diversity.v_score_at(entries, self.submap, self.intents, 2) == pytest.approx(0.8, abs=1e-12)
        assert diversity.v_score_at([("s1", "Web"), ("s2", "Image")], self.submap, self.intents, 2) == 1
        assert diversity.v_score_at([("s1", "News")], self.submap, self.intents, 1) == 0

    def test_v_score_web_default_and_unmapped(self):
        assert diversity.v_score_at([("s1", None), ("zz", "Web")], self.submap, self.intents, 2) == 0.5

    def test_v_score_errors(self):
        flat = [Intent("i1", 1.0, INFORMATIONAL, {"Web": 0.0})]
        with pytest.raises(ValueError):
            diversity.v_score_at([("s1", "Web")], {"s1": "i1"}, flat, 1)
        with pytest.raises(ValueError):
            diversity.v_score_at([("s1", "Web")], {"s1": "i9"}, self.intents, 1)

    def test_qu_score(self):
        assert diversity.qu_score_at(0.9, 0.8, 0.5) == pytest.approx(0.85, abs=1e-12)
        assert diversity.qu_score_at(0.9, 0.8, 1) == 0.9
        assert diversity.qu_score_at(0.9, 0.8, 0) == 0.8
        with pytest.raises(ValueError):
            diversity.qu_score_at(0.9, 0.8, 2)

    def test_vi_weighting(self):
        intents = [Intent("i1", 0.6, INFORMATIONAL, {"Web": 0.5}), Intent("i2", 0.4, NAVIGATIONAL)]
        g = diversity.vi_global_gain_list([("d1", "Web")], F2_JUDGED, intents, BINARY)
        assert g.global_gains == pytest.approx((0.3,), abs=1e-15)

    def test_vi_all_ones_reduces_to_plain(self):
        intents = [Intent(i.id, i.prob, i.tag, {"Web": 1.0}) for i in F2_INTENTS]
        ranking = ["d3", "d2", "d1"]
        vi = diversity.vi_global_gain_list([(d, None) for d in ranking], F2_JUDGED, intents, BINARY)
        plain = ggl(ranking, intents=intents)
        assert vi.global_gains == plain.global_gains
        assert vi.ideal_gains == plain.ideal_gains

    def test_vi_zero_weights(self):
        intents = [Intent(i.id, i.prob, i.tag, {"Image": 1.0}) for i in F2_INTENTS]
        g = diversity.vi_global_gain_list([("d3", "Web")], F2_JUDGED, intents, BINARY)
        assert g.global_gains == (0.0,)

    def test_vertical_entry(self):
        g = diversity.vi_global_gain_list([("v1", "Image"), ("v2", "Image"), ("d1", "Web")], F2_JUDGED,
                                          self.intents, BINARY)
        image = 0.6 * 0.3 * 2 + 0.4 * 0.8 * 2
        assert g.global_gains == pytest.approx((image, 0.0, 0.3), abs=1e-12)
        assert g.covers[0] == {"i1", "i2"} and g.covers[1] == frozenset()
        assert "<Image>" in g.ideal_docs


# properties

div_instances = st.randoms(use_true_random=False).map(random_diversity_instance)


def _ranking(inst, rnd):
    docs = inst.docs()
    rnd.shuffle(docs)
    return docs + ["u0"]


@given(div_instances, st.randoms(use_true_random=False), st.integers(1, 8))
def test_measures_in_unit_interval(inst, rnd, l):
    ranking = _ranking(inst, rnd)
    intents, scheme, judged = intents_of(inst), scheme_of(inst), inst.intent_levels
    g = diversity.global_gain_list(ranking, judged, intents, scheme)
    din = diversity.din_global_gain_list(ranking, judged, intents, scheme)
    values = [diversity.i_rec_at(g, l), diversity.p_plus_q_at(ranking, judged, intents, scheme, l)]
    if g.ideal_gains:
        values += [diversity.d_measure_at(g, l), diversity.d_measure_at(g, l, "q"),
                   diversity.d_sharp_at(g, l), diversity.d_measure_at(din, l)]
    for v in values:
        assert -1e-12 <= v <= 1 + 1e-12


@given(st.randoms(use_true_random=False))
def test_binary_global_gain_is_sum_of_covering_probabilities(rnd):
    inst = random_diversity_instance(rnd)
    intents = intents_of(inst)
    ranking = _ranking(inst, rnd)
    binary = {i: {d: min(x, 1) for d, x in lv.items()} for i, lv in inst.intent_levels.items()}
    g = diversity.global_gain_list(ranking, binary, intents, BINARY)
    for doc, gg in zip(ranking, g.global_gains):
        covering = {i.id for i in intents if inst.intent_levels.get(i.id, {}).get(doc, 0) > 0}
        assert gg == pytest.approx(sum(i.prob for i in intents if i.id in covering), abs=1e-12)


@given(st.randoms(use_true_random=False))
def test_din_without_navigational_intents_is_plain(rnd):
    inst = random_diversity_instance(rnd, navigational=False)
    intents, scheme = intents_of(inst), scheme_of(inst)
    ranking = _ranking(inst, rnd)
    plain = diversity.global_gain_list(ranking, inst.intent_levels, intents, scheme)
    din = diversity.din_global_gain_list(ranking, inst.intent_levels, intents, scheme)
    assert din == plain


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0.001, 0.999))
def test_d_sharp_monotone(i_rec, d, bump, gamma):
    base = diversity.d_sharp(i_rec, d, gamma)
    assert diversity.d_sharp(min(1, i_rec + bump), d, gamma) >= base
    assert diversity.d_sharp(i_rec, min(1, d + bump), gamma) >= base


def test_global_ideal_maximises_d_ndcg_exhaustive():
    rng = random.Random(7)
    for _ in range(60):
        inst = random_diversity_instance(rng, max_docs=6)
        intents, scheme = intents_of(inst), scheme_of(inst)
        ideal = diversity.global_gain_list(inst.docs(), inst.intent_levels, intents, scheme)
        if not ideal.ideal_gains:
            continue
        best_order = list(ideal.ideal_docs)
        for l in (1, 3, 6):
            best = diversity.d_measure_at(diversity.global_gain_list(best_order, inst.intent_levels, intents, scheme), l)
            assert best == pytest.approx(1, abs=1e-12)
            for perm in itertools.permutations(inst.docs()):
                g = diversity.global_gain_list(list(perm), inst.intent_levels, intents, scheme)
                assert diversity.d_measure_at(g, l) <= best + 1e-12


def test_explicit_gain_scheme_weighting():
    scheme = GainScheme("x", {0: 0, 1: 1, 2: 5})
    judged = {"a": {"d": 2}, "b": {"d": 1}}
    intents = [Intent("a", 0.5, INFORMATIONAL), Intent("b", 0.25, INFORMATIONAL)]
    assert ggl(["d"], judged, intents, scheme).global_gains == (0.5 * 5 + 0.25 * 1,)
