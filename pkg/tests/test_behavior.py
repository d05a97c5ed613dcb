from pathlib import Path

import numpy as np
import pytest

from emoread.behavior import (
    ExternalAttentionMap,
    GazetteerTagger,
    HybridAttentionMap,
    ModelAttentionMap,
    attention_dump,
    beh_sim,
    behavior_report,
    build_eam,
    build_ham,
    emotion_word_set,
    render_heatmap,
    render_heatmap_page,
    word_prob,
    word_sim,
)
from emoread.corpus import Document
from emoread.errors import DataError

GOLDEN = Path(__file__).parent / "data" / "golden_heatmap.html"


def doc(tokens, doc_id="d", raw=None):
    return Document(id=doc_id, raw_text=raw if raw is not None else " ".join(tokens),
                    tokens=tuple(tokens))


def eam(flags, doc_id="d"):
    return ExternalAttentionMap(doc_id=doc_id, flags=np.asarray(flags))


def model_map(weights, doc_id="d"):
    return ModelAttentionMap(doc_id=doc_id, weights=np.asarray(weights, dtype=float))


class TestBuildEam:
    def test_lexicon_hit(self):
        out = build_eam(doc(["the", "attackers", "fled"]), {"attackers"})
        assert out.flags.tolist() == [0, 1, 0]

    def test_no_hits_lands_in_d_prime(self):
        out = build_eam(doc(["the", "quiet", "morning"]), {"attackers"})
        assert out.flags.tolist() == [0, 0, 0]
        assert out.is_empty

    def test_entity_and_emotion_word(self):
        tagger = GazetteerTagger({"pakistan"}, capitalized_heuristic=False)
        out = build_eam(doc(["pakistan", "protest"]), {"protest"}, tagger)
        assert out.flags.tolist() == [1, 1]

    def test_capitalized_heuristic_skips_sentence_initial(self):
        d = doc(["when", "lahore", "marched"], raw="When Lahore marched")
        out = build_eam(d, set(), GazetteerTagger())
        assert out.flags.tolist() == [0, 1, 0]

    def test_emotion_word_set_threshold(self):
        lexicon = {"grim": np.array([.6, 0, 0, .2, 0]),
                   "mild": np.array([.2, .1, .2, 0, 0])}
        assert emotion_word_set(lexicon, threshold=0.5) == {"grim"}


class TestBuildHam:
    def test_eam_all_ones_copies_model(self):
        m = model_map([.5, .3, .2])
        out = build_ham(m, eam([1, 1, 1]))
        assert np.allclose(out.weights, m.weights)

    def test_eam_all_zeros(self):
        out = build_ham(model_map([.5, .3, .2]), eam([0, 0, 0]))
        assert np.all(out.weights == 0.0)

    def test_elementwise_rule(self):
        out = build_ham(model_map([.5, .3, .2]), eam([1, 0, 1]))
        assert np.allclose(out.weights, [.5, 0, .2])

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            build_ham(model_map([.5, .5]), eam([1, 0, 0]))

    def test_support_subset_property(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 12))
            w = rng.random(n)
            w /= w.sum()
            flags = rng.integers(0, 2, size=n)
            out = build_ham(model_map(w), eam(flags))
            assert np.all(out.binary <= flags)

    def test_binary_view_thresholds_support(self):
        out = HybridAttentionMap("d", np.array([0.0, 1e-13, 0.4]))
        assert out.binary.tolist() == [0, 0, 1]


class TestBehSim:
    def test_perfect_ranking(self):
        value, skipped = beh_sim([(np.array([.6, .3, .1]), eam([1, 1, 0]))])
        assert value == 1.0 and skipped == 0

    def test_all_ties(self):
        value, _ = beh_sim([(np.array([.25, .25, .25, .25]), eam([1, 0, 1, 0]))])
        assert value == 0.5

    def test_inverted_ranking(self):
        value, _ = beh_sim([(np.array([.1, .9]), eam([1, 0]))])
        assert value == 0.0

    def test_degenerate_docs_skipped_and_counted(self):
        pairs = [
            (np.array([.5, .5]), eam([1, 1])),   # no negatives
            (np.array([.5, .5]), eam([0, 0])),   # no positives
            (np.array([.9, .1]), eam([1, 0])),
        ]
        value, skipped = beh_sim(pairs)
        assert skipped == 2 and value == 1.0

    def test_all_skipped_errors(self):
        with pytest.raises(DataError):
            beh_sim([(np.array([.5, .5]), eam([1, 1]))])

    def test_random_attention_permutation(self, rng):
        # attention independent of the labels: expected AUC 1/2
        pairs = []
        total_tokens = 0
        for i in range(400):
            n = int(rng.integers(5, 12))
            total_tokens += n
            w = rng.random(n)
            w /= w.sum()
            flags = np.zeros(n, dtype=int)
            flags[rng.choice(n, size=max(1, n // 3), replace=False)] = 1
            if flags.sum() == n:
                flags[0] = 0
            pairs.append((w, eam(flags, f"d{i}")))
        value, _ = beh_sim(pairs)
        assert total_tokens >= 200
        assert value == pytest.approx(0.5, abs=0.05)


class TestWordSim:
    def test_identical_nonzero(self):
        ham = HybridAttentionMap("d", np.array([.4, 0, .6]))
        value, excluded = word_sim([(ham, eam([1, 0, 1]))])
        assert value == pytest.approx(1.0) and excluded == 0

    def test_orthogonal(self):
        value, _ = word_sim([(np.array([1, 0]), eam([0, 1]))])
        assert value == 0.0

    def test_half_overlap(self):
        value, _ = word_sim([(np.array([1, 1, 0]), eam([1, 0, 1]))])
        assert value == pytest.approx(0.5)

    def test_zero_ham_against_nonzero_eam(self):
        value, _ = word_sim([(np.array([0, 0, 0]), eam([1, 0, 1]))])
        assert value == 0.0

    def test_d_prime_excluded_from_denominator(self):
        pairs = [(np.array([1, 0]), eam([1, 0])),
                 (np.array([0, 0]), eam([0, 0]))]
        value, excluded = word_sim(pairs)
        assert value == pytest.approx(1.0) and excluded == 1

    def test_all_d_prime_errors(self):
        with pytest.raises(DataError):
            word_sim([(np.array([0, 0]), eam([0, 0]))])


class TestWordProb:
    def test_full_identification(self):
        value, _ = word_prob([(np.array([1, 1, 1, 0]), eam([1, 1, 1, 0]))])
        assert value == 1.0

    def test_partial_identification(self):
        value, _ = word_prob([(np.array([1, 1, 1, 0, 0]), eam([1, 1, 1, 1, 0]))])
        assert value == pytest.approx(0.75)

    def test_empty_eam_doc_contributes_nothing(self):
        pairs = [(np.array([0, 0]), eam([0, 0])),
                 (np.array([1, 0]), eam([1, 0]))]
        value, excluded = word_prob(pairs)
        assert value == pytest.approx(1.0) and excluded == 1

    def test_equality_iff_every_key_term_attended(self, rng):
        hams = [np.array([1, 1, 0]), np.array([1, 0, 0])]
        eams = [eam([1, 1, 0], "a"), eam([1, 1, 0], "b")]
        value, _ = word_prob(list(zip(hams, eams)))
        assert value < 1.0
        value_full, _ = word_prob([(np.array([1, 1, 0]), eams[0])])
        assert value_full == 1.0


class TestBehaviorReport:
    def test_report_scores_in_unit_interval(self, rng):
        docs, maps, eams = [], [], []
        for i in range(12):
            n = int(rng.integers(4, 9))
            tokens = [f"t{j}" for j in range(n)]
            docs.append(doc(tokens, f"d{i}"))
            w = rng.random(n)
            maps.append(model_map(w / w.sum(), f"d{i}"))
            flags = rng.integers(0, 2, size=n)
            eams.append(eam(flags, f"d{i}"))
        report = behavior_report(docs, maps, eams, "toy")
        for value in (report.beh_sim, report.word_sim, report.word_prob):
            assert 0.0 <= value <= 1.0
        row = report.to_tsv_row()
        assert row.startswith("toy\t")


class TestHeatmaps:
    def test_uniform_weights_uniform_shading(self):
        d = doc(["storm", "hits", "coast", "town"])
        html = render_heatmap(np.full(4, 0.25), d)
        assert html.count("rgba(220,60,60,1.000)") == 4

    def test_one_hot_single_dark_token(self):
        d = doc(["storm", "hits", "coast"])
        html = render_heatmap(np.array([0.0, 1.0, 0.0]), d)
        assert html.count("rgba(220,60,60,1.000)") == 1
        assert html.count("rgba(220,60,60,0.000)") == 2

    def test_golden_fixture_bytes(self):
        d = doc(["pakistan", "protest", "turns", "violent"], doc_id="fixture-0")
        weights = np.array([0.15, 0.45, 0.05, 0.35])
        page = render_heatmap_page([(weights, d)])
        assert page.encode("utf-8") == GOLDEN.read_bytes()

    def test_escapes_html(self):
        d = doc(["<b>", "safe"])
        html = render_heatmap(np.array([.5, .5]), d)
        assert "<b>" not in html and "&lt;b&gt;" in html

    def test_attention_dump_format(self):
        d = doc(["calm", "sea"], doc_id="x1")
        dump = attention_dump(d, np.array([0.75, 0.25]))
        assert dump == "x1\tcalm\t0.75\nx1\tsea\t0.25\n"
