import numpy as np
import pytest

from emoread.embedding import (
    CounterFitter,
    EmbeddingTable,
    EmotionConstraintSet,
    build_constraints,
    cohesion_report,
    counterfit,
    lexicon_classes,
    load_constraints,
    load_embeddings,
    load_lexicon,
    save_constraints,
    save_embeddings,
)
from emoread.errors import DataError, NumericalError


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


class TestLoadEmbeddings:
    def test_three_lines(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("a 1 0 0 0\nb 0 1 0 0\nc 0 0 1 0\n", encoding="utf-8")
        table, skipped = load_embeddings(path, dim=4)
        assert len(table.words) == 3 and skipped == 0
        assert table.dim == 4

    def test_short_line_skipped(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("a 1 0 0 0\nb 0 1 0\n", encoding="utf-8")
        table, skipped = load_embeddings(path, dim=4)
        assert len(table.words) == 1 and skipped == 1

    def test_empty_file_errors(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("", encoding="utf-8")
        with pytest.raises(DataError):
            load_embeddings(path, dim=4)

    def test_mostly_malformed_errors(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("a 1 0 0 0\nb 1\nc 2\nd 3\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_embeddings(path, dim=4)

    def test_write_read_roundtrip(self, tmp_path, small_table):
        path = tmp_path / "vec.txt"
        save_embeddings(small_table, path)
        loaded, _ = load_embeddings(path, dim=small_table.dim)
        assert loaded.words == small_table.words
        assert np.array_equal(loaded.matrix, small_table.matrix)


class TestBuildConstraints:
    LEXICON = {
        "good": np.array([0, 0, 0.9, 0, 0]),
        "happy": np.array([0, 0, 0.8, 0, 0]),
        "bad": np.array([0.9, 0, 0, 0, 0]),
    }

    def test_enumerated_pairs(self):
        cons = build_constraints(self.LEXICON, threshold=0.5, seed=0)
        assert set(cons.attract_pairs) == {("good", "happy")}
        assert {frozenset(p) for p in cons.repel_pairs} == {
            frozenset(("good", "bad")), frozenset(("happy", "bad"))}

    def test_nothing_passes_threshold(self):
        with pytest.raises(DataError):
            build_constraints(self.LEXICON, threshold=1.1)

    def test_max_pairs_cardinality_seed_stable(self):
        lexicon = dict(self.LEXICON)
        lexicon["glad"] = np.array([0, 0, 0.95, 0, 0])
        first = build_constraints(lexicon, threshold=0.5, max_pairs=1, seed=9)
        again = build_constraints(lexicon, threshold=0.5, max_pairs=1, seed=9)
        assert len(first.attract_pairs) == 1 and len(first.repel_pairs) == 1
        assert first == again

    def test_no_pair_in_both_sets(self, toy_lexicon_path):
        lexicon = load_lexicon(toy_lexicon_path)
        cons = build_constraints(lexicon, threshold=0.5, seed=0)
        assert not set(cons.attract_pairs) & set(cons.repel_pairs)

    def test_surprise_has_no_repel(self):
        lexicon = {
            "stun": np.array([0, 0, 0, 0, 0.9]),
            "shock": np.array([0, 0, 0, 0, 0.9]),
            "glee": np.array([0, 0, 0.9, 0, 0]),
            "woe": np.array([0, 0, 0, 0.9, 0]),
        }
        cons = build_constraints(lexicon, threshold=0.5, seed=0)
        repel_words = {w for pair in cons.repel_pairs for w in pair}
        assert "stun" not in repel_words and "shock" not in repel_words

    def test_file_roundtrip(self, tmp_path):
        cons = build_constraints(self.LEXICON, threshold=0.5, seed=0)
        path = tmp_path / "constraints.tsv"
        save_constraints(cons, path)
        loaded = load_constraints(path)
        assert set(loaded.attract_pairs) == set(cons.attract_pairs)
        assert set(loaded.repel_pairs) == set(cons.repel_pairs)


class TestCounterfit:
    def test_empty_constraints_identity_with_warning(self, small_table):
        cons = EmotionConstraintSet((), ())
        with pytest.warns(UserWarning):
            result = counterfit(small_table, cons, epochs=5)
        norms = np.linalg.norm(small_table.matrix, axis=1, keepdims=True)
        assert np.allclose(result.table.matrix, small_table.matrix / norms)

    def test_attract_increases_cosine(self):
        rng = np.random.default_rng(3)
        table = EmbeddingTable(("w1", "w2"), np.array([unit(rng.normal(size=8)),
                                                       unit(rng.normal(size=8))]))
        cons = EmotionConstraintSet((("w1", "w2"),), ())
        before = float(table.matrix[0] @ table.matrix[1])
        result = counterfit(table, cons, epochs=20, lr=0.1)
        after = float(result.table.matrix[0] @ result.table.matrix[1])
        assert after > before

    def test_identical_repel_pair_separates(self):
        v = unit(np.arange(1.0, 9.0))
        table = EmbeddingTable(("w1", "w2"), np.array([v, v.copy()]))
        cons = EmotionConstraintSet((), (("w1", "w2"),))
        result = counterfit(table, cons, epochs=20, lr=0.1, seed=0)
        after = float(result.table.matrix[0] @ result.table.matrix[1])
        assert after < 1.0 - 1e-6

    def test_vocab_and_dim_preserved(self, small_table, toy_lexicon_path):
        lexicon = load_lexicon(toy_lexicon_path)
        cons = build_constraints(lexicon, threshold=0.5, seed=0)
        result = counterfit(small_table, cons, epochs=3)
        assert result.table.words == small_table.words
        assert result.table.dim == small_table.dim
        assert result.table.variant == "counterfitted"

    def test_unit_norms(self, toy_vectors_path, toy_lexicon_path):
        table, _ = load_embeddings(toy_vectors_path, dim=16)
        cons = build_constraints(load_lexicon(toy_lexicon_path), threshold=0.5, seed=0)
        result = counterfit(table, cons, epochs=5)
        norms = np.linalg.norm(result.table.matrix, axis=1)
        assert np.allclose(norms, 1.0, atol=1e-9)

    def test_loss_trace_finite_and_tail_non_increasing(self, toy_vectors_path,
                                                       toy_lexicon_path):
        # lr_ref for the bundled toy constraint set is the 0.1 default
        table, _ = load_embeddings(toy_vectors_path, dim=16)
        cons = build_constraints(load_lexicon(toy_lexicon_path), threshold=0.5, seed=0)
        result = counterfit(table, cons, epochs=20, lr=0.1)
        losses = result.epoch_losses
        assert len(losses) == 20
        assert all(np.isfinite(v) for v in losses)
        tail = losses[-5:]
        assert all(tail[i + 1] <= tail[i] + 1e-12 for i in range(4))

    def test_huge_preserve_weight_pins_to_original(self, small_table,
                                                   toy_lexicon_path):
        cons = build_constraints(load_lexicon(toy_lexicon_path), threshold=0.5, seed=0)
        result = counterfit(small_table, cons, epochs=20, lr=0.1,
                            preserve_weight=1e9)
        originals = small_table.matrix / np.linalg.norm(
            small_table.matrix, axis=1, keepdims=True)
        cos = np.sum(result.table.matrix * originals, axis=1)
        assert np.all(cos >= 0.999)

    def test_oov_pairs_dropped_and_counted(self, small_table):
        cons = EmotionConstraintSet(
            (("notaword", "alsomissing"), (small_table.words[0], small_table.words[1])),
            ())
        result = counterfit(small_table, cons, epochs=2)
        assert result.dropped_oov_pairs == 1

    def test_rejects_counterfitted_input(self, small_table):
        table = EmbeddingTable(small_table.words, small_table.matrix, "counterfitted")
        with pytest.raises(DataError):
            counterfit(table, EmotionConstraintSet((), ()), epochs=1)

    def test_nan_aborts_with_epoch(self):
        bad = EmbeddingTable(("w1", "w2"),
                             np.array([[1.0, 0.0], [0.0, 1.0]]))
        cons = EmotionConstraintSet((("w1", "w2"),), ())
        with pytest.raises(NumericalError, match="epoch"):
            counterfit(bad, cons, epochs=5, lr=1e300, preserve_weight=1e300)


class TestCohesionReport:
    CLASSES = {"good": "joy", "happy": "joy", "bad": "anger", "vile": "anger"}

    def test_identical_vectors(self):
        v = unit([1, 2, 3])
        table = EmbeddingTable(tuple(self.CLASSES), np.tile(v, (4, 1)))
        report = cohesion_report(table, self.CLASSES)
        assert report.within_class_cosine == pytest.approx(1.0)
        assert report.cross_class_cosine == pytest.approx(1.0)

    def test_orthogonal_class_vectors(self):
        rows = {"good": [1, 0], "happy": [1, 0], "bad": [0, 1], "vile": [0, 1]}
        table = EmbeddingTable(tuple(rows), np.array(list(rows.values()), dtype=float))
        report = cohesion_report(table, self.CLASSES)
        assert report.within_class_cosine == pytest.approx(1.0)
        assert report.cross_class_cosine == pytest.approx(0.0)

    def test_insufficient_membership(self):
        table = EmbeddingTable(("good", "bad"), np.eye(2))
        with pytest.raises(DataError):
            cohesion_report(table, {"good": "joy", "bad": "anger"})

    def test_counterfit_improves_cohesion(self, toy_vectors_path, toy_lexicon_path):
        table, _ = load_embeddings(toy_vectors_path, dim=16)
        lexicon = load_lexicon(toy_lexicon_path)
        classes = lexicon_classes(lexicon, 0.5)
        cons = build_constraints(lexicon, threshold=0.5, seed=0)
        before = cohesion_report(table, classes)
        after = cohesion_report(counterfit(table, cons, epochs=20, lr=0.1).table,
                                classes)
        assert after.within_class_cosine > before.within_class_cosine
        assert after.cross_class_cosine < before.cross_class_cosine


class TestCounterFitterEstimator:
    def test_fit_transform_and_get_params(self, small_table, toy_lexicon_path):
        lexicon = load_lexicon(toy_lexicon_path)
        cons = build_constraints(lexicon, threshold=0.5, seed=0)
        fitter = CounterFitter(constraints=cons, epochs=5)
        assert fitter.get_params()["epochs"] == 5
        out = fitter.fit_transform(small_table)
        assert out.variant == "counterfitted"
        assert out.words == small_table.words
        assert len(fitter.loss_trace_) == 5

    def test_transform_before_fit_errors(self, small_table):
        with pytest.raises(DataError):
            CounterFitter().transform(small_table)

    def test_sklearn_clone_compatible(self):
        from sklearn.base import clone
        fitter = CounterFitter(epochs=3, lr=0.2)
        cloned = clone(fitter)
        assert cloned.get_params()["lr"] == 0.2
