import numpy as np
import pytest

from emoread import context as ctx
from emoread.errors import DataError
from gradcheck import check_param_gradients


class TestBpeTokenizer:
    def test_learned_merges_segment_unhappy(self):
        # merges hand-picked so that "unhappy" splits into the units un + happy
        merges = [("u", "n"), ("h", "a"), ("ha", "p"), ("hap", "p"),
                  ("happ", "y"), ("happy", "</w>")]
        vocab = [ctx.PAD, ctx.UNK, "u", "n", "h", "a", "p", "y", "</w>",
                 "un", "ha", "hap", "happ", "happy", "happy</w>"]
        tok = ctx.BpeTokenizer(merges=merges, vocab=vocab)
        assert tok.tokenize("unhappy") == ["un", "happy</w>"]
        assert tok.decode(tok.encode("unhappy")) == "unhappy"

    def test_whole_word_single_token(self):
        tok = ctx.BpeTokenizer().fit(["aaa aaa aaa aaa"], num_merges=10)
        ids = tok.encode("aaa")
        assert len(ids) == 1
        assert tok.decode(ids) == "aaa"

    def test_empty_text_errors(self):
        tok = ctx.BpeTokenizer().fit(["some text"], num_merges=5)
        with pytest.raises(DataError):
            tok.encode("")
        with pytest.raises(DataError):
            tok.encode("   ")

    def test_roundtrip_whitespace_normalized(self):
        texts = ["the cat sat", "a cat ran far", "the far star"]
        tok = ctx.BpeTokenizer().fit(texts, num_merges=30)
        for text in texts + ["the cat  ran"]:
            assert tok.decode(tok.encode(text)) == " ".join(text.split())

    def test_unknown_chars_map_to_unk(self):
        tok = ctx.BpeTokenizer().fit(["abc abc"], num_merges=5)
        ids = tok.encode("xyz")
        assert all(0 <= i < tok.vocab_size for i in ids)
        assert tok._ids[ctx.UNK] in ids

    def test_max_len_cap(self):
        tok = ctx.BpeTokenizer().fit(["one two three four"], num_merges=0)
        assert len(tok.encode("one two three four", max_len=3)) == 3

    def test_serialization_roundtrip(self):
        tok = ctx.BpeTokenizer().fit(["river bank finance bank"], num_merges=12)
        clone = ctx.BpeTokenizer.from_dict(tok.to_dict())
        text = "river finance"
        assert clone.encode(text) == tok.encode(text)

    def test_deterministic_fit(self):
        texts = ["alpha beta gamma", "beta gamma delta", "gamma delta alpha"]
        a = ctx.BpeTokenizer().fit(texts, num_merges=20)
        b = ctx.BpeTokenizer().fit(list(texts), num_merges=20)
        assert a.merges == b.merges and a.vocab == b.vocab


def tiny_config(**overrides):
    defaults = dict(vocab_size=9, max_len=8, model_dim=8, n_heads=2,
                    n_layers=1, ff_dim=12, out_dim=4)
    defaults.update(overrides)
    return ctx.EncoderConfig(**defaults)


class TestToyEncoder:
    def test_zero_projection_zero_output(self, rng):
        config = tiny_config()
        params = ctx.init_encoder_params(config, seed=0)
        params["pool/W"][...] = 0.0
        params["pool/b"][...] = 0.0
        h2, _ = ctx.encode(np.array([1, 2, 3]), params, config)
        assert np.all(h2 == 0.0)

    def test_pure_function_of_inputs(self):
        config = tiny_config()
        params = ctx.init_encoder_params(config, seed=1)
        ids = np.array([4, 2, 7, 1])
        a, _ = ctx.encode(ids, params, config)
        b, _ = ctx.encode(ids.copy(), params, config)
        assert np.array_equal(a, b)

    def test_permutation_invariance_without_positions(self, rng):
        # zero position embeddings + first token fixed: self-attention is
        # permutation-equivariant, so first-position pooling cannot move
        config = tiny_config(n_heads=1)
        params = ctx.init_encoder_params(config, seed=2)
        params["emb/pos"][...] = 0.0
        base = np.array([3, 1, 4, 5, 2])
        permuted = np.array([3, 5, 2, 1, 4])
        a, _ = ctx.encode(base, params, config)
        b, _ = ctx.encode(permuted, params, config)
        assert np.allclose(a, b, atol=1e-12)

    def test_attention_rows_are_probability_vectors(self, rng):
        config = tiny_config(n_layers=2, n_heads=4, ff_dim=8)
        params = ctx.init_encoder_params(config, seed=3)
        _, cache = ctx.encode(np.array([1, 5, 2, 8, 3, 1]), params, config)
        for attn in cache.attention_maps:
            assert np.all(attn >= 0)
            assert np.allclose(attn.sum(axis=-1), 1.0, atol=1e-9)

    def test_out_of_vocab_id_rejected(self):
        config = tiny_config()
        params = ctx.init_encoder_params(config, seed=4)
        with pytest.raises(DataError):
            ctx.encode(np.array([1, 9]), params, config)
        with pytest.raises(DataError):
            ctx.encode(np.array([], dtype=int), params, config)

    def test_gradient_check_tiny(self, rng):
        config = tiny_config(vocab_size=7, out_dim=8)
        params = ctx.init_encoder_params(config, seed=5)
        ids = np.array([1, 4, 2, 6])
        target = rng.normal(size=8)

        def loss_and_grads(p):
            h2, cache = ctx.encode(ids, p, config)
            diff = h2 - target
            return float(0.5 * diff @ diff), ctx.encode_backward(diff, cache, p)

        assert check_param_gradients(loss_and_grads, params) <= 1e-4

    def test_gradient_check_two_layers(self, rng):
        config = tiny_config(n_layers=2, n_heads=4, ff_dim=8)
        params = ctx.init_encoder_params(config, seed=6)
        ids = np.array([2, 2, 5])
        target = rng.normal(size=4)

        def loss_and_grads(p):
            h2, cache = ctx.encode(ids, p, config)
            diff = h2 - target
            return float(0.5 * diff @ diff), ctx.encode_backward(diff, cache, p)

        assert check_param_gradients(loss_and_grads, params) <= 1e-4

    def test_repeated_ids_accumulate_embedding_grads(self, rng):
        config = tiny_config()
        params = ctx.init_encoder_params(config, seed=7)
        ids = np.array([3, 3, 3])
        h2, cache = ctx.encode(ids, params, config)
        grads = ctx.encode_backward(np.ones_like(h2), cache, params)
        assert np.any(grads["emb/token"][3] != 0.0)
        untouched = [i for i in range(config.vocab_size) if i != 3]
        assert np.all(grads["emb/token"][untouched] == 0.0)


class TestPrecomputedVectors:
    def test_three_docs_declared_dim(self, tmp_path):
        vectors = {f"doc{i}": np.arange(1024, dtype=float) + i for i in range(3)}
        path = tmp_path / "ctx.tsv"
        ctx.save_precomputed(vectors, path)
        loaded = ctx.load_precomputed(path, expected_dim=1024)
        assert len(loaded) == 3
        assert path.read_text(encoding="utf-8").startswith("dim=1024\n")

    def test_dim_mismatch_hard_error(self, tmp_path):
        vectors = {"a": np.zeros(512)}
        path = tmp_path / "ctx.tsv"
        ctx.save_precomputed(vectors, path)
        with pytest.raises(DataError):
            ctx.load_precomputed(path, expected_dim=1024)

    def test_roundtrip_bit_exact(self, tmp_path, rng):
        vectors = {f"doc{i}": rng.normal(size=17) for i in range(5)}
        path = tmp_path / "ctx.tsv"
        ctx.save_precomputed(vectors, path)
        loaded = ctx.load_precomputed(path)
        for doc_id, vec in vectors.items():
            assert np.array_equal(loaded[doc_id], vec)
        # writing the loaded vectors again reproduces the bytes exactly
        path2 = tmp_path / "ctx2.tsv"
        ctx.save_precomputed(loaded, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_missing_ids_reported(self, tmp_path):
        vectors = {"a": np.zeros(4), "b": np.zeros(4)}
        with pytest.raises(DataError, match="missing"):
            ctx.resolve_vectors(vectors, ["a", "b", "c"])
        missing = ctx.resolve_vectors(vectors, ["a", "b", "c"], allow_missing=True)
        assert missing == ["c"]

    def test_row_width_validated(self, tmp_path):
        path = tmp_path / "ctx.tsv"
        path.write_text("dim=4\ndoc1\t0.0 1.0 2.0\n", encoding="utf-8")
        with pytest.raises(DataError):
            ctx.load_precomputed(path)

    def test_header_required(self, tmp_path):
        path = tmp_path / "ctx.tsv"
        path.write_text("doc1\t0.0 1.0\n", encoding="utf-8")
        with pytest.raises(DataError):
            ctx.load_precomputed(path)
