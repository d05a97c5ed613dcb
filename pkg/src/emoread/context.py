"""Context-specific document vectors via a pluggable encoder.

Two routes produce the context vector: a small trainable transformer over
subword ids (greedy byte-pair merges trained on the corpus), or ingestion of
precomputed vectors from the external exporter's interchange format.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericalError
from .params import uniform_init

PAD, UNK = "<pad>", "<unk>"
END_OF_WORD = "</w>"


class BpeTokenizer:
    """Greedy pair-merge subword tokenizer with an end-of-word marker.

    Interface-compatible stand-in for an external subword model: ``fit``
    learns merges from raw texts, ``encode`` maps text to ids under the
    learned merge ranks, ``decode`` recovers the text up to whitespace
    normalization.
    """

    def __init__(self, merges: list[tuple[str, str]] | None = None,
                 vocab: list[str] | None = None):
        self.merges = [tuple(m) for m in merges] if merges else []
        self.vocab = list(vocab) if vocab else []
        self._rebuild()

    def _rebuild(self):
        self._ranks = {pair: r for r, pair in enumerate(self.merges)}
        self._ids = {sym: i for i, sym in enumerate(self.vocab)}
        self._cache: dict[str, list[str]] = {}

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    @property
    def pad_id(self) -> int:
        return self._ids[PAD]

    def fit(self, texts, num_merges: int = 200):
        """Learn merge rules by repeatedly fusing the most frequent pair."""
        word_freq = Counter()
        for text in texts:
            word_freq.update(text.split())
        if not word_freq:
            raise DataError("BpeTokenizer.fit: no words in training texts")
        sequences = {w: tuple(w) + (END_OF_WORD,) for w in word_freq}
        base_symbols = sorted({s for seq in sequences.values() for s in seq})
        merges: list[tuple[str, str]] = []
        for _ in range(num_merges):
            pair_freq = Counter()
            for word, seq in sequences.items():
                freq = word_freq[word]
                for a, b in zip(seq, seq[1:]):
                    pair_freq[(a, b)] += freq
            if not pair_freq:
                break
            best_count = max(pair_freq.values())
            if best_count < 2:
                break
            best = min(p for p, c in pair_freq.items() if c == best_count)
            merges.append(best)
            merged = best[0] + best[1]
            new_sequences = {}
            for word, seq in sequences.items():
                out = []
                i = 0
                while i < len(seq):
                    if i + 1 < len(seq) and (seq[i], seq[i + 1]) == best:
                        out.append(merged)
                        i += 2
                    else:
                        out.append(seq[i])
                        i += 1
                new_sequences[word] = tuple(out)
            sequences = new_sequences
        self.merges = merges
        self.vocab = [PAD, UNK] + base_symbols + [a + b for a, b in merges]
        self._rebuild()
        return self

    def _segment_word(self, word: str) -> list[str]:
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        seq = list(word) + [END_OF_WORD]
        while len(seq) > 1:
            ranked = [(self._ranks[(a, b)], i)
                      for i, (a, b) in enumerate(zip(seq, seq[1:]))
                      if (a, b) in self._ranks]
            if not ranked:
                break
            _, i = min(ranked)
            seq = seq[:i] + [seq[i] + seq[i + 1]] + seq[i + 2:]
        self._cache[word] = seq
        return seq

    def tokenize(self, text: str) -> list[str]:
        if not text.strip():
            raise DataError("tokenize: empty text")
        symbols: list[str] = []
        for word in text.split():
            symbols.extend(self._segment_word(word))
        return symbols

    def encode(self, text: str, max_len: int | None = None) -> list[int]:
        unk = self._ids[UNK]
        ids = [self._ids.get(sym, unk) for sym in self.tokenize(text)]
        if max_len is not None:
            ids = ids[:max_len]
        return ids

    def decode(self, ids) -> str:
        symbols = []
        for i in ids:
            if not 0 <= i < len(self.vocab):
                raise DataError(f"decode: id {i} out of vocab")
            sym = self.vocab[i]
            if sym == PAD:
                continue
            symbols.append(sym)
        text = "".join(symbols).replace(END_OF_WORD, " ")
        return " ".join(text.split())

    def to_dict(self) -> dict:
        return {"merges": [list(m) for m in self.merges], "vocab": self.vocab}

    @classmethod
    def from_dict(cls, payload: dict) -> "BpeTokenizer":
        return cls(merges=[tuple(m) for m in payload["merges"]], vocab=payload["vocab"])


@dataclass(frozen=True)
class EncoderConfig:
    """Shape of the small trainable transformer encoder."""

    vocab_size: int
    max_len: int = 64
    model_dim: int = 64
    n_heads: int = 4
    n_layers: int = 2
    ff_dim: int = 128
    out_dim: int = 64

    def __post_init__(self):
        if self.model_dim % self.n_heads != 0:
            raise DataError(f"model_dim {self.model_dim} not divisible by "
                            f"n_heads {self.n_heads}")


def init_encoder_params(config: EncoderConfig, seed: int = 0) -> dict[str, np.ndarray]:
    rng = np.random.default_rng(seed)
    dm, ff = config.model_dim, config.ff_dim
    params: dict[str, np.ndarray] = {
        "emb/token": rng.normal(0.0, 0.02, size=(config.vocab_size, dm)),
        "emb/pos": rng.normal(0.0, 0.02, size=(config.max_len, dm)),
    }
    for l in range(config.n_layers):
        p = f"layer{l}"
        for name in ("Wq", "Wk", "Wv", "Wo"):
            params[f"{p}/{name}"] = uniform_init((dm, dm), dm, rng)
            params[f"{p}/{name.replace('W', 'b')}"] = np.zeros(dm)
        params[f"{p}/ln1_g"] = np.ones(dm)
        params[f"{p}/ln1_b"] = np.zeros(dm)
        params[f"{p}/W_ff1"] = uniform_init((ff, dm), dm, rng)
        params[f"{p}/b_ff1"] = np.zeros(ff)
        params[f"{p}/W_ff2"] = uniform_init((dm, ff), ff, rng)
        params[f"{p}/b_ff2"] = np.zeros(dm)
        params[f"{p}/ln2_g"] = np.ones(dm)
        params[f"{p}/ln2_b"] = np.zeros(dm)
    params["pool/W"] = uniform_init((config.out_dim, dm), dm, rng)
    params["pool/b"] = np.zeros(config.out_dim)
    return params


_LN_EPS = 1e-6


def _layernorm_forward(x: np.ndarray, g: np.ndarray, b: np.ndarray):
    mu = x.mean(axis=-1, keepdims=True)
    var = ((x - mu) ** 2).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + _LN_EPS)
    xhat = (x - mu) * inv
    return g * xhat + b, (xhat, inv, g)


def _layernorm_backward(dy: np.ndarray, cache):
    xhat, inv, g = cache
    dg = (dy * xhat).sum(axis=0)
    db = dy.sum(axis=0)
    dxhat = dy * g
    dx = inv * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
    return dx, dg, db


def _split_heads(x: np.ndarray, n_heads: int) -> np.ndarray:
    m, dm = x.shape
    return x.reshape(m, n_heads, dm // n_heads).transpose(1, 0, 2)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    nh, m, dh = x.shape
    return x.transpose(1, 0, 2).reshape(m, nh * dh)


@dataclass
class EncoderCache:
    ids: np.ndarray
    layers: list[dict]
    pooled_input: np.ndarray
    attention_maps: list[np.ndarray]  # per layer, (n_heads, m, m)
    config: EncoderConfig


def encode(ids, params: dict[str, np.ndarray], config: EncoderConfig
           ) -> tuple[np.ndarray, EncoderCache]:
    """Context vector for one document: first-position pooling, projected."""
    ids = np.asarray(ids, dtype=int)
    if ids.ndim != 1 or ids.size == 0:
        raise DataError("encode: expected a non-empty 1-d id sequence")
    if np.any(ids < 0) or np.any(ids >= config.vocab_size):
        bad = ids[(ids < 0) | (ids >= config.vocab_size)][0]
        raise DataError(f"encode: id {int(bad)} out of vocabulary "
                        f"(size {config.vocab_size})")
    if ids.size > config.max_len:
        ids = ids[:config.max_len]
    m = ids.size
    x = params["emb/token"][ids] + params["emb/pos"][:m]
    layer_caches: list[dict] = []
    attn_maps: list[np.ndarray] = []
    scale = 1.0 / np.sqrt(config.model_dim // config.n_heads)
    for l in range(config.n_layers):
        p = f"layer{l}"
        q = x @ params[f"{p}/Wq"].T + params[f"{p}/bq"]
        k = x @ params[f"{p}/Wk"].T + params[f"{p}/bk"]
        v = x @ params[f"{p}/Wv"].T + params[f"{p}/bv"]
        qh, kh, vh = (_split_heads(t, config.n_heads) for t in (q, k, v))
        scores = np.einsum("hqd,hkd->hqk", qh, kh) * scale
        scores = scores - scores.max(axis=-1, keepdims=True)
        expd = np.exp(scores)
        attn = expd / expd.sum(axis=-1, keepdims=True)
        ctx = np.einsum("hqk,hkd->hqd", attn, vh)
        merged = _merge_heads(ctx)
        proj = merged @ params[f"{p}/Wo"].T + params[f"{p}/bo"]
        res1 = x + proj
        ln1_out, ln1_cache = _layernorm_forward(res1, params[f"{p}/ln1_g"],
                                                params[f"{p}/ln1_b"])
        ff_pre = ln1_out @ params[f"{p}/W_ff1"].T + params[f"{p}/b_ff1"]
        ff_act = np.maximum(ff_pre, 0.0)
        ff_out = ff_act @ params[f"{p}/W_ff2"].T + params[f"{p}/b_ff2"]
        res2 = ln1_out + ff_out
        ln2_out, ln2_cache = _layernorm_forward(res2, params[f"{p}/ln2_g"],
                                                params[f"{p}/ln2_b"])
        layer_caches.append({
            "x": x, "qh": qh, "kh": kh, "vh": vh, "attn": attn, "merged": merged,
            "ln1_cache": ln1_cache, "ln1_out": ln1_out, "ff_pre": ff_pre,
            "ff_act": ff_act, "ln2_cache": ln2_cache,
        })
        attn_maps.append(attn)
        x = ln2_out
    pooled = x[0]
    h2 = params["pool/W"] @ pooled + params["pool/b"]
    if not np.all(np.isfinite(h2)):
        raise NumericalError("encode: non-finite context vector")
    cache = EncoderCache(ids=ids, layers=layer_caches, pooled_input=pooled,
                         attention_maps=attn_maps, config=config)
    return h2, cache


def encode_backward(dh2: np.ndarray, cache: EncoderCache,
                    params: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    """Gradients wrt every encoder parameter (token/position embeddings included)."""
    config = cache.config
    grads = {k: np.zeros_like(v) for k, v in params.items()}
    grads["pool/W"] += np.outer(dh2, cache.pooled_input)
    grads["pool/b"] += dh2
    m = cache.ids.size
    dx = np.zeros((m, config.model_dim))
    dx[0] = params["pool/W"].T @ dh2
    scale = 1.0 / np.sqrt(config.model_dim // config.n_heads)
    for l in range(config.n_layers - 1, -1, -1):
        p = f"layer{l}"
        lc = cache.layers[l]
        dres2, dg2, db2 = _layernorm_backward(dx, lc["ln2_cache"])
        grads[f"{p}/ln2_g"] += dg2
        grads[f"{p}/ln2_b"] += db2
        dff_out = dres2
        dln1_out = dres2.copy()
        grads[f"{p}/W_ff2"] += dff_out.T @ lc["ff_act"]
        grads[f"{p}/b_ff2"] += dff_out.sum(axis=0)
        dff_act = dff_out @ params[f"{p}/W_ff2"]
        dff_pre = dff_act * (lc["ff_pre"] > 0)
        grads[f"{p}/W_ff1"] += dff_pre.T @ lc["ln1_out"]
        grads[f"{p}/b_ff1"] += dff_pre.sum(axis=0)
        dln1_out += dff_pre @ params[f"{p}/W_ff1"]
        dres1, dg1, db1 = _layernorm_backward(dln1_out, lc["ln1_cache"])
        grads[f"{p}/ln1_g"] += dg1
        grads[f"{p}/ln1_b"] += db1
        dproj = dres1
        dx_resid = dres1.copy()
        grads[f"{p}/Wo"] += dproj.T @ lc["merged"]
        grads[f"{p}/bo"] += dproj.sum(axis=0)
        dmerged = dproj @ params[f"{p}/Wo"]
        dctx = _split_heads(dmerged, config.n_heads)
        attn, vh, qh, kh = lc["attn"], lc["vh"], lc["qh"], lc["kh"]
        dattn = np.einsum("hqd,hkd->hqk", dctx, vh)
        dvh = np.einsum("hqk,hqd->hkd", attn, dctx)
        dscores = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
        dqh = np.einsum("hqk,hkd->hqd", dscores, kh) * scale
        dkh = np.einsum("hqk,hqd->hkd", dscores, qh) * scale
        dq, dk, dv = (_merge_heads(t) for t in (dqh, dkh, dvh))
        x_in = lc["x"]
        grads[f"{p}/Wq"] += dq.T @ x_in
        grads[f"{p}/bq"] += dq.sum(axis=0)
        grads[f"{p}/Wk"] += dk.T @ x_in
        grads[f"{p}/bk"] += dk.sum(axis=0)
        grads[f"{p}/Wv"] += dv.T @ x_in
        grads[f"{p}/bv"] += dv.sum(axis=0)
        dx = dx_resid + dq @ params[f"{p}/Wq"] + dk @ params[f"{p}/Wk"] \
            + dv @ params[f"{p}/Wv"]
    np.add.at(grads["emb/token"], cache.ids, dx)
    grads["emb/pos"][:m] += dx
    return grads


def save_precomputed(vectors: dict[str, np.ndarray], path) -> None:
    """Write the interchange format: 'dim=<h>' header then per-doc rows.

    Float values are written with ``repr``, which round-trips float64
    exactly, so write-then-load is bit-exact.
    """
    if not vectors:
        raise DataError("save_precomputed: no vectors")
    dims = {np.asarray(v).shape for v in vectors.values()}
    if len(dims) != 1 or len(next(iter(dims))) != 1:
        raise DataError(f"save_precomputed: inconsistent vector shapes {sorted(dims)}")
    dim = next(iter(dims))[0]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"dim={dim}\n")
        for doc_id in vectors:
            row = " ".join(repr(float(x)) for x in np.asarray(vectors[doc_id]))
            fh.write(f"{doc_id}\t{row}\n")


def load_precomputed(path, expected_dim: int | None = None) -> dict[str, np.ndarray]:
    """Read an interchange file, validating the declared dimension."""
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("dim="):
            raise DataError(f"{path}: missing 'dim=<h>' header")
        try:
            dim = int(header[4:])
        except ValueError as exc:
            raise DataError(f"{path}: bad dimension header {header!r}") from exc
        if expected_dim is not None and dim != expected_dim:
            raise DataError(f"{path}: declared dim {dim} != expected {expected_dim}")
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            doc_id, _, rest = line.rstrip("\n").partition("\t")
            values = rest.split(" ")
            if len(values) != dim:
                raise DataError(f"{path}:{line_no}: row has {len(values)} values, "
                                f"declared dim {dim}")
            try:
                vec = np.array([float(v) for v in values])
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: bad float ({exc})") from exc
            if doc_id in vectors:
                raise DataError(f"{path}:{line_no}: duplicate doc id {doc_id!r}")
            vectors[doc_id] = vec
    if not vectors:
        raise DataError(f"{path}: no vectors")
    return vectors


def resolve_vectors(vectors: dict[str, np.ndarray], doc_ids,
                    allow_missing: bool = False) -> list[str]:
    """Check corpus coverage; returns the missing ids (raises unless allowed)."""
    missing = [d for d in doc_ids if d not in vectors]
    if missing and not allow_missing:
        preview = ", ".join(missing[:5])
        raise DataError(f"precomputed vectors missing {len(missing)} doc ids "
                        f"({preview}{'...' if len(missing) > 5 else ''})")
    return missing
