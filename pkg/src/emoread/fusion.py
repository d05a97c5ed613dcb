"""Fused model: document vectors, softmax MLP head, multi-target training.

The affect-enriched vector and the context vector are concatenated and fed
to an MLP ending in a 5-way softmax; training minimizes mean squared error
between the softmax output and the labelled profile with Adam, retaining the
best-validation checkpoint.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from . import affectnet, context as context_mod
from .corpus import Document, LabeledCorpus, clean_text
from .embedding import EmbeddingTable
from .errors import DataError, NumericalError
from .params import uniform_init
from .validation import check_profile_matrix, check_seed

MODES = ("full", "affect-only", "context-only")
N_EMOTIONS = 5


@dataclass(frozen=True)
class ModelConfig:
    """Architecture switches for one experiment."""

    mode: str = "full"
    hidden_size: int = 100
    attn_dim: int | None = None
    max_tokens: int = 64
    dropout: float = 0.5
    l2_lstm: float = 0.001
    encoder: str = "toy"  # toy | precomputed
    context_dim: int = 64
    encoder_layers: int = 2
    encoder_heads: int = 4
    encoder_model_dim: int = 64
    encoder_ff_dim: int = 128
    encoder_max_len: int = 64
    head_widths: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise DataError(f"unknown mode {self.mode!r}, expected one of {MODES}")
        if self.encoder not in ("toy", "precomputed"):
            raise DataError(f"unknown encoder {self.encoder!r}")

    @property
    def affect_dim(self) -> int:
        return 2 * self.hidden_size

    def fused_dim(self) -> int:
        if self.mode == "affect-only":
            return self.affect_dim
        if self.mode == "context-only":
            return self.context_dim
        return self.affect_dim + self.context_dim

    def resolved_head_widths(self) -> tuple[int, ...]:
        """Two hidden layers as wide as the fused vector unless overridden."""
        if self.head_widths is not None:
            return tuple(self.head_widths)
        return (self.fused_dim(), self.fused_dim())


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.000015
    batch_size: int = 64
    epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0:
            raise DataError(f"lr must be positive, got {self.lr}")
        if self.batch_size < 1:
            raise DataError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise DataError(f"epochs must be >= 0, got {self.epochs}")
        check_seed(self.seed)


def ablate(config: ModelConfig, mode: str) -> ModelConfig:
    """Rewire an experiment to full / affect-only / context-only."""
    return replace(config, mode=mode, head_widths=None)


def fuse(h1: np.ndarray | None, h2: np.ndarray | None) -> np.ndarray:
    """Concatenate the affect and context document vectors (in that order).

    Either side may be absent under the ablation modes.
    """
    parts = [np.asarray(h) for h in (h1, h2) if h is not None and np.asarray(h).size]
    if not parts:
        raise DataError("fuse: both document vectors are missing")
    return np.concatenate(parts)


def init_head_params(input_dim: int, hidden_widths: tuple[int, ...],
                     seed: int = 0) -> dict[str, np.ndarray]:
    rng = np.random.default_rng(seed)
    widths = (input_dim,) + tuple(hidden_widths) + (N_EMOTIONS,)
    params: dict[str, np.ndarray] = {}
    for i in range(len(widths) - 1):
        params[f"W{i}"] = uniform_init((widths[i + 1], widths[i]), widths[i], rng)
        params[f"b{i}"] = np.zeros(widths[i + 1])
    return params


def _head_layer_count(head_params: dict[str, np.ndarray]) -> int:
    return sum(1 for k in head_params if k.startswith("W"))


def head_forward(h: np.ndarray, head_params: dict[str, np.ndarray]
                 ) -> tuple[np.ndarray, dict]:
    """ReLU hidden layers, softmax output; returns (probs, cache)."""
    n_layers = _head_layer_count(head_params)
    if h.shape[0] != head_params["W0"].shape[1]:
        raise DataError(f"head_forward: input dim {h.shape[0]} does not match "
                        f"head width {head_params['W0'].shape[1]}")
    activations = [h]
    a = h
    for i in range(n_layers):
        z = head_params[f"W{i}"] @ a + head_params[f"b{i}"]
        if i < n_layers - 1:
            a = np.maximum(z, 0.0)
        else:
            a = z
        activations.append(a)
    logits = activations[-1]
    shifted = logits - logits.max()
    expd = np.exp(shifted)
    probs = expd / expd.sum()
    if not np.all(np.isfinite(probs)):
        raise NumericalError("head_forward: non-finite softmax output")
    return probs, {"activations": activations, "probs": probs}


def head_backward(dprobs: np.ndarray, cache: dict,
                  head_params: dict[str, np.ndarray]
                  ) -> tuple[dict[str, np.ndarray], np.ndarray]:
    probs = cache["probs"]
    dlogits = probs * (dprobs - float(dprobs @ probs))
    activations = cache["activations"]
    n_layers = _head_layer_count(head_params)
    grads: dict[str, np.ndarray] = {}
    da = dlogits
    for i in range(n_layers - 1, -1, -1):
        a_in = activations[i]
        if i < n_layers - 1:
            da = da * (activations[i + 1] > 0)
        grads[f"W{i}"] = np.outer(da, a_in)
        grads[f"b{i}"] = da.copy()
        da = head_params[f"W{i}"].T @ da
    return grads, da


def predict_profile(h: np.ndarray, head_params: dict[str, np.ndarray]) -> np.ndarray:
    probs, _ = head_forward(np.asarray(h, dtype=np.float64), head_params)
    return probs


def mse_loss(probs: np.ndarray, truth: np.ndarray) -> tuple[float, np.ndarray]:
    """MSE averaged over the five components, with its gradient wrt probs."""
    diff = probs - truth
    return float((diff ** 2).mean()), 2.0 * diff / diff.size


def prefixed(params: dict[str, np.ndarray], prefix: str) -> dict[str, np.ndarray]:
    """Sub-dict view sharing the underlying arrays (in-place updates apply)."""
    return {k[len(prefix):]: v for k, v in params.items() if k.startswith(prefix)}


class EmotionModel:
    """All state needed to score documents: params, vocab tables, wiring."""

    def __init__(self, config: ModelConfig, embedding: EmbeddingTable | None,
                 tokenizer: context_mod.BpeTokenizer | None,
                 encoder_config: context_mod.EncoderConfig | None,
                 params: dict[str, np.ndarray],
                 context_vectors: dict[str, np.ndarray] | None = None,
                 context_vectors_path: str | None = None):
        self.config = config
        self.embedding = embedding
        self.tokenizer = tokenizer
        self.encoder_config = encoder_config
        self.params = params
        self.context_vectors = context_vectors
        self.context_vectors_path = context_vectors_path

    def trainable_keys(self) -> list[str]:
        keys = [k for k in self.params if k.startswith("head/")]
        if self.config.mode != "context-only":
            keys += [k for k in self.params if k.startswith("affect/")]
        if self.config.mode != "affect-only" and self.config.encoder == "toy":
            keys += [k for k in self.params if k.startswith("context/")]
        return sorted(keys)


def init_model(config: ModelConfig, embedding: EmbeddingTable | None = None,
               tokenizer: context_mod.BpeTokenizer | None = None,
               context_vectors: dict[str, np.ndarray] | None = None,
               context_vectors_path: str | None = None,
               seed: int = 0) -> EmotionModel:
    check_seed(seed)
    params: dict[str, np.ndarray] = {}
    encoder_config = None
    if config.mode != "context-only":
        if embedding is None:
            raise DataError(f"mode {config.mode!r} needs an embedding table")
        affect = affectnet.init_affectnet_params(
            embedding.dim, config.hidden_size, config.attn_dim, seed=seed)
        params.update({f"affect/{k}": v for k, v in affect.items()})
    if config.mode != "affect-only":
        if config.encoder == "toy":
            if tokenizer is None:
                raise DataError("toy encoder needs a fitted tokenizer")
            encoder_config = context_mod.EncoderConfig(
                vocab_size=tokenizer.vocab_size,
                max_len=config.encoder_max_len,
                model_dim=config.encoder_model_dim,
                n_heads=config.encoder_heads,
                n_layers=config.encoder_layers,
                ff_dim=config.encoder_ff_dim,
                out_dim=config.context_dim,
            )
            enc = context_mod.init_encoder_params(encoder_config, seed=seed + 1)
            params.update({f"context/{k}": v for k, v in enc.items()})
        else:
            if context_vectors is None:
                raise DataError("precomputed encoder needs loaded context vectors")
            dims = {v.shape[0] for v in context_vectors.values()}
            if dims != {config.context_dim}:
                raise DataError(f"context vectors have dims {sorted(dims)}, "
                                f"config expects {config.context_dim}")
    head = init_head_params(config.fused_dim(), config.resolved_head_widths(),
                            seed=seed + 2)
    params.update({f"head/{k}": v for k, v in head.items()})
    return EmotionModel(config, embedding, tokenizer, encoder_config, params,
                        context_vectors, context_vectors_path)


def embed_tokens(doc: Document, table: EmbeddingTable, max_tokens: int
                 ) -> tuple[np.ndarray, list[int]]:
    """Embedding matrix over in-vocabulary tokens (positions recorded).

    Out-of-vocabulary tokens are skipped; a document with no known token
    maps to a single zero vector.
    """
    rows = []
    positions = []
    for i, tok in enumerate(doc.tokens[:max_tokens]):
        vec = table.get(tok)
        if vec is not None:
            rows.append(vec)
            positions.append(i)
    if not rows:
        return np.zeros((1, table.dim)), []
    return np.array(rows), positions


@dataclass
class DocForward:
    probs: np.ndarray
    h1: np.ndarray | None
    h2: np.ndarray | None
    affect_cache: object | None
    affect_positions: list[int] | None
    context_cache: object | None
    head_cache: dict


def doc_forward(model: EmotionModel, doc: Document, train: bool = False,
                rng: np.random.Generator | None = None) -> DocForward:
    cfg = model.config
    h1 = h2 = None
    affect_cache = positions = enc_cache = None
    if cfg.mode != "context-only":
        x, positions = embed_tokens(doc, model.embedding, cfg.max_tokens)
        dropout = cfg.dropout if train else 0.0
        out, affect_cache = affectnet.affect_forward(
            x, prefixed(model.params, "affect/"), dropout=dropout, rng=rng)
        h1 = out.doc_vector
    if cfg.mode != "affect-only":
        if cfg.encoder == "toy":
            ids = model.tokenizer.encode(doc.raw_text, max_len=cfg.encoder_max_len)
            h2, enc_cache = context_mod.encode(
                ids, prefixed(model.params, "context/"), model.encoder_config)
        else:
            vec = model.context_vectors.get(doc.id)
            if vec is None:
                raise DataError(f"no precomputed context vector for doc {doc.id!r}")
            h2 = vec
    fused = fuse(h1, h2)
    probs, head_cache = head_forward(fused, prefixed(model.params, "head/"))
    return DocForward(probs=probs, h1=h1, h2=h2, affect_cache=affect_cache,
                      affect_positions=positions, context_cache=enc_cache,
                      head_cache=head_cache)


def doc_backward(model: EmotionModel, fwd: DocForward, dprobs: np.ndarray
                 ) -> dict[str, np.ndarray]:
    cfg = model.config
    grads: dict[str, np.ndarray] = {}
    head_grads, dfused = head_backward(dprobs, fwd.head_cache,
                                       prefixed(model.params, "head/"))
    grads.update({f"head/{k}": v for k, v in head_grads.items()})
    offset = 0
    if fwd.h1 is not None:
        d_h1 = dfused[:fwd.h1.size]
        offset = fwd.h1.size
        affect_grads, _ = affectnet.affect_backward(
            d_h1, fwd.affect_cache, prefixed(model.params, "affect/"))
        grads.update({f"affect/{k}": v for k, v in affect_grads.items()})
    if fwd.h2 is not None and cfg.encoder == "toy" and cfg.mode != "affect-only":
        d_h2 = dfused[offset:]
        enc_grads = context_mod.encode_backward(
            d_h2, fwd.context_cache, prefixed(model.params, "context/"))
        grads.update({f"context/{k}": v for k, v in enc_grads.items()})
    return grads


def model_loss(model: EmotionModel, docs, truths: np.ndarray) -> float:
    """Mean MSE over documents, evaluation mode (no dropout, no L2 term)."""
    total = 0.0
    for doc, truth in zip(docs, truths):
        fwd = doc_forward(model, doc, train=False)
        loss, _ = mse_loss(fwd.probs, truth)
        total += loss
    return total / len(docs)


def l2_penalty(model: EmotionModel) -> tuple[float, dict[str, np.ndarray]]:
    """L2 regularization over the Bi-LSTM weight matrices (not biases)."""
    lam = model.config.l2_lstm
    loss = 0.0
    grads: dict[str, np.ndarray] = {}
    if lam <= 0 or model.config.mode == "context-only":
        return 0.0, grads
    for key in model.params:
        if key.startswith("affect/lstm_") and not key.endswith("/b"):
            w = model.params[key]
            loss += lam * float(np.sum(w * w))
            grads[key] = 2.0 * lam * w
    return loss, grads


class Adam:
    """Standard bias-corrected Adam; a zero gradient leaves params unchanged."""

    def __init__(self, keys, template: dict[str, np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.keys = list(keys)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(template[k]) for k in self.keys}
        self.v = {k: np.zeros_like(template[k]) for k in self.keys}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]):
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for k in self.keys:
            g = grads.get(k)
            if g is None:
                continue
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            m_hat = self.m[k] / b1t
            v_hat = self.v[k] / b2t
            params[k] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class TrainResult:
    train_mse: list[float]
    val_mse: list[float]
    best_epoch: int
    best_val_mse: float

    def trace_tsv(self) -> str:
        lines = ["epoch\ttrain_mse\tval_mse"]
        for i, (tr, va) in enumerate(zip(self.train_mse, self.val_mse)):
            va_s = "nan" if np.isnan(va) else repr(va)
            lines.append(f"{i}\t{repr(tr)}\t{va_s}")
        return "\n".join(lines) + "\n"


def train(model: EmotionModel, corpus: LabeledCorpus,
          train_config: TrainConfig) -> TrainResult:
    """Adam / MSE training over the train split, deterministic under seed.

    The parameters achieving the best validation MSE are restored into the
    model at the end (falling back to the final epoch when there is no
    validation split).
    """
    train_split = corpus.subset("train")
    if len(train_split) == 0:
        raise DataError("train: empty train split")
    val_split = corpus.subset("val")
    rng = np.random.default_rng(train_config.seed)
    keys = model.trainable_keys()
    optimizer = Adam(keys, model.params, lr=train_config.lr)

    docs = list(train_split.documents)
    truths = train_split.profiles
    train_trace: list[float] = []
    val_trace: list[float] = []
    best_val = np.inf
    best_epoch = -1
    best_params = None

    for epoch in range(train_config.epochs):
        order = rng.permutation(len(docs))
        epoch_mse = 0.0
        for start in range(0, len(order), train_config.batch_size):
            batch = order[start:start + train_config.batch_size]
            batch_grads = {k: np.zeros_like(model.params[k]) for k in keys}
            batch_mse = 0.0
            for idx in batch:
                fwd = doc_forward(model, docs[idx], train=True, rng=rng)
                loss, dprobs = mse_loss(fwd.probs, truths[idx])
                batch_mse += loss
                for k, g in doc_backward(model, fwd, dprobs / len(batch)).items():
                    if k in batch_grads:
                        batch_grads[k] += g
            batch_mse /= len(batch)
            if not np.isfinite(batch_mse):
                raise NumericalError(f"train: non-finite loss at epoch {epoch}")
            _, reg_grads = l2_penalty(model)
            for k, g in reg_grads.items():
                if k in batch_grads:
                    batch_grads[k] += g
            optimizer.step(model.params, batch_grads)
            epoch_mse += batch_mse * len(batch)
        train_trace.append(epoch_mse / len(docs))
        if len(val_split):
            val_mse = model_loss(model, val_split.documents, val_split.profiles)
            val_trace.append(val_mse)
            if val_mse < best_val:
                best_val = val_mse
                best_epoch = epoch
                best_params = {k: model.params[k].copy() for k in keys}
        else:
            val_trace.append(float("nan"))
    if best_params is not None:
        for k in keys:
            model.params[k][...] = best_params[k]
    else:
        best_epoch = train_config.epochs - 1
        best_val = float("nan")
    return TrainResult(train_trace, val_trace, best_epoch, best_val)


def predict(model: EmotionModel, docs) -> np.ndarray:
    """Profiles for a document iterable, evaluation mode."""
    rows = [doc_forward(model, doc, train=False).probs for doc in docs]
    return check_profile_matrix(np.array(rows), "predictions")


def attention_map(model: EmotionModel, doc: Document) -> np.ndarray:
    """Attention weights aligned to the document's tokens.

    Out-of-vocabulary or truncated positions carry zero weight; in-vocabulary
    weights come straight from the attention softmax, so the map still sums
    to one.
    """
    if model.config.mode == "context-only":
        raise DataError("attention_map: context-only model has no attention to audit")
    weights = np.zeros(len(doc.tokens))
    x, positions = embed_tokens(doc, model.embedding, model.config.max_tokens)
    out, _ = affectnet.affect_forward(x, prefixed(model.params, "affect/"))
    for w, pos in zip(out.weights, positions):
        weights[pos] = w
    return weights


# --- checkpoints ------------------------------------------------------------

CHECKPOINT_FORMAT = "emoread-checkpoint-v1"


def save_checkpoint(model: EmotionModel, bin_path, manifest_path) -> None:
    """Flat little-endian float64 array plus a JSON shape manifest."""
    entries = []
    blobs = []
    offset = 0
    arrays: list[tuple[str, np.ndarray]] = list(model.params.items())
    if model.embedding is not None:
        arrays.append(("embedding/matrix", model.embedding.matrix))
    for name, arr in arrays:
        arr = np.asarray(arr, dtype=np.float64)
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
        blobs.append(arr.astype("<f8").tobytes())
        offset += arr.size
    manifest = {
        "format": CHECKPOINT_FORMAT,
        "config": asdict(model.config),
        "params": entries,
        "embedding_words": list(model.embedding.words) if model.embedding else None,
        "embedding_variant": model.embedding.variant if model.embedding else None,
        "tokenizer": model.tokenizer.to_dict() if model.tokenizer else None,
        "context_vectors_path": model.context_vectors_path,
    }
    with open(bin_path, "wb") as fh:
        fh.write(b"".join(blobs))
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_checkpoint(bin_path, manifest_path,
                    context_vectors: dict[str, np.ndarray] | None = None
                    ) -> EmotionModel:
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("format") != CHECKPOINT_FORMAT:
        raise DataError(f"{manifest_path}: unknown checkpoint format "
                        f"{manifest.get('format')!r}")
    flat = np.frombuffer(Path(bin_path).read_bytes(), dtype="<f8")
    cfg_dict = dict(manifest["config"])
    if cfg_dict.get("head_widths") is not None:
        cfg_dict["head_widths"] = tuple(cfg_dict["head_widths"])
    config = ModelConfig(**cfg_dict)
    params: dict[str, np.ndarray] = {}
    embedding_matrix = None
    for entry in manifest["params"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) if shape else 1
        arr = np.array(flat[entry["offset"]:entry["offset"] + size]).reshape(shape)
        if entry["name"] == "embedding/matrix":
            embedding_matrix = arr
        else:
            params[entry["name"]] = arr
    embedding = None
    if manifest.get("embedding_words"):
        if embedding_matrix is None:
            raise DataError(f"{manifest_path}: embedding words without matrix")
        embedding = EmbeddingTable(tuple(manifest["embedding_words"]),
                                   embedding_matrix,
                                   manifest.get("embedding_variant", "original"))
    tokenizer = None
    encoder_config = None
    if manifest.get("tokenizer"):
        tokenizer = context_mod.BpeTokenizer.from_dict(manifest["tokenizer"])
        encoder_config = context_mod.EncoderConfig(
            vocab_size=tokenizer.vocab_size,
            max_len=config.encoder_max_len,
            model_dim=config.encoder_model_dim,
            n_heads=config.encoder_heads,
            n_layers=config.encoder_layers,
            ff_dim=config.encoder_ff_dim,
            out_dim=config.context_dim,
        )
    vectors_path = manifest.get("context_vectors_path")
    if (config.mode != "affect-only" and config.encoder == "precomputed"
            and context_vectors is None):
        if not vectors_path:
            raise DataError(f"{manifest_path}: precomputed model without vector path")
        context_vectors = context_mod.load_precomputed(vectors_path, config.context_dim)
    return EmotionModel(config, embedding, tokenizer, encoder_config, params,
                        context_vectors, vectors_path)


# --- estimator facade -------------------------------------------------------

class EmotionProfileRegressor(BaseEstimator, RegressorMixin):
    """sklearn-style wrapper: fit on (texts-or-token-lists, profile matrix).

    Defaults are sized for desk-scale experiments; full-scale settings
    (hidden 100, lr 1.5e-5, batch 64, 200 epochs) go through the same knobs.
    """

    def __init__(self, embedding_table: EmbeddingTable | None = None,
                 mode: str = "affect-only", hidden_size: int = 32,
                 context_dim: int = 16, encoder: str = "toy",
                 max_tokens: int = 64, dropout: float = 0.5,
                 l2_lstm: float = 0.001, lr: float = 0.01,
                 batch_size: int = 16, epochs: int = 10, seed: int = 0):
        self.embedding_table = embedding_table
        self.mode = mode
        self.hidden_size = hidden_size
        self.context_dim = context_dim
        self.encoder = encoder
        self.max_tokens = max_tokens
        self.dropout = dropout
        self.l2_lstm = l2_lstm
        self.lr = lr
        self.batch_size = batch_size
        self.epochs = epochs
        self.seed = seed

    def _documents(self, X) -> list[Document]:
        docs = []
        for i, item in enumerate(X):
            if isinstance(item, Document):
                docs.append(item)
            elif isinstance(item, str):
                tokens = clean_text(item)
                if not tokens:
                    raise DataError(f"X[{i}]: empty after cleaning")
                docs.append(Document(id=str(i), raw_text=item, tokens=tuple(tokens)))
            else:
                tokens = tuple(str(t) for t in item)
                docs.append(Document(id=str(i), raw_text=" ".join(tokens), tokens=tokens))
        return docs

    def fit(self, X, y):
        y = check_profile_matrix(np.asarray(y, dtype=np.float64), "y")
        docs = self._documents(X)
        if len(docs) != y.shape[0]:
            raise DataError(f"X and y disagree on length ({len(docs)} vs {y.shape[0]})")
        config = ModelConfig(
            mode=self.mode, hidden_size=self.hidden_size,
            context_dim=self.context_dim, encoder=self.encoder,
            max_tokens=self.max_tokens, dropout=self.dropout,
            l2_lstm=self.l2_lstm,
            encoder_layers=1, encoder_heads=2,
            encoder_model_dim=max(8, self.context_dim),
            encoder_ff_dim=2 * max(8, self.context_dim),
        )
        tokenizer = None
        if config.mode != "affect-only" and config.encoder == "toy":
            tokenizer = context_mod.BpeTokenizer().fit([d.raw_text for d in docs])
        model = init_model(config, embedding=self.embedding_table,
                           tokenizer=tokenizer, seed=self.seed)
        corpus = LabeledCorpus(tuple(docs), y,
                               {d.id: "train" for d in docs})
        self.train_result_ = train(model, corpus,
                                   TrainConfig(lr=self.lr, batch_size=self.batch_size,
                                               epochs=self.epochs, seed=self.seed))
        self.model_ = model
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "model_"):
            raise DataError("EmotionProfileRegressor: call fit before predict")
        return predict(self.model_, self._documents(X))
