"""Word-vector tables and affect enrichment by counter-fitting.

Pretrained vectors are pulled toward same-emotion neighbours and pushed away
from contradictory-emotion ones under hinge losses on cosine similarity,
with a quadratic term preserving the original geometry. Vectors are kept on
the unit sphere throughout.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DataError, NumericalError
from .validation import EMOTIONS, check_seed

#: Emotion classes considered contradictory for repel-pair construction.
#: Surprise is valence-neutral and takes part in no repel pair.
CONTRADICTORY_CLASSES = {
    "joy": ("anger", "fear", "sadness"),
    "anger": ("joy",),
    "fear": ("joy",),
    "sadness": ("joy",),
    "surprise": (),
}


@dataclass(frozen=True)
class EmbeddingTable:
    """A word -> d-dimensional vector map with a variant tag."""

    words: tuple[str, ...]
    matrix: np.ndarray  # (V, dim)
    variant: str = "original"  # original | counterfitted
    _index: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(self.words) == 0:
            raise DataError("embedding table: empty vocabulary")
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.words):
            raise DataError(f"embedding table: matrix shape {self.matrix.shape} "
                            f"does not match {len(self.words)} words")
        if not np.all(np.isfinite(self.matrix)):
            raise NumericalError("embedding table: non-finite vector components")
        object.__setattr__(self, "_index", {w: i for i, w in enumerate(self.words)})
        if len(self._index) != len(self.words):
            raise DataError("embedding table: duplicate words")

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def __getitem__(self, word: str) -> np.ndarray:
        try:
            return self.matrix[self._index[word]]
        except KeyError:
            raise KeyError(f"word not in table: {word!r}") from None

    def get(self, word: str):
        idx = self._index.get(word)
        return None if idx is None else self.matrix[idx]

    def row(self, word: str) -> int:
        return self._index[word]


def load_embeddings(path, dim: int) -> tuple[EmbeddingTable, int]:
    """Load a text vector file (word then ``dim`` floats per line).

    Malformed lines are skipped and counted; more than 50% malformed lines
    (or an empty file) is a hard error. Returns (table, skipped_count).
    """
    if dim <= 0:
        raise DataError(f"load_embeddings: dim must be positive, got {dim}")
    words: list[str] = []
    rows: list[np.ndarray] = []
    skipped = 0
    total = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            total += 1
            parts = line.split(" ")
            if len(parts) != dim + 1:
                skipped += 1
                continue
            try:
                vec = np.array([float(p) for p in parts[1:]])
            except ValueError:
                skipped += 1
                continue
            if not np.all(np.isfinite(vec)):
                skipped += 1
                continue
            words.append(parts[0])
            rows.append(vec)
    if total == 0:
        raise DataError(f"{path}: empty vector file")
    if skipped > total / 2:
        raise DataError(f"{path}: {skipped}/{total} malformed lines for dim={dim}")
    if not words:
        raise DataError(f"{path}: no usable vectors")
    return EmbeddingTable(tuple(words), np.array(rows)), skipped


def save_embeddings(table: EmbeddingTable, path) -> None:
    """Write the standard text vector format (float repr round-trips)."""
    with open(path, "w", encoding="utf-8") as fh:
        for word, vec in zip(table.words, table.matrix):
            fh.write(word + " " + " ".join(repr(v) for v in vec.tolist()) + "\n")


@dataclass(frozen=True)
class EmotionConstraintSet:
    """Attract/repel word pairs derived from an emotion lexicon."""

    attract_pairs: tuple[tuple[str, str], ...]
    repel_pairs: tuple[tuple[str, str], ...]
    source: str = ""
    dropped_oov: int = 0

    def __post_init__(self):
        overlap = set(self.attract_pairs) & set(self.repel_pairs)
        if overlap:
            raise DataError(f"constraint set: pairs in both attract and repel: {sorted(overlap)[:3]}")

    def restrict_to_vocab(self, words) -> "EmotionConstraintSet":
        """Drop pairs referencing out-of-vocabulary words, counting them."""
        vocab = set(words)
        attract = tuple(p for p in self.attract_pairs if p[0] in vocab and p[1] in vocab)
        repel = tuple(p for p in self.repel_pairs if p[0] in vocab and p[1] in vocab)
        dropped = (len(self.attract_pairs) - len(attract)) + (len(self.repel_pairs) - len(repel))
        return EmotionConstraintSet(attract, repel, self.source, self.dropped_oov + dropped)


def lexicon_classes(lexicon: dict[str, np.ndarray], threshold: float) -> dict[str, str]:
    """Assign each word whose top emotion score exceeds the threshold to that class."""
    classes: dict[str, str] = {}
    for word in sorted(lexicon):
        scores = np.asarray(lexicon[word], dtype=float)
        if scores.shape != (len(EMOTIONS),):
            raise DataError(f"lexicon word {word!r}: expected {len(EMOTIONS)} scores")
        best = int(np.argmax(scores))
        if scores[best] > threshold:
            classes[word] = EMOTIONS[best]
    return classes


def build_constraints(lexicon: dict[str, np.ndarray], threshold: float = 0.5,
                      max_pairs: int = 100000, seed: int = 0,
                      source: str = "") -> EmotionConstraintSet:
    """Enumerate attract pairs within a class and repel pairs across
    contradictory classes, subsampling each list deterministically when it
    exceeds ``max_pairs``."""
    check_seed(seed)
    classes = lexicon_classes(lexicon, threshold)
    if not classes:
        raise DataError(f"no lexicon word passes threshold {threshold}")
    by_class: dict[str, list[str]] = {}
    for word, cls in classes.items():
        by_class.setdefault(cls, []).append(word)
    attract: list[tuple[str, str]] = []
    for cls in sorted(by_class):
        members = sorted(by_class[cls])
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                attract.append((members[i], members[j]))
    repel: list[tuple[str, str]] = []
    for cls in sorted(by_class):
        for other in CONTRADICTORY_CLASSES[cls]:
            if other <= cls or other not in by_class:
                continue  # each unordered class pair once
            for w1 in sorted(by_class[cls]):
                for w2 in sorted(by_class[other]):
                    repel.append(tuple(sorted((w1, w2))))
    repel = sorted(set(repel))
    rng = random.Random(seed)
    if len(attract) > max_pairs:
        attract = sorted(rng.sample(attract, max_pairs))
    if len(repel) > max_pairs:
        repel = sorted(rng.sample(repel, max_pairs))
    return EmotionConstraintSet(tuple(attract), tuple(repel), source=source)


def load_constraints(path) -> EmotionConstraintSet:
    """Read tab-separated (word1, word2, attract|repel) lines."""
    attract: list[tuple[str, str]] = []
    repel: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3 or parts[2] not in ("attract", "repel"):
                raise DataError(f"{path}:{line_no}: expected 'w1<TAB>w2<TAB>attract|repel'")
            pair = (parts[0], parts[1])
            (attract if parts[2] == "attract" else repel).append(pair)
    return EmotionConstraintSet(tuple(attract), tuple(repel), source=str(path))


def save_constraints(constraints: EmotionConstraintSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for w1, w2 in constraints.attract_pairs:
            fh.write(f"{w1}\t{w2}\tattract\n")
        for w1, w2 in constraints.repel_pairs:
            fh.write(f"{w1}\t{w2}\trepel\n")


def load_lexicon(path) -> dict[str, np.ndarray]:
    """Read a tab-separated lexicon: word then five emotion scores."""
    lexicon: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 1 + len(EMOTIONS):
                raise DataError(f"{path}:{line_no}: expected word + {len(EMOTIONS)} scores")
            try:
                lexicon[parts[0]] = np.array([float(p) for p in parts[1:]])
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: bad score ({exc})") from exc
    if not lexicon:
        raise DataError(f"{path}: empty lexicon")
    return lexicon


def save_lexicon(lexicon: dict[str, np.ndarray], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for word in sorted(lexicon):
            scores = "\t".join(repr(float(s)) for s in np.asarray(lexicon[word]))
            fh.write(f"{word}\t{scores}\n")


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return matrix / norms


@dataclass(frozen=True)
class CounterfitResult:
    table: EmbeddingTable
    epoch_losses: tuple[float, ...]
    dropped_oov_pairs: int


def counterfit(table: EmbeddingTable, constraints: EmotionConstraintSet,
               epochs: int = 20, lr: float = 0.1,
               margins: tuple[float, float] = (0.8, 0.3),
               preserve_weight: float = 0.1, seed: int = 0) -> CounterfitResult:
    """Produce the affect-enriched variant of a vector table.

    Each epoch takes one gradient step on the summed hinge losses (attract
    pairs pulled within the cosine margin, repel pairs pushed below theirs),
    applies the preservation pull toward the original vectors as an exact
    proximal step of the quadratic term (stable for arbitrarily large
    weights), then renormalizes every vector to unit length.
    """
    if table.variant != "original":
        raise DataError(f"counterfit expects an original table, got {table.variant!r}")
    if epochs < 1:
        raise DataError(f"counterfit: epochs must be >= 1, got {epochs}")
    margin_attract, margin_repel = margins
    check_seed(seed)

    kept = constraints.restrict_to_vocab(table.words)
    dropped = kept.dropped_oov - constraints.dropped_oov
    if not kept.attract_pairs and not kept.repel_pairs:
        warnings.warn("counterfit: empty constraint set, returning unit-normalized input")
        out = EmbeddingTable(table.words, _unit_rows(table.matrix), "counterfitted")
        return CounterfitResult(out, (), dropped)

    original = _unit_rows(table.matrix.astype(np.float64))
    vectors = original.copy()

    attract_idx = np.array([[table.row(a), table.row(b)] for a, b in kept.attract_pairs],
                           dtype=int).reshape(-1, 2)
    repel_idx = np.array([[table.row(a), table.row(b)] for a, b in kept.repel_pairs],
                         dtype=int).reshape(-1, 2)

    # Identical-direction repel pairs have no descent direction: break the
    # symmetry with a small seeded jitter before training.
    rng = np.random.default_rng(seed)
    for i, j in repel_idx:
        if float(vectors[i] @ vectors[j]) > 1.0 - 1e-12:
            vectors[i] = vectors[i] + rng.normal(0.0, 1e-4, size=table.dim)
            vectors[j] = vectors[j] + rng.normal(0.0, 1e-4, size=table.dim)
    vectors = _unit_rows(vectors)

    def pair_loss_grad(mat: np.ndarray) -> tuple[float, np.ndarray]:
        # Rows are unit vectors, so cos(u, v) = u . v and its gradient wrt u
        # on the ambient space is v - (u . v) u.
        loss = 0.0
        grad = np.zeros_like(mat)
        for idx, sign, margin in ((attract_idx, -1.0, margin_attract),
                                  (repel_idx, 1.0, margin_repel)):
            if idx.size == 0:
                continue
            u = mat[idx[:, 0]]
            v = mat[idx[:, 1]]
            cos = np.sum(u * v, axis=1)
            # attract: max(0, margin - cos); repel: max(0, cos - margin)
            viol = (margin - cos) if sign < 0 else (cos - margin)
            active = viol > 0
            loss += float(viol[active].sum())
            dcos = np.where(active, sign, 0.0)[:, None]
            gu = dcos * (v - cos[:, None] * u)
            gv = dcos * (u - cos[:, None] * v)
            np.add.at(grad, idx[:, 0], gu)
            np.add.at(grad, idx[:, 1], gv)
        return loss, grad

    losses: list[float] = []
    shrink = 1.0 + 2.0 * lr * preserve_weight
    for epoch in range(epochs):
        loss, grad = pair_loss_grad(vectors)
        loss += preserve_weight * float(np.sum((vectors - original) ** 2))
        if not np.isfinite(loss):
            raise NumericalError(f"counterfit: non-finite loss at epoch {epoch}")
        with np.errstate(over="ignore", invalid="ignore"):
            vectors = vectors - lr * grad
            vectors = (vectors + 2.0 * lr * preserve_weight * original) / shrink
            vectors = _unit_rows(vectors)
        if not np.all(np.isfinite(vectors)):
            raise NumericalError(f"counterfit: non-finite vectors at epoch {epoch}")
        losses.append(loss)

    out = EmbeddingTable(table.words, vectors, "counterfitted")
    return CounterfitResult(out, tuple(losses), dropped)


@dataclass(frozen=True)
class CohesionReport:
    within_class_cosine: float
    cross_class_cosine: float
    n_within_pairs: int
    n_cross_pairs: int


def cohesion_report(table: EmbeddingTable, word_classes: dict[str, str]) -> CohesionReport:
    """Mean cosine over same-class pairs vs contradictory-class pairs."""
    by_class: dict[str, list[str]] = {}
    for word in sorted(word_classes):
        if word_classes[word] not in EMOTIONS:
            raise DataError(f"unknown emotion class {word_classes[word]!r} for {word!r}")
        if word in table:
            by_class.setdefault(word_classes[word], []).append(word)
    populated = [cls for cls in sorted(by_class) if len(by_class[cls]) >= 2]
    if len(populated) < 2:
        raise DataError("cohesion_report: need >=2 classes with >=2 in-vocabulary words")

    unit = _unit_rows(table.matrix.astype(np.float64))

    def cos(w1: str, w2: str) -> float:
        return float(unit[table.row(w1)] @ unit[table.row(w2)])

    within: list[float] = []
    for cls in sorted(by_class):
        members = by_class[cls]
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                within.append(cos(members[i], members[j]))
    cross: list[float] = []
    for cls in sorted(by_class):
        for other in CONTRADICTORY_CLASSES[cls]:
            if other <= cls or other not in by_class:
                continue
            for w1 in by_class[cls]:
                for w2 in by_class[other]:
                    cross.append(cos(w1, w2))
    if not within or not cross:
        raise DataError("cohesion_report: no comparable pairs among populated classes")
    return CohesionReport(float(np.mean(within)), float(np.mean(cross)),
                          len(within), len(cross))


class CounterFitter(BaseEstimator, TransformerMixin):
    """Estimator facade over :func:`counterfit`.

    ``fit`` runs the optimization over a table; ``transform`` swaps known
    words' vectors for their enriched versions, leaving unknown words as-is.
    """

    def __init__(self, constraints: EmotionConstraintSet | None = None,
                 epochs: int = 20, lr: float = 0.1, attract_margin: float = 0.8,
                 repel_margin: float = 0.3, preserve_weight: float = 0.1,
                 seed: int = 0):
        self.constraints = constraints
        self.epochs = epochs
        self.lr = lr
        self.attract_margin = attract_margin
        self.repel_margin = repel_margin
        self.preserve_weight = preserve_weight
        self.seed = seed

    def fit(self, X: EmbeddingTable, y=None):
        if self.constraints is None:
            raise DataError("CounterFitter: constraints not set")
        result = counterfit(
            X, self.constraints, epochs=self.epochs, lr=self.lr,
            margins=(self.attract_margin, self.repel_margin),
            preserve_weight=self.preserve_weight, seed=self.seed,
        )
        self.embedding_table_ = result.table
        self.loss_trace_ = result.epoch_losses
        self.dropped_oov_pairs_ = result.dropped_oov_pairs
        return self

    def transform(self, X: EmbeddingTable) -> EmbeddingTable:
        if not hasattr(self, "embedding_table_"):
            raise DataError("CounterFitter: call fit before transform")
        fitted = self.embedding_table_
        rows = [fitted[w] if w in fitted else X[w] for w in X.words]
        return EmbeddingTable(X.words, np.array(rows), "counterfitted")
