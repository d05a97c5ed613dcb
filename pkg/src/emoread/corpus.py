"""Corpus data model: label mapping, cleaning, normalization, splits, statistics.

Documents enter as line-delimited JSON records (one object per line with
``id``, ``text`` and either ``votes`` or ``profile``) and leave as an
immutable :class:`LabeledCorpus` with deterministic 60:20:20 splits.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .metrics import pearson
from .validation import EMOTIONS, check_profile, check_seed

#: Vote-label mapping from the news-portal reaction vocabulary onto the five
#: retained emotion classes; remaining source labels are dropped.
SOURCE_LABEL_MAP = {
    "angry": "anger",
    "sad": "sadness",
    "afraid": "fear",
    "happy": "joy",
    "inspired": "surprise",
}

#: Labels silently dropped during mapping (including disgust, which has no
#: counterpart in the source vocabulary and is excluded from the study).
DROPPED_LABELS = {"don't care", "dont care", "amused", "annoyed", "disgust"}

#: Default noisy-term list for headline cleaning; override via config.
DEFAULT_NOISE_TERMS = ("(updated)", "survey", "report", "new-review", "midday-wra")

SPLIT_NAMES = ("train", "val", "test")

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z0-9]+)*")


@dataclass(frozen=True)
class Document:
    """A short-text document with its deterministic token sequence."""

    id: str
    raw_text: str
    tokens: tuple[str, ...]
    genre: str | None = None

    def __post_init__(self):
        if not self.tokens:
            raise DataError(f"document {self.id!r}: empty token sequence")


@dataclass(frozen=True)
class LabeledCorpus:
    """Documents paired with ground-truth emotion profiles, split-tagged."""

    documents: tuple[Document, ...]
    profiles: np.ndarray  # (n_docs, 5), rows on the simplex
    split_assignment: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.documents) != self.profiles.shape[0]:
            raise DataError("corpus: document/profile count mismatch")
        for i, row in enumerate(self.profiles):
            check_profile(row, f"profile[{self.documents[i].id}]")
        for doc_id, split in self.split_assignment.items():
            if split not in SPLIT_NAMES:
                raise DataError(f"corpus: unknown split {split!r} for {doc_id!r}")

    def __len__(self) -> int:
        return len(self.documents)

    @property
    def entries(self) -> list[tuple[Document, np.ndarray]]:
        return [(doc, self.profiles[i]) for i, doc in enumerate(self.documents)]

    def ids(self) -> list[str]:
        return [doc.id for doc in self.documents]

    def subset(self, split: str) -> "LabeledCorpus":
        """Slice out one split, keeping the assignment for provenance."""
        if split not in SPLIT_NAMES:
            raise DataError(f"unknown split {split!r}")
        keep = [i for i, doc in enumerate(self.documents)
                if self.split_assignment.get(doc.id) == split]
        return LabeledCorpus(
            documents=tuple(self.documents[i] for i in keep),
            profiles=self.profiles[keep] if keep else np.zeros((0, 5)),
            split_assignment={self.documents[i].id: split for i in keep},
        )


def map_labels(raw_votes: dict[str, float]) -> dict[str, float]:
    """Map source vote labels onto the retained emotion classes.

    Already-mapped labels pass through unchanged (the mapping is idempotent);
    labels outside both vocabularies are rejected by name.
    """
    mapped: dict[str, float] = {}
    for label, count in raw_votes.items():
        key = str(label).strip().lower()
        if count < 0:
            raise DataError(f"label {label!r}: negative count {count!r}")
        if key in SOURCE_LABEL_MAP:
            target = SOURCE_LABEL_MAP[key]
        elif key in EMOTIONS:
            target = key
        elif key in DROPPED_LABELS:
            continue
        else:
            raise DataError(f"unknown vote label {label!r}")
        mapped[target] = mapped.get(target, 0) + count
    return mapped


def normalize_profile(counts: dict[str, float]) -> np.ndarray:
    """Turn per-emotion vote counts into a proportional simplex profile."""
    values = np.zeros(len(EMOTIONS))
    for label, count in counts.items():
        key = str(label).strip().lower()
        if key not in EMOTIONS:
            raise DataError(f"unknown emotion label {label!r}")
        if count < 0:
            raise DataError(f"label {label!r}: negative count {count!r}")
        values[EMOTIONS.index(key)] += count
    total = values.sum()
    if total <= 0:
        raise DataError("no usable annotation: all vote counts are zero")
    return check_profile(values / total)


def clean_text(raw: str, noise_terms: tuple[str, ...] = DEFAULT_NOISE_TERMS,
               lowercase: bool = True) -> list[str]:
    """Clean and tokenize raw text.

    Noise terms are removed case-insensitively, punctuation and unknown
    symbols are stripped, and the result is whitespace-tokenized. An empty
    result marks the document as flagged; callers exclude it from the corpus.
    """
    text = raw
    for term in noise_terms:
        if not term:
            continue
        text = re.sub(re.escape(term), " ", text, flags=re.IGNORECASE)
    lowered = text.lower()
    tokens = _TOKEN_RE.findall(lowered)
    tokens = [t.strip("'") for t in tokens]
    tokens = [t for t in tokens if t]
    if lowercase:
        return tokens
    # Recover the original-case surface form of each kept token by scanning
    # the noise-stripped text in parallel (used by the capitalization-based
    # entity heuristic, which needs pre-lowercase forms).
    surface: list[str] = []
    cursor = 0
    for tok in tokens:
        idx = lowered.find(tok, cursor)
        if idx < 0:  # pragma: no cover - findall guarantees presence
            surface.append(tok)
            continue
        surface.append(text[idx:idx + len(tok)])
        cursor = idx + len(tok)
    return surface


def assign_splits(ids: list[str], seed: int) -> dict[str, str]:
    """Deterministic 60:20:20 split by shuffled index ranges.

    Train and validation sizes are floored; the remainder lands in test.
    """
    check_seed(seed)
    if len(set(ids)) != len(ids):
        raise DataError("split assignment requires unique document ids")
    n = len(ids)
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(np.floor(0.6 * n))
    n_val = int(np.floor(0.2 * n))
    assignment: dict[str, str] = {}
    for rank, idx in enumerate(order):
        if rank < n_train:
            split = "train"
        elif rank < n_train + n_val:
            split = "val"
        else:
            split = "test"
        assignment[ids[idx]] = split
    return assignment


@dataclass(frozen=True)
class CorpusStats:
    total_words: int
    unique_words: int
    avg_words_per_doc: float
    mean_vote_fraction: dict[str, float]
    docs_associated: dict[str, int]

    def to_tsv(self) -> str:
        lines = ["statistic\tvalue"]
        lines.append(f"total_words\t{self.total_words}")
        lines.append(f"unique_words\t{self.unique_words}")
        lines.append(f"avg_words_per_doc\t{self.avg_words_per_doc:.4f}")
        for emo in EMOTIONS:
            lines.append(f"mean_vote_fraction[{emo}]\t{self.mean_vote_fraction[emo]:.4f}")
        for emo in EMOTIONS:
            lines.append(f"docs_associated[{emo}]\t{self.docs_associated[emo]}")
        return "\n".join(lines) + "\n"


def corpus_stats(corpus: LabeledCorpus) -> CorpusStats:
    """Word counts plus per-emotion vote-fraction means and document counts."""
    if len(corpus) == 0:
        raise DataError("corpus_stats: empty corpus")
    vocab: set[str] = set()
    total = 0
    for doc in corpus.documents:
        total += len(doc.tokens)
        vocab.update(doc.tokens)
    means = corpus.profiles.mean(axis=0)
    assoc = (corpus.profiles > 0).sum(axis=0)
    return CorpusStats(
        total_words=total,
        unique_words=len(vocab),
        avg_words_per_doc=total / len(corpus),
        mean_vote_fraction={emo: float(means[i]) for i, emo in enumerate(EMOTIONS)},
        docs_associated={emo: int(assoc[i]) for i, emo in enumerate(EMOTIONS)},
    )


def emotion_correlations(corpus: LabeledCorpus) -> np.ndarray:
    """Pearson correlation between emotion components across documents.

    Zero-variance columns make every cell involving them undefined; those
    cells are returned as NaN. Defined diagonal cells are exactly 1.
    """
    if len(corpus) < 2:
        raise DataError("emotion_correlations: need at least 2 documents")
    profiles = corpus.profiles
    k = profiles.shape[1]
    out = np.full((k, k), np.nan)
    for i in range(k):
        for j in range(i, k):
            if i == j:
                r = pearson(profiles[:, i], profiles[:, i])
                out[i, i] = 1.0 if not np.isnan(r) else np.nan
            else:
                out[i, j] = out[j, i] = pearson(profiles[:, i], profiles[:, j])
    return out


def correlations_to_tsv(matrix: np.ndarray) -> str:
    lines = ["\t" + "\t".join(EMOTIONS)]
    for i, emo in enumerate(EMOTIONS):
        cells = []
        for j in range(len(EMOTIONS)):
            v = matrix[i, j]
            cells.append("undefined" if np.isnan(v) else f"{v:.6f}")
        lines.append(emo + "\t" + "\t".join(cells))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RejectedRecord:
    line_no: int
    doc_id: str | None
    reason: str


def parse_corpus_line(line: str, line_no: int,
                      noise_terms: tuple[str, ...]) -> tuple[Document, np.ndarray]:
    """Parse one line-delimited corpus record into (document, profile)."""
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DataError(f"line {line_no}: invalid JSON ({exc})") from exc
    if not isinstance(record, dict):
        raise DataError(f"line {line_no}: expected an object")
    doc_id = record.get("id")
    if not doc_id or not isinstance(doc_id, str):
        raise DataError(f"line {line_no}: missing or invalid 'id'")
    text = record.get("text")
    if not isinstance(text, str):
        raise DataError(f"line {line_no}: missing or invalid 'text'")
    if "votes" in record:
        votes = record["votes"]
        if not isinstance(votes, dict):
            raise DataError(f"line {line_no}: 'votes' must be a label->count map")
        profile = normalize_profile(map_labels(votes))
    elif "profile" in record:
        profile = check_profile(record["profile"], f"line {line_no} profile")
    else:
        raise DataError(f"line {line_no}: record needs 'votes' or 'profile'")
    tokens = clean_text(text, noise_terms)
    if not tokens:
        raise DataError(f"line {line_no}: document empty after cleaning")
    genre = record.get("genre")
    doc = Document(id=doc_id, raw_text=text, tokens=tuple(tokens),
                   genre=genre if isinstance(genre, str) else None)
    return doc, profile


def load_corpus(path, noise_terms: tuple[str, ...] = DEFAULT_NOISE_TERMS,
                seed: int = 0,
                split_assignment: dict[str, str] | None = None,
                ) -> tuple[LabeledCorpus, list[RejectedRecord]]:
    """Load a line-delimited corpus file, collecting per-line rejections.

    Returns the corpus (with a deterministic split derived from ``seed``,
    unless an explicit assignment is supplied) and the rejected records.
    """
    documents: list[Document] = []
    profiles: list[np.ndarray] = []
    rejects: list[RejectedRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc, profile = parse_corpus_line(line, line_no, noise_terms)
                if doc.id in seen:
                    raise DataError(f"line {line_no}: duplicate id {doc.id!r}")
            except DataError as exc:
                doc_id = None
                try:
                    doc_id = json.loads(line).get("id")
                except Exception:
                    pass
                rejects.append(RejectedRecord(line_no, doc_id, str(exc)))
                continue
            seen.add(doc.id)
            documents.append(doc)
            profiles.append(profile)
    if not documents:
        raise DataError(f"{path}: no valid records")
    ids = [d.id for d in documents]
    assignment = split_assignment if split_assignment is not None else assign_splits(ids, seed)
    return LabeledCorpus(tuple(documents), np.array(profiles), assignment), rejects


def save_prepared_corpus(corpus: LabeledCorpus, path) -> None:
    """Write a prepared corpus: tokens, profile and split per record."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc, profile in corpus.entries:
            record = {
                "id": doc.id,
                "text": doc.raw_text,
                "tokens": list(doc.tokens),
                # json emits float repr, which round-trips float64 exactly
                "profile": profile.tolist(),
                "split": corpus.split_assignment.get(doc.id),
            }
            if doc.genre is not None:
                record["genre"] = doc.genre
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def load_prepared_corpus(path) -> LabeledCorpus:
    """Load a corpus previously written by :func:`save_prepared_corpus`."""
    documents: list[Document] = []
    profiles: list[np.ndarray] = []
    assignment: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = json.loads(line)
            doc = Document(
                id=record["id"],
                raw_text=record.get("text", ""),
                tokens=tuple(record["tokens"]),
                genre=record.get("genre"),
            )
            profile = check_profile([float(v) for v in record["profile"]],
                                    f"line {line_no} profile")
            documents.append(doc)
            profiles.append(profile)
            if record.get("split"):
                assignment[doc.id] = record["split"]
    if not documents:
        raise DataError(f"{path}: no records")
    return LabeledCorpus(tuple(documents), np.array(profiles), assignment)
