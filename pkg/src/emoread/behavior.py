"""Attention-map behavior analysis.

External attention maps (EAM) flag emotion words and named entities; hybrid
maps (HAM) keep the model's weight only where the EAM agrees. Three corpus
similarities quantify how much trained attention lands on those key terms:
a ranking AUC, a binary cosine, and an intersection ratio.
"""

from __future__ import annotations

import html
from dataclasses import dataclass

import numpy as np

from .corpus import Document, clean_text
from .errors import DataError
from .validation import check_aligned

#: Model weights at or below this are treated as zero when forming HAM support.
SUPPORT_EPS = 1e-12


@dataclass(frozen=True)
class ModelAttentionMap:
    doc_id: str
    weights: np.ndarray  # aligned to corpus tokens, non-negative, sums to 1

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-6:
            raise DataError(f"model map {self.doc_id!r}: weights are not a "
                            f"probability vector (sum={w.sum()!r})")


@dataclass(frozen=True)
class ExternalAttentionMap:
    doc_id: str
    flags: np.ndarray  # 0/1 per token

    def __post_init__(self):
        f = np.asarray(self.flags)
        if not np.all((f == 0) | (f == 1)):
            raise DataError(f"external map {self.doc_id!r}: flags must be 0/1")

    @property
    def is_empty(self) -> bool:
        """True when the document lands in D' (no emotion word or entity)."""
        return not np.any(self.flags)


@dataclass(frozen=True)
class HybridAttentionMap:
    doc_id: str
    weights: np.ndarray  # model weight on EAM-supported tokens, else 0

    @property
    def binary(self) -> np.ndarray:
        return (self.weights > SUPPORT_EPS).astype(int)


class GazetteerTagger:
    """Named-entity stand-in: gazetteer lookup plus a capitalization heuristic.

    A token is tagged when its lowercase form is in the gazetteer, or when
    the original-case surface form starts uppercase at a non-sentence-initial
    position. Precomputed annotations can replace this by implementing
    ``tag(doc) -> flags``.
    """

    def __init__(self, gazetteer: set[str] | None = None,
                 capitalized_heuristic: bool = True):
        self.gazetteer = {w.lower() for w in (gazetteer or set())}
        self.capitalized_heuristic = capitalized_heuristic

    def tag(self, doc: Document) -> np.ndarray:
        flags = np.zeros(len(doc.tokens), dtype=int)
        for i, tok in enumerate(doc.tokens):
            if tok.lower() in self.gazetteer:
                flags[i] = 1
        if self.capitalized_heuristic and doc.raw_text:
            surface = clean_text(doc.raw_text, noise_terms=(), lowercase=False)
            for i, raw_tok in enumerate(surface[:len(doc.tokens)]):
                if i > 0 and raw_tok[:1].isupper():
                    flags[i] = 1
        return flags


def emotion_word_set(lexicon: dict[str, np.ndarray], threshold: float = 0.5) -> set[str]:
    """Words with any emotion score above the threshold."""
    return {w for w, scores in lexicon.items()
            if float(np.max(np.asarray(scores, dtype=float))) > threshold}


def build_eam(doc: Document, emotion_words: set[str],
              tagger: GazetteerTagger | None = None) -> ExternalAttentionMap:
    """Binary flags: 1 iff the token is an emotion word or a named entity."""
    flags = np.array([1 if tok in emotion_words else 0 for tok in doc.tokens])
    if tagger is not None:
        flags = np.maximum(flags, tagger.tag(doc))
    return ExternalAttentionMap(doc_id=doc.id, flags=flags)


def build_ham(model_map: ModelAttentionMap, eam: ExternalAttentionMap
              ) -> HybridAttentionMap:
    """Model weight where the model attended (>0) and the EAM agrees, else 0."""
    check_aligned(model_map.weights, eam.flags, "model map", "external map")
    weights = np.where((eam.flags == 1) & (model_map.weights > SUPPORT_EPS),
                       model_map.weights, 0.0)
    return HybridAttentionMap(doc_id=model_map.doc_id, weights=weights)


def ranking_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """AUC of scores ranking label-1 tokens above label-0 tokens, ties 0.5."""
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if pos.size == 0 or neg.size == 0:
        raise DataError("ranking_auc: need at least one positive and one negative")
    wins = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return float((wins + 0.5 * ties) / (pos.size * neg.size))


def beh_sim(pairs) -> tuple[float, int]:
    """Mean per-document ranking AUC of continuous scores against the EAM.

    Documents whose EAM is all-positive or all-negative have no defined AUC;
    they are skipped and counted. Returns (mean AUC, skipped count).
    """
    values = []
    skipped = 0
    for scores, eam in pairs:
        scores = np.asarray(scores, dtype=np.float64)
        flags = np.asarray(eam.flags if isinstance(eam, ExternalAttentionMap) else eam)
        check_aligned(scores, flags, "scores", "external map")
        if flags.sum() == 0 or flags.sum() == flags.size:
            skipped += 1
            continue
        values.append(ranking_auc(scores, flags))
    if not values:
        raise DataError("beh_sim: every document skipped (degenerate external maps)")
    return float(np.mean(values)), skipped


def word_sim(pairs) -> tuple[float, int]:
    """Mean cosine between binary HAM and EAM over documents outside D'.

    A HAM with empty support against a non-empty EAM contributes cosine 0.
    Returns (mean cosine, number of D' documents excluded).
    """
    values = []
    excluded = 0
    for ham, eam in pairs:
        ham_bin = ham.binary if isinstance(ham, HybridAttentionMap) else np.asarray(ham)
        flags = np.asarray(eam.flags if isinstance(eam, ExternalAttentionMap) else eam)
        check_aligned(ham_bin, flags, "hybrid map", "external map")
        if flags.sum() == 0:
            excluded += 1
            continue
        denom = np.sqrt(float(ham_bin @ ham_bin)) * np.sqrt(float(flags @ flags))
        values.append(0.0 if denom == 0 else float(ham_bin @ flags) / denom)
    if not values:
        raise DataError("word_sim: every document is in D' (no key terms)")
    return float(np.mean(values)), excluded


def word_prob(pairs) -> tuple[float, int]:
    """Mean intersection ratio |EAM and HAM| / (|EAM| + lambda) outside D'.

    lambda is 1 for an empty EAM (guarding the ratio, which is then 0) and 0
    otherwise. Returns (mean ratio, number of D' documents excluded).
    """
    values = []
    excluded = 0
    for ham, eam in pairs:
        ham_bin = ham.binary if isinstance(ham, HybridAttentionMap) else np.asarray(ham)
        flags = np.asarray(eam.flags if isinstance(eam, ExternalAttentionMap) else eam)
        check_aligned(ham_bin, flags, "hybrid map", "external map")
        total = int(flags.sum())
        if total == 0:
            excluded += 1
            continue
        intersection = int(np.sum((flags == 1) & (ham_bin == 1)))
        values.append(intersection / total)
    if not values:
        raise DataError("word_prob: every document is in D' (no key terms)")
    return float(np.mean(values)), excluded


@dataclass(frozen=True)
class BehaviorReport:
    lexicon_name: str
    beh_sim: float
    word_sim: float
    word_prob: float
    skipped_auc: int
    excluded_d_prime: int

    def to_tsv_row(self) -> str:
        return (f"{self.lexicon_name}\t{self.beh_sim:.4f}\t{self.word_sim:.4f}"
                f"\t{self.word_prob:.4f}\t{self.skipped_auc}\t{self.excluded_d_prime}")


def behavior_report(docs, model_maps, eams, lexicon_name: str = "lexicon"
                    ) -> BehaviorReport:
    """The three similarities for one lexicon over one document set.

    The ranking AUC scores every token with the model's weight (the
    continuous view of the hybrid map); the cosine and intersection measures
    use the binary hybrid maps.
    """
    model_maps = list(model_maps)
    eams = list(eams)
    hams = [build_ham(m, e) for m, e in zip(model_maps, eams)]
    auc, skipped = beh_sim([(m.weights, e) for m, e in zip(model_maps, eams)])
    cos, excl = word_sim(list(zip(hams, eams)))
    prob, _ = word_prob(list(zip(hams, eams)))
    return BehaviorReport(lexicon_name, auc, cos, prob, skipped, excl)


def behavior_table(reports) -> str:
    header = "lexicon\tbeh_sim\tword_sim\tword_prob\tskipped_auc\texcluded_d_prime"
    return "\n".join([header] + [r.to_tsv_row() for r in reports]) + "\n"


def render_heatmap(weights, doc: Document) -> str:
    """One document's tokens shaded by attention weight, as an HTML fragment.

    Intensities are max-normalized per document and written with fixed
    formatting so output bytes are deterministic.
    """
    weights = np.asarray(weights, dtype=np.float64)
    check_aligned(weights, doc.tokens, "weights", "tokens")
    top = float(weights.max())
    spans = []
    for tok, w in zip(doc.tokens, weights):
        intensity = 0.0 if top <= 0 else float(w) / top
        spans.append(
            f'<span class="tok" style="background-color:rgba(220,60,60,{intensity:.3f})">'
            f"{html.escape(tok)}</span>"
        )
    return (f'<div class="doc" id="{html.escape(doc.id)}">' + " ".join(spans) + "</div>")


def render_heatmap_page(entries) -> str:
    """Standalone HTML page for (weights, document) pairs."""
    body = "\n".join(render_heatmap(w, d) for w, d in entries)
    return (
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
        "<style>.doc{font-family:sans-serif;margin:6px}"
        ".tok{padding:1px 3px;border-radius:3px}</style></head>\n"
        "<body>\n" + body + "\n</body></html>\n"
    )


def attention_dump(doc: Document, weights) -> str:
    """Per-line 'doc_id<TAB>token<TAB>weight' rows for one document."""
    weights = np.asarray(weights, dtype=np.float64)
    check_aligned(weights, doc.tokens, "weights", "tokens")
    return "".join(f"{doc.id}\t{tok}\t{repr(float(w))}\n"
                   for tok, w in zip(doc.tokens, weights))
