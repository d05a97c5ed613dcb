"""Evaluation measures for predicted emotion profiles.

Coarse-grained top-1 accuracy, the two Pearson-based averages (per document
and per emotion), RMSE, and the 1-Wasserstein distance over the emotion
grid, plus paired significance tests (continuity-corrected McNemar and
two-sample Kolmogorov-Smirnov).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .validation import EMOTIONS, check_profile

E = len(EMOTIONS)


@dataclass(frozen=True)
class EvalPair:
    """One document's predicted and ground-truth profiles."""

    prediction: np.ndarray
    truth: np.ndarray
    doc_id: str = ""

    def __post_init__(self):
        check_profile(self.prediction, f"prediction[{self.doc_id}]")
        check_profile(self.truth, f"truth[{self.doc_id}]")


def _stack(pairs) -> tuple[np.ndarray, np.ndarray]:
    pairs = list(pairs)
    if not pairs:
        raise DataError("metrics: empty pair list")
    return (np.array([p.prediction for p in pairs]),
            np.array([p.truth for p in pairs]))


#: Deviations at or below this scale count as zero variance (guards against
#: rounding residue in nominally constant columns, e.g. [.1, .1, .1]).
VARIANCE_EPS = 1e-12


def _centered(x: np.ndarray) -> np.ndarray | None:
    xc = x - x.mean()
    scale = max(1.0, float(np.max(np.abs(x))))
    if float(np.max(np.abs(xc))) <= VARIANCE_EPS * scale:
        return None
    return xc


def pearson(x, y) -> float:
    """Plain Pearson correlation; NaN when either side has zero variance."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise DataError(f"pearson: need equal-length 1-d arrays, got {x.shape} / {y.shape}")
    xc = _centered(x)
    yc = _centered(y)
    if xc is None or yc is None:
        return float("nan")
    nx = np.sqrt((xc ** 2).sum())
    ny = np.sqrt((yc ** 2).sum())
    return float(xc @ yc / (nx * ny))


def argmax_lowest_tie(values: np.ndarray) -> int:
    """Index of the maximum; ties resolved toward the lowest emotion index."""
    return int(np.argmax(values))


def acc_flags(pairs) -> np.ndarray:
    preds, truths = _stack(pairs)
    return np.array([int(argmax_lowest_tie(p) == argmax_lowest_tie(t))
                     for p, t in zip(preds, truths)])


def acc_at_1(pairs) -> float:
    """Fraction of documents whose top-ranked emotion matches."""
    return float(acc_flags(pairs).mean())


def ap_document(pairs) -> tuple[float, int]:
    """Mean per-document Pearson over the five components.

    Documents where either profile has zero variance across emotions carry
    no defined correlation; they are excluded and counted.
    """
    preds, truths = _stack(pairs)
    values = []
    excluded = 0
    for p, t in zip(preds, truths):
        r = pearson(p, t)
        if math.isnan(r):
            excluded += 1
        else:
            values.append(r)
    if not values:
        raise DataError("ap_document: every document excluded (zero variance)")
    return float(np.mean(values)), excluded


def ap_emotion(pairs) -> tuple[float, int]:
    """Mean per-emotion Pearson between prediction and truth columns."""
    preds, truths = _stack(pairs)
    if preds.shape[0] < 2:
        raise DataError("ap_emotion: need at least 2 documents")
    values = []
    excluded = 0
    for e in range(E):
        r = pearson(preds[:, e], truths[:, e])
        if math.isnan(r):
            excluded += 1
        else:
            values.append(r)
    if not values:
        raise DataError("ap_emotion: every emotion excluded (zero variance)")
    return float(np.mean(values)), excluded


def rmse_per_doc(pairs) -> np.ndarray:
    preds, truths = _stack(pairs)
    return np.sqrt(((preds - truths) ** 2).mean(axis=1))


def rmse_d(pairs) -> float:
    """Mean over documents of per-document RMSE across the five components."""
    return float(rmse_per_doc(pairs).mean())


def wasserstein_profile(x, y) -> float:
    """1-Wasserstein distance between two profiles on the emotion grid.

    Ground metric |i - j| over emotion indices; on the line this is the sum
    of absolute CDF differences, the exact optimal-transport cost.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(np.abs(np.cumsum(x - y)[:-1]).sum())


def wd_per_doc(pairs) -> np.ndarray:
    preds, truths = _stack(pairs)
    return np.abs(np.cumsum(preds - truths, axis=1)[:, :-1]).sum(axis=1)


def wd_d(pairs) -> float:
    """Mean per-document 1-Wasserstein distance."""
    return float(wd_per_doc(pairs).mean())


@dataclass(frozen=True)
class EvalReport:
    acc_at_1: float
    ap_document: float
    ap_emotion: float
    rmse_d: float
    wd_d: float
    per_emotion_pearson: dict[str, float] = field(default_factory=dict)
    excluded_documents: int = 0
    excluded_emotions: int = 0
    n_documents: int = 0

    def to_tsv_row(self, label: str = "model") -> str:
        header = ("model\tacc_at_1_pct\tap_document\tap_emotion\trmse_d\twd_d"
                  "\texcluded_documents\texcluded_emotions\n")
        row = (f"{label}\t{100.0 * self.acc_at_1:.2f}\t{self.ap_document:.4f}"
               f"\t{self.ap_emotion:.4f}\t{self.rmse_d:.4f}\t{self.wd_d:.4f}"
               f"\t{self.excluded_documents}\t{self.excluded_emotions}\n")
        return header + row


def evaluate(pairs) -> EvalReport:
    """Compute the full measure suite over a list of evaluation pairs."""
    pairs = list(pairs)
    preds, truths = _stack(pairs)
    apd, excl_docs = ap_document(pairs)
    ape, excl_emos = ap_emotion(pairs)
    per_emotion = {}
    for e, name in enumerate(EMOTIONS):
        r = pearson(preds[:, e], truths[:, e])
        per_emotion[name] = r
    return EvalReport(
        acc_at_1=acc_at_1(pairs),
        ap_document=apd,
        ap_emotion=ape,
        rmse_d=rmse_d(pairs),
        wd_d=wd_d(pairs),
        per_emotion_pearson=per_emotion,
        excluded_documents=excl_docs,
        excluded_emotions=excl_emos,
        n_documents=len(pairs),
    )


@dataclass(frozen=True)
class McNemarResult:
    b: int  # first correct, second wrong
    c: int  # first wrong, second correct
    statistic: float | None
    p_value: float | None

    @property
    def no_discordance(self) -> bool:
        return self.b + self.c == 0

    def describe(self) -> str:
        if self.no_discordance:
            return "McNemar: no discordance (b=c=0), statistic undefined"
        return (f"McNemar: b={self.b} c={self.c} "
                f"chi2={self.statistic:.4f} p={self.p_value:.6g}")


def chi2_sf_1df(x: float) -> float:
    """Survival function of chi-squared with 1 dof via the error function."""
    if x < 0:
        raise DataError(f"chi2_sf_1df: negative statistic {x}")
    return math.erfc(math.sqrt(x / 2.0))


def mcnemar(acc_flags_a, acc_flags_b) -> McNemarResult:
    """Continuity-corrected McNemar test on paired 0/1 accuracy flags."""
    a = np.asarray(acc_flags_a, dtype=int)
    b_arr = np.asarray(acc_flags_b, dtype=int)
    if a.shape != b_arr.shape or a.ndim != 1 or a.size == 0:
        raise DataError("mcnemar: flag lists must be non-empty and paired")
    if np.any((a != 0) & (a != 1)) or np.any((b_arr != 0) & (b_arr != 1)):
        raise DataError("mcnemar: flags must be 0/1")
    b = int(np.sum((a == 1) & (b_arr == 0)))
    c = int(np.sum((a == 0) & (b_arr == 1)))
    if b + c == 0:
        return McNemarResult(b=0, c=0, statistic=None, p_value=None)
    stat = (abs(b - c) - 1) ** 2 / (b + c)
    return McNemarResult(b=b, c=c, statistic=float(stat), p_value=chi2_sf_1df(stat))


def kolmogorov_sf(lam: float) -> float:
    """Asymptotic Kolmogorov survival function 2 * sum (-1)^(j-1) exp(-2 j^2 lam^2)."""
    if lam <= 1e-10:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, 101):
        term = sign * math.exp(-2.0 * (j * lam) ** 2)
        total += term
        sign = -sign
        if abs(term) < 1e-16:
            break
    return float(min(1.0, max(0.0, 2.0 * total)))


def ks_test(errors_a, errors_b) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov: D = sup |ECDF_a - ECDF_b| plus
    the asymptotic p-value."""
    a = np.sort(np.asarray(errors_a, dtype=np.float64))
    b = np.sort(np.asarray(errors_b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise DataError("ks_test: empty sample")
    values = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, values, side="right") / a.size
    cdf_b = np.searchsorted(b, values, side="right") / b.size
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    n_eff = a.size * b.size / (a.size + b.size)
    return d, kolmogorov_sf(math.sqrt(n_eff) * d)
