"""Ranking and regression metrics.

Tie handling is pinned down everywhere so results are reproducible across
implementations: AUROC counts ties as half-wins, Spearman uses average ranks,
Kendall is the tau-b variant, and score ties in precision-style metrics are
broken by ascending input index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class MetricReport:
    auroc: float | None = None
    auprc: float | None = None
    ap_at_k: float | None = None
    mse: float | None = None
    spearman_rho: float | None = None
    kendall_tau: float | None = None

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def _pair(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels, dtype=np.float64).ravel()
    if s.size != y.size:
        raise ValidationError("scores and labels differ in length")
    if s.size == 0:
        raise ValidationError("empty metric input")
    return s, y


def average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks, ascending, ties get the average rank of their group."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0  # mean of ranks i+1 .. j+1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _desc_order(scores: np.ndarray) -> np.ndarray:
    """Descending score order with ties broken by ascending index."""
    return np.lexsort((np.arange(scores.size), -scores))


def auroc(scores, labels) -> float:
    """P(score_pos > score_neg) + 0.5 * P(tie), via the rank formula."""
    s, y = _pair(scores, labels)
    pos = y == 1
    p, n = int(pos.sum()), int((~pos).sum())
    if p == 0 or n == 0:
        raise ValidationError("AUROC needs at least one positive and one negative")
    r_pos = average_ranks(s)[pos].sum()
    return (r_pos - p * (p + 1) / 2.0) / (p * n)


def auprc(scores, labels) -> float:
    """Average precision: the step integral of the precision-recall curve."""
    s, y = _pair(scores, labels)
    p = int((y == 1).sum())
    if p == 0:
        raise ValidationError("average precision needs at least one positive")
    order = _desc_order(s)
    hits = 0
    total = 0.0
    for rank, i in enumerate(order, start=1):
        if y[i] == 1:
            hits += 1
            total += hits / rank
    return total / p


def ap_at_k(scores, labels, k: int = 50) -> float:
    """Precision among the k highest-scored items."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    s, y = _pair(scores, labels)
    top = _desc_order(s)[:k]
    return float(y[top].sum()) / min(k, s.size)


def mse(pred, target) -> float:
    p, t = _pair(pred, target)
    return float(np.mean((p - t) ** 2))


def _pearson_from_exact_sums(x: np.ndarray, y: np.ndarray) -> float:
    n = x.size
    sx, sy = float(x.sum()), float(y.sum())
    sxx, syy = float((x * x).sum()), float((y * y).sum())
    sxy = float((x * y).sum())
    num = n * sxy - sx * sy
    # single sqrt of the product: exact +/-1 for perfectly monotone inputs,
    # where both variance terms are equal and the product a perfect square
    den = math.sqrt((n * sxx - sx * sx) * (n * syy - sy * sy))
    if den == 0:
        raise ValidationError("correlation undefined for constant input")
    return num / den


def spearman(pred, target) -> float:
    """Pearson correlation of average ranks."""
    p, t = _pair(pred, target)
    if p.size < 2:
        raise ValidationError("need at least two points")
    return _pearson_from_exact_sums(average_ranks(p), average_ranks(t))


def kendall(pred, target) -> float:
    """Tau-b: (concordant - discordant) / sqrt((n0-n1)(n0-n2))."""
    p, t = _pair(pred, target)
    n = p.size
    if n < 2:
        raise ValidationError("need at least two points")
    dp = np.sign(p[:, None] - p[None, :])
    dt = np.sign(t[:, None] - t[None, :])
    iu = np.triu_indices(n, k=1)
    prod = dp[iu] * dt[iu]
    concordant = int((prod > 0).sum())
    discordant = int((prod < 0).sum())
    ties_p = int((dp[iu] == 0).sum())
    ties_t = int((dt[iu] == 0).sum())
    n0 = n * (n - 1) // 2
    den = math.sqrt((n0 - ties_p) * (n0 - ties_t))
    if den == 0:
        raise ValidationError("tau-b undefined for constant input")
    return (concordant - discordant) / den


def classification_report(scores, labels, k: int = 50) -> MetricReport:
    return MetricReport(auroc=auroc(scores, labels),
                        auprc=auprc(scores, labels),
                        ap_at_k=ap_at_k(scores, labels, k))


def regression_report(pred, target) -> MetricReport:
    return MetricReport(mse=mse(pred, target),
                        spearman_rho=spearman(pred, target),
                        kendall_tau=kendall(pred, target))
