"""Two-sample significance testing for benchmark tables."""

from collections.abc import Sequence

import numpy as np
from scipy.stats import mannwhitneyu

ALPHA = 0.05


def rank_sum_pvalue(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided Wilcoxon rank-sum p-value.

    Small samples without ties use the exact null distribution; otherwise the
    tie-corrected normal approximation without continuity correction. Samples
    made of one repeated value give 1.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("rank_sum_pvalue needs two non-empty samples")
    if np.ptp(np.concatenate([a, b])) == 0.0:
        return 1.0
    res = mannwhitneyu(a, b, alternative="two-sided", use_continuity=False, method="auto")
    return float(min(1.0, res.pvalue))


def holm(pvalues: Sequence[float], alpha: float = ALPHA) -> list[bool]:
    """Holm-Bonferroni step-down decisions for a family of p-values."""
    p = np.asarray(pvalues, dtype=float)
    m = len(p)
    reject = [False] * m
    for rank, i in enumerate(np.argsort(p, kind="stable")):
        if p[i] > alpha / (m - rank):
            break
        reject[int(i)] = True
    return reject


def significance(a: Sequence[float], b: Sequence[float], alpha: float = ALPHA) -> tuple[float, bool]:
    """p-value of one comparison and whether it is significant on its own."""
    p = rank_sum_pvalue(a, b)
    return p, p <= alpha
