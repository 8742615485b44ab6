"""Independent reference implementations used as test oracles."""

import itertools

import numpy as np


def hv_grid(F, ref) -> float:
    """Exact 2-D hypervolume by coordinate compression over all cell corners."""
    F = np.asarray(F, dtype=float).reshape(-1, 2)
    r = np.asarray(ref, dtype=float)
    F = F[(F[:, 0] < r[0]) & (F[:, 1] < r[1])]
    if len(F) == 0:
        return 0.0
    xs = np.unique(np.append(F[:, 0], r[0]))
    ys = np.unique(np.append(F[:, 1], r[1]))
    total = 0.0
    for i in range(len(xs) - 1):
        for j in range(len(ys) - 1):
            if np.any((F[:, 0] <= xs[i]) & (F[:, 1] <= ys[j])):
                total += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j])
    return total


def hv_monte_carlo(F, ref, lower, n: int, rng) -> tuple[float, float]:
    """Monte-Carlo hypervolume estimate and its standard error."""
    F = np.asarray(F, dtype=float)
    lo, r = np.asarray(lower, float), np.asarray(ref, float)
    area = float(np.prod(r - lo))
    hits = 0
    chunk = 200_000
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        U = rng.uniform(lo, r, size=(m, 2))
        dom = np.zeros(m, dtype=bool)
        for f in F:
            dom |= (U[:, 0] >= f[0]) & (U[:, 1] >= f[1])
        hits += int(dom.sum())
    frac = hits / n
    return area * frac, area * np.sqrt(frac * (1 - frac) / n)


def greedy_by_enumeration(F, k: int, ref, hv=hv_grid) -> list[int]:
    """Greedy subset selection that scores every candidate with a fresh HV."""
    n = len(F)
    chosen: list[int] = []
    for _ in range(min(k, n)):
        best, best_val = None, 0.0
        for i in range(n):
            if i in chosen:
                continue
            v = hv(np.asarray(F)[chosen + [i]], ref)
            if best is None or v > best_val + 1e-12 * max(1.0, abs(best_val)):
                best, best_val = i, v
        chosen.append(best)
    return chosen


def best_subset_hv(F, k: int, ref) -> float:
    return max(hv_grid(np.asarray(F)[list(c)], ref) for c in itertools.combinations(range(len(F)), min(k, len(F))))


def _segment_distance(y, a, b) -> float:
    ab = b - a
    t = np.clip(np.dot(y - a, ab) / max(np.dot(ab, ab), 1e-300), 0.0, 1.0)
    return float(np.linalg.norm(y - (a + t * ab)))


def staircase_distance(y, front, far: float = 1e6) -> float:
    """Distance from ``y`` to the attainment staircase of ``front`` (rays truncated at ``far``)."""
    A = np.asarray(front, dtype=float)
    A = A[np.lexsort((A[:, 1], A[:, 0]))]
    keep, best = [], np.inf
    for a in A:
        if a[1] < best:
            keep.append(a)
            best = a[1]
    A = np.array(keep)
    y = np.asarray(y, dtype=float)
    segs = [(np.array([A[0, 0], far]), A[0])]
    for a, b in zip(A, A[1:]):
        corner = np.array([b[0], a[1]])
        segs += [(a, corner), (corner, b)]
    segs.append((A[-1], np.array([far, A[-1, 1]])))
    return min(_segment_distance(y, a, b) for a, b in segs)


def igdx_brute(A, R) -> float:
    A, R = np.asarray(A, float), np.asarray(R, float)
    return float(np.mean([min(np.linalg.norm(r - a) for a in A) for r in R]))


def rank_sum_exact_pvalue(a, b) -> float:
    """Two-sided exact rank-sum p-value by enumerating every rank assignment."""
    pooled = np.concatenate([a, b])
    ranks = np.argsort(np.argsort(pooled)) + 1.0
    n, N = len(a), len(pooled)
    observed = ranks[:n].sum()
    mean = n * (N + 1) / 2
    sums = [sum(c) for c in itertools.combinations(range(1, N + 1), n)]
    dev = abs(observed - mean)
    return sum(abs(s - mean) >= dev - 1e-12 for s in sums) / len(sums)
