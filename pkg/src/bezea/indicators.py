"""Performance and selection indicators for bi-objective approximation sets.

All objective-space functions assume minimization of both objectives.
"""

import numpy as np
from scipy.spatial import cKDTree


def _as_front(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return np.empty((0, 2))
    return arr.reshape(-1, 2)


def nondominated_sorted(front) -> np.ndarray:
    """Return the mutually non-dominated subset sorted ascending in f0.

    Weakly dominated duplicates are dropped (the first occurrence is kept).
    """
    F = _as_front(front)
    if len(F) == 0:
        return F
    order = np.lexsort((F[:, 1], F[:, 0]))
    kept = []
    best_f1 = np.inf
    for i in order:
        if F[i, 1] < best_f1:
            kept.append(i)
            best_f1 = F[i, 1]
    return F[kept]


def hypervolume_2d(front, ref) -> float:
    """Area dominated by ``front`` and bounded by the reference point ``ref``.

    Points that do not strictly dominate ``ref`` contribute nothing.
    Sort-and-sweep, O(n log n).
    """
    F = _as_front(front)
    r = np.asarray(ref, dtype=float)
    if len(F) == 0:
        return 0.0
    F = F[(F[:, 0] < r[0]) & (F[:, 1] < r[1])]
    if len(F) == 0:
        return 0.0
    F = nondominated_sorted(F)
    widths = np.diff(np.append(F[:, 0], r[0]))
    heights = r[1] - F[:, 1]
    return float(np.sum(widths * heights))


def uncrowded_distance(point, front) -> float:
    """Distance from ``point`` to the attainment boundary of ``front``.

    Zero when ``point`` is not dominated by the region the front dominates.
    The non-dominated region is a union of quadrants ``f0 < a`` ∪ ``f1 < b``
    plus the staircase notches; the distance is the smallest distance to any
    of those open regions.
    """
    y = np.asarray(point, dtype=float)
    A = nondominated_sorted(front)
    if len(A) == 0:
        return 0.0
    if not np.any((A[:, 0] <= y[0]) & (A[:, 1] <= y[1])):
        return 0.0
    best = min(y[0] - A[0, 0], y[1] - A[-1, 1])
    if len(A) > 1:
        # notch k: f0 < A[k+1].f0 and f1 < A[k].f1
        d0 = np.maximum(0.0, y[0] - A[1:, 0])
        d1 = np.maximum(0.0, y[1] - A[:-1, 1])
        best = min(best, float(np.min(np.hypot(d0, d1))))
    return float(max(best, 0.0))


def distance_to_reference_box(point, ref) -> float:
    """Euclidean distance from ``point`` to the box ``{y : y <= ref}``."""
    y = np.asarray(point, dtype=float)
    return float(np.hypot(*np.maximum(0.0, y - np.asarray(ref, dtype=float))))


def greedy_hss(front, k: int, ref) -> list[int]:
    """Greedy hypervolume subset selection.

    Repeatedly adds the point with the largest marginal hypervolume
    contribution. Ties (within 1e-12 relative) go to the lowest index.

    Returns:
        Indices into ``front`` in selection order, ``min(k, len(front))`` long.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    F = _as_front(front)
    n = len(F)
    if k >= n:
        return list(range(n))
    selected: list[int] = []
    current = 0.0
    remaining = list(range(n))
    for _ in range(k):
        gains = np.array([hypervolume_2d(F[selected + [i]], ref) - current for i in remaining])
        top = gains.max()
        tol = 1e-12 * max(1.0, abs(current))
        pick = remaining[int(np.flatnonzero(gains >= top - tol)[0])]
        selected.append(pick)
        remaining.remove(pick)
        current = hypervolume_2d(F[selected], ref)
    return selected


def igdx(approx, refset) -> float:
    """Mean distance from each reference decision vector to its nearest approximation point."""
    A = np.asarray(approx, dtype=float)
    R = np.asarray(refset, dtype=float)
    if A.size == 0 or R.size == 0:
        raise ValueError("igdx requires non-empty approximation and reference sets")
    if A.ndim == 1:
        A = A[None, :]
    if R.ndim == 1:
        R = R[None, :]
    dist, _ = cKDTree(A).query(R)
    return float(np.mean(dist))


def cover_rate(approx, refset) -> float:
    """Cover rate of the reference set's bounding box by the approximation's box.

    Per dimension the overlap ratio is clamped to [0, 1] and squared; the result
    is the ``2 * dim``-th root of the product. Dimensions where the reference set
    has no extent count as fully covered.
    """
    A = np.atleast_2d(np.asarray(approx, dtype=float))
    R = np.atleast_2d(np.asarray(refset, dtype=float))
    a_lo, a_hi = A.min(axis=0), A.max(axis=0)
    r_lo, r_hi = R.min(axis=0), R.max(axis=0)
    dim = R.shape[1]
    prod = 1.0
    for j in range(dim):
        extent = r_hi[j] - r_lo[j]
        if extent <= 0.0:
            continue
        overlap = (min(a_hi[j], r_hi[j]) - max(a_lo[j], r_lo[j])) / extent
        prod *= min(1.0, max(0.0, overlap)) ** 2
    return float(prod ** (1.0 / (2 * dim)))


def psp(approx, refset) -> float:
    """Pareto set proximity: cover rate divided by IGDX (``inf`` when IGDX is 0)."""
    cr = cover_rate(approx, refset)
    if cr == 0.0:
        return 0.0
    d = igdx(approx, refset)
    if d == 0.0:
        return float("inf")
    return cr / d


# relative slack under which a detour counts as no detour at all
COLINEAR_RTOL = 1e-12


def set_smoothness(points) -> float:
    """Mean detour ratio over the interior points of one ordered set."""
    X = np.asarray(points, dtype=float)
    if len(X) <= 2:
        return 1.0
    direct = np.linalg.norm(X[2:] - X[:-2], axis=1)
    step = np.linalg.norm(np.diff(X, axis=0), axis=1)
    detour = step[:-1] + step[1:]
    ratios = np.ones(len(direct))
    moving = detour > 0.0
    ratios[moving] = np.minimum(1.0, direct[moving] / detour[moving])
    ratios[moving & (detour - direct <= COLINEAR_RTOL * detour)] = 1.0
    return float(np.mean(ratios))


def smoothness(sets) -> float:
    """Average of :func:`set_smoothness` over a list of ordered point sequences."""
    if len(sets) == 0:
        return 1.0
    return float(np.mean([set_smoothness(s) for s in sets]))
