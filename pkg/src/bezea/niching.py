"""Hill-valley niching for points and for Bézier curves.

Two points share a valley when no point on the segment between them is worse
than both. Clustering walks the population from best to worst and attaches
each solution to the first of its nearest better neighbours it shares a
valley with.
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from bezea.bezier import BezierSolution, sort_key
from bezea.problems import BudgetExhausted, EvaluationBudget, Problem


def test_point_count(xi, xj, volume: float, n: int, dim: int) -> int:
    """Number of interior test points: 1 + floor(distance / expected edge length)."""
    edge = (volume / n) ** (1.0 / dim)
    d = float(np.linalg.norm(np.asarray(xi, float) - np.asarray(xj, float)))
    return 1 + int(np.floor(d / edge))


def _ordered(xi, xj):
    """Canonical endpoint order so a test and its mirror image are bit-identical."""
    return (xj, xi, True) if tuple(xj) < tuple(xi) else (xi, xj, False)


def _interior(xi, xj, n_t: int) -> np.ndarray:
    k = np.arange(1, n_t + 1)[:, None] / (n_t + 1)
    return xi + k * (xj - xi)


def hill_valley_test(xi, xj, n_t: int, f: Callable, budget: EvaluationBudget | None = None,
                     fi: float | None = None, fj: float | None = None) -> bool:
    """True when no interior test point of the edge is worse than both endpoints.

    ``f`` maps an (n, dim) array to n scalar values, lower is better. Missing
    endpoint values are evaluated (and charged). Running out of budget before
    the test completes returns False.
    """
    if n_t < 1:
        raise ValueError(f"n_t must be >= 1, got {n_t}")
    xi, xj = np.asarray(xi, float), np.asarray(xj, float)
    try:
        if fi is None:
            fi = _charged(f, xi[None], budget)[0]
        if fj is None:
            fj = _charged(f, xj[None], budget)[0]
    except BudgetExhausted:
        return False
    a, b, _ = _ordered(xi, xj)
    allowed = n_t if budget is None else min(n_t, budget.remaining)
    if allowed == 0:
        return False
    # vectorized, but only the points a sequential scan would reach are charged
    values = np.asarray(f(_interior(a, b, n_t)[:allowed]), float)
    worse = np.flatnonzero(values > max(fi, fj))
    needed = int(worse[0]) + 1 if len(worse) else allowed
    if budget is not None:
        budget.charge(needed, "hvt")
    if len(worse):
        return False
    return allowed == n_t


def _charged(f, X, budget):
    if budget is not None:
        budget.charge(len(X), "hvt")
    return np.asarray(f(X), float)


class EdgeTester:
    """Hill-valley tests on a problem's objectives with memoized test points.

    Test-point objective values are cached per edge, so repeating a test, or
    testing another objective on the same edge, only pays for points not yet
    evaluated. Call :meth:`reset` between generations.
    """

    def __init__(self, problem: Problem, budget: EvaluationBudget | None):
        self.problem = problem
        self.budget = budget
        self.cache: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}
        self.calls = 0

    def reset(self) -> None:
        self.cache.clear()

    def test(self, xi, xj, Fi, Fj, n_t: int, objectives: Sequence[int] = (0, 1)) -> bool:
        self.calls += 1
        xi, xj = np.asarray(xi, float), np.asarray(xj, float)
        Fi, Fj = np.asarray(Fi, float), np.asarray(Fj, float)
        if np.array_equal(xi, xj):
            return True
        a, b, swapped = _ordered(xi, xj)
        key = (a.tobytes(), b.tobytes(), n_t)
        X = _interior(a, b, n_t)
        known = self.cache.get(key, (X[:0], np.empty((0, 2))))[1]
        threshold = np.maximum(Fi, Fj)
        for k in objectives:
            fails = np.flatnonzero(known[:, k] > threshold[k])
            if len(fails):
                return False
            if len(known) == n_t:
                continue
            start = len(known)
            allowed = n_t - start
            if self.budget is not None:
                allowed = min(allowed, self.budget.remaining)
            if allowed == 0:
                return False
            fresh = self.problem.fn(X[start:start + allowed])
            worse = np.flatnonzero(fresh[:, k] > threshold[k])
            needed = int(worse[0]) + 1 if len(worse) else allowed
            if self.budget is not None:
                self.budget.charge(needed, "hvt")
            known = np.vstack([known, fresh[:needed]])
            self.cache[key] = (X[:len(known)], known)
            if len(worse):
                return False
            if len(known) < n_t:
                return False
        return True

    def evaluated_points(self, xi, xj, n_t: int) -> tuple[np.ndarray, np.ndarray]:
        """Test points (and objective values) evaluated so far on an edge."""
        a, b, _ = _ordered(np.asarray(xi, float), np.asarray(xj, float))
        return self.cache.get((a.tobytes(), b.tobytes(), n_t), (np.empty((0, len(a))), np.empty((0, 2))))


def nearest_better_clustering(X, order: Sequence[int], same_valley: Callable[[int, int], bool],
                              max_tries: int) -> list[list[int]]:
    """Cluster along the nearest-better tree.

    ``order`` lists indices best first. Each later solution is tested against
    its nearest better neighbours (one per distinct cluster, at most
    ``max_tries``) and joins the first that shares its valley; otherwise it
    founds a new cluster. Clusters are returned best member first.
    """
    X = np.asarray(X, float)
    order = list(order)
    if not order:
        return []
    label = {order[0]: 0}
    clusters = [[order[0]]]
    for r in range(1, len(order)):
        i = order[r]
        better = np.array(order[:r])
        dist = np.linalg.norm(X[better] - X[i], axis=1)
        tested: set[int] = set()
        assigned = None
        for j in better[np.argsort(dist, kind="stable")]:
            if len(tested) >= max_tries:
                break
            c = label[int(j)]
            if c in tested:
                continue
            tested.add(c)
            if same_valley(i, int(j)):
                assigned = c
                break
        if assigned is None:
            assigned = len(clusters)
            clusters.append([])
        label[i] = assigned
        clusters[assigned].append(i)
    return clusters


@dataclass
class Cluster:
    """A niche: members ordered best first, with their decision-space mean."""

    members: list
    mean: np.ndarray
    test_points: np.ndarray | None = None
    test_objectives: np.ndarray | None = None
    state: object = None

    @property
    def best(self):
        return self.members[0]

    def __len__(self) -> int:
        return len(self.members)


def hill_valley_clustering(X, values, f: Callable, budget: EvaluationBudget | None = None,
                           max_tries: int | None = None, volume: float | None = None) -> list[Cluster]:
    """Single-objective hill-valley clustering of points ``X`` with scalar ``values``.

    ``f`` is the (vectorized) objective used for test points, lower is better.
    Cluster members are point indices. ``volume`` defaults to the cube on the
    widest extent of ``X``, so flat directions cannot shrink the edge length.
    """
    X = np.atleast_2d(np.asarray(X, float))
    values = np.asarray(values, float)
    n, dim = X.shape
    if volume is None:
        volume = float(np.ptp(X, axis=0).max()) ** dim
        if not volume > 0.0:  # coincident points, or an extent that underflows
            volume = 1.0
    max_tries = dim + 1 if max_tries is None else max_tries

    def same(i, j):
        n_t = test_point_count(X[i], X[j], volume, n, dim)
        return hill_valley_test(X[i], X[j], n_t, f, budget, values[i], values[j])

    order = np.argsort(values, kind="stable")
    groups = nearest_better_clustering(X, order, same, max_tries)
    return [Cluster(g, X[g].mean(axis=0)) for g in groups]


def mo_hill_valley_clustering(X, F, problem: Problem, budget: EvaluationBudget | None,
                              tester: EdgeTester | None = None, max_tries: int | None = None) -> list[Cluster]:
    """Multi-objective hill-valley clustering.

    Clusters per objective, then intersects the clusterings. Each resulting
    cluster carries the test points of passed hill-valley tests whose two
    endpoints ended up in it.
    """
    X = np.atleast_2d(np.asarray(X, float))
    F = np.atleast_2d(np.asarray(F, float))
    n, dim = X.shape
    m = F.shape[1]
    tester = tester or EdgeTester(problem, budget)
    max_tries = dim + 1 if max_tries is None else max_tries
    passed: list[tuple[int, int, int]] = []

    labels = np.zeros((n, m), dtype=int)
    for k in range(m):
        def same(i, j, k=k):
            n_t = test_point_count(X[i], X[j], problem.volume, n, dim)
            ok = tester.test(X[i], X[j], F[i], F[j], n_t, objectives=(k,))
            if ok:
                passed.append((i, j, n_t))
            return ok

        order = np.argsort(F[:, k], kind="stable")
        for c, group in enumerate(nearest_better_clustering(X, order, same, max_tries)):
            labels[group, k] = c

    keys: dict[tuple, list[int]] = {}
    for i in range(n):
        keys.setdefault(tuple(labels[i]), []).append(i)
    cluster_of = {i: ci for ci, members in enumerate(keys.values()) for i in members}

    extra_X: dict[int, list] = {ci: [] for ci in range(len(keys))}
    extra_F: dict[int, list] = {ci: [] for ci in range(len(keys))}
    seen = set()
    for i, j, n_t in passed:
        edge = (min(i, j), max(i, j), n_t)
        if edge in seen or cluster_of[i] != cluster_of[j]:
            continue
        seen.add(edge)
        Xt, Ft = tester.evaluated_points(X[i], X[j], n_t)
        extra_X[cluster_of[i]].append(Xt)
        extra_F[cluster_of[i]].append(Ft)

    clusters = []
    for ci, members in enumerate(keys.values()):
        tx = np.vstack(extra_X[ci]) if extra_X[ci] else np.empty((0, dim))
        tf = np.vstack(extra_F[ci]) if extra_F[ci] else np.empty((0, m))
        clusters.append(Cluster(members, X[members].mean(axis=0), tx, tf))
    return clusters


# --- Bézier curves -----------------------------------------------------------

class BezierNicheTest:
    """Same-niche test for two curves: every pair of matching control points
    must share a valley in every objective.

    ``pop_size`` sets the expected edge length that determines the number of
    test points per control-point pair.
    """

    def __init__(self, problem: Problem, tester: EdgeTester, pop_size: int):
        self.problem = problem
        self.tester = tester
        self.pop_size = max(1, pop_size)

    def __call__(self, a: BezierSolution, b: BezierSolution) -> bool:
        if a is b:
            return True
        vol, dim = self.problem.volume, self.problem.dim
        for ca, cb, fa, fb in zip(a.polygon, b.polygon, a.control_objectives, b.control_objectives):
            n_t = test_point_count(ca, cb, vol, self.pop_size, dim)
            if not self.tester.test(ca, cb, fa, fb, n_t, objectives=(0, 1)):
                return False
        return True


def bezier_hill_valley_test(si: BezierSolution, sj: BezierSolution, problem: Problem,
                            budget: EvaluationBudget | None, pop_size: int,
                            tester: EdgeTester | None = None) -> bool:
    """Convenience wrapper around :class:`BezierNicheTest`."""
    return BezierNicheTest(problem, tester or EdgeTester(problem, budget), pop_size)(si, sj)


def bezier_hill_valley_clustering(solutions: Sequence[BezierSolution], same_niche: BezierNicheTest,
                                  max_tries: int | None = None) -> list[Cluster]:
    """Hill-valley clustering of curves under constraint-domination order.

    Ties in the ordering keep input order, so elites placed first lead
    clusters they tie with.
    """
    if not solutions:
        return []
    G = np.array([s.genotype for s in solutions])
    max_tries = same_niche.problem.dim + 1 if max_tries is None else max_tries
    order = sorted(range(len(solutions)), key=lambda i: sort_key(solutions[i]))
    groups = nearest_better_clustering(G, order, lambda i, j: same_niche(solutions[i], solutions[j]), max_tries)
    return [Cluster([solutions[i] for i in g], G[g].mean(axis=0)) for g in groups]


@dataclass
class ElitistArchive:
    """At most one elite curve per niche."""

    elites: list[BezierSolution] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.elites)

    def __iter__(self):
        return iter(self.elites)

    def contains(self, sol: BezierSolution) -> bool:
        return any(sol is e for e in self.elites)


def archive_update(archive: ElitistArchive, clusters: Sequence[Cluster],
                   same_niche: Callable[[BezierSolution, BezierSolution], bool]) -> ElitistArchive:
    """Offer each cluster's best curve to the archive.

    A challenger sharing a niche with one or more elites competes with them
    under constraint domination (then fitness); the incumbent wins ties and
    the losers leave the archive. Otherwise the challenger becomes a new elite.
    """
    for cluster in clusters:
        challenger = cluster.best
        if archive.contains(challenger):
            continue
        matches = [e for e in archive.elites if same_niche(challenger, e)]
        if not matches:
            archive.elites.append(challenger)
            continue
        winner = matches[0]
        for e in matches[1:]:
            if sort_key(e) < sort_key(winner):
                winner = e
        if sort_key(challenger) < sort_key(winner):
            winner = challenger
        kept = []
        for e in archive.elites:
            if any(e is m for m in matches):
                if e is matches[0]:
                    kept.append(winner)
            else:
                kept.append(e)
        archive.elites = kept
    return archive


def remove_taboo(clusters: Sequence[Cluster], elites: Sequence[BezierSolution]) -> list[Cluster]:
    """Drop clusters led by one of ``elites``."""
    return [c for c in clusters if not any(c.best is e for e in elites)]
