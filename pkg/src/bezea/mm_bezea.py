"""Multi-modal search over Bézier curves with one elite curve per niche.

Each generation, every niche cluster runs one GOM generation on its curves,
with archived elites taking part as fixed donors. The union of all curves
and the elites is re-clustered with the curve niche test and the cluster
winners are offered to the elitist archive. Clusters that have converged are
retired; once none are left the search restarts from a fresh niche
initialization in which regions already led by an elite are taboo.
"""

import copy
from dataclasses import asdict, dataclass

import numpy as np

from bezea.bezier import BezierSolution, evaluate_polygon, sort_key
from bezea.gom import (
    DETERIORATION_PROB,
    SearchState,
    accept_constraint_domination,
    build_upgma_tree,
    gom_generation,
)
from bezea.niching import (
    BezierNicheTest,
    Cluster,
    EdgeTester,
    ElitistArchive,
    archive_update,
    bezier_hill_valley_clustering,
    mo_hill_valley_clustering,
    remove_taboo,
)
from bezea.problems import BudgetExhausted, EvaluationBudget, Problem
from bezea.records import RunRecord, curve_record

# a generation only starts when this many times the last generation's cost remains
GENERATION_RESERVE = 1.5
# a cluster whose non-elite spread falls below this fraction of the box is retired
CONVERGED_SPREAD = 1e-6


@dataclass
class MMBezEAConfig:
    pop_size: int = 76
    p: int = 7
    q: int = 2
    budget: int = 200_000
    restart_doubling: bool = False
    deterioration: float = DETERIORATION_PROB
    max_generations: int | None = None

    def __post_init__(self):
        if self.pop_size < 1:
            raise ValueError(f"pop_size must be >= 1, got {self.pop_size}")
        if self.p < 2 or self.q < 2:
            raise ValueError(f"p and q must be >= 2, got p={self.p}, q={self.q}")
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")


def proportional_split(total: int, sizes, minimum: int = 0) -> list[int]:
    """Integer shares of ``total`` proportional to ``sizes`` (largest remainder).

    Every share is at least ``minimum``, so the sum may exceed ``total`` when
    the minimums alone do.
    """
    sizes = np.asarray(sizes, dtype=float)
    if len(sizes) == 0:
        return []
    if sizes.sum() <= 0:
        sizes = np.ones_like(sizes)
    exact = total * sizes / sizes.sum()
    shares = np.floor(exact).astype(int)
    leftover = total - shares.sum()
    for i in np.argsort(-(exact - shares), kind="stable")[:leftover]:
        shares[i] += 1
    return [max(minimum, int(s)) for s in shares]


def _curve_cluster(curves: list[BezierSolution]) -> Cluster:
    curves = sorted(curves, key=sort_key)
    return Cluster(curves, np.mean([c.genotype for c in curves], axis=0))


def initialize_in_niches(problem: Problem, n: int, q: int, p: int, budget: EvaluationBudget,
                         rng: np.random.Generator, tester: EdgeTester | None = None) -> list[Cluster]:
    """Seed ``n`` curves whose control points each come from a single niche.

    ``q * n`` uniform samples are clustered with multi-objective hill-valley
    clustering (test points included), the pooled clusters are thinned
    proportionally back to ``q * n`` points, and every curve draws its ``q``
    control points from one cluster. Clusters with fewer than ``q`` points
    are drawn from with replacement. Stops early, returning what was built,
    when the budget runs out.
    """
    tester = tester or EdgeTester(problem, budget)
    try:
        X = problem.sample_uniform(q * n, rng)
        F = problem.evaluate(X, budget, kind="init")
    except BudgetExhausted:
        return []
    niches = mo_hill_valley_clustering(X, F, problem, budget, tester)
    pools = [np.vstack([X[c.members], c.test_points]) for c in niches]
    sizes = [len(pool) for pool in pools]
    if sum(sizes) > q * n:
        keep = proportional_split(q * n, sizes, minimum=1)
        pools = [pool[np.sort(rng.choice(len(pool), k, replace=False))] for pool, k in zip(pools, keep)]
    counts = proportional_split(n, [len(pool) for pool in pools])

    clusters = []
    try:
        for pool, count in zip(pools, counts):
            curves = []
            for _ in range(count):
                idx = rng.choice(len(pool), q, replace=len(pool) < q)
                curves.append(evaluate_polygon(pool[idx], problem, budget, p))
            if curves:
                clusters.append(_curve_cluster(curves))
    except BudgetExhausted:
        if curves:
            clusters.append(_curve_cluster(curves))
    return clusters


def cluster_registration(new_clusters: list[Cluster], prev_clusters: list[Cluster]) -> list[Cluster]:
    """Give each new cluster a copy of the state of the previous cluster with the nearest mean.

    Ties go to the lowest previous index; without previous clusters every
    state is fresh.
    """
    for c in new_clusters:
        if not prev_clusters:
            c.state = SearchState()
            continue
        d = [np.linalg.norm(c.mean - prev.mean) for prev in prev_clusters]
        source = prev_clusters[int(np.argmin(d))].state
        c.state = copy.deepcopy(source) if source is not None else SearchState()
    return new_clusters


def _variable_groups(q: int, dim: int, offset: int = 0) -> list[np.ndarray]:
    """Variable ``j`` of all ``q`` control points, for each ``j``."""
    return [offset + np.arange(q) * dim + j for j in range(dim)]


class MMBezEA:
    """Stateful runner; :func:`run` is the usual entry point."""

    def __init__(self, problem: Problem, config: MMBezEAConfig, seed: int = 0):
        self.problem = problem
        self.config = config
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.budget = EvaluationBudget(config.budget)
        self.tester = EdgeTester(problem, self.budget)
        self.same_niche = BezierNicheTest(problem, self.tester, config.pop_size)
        self.archive = ElitistArchive()
        self.trace: list[dict] = []
        self.pop_size = config.pop_size
        self.groups = _variable_groups(config.q, problem.dim)

    def _evaluate(self, genotype, parent=None, group=None) -> BezierSolution:
        return evaluate_polygon(np.reshape(genotype, (self.config.q, self.problem.dim)),
                                self.problem, self.budget, self.config.p)

    def _fresh(self, n: int) -> list[Cluster]:
        clusters = initialize_in_niches(self.problem, n, self.config.q, self.config.p,
                                        self.budget, self.rng, self.tester)
        for c in clusters:
            c.state = SearchState()
        return clusters

    def _is_elite(self, sol: BezierSolution) -> bool:
        return self.archive.contains(sol)

    def _resize(self, cluster: Cluster, target: int) -> Cluster:
        """Keep the elites of a cluster and bring its other members to ``target``.

        Surplus members are dropped worst first. Missing ones are Gaussian
        perturbations of the best non-elite member, scaled by the cluster's
        spread.
        """
        elites = [m for m in cluster.members if self._is_elite(m)]
        others = sorted((m for m in cluster.members if not self._is_elite(m)), key=sort_key)[:target]
        if len(others) < target:
            G = np.array([m.genotype for m in cluster.members])
            edge = (self.problem.volume / self.pop_size) ** (1.0 / self.problem.dim)
            sigma = G.std(axis=0) if len(G) > 1 else np.zeros(G.shape[1])
            sigma = np.where(sigma > 0, sigma, 0.1 * edge)
            anchor = (others or elites)[0].genotype
            while len(others) < target:
                others.append(self._evaluate(anchor + self.rng.normal(0.0, sigma)))
        cluster.members = sorted(elites + others, key=sort_key)
        cluster.mean = np.mean([m.genotype for m in cluster.members], axis=0)
        return cluster

    def _search(self, clusters: list[Cluster]) -> tuple[list[BezierSolution], bool]:
        """One GOM generation per cluster; returns the non-elite curves afterwards."""
        offspring: list[BezierSolution] = []
        for c in clusters:
            members = [m for m in c.members if not self._is_elite(m)]
            donors = [m for m in c.members if self._is_elite(m)]
            linkage = build_upgma_tree(np.array([m.genotype for m in c.members]), self.groups)
            new, stopped = gom_generation(
                members, linkage, c.state, self._evaluate,
                lambda old, new: accept_constraint_domination((old.fitness, old.constraint),
                                                              (new.fitness, new.constraint)),
                sort_key, self.rng, self.config.deterioration, elitist=True, donors=donors,
            )
            offspring.extend(new)
            if stopped:
                return offspring, True
        return offspring, False

    def _converged(self, cluster: Cluster) -> bool:
        G = np.array([m.genotype for m in cluster.members if not self._is_elite(m)])
        if len(G) == 0:
            return True
        span = float(np.min(self.problem.upper - self.problem.lower))
        return len(G) > 1 and float(G.std(axis=0).max()) < CONVERGED_SPREAD * span

    def _restart(self) -> list[Cluster]:
        """Fresh niche initialization; regions already owned by an elite are taboo."""
        if self.config.restart_doubling:
            self.pop_size *= 2
            self.same_niche.pop_size = self.pop_size
        fresh = self._fresh(self.pop_size)
        elites = list(self.archive.elites)
        if not elites:
            return fresh
        curves = elites + [m for c in fresh for m in c.members]
        clusters = remove_taboo(bezier_hill_valley_clustering(curves, self.same_niche), elites)
        for c in clusters:
            c.state = SearchState()
        return clusters

    def _next_population(self, clusters: list[Cluster]) -> list[Cluster]:
        """Retire converged clusters and share the population over the rest."""
        active = [c for c in clusters if not self._converged(c)]
        if not active:
            active = self._restart()
        sizes = [sum(not self._is_elite(m) for m in c.members) for c in active]
        shares = proportional_split(self.pop_size, sizes, minimum=2)
        return [self._resize(c, s) for c, s in zip(active, shares)]

    def run(self) -> tuple[ElitistArchive, RunRecord]:
        cfg = self.config
        clusters = self._fresh(self.pop_size)
        last_cost = 0
        generation = 0
        while not self.budget.exhausted and clusters:
            if cfg.max_generations is not None and generation >= cfg.max_generations:
                break
            if self.budget.remaining < GENERATION_RESERVE * last_cost:
                break
            start = self.budget.used
            self.tester.reset()
            elites = list(self.archive.elites)
            snapshot = list(self.archive.elites)
            try:
                offspring, stopped = self._search(clusters)
                if stopped:
                    break
                pool = elites + [o for o in offspring if not any(o is e for e in elites)]
                new_clusters = bezier_hill_valley_clustering(pool, self.same_niche)
                archive_update(self.archive, new_clusters, self.same_niche)
                if self.budget.exhausted:
                    # niche tests may have been cut short; keep the last trusted archive
                    self.archive.elites = snapshot
                    break
                clusters = self._next_population(cluster_registration(new_clusters, clusters))
            except BudgetExhausted:
                self.archive.elites = snapshot
                break
            generation += 1
            last_cost = self.budget.used - start
            self.trace.append({
                "generation": generation,
                "evaluations": self.budget.used,
                "elites": len(self.archive),
                "archive_hv": float(sum(e.hv for e in self.archive)),
                "archive_constraint": float(sum(e.constraint for e in self.archive)),
                "clusters": len(clusters),
                "pop_size": self.pop_size,
            })
        if not self.archive.elites:
            # no completed generation: report the initial cluster winners
            archive_update(self.archive, clusters, self.same_niche)
        return self.archive, self.record(generation)

    def record(self, generations: int) -> RunRecord:
        return RunRecord(
            algorithm="mm-bezea",
            problem=self.problem.name,
            dim=self.problem.dim,
            seed=int(self.seed),
            config=asdict(self.config),
            evaluations=int(self.budget.used),
            evaluations_by_kind={k: int(v) for k, v in sorted(self.budget.by_kind.items())},
            generations=generations,
            ref_point=[float(v) for v in self.problem.ref_point],
            trace=self.trace,
            curves=[curve_record(e, niche=i) for i, e in enumerate(self.archive)],
        )


def run(problem: Problem, config: MMBezEAConfig | None = None, seed: int = 0) -> tuple[ElitistArchive, RunRecord]:
    """Run MM-BezEA and return the elitist archive and its run record."""
    return MMBezEA(problem, config or MMBezEAConfig(), seed).run()
