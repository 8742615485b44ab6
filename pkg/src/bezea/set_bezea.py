"""Search over sets of ``b`` Bézier curves at once.

A set solution is scored on two maximized objectives: the hypervolume of its
curves, each divided by the number of set members sharing its niche, and how
far apart the curves lie in decision space. A steering constraint that
tightens over the generations keeps every set close to the best summed
hypervolume seen so far.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from bezea.bezier import BezierSolution, evaluate_polygon
from bezea.gom import (
    DETERIORATION_PROB,
    LinkageModel,
    SearchState,
    accept_constraint_domination,
    build_upgma_tree,
    concatenate_linkage,
    gom_generation,
)
from bezea.mm_bezea import initialize_in_niches
from bezea.niching import BezierNicheTest, EdgeTester
from bezea.problems import BudgetExhausted, EvaluationBudget, Problem
from bezea.records import RunRecord, curve_record

STEER_START = 0.50
STEER_END = 0.99
STEER_RAMP = 50
DIVERSITY_MODES = ("one-minus-cos", "cosine-sim")


def steering_threshold(generation: int, start: float = STEER_START, end: float = STEER_END,
                       ramp: int = STEER_RAMP) -> float:
    """Fraction of the best summed hypervolume a set must reach, ramping linearly."""
    if generation < 0:
        raise ValueError(f"generation must be >= 0, got {generation}")
    return start + (end - start) * min(generation, ramp) / ramp


def apply_steering(f0: float, best_f0: float, threshold: float) -> float:
    """Constraint penalty for falling short of ``threshold * best_f0``."""
    return max(0.0, threshold * best_f0 - f0)


def diversity(polygons, center, mode: str = "one-minus-cos") -> float:
    """Pairwise cosine spread of the curves' control points around ``center``.

    ``one-minus-cos`` sums ``1 - cos`` over all pairs (larger means further
    apart); ``cosine-sim`` sums the plain similarities.
    """
    if mode not in DIVERSITY_MODES:
        raise ValueError(f"unknown diversity mode {mode!r}; choose from {DIVERSITY_MODES}")
    V = [np.asarray(c, float).ravel() - np.tile(center, len(c)) for c in polygons]
    total = 0.0
    for i in range(len(V)):
        for j in range(i + 1, len(V)):
            ni, nj = np.linalg.norm(V[i]), np.linalg.norm(V[j])
            if ni == 0.0 or nj == 0.0:
                cos = 1.0 if ni == nj else 0.0
            else:
                cos = float(np.clip(V[i] @ V[j] / (ni * nj), -1.0, 1.0))
            total += (1.0 - cos) if mode == "one-minus-cos" else cos
    return total


@dataclass
class BezierSetSolution:
    """``b`` evaluated curves plus the set-level scores.

    ``same_niche[i][j]`` records whether curves ``i`` and ``j`` were judged to
    share a niche; ``niche_counts[i]`` is one plus the number of such partners.
    """

    curves: list[BezierSolution]
    same_niche: np.ndarray
    f0: float
    f1: float
    constraint: float
    meta: dict = field(default_factory=dict)

    @property
    def b(self) -> int:
        return len(self.curves)

    @property
    def niche_counts(self) -> np.ndarray:
        return self.same_niche.sum(axis=1)

    @property
    def genotype(self) -> np.ndarray:
        return np.concatenate([c.genotype for c in self.curves])

    @property
    def objectives(self) -> tuple[float, float]:
        return (self.f0, self.f1)


class SetEvaluator:
    """Full and partial evaluation of set solutions for one problem."""

    def __init__(self, problem: Problem, budget: EvaluationBudget | None, p: int, q: int,
                 pop_size: int, tester: EdgeTester | None = None, diversity_mode: str = "one-minus-cos"):
        if diversity_mode not in DIVERSITY_MODES:
            raise ValueError(f"unknown diversity mode {diversity_mode!r}; choose from {DIVERSITY_MODES}")
        self.problem = problem
        self.budget = budget
        self.p = p
        self.q = q
        self.diversity_mode = diversity_mode
        self.tester = tester or EdgeTester(problem, budget)
        self.niche_test = BezierNicheTest(problem, self.tester, pop_size)
        self.radius = (problem.volume / max(1, pop_size)) ** (1.0 / problem.dim)

    def polygons(self, genotype) -> np.ndarray:
        return np.reshape(np.asarray(genotype, float), (-1, self.q, self.problem.dim))

    def curve(self, polygon) -> BezierSolution:
        return evaluate_polygon(polygon, self.problem, self.budget, self.p, kind="curve")

    def same(self, a: BezierSolution, b: BezierSolution) -> bool:
        """Curves within the niche radius share a niche; others take the curve niche test."""
        if float(np.max(np.linalg.norm(a.polygon - b.polygon, axis=1))) <= self.radius:
            return True
        return self.niche_test(a, b)

    def assemble(self, curves: list[BezierSolution]) -> BezierSetSolution:
        """Set solution from already evaluated curves; only niche relations are tested."""
        b = len(curves)
        same = np.eye(b, dtype=int)
        for i in range(b):
            for j in range(i + 1, b):
                same[i, j] = same[j, i] = int(self.same(curves[i], curves[j]))
        return self._assemble(curves, same)

    def _assemble(self, curves: list[BezierSolution], same: np.ndarray) -> BezierSetSolution:
        counts = same.sum(axis=1)
        f0 = float(sum(c.hv / n for c, n in zip(curves, counts)))
        f1 = diversity([c.polygon for c in curves], self.problem.midpoint, self.diversity_mode)
        constraint = float(sum(c.constraint for c in curves))
        return BezierSetSolution(curves, same, f0, f1, constraint)

    def evaluate(self, genotype) -> BezierSetSolution:
        """Evaluate every curve and every pairwise niche relation."""
        return self.assemble([self.curve(poly) for poly in self.polygons(genotype)])

    def partial(self, parent: BezierSetSolution, index: int, polygon) -> BezierSetSolution:
        """Re-evaluate only curve ``index`` with a new control polygon."""
        curves = list(parent.curves)
        curves[index] = self.curve(polygon)
        same = parent.same_niche.copy()
        for j in range(len(curves)):
            if j != index:
                same[index, j] = same[j, index] = int(self.same(curves[index], curves[j]))
        return self._assemble(curves, same)

    def __call__(self, genotype, parent: BezierSetSolution | None = None, group=None) -> BezierSetSolution:
        """GOM hook: partial evaluation when ``group`` lies inside a single curve."""
        if parent is None or group is None:
            return self.evaluate(genotype)
        width = self.q * self.problem.dim
        touched = np.unique(np.asarray(group) // width)
        polys = self.polygons(genotype)
        child = parent
        for i in touched:
            child = self.partial(child, int(i), polys[i])
        return child


def evaluate_set(genotype, problem: Problem, budget: EvaluationBudget | None, p: int = 7, q: int = 2,
                 pop_size: int = 76, diversity_mode: str = "one-minus-cos") -> BezierSetSolution:
    """Convenience wrapper for a one-off full evaluation."""
    return SetEvaluator(problem, budget, p, q, pop_size, diversity_mode=diversity_mode).evaluate(genotype)


def partial_evaluate(sol: BezierSetSolution, index: int, polygon, evaluator: SetEvaluator) -> BezierSetSolution:
    """Convenience wrapper around :meth:`SetEvaluator.partial`."""
    return evaluator.partial(sol, index, polygon)


def build_set_linkage(dim: int, q: int, b: int, genotypes) -> LinkageModel:
    """One UPGMA tree per curve over its per-variable groups, placed side by side."""
    G = np.atleast_2d(np.asarray(genotypes, float))
    width = q * dim
    trees = []
    for i in range(b):
        base = [i * width + np.arange(q) * dim + j for j in range(dim)]
        trees.append(build_upgma_tree(G, base))
    return concatenate_linkage(trees)


@dataclass
class SetBezEAConfig:
    b: int = 2
    pop_size: int = 76
    p: int = 7
    q: int = 2
    budget: int = 200_000
    diversity: str = "one-minus-cos"
    deterioration: float = DETERIORATION_PROB
    max_generations: int | None = None

    def __post_init__(self):
        if self.b < 1:
            raise ValueError(f"b must be >= 1, got {self.b}")
        if self.pop_size < 2:
            raise ValueError(f"pop_size must be >= 2, got {self.pop_size}")
        if self.p < 2 or self.q < 2:
            raise ValueError(f"p and q must be >= 2, got p={self.p}, q={self.q}")
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")
        if self.diversity not in DIVERSITY_MODES:
            raise ValueError(f"unknown diversity mode {self.diversity!r}; choose from {DIVERSITY_MODES}")


def _nondominated(sols: list[BezierSetSolution]) -> list[BezierSetSolution]:
    out = []
    for s in sols:
        a = np.array(s.objectives)
        if not any(np.all(np.array(o.objectives) >= a) and np.any(np.array(o.objectives) > a) for o in sols):
            out.append(s)
    return out


class SetBezEA:
    """Stateful runner; :func:`run` is the usual entry point."""

    def __init__(self, problem: Problem, config: SetBezEAConfig, seed: int = 0):
        self.problem = problem
        self.config = config
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.budget = EvaluationBudget(config.budget)
        self.evaluator = SetEvaluator(problem, self.budget, config.p, config.q, config.pop_size,
                                      diversity_mode=config.diversity)
        self.state = SearchState()
        self.best_f0 = 0.0
        self.best: BezierSetSolution | None = None
        self.trace: list[dict] = []

    def _penalty(self, sol: BezierSetSolution, threshold: float) -> float:
        return sol.constraint + apply_steering(sol.f0, self.best_f0, threshold)

    def _observe(self, sol: BezierSetSolution) -> None:
        """Keep the best set seen so far: lowest curve constraint, then highest f0."""
        if self.best is None or (sol.constraint, -sol.f0) < (self.best.constraint, -self.best.f0):
            self.best = sol

    def _initial(self) -> list[BezierSetSolution]:
        """Sets whose curves come from niche-aware initialization, one niche per curve where possible."""
        cfg = self.config
        clusters = initialize_in_niches(self.problem, cfg.pop_size * cfg.b, cfg.q, cfg.p,
                                        self.budget, self.rng, self.evaluator.tester)
        if not clusters:
            raise BudgetExhausted("no budget left for initialization")
        weights = np.array([len(c) for c in clusters], dtype=float)
        pop = []
        for _ in range(cfg.pop_size):
            picks = self.rng.choice(len(clusters), cfg.b, replace=len(clusters) < cfg.b, p=weights / weights.sum())
            curves = [clusters[k].members[self.rng.integers(len(clusters[k]))] for k in picks]
            pop.append(self.evaluator.assemble(curves))
            self._observe(pop[-1])
        return pop

    def run(self) -> tuple[list[BezierSetSolution], RunRecord]:
        cfg = self.config
        generation = 0
        try:
            population = self._initial()
        except BudgetExhausted:
            return [], self.record(0, [])
        self.best_f0 = max(s.f0 for s in population)
        while not self.budget.exhausted:
            if cfg.max_generations is not None and generation >= cfg.max_generations:
                break
            self.evaluator.tester.reset()
            threshold = steering_threshold(generation)
            rank = lambda s: (self._penalty(s, threshold), -s.f0)  # noqa: E731

            def accept(old, new):
                self._observe(new)
                return accept_constraint_domination((old.objectives, self._penalty(old, threshold)),
                                                    (new.objectives, self._penalty(new, threshold)))

            linkage = build_set_linkage(self.problem.dim, cfg.q, cfg.b, [s.genotype for s in population])
            population, stopped = gom_generation(population, linkage, self.state, self.evaluator, accept,
                                                 rank, self.rng, cfg.deterioration, elitist=True)
            generation += 1
            self.best_f0 = max(self.best_f0, max(s.f0 for s in population))
            lead = max(population, key=lambda s: s.f0)
            self.trace.append({
                "generation": generation,
                "evaluations": self.budget.used,
                "best_f0": float(self.best_f0),
                "f1_of_best": float(lead.f1),
                "threshold": float(threshold),
            })
            if stopped:
                break
        threshold = steering_threshold(generation)
        feasible = [s for s in population if self._penalty(s, threshold) == 0.0]
        return _nondominated(feasible or population), self.record(generation, population)

    def record(self, generations: int, population: list[BezierSetSolution]) -> RunRecord:
        best = self.best
        curves = []
        if best is not None:
            for i, c in enumerate(best.curves):
                partners = [j for j in range(best.b) if j != i and best.same_niche[i, j]]
                curves.append(curve_record(c, niche=i, same_niche_with=partners))
        return RunRecord(
            algorithm="set-bezea",
            problem=self.problem.name,
            dim=self.problem.dim,
            seed=int(self.seed),
            config=asdict(self.config),
            evaluations=int(self.budget.used),
            evaluations_by_kind={k: int(v) for k, v in sorted(self.budget.by_kind.items())},
            generations=generations,
            ref_point=[float(v) for v in self.problem.ref_point],
            trace=self.trace,
            curves=curves,
            extra={} if best is None else {"f0": float(best.f0), "f1": float(best.f1),
                                           "constraint": float(best.constraint)},
        )


def run(problem: Problem, config: SetBezEAConfig | None = None, seed: int = 0) -> tuple[list[BezierSetSolution], RunRecord]:
    """Run Set-BezEA; returns the final non-dominated sets and a record of the best set."""
    return SetBezEA(problem, config or SetBezEAConfig(), seed).run()
