"""Acceptance criteria, each at its stated tolerance.

Every test reports one ``PASS``/``FAIL criterion N`` line; the lines are also
collected into the terminal summary.
"""

import itertools
import time

import numpy as np
from acceptance_log import report
from oracles import greedy_by_enumeration, hv_monte_carlo

from bezea import mm_bezea, set_bezea
from bezea.bench.experiment import ExperimentConfig, ResultTable, interpolated_sets, niche_hvs, run_experiment
from bezea.gom import LinkageModel, SearchState, accept_constraint_domination, gom_generation
from bezea.indicators import greedy_hss, hypervolume_2d, igdx
from bezea.niching import BezierNicheTest, EdgeTester, hill_valley_clustering, mo_hill_valley_clustering
from bezea.problems import Problem, make_problem, mindist_segments
from bezea.set_bezea import SetEvaluator, steering_threshold

DESK_BUDGET = 20_000
DESK_REPS = 5
SEEDS = range(DESK_REPS)


# --- 1: smoothness -------------------------------------------------------------------

def test_criterion_1_smoothness_exact():
    start = time.perf_counter()
    bad = []
    for name, dim in [("MinDist", 2), ("OmniTest", 2), ("TwoOnOne", 2), ("SymPart1", 2)]:
        for algo in ("mm-bezea", "set-bezea"):
            table, _ = run_experiment(ExperimentConfig(name, dim, algo, budget=DESK_BUDGET, reps=DESK_REPS))
            label = "mm-bezea" if algo == "mm-bezea" else "set-bezea-b2"
            values = table.values[ResultTable.key(f"{name}-{dim}", label, "smoothness")]
            if values != [1.0] * DESK_REPS:
                bad.append((name, algo, values))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 300.0
    assert report(1, ok, f"smoothness exactly 1.0 in 40/40 desk runs={not bad}, wall time {elapsed:.0f}s < 300s"), bad


# --- 2: niche recovery -----------------------------------------------------------------

def test_criterion_2_mindist_niche_recovery():
    P = make_problem("MinDist")
    t = np.linspace(0.0, 1.0, 1000)[:, None]
    segments = [a + t * (b - a) for a, b in mindist_segments(2)]
    per_run = []
    for seed in SEEDS:
        _, record = mm_bezea.run(P, mm_bezea.MMBezEAConfig(budget=DESK_BUDGET), seed)
        curves = interpolated_sets(record, 1000)
        matched = {k for k, seg in enumerate(segments) if any(igdx(c, seg) < 0.05 for c in curves)}
        per_run.append(len(matched))
    good = sum(n >= 2 for n in per_run)
    assert report(2, good >= 4, f"runs recovering >=2 analytic segments at IGDX<0.05: {good}/5 "
                                f"(segments matched per run {per_run})")


# --- 3: set cardinality and distinctness --------------------------------------------------

def test_criterion_3_set_cardinality_and_distinctness():
    summary, ok = [], True
    for name, dim in [("MinDist", 2), ("OmniTest", 2), ("OmniTest", 3), ("OmniTest", 5)]:
        P = make_problem(name, dim)
        cfg = set_bezea.SetBezEAConfig(b=2, budget=DESK_BUDGET)
        niche_test = BezierNicheTest(P, EdgeTester(P, None), cfg.pop_size)
        exact, distinct = 0, 0
        for seed in SEEDS:
            runner = set_bezea.SetBezEA(P, cfg, seed)
            _, record = runner.run()
            reported = [np.asarray(c["control_points"]) for c in record.curves]
            exact += len(reported) == 2 and all(np.array_equal(r, c.polygon)
                                                for r, c in zip(reported, runner.best.curves))
            a, b = runner.best.curves
            distinct += not niche_test(a, b)
        ok &= exact == DESK_REPS and distinct >= 4
        summary.append(f"{name}-{dim}: b curves {exact}/5, distinct {distinct}/5")
    assert report(3, ok, "; ".join(summary))


# --- 4: steering schedule ------------------------------------------------------------------

def test_criterion_4_steering_schedule():
    expected = [0.5 + 0.49 * g / 50 for g in range(51)]
    got = [steering_threshold(g) for g in range(51)]
    ok = (steering_threshold(0) == 0.5 and steering_threshold(50) == 0.99
          and all(abs(a - b) <= 1e-15 for a, b in zip(got, expected))
          and all(steering_threshold(g) == 0.99 for g in range(50, 200)))
    assert report(4, ok, "threshold(0)=0.50, threshold(50)=0.99, linear between, flat after")


# --- 5: HV and gHSS oracles ----------------------------------------------------------------

def test_criterion_5_hv_and_ghss_oracles():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 21))
        F = rng.uniform(0.0, 1.0, size=(n, 2))
        ref = np.array([1.1, 1.1])
        exact = hypervolume_2d(F, ref)
        est, _ = hv_monte_carlo(F, ref, F.min(axis=0), 1_000_000, rng)
        worst = max(worst, abs(est - exact) / exact)
    hv_ok = worst <= 1e-2

    # every front drawn from a 3x3 grid of candidate points, sizes 1..8, k = 1..3
    grid = [np.array(p, float) for p in itertools.product(range(3), repeat=2)]
    ref = [3.0, 3.0]
    checked, mismatches = 0, 0
    for n in range(1, 9):
        for combo in itertools.combinations(range(9), n):
            F = np.array([grid[i] for i in combo])
            for k in range(1, 4):
                got, want = greedy_hss(F, k, ref), greedy_by_enumeration(F, k, ref)
                if k >= n:
                    got, want = sorted(got), sorted(want)
                checked += 1
                mismatches += got != want
    ok = hv_ok and mismatches == 0
    assert report(5, ok, f"HV vs 1e6-sample MC worst relative error {worst:.2e} <= 1e-2; "
                         f"gHSS equals enumeration on {checked - mismatches}/{checked} fronts")


# --- 6: HVT / HVC ------------------------------------------------------------------------

def _two_basins(X):
    X = np.asarray(X, float)
    c = np.zeros(X.shape[1])
    c[0] = 2.0
    return np.minimum(((X - c) ** 2).sum(axis=1), ((X + c) ** 2).sum(axis=1))


def _sphere(X):
    return (np.asarray(X, float) ** 2).sum(axis=1)


def _grid(lo, hi, n, dim=2):
    axes = [np.linspace(lo, hi, n)] * dim
    return np.array(np.meshgrid(*axes)).reshape(dim, -1).T


def test_criterion_6_hill_valley_clustering():
    cases = []
    for dim in (1, 2, 3):
        X = _grid(-3, 3, 7 if dim < 3 else 5, dim)
        cases.append(("convex", dim, len(hill_valley_clustering(X, _sphere(X), _sphere)), 1))
        Y = X[np.abs(X[:, 0]) >= 1.0]
        cases.append(("two-basin", dim, len(hill_valley_clustering(Y, _two_basins(Y), _two_basins)), 2))

    def fn_convex(X):
        return np.column_stack([_sphere(X - 0.5), _sphere(X + 0.5)])

    def fn_basins(X):
        return np.column_stack([_two_basins(X), _two_basins(X - 0.25)])

    lo, hi = np.full(2, -3.0), np.full(2, 3.0)
    X = _grid(-3, 3, 7)
    convex = Problem("Convex", 2, lo, hi, fn_convex, None, 1)
    cases.append(("mo-convex", 2, len(mo_hill_valley_clustering(X, convex.fn(X), convex, None)), 1))
    Y = X[np.abs(X[:, 0]) >= 1.0]
    basins = Problem("Basins", 2, lo, hi, fn_basins, None, 2)
    cases.append(("mo-two-basin", 2, len(mo_hill_valley_clustering(Y, basins.fn(Y), basins, None)), 2))
    ok = all(got == want for *_, got, want in cases)
    detail = ", ".join(f"{kind} d={d}: {got}" for kind, d, got, _ in cases)
    assert report(6, ok, f"clusters found ({detail})")


# --- 7: partial evaluation ------------------------------------------------------------------

def test_criterion_7_partial_evaluation():
    rng = np.random.default_rng(7)
    worst, relation_mismatch = 0.0, 0
    problems = [make_problem("MinDist"), make_problem("OmniTest", 3), make_problem("SymPart1")]
    for trial in range(1000):
        P = problems[trial % len(problems)]
        q = 2 + trial % 2
        b = 2 + trial % 3
        ev = SetEvaluator(P, None, 7, q, 76)
        parent = ev.evaluate(P.sample_uniform(b * q, rng).ravel())
        i = int(rng.integers(b))
        scale = 0.05 * (P.upper - P.lower)
        poly = P.clip(parent.curves[i].polygon + rng.normal(0.0, 1.0, (q, P.dim)) * scale)
        child = ev.partial(parent, i, poly)
        genotype = parent.genotype.copy()
        width = q * P.dim
        genotype[i * width:(i + 1) * width] = poly.ravel()
        full = ev.evaluate(genotype)
        worst = max(worst, abs(child.f0 - full.f0), abs(child.f1 - full.f1),
                    abs(child.constraint - full.constraint))
        relation_mismatch += not np.array_equal(child.same_niche, full.same_niche)
    ok = worst <= 1e-9 and relation_mismatch == 0
    assert report(7, ok, f"1000 single-curve mutations, max |partial - full| = {worst:.1e} <= 1e-9")


# --- 8: GOM contract -----------------------------------------------------------------------

class _Ind:
    def __init__(self, genotype):
        self.genotype = np.asarray(genotype, float)
        self.fitness = -float(np.sum(self.genotype ** 2))


def _evaluate(genotype, parent=None, group=None):
    return _Ind(genotype)


def test_criterion_8_gom_contract():
    monotone = True
    for seed in range(5):
        rng = np.random.default_rng(seed)
        pop = [_Ind(rng.uniform(-3, 3, 4)) for _ in range(12)]
        linkage = LinkageModel([np.array([i]) for i in range(4)] + [np.arange(4)])
        state, bests = SearchState(), []
        for _ in range(100):
            pop, _ = gom_generation(pop, linkage, state, _evaluate,
                                    lambda o, n: accept_constraint_domination((o.fitness, 0.0), (n.fitness, 0.0)),
                                    lambda s: -s.fitness, rng, deterioration=0.0, elitist=False)
            bests.append(max(s.fitness for s in pop))
        monotone &= all(b >= a for a, b in zip(bests, bests[1:]))

    rng = np.random.default_rng(9)
    pop = [_Ind(rng.uniform(-1, 1, 3)) for _ in range(8)]
    linkage = LinkageModel([np.array([0]), np.array([1, 2]), np.arange(3)])
    proposals = []

    def recording(genotype, parent=None, group=None):
        child = _Ind(genotype)
        proposals.append(child)
        return child

    new_pop, _ = gom_generation(pop, linkage, SearchState(), recording, lambda o, n: False,
                                lambda s: -s.fitness, rng, deterioration=1.0, elitist=False)
    g = len(linkage.groups)
    kept = len(proposals) == g * len(pop) and all(ind is proposals[(i + 1) * g - 1] for i, ind in enumerate(new_pop))
    assert report(8, monotone and kept, f"best fitness monotone over 100 generations x5 seeds={monotone}; "
                                        f"probability 1 keeps every proposal={kept}")


# --- 9: determinism ------------------------------------------------------------------------

def test_criterion_9_determinism(tmp_path):
    same = []
    for name, algo, cfg in [("MinDist", mm_bezea, mm_bezea.MMBezEAConfig(budget=5000)),
                            ("OmniTest", set_bezea, set_bezea.SetBezEAConfig(budget=5000))]:
        P = make_problem(name)
        paths = []
        for k in range(2):
            _, record = algo.run(P, cfg, seed=42)
            paths.append(record.save(tmp_path / f"{name}_{k}.json"))
        same.append(paths[0].read_bytes() == paths[1].read_bytes())
    assert report(9, all(same), "same seed and config give byte-identical serialized records for both algorithms")


# --- 10: scalability trend ---------------------------------------------------------------

def test_criterion_10_scalability_worst_niche():
    lines, wins_at_5 = [], 0
    for dim in (2, 3, 5):
        P = make_problem("OmniTest", dim)
        budget = 10_000 * dim
        mm_min, set_min = [], []
        for seed in SEEDS:
            _, rm = mm_bezea.run(P, mm_bezea.MMBezEAConfig(budget=budget), seed)
            _, rs = set_bezea.run(P, set_bezea.SetBezEAConfig(b=2, budget=budget), seed)
            mm_min.append(min(niche_hvs(rm) or [0.0]))
            set_min.append(min(niche_hvs(rs) or [0.0]))
        if dim == 5:
            wins_at_5 = sum(s > m for s, m in zip(set_min, mm_min))
        lines.append(f"l={dim}: set {np.mean(set_min):.3g} vs mm {np.mean(mm_min):.3g}")
    assert report(10, wins_at_5 >= 3, f"min per-niche HV, Set-BezEA ahead at l=5 in {wins_at_5}/5 seeds "
                                      f"({'; '.join(lines)})")
