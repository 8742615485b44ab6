"""Seeded batch runs and the indicators computed from them."""

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from bezea import mm_bezea, set_bezea
from bezea.bench.stats import ALPHA, holm, rank_sum_pvalue
from bezea.bezier import interpolate_curve
from bezea.indicators import cover_rate, greedy_hss, hypervolume_2d, igdx, psp, smoothness
from bezea.problems import ConfigurationError, make_problem
from bezea.records import RunRecord

ALGORITHMS = ("mm-bezea", "set-bezea")
PROFILES = {"desk": {"budget": 20_000, "reps": 5}, "full": {"budget": 200_000, "reps": 31}}
INTERPOLATION_POINTS = 1000
# indicators where larger is better; the rest are minimized
MAXIMIZED = {"hv", "hv_niche_sum", "psp", "cover_rate", "smoothness"}
INDICATORS = ("hv", "hv_niche_sum", "igdx", "cover_rate", "psp", "smoothness", "n_sets")


@dataclass
class ExperimentConfig:
    problem: str
    dim: int = 2
    algorithm: str = "mm-bezea"
    budget: int = PROFILES["desk"]["budget"]
    reps: int = 31
    seed: int = 0
    pop_size: int = 76
    p: int = 7
    q: int = 2
    b: int = 2
    restart_doubling: bool = False
    diversity: str = "one-minus-cos"
    out_dir: str | None = None
    workers: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if self.reps < 1:
            raise ConfigurationError(f"reps must be >= 1, got {self.reps}")
        if self.budget < 1:
            raise ConfigurationError(f"budget must be >= 1, got {self.budget}")
        make_problem(self.problem, self.dim)
        self.algorithm_config()
        return self

    def algorithm_config(self):
        try:
            if self.algorithm == "mm-bezea":
                return mm_bezea.MMBezEAConfig(pop_size=self.pop_size, p=self.p, q=self.q, budget=self.budget,
                                              restart_doubling=self.restart_doubling)
            return set_bezea.SetBezEAConfig(b=self.b, pop_size=self.pop_size, p=self.p, q=self.q,
                                            budget=self.budget, diversity=self.diversity)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc

    @property
    def label(self) -> str:
        return self.algorithm if self.algorithm == "mm-bezea" else f"set-bezea-b{self.b}"


def interpolated_sets(record: RunRecord, n: int = INTERPOLATION_POINTS) -> list[np.ndarray]:
    """Dense points along each reported curve, over its navigational parameter range."""
    out = []
    for c in record.curves:
        nav = c["nav_order"]
        last = len(c["test_points"]) - 1
        out.append(interpolate_curve(c["control_points"], n, min(nav) / last, max(nav) / last))
    return out


def compute_indicators(record: RunRecord, refset: np.ndarray | None = None) -> dict[str, float]:
    """Indicator values of one run.

    ``hv`` is the hypervolume of the union of all reported navigational
    points after greedy subset selection down to one curve's worth of test
    points; ``hv_niche_sum`` adds up the per-curve hypervolumes instead.
    """
    ref = np.asarray(record.ref_point)
    sets = record.approximation_sets()
    if not sets:
        return {k: float("nan") for k in INDICATORS} | {"n_sets": 0.0}
    F = np.vstack([f for _, f in sets])
    k = int(record.config["p"])
    chosen = greedy_hss(F, k, ref)
    vals = {
        "hv": hypervolume_2d(F[chosen], ref),
        "hv_niche_sum": float(sum(hypervolume_2d(f, ref) for _, f in sets)),
        "smoothness": smoothness([x for x, _ in sets]),
        "n_sets": float(len(sets)),
    }
    if refset is not None:
        dense = np.vstack(interpolated_sets(record))
        vals |= {"igdx": igdx(dense, refset), "cover_rate": cover_rate(dense, refset), "psp": psp(dense, refset)}
    return vals


def run_single(config: ExperimentConfig, rep: int) -> RunRecord:
    """One seeded repetition, indicators attached under ``extra['indicators']``."""
    problem = make_problem(config.problem, config.dim)
    seed = config.seed + rep
    algo = mm_bezea if config.algorithm == "mm-bezea" else set_bezea
    _, record = algo.run(problem, config.algorithm_config(), seed)
    record.extra["label"] = config.label
    record.extra["rep"] = rep
    record.extra["indicators"] = compute_indicators(record, problem.reference_set())
    return record


@dataclass
class ResultTable:
    """Per (problem, algorithm, indicator): per-run values and their summary."""

    values: dict[str, list[float]] = field(default_factory=dict)
    ref_points: dict[str, list[float]] = field(default_factory=dict)
    significance: list[dict] = field(default_factory=list)

    @staticmethod
    def key(problem: str, algorithm: str, indicator: str) -> str:
        return f"{problem}|{algorithm}|{indicator}"

    def add(self, record: RunRecord) -> None:
        problem = f"{record.problem}-{record.dim}"
        self.ref_points[problem] = list(record.ref_point)
        for name, v in record.extra.get("indicators", {}).items():
            self.values.setdefault(self.key(problem, record.extra["label"], name), []).append(float(v))

    def merge(self, other: "ResultTable") -> "ResultTable":
        for k, v in other.values.items():
            self.values.setdefault(k, []).extend(v)
        self.ref_points.update(other.ref_points)
        return self

    def rows(self) -> list[dict]:
        out = []
        for k in sorted(self.values):
            problem, algorithm, indicator = k.split("|")
            v = np.asarray(self.values[k], dtype=float)
            out.append({
                "problem": problem, "algorithm": algorithm, "indicator": indicator,
                "mean": float(np.mean(v)), "std": float(np.std(v, ddof=1)) if len(v) > 1 else 0.0,
                "runs": len(v),
            })
        return out

    def mark_significance(self, alpha: float = ALPHA) -> list[dict]:
        """Compare the best algorithm of every (problem, indicator) row against the others."""
        groups: dict[tuple[str, str], dict[str, list[float]]] = {}
        for k, v in self.values.items():
            problem, algorithm, indicator = k.split("|")
            groups.setdefault((problem, indicator), {})[algorithm] = v
        self.significance = []
        for (problem, indicator), per_algo in sorted(groups.items()):
            if len(per_algo) < 2 or indicator == "n_sets":
                continue
            sign = 1.0 if indicator in MAXIMIZED else -1.0
            best = max(sorted(per_algo), key=lambda a: sign * np.nanmean(per_algo[a]))
            others = [a for a in sorted(per_algo) if a != best]
            pvals = [rank_sum_pvalue(per_algo[best], per_algo[a]) for a in others]
            for a, p, sig in zip(others, pvals, holm(pvals, alpha)):
                self.significance.append({"problem": problem, "indicator": indicator, "best": best,
                                          "other": a, "p": p, "significant": bool(sig)})
        return self.significance

    def to_dict(self) -> dict:
        return {"values": self.values, "ref_points": self.ref_points,
                "significance": self.significance, "summary": self.rows()}

    @classmethod
    def from_dict(cls, data: dict) -> "ResultTable":
        return cls({k: list(v) for k, v in data["values"].items()}, dict(data["ref_points"]),
                   list(data.get("significance", [])))


def run_experiment(config: ExperimentConfig) -> tuple[ResultTable, list[RunRecord]]:
    """All repetitions of one configuration (seeds ``seed .. seed + reps - 1``)."""
    config.validate()
    reps = range(config.reps)
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(run_single, itertools.repeat(config), reps))
    else:
        records = [run_single(config, r) for r in reps]
    table = ResultTable()
    for rec in records:
        table.add(rec)
    return table, records


def run_experiments(configs: list[ExperimentConfig]) -> tuple[ResultTable, list[RunRecord]]:
    """Several configurations into one table, with significance marks."""
    for c in configs:
        c.validate()
    table, records = ResultTable(), []
    for c in configs:
        t, r = run_experiment(c)
        table.merge(t)
        records.extend(r)
    table.mark_significance()
    return table, records


SCALABILITY_DIMS = (2, 3, 5, 10, 20, 30, 50, 100)


def niche_hvs(record: RunRecord) -> list[float]:
    return [float(c["hv"]) for c in record.curves]


def scalability_suite(dims=SCALABILITY_DIMS, bs=(2, 3, 4), budget_per_dim: int = 100_000, reps: int = 5,
                      seed: int = 0, workers: int = 1) -> tuple[list[dict], list[RunRecord]]:
    """OmniTest runs over growing dimensions with the budget scaled by dimension.

    Each summary row averages, over repetitions, the minimum, mean and
    maximum per-niche hypervolume of one algorithm at one dimension, plus the
    number of reported sets and their smoothness.
    """
    base = ExperimentConfig("OmniTest", reps=reps, seed=seed, workers=workers)
    configs = []
    for dim in dims:
        configs.append(replace(base, dim=dim, algorithm="mm-bezea", budget=budget_per_dim * dim))
        configs.extend(replace(base, dim=dim, algorithm="set-bezea", b=b, budget=budget_per_dim * dim) for b in bs)
    rows, records = [], []
    for cfg in configs:
        cfg.validate()
        problem = make_problem(cfg.problem, cfg.dim)
        runs = []
        for r in range(cfg.reps):
            algo = mm_bezea if cfg.algorithm == "mm-bezea" else set_bezea
            _, rec = algo.run(problem, cfg.algorithm_config(), cfg.seed + r)
            rec.extra["label"] = cfg.label
            rec.extra["rep"] = r
            runs.append(rec)
        hv = [niche_hvs(rec) or [0.0] for rec in runs]
        rows.append({
            "algorithm": cfg.label, "dim": cfg.dim, "budget": cfg.budget, "reps": cfg.reps,
            "hv_min": float(np.mean([min(h) for h in hv])),
            "hv_mean": float(np.mean([np.mean(h) for h in hv])),
            "hv_max": float(np.mean([max(h) for h in hv])),
            "n_sets": float(np.mean([len(rec.curves) for rec in runs])),
            "smoothness": float(np.mean([smoothness([x for x, _ in rec.approximation_sets()]) for rec in runs])),
        })
        records.extend(runs)
    return rows, records

