"""Result files: per-run CSVs, a summary JSON and plot-ready data."""

import csv
import json
from collections.abc import Sequence
from pathlib import Path

from bezea.bench.experiment import ResultTable
from bezea.records import RunRecord

RESULTS_HEADER = ["problem", "algorithm", "indicator", "run", "value", "ref_f0", "ref_f1"]


def _num(x: float) -> str:
    return repr(float(x))


def _run_stem(rec: RunRecord) -> str:
    label = rec.extra.get("label", rec.algorithm)
    return f"{label}_{rec.problem}-{rec.dim}_seed{rec.seed}"


def _open(path: Path, mode: str = "w"):
    try:
        return path.open(mode, newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def write_results_csv(table: ResultTable, path: Path) -> Path:
    """One row per (problem, algorithm, indicator, run)."""
    with _open(path) as fh:
        w = csv.writer(fh)
        w.writerow(RESULTS_HEADER)
        for key in sorted(table.values):
            problem, algorithm, indicator = key.split("|")
            ref = table.ref_points.get(problem, [float("nan")] * 2)
            for run, v in enumerate(table.values[key]):
                w.writerow([problem, algorithm, indicator, run, _num(v), _num(ref[0]), _num(ref[1])])
    return path


def write_front_csv(rec: RunRecord, path: Path) -> Path:
    """Navigational-order points of every reported set: objectives and decision vectors."""
    with _open(path) as fh:
        w = csv.writer(fh)
        w.writerow(["set", "order", "f0", "f1"] + [f"x{j}" for j in range(rec.dim)] + ["ref_f0", "ref_f1"])
        for s, (X, F) in enumerate(rec.approximation_sets()):
            for k, (x, f) in enumerate(zip(X, F)):
                w.writerow([s, k, _num(f[0]), _num(f[1])] + [_num(v) for v in x]
                           + [_num(rec.ref_point[0]), _num(rec.ref_point[1])])
    return path


def write_parallel_coordinates(rec: RunRecord, path: Path) -> Path:
    """Long-format rows (set, solution, variable, value) for parallel-coordinate plots."""
    with _open(path) as fh:
        w = csv.writer(fh)
        w.writerow(["set", "solution", "variable", "value"])
        for s, (X, _) in enumerate(rec.approximation_sets()):
            for k, x in enumerate(X):
                for j, v in enumerate(x):
                    w.writerow([s, k, j, _num(v)])
    return path


def emit_outputs(table: ResultTable, records: Sequence[RunRecord], out_dir, extra: dict | None = None) -> list[Path]:
    """Write ``results.csv``, ``summary.json`` and per-run files under ``out_dir``."""
    out = Path(out_dir)
    try:
        (out / "runs").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out / 'runs'}: {exc.strerror}") from exc
    written = [write_results_csv(table, out / "results.csv")]
    summary = table.to_dict() | (extra or {})
    path = out / "summary.json"
    with _open(path) as fh:
        json.dump(summary, fh, sort_keys=True, indent=1)
    written.append(path)
    for rec in records:
        stem = _run_stem(rec)
        written.append(rec.save(out / "runs" / f"{stem}.json"))
        written.append(write_front_csv(rec, out / "runs" / f"{stem}_front.csv"))
        written.append(write_parallel_coordinates(rec, out / "runs" / f"{stem}_parallel.csv"))
    return written


def load_summary(path) -> ResultTable:
    with Path(path).open() as fh:
        return ResultTable.from_dict(json.load(fh))
