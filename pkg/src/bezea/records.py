"""JSON-serializable record of one optimizer run."""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from bezea.bezier import BezierSolution


def curve_record(sol: BezierSolution, **extra) -> dict:
    """Plain-data description of one reported curve."""
    return {
        "control_points": sol.polygon.tolist(),
        "test_points": sol.test_points.tolist(),
        "objectives": sol.objective_values.tolist(),
        "nav_order": [int(i) for i in sol.nav_order],
        "hv": float(sol.hv),
        "constraint": float(sol.constraint),
        "fitness": float(sol.fitness),
        **extra,
    }


@dataclass
class RunRecord:
    """Everything a single run reports.

    ``curves`` holds one entry per reported approximation set (see
    :func:`curve_record`); ``trace`` one entry per generation.
    """

    algorithm: str
    problem: str
    dim: int
    seed: int
    config: dict
    evaluations: int = 0
    evaluations_by_kind: dict = field(default_factory=dict)
    generations: int = 0
    ref_point: list = field(default_factory=list)
    trace: list = field(default_factory=list)
    curves: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls(**json.loads(text))

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json())
        return path

    def approximation_sets(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per curve, decision vectors and objectives in navigational order."""
        out = []
        for c in self.curves:
            nav = c["nav_order"]
            out.append((np.asarray(c["test_points"])[nav], np.asarray(c["objectives"])[nav]))
        return out
