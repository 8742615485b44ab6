"""Bézier-curve parameterized approximation sets.

A curve is given by ``q >= 2`` ordered control points in decision space. Its
solution set consists of ``p`` test points at evenly spread parameter values,
which are evaluated and reduced to a navigational order: the non-dominated
points walked from the best-f0 end of the curve toward the best-f1 end.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from bezea.indicators import (
    distance_to_reference_box,
    hypervolume_2d,
    uncrowded_distance,
)


def _check_polygon(points) -> np.ndarray:
    C = np.asarray(points, dtype=float)
    if C.ndim != 2 or C.shape[0] < 2:
        raise ValueError(f"a control polygon needs at least 2 points, got shape {C.shape}")
    return C


def bernstein(t, q: int) -> np.ndarray:
    """Bernstein basis of degree ``q - 1`` evaluated at ``t`` (scalar or array)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    i = np.arange(q)
    coef = np.array([comb(q - 1, k) for k in i], dtype=float)
    W = coef * np.power(t[:, None], i) * np.power(1.0 - t[:, None], q - 1 - i)
    # pin the endpoints so B(0) = c_1 and B(1) = c_q hold bit-exactly
    W[t == 0.0] = np.eye(q)[0]
    W[t == 1.0] = np.eye(q)[-1]
    return W


@lru_cache(maxsize=64)
def sampling_matrix(p: int, q: int) -> np.ndarray:
    """(p, q) weights mapping control points to the p evenly spread test points."""
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    W = bernstein(np.arange(p) / (p - 1), q)
    W.setflags(write=False)
    return W


def evaluate_bezier(points, t: float) -> np.ndarray:
    """Point on the curve at parameter ``t`` in [0, 1]."""
    C = _check_polygon(points)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    return bernstein(t, len(C))[0] @ C


def sample_solution_set(points, p: int) -> np.ndarray:
    """The ``p`` test points at t = i / (p - 1), shape (p, dim)."""
    C = _check_polygon(points)
    return sampling_matrix(p, len(C)) @ C


def interpolate_curve(points, n: int = 1000, t_start: float = 0.0, t_end: float = 1.0) -> np.ndarray:
    """``n`` curve points evenly spread in t over ``[t_start, t_end]``."""
    C = _check_polygon(points)
    return bernstein(np.linspace(t_start, t_end, n), len(C)) @ C


def canonicalize_orientation(points, control_objectives) -> np.ndarray:
    """Reverse the control points unless f0(c_1) <= f0(c_q). Ties keep the order."""
    C = _check_polygon(points)
    F = np.asarray(control_objectives, dtype=float)
    if F[0, 0] > F[-1, 0]:
        return C[::-1].copy()
    return C


def navigational_order(objective_values) -> list[int]:
    """Navigational order of a curve's test points.

    The curve is scanned from its best-f0 end. A point is kept only if it
    strictly improves f1 over every point kept so far; kept points it
    dominates are dropped. The result is strictly ascending in f0 and strictly
    descending in f1. Exact duplicates collapse onto the first occurrence.
    """
    F = np.asarray(objective_values, dtype=float)
    p = len(F)
    scan = range(p) if F[0, 0] <= F[-1, 0] else range(p - 1, -1, -1)
    kept: list[int] = []
    for i in scan:
        if kept and not F[i, 1] < F[kept[-1], 1]:
            continue
        while kept and F[kept[-1], 0] >= F[i, 0]:
            kept.pop()
        kept.append(i)
    return kept


def constraint_value(objective_values, nav_order) -> float:
    """Penalty for curve points that fall outside the navigational order.

    Every excluded point contributes its uncrowded distance to the front
    formed by the navigational order plus the objective-space distance to
    each of its neighbours along the curve.
    """
    F = np.asarray(objective_values, dtype=float)
    p = len(F)
    if len(nav_order) == p:
        return 0.0
    front = F[list(nav_order)]
    inside = set(nav_order)
    total = 0.0
    for i in range(p):
        if i in inside:
            continue
        total += uncrowded_distance(F[i], front)
        if i > 0:
            total += float(np.linalg.norm(F[i] - F[i - 1]))
        if i < p - 1:
            total += float(np.linalg.norm(F[i] - F[i + 1]))
    return total


@dataclass
class BezierSolution:
    """One evaluated Bézier curve.

    ``polygon`` is stored in canonical orientation; ``test_points`` and
    ``objective_values`` follow the same orientation.
    """

    polygon: np.ndarray
    test_points: np.ndarray
    objective_values: np.ndarray
    control_objectives: np.ndarray
    nav_order: list[int]
    hv: float
    constraint: float
    fitness: float
    meta: dict = field(default_factory=dict)

    @property
    def genotype(self) -> np.ndarray:
        return self.polygon.ravel()

    @property
    def q(self) -> int:
        return len(self.polygon)

    @property
    def p(self) -> int:
        return len(self.test_points)

    def approximation_set(self) -> tuple[np.ndarray, np.ndarray]:
        """Decision vectors and objective pairs of the navigational order."""
        return self.test_points[self.nav_order], self.objective_values[self.nav_order]

    def nav_interval(self) -> tuple[float, float]:
        """Parameter range covered by the navigational order."""
        lo, hi = min(self.nav_order), max(self.nav_order)
        return lo / (self.p - 1), hi / (self.p - 1)

    def copy(self) -> "BezierSolution":
        return BezierSolution(
            self.polygon.copy(),
            self.test_points.copy(),
            self.objective_values.copy(),
            self.control_objectives.copy(),
            list(self.nav_order),
            self.hv,
            self.constraint,
            self.fitness,
            dict(self.meta),
        )


def sort_key(sol: BezierSolution) -> tuple[float, float]:
    """Constraint-domination ordering: lower constraint, then higher fitness."""
    return (sol.constraint, -sol.fitness)


def is_better(a: BezierSolution, b: BezierSolution) -> bool:
    """True when ``a`` strictly precedes ``b`` under constraint domination."""
    return sort_key(a) < sort_key(b)


def curve_fitness(front_objectives, ref) -> tuple[float, float]:
    """Hypervolume of a navigational front and its uncrowded variant.

    The uncrowded value subtracts the mean distance of the front's points to
    the reference box, which gives curves lying entirely outside the box a
    gradient toward it.
    """
    hv = hypervolume_2d(front_objectives, ref)
    outside = [distance_to_reference_box(f, ref) for f in front_objectives]
    return hv, hv - float(np.mean(outside))


def evaluate_polygon(points, problem, budget, p: int, ref=None, kind: str = "curve") -> BezierSolution:
    """Sample, evaluate and score one control polygon.

    Control points are clamped to the problem bounds first. Costs ``p``
    evaluations plus one per interior control point.
    """
    C = problem.clip(_check_polygon(points))
    ref = problem.ref_point if ref is None else ref
    q = len(C)
    X = sample_solution_set(C, p)
    if q > 2:
        F_all = problem.evaluate(np.vstack([X, C[1:-1]]), budget, kind=kind)
        F, F_inner = F_all[:p], F_all[p:]
    else:
        F = problem.evaluate(X, budget, kind=kind)
        F_inner = np.empty((0, 2))
    control_F = np.vstack([F[:1], F_inner, F[-1:]])
    if control_F[0, 0] > control_F[-1, 0]:
        C, X, F, control_F = C[::-1].copy(), X[::-1].copy(), F[::-1].copy(), control_F[::-1].copy()
    nav = navigational_order(F)
    hv, fit = curve_fitness(F[nav], ref)
    return BezierSolution(C, X, F, control_F, nav, hv, constraint_value(F, nav), fit)
