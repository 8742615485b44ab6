"""Bi-objective multi-modal benchmark problems.

Every evaluator is vectorized: it maps an (n, dim) array to (n, 2) objective
values, both minimized. Evaluations are charged to an :class:`EvaluationBudget`.
"""

import csv
import itertools
from collections import Counter
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

REFSET_SIZE = 5000
REF_MARGIN = 0.1


class BudgetExhausted(Exception):
    """Raised when an evaluation is requested after the budget is used up."""


class ConfigurationError(ValueError):
    """Unknown problem name or unsupported dimension."""


@dataclass
class EvaluationBudget:
    """Counts objective evaluations against a limit.

    A batch is admitted whenever ``used < limit``, so ``used`` can overshoot
    the limit by at most one batch minus one.
    """

    limit: int
    used: int = 0
    by_kind: Counter = field(default_factory=Counter)

    @property
    def remaining(self) -> int:
        return max(0, self.limit - self.used)

    @property
    def exhausted(self) -> bool:
        return self.used >= self.limit

    def charge(self, n: int, kind: str = "curve") -> None:
        if self.used >= self.limit:
            raise BudgetExhausted(f"budget of {self.limit} evaluations used up")
        self.used += n
        self.by_kind[kind] += n


@dataclass
class Problem:
    name: str
    dim: int
    lower: np.ndarray
    upper: np.ndarray
    fn: Callable[[np.ndarray], np.ndarray]
    refset_fn: Callable[[int], tuple[np.ndarray, np.ndarray]]
    niche_count: int
    meta: dict = field(default_factory=dict)

    def evaluate(self, X, budget: EvaluationBudget | None = None, kind: str = "curve") -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X2 = np.atleast_2d(X)
        if budget is not None:
            budget.charge(len(X2), kind)
        F = self.fn(X2)
        return F[0] if single else F

    def clip(self, X) -> np.ndarray:
        return np.clip(X, self.lower, self.upper)

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(n, self.dim))

    def reference_set(self, n: int = REFSET_SIZE) -> np.ndarray:
        """``n`` decision vectors spread over all Pareto sets."""
        return self.reference_set_labeled(n)[0]

    def reference_set_labeled(self, n: int = REFSET_SIZE) -> tuple[np.ndarray, np.ndarray]:
        """Reference decision vectors and the Pareto-set (niche) id of each."""
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        return self.refset_fn(n)

    @cached_property
    def ref_point(self) -> np.ndarray:
        """Worst reference-front objective plus a 10% range margin, per objective."""
        F = self.fn(self.reference_set(REFSET_SIZE))
        lo, hi = F.min(axis=0), F.max(axis=0)
        return hi + REF_MARGIN * (hi - lo)


def allocate(n: int, k: int) -> list[int]:
    """Split ``n`` points over ``k`` Pareto sets.

    Even split when every set can get two points (both ends); otherwise as
    many sets as possible receive their two endpoints.
    """
    if n >= 2 * k:
        base, extra = divmod(n, k)
        return [base + (i < extra) for i in range(k)]
    counts = [0] * k
    for i in range(n // 2):
        counts[i] = 2
    if n % 2:
        counts[n // 2] += 1
    return counts


def _segments_refset(segments, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Sample straight segments (start, end) with the allocation above."""
    pts, labels = [], []
    for sid, ((a, b), c) in enumerate(zip(segments, allocate(n, len(segments)))):
        if c == 0:
            continue
        s = np.linspace(0.0, 1.0, c) if c > 1 else np.array([0.5])
        a, b = np.asarray(a, float), np.asarray(b, float)
        pts.append(a + s[:, None] * (b - a))
        labels.append(np.full(c, sid))
    return np.vstack(pts), np.concatenate(labels)


def _polyline_refset(polylines, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Sample dense polylines evenly by arc length, allocated per polyline."""
    pts, labels = [], []
    for sid, (line, c) in enumerate(zip(polylines, allocate(n, len(polylines)))):
        if c == 0:
            continue
        seg = np.linalg.norm(np.diff(line, axis=0), axis=1)
        arc = np.concatenate([[0.0], np.cumsum(seg)])
        s = np.linspace(0.0, arc[-1], c) if c > 1 else np.array([0.5 * arc[-1]])
        pts.append(np.column_stack([np.interp(s, arc, line[:, j]) for j in range(line.shape[1])]))
        labels.append(np.full(c, sid))
    return np.vstack(pts), np.concatenate(labels)


# --- MinDist ---------------------------------------------------------------

_MINDIST_F0 = np.array([[1.0, -1.0], [-1.0, 1.0]])
_MINDIST_F1 = np.array([[1.0, 1.0], [-1.0, -1.0]])


def _mindist_centers(dim: int) -> tuple[np.ndarray, np.ndarray]:
    pad = np.zeros((2, dim - 2))
    return np.hstack([_MINDIST_F0, pad]), np.hstack([_MINDIST_F1, pad])


def mindist(X: np.ndarray) -> np.ndarray:
    a, b = _mindist_centers(X.shape[1])
    d0 = np.linalg.norm(X[:, None, :] - a[None], axis=2).min(axis=1)
    d1 = np.linalg.norm(X[:, None, :] - b[None], axis=2).min(axis=1)
    return np.column_stack([d0, d1])


def mindist_segments(dim: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """The four optimal segments joining each f0 centre to each f1 centre."""
    a, b = _mindist_centers(dim)
    return [(a[i], b[j]) for i in range(2) for j in range(2)]


def _make_mindist(dim: int) -> Problem:
    segs = mindist_segments(dim)
    return Problem(
        "MinDist", dim, np.full(dim, -2.0), np.full(dim, 2.0), mindist,
        lambda n: _segments_refset(segs, n), niche_count=len(segs),
    )


# --- OmniTest --------------------------------------------------------------

def omni_test(X: np.ndarray) -> np.ndarray:
    return np.column_stack([np.sin(np.pi * X).sum(axis=1), np.cos(np.pi * X).sum(axis=1)])


def _omni_refset(dim: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    # each Pareto set: x_i = 2 m_i + 1 + s with a shared s in [0, 0.5]
    k = 3 ** dim
    counts = allocate(n, min(k, n))
    pts, labels = [], []
    modes = itertools.product(range(3), repeat=dim)
    for sid, (m, c) in enumerate(zip(modes, counts)):
        if c == 0:
            continue
        base = 2.0 * np.asarray(m, float) + 1.0
        s = np.linspace(0.0, 0.5, c) if c > 1 else np.array([0.25])
        pts.append(base + s[:, None])
        labels.append(np.full(c, sid))
    return np.vstack(pts), np.concatenate(labels)


def _make_omni(dim: int) -> Problem:
    return Problem(
        "OmniTest", dim, np.zeros(dim), np.full(dim, 6.0), omni_test,
        lambda n: _omni_refset(dim, n), niche_count=3 ** dim,
    )


# --- Two-on-One ------------------------------------------------------------

def two_on_one(X: np.ndarray) -> np.ndarray:
    x0, x1 = X[:, 0], X[:, 1]
    f0 = x0**4 + x1**4 - x0**2 + x1**2 - 10.0 * x0 * x1 + 0.25 * x0 + 20.0
    f1 = (x0 - 1.0) ** 2 + x1**2
    return np.column_stack([f0, f1])


TWO_ON_ONE_WEIGHTS = 4001


def _trace_weighted_sum(start, weights) -> np.ndarray:
    """Stationary points of (1 - w) f0 + w f1 along ``weights`` by warm-started Newton steps."""
    x = np.asarray(start, float)
    out = []
    for w in weights:
        for _ in range(50):
            x0, x1 = x
            grad = np.array([
                (1 - w) * (4 * x0**3 - 2 * x0 - 10 * x1 + 0.25) + w * 2 * (x0 - 1),
                (1 - w) * (4 * x1**3 + 2 * x1 - 10 * x0) + w * 2 * x1,
            ])
            hess = np.array([
                [(1 - w) * (12 * x0**2 - 2) + 2 * w, -10 * (1 - w)],
                [-10 * (1 - w), (1 - w) * (12 * x1**2 + 2) + 2 * w],
            ])
            step = np.linalg.solve(hess, grad)
            x = x - step
            if np.max(np.abs(step)) < 1e-13:
                break
        out.append(x.copy())
    return np.array(out)


_TWO_ON_ONE_PS: list[np.ndarray] = []


def two_on_one_pareto_sets() -> list[np.ndarray]:
    """Dense polylines approximating both Pareto-set pieces (cached)."""
    if _TWO_ON_ONE_PS:
        return _TWO_ON_ONE_PS
    w = np.linspace(0.0, 1.0, TWO_ON_ONE_WEIGHTS)
    pieces = [_trace_weighted_sum(s, w) for s in ((1.7, 1.7), (-1.7, -1.7))]
    allF = np.vstack([two_on_one(pc) for pc in pieces])
    # staircase of the union: best f1 reachable at or below each f0
    order = np.argsort(allF[:, 0], kind="stable")
    stair_f0 = allF[order, 0]
    stair_f1 = np.minimum.accumulate(allF[order, 1])
    for pc in pieces:
        F = two_on_one(pc)
        idx = np.searchsorted(stair_f0, F[:, 0], side="right") - 1
        keep = pc[F[:, 1] <= stair_f1[idx] + 1e-12]
        # the warm start can jump basins: keep the run belonging to the start basin
        keep = keep[np.sign(keep[:, 0] + keep[:, 1]) == np.sign(pc[0, 0] + pc[0, 1])]
        _TWO_ON_ONE_PS.append(keep)
    return _TWO_ON_ONE_PS


def _make_two_on_one(dim: int) -> Problem:
    return Problem(
        "TwoOnOne", 2, np.full(2, -3.0), np.full(2, 3.0), two_on_one,
        lambda n: _polyline_refset(two_on_one_pareto_sets(), n), niche_count=2,
        meta={"pareto_set_source": f"weighted-sum trace, {TWO_ON_ONE_WEIGHTS} weights per basin"},
    )


# --- SYM-PART --------------------------------------------------------------

_SP_A, _SP_C2, _SP_B2 = 1.0, 10.0, 18.0


def _sympart_tiles(X: np.ndarray) -> np.ndarray:
    x0, x1 = X[:, 0], X[:, 1]
    t0 = np.sign(x0) * np.ceil((np.abs(x0) - (_SP_A + _SP_C2 / 2)) / _SP_C2)
    t1 = np.sign(x1) * np.ceil((np.abs(x1) - _SP_B2 / 2) / _SP_B2)
    t0 = np.sign(t0) * np.minimum(np.abs(t0), 1.0)
    t1 = np.sign(t1) * np.minimum(np.abs(t1), 1.0)
    y0 = x0 - t0 * _SP_C2
    y1 = x1 - t1 * _SP_B2
    return np.column_stack([(y0 + _SP_A) ** 2 + y1**2, (y0 - _SP_A) ** 2 + y1**2])


def _rotation(omega: float) -> np.ndarray:
    c, s = np.cos(omega), np.sin(omega)
    return np.array([[c, -s], [s, c]])


def sympart1(X: np.ndarray) -> np.ndarray:
    return _sympart_tiles(X)


def sympart2(X: np.ndarray) -> np.ndarray:
    return _sympart_tiles(X @ _rotation(np.pi / 4).T)


def _sympart_segments() -> list[tuple[np.ndarray, np.ndarray]]:
    return [
        (np.array([t0 * _SP_C2 - _SP_A, t1 * _SP_B2]), np.array([t0 * _SP_C2 + _SP_A, t1 * _SP_B2]))
        for t0 in (-1, 0, 1)
        for t1 in (-1, 0, 1)
    ]


def _sympart2_refset(n: int) -> tuple[np.ndarray, np.ndarray]:
    # rotate the tile segments back and keep the parts inside the box
    R = _rotation(np.pi / 4)
    lines = []
    for a, b in _sympart_segments():
        s = np.linspace(0.0, 1.0, 2001)[:, None]
        line = (a + s * (b - a)) @ R
        line = line[np.all(np.abs(line) <= 20.0, axis=1)]
        if len(line) > 1:
            lines.append(line)
    return _polyline_refset(lines, n)


def _make_sympart(variant: int) -> Problem:
    lo, hi = np.full(2, -20.0), np.full(2, 20.0)
    if variant == 1:
        segs = _sympart_segments()
        return Problem("SymPart1", 2, lo, hi, sympart1, lambda n: _segments_refset(segs, n), niche_count=9)
    return Problem("SymPart2", 2, lo, hi, sympart2, _sympart2_refset, niche_count=9)


# --- MMF -------------------------------------------------------------------

def mmf1(X: np.ndarray) -> np.ndarray:
    d = np.abs(X[:, 0] - 2.0)
    f1 = 1.0 - np.sqrt(d) + 2.0 * (X[:, 1] - np.sin(6.0 * np.pi * d + np.pi)) ** 2
    return np.column_stack([d, f1])


def mmf2(X: np.ndarray) -> np.ndarray:
    x0, x1 = X[:, 0], X[:, 1]
    y = np.where(x1 <= 1.0, x1 - np.sqrt(x0), x1 - 1.0 - np.sqrt(x0))
    f1 = 1.0 - np.sqrt(x0) + 2.0 * (4.0 * y**2 - 2.0 * np.cos(20.0 * y * np.pi / np.sqrt(2.0)) + 2.0)
    return np.column_stack([x0, f1])


_MMF_NP = 2


def _mmf14_g(x):
    return 2.0 - np.sin(_MMF_NP * np.pi * x) ** 2


def _mmf15_g(x):
    return 2.0 - np.exp(-2.0 * np.log(2.0) * ((x - 0.1) / 0.8) ** 2) * np.sin(_MMF_NP * np.pi * x) ** 2


def _mmf_concave(g_fn):
    def fn(X: np.ndarray) -> np.ndarray:
        g = g_fn(X[:, 1])
        return np.column_stack([(1 + g) * np.cos(0.5 * np.pi * X[:, 0]), (1 + g) * np.sin(0.5 * np.pi * X[:, 0])])
    return fn


mmf14 = _mmf_concave(_mmf14_g)
mmf15 = _mmf_concave(_mmf15_g)


def _mmf_concave_refset(g_fn, n: int) -> tuple[np.ndarray, np.ndarray]:
    segs = []
    for k in range(_MMF_NP):
        lo, hi = k / _MMF_NP, (k + 1) / _MMF_NP
        x2 = minimize_scalar(g_fn, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}).x
        segs.append((np.array([0.0, x2]), np.array([1.0, x2])))
    return _segments_refset(segs, n)


def _mmf1_refset(n: int) -> tuple[np.ndarray, np.ndarray]:
    lines = []
    for side in (-1.0, 1.0):
        d = np.linspace(0.0, 1.0, 4001)
        lines.append(np.column_stack([2.0 + side * d, np.sin(6.0 * np.pi * d + np.pi)]))
    X, labels = _polyline_refset(lines, n)
    X[:, 1] = np.sin(6.0 * np.pi * np.abs(X[:, 0] - 2.0) + np.pi)
    return X, labels


def _mmf2_refset(n: int) -> tuple[np.ndarray, np.ndarray]:
    x0 = np.linspace(0.0, 1.0, 4001)
    # x = (0, 1) evaluates under the lower branch, so the upper set starts just after it
    upper = x0[1:]
    X, labels = _polyline_refset([np.column_stack([x0, np.sqrt(x0)]), np.column_stack([upper, np.sqrt(upper) + 1.0])], n)
    # chords of the square root sag near 0; put every point back on its curve
    X[:, 1] = np.sqrt(X[:, 0]) + labels
    return X, labels


def _make_mmf(name: str) -> Problem:
    if name == "MMF1":
        return Problem(name, 2, np.array([1.0, -1.0]), np.array([3.0, 1.0]), mmf1, _mmf1_refset, niche_count=2)
    if name == "MMF2":
        return Problem(name, 2, np.zeros(2), np.array([1.0, 2.0]), mmf2, _mmf2_refset, niche_count=2)
    g_fn, fn = (_mmf14_g, mmf14) if name == "MMF14" else (_mmf15_g, mmf15)
    return Problem(
        name, 2, np.zeros(2), np.ones(2), fn, lambda n: _mmf_concave_refset(g_fn, n), niche_count=_MMF_NP
    )


# --- registry --------------------------------------------------------------

_SCALABLE = {"MinDist": _make_mindist, "OmniTest": _make_omni}
_FIXED_2D = {
    "TwoOnOne": _make_two_on_one,
    "SymPart1": lambda dim: _make_sympart(1),
    "SymPart2": lambda dim: _make_sympart(2),
    "MMF1": lambda dim: _make_mmf("MMF1"),
    "MMF2": lambda dim: _make_mmf("MMF2"),
    "MMF14": lambda dim: _make_mmf("MMF14"),
    "MMF15": lambda dim: _make_mmf("MMF15"),
}
PROBLEM_NAMES = tuple(_SCALABLE) + tuple(_FIXED_2D)


def make_problem(name: str, dim: int = 2) -> Problem:
    """Build a configured problem. Raises :class:`ConfigurationError` on bad input."""
    key = {k.lower(): k for k in PROBLEM_NAMES}.get(name.lower())
    if key is None:
        raise ConfigurationError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}")
    if key in _SCALABLE:
        if dim < 2:
            raise ConfigurationError(f"{key} needs dim >= 2, got {dim}")
        return _SCALABLE[key](dim)
    if dim != 2:
        raise ConfigurationError(f"{key} is defined for dim = 2 only, got {dim}")
    return _FIXED_2D[key](dim)


def write_reference_set(problem: Problem, path, n: int = REFSET_SIZE) -> Path:
    """Write the reference set as CSV: problem, dim, niche id, then coordinates."""
    X, labels = problem.reference_set_labeled(n)
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["problem", "dim", "niche"] + [f"x{j}" for j in range(problem.dim)])
        for x, lab in zip(X, labels):
            w.writerow([problem.name, problem.dim, int(lab)] + [repr(float(v)) for v in x])
    return path
