"""Gene-pool optimal mixing with Gaussian group sampling.

A linkage model lists groups of genotype indices. For every individual and
every group, new values for that group are drawn from a Gaussian fitted to the
better half of the population and kept when the result is accepted. A small
probability of keeping a rejected proposal lets the search escape plateaus.
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np

from bezea.problems import BudgetExhausted

DETERIORATION_PROB = 0.05
SHRINK = 0.9
MAX_MULTIPLIER = 10.0
# share of individuals whose samples are pushed along the last mean shift, and how far
SHIFT_FRACTION = 0.35
SHIFT_FACTOR = 2.0


@dataclass
class LinkageModel:
    """Groups of genotype indices, leaves first, each merge appended after its children.

    ``tree`` holds one ``(left, right)`` pair of node indices per merge; node
    ``n_leaves + k`` is the union produced by merge ``k``.
    """

    groups: list[np.ndarray]
    tree: list[tuple[int, int]] = field(default_factory=list)
    n_leaves: int = 0

    def __post_init__(self):
        if not self.n_leaves:
            self.n_leaves = len(self.groups) - len(self.tree)

    @property
    def leaves(self) -> list[np.ndarray]:
        return self.groups[: self.n_leaves]

    def __len__(self) -> int:
        return len(self.groups)


def _abs_correlation(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, float)
    sd = X.std(axis=0)
    live = sd > 1e-300
    R = np.zeros((X.shape[1], X.shape[1]))
    if live.sum() >= 1:
        Z = (X[:, live] - X[:, live].mean(axis=0)) / sd[live]
        R[np.ix_(live, live)] = np.abs(Z.T @ Z / len(X))
    return R


def build_upgma_tree(genotypes, base_groups: Sequence[Sequence[int]]) -> LinkageModel:
    """Average-linkage tree over ``base_groups`` using absolute sample correlation.

    Similarity between two base groups is the mean absolute correlation over
    all index pairs across them. Variables without variance have similarity 0.
    Ties merge the pair with the lowest node indices first.
    """
    base = [np.asarray(g, dtype=int) for g in base_groups]
    if len(base) == 1:
        return LinkageModel(base, [], 1)
    R = _abs_correlation(np.atleast_2d(genotypes))
    k = len(base)
    S = np.array([[R[np.ix_(a, b)].mean() for b in base] for a in base])
    groups = list(base)
    members = {i: [i] for i in range(k)}  # node -> base groups below it
    active = list(range(k))
    tree = []
    while len(active) > 1:
        best, pair = -np.inf, None
        for x in range(len(active)):
            for y in range(x + 1, len(active)):
                u, v = active[x], active[y]
                s = S[np.ix_(members[u], members[v])].mean()
                if s > best + 1e-12:
                    best, pair = s, (u, v)
        u, v = pair
        node = len(groups)
        groups.append(np.concatenate([groups[u], groups[v]]))
        members[node] = members[u] + members[v]
        tree.append((u, v))
        active = [a for a in active if a not in pair] + [node]
    return LinkageModel(groups, tree, k)


def concatenate_linkage(models: Sequence[LinkageModel]) -> LinkageModel:
    """Side-by-side union of independent trees, without a common root."""
    groups, tree, leaves = [], [], []
    # leaves of every model first, then the merges with remapped node ids
    offsets = np.cumsum([0] + [m.n_leaves for m in models])
    n_leaves = int(offsets[-1])
    remap = []
    next_node = n_leaves
    for m, off in zip(models, offsets):
        mapping = {i: int(off) + i for i in range(m.n_leaves)}
        for k in range(len(m.tree)):
            mapping[m.n_leaves + k] = next_node
            next_node += 1
        remap.append(mapping)
        leaves.extend(m.leaves)
    groups = list(leaves)
    for m, mapping in zip(models, remap):
        for k, (u, v) in enumerate(m.tree):
            groups.append(m.groups[m.n_leaves + k])
            tree.append((mapping[u], mapping[v]))
    return LinkageModel(groups, tree, n_leaves)


@dataclass
class SearchState:
    """Adaptive part of a search distribution that survives re-clustering."""

    multiplier: float = 1.0
    generations: int = 0
    mean: np.ndarray | None = None

    def adapt(self, improved: bool) -> None:
        if improved:
            self.multiplier = 1.0 if self.multiplier < 1.0 else min(MAX_MULTIPLIER, self.multiplier / SHRINK)
        else:
            self.multiplier *= SHRINK
        self.generations += 1


class GroupGaussian:
    """Maximum-likelihood Gaussian per linkage group."""

    def __init__(self, selected: np.ndarray, groups: Sequence[np.ndarray], floor: float = 1e-12):
        selected = np.atleast_2d(np.asarray(selected, float))
        self.groups = list(groups)
        self.means, self.chols = [], []
        for g in self.groups:
            Y = selected[:, g]
            mu = Y.mean(axis=0)
            C = np.atleast_2d(np.cov(Y, rowvar=False, bias=True)) if len(Y) > 1 else np.zeros((len(g), len(g)))
            C = C + floor * np.eye(len(g)) * max(1.0, float(np.trace(C)))
            self.means.append(mu)
            self.chols.append(np.linalg.cholesky(C))

    def sample(self, k: int, rng: np.random.Generator, multiplier: float = 1.0) -> np.ndarray:
        z = rng.standard_normal(len(self.groups[k]))
        return self.means[k] + np.sqrt(multiplier) * (self.chols[k] @ z)


def accept_constraint_domination(old: tuple[Any, float], new: tuple[Any, float]) -> bool:
    """Whether ``new`` may replace ``old``; objectives are maximized.

    Lower constraint wins. At equal constraint a scalar must not decrease, and
    an objective vector must not be dominated by the old one.
    """
    (f_old, c_old), (f_new, c_new) = old, new
    if c_new != c_old:
        return c_new < c_old
    a, b = np.atleast_1d(np.asarray(f_old, float)), np.atleast_1d(np.asarray(f_new, float))
    if a.size == 1:
        return bool(b[0] >= a[0])
    return not (np.all(a >= b) and np.any(a > b))


class GomOutcome(NamedTuple):
    individual: Any
    accepted: bool
    stopped: bool


def gom_step(parent, group, values, evaluate: Callable, accept: Callable, rng,
             deterioration: float = DETERIORATION_PROB) -> GomOutcome:
    """Try ``values`` at ``group`` positions of ``parent.genotype``.

    ``evaluate(genotype, parent, group)`` builds the new individual, so it may
    reuse whatever of ``parent`` the change leaves intact;
    ``accept(parent, child)`` decides. A rejected child is still kept with probability
    ``deterioration``. On budget exhaustion the parent comes back unchanged
    with ``stopped`` set.
    """
    group = np.asarray(group, dtype=int)
    genotype = np.array(parent.genotype, dtype=float, copy=True)
    genotype[group] = values
    try:
        child = evaluate(genotype, parent, group)
    except BudgetExhausted:
        return GomOutcome(parent, False, True)
    if accept(parent, child):
        return GomOutcome(child, True, False)
    if deterioration > 0.0 and rng.random() < deterioration:
        return GomOutcome(child, False, False)
    return GomOutcome(parent, False, False)


def gom_generation(population: list, linkage: LinkageModel, state: SearchState, evaluate: Callable,
                   accept: Callable, rank_key: Callable, rng: np.random.Generator,
                   deterioration: float = DETERIORATION_PROB, elitist: bool = True,
                   donors: Sequence = ()) -> tuple[list, bool]:
    """One GOM generation over ``population``.

    The Gaussian is fitted to the better half (by ``rank_key``, ascending) of
    the population together with ``donors``, which are never modified. Some
    samples are moved along the shift of the selection mean since the previous
    generation. With ``elitist`` the current best never takes a deteriorating
    step.

    Returns:
        The new population and whether the run should stop (budget spent).
    """
    if not population:
        return population, False
    pool = list(population) + list(donors)
    ranked = sorted(pool, key=rank_key)
    top = ranked[: max(2, (len(ranked) + 1) // 2)]
    selected = np.array([ind.genotype for ind in top])
    model = GroupGaussian(selected, linkage.groups)
    mean = selected.mean(axis=0)
    shift = np.zeros_like(mean)
    if state.mean is not None and state.mean.shape == mean.shape:
        shift = SHIFT_FACTOR * state.multiplier * (mean - state.mean)
    state.mean = mean
    shifted = rng.random(len(population)) < SHIFT_FRACTION
    best_before = rank_key(ranked[0])
    best_idx = min(range(len(population)), key=lambda i: rank_key(population[i]))

    new_pop = list(population)
    improved, stopped = False, False
    for i in range(len(new_pop)):
        current = new_pop[i]
        for k in rng.permutation(len(linkage.groups)):
            values = model.sample(int(k), rng, state.multiplier)
            if shifted[i] and i != best_idx:
                values = values + shift[linkage.groups[k]]
            p_det = 0.0 if (elitist and i == best_idx) else deterioration
            out = gom_step(current, linkage.groups[k], values, evaluate, accept, rng, p_det)
            current = out.individual
            if out.stopped:
                stopped = True
                break
        new_pop[i] = current
        if stopped:
            break
    if min(rank_key(ind) for ind in new_pop) < best_before:
        improved = True
    state.adapt(improved)
    return new_pop, stopped
