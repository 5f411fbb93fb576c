"""Partial labeling and anti-labeling.

When full labeling is out of reach, a probe ``|phi>`` with
``sum_{j in X} M_j |phi> = |phi>`` still guarantees that the recorded label
belongs to some effect in ``X``; a probe in the kernel of ``M_x`` guarantees
that it does not belong to ``M_x``.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import config
from .errors import CapExceededError, InconsistencyError, ScopeError
from .linalg import frobenius_distance, hermitian_eig

__all__ = [
    "AntiPlan",
    "EffectCluster",
    "PartialPlan",
    "anti_plan",
    "find_unit_subsets",
    "identical_effect_clusters",
    "intersect_conclusions",
    "minerror_anti",
    "minerror_partial",
    "partial_plan",
]


def find_unit_subsets(obs, tol=None):
    """Strict subsets ``X`` whose summed effect has eigenvalue 1.

    Returns ``[(frozenset, witness_vector), ...]``. Minimal subsets (containing
    no other returned subset) come first; each group is ordered by size, then
    lexicographically. An empty list means partial labeling does not apply.
    """
    tol = obs.tol if tol is None else tol
    if obs.n > config.SUBSET_SCAN_CAP:
        raise CapExceededError(f"subset scan capped at n={config.SUBSET_SCAN_CAP}, got {obs.n}")
    hits = []
    for size in range(1, obs.n):
        for subset in itertools.combinations(range(obs.n), size):
            value, vec = hermitian_eig(sum(obs.effects[j] for j in subset), tol).top()
            if value >= 1.0 - tol:
                hits.append((frozenset(subset), vec))
    minimal = [h for h in hits if not any(o[0] < h[0] for o in hits)]
    rest = [h for h in hits if any(o[0] < h[0] for o in hits)]
    return minimal + rest


def intersect_conclusions(subsets, same_label):
    """Combine per-shot conclusions ``effect in X_t``.

    If every shot recorded the same label, that label's effect lies in the
    intersection, which is returned as one set. Otherwise the per-shot sets are
    returned unmerged as a list.

    Raises:
        InconsistencyError: if the same label recurred but the sets share no
            effect.
    """
    subsets = [frozenset(s) for s in subsets]
    if not subsets:
        raise ScopeError("need at least one subset")
    if not same_label:
        return subsets
    common = frozenset.intersection(*subsets)
    if not common:
        raise InconsistencyError(
            f"same label recorded for disjoint candidate sets {[sorted(s) for s in subsets]}"
        )
    return common


@dataclass(frozen=True)
class EffectCluster:
    """Indices of equal effects, with the top eigenpair of their sum.

    When ``unit`` is set, measuring ``probe`` identifies the cluster's effect
    with certainty, and each member's top eigenvalue is ``1/size``.
    """

    members: frozenset
    probe: np.ndarray = field(repr=False)
    summed_top_eigenvalue: float
    member_top_eigenvalue: float

    @property
    def size(self):
        return len(self.members)

    def is_unit(self, tol=config.TOL):
        return self.summed_top_eigenvalue >= 1.0 - tol


def identical_effect_clusters(obs, tol=None):
    """Group effects that are equal within ``tol`` (Frobenius).

    Near-equality is not transitive; pairs within ``tol`` are merged with a
    union-find, so a chain of near-equal effects ends up in one cluster.
    """
    tol = obs.tol if tol is None else tol
    parent = list(range(obs.n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(obs.n), 2):
        if frobenius_distance(obs.effects[i], obs.effects[j]) <= tol:
            parent[max(find(i), find(j))] = min(find(i), find(j))

    groups = {}
    for i in range(obs.n):
        groups.setdefault(find(i), []).append(i)
    clusters = []
    for members in sorted(groups.values()):
        summed = sum(obs.effects[j] for j in members)
        value, vec = hermitian_eig(summed, tol).top()
        member_top = hermitian_eig(obs.effects[members[0]], tol).top()[0]
        clusters.append(
            EffectCluster(
                members=frozenset(members),
                probe=vec,
                summed_top_eigenvalue=value,
                member_top_eigenvalue=member_top,
            )
        )
    return clusters


def _check_subset(obs, subset):
    subset = frozenset(subset)
    if not subset or len(subset) >= obs.n or not all(0 <= j < obs.n for j in subset):
        raise ScopeError(f"need a non-empty strict subset of effect indices, got {sorted(subset)}")
    return subset


def minerror_partial(obs, subset):
    """Error of concluding ``effect in subset`` with the best probe:
    ``1 - lam_max(sum_{j in subset} M_j)``."""
    subset = _check_subset(obs, subset)
    value = hermitian_eig(sum(obs.effects[j] for j in subset), obs.tol).top()[0]
    return max(0.0, 1.0 - value)


@dataclass(frozen=True)
class PartialPlan:
    subsets: tuple = field(repr=False)
    clusters: tuple

    @property
    def cluster_probes(self):
        return tuple((c.members, c.probe) for c in self.clusters if c.is_unit())


def partial_plan(obs, tol=None):
    return PartialPlan(
        subsets=tuple(find_unit_subsets(obs, tol)),
        clusters=tuple(identical_effect_clusters(obs, tol)),
    )


@dataclass(frozen=True)
class AntiPlan:
    """``exclusions[i] = (x, phi)``: probing ``phi`` never yields effect ``x``."""

    exclusions: tuple = field(repr=False)

    @property
    def indices(self):
        return tuple(x for x, _ in self.exclusions)

    def __len__(self):
        return len(self.exclusions)


def anti_plan(obs, tol=None):
    """A kernel vector for every rank-deficient effect; full-rank ones are skipped."""
    tol = obs.tol if tol is None else tol
    out = []
    for k, m in enumerate(obs.effects):
        value, vec = hermitian_eig(m, tol).bottom()
        if value <= tol:
            out.append((k, vec))
    return AntiPlan(exclusions=tuple(out))


def minerror_anti(obs, x):
    """Error of excluding effect ``x`` with its bottom eigenvector: ``lam_min(M_x)``."""
    if not 0 <= x < obs.n:
        raise ScopeError(f"effect index {x} out of range")
    return max(0.0, hermitian_eig(obs.effects[x], obs.tol).bottom()[0])
