import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from povm_labeler import channel_output, computational_basis, uniform_observable, validate
from povm_labeler.errors import CapExceededError, InconsistencyError, ScopeError
from povm_labeler.partial import (
    anti_plan,
    find_unit_subsets,
    identical_effect_clusters,
    intersect_conclusions,
    minerror_anti,
    minerror_partial,
    partial_plan,
)
from povm_labeler.simulator import run_partial_experiment

from conftest import random_obs
from test_linalg import eig2

SZ = np.diag([1.0, -1.0])


@pytest.fixture
def full_rank_three():
    # all strict subset sums stay below norm 1
    return validate([0.3 * np.eye(2) + 0.1 * SZ, 0.3 * np.eye(2) - 0.1 * SZ, 0.4 * np.eye(2)])


class TestUnitSubsets:
    def test_split_zero(self, split_zero):
        found = {s: v for s, v in find_unit_subsets(split_zero)}
        assert frozenset({0, 1}) in found and frozenset({2}) in found
        np.testing.assert_allclose(np.abs(found[frozenset({0, 1})]), [1, 0], atol=1e-15)
        np.testing.assert_allclose(np.abs(found[frozenset({2})]), [0, 1], atol=1e-15)

    def test_minimal_first(self, split_zero):
        sets = [sorted(s) for s, _ in find_unit_subsets(split_zero)]
        assert sets == [[2], [0, 1], [0, 2], [1, 2]]

    def test_empty(self, full_rank_three):
        assert find_unit_subsets(full_rank_three) == []
        # independent scan of every strict subset with closed-form eigenvalues
        for size in (1, 2):
            for subset in itertools.combinations(range(3), size):
                m = sum(full_rank_three.effects[j] for j in subset)
                assert max(eig2(m)) < 1 - 1e-3

    def test_qutrit_singletons(self, qutrit):
        sets = [s for s, _ in find_unit_subsets(qutrit)]
        assert sets[:3] == [frozenset({0}), frozenset({1}), frozenset({2})]

    def test_cap(self):
        with pytest.raises(CapExceededError):
            find_unit_subsets(uniform_observable(13))

    @given(st.integers(0, 2**32 - 1), st.integers(3, 4))
    @settings(max_examples=20, deadline=None)
    def test_minerror_zero_iff_listed(self, seed, n):
        rng = np.random.default_rng(seed)
        obs = random_obs(seed, n, 3, rank=1) if rng.random() < 0.5 else computational_basis(n)
        listed = {s for s, _ in find_unit_subsets(obs)}
        for size in range(1, n):
            for subset in itertools.combinations(range(n), size):
                zero = minerror_partial(obs, subset) <= obs.tol
                assert zero == (frozenset(subset) in listed)

    def test_probes_certify(self, split_zero):
        # outcome distribution for each witness stays inside X
        for subset, v in find_unit_subsets(split_zero):
            p = channel_output(split_zero, v)
            assert sum(p[j] for j in subset) >= 1 - 1e-9


class TestIntersect:
    def test_same_label(self):
        assert intersect_conclusions([{0, 1}, {1, 2}], True) == frozenset({1})

    def test_different_labels(self):
        assert intersect_conclusions([{0, 1}, {1, 2}], False) == [frozenset({0, 1}), frozenset({1, 2})]

    def test_inconsistent(self):
        with pytest.raises(InconsistencyError):
            intersect_conclusions([{0}, {1}], True)


class TestClusters:
    def test_split_zero(self, split_zero):
        clusters = identical_effect_clusters(split_zero)
        assert [c.members for c in clusters] == [frozenset({0, 1}), frozenset({2})]
        c = clusters[0]
        assert c.is_unit() and c.size == 2
        assert c.member_top_eigenvalue == pytest.approx(1 / c.size)

    def test_trine(self, trine_obs):
        assert [c.size for c in identical_effect_clusters(trine_obs)] == [1, 1, 1]

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_uniform(self, n):
        (c,) = identical_effect_clusters(uniform_observable(n))
        assert c.size == n and c.is_unit()

    def test_chain_merges(self):
        eps = 6e-10
        base = np.diag([0.25, 0.25])
        obs = validate(
            [base, base + eps * SZ, base + 2 * eps * SZ, np.eye(2) - 3 * base - 3 * eps * SZ],
            tol=1e-9,
        )
        assert identical_effect_clusters(obs)[0].members == frozenset({0, 1, 2})

    def test_plan(self, split_zero):
        plan = partial_plan(split_zero)
        assert len(plan.subsets) == 4
        assert [sorted(m) for m, _ in plan.cluster_probes] == [[0, 1], [2]]


class TestMinError:
    def test_unit(self, split_zero):
        assert minerror_partial(split_zero, {0, 1}) == 0.0

    def test_half(self, split_zero):
        assert minerror_partial(split_zero, {0}) == pytest.approx(0.5)

    def test_all_but_one(self, qutrit):
        assert minerror_partial(qutrit, {0, 1}) == pytest.approx(0.0, abs=1e-15)

    def test_bad_subset(self, split_zero):
        with pytest.raises(ScopeError):
            minerror_partial(split_zero, {0, 1, 2})
        with pytest.raises(ScopeError):
            minerror_partial(split_zero, set())

    @pytest.mark.parametrize(
        "obs,x,expected",
        [
            (computational_basis(2), 0, 0.0),
            (uniform_observable(3), 1, 1 / 3),
            (validate([np.diag([0.8, 0.2]), np.diag([0.2, 0.8])]), 0, 0.2),
        ],
    )
    def test_anti(self, obs, x, expected):
        assert minerror_anti(obs, x) == pytest.approx(expected, abs=1e-15)


class TestAnti:
    def test_qutrit(self, qutrit):
        plan = anti_plan(qutrit)
        assert plan.indices == (0, 1, 2)
        for x, v in plan.exclusions:
            assert np.real(v.conj() @ qutrit.effects[x] @ v) == pytest.approx(0.0, abs=1e-15)

    def test_full_rank(self):
        assert len(anti_plan(uniform_observable(2))) == 0

    def test_split_zero(self, split_zero):
        assert len(anti_plan(split_zero)) == 3

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_never_observed(self, seed):
        obs = random_obs(seed, 3, 3, rank=1)
        for x, v in anti_plan(obs).exclusions:
            assert channel_output(obs, v)[x] <= 1e-9


def test_partial_simulation(split_zero):
    result = run_partial_experiment(split_zero, find_unit_subsets(split_zero), 20_000, seed=5)
    assert result.successes == result.trials
