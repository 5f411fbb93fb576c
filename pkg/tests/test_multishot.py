import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from povm_labeler import ValidationError, computational_basis, qubit_binary, trine, validate
from povm_labeler.errors import ScopeError
from povm_labeler.linalg import operator_norm
from povm_labeler.multishot import (
    binarization_consistency_check,
    binary_multishot_error,
    binary_perfect_verdict,
    construct_perfectly_labelable,
    error_curve,
    nonbinary_perfect_plan,
    tensor_power_gap,
)
from povm_labeler.single_shot import binary_single_shot_error

from conftest import random_obs


def explicit_error(obs, n):
    """Build both n-fold tensor powers by hand."""
    a, b = obs.effects
    ta, tb = np.ones((1, 1)), np.ones((1, 1))
    for _ in range(n):
        ta, tb = np.kron(ta, a), np.kron(tb, b)
    return 0.5 * (1 - operator_norm(ta - tb))


def brute_gap(lam, n):
    return max(
        abs(np.prod([lam[i] for i in idx]) - np.prod([1 - lam[i] for i in idx]))
        for idx in itertools.product(range(len(lam)), repeat=n)
    )


class TestBinaryMultishot:
    @pytest.mark.parametrize("n", [1, 2, 5, 64])
    def test_projective(self, n):
        assert binary_multishot_error(computational_basis(2), n) == pytest.approx(0.0, abs=1e-15)

    def test_worked_curve(self):
        obs = qubit_binary(0.8, 0.2)
        values = [binary_multishot_error(obs, n) for n in (1, 2, 3)]
        np.testing.assert_allclose(values, [0.2, 0.2, 0.248], atol=1e-12)
        # 8x8 explicit construction for three shots
        assert explicit_error(obs, 3) == pytest.approx(0.248, abs=1e-12)

    def test_range(self):
        obs = qubit_binary(0.8, 0.2)
        with pytest.raises(ScopeError):
            binary_multishot_error(obs, 0)
        with pytest.raises(ScopeError):
            binary_multishot_error(obs, 65)
        assert 0 <= binary_multishot_error(obs, 64) <= 0.5

    def test_non_binary(self):
        with pytest.raises(ScopeError):
            binary_multishot_error(trine(), 2)

    @given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
    @settings(max_examples=40, deadline=None)
    def test_one_shot_matches_single(self, seed, d):
        obs = random_obs(seed, 2, d)
        assert abs(binary_multishot_error(obs, 1) - binary_single_shot_error(obs)) <= 1e-12

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_two_shots_equal_one_for_qubits(self, seed):
        obs = random_obs(seed, 2, 2)
        assert abs(binary_multishot_error(obs, 2) - binary_multishot_error(obs, 1)) <= 1e-10

    @given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]), st.integers(1, 3))
    @settings(max_examples=40, deadline=None)
    def test_matches_explicit_tensor(self, seed, d, n):
        obs = random_obs(seed, 2, d)
        assert abs(binary_multishot_error(obs, n) - explicit_error(obs, n)) <= 1e-10

    @given(
        st.lists(st.floats(0, 1), min_size=1, max_size=4),
        st.integers(1, 5),
    )
    @settings(max_examples=80, deadline=None)
    def test_reduction_matches_brute_force(self, lam, n):
        g = brute_gap(lam, n)
        assert tensor_power_gap(lam, n) == pytest.approx(g, abs=1e-12)
        assert tensor_power_gap(lam, n, exhaustive=True) == pytest.approx(g, abs=1e-12)

    def test_curve(self):
        curve = error_curve(qubit_binary(0.8, 0.2), 5)
        assert curve.shots == (1, 2, 3, 4, 5)
        assert curve.best_so_far[2] == pytest.approx(0.2)
        assert not curve.extrapolated
        assert error_curve(validate([np.diag([0.9, 0.5, 0.1]), np.diag([0.1, 0.5, 0.9])]), 2).extrapolated


class TestPerfectVerdict:
    def test_projective(self):
        assert binary_perfect_verdict(computational_basis(2))

    def test_full_rank(self):
        assert not binary_perfect_verdict(qubit_binary(0.8, 0.2))

    def test_tolerance_band(self):
        assert binary_perfect_verdict(qubit_binary(1 - 5e-10, 0.5))


class TestPerfectPlan:
    def test_qutrit(self, qutrit):
        plan = nonbinary_perfect_plan(qutrit)
        assert plan.feasible and plan.shots_required == 2
        assert [k for _, k in plan.probes] == [0, 1]
        np.testing.assert_allclose(np.abs(plan.probes[0][0]), [1, 0, 0])
        np.testing.assert_allclose(np.abs(plan.probes[1][0]), [0, 1, 0])

    def test_trine(self, trine_obs):
        plan = nonbinary_perfect_plan(trine_obs)
        assert not plan.feasible and plan.unit_effect_count == 0

    def test_binary_projective(self):
        plan = nonbinary_perfect_plan(computational_basis(2))
        assert plan.feasible and plan.shots_required == 1

    def test_near_miss(self):
        eps = 1e-7
        obs = validate([np.diag([1 - eps, 0, 0]), np.diag([eps, 1, 0]), np.diag([0, 0, 1])])
        plan = nonbinary_perfect_plan(obs)
        assert plan.unit_effect_count == 2 and plan.near_unit_effects == (0,)
        assert plan.feasible

    def test_probe_invariant(self):
        obs = construct_perfectly_labelable(4, 5)
        plan = nonbinary_perfect_plan(obs)
        for v, k in plan.probes:
            assert np.real(v.conj() @ obs.effects[k] @ v) >= 1 - 1e-9
        assert len({k for _, k in plan.probes}) == len(plan.probes)


class TestConstruct:
    def test_default_basis(self):
        obs = construct_perfectly_labelable(3, 3)
        assert obs.same_effects(computational_basis(3))

    def test_binary_qutrit(self):
        obs = construct_perfectly_labelable(2, 3)
        np.testing.assert_array_equal(obs.effects[0].real, np.diag([1, 0, 0]))
        np.testing.assert_array_equal(obs.effects[1].real, np.diag([0, 1, 1]))

    def test_custom_residuals(self):
        zero = np.zeros((4, 4))
        obs = construct_perfectly_labelable(3, 4, [zero, zero, np.diag([0, 0, 1, 1])])
        assert nonbinary_perfect_plan(obs).feasible

    def test_split_residuals(self):
        obs = construct_perfectly_labelable(3, 4, [np.diag([0, 0, 0.5, 0]), np.zeros((4, 4)), np.diag([0, 0, 0.5, 1])])
        assert nonbinary_perfect_plan(obs).feasible
        assert binarization_consistency_check(obs)

    @pytest.mark.parametrize(
        "n,d,residuals,invariant",
        [
            (4, 3, None, "n-le-d"),
            (3, 4, [np.zeros((4, 4))] * 2, "residual-shape"),
            (3, 4, [np.diag([1, 0, 0, 0]), np.zeros((4, 4)), np.diag([0, 0, 1, 1])], "residual-support"),
            (3, 4, [np.diag([0, 0, 1, -0.5]), np.zeros((4, 4)), np.diag([0, 0, 0, 1.5])], "residual-positive"),
            (3, 4, [np.zeros((4, 4))] * 2 + [np.diag([0, 0, 1, 0])], "residual-completeness"),
        ],
    )
    def test_rejections(self, n, d, residuals, invariant):
        with pytest.raises(ValidationError) as info:
            construct_perfectly_labelable(n, d, residuals)
        assert info.value.invariant == invariant

    @given(st.integers(2, 6), st.integers(0, 4))
    @settings(max_examples=30, deadline=None)
    def test_always_feasible(self, n, extra):
        obs = construct_perfectly_labelable(n, n + extra)
        plan = nonbinary_perfect_plan(obs)
        assert plan.feasible and plan.shots_required == n - 1


class TestBinarizationConsistency:
    def test_qutrit(self, qutrit):
        assert binarization_consistency_check(qutrit)

    def test_constructed(self):
        assert binarization_consistency_check(construct_perfectly_labelable(3, 4))

    def test_trine_out_of_scope(self, trine_obs):
        with pytest.raises(ScopeError):
            binarization_consistency_check(trine_obs)
