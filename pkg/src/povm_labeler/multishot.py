"""Labeling with several uses of the device.

Binary observables: the optimal ``n``-shot error is
``(1 - ||M_1^{⊗n} - M_2^{⊗n}||) / 2`` and perfect labeling is possible for
some finite ``n`` only if it is already possible with one shot. Non-binary
observables: perfect labeling in ``n - 1`` shots with the simple probe scheme
works iff at least ``n - 1`` effects have eigenvalue 1.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .errors import ScopeError, ValidationError
from .linalg import as_matrix, hermitian_eig
from .observables import binarize, validate

__all__ = [
    "MultiShotErrorCurve",
    "PerfectLabelingPlan",
    "binarization_consistency_check",
    "binary_multishot_error",
    "binary_perfect_verdict",
    "construct_perfectly_labelable",
    "error_curve",
    "nonbinary_perfect_plan",
    "tensor_power_gap",
]


def _require_binary(obs):
    if obs.n != 2:
        raise ScopeError(f"binary observable required, got {obs.n} effects")


def tensor_power_gap(eigenvalues, n, exhaustive=False):
    """``||M^{⊗n} - (I - M)^{⊗n}||`` from the eigenvalues of ``M``.

    Both tensor powers are diagonal in the product eigenbasis, with entries
    ``prod(lam_i) - prod(1 - lam_i)`` that only depend on how often each
    eigenvalue occurs. The entry grows with every factor ``lam_i``, so the
    extremes sit at the all-``lam_max`` and all-``lam_min`` occupations; the
    default path scans occupations of those two values only. ``exhaustive``
    scans every occupation of every distinct eigenvalue instead.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if exhaustive:
        values = np.unique(np.round(lam, 14))
    else:
        values = np.array([lam.min(), lam.max()])
    best = 0.0
    for counts in _occupations(len(values), n):
        a = math.prod(float(v) ** c for v, c in zip(values, counts))
        b = math.prod(float(1.0 - v) ** c for v, c in zip(values, counts))
        best = max(best, abs(a - b))
    return best


def _occupations(k, n):
    # all (c_1..c_k) with c_i >= 0 summing to n
    for bars in itertools.combinations(range(n + k - 1), k - 1):
        prev = -1
        counts = []
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(n + k - 1 - prev - 1)
        yield counts


def binary_multishot_error(obs, n):
    """Optimal error for labeling a binary observable with ``n`` shots."""
    _require_binary(obs)
    if not 1 <= n <= config.MAX_SHOTS:
        raise ScopeError(f"shot count must be in [1, {config.MAX_SHOTS}], got {n}")
    lam = hermitian_eig(obs.effects[0], obs.tol).values
    return 0.5 * (1.0 - tensor_power_gap(lam, n))


@dataclass(frozen=True)
class MultiShotErrorCurve:
    """``errors[i]`` is the optimal error with ``shots[i]`` uses.

    ``best_so_far[i]`` is ``min(errors[:i+1])``, the error when surplus uses
    may be ignored. ``extrapolated`` is set for qudit observables, where the
    formula is applied beyond the qubit case it was derived for.
    """

    shots: tuple
    errors: tuple
    best_so_far: tuple
    extrapolated: bool


def error_curve(obs, shots_max):
    _require_binary(obs)
    shots = tuple(range(1, shots_max + 1))
    errors = tuple(binary_multishot_error(obs, n) for n in shots)
    best = tuple(float(x) for x in np.minimum.accumulate(errors))
    return MultiShotErrorCurve(shots=shots, errors=errors, best_so_far=best, extrapolated=obs.dim > 2)


def binary_perfect_verdict(obs, tol=None):
    """True iff some effect has a zero eigenvalue. Independent of shot count."""
    _require_binary(obs)
    tol = obs.tol if tol is None else tol
    return any(float(hermitian_eig(m, tol).values[0]) <= tol for m in obs.effects)


@dataclass(frozen=True)
class PerfectLabelingPlan:
    """Probe ``probes[t] = (vector, k)`` certifies which slot holds effect ``k``.

    ``near_unit_effects`` lists effects whose top eigenvalue is within the
    diagnostic band below 1 but misses the tolerance; they do not count.
    """

    feasible: bool
    shots_required: int
    probes: tuple = field(repr=False)
    unit_effect_count: int
    near_unit_effects: tuple = ()


def nonbinary_perfect_plan(obs, tol=None):
    tol = obs.tol if tol is None else tol
    unit = []
    near = []
    for k, m in enumerate(obs.effects):
        value, vec = hermitian_eig(m, tol).top()
        if value >= 1.0 - tol:
            unit.append((vec, k))
        elif value >= 1.0 - config.NEAR_UNIT_BAND:
            near.append(k)
    feasible = len(unit) >= obs.n - 1
    probes = tuple(unit[: obs.n - 1]) if feasible else ()
    return PerfectLabelingPlan(
        feasible=feasible,
        shots_required=obs.n - 1,
        probes=probes,
        unit_effect_count=len(unit),
        near_unit_effects=tuple(near),
    )


def construct_perfectly_labelable(n, d, residuals=None, tol=config.TOL):
    """Build a perfectly labelable observable ``M_i = |e_i><e_i| + A_i``.

    ``e_1..e_{n-1}`` are the first computational basis vectors, ``M_n = A_n``
    and the residuals ``A_i`` are PSD operators supported on the orthogonal
    complement ``C`` of those vectors, summing to the projector onto ``C``.
    By default ``A_n`` is that projector and the others vanish.
    """
    if not 2 <= n <= d:
        raise ValidationError(f"need 2 <= n <= d, got n={n}, d={d}", invariant="n-le-d")
    comp = np.diag([0.0] * (n - 1) + [1.0] * (d - n + 1)).astype(np.complex128)
    if residuals is None:
        residuals = [np.zeros((d, d))] * (n - 1) + [comp]
    residuals = [as_matrix(a) for a in residuals]
    if len(residuals) != n or any(a.shape[0] != d for a in residuals):
        raise ValidationError(f"need {n} residuals of dimension {d}", invariant="residual-shape")
    for i, a in enumerate(residuals):
        leak = float(np.linalg.norm(a - comp @ a @ comp))
        if leak > tol:
            raise ValidationError(
                f"residual {i} leaks outside the complement (defect {leak:.3e})",
                invariant="residual-support",
                index=i,
                defect=leak,
            )
        lam_min = float(hermitian_eig(a, tol).values[0])
        if lam_min < -tol:
            raise ValidationError(
                f"residual {i} has negative eigenvalue {lam_min:.3e}",
                invariant="residual-positive",
                index=i,
                defect=-lam_min,
            )
    defect = float(np.linalg.norm(sum(residuals) - comp))
    if defect > tol:
        raise ValidationError(
            f"residuals do not sum to the complement projector (defect {defect:.3e})",
            invariant="residual-completeness",
            defect=defect,
        )
    effects = []
    for i in range(n - 1):
        e = np.zeros((d, d), dtype=np.complex128)
        e[i, i] = 1.0
        effects.append(e + residuals[i])
    effects.append(residuals[-1])
    return validate(effects, tol=tol)


def binarization_consistency_check(obs):
    """Every binarization of a perfectly labelable observable has a
    rank-deficient effect. Returns whether that holds for ``obs``.

    Raises:
        ScopeError: if ``obs`` is not perfectly labelable to begin with.
    """
    if not nonbinary_perfect_plan(obs).feasible:
        raise ScopeError("observable is not perfectly labelable; the check does not apply")
    return all(binary_perfect_verdict(binarize(obs, i)) for i in range(obs.n))
