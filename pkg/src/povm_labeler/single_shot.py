"""Single-shot labeling: optimal success probability, probe choice, verdicts.

With one use of the device and no entanglement, labeling an ``n``-effect
observable succeeds with probability ``alpha / (n-1)!`` where ``alpha`` is
the largest eigenvalue found among the effects. Entangled probes do not beat
this (see :func:`povm_labeler.oracle.random_tester_bound` for the
stochastic check), and for ``n >= 3`` no error-free scheme with an
inconclusive outcome exists.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .errors import NoInformativeProbeError, ScopeError, ValidationError
from .linalg import as_matrix, frobenius_distance, hermitian_eig, operator_norm

__all__ = [
    "DiscriminationResult",
    "SingleShotReport",
    "alpha",
    "binary_single_shot_error",
    "commuting_discrimination",
    "second_probe",
    "single_shot_report",
]


@dataclass(frozen=True)
class DiscriminationResult:
    """Optimal guessing among commuting states.

    ``decision_map[k]`` is the hypothesis chosen when the common eigenbasis
    measurement returns ``k``; ``basis[:, k]`` is that eigenvector.
    """

    success_probability: float
    decision_map: tuple
    basis: np.ndarray = field(repr=False)

    def recompute(self, states, priors):
        """Success probability of ``decision_map`` evaluated from scratch."""
        total = 0.0
        for k, j in enumerate(self.decision_map):
            v = self.basis[:, k]
            total += priors[j] * float(np.real(v.conj() @ states[j] @ v))
        return total


def _common_eigenbasis(states):
    # a generic real combination of commuting Hermitian matrices has
    # eigenvectors that diagonalize all of them
    coeffs = np.random.default_rng(0x5EED).uniform(0.5, 1.5, size=len(states))
    combo = sum(c * s for c, s in zip(coeffs, states))
    return np.linalg.eigh((combo + combo.conj().T) / 2)[1]


def commuting_discrimination(states, priors, tol=config.TOL):
    """Minimum-error discrimination of pairwise commuting states.

    Measures in a shared eigenbasis ``{|v_k>}`` and guesses, for outcome
    ``k``, the hypothesis maximizing ``p_j <v_k|rho_j|v_k>`` (smallest ``j``
    on ties). The success probability is the sum of those maxima.

    Raises:
        ValidationError: if two states fail to commute (``index`` is the pair,
            ``defect`` the commutator norm) or the priors are not a
            distribution.
    """
    states = [as_matrix(s) for s in states]
    priors = np.asarray(priors, dtype=float)
    if len(priors) != len(states) or np.any(priors < -tol) or abs(priors.sum() - 1) > tol:
        raise ValidationError(
            "priors must be a probability vector with one entry per state", invariant="priors"
        )
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            comm = float(np.linalg.norm(states[i] @ states[j] - states[j] @ states[i]))
            if comm > tol:
                raise ValidationError(
                    f"states {i} and {j} do not commute (||[rho_i, rho_j]||_F = {comm:.3e})",
                    invariant="commuting",
                    index=(i, j),
                    defect=comm,
                )

    basis = _common_eigenbasis(states)
    # weights[j, k] = p_j <v_k|rho_j|v_k>
    weights = np.array(
        [p * np.real(np.einsum("ik,ij,jk->k", basis.conj(), s, basis)) for p, s in zip(priors, states)]
    )
    decision = tuple(int(j) for j in np.argmax(weights, axis=0))
    ps = float(sum(weights[j, k] for k, j in enumerate(decision)))
    return DiscriminationResult(success_probability=ps, decision_map=decision, basis=basis)


def alpha(obs):
    """Largest eigenvalue over all effects.

    Returns ``(alpha, witness, index)``: the value, a unit eigenvector
    achieving it, and the effect it belongs to (smallest index on ties).
    """
    tops = [hermitian_eig(m, obs.tol).top() for m in obs.effects]
    value = max(v for v, _ in tops)
    k = next(k for k, (v, _) in enumerate(tops) if v >= value - obs.tol)
    return float(min(value, 1.0)), tops[k][1], k


@dataclass(frozen=True)
class SingleShotReport:
    alpha: float
    success_probability: float
    optimal_probe: np.ndarray = field(repr=False)
    optimal_effect_index: int
    unambiguous_possible: bool
    perfect_possible: bool

    @property
    def failure_probability(self):
        """Unambiguous-scheme failure probability: 0 if possible, else 1."""
        return 0.0 if self.unambiguous_possible else 1.0


def _has_kernel(m, tol):
    return float(hermitian_eig(m, tol).values[0]) <= tol


def single_shot_report(obs):
    a, probe, idx = alpha(obs)
    if obs.n == 2:
        perfect = any(_has_kernel(m, obs.tol) for m in obs.effects)
    else:
        perfect = False
    return SingleShotReport(
        alpha=a,
        success_probability=a / math.factorial(obs.n - 1),
        optimal_probe=probe,
        optimal_effect_index=idx,
        # for binary observables unambiguous and perfect labeling coincide
        unambiguous_possible=obs.n == 2 and perfect,
        perfect_possible=perfect,
    )


def binary_single_shot_error(obs):
    """``(1 - ||M_1 - M_2||) / 2`` for a binary observable."""
    if obs.n != 2:
        raise ScopeError(f"binary error formula needs 2 effects, got {obs.n}")
    gap = operator_norm(obs.effects[0] - obs.effects[1])
    return 0.5 * (1.0 - gap)


def second_probe(obs, i, j):
    """Probe best separating effects ``i`` and ``j``.

    Returns the eigenvector of ``M_i - M_j`` whose eigenvalue has the largest
    magnitude; on a magnitude tie the positive eigenvalue wins, then the lower
    position in the ascending spectrum.

    Raises:
        NoInformativeProbeError: if ``M_i`` and ``M_j`` coincide within tol.
    """
    if i == j or not (0 <= i < obs.n and 0 <= j < obs.n):
        raise ScopeError(f"need two distinct effect indices in range, got ({i}, {j})")
    if frobenius_distance(obs.effects[i], obs.effects[j]) <= obs.tol:
        raise NoInformativeProbeError(f"effects {i} and {j} are equal; no probe separates them")
    eig = hermitian_eig(obs.effects[i] - obs.effects[j], obs.tol)
    mags = np.abs(eig.values)
    top = mags.max()
    candidates = [k for k in range(eig.dim) if mags[k] >= top - obs.tol]
    positive = [k for k in candidates if eig.values[k] > 0]
    k = (positive or candidates)[0]
    return eig.vectors[:, k]
