"""Brute-force checks of the analytic results.

Nothing here calls into the analytic modules except to fetch the value a
check is compared against. The brute-force side uses only the data model
and the generic linear algebra in :mod:`povm_labeler.linalg`.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import config
from .errors import CapExceededError, ScopeError
from .linalg import as_vector, operator_norm, tensor_power

__all__ = [
    "OracleReport",
    "UnambiguousCheck",
    "exhaustive_simple_scheme",
    "exhaustive_strategy_value",
    "kron_norm_check",
    "probe_search_alpha",
    "random_tester_bound",
    "unambiguous_feasibility_check",
]

#: slack allowed between a sampled lower estimate and an analytic upper bound
BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class OracleReport:
    target: str
    analytic_value: float
    oracle_value: float
    samples: int
    seed: int
    note: str = ""

    @property
    def gap(self):
        return self.oracle_value - self.analytic_value

    def to_json(self):
        return {
            "target": self.target,
            "analytic_value": self.analytic_value,
            "oracle_value": self.oracle_value,
            "gap": self.gap,
            "samples": self.samples,
            "seed": self.seed,
            "note": self.note,
        }


def _rng(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed)])))


def haar_states(rng, count, dim):
    """Rows are Haar-random unit vectors (normalized complex Gaussians)."""
    z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _expectations(effects, states):
    # [sample, effect] -> <psi|M_j|psi>
    return np.real(np.einsum("si,jik,sk->sj", states.conj(), effects, states))


def probe_search_alpha(obs, samples, seed, refine_steps=20000):
    """Largest ``<psi|M_j|psi>`` over random pure states, then power iteration.

    The best sample per effect seeds a power iteration on that effect; the
    Rayleigh quotient of a unit vector can never exceed the top eigenvalue, so
    the result is a lower bound that tightens with refinement.
    """
    from .single_shot import alpha

    if samples < 1:
        raise ScopeError("need at least one sample")
    effects = obs.effect_stack()
    states = haar_states(_rng(seed), samples, obs.dim)
    values = _expectations(effects, states)
    best = float(values.max())
    for j in range(obs.n):
        v = states[int(np.argmax(values[:, j]))]
        m = effects[j]
        prev = -1.0
        for _ in range(refine_steps):
            w = m @ v
            norm = np.linalg.norm(w)
            if norm == 0.0:
                break
            v = w / norm
            q = float(np.real(v.conj() @ m @ v))
            if abs(q - prev) <= 1e-16:
                break
            prev = q
        best = max(best, float(np.real(v.conj() @ m @ v)))
    return OracleReport(
        target="alpha", analytic_value=alpha(obs)[0], oracle_value=best, samples=samples, seed=int(seed)
    )


def exhaustive_simple_scheme(obs, probes, max_n=5, max_probes=3):
    """Exact success of the best decision for fixed probes, by enumeration.

    Sums, over every tuple of recorded slots, the largest joint probability
    ``P(relabeling) * P(tuple | relabeling)`` among the ``n!`` equally likely
    relabelings.
    """
    if obs.n > max_n or len(probes) > max_probes:
        raise CapExceededError(
            f"enumeration capped at n <= {max_n} and <= {max_probes} probes, "
            f"got n={obs.n}, {len(probes)} probes"
        )
    probes = [as_vector(p) for p in probes]
    table = [[float(np.real(p.conj() @ m @ p)) for m in obs.effects] for p in probes]
    perms = list(itertools.permutations(range(obs.n)))
    prior = 1.0 / len(perms)
    total = 0.0
    for outcomes in itertools.product(range(obs.n), repeat=len(probes)):
        best = 0.0
        for image in perms:
            slot_to_effect = {slot: k for k, slot in enumerate(image)}
            value = prior
            for t, slot in enumerate(outcomes):
                value *= table[t][slot_to_effect[slot]]
            best = max(best, value)
        total += best
    return total


def exhaustive_strategy_value(obs, strategy, merge_equal=False):
    """Exact success probability of ``strategy`` as it is actually specified.

    Walks the strategy's (possibly adaptive) probe schedule over every outcome
    tuple and applies its own decision rule: MAP-type rules take the
    lexicographically first relabeling within relative 1e-12 of the best
    likelihood; fixed rules call the strategy's decision map. With
    ``merge_equal``, relabelings that differ only by swapping equal effects
    count as the same answer.
    """
    n = obs.n
    perms = list(itertools.permutations(range(n)))
    inverses = [{slot: k for k, slot in enumerate(image)} for image in perms]
    if merge_equal:
        keys = [tuple(_effect_key(obs, inv[s]) for s in range(n)) for inv in inverses]
    else:
        keys = list(range(len(perms)))
    total = 0.0
    for outcomes in itertools.product(range(n), repeat=strategy.shots):
        probes = [strategy.probe_at(outcomes[:t]) for t in range(strategy.shots)]
        table = [[float(np.real(p.conj() @ m @ p)) for m in obs.effects] for p in probes]
        like = []
        for inv in inverses:
            value = 1.0
            for t, slot in enumerate(outcomes):
                value = value * max(table[t][inv[slot]], 0.0)
            like.append(value)
        if strategy.decision == "fixed":
            guess = perms.index(strategy.decision_map(outcomes).image)
        else:
            top = max(like)
            guess = next(h for h, v in enumerate(like) if v >= top * (1.0 - 1e-12))
        total += sum(like[h] for h in range(len(perms)) if keys[h] == keys[guess]) / len(perms)
    return total


def _effect_key(obs, k):
    # representative index of the first effect equal to effect k
    for j in range(k + 1):
        if np.linalg.norm(obs.effects[j] - obs.effects[k]) <= obs.tol:
            return j
    return k


def _random_povm(rng, count, dim, size, rank):
    """``size`` independent random POVMs with ``count`` elements each."""
    w = rng.standard_normal((size, count, dim, rank)) + 1j * rng.standard_normal(
        (size, count, dim, rank)
    )
    g = w @ np.conj(np.swapaxes(w, -1, -2))
    s = g.sum(axis=1)
    vals, vecs = np.linalg.eigh(s)
    s_inv_half = (vecs / np.sqrt(vals)[:, None, :]) @ np.conj(np.swapaxes(vecs, -1, -2))
    return s_inv_half[:, None] @ g @ s_inv_half[:, None]


def _random_states(rng, dim, size, pure):
    if pure:
        v = haar_states(rng, size, dim)
        return v[:, :, None] * v.conj()[:, None, :]
    z = rng.standard_normal((size, dim, dim)) + 1j * rng.standard_normal((size, dim, dim))
    rho = z @ np.conj(np.swapaxes(z, -1, -2))
    return rho / np.trace(rho, axis1=1, axis2=2).real[:, None, None]


def _psd_sqrt(rho):
    vals, vecs = np.linalg.eigh(rho)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))[:, None, :]) @ np.conj(np.swapaxes(vecs, -1, -2))


def random_tester_bound(obs, samples, seed, chunk=4096):
    """Best average success over randomly sampled one-slot testers.

    A one-slot tester with entangled input is a family
    ``T_c = sum_i H_i^(c) ⊗ |i><i|`` over the ``n!`` hypotheses ``c`` with
    ``H_i^(c) >= 0`` and ``sum_c H_i^(c) = rho`` for every slot ``i``. Each
    sample draws ``rho`` and, per slot, an exact split
    ``H_i^(c) = sqrt(rho) E_i^(c) sqrt(rho)`` through a random POVM
    ``{E_i^(c)}_c``. Samples cycle through three families: mixed ``rho`` with
    full-rank POVMs, pure ``rho`` with lowest-rank POVMs, and pure ``rho`` with a
    deterministic slot-to-hypothesis assignment. The average success is
    ``(1/n!) sum_c sum_k Tr[H^(c)_{pi_c(k)} M_k^T]``.
    """
    from .single_shot import alpha

    if obs.n not in (2, 3):
        raise ScopeError(f"tester sampling covers n in {{2, 3}}, got {obs.n}")
    if samples < 1:
        raise ScopeError("need at least one sample")
    n, d = obs.n, obs.dim
    perms = list(itertools.permutations(range(n)))
    n_hyp = len(perms)
    # slot_effect[c, i] = effect placed at slot i under hypothesis c
    slot_effect = np.array([[image.index(i) for i in range(n)] for image in perms])
    mt = np.array([m.T for m in obs.effects])
    # weight[c, i] = M^T of the effect at slot i under hypothesis c
    weight = mt[slot_effect]  # [c, i, d, d]
    rng = _rng(seed)
    best = -np.inf
    best_family = ""
    done = 0
    family = 0
    while done < samples:
        size = min(chunk, samples - done)
        kind = family % 3
        family += 1
        rho = _random_states(rng, d, size, pure=kind != 0)
        root = _psd_sqrt(rho)
        if kind == 2:
            choice = rng.integers(0, n_hyp, size=(size, n))
            povm = np.zeros((size, n, n_hyp, d, d), dtype=np.complex128)
            idx_s, idx_i = np.meshgrid(np.arange(size), np.arange(n), indexing="ij")
            povm[idx_s, idx_i, choice] = np.eye(d)
        else:
            # smallest rank that keeps sum_c G_c invertible
            rank = d if kind == 0 else -(-d // n_hyp)
            povm = _random_povm(rng, n_hyp, d, size * n, rank).reshape(size, n, n_hyp, d, d)
        h = root[:, None, None] @ povm @ root[:, None, None]  # [s, i, c, d, d]
        # success = (1/n!) sum_{c,i} Tr[H_i^(c) W_{c,i}]
        values = np.real(np.einsum("sicab,ciba->s", h, weight)) / n_hyp
        k = int(np.argmax(values))
        if values[k] > best:
            best = float(values[k])
            best_family = ("mixed/full-rank", "pure/low-rank", "pure/deterministic")[kind]
        done += size
    a = alpha(obs)[0]
    return OracleReport(
        target="tester",
        analytic_value=a / math.factorial(n - 1),
        oracle_value=best,
        samples=int(samples),
        seed=int(seed),
        note=f"best sample family: {best_family}",
    )


def kron_norm_check(obs, n):
    """Explicit ``||M_1^{⊗n} - M_2^{⊗n}||`` against the eigenvalue formula."""
    from .multishot import binary_multishot_error

    if obs.n != 2:
        raise ScopeError(f"binary observable required, got {obs.n} effects")
    if not 1 <= n <= 3:
        raise ScopeError(f"explicit tensor check covers n <= 3, got {n}")
    explicit = operator_norm(
        tensor_power(obs.effects[0], n, cap=config.TENSOR_DIM_CAP)
        - tensor_power(obs.effects[1], n, cap=config.TENSOR_DIM_CAP)
    )
    analytic = 1.0 - 2.0 * binary_multishot_error(obs, n)
    return OracleReport(target="kron", analytic_value=analytic, oracle_value=explicit, samples=n, seed=0)


@dataclass(frozen=True)
class UnambiguousCheck:
    """Outcome of re-deriving the no-error constraints.

    ``forced_zero`` counts the ``(slot, hypothesis, effect)`` triples whose
    overlap ``Tr[H_slot^(hypothesis) M_effect]`` the no-error conditions force
    to zero; ``fully_forced_blocks`` counts tester blocks ``H_i^(c)`` for which
    this holds for every effect. When all blocks are fully forced, summing
    over effects with ``sum_k M_k = I`` makes each block traceless, hence zero,
    hence ``Tr rho = 0``: no valid tester exists.
    """

    feasible: bool
    forced_zero: int
    fully_forced_blocks: int
    total_blocks: int
    trace_identity_residual: float

    def to_json(self):
        return {
            "feasible": self.feasible,
            "forced_zero": self.forced_zero,
            "fully_forced_blocks": self.fully_forced_blocks,
            "total_blocks": self.total_blocks,
            "trace_identity_residual": self.trace_identity_residual,
        }


def unambiguous_feasibility_check(obs, seed=0):
    """Whether a one-shot error-free labeling tester can exist.

    For a correct guess ``c`` to never be wrong, ``Tr[Phi_x T_c] = 0`` for all
    ``x != c``. With ``T_c = sum_i H_i^(c) ⊗ |i><i|`` and positive terms this
    reads ``Tr[H_{pi_x(k)}^(c) M_k] = 0`` for every effect ``k``. The check
    enumerates those constraints and evaluates the completeness identity
    ``sum_k Tr[rho M_k] = Tr[rho]`` on a random state.

    Raises:
        ScopeError: for binary observables, where error-free labeling reduces to
            the perfect-labeling (rank) criterion instead.
    """
    if obs.n < 3:
        raise ScopeError("binary observable: use the perfect-labeling verdict instead")
    n = obs.n
    perms = list(itertools.permutations(range(n)))
    forced = set()
    for c in range(len(perms)):
        for x, image in enumerate(perms):
            if x == c:
                continue
            for k in range(n):
                forced.add((image[k], c, k))
    fully = sum(
        1 for i in range(n) for c in range(len(perms)) if all((i, c, k) in forced for k in range(n))
    )
    total_blocks = n * len(perms)
    rho = _random_states(_rng(seed), obs.dim, 1, pure=False)[0]
    residual = abs(
        sum(float(np.real(np.trace(rho @ m))) for m in obs.effects) - float(np.real(np.trace(rho)))
    )
    feasible = not (fully == total_blocks and residual <= obs.tol)
    return UnambiguousCheck(
        feasible=feasible,
        forced_zero=len(forced),
        fully_forced_blocks=fully,
        total_blocks=total_blocks,
        trace_identity_residual=residual,
    )
