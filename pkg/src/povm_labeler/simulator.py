"""Monte Carlo labeling experiments.

A trial hides a uniformly random relabeling of the observable, measures a
sequence of probe states on it (Born rule), and applies a decision rule.
Strategies are compiled once into lookup tables (outcome distributions per
hypothesis and probe, decision per outcome tuple), then the trial loop runs
in :mod:`povm_labeler.kernels`.

Randomness: trials are split into lanes of :data:`LANE_SIZE`; lane ``L``
draws from ``numpy.random.Generator(Philox(SeedSequence([seed, L])))``,
first the hidden hypotheses (``integers``), then a ``(trials, shots)``
block of uniforms (``random``). Results depend only on ``(observable,
strategy, trials, seed)``, not on the backend or the worker count.
"""

import functools
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import config, kernels
from .errors import CapExceededError, NoInformativeProbeError, ScopeError, ValidationError
from .linalg import as_vector, vector_to_json
from .multishot import nonbinary_perfect_plan
from .observables import Permutation, all_permutations, channel_output
from .partial import identical_effect_clusters
from .single_shot import alpha, second_probe

__all__ = [
    "GENERATOR",
    "LANE_SIZE",
    "SimulationResult",
    "Strategy",
    "custom_strategy",
    "map_decision",
    "map_optimal_strategy",
    "perfect_plan_strategy",
    "run_anti_experiment",
    "run_labeling_experiment",
    "run_partial_experiment",
    "sequential_three_effect",
]

GENERATOR = "numpy-philox4x64-seedsequence"
LANE_SIZE = 1 << 16
#: relative slack under which two posterior weights count as tied
TIE_RTOL = 1e-12
#: largest number of (hypothesis, outcome tuple) cells a compiled strategy may use
TABLE_CAP = 1 << 24


@dataclass(frozen=True)
class Strategy:
    """Probe sequence plus decision rule.

    Shot ``t`` uses ``probes[t]``. Shots past ``len(probes)`` ask
    ``next_probe(outcomes_so_far)`` for their probe, which makes the strategy
    adaptive. ``decision`` is ``"map"`` (most likely relabeling, ties to the
    lexicographically smallest), ``"fixed"`` (``decision_map(outcomes)``
    returns the guess) or ``"sequential"`` (MAP over the adaptive schedule).
    """

    probes: tuple
    decision: str = "map"
    shots: int = None
    next_probe: object = field(default=None, repr=False, compare=False)
    decision_map: object = field(default=None, repr=False, compare=False)
    name: str = "custom"

    def __post_init__(self):
        probes = tuple(as_vector(p) for p in self.probes)
        if not probes:
            raise ValidationError("a strategy needs at least one probe", invariant="probes")
        object.__setattr__(self, "probes", probes)
        if self.shots is None:
            object.__setattr__(self, "shots", len(probes))
        if self.shots > len(probes) and self.next_probe is None:
            raise ValidationError("adaptive shots need a next_probe rule", invariant="probes")
        if self.decision not in ("map", "fixed", "sequential"):
            raise ValidationError(f"unknown decision rule {self.decision!r}", invariant="decision")
        if self.decision == "fixed" and self.decision_map is None:
            raise ValidationError("fixed decision needs a decision_map", invariant="decision")

    def probe_at(self, outcomes):
        t = len(outcomes)
        if t < len(self.probes):
            return self.probes[t]
        return as_vector(self.next_probe(tuple(outcomes)))


@dataclass(frozen=True)
class SimulationResult:
    trials: int
    successes: int
    seed: int
    strategy: str = "custom"
    merge_equal: bool = False

    @property
    def estimate(self):
        return self.successes / self.trials

    @property
    def standard_error(self):
        p = self.estimate
        return math.sqrt(p * (1.0 - p) / self.trials)

    def to_json(self):
        return {
            "strategy": self.strategy,
            "trials": self.trials,
            "successes": self.successes,
            "estimate": self.estimate,
            "standard_error": self.standard_error,
            "seed": self.seed,
            "success_criterion": "merge-equal-effects" if self.merge_equal else "exact",
            "generator": GENERATOR,
            "lane_size": LANE_SIZE,
        }


# Strategy builders


def map_optimal_strategy(obs):
    """One shot with the alpha-witness probe, MAP decision."""
    _, witness, _ = alpha(obs)
    return Strategy(probes=(witness,), decision="map", name="map-optimal")


def custom_strategy(probes, decision="map"):
    return Strategy(probes=tuple(probes), decision=decision, name="custom")


def sequential_three_effect(obs):
    """Two-shot protocol for three-effect observables.

    Shot 1 uses the alpha-witness ``|w>`` of effect ``a``. The recorded slot
    most likely carries ``M_a``, leaving the other two effects ambiguous;
    shot 2 uses the probe that best separates them. If those two effects are
    equal there is nothing to separate and the one-shot MAP strategy is
    returned instead.
    """
    if obs.n != 3:
        raise ScopeError(f"sequential strategy needs exactly 3 effects, got {obs.n}")
    _, witness, a = alpha(obs)
    weights = channel_output(obs, witness)

    @functools.lru_cache(maxsize=None)
    def next_probe(outcomes):
        # the effect most likely sitting at the recorded slot is the
        # witness' effect whatever the slot; the rest stay ambiguous
        top = int(np.argmax(weights >= weights.max() - obs.tol))
        i, j = [k for k in range(3) if k != top]
        return second_probe(obs, i, j)

    try:
        next_probe((0,))
    except NoInformativeProbeError:
        return map_optimal_strategy(obs)
    return Strategy(
        probes=(witness,), decision="sequential", shots=2, next_probe=next_probe, name="sequential-3"
    )


def perfect_plan_strategy(obs):
    """Probe each unit-eigenvalue effect once; the last effect fills the free slot."""
    plan = nonbinary_perfect_plan(obs)
    if not plan.feasible:
        raise ScopeError("observable has no perfect labeling plan")
    targets = [k for _, k in plan.probes]

    def decide(outcomes):
        image = [None] * obs.n
        for k, slot in zip(targets, outcomes):
            image[k] = slot
        free_effects = [k for k in range(obs.n) if image[k] is None]
        free_slots = sorted(set(range(obs.n)) - set(outcomes))
        if len(set(outcomes)) != len(outcomes) or len(free_slots) != len(free_effects):
            return Permutation.identity(obs.n)  # impossible outcome tuple
        for k, slot in zip(free_effects, free_slots):
            image[k] = slot
        return Permutation(tuple(image))

    return Strategy(
        probes=tuple(v for v, _ in plan.probes),
        decision="fixed",
        decision_map=decide,
        name="perfect-plan",
    )


# Compilation


@dataclass(frozen=True)
class _Compiled:
    perms: list
    lik: np.ndarray
    cum: np.ndarray
    next_probe: np.ndarray
    offsets: np.ndarray
    shots: int


def _probe_weights(obs, probe):
    """``<w|M_j|w>`` per effect; fails when they do not sum to one."""
    probe = as_vector(probe)
    if probe.shape[0] != obs.dim:
        raise ValidationError(
            f"probe has dimension {probe.shape[0]}, observable has {obs.dim}", invariant="probe-dim"
        )
    return channel_output(obs, probe)


def _compile(obs, probe_at, shots):
    """Probe bank, schedule tree and outcome tables for a probe rule."""
    n = obs.n
    perms = all_permutations(n)
    if len(perms) > config.FAMILY_CAP:
        raise CapExceededError(f"{len(perms)} hypotheses exceed cap {config.FAMILY_CAP}")
    if len(perms) * n**shots > TABLE_CAP:
        raise CapExceededError(f"strategy table {len(perms)} x {n}**{shots} exceeds {TABLE_CAP}")

    bank = []
    offsets = []
    schedule = []
    for t in range(shots):
        offsets.append(len(schedule))
        for prefix in itertools.product(range(n), repeat=t):
            probe = probe_at(prefix)
            for b, known in enumerate(bank):
                if known.shape == probe.shape and np.array_equal(known, probe):
                    break
            else:
                bank.append(probe)
                b = len(bank) - 1
            schedule.append(b)

    weights = np.array([_probe_weights(obs, p) for p in bank])  # [B, n]
    inverse = np.array([p.inverse().image for p in perms])  # [P, n]
    lik = np.ascontiguousarray(weights[:, inverse].transpose(1, 0, 2))  # [P, B, n]
    cum = np.cumsum(lik, axis=2)
    for h, b in np.ndindex(cum.shape[:2]):
        last = np.flatnonzero(lik[h, b] > 0.0)[-1]
        cum[h, b, last:] = 1.0
    return _Compiled(
        perms=perms,
        lik=lik,
        cum=np.ascontiguousarray(cum),
        next_probe=np.array(schedule, dtype=np.int64),
        offsets=np.array(offsets, dtype=np.int64),
        shots=shots,
    )


def _equivalence_classes(obs, perms):
    """Class id per relabeling; equal ids mean equal effect lists."""
    cluster_of = {}
    for c, cluster in enumerate(identical_effect_clusters(obs)):
        for k in cluster.members:
            cluster_of[k] = c
    keys = {}
    out = []
    for p in perms:
        key = tuple(cluster_of[k] for k in p.inverse().image)
        out.append(keys.setdefault(key, len(keys)))
    return np.array(out, dtype=np.int64)


def _decision_table(obs, strategy, comp):
    if strategy.decision == "fixed":
        index = {p.image: h for h, p in enumerate(comp.perms)}
        return np.array(
            [
                index[strategy.decision_map(outcomes).image]
                for outcomes in itertools.product(range(obs.n), repeat=comp.shots)
            ],
            dtype=np.int64,
        )
    return np.asarray(
        kernels.map_decisions(comp.lik, comp.next_probe, comp.offsets, comp.shots, TIE_RTOL),
        dtype=np.int64,
    )


def _run(comp, ok, trials, seed, workers):
    if trials < 1:
        raise ValidationError("need at least one trial", invariant="trials")
    ok = np.ascontiguousarray(ok, dtype=np.uint8)
    n_hyp = len(comp.perms)
    lanes = [(lane, min(LANE_SIZE, trials - lane * LANE_SIZE)) for lane in range(-(-trials // LANE_SIZE))]

    def one_lane(job):
        lane, size = job
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, lane])))
        hidden = rng.integers(0, n_hyp, size=size, dtype=np.int64)
        uniforms = rng.random((size, comp.shots))
        return kernels.run_trials(comp.cum, comp.next_probe, comp.offsets, ok, hidden, uniforms)

    if workers > 1 and len(lanes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(one_lane, lanes))
    else:
        counts = [one_lane(job) for job in lanes]
    return int(sum(counts))


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}", invariant="seed")
    return seed


def run_labeling_experiment(obs, strategy, trials, seed, workers=1, merge_equal=False):
    """Estimate the success probability of ``strategy`` on ``obs``.

    A guess counts as correct when it is the hidden relabeling. With
    ``merge_equal`` a guess that differs from it only by swapping equal
    effects (same effect ordering) counts as correct too; by default such
    relabelings stay distinct hypotheses, so ``M_k = I/n`` scores ``1/n!``.
    """
    seed = _check_seed(seed)
    comp = _compile(obs, strategy.probe_at, strategy.shots)
    decision = _decision_table(obs, strategy, comp)
    if merge_equal:
        classes = _equivalence_classes(obs, comp.perms)
    else:
        classes = np.arange(len(comp.perms), dtype=np.int64)
    ok = classes[:, None] == classes[decision][None, :]
    successes = _run(comp, ok, trials, seed, workers)
    return SimulationResult(
        trials=int(trials),
        successes=successes,
        seed=seed,
        strategy=strategy.name,
        merge_equal=merge_equal,
    )


def map_decision(obs, probes, outcomes):
    """Most likely relabeling given the outcome slots recorded for ``probes``.

    Ties (within :data:`TIE_RTOL`) go to the lexicographically smallest
    permutation.
    """
    if len(probes) != len(outcomes):
        raise ValidationError("one outcome per probe is required", invariant="outcomes")
    weights = [_probe_weights(obs, p) for p in probes]
    perms = all_permutations(obs.n)
    like = []
    for p in perms:
        inv = p.inverse().image
        value = 1.0
        for w, k in zip(weights, outcomes):
            value = value * float(w[inv[k]])
        like.append(value)
    best = max(like)
    return next(p for p, v in zip(perms, like) if v >= best * (1.0 - TIE_RTOL))


def _conclusion_experiment(obs, probes, trials, seed, consistent, name, workers):
    seed = _check_seed(seed)
    probes = tuple(as_vector(p) for p in probes)
    comp = _compile(obs, lambda prefix: probes[len(prefix)], len(probes))
    ok = np.zeros((len(comp.perms), obs.n ** len(probes)), dtype=np.uint8)
    for h, p in enumerate(comp.perms):
        inv = p.inverse().image
        for idx, outcomes in enumerate(itertools.product(range(obs.n), repeat=len(probes))):
            ok[h, idx] = consistent(inv, outcomes)
    successes = _run(comp, ok, trials, seed, workers)
    return SimulationResult(trials=int(trials), successes=successes, seed=seed, strategy=name)


def run_partial_experiment(obs, subsets, trials, seed, workers=1):
    """Probe each ``(X, phi)`` in turn and conclude "the recorded slot holds an
    effect in X", intersecting the sets of shots that hit the same slot.

    A trial succeeds when every conclusion is true of the hidden relabeling.
    """
    sets = [frozenset(x) for x, _ in subsets]

    def consistent(inv, outcomes):
        for slot in set(outcomes):
            candidates = frozenset.intersection(*[s for s, k in zip(sets, outcomes) if k == slot])
            if inv[slot] not in candidates:
                return False
        return True

    return _conclusion_experiment(
        obs, [phi for _, phi in subsets], trials, seed, consistent, "partial", workers
    )


def run_anti_experiment(obs, exclusions, trials, seed, workers=1):
    """Probe each kernel vector ``phi_x`` and conclude "the recorded slot does not
    hold effect x". A trial succeeds when no conclusion is false."""
    targets = [x for x, _ in exclusions]

    def consistent(inv, outcomes):
        return all(inv[k] != x for x, k in zip(targets, outcomes))

    return _conclusion_experiment(
        obs, [phi for _, phi in exclusions], trials, seed, consistent, "anti", workers
    )


def strategy_to_json(strategy):
    return {"name": strategy.name, "decision": strategy.decision, "shots": strategy.shots,
            "probes": [vector_to_json(p) for p in strategy.probes]}
