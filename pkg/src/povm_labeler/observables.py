"""POVM data model: validation, relabeling, Choi operators, binarization.

Indices are 0-based throughout the Python API: effect ``k`` is
``obs.effects[k]`` and a :class:`Permutation` maps effect index to outcome
slot.
"""

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from . import config
from .errors import CapExceededError, DimensionError, ScopeError, ValidationError
from .linalg import (
    as_matrix,
    frobenius_distance,
    hermitian_asymmetry,
    hermitian_eig,
    matrix_from_json,
    matrix_to_json,
    projector,
)

__all__ = [
    "Observable",
    "Permutation",
    "all_permutations",
    "binarize",
    "channel_output",
    "choi",
    "computational_basis",
    "labeling_family",
    "load_observable",
    "observable_from_json",
    "observable_to_json",
    "permute",
    "qubit_binary",
    "random_observable",
    "trine",
    "uniform_observable",
    "validate",
]


@dataclass(frozen=True)
class Permutation:
    """Bijection on ``range(n)``: effect ``k`` goes to outcome slot ``image[k]``."""

    image: tuple

    def __post_init__(self):
        image = tuple(int(i) for i in self.image)
        if sorted(image) != list(range(len(image))):
            raise ValidationError(
                f"{self.image!r} is not a permutation of 0..{len(image) - 1}",
                invariant="permutation",
            )
        object.__setattr__(self, "image", image)

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(n)))

    @property
    def n(self):
        return len(self.image)

    def inverse(self):
        inv = [0] * self.n
        for k, slot in enumerate(self.image):
            inv[slot] = k
        return Permutation(tuple(inv))

    def __call__(self, k):
        return self.image[k]


def all_permutations(n):
    """Every permutation of ``range(n)`` in lexicographic order of the image."""
    return [Permutation(p) for p in itertools.permutations(range(n))]


@dataclass(frozen=True, eq=False)
class Observable:
    """A validated POVM. Build through :func:`validate`, not directly."""

    dim: int
    effects: tuple
    labels: tuple
    tol: float = config.TOL

    @property
    def n(self):
        return len(self.effects)

    def effect_stack(self):
        return np.stack(self.effects)

    def same_effects(self, other, tol=None):
        tol = self.tol if tol is None else tol
        return self.n == other.n and all(
            frobenius_distance(a, b) <= tol for a, b in zip(self.effects, other.effects)
        )

    def __repr__(self):
        return f"Observable(dim={self.dim}, n={self.n}, labels={list(self.labels)})"


def validate(raw, labels=None, tol=config.TOL):
    """Check ``raw`` is a POVM and wrap it as an :class:`Observable`.

    ``labels`` defaults to ``"x1" ... "xn"``.

    Raises:
        ValidationError: naming the violated invariant; ``index`` is the
            offending effect and ``defect`` the measured violation.
        DimensionError: on unequal effect dimensions.
    """
    if len(raw) < 2:
        raise ValidationError(
            f"an observable needs at least 2 effects, got {len(raw)}", invariant="effect-count"
        )
    effects = [as_matrix(m) for m in raw]
    dim = effects[0].shape[0]
    for k, m in enumerate(effects):
        if m.shape[0] != dim:
            raise DimensionError(f"effect {k} has dimension {m.shape[0]}, expected {dim}")

    for k, m in enumerate(effects):
        asym = hermitian_asymmetry(m)
        if asym > tol:
            raise ValidationError(
                f"effect {k} is not Hermitian (asymmetry {asym:.3e})",
                invariant="hermitian",
                index=k,
                defect=asym,
            )
        lam_min = float(hermitian_eig(m, tol).values[0])
        if lam_min < -tol:
            raise ValidationError(
                f"effect {k} has negative eigenvalue {lam_min:.3e}",
                invariant="positive",
                index=k,
                defect=-lam_min,
            )
        norm = float(np.linalg.norm(m))
        if norm <= tol:
            raise ValidationError(
                f"effect {k} is the zero operator", invariant="nonzero", index=k, defect=norm
            )

    defect = float(np.linalg.norm(sum(effects) - np.eye(dim)))
    if defect > tol:
        raise ValidationError(
            f"effects do not sum to the identity (Frobenius defect {defect:.6g})",
            invariant="completeness",
            defect=defect,
        )

    if labels is None:
        labels = [f"x{k + 1}" for k in range(len(effects))]
    labels = tuple(str(x) for x in labels)
    if len(labels) != len(effects):
        raise ValidationError(
            f"{len(labels)} labels for {len(effects)} effects", invariant="label-count"
        )
    if len(set(labels)) != len(labels):
        raise ValidationError("labels are not distinct", invariant="distinct-labels")

    return Observable(dim=dim, effects=tuple(effects), labels=labels, tol=tol)


def permute(obs, p):
    """Relabel ``obs`` so that outcome slot ``p(k)`` carries ``obs.effects[k]``."""
    if not isinstance(p, Permutation):
        p = Permutation(tuple(p))
    if p.n != obs.n:
        raise DimensionError(f"permutation acts on {p.n} elements, observable has {obs.n}")
    effects = [None] * obs.n
    for k, slot in enumerate(p.image):
        effects[slot] = obs.effects[k]
    return Observable(dim=obs.dim, effects=tuple(effects), labels=obs.labels, tol=obs.tol)


def labeling_family(obs, cap=config.FAMILY_CAP):
    """All n! relabelings of ``obs`` in lexicographic permutation order.

    Relabelings with equal effect lists are kept as separate entries.
    """
    count = math.factorial(obs.n)
    if count > cap:
        raise CapExceededError(f"labeling family has {count} members, cap is {cap}")
    return [permute(obs, p) for p in all_permutations(obs.n)]


def choi(obs):
    """Choi operator ``sum_k M_k^T ⊗ |x_k><x_k|`` (system first, outcome second)."""
    n = obs.n
    out = np.zeros((obs.dim * n, obs.dim * n), dtype=np.complex128)
    for k, m in enumerate(obs.effects):
        e = np.zeros((n, n))
        e[k, k] = 1.0
        out += np.kron(m.T, e)
    return as_matrix(out)


def _check_state(rho, dim, tol):
    rho = as_matrix(rho)
    if rho.shape[0] != dim:
        raise DimensionError(f"state has dimension {rho.shape[0]}, observable has {dim}")
    trace = complex(np.trace(rho))
    if abs(trace - 1.0) > tol:
        raise ValidationError(
            f"state trace is {trace.real:.6g}, not 1", invariant="unit-trace", defect=abs(trace - 1)
        )
    lam_min = float(hermitian_eig(rho, tol).values[0])
    if lam_min < -tol:
        raise ValidationError(
            f"state has negative eigenvalue {lam_min:.3e}", invariant="positive", defect=-lam_min
        )
    return rho


def channel_output(obs, rho, tol=None):
    """Outcome distribution ``p_k = Tr[rho M_k]``.

    ``rho`` may be a density matrix or a state vector. Entries in ``[-tol, 0)``
    are clamped to zero.
    """
    tol = obs.tol if tol is None else tol
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim == 1:
        rho = projector(rho)
    rho = _check_state(rho, obs.dim, tol)
    p = np.real(np.einsum("ij,kji->k", rho, obs.effect_stack()))
    if p.min() < -tol:
        raise ValidationError(
            f"negative outcome probability {p.min():.3e}", invariant="probability", defect=-p.min()
        )
    p = np.clip(p, 0.0, 1.0)
    if abs(p.sum() - 1.0) > tol:
        raise ValidationError(
            f"outcome probabilities sum to {p.sum():.12g}",
            invariant="normalization",
            defect=abs(p.sum() - 1.0),
        )
    return p


def binarize(obs, i):
    """The binary observable ``{M_i, sum_{j != i} M_j}``."""
    if not 0 <= i < obs.n:
        raise ScopeError(f"effect index {i} out of range for {obs.n} effects")
    rest = sum(m for j, m in enumerate(obs.effects) if j != i)
    return validate(
        [obs.effects[i], rest], labels=[obs.labels[i], f"not-{obs.labels[i]}"], tol=obs.tol
    )


# Named observables


def trine(tol=config.TOL):
    """Three rank-1 qubit effects of weight 2/3 at 120 degrees on the Bloch circle."""
    s = np.sqrt(3) / 2
    vecs = [np.array([1.0, 0.0]), np.array([0.5, s]), np.array([0.5, -s])]
    return validate([(2 / 3) * np.outer(v, v) for v in vecs], tol=tol)


def computational_basis(d, tol=config.TOL):
    """The von Neumann observable ``{|k><k|}`` in dimension ``d``."""
    effects = []
    for k in range(d):
        m = np.zeros((d, d))
        m[k, k] = 1.0
        effects.append(m)
    return validate(effects, tol=tol)


def uniform_observable(n, d=2, tol=config.TOL):
    """``M_k = I/n`` for every ``k``: the least informative observable."""
    return validate([np.eye(d) / n for _ in range(n)], tol=tol)


def qubit_binary(lam1, lam2, tol=config.TOL):
    """Binary qubit observable with ``M_1 = diag(lam1, lam2)``."""
    m1 = np.diag([lam1, lam2]).astype(float)
    return validate([m1, np.eye(2) - m1], tol=tol)


def random_observable(n, d, rng, rank=None, tol=config.TOL):
    """A random ``n``-effect POVM in dimension ``d``.

    Draws Wishart matrices ``G_k = W_k W_k^dagger`` (``W_k`` is ``d x rank``
    complex Gaussian) and normalizes them as ``S^{-1/2} G_k S^{-1/2}`` with
    ``S = sum_k G_k``. ``rank=None`` gives full-rank effects.
    """
    rank = d if rank is None else rank
    if rank * n < d:
        raise ValidationError(
            f"{n} effects of rank {rank} cannot sum to the identity in dimension {d}",
            invariant="rank",
        )
    gs = []
    for _ in range(n):
        w = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
        gs.append(w @ w.conj().T)
    vals, vecs = np.linalg.eigh(sum(gs))
    s_inv_half = (vecs / np.sqrt(vals)) @ vecs.conj().T
    effects = [s_inv_half @ g @ s_inv_half for g in gs]
    effects = [(m + m.conj().T) / 2 for m in effects]
    # absorb the rounding in the completeness sum into the last effect
    effects[-1] = effects[-1] + (np.eye(d) - sum(effects))
    return validate(effects, tol=tol)


# JSON


def observable_to_json(obs):
    return {
        "dim": obs.dim,
        "labels": list(obs.labels),
        "effects": [matrix_to_json(m) for m in obs.effects],
    }


def observable_from_json(obj, tol=config.TOL):
    try:
        dim = int(obj["dim"])
        effects = [matrix_from_json(m) for m in obj["effects"]]
        labels = obj.get("labels")
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValidationError(
            f"malformed observable encoding: {exc}", invariant="observable-json"
        ) from exc
    if any(m.shape[0] != dim for m in effects):
        raise DimensionError(f"effect dimension does not match declared dim {dim}")
    return validate(effects, labels=labels, tol=tol)


def load_observable(path, tol=config.TOL):
    """Read an observable JSON file. ``json.JSONDecodeError`` and ``OSError``
    propagate unchanged so callers can tell parse failures from invalid POVMs."""
    with open(path) as f:
        obj = json.load(f)
    return observable_from_json(obj, tol=tol)
