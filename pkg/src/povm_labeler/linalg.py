"""Dense complex linear algebra for small Hermitian operators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. :func:`as_matrix`
is the single entry point that enforces the carrier invariants (square,
finite, non-empty); everything else assumes its output.
"""

from dataclasses import dataclass

import numpy as np

from . import config
from .errors import CapExceededError, DimensionError, ValidationError

__all__ = [
    "HermitianEigensystem",
    "as_matrix",
    "as_vector",
    "frobenius_distance",
    "hermitian_eig",
    "is_psd",
    "matrix_from_json",
    "matrix_to_json",
    "operator_norm",
    "projector",
    "tensor",
    "tensor_power",
    "vector_from_json",
    "vector_to_json",
]


def as_matrix(m):
    """Return ``m`` as a read-only square ``complex128`` array.

    Raises:
        DimensionError: if ``m`` is not a non-empty square 2-D array.
        ValidationError: if any entry is NaN or infinite.
    """
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries", invariant="finite")
    a.flags.writeable = False
    return a


def as_vector(v):
    """Return ``v`` as a read-only unit-norm ``complex128`` vector."""
    a = np.array(v, dtype=np.complex128).reshape(-1)
    if a.size < 1 or not np.all(np.isfinite(a)):
        raise ValidationError("probe vector is empty or non-finite", invariant="finite")
    norm = np.linalg.norm(a)
    if norm == 0.0:
        raise ValidationError("probe vector is zero", invariant="unit-norm")
    a = a / norm
    a.flags.writeable = False
    return a


def projector(v):
    """|v><v| for a (normalized) vector ``v``."""
    v = as_vector(v)
    return as_matrix(np.outer(v, v.conj()))


def tensor(a, b, cap=config.TENSOR_DIM_CAP):
    """Kronecker product ``a ⊗ b``.

    Entry ``[(i*db + k), (j*db + l)]`` equals ``a[i, j] * b[k, l]``.

    Raises:
        CapExceededError: if the result dimension would exceed ``cap``.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    dim = a.shape[0] * b.shape[0]
    if dim > cap:
        raise CapExceededError(f"tensor product dimension {dim} exceeds cap {cap}")
    return as_matrix(np.kron(a, b))


def tensor_power(a, n, cap=config.TENSOR_DIM_CAP):
    """``a ⊗ a ⊗ ... ⊗ a`` with ``n >= 1`` factors."""
    if n < 1:
        raise ValueError("tensor power needs n >= 1")
    a = as_matrix(a)
    if a.shape[0] ** n > cap:
        raise CapExceededError(f"tensor power dimension {a.shape[0]}**{n} exceeds cap {cap}")
    out = a
    for _ in range(n - 1):
        out = tensor(out, a, cap=cap)
    return out


@dataclass(frozen=True)
class HermitianEigensystem:
    """Ascending eigenvalues and the matching orthonormal eigenvectors.

    ``vectors[:, k]`` is the eigenvector of ``values[k]``.
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self):
        return self.values.shape[0]

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.conj().T

    def top(self):
        """Largest eigenvalue and its eigenvector."""
        return float(self.values[-1]), self.vectors[:, -1]

    def bottom(self):
        """Smallest eigenvalue and its eigenvector."""
        return float(self.values[0]), self.vectors[:, 0]


def hermitian_asymmetry(m):
    m = as_matrix(m)
    return float(np.linalg.norm(m - m.conj().T))


def hermitian_eig(m, tol=config.TOL):
    """Eigendecomposition of a Hermitian matrix.

    Degenerate eigenspaces come back in whatever orthonormal basis LAPACK
    picks; callers must not depend on it.

    Raises:
        ValidationError: if ``||m - m^dagger||_F > tol``; ``defect`` holds the
            measured asymmetry.
    """
    m = as_matrix(m)
    asym = hermitian_asymmetry(m)
    if asym > tol:
        raise ValidationError(
            f"matrix is not Hermitian (||M - M^dagger||_F = {asym:.3e})",
            invariant="hermitian",
            defect=asym,
        )
    values, vectors = np.linalg.eigh((m + m.conj().T) / 2)
    values.flags.writeable = False
    vectors.flags.writeable = False
    return HermitianEigensystem(values=values, vectors=vectors)


def operator_norm(m):
    """Largest singular value of ``m``."""
    m = as_matrix(m)
    if not np.any(m):
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])


def is_psd(m, tol=config.TOL):
    """True iff the smallest eigenvalue of Hermitian ``m`` is ``>= -tol``."""
    return float(hermitian_eig(m, tol).values[0]) >= -tol


def frobenius_distance(a, b):
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(np.linalg.norm(a - b))


# JSON encoding: {"dim": d, "entries": [[[re, im], ...], ...]}


def matrix_to_json(m):
    m = as_matrix(m)
    return {
        "dim": int(m.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def matrix_from_json(obj):
    try:
        dim = int(obj["dim"])
        rows = obj["entries"]
        entries = [[complex(float(re), float(im)) for re, im in row] for row in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix encoding: {exc}", invariant="matrix-json") from exc
    m = as_matrix(entries) if entries else None
    if m is None or m.shape[0] != dim:
        raise DimensionError(f"matrix 'dim' {dim} does not match its entries")
    return m


def vector_to_json(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v).reshape(-1)]


def vector_from_json(obj):
    try:
        return as_vector([complex(float(re), float(im)) for re, im in obj])
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed vector encoding: {exc}", invariant="vector-json") from exc
