"""Process-wide numeric defaults.

Every tolerance-taking function in the package defaults to :data:`TOL`; the
CLI overrides it per invocation with ``--tol``.
"""

#: Hermiticity / positivity / completeness / eigenvalue-1 tolerance.
TOL = 1e-9

#: Largest dimension :func:`povm_labeler.linalg.tensor` will materialize.
TENSOR_DIM_CAP = 4096

#: Largest labeling family (n!) that gets enumerated; 720 means n <= 6.
FAMILY_CAP = 720

#: Largest effect count for the exhaustive 2^n subset scan.
SUBSET_SCAN_CAP = 12

#: Lower edge of the diagnostic band for near-unit eigenvalues.
NEAR_UNIT_BAND = 1e-6

#: Largest shot count accepted by the binary multi-shot error formula.
MAX_SHOTS = 64
