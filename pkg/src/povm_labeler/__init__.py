"""Labeling analysis for quantum observables (POVMs).

Given the effects of a measurement whose outcome labels were lost, compute
how well the labels can be recovered with one or several uses of the device,
build concrete probe protocols, and check the numbers by simulation and
brute force.
"""

__version__ = "0.1.0"

from .errors import (
    CapExceededError,
    DimensionError,
    InconsistencyError,
    LabelingError,
    NoInformativeProbeError,
    ScopeError,
    ValidationError,
)
from .observables import (
    Observable,
    Permutation,
    binarize,
    channel_output,
    choi,
    computational_basis,
    labeling_family,
    permute,
    qubit_binary,
    random_observable,
    trine,
    uniform_observable,
    validate,
)

__all__ = [
    "CapExceededError",
    "DimensionError",
    "InconsistencyError",
    "LabelingError",
    "NoInformativeProbeError",
    "Observable",
    "Permutation",
    "ScopeError",
    "ValidationError",
    "__version__",
    "binarize",
    "channel_output",
    "choi",
    "computational_basis",
    "labeling_family",
    "permute",
    "qubit_binary",
    "random_observable",
    "trine",
    "uniform_observable",
    "validate",
]
