"""Exception hierarchy.

Everything raised on purpose derives from :class:`LabelingError`, so callers
can catch one type. Input problems also derive from :class:`ValueError`.
"""


class LabelingError(Exception):
    """Base class for all package errors."""


class ValidationError(LabelingError, ValueError):
    """An input violates a data-model invariant.

    ``invariant`` names the violated rule, ``index`` points at the offending
    effect (when there is one) and ``defect`` carries the measured violation.
    """

    def __init__(self, message, *, invariant, index=None, defect=None):
        super().__init__(message)
        self.invariant = invariant
        self.index = index
        self.defect = defect

    def to_dict(self):
        return {
            "invariant": self.invariant,
            "index": self.index,
            "defect": self.defect,
            "message": str(self),
        }


class DimensionError(LabelingError, ValueError):
    """Shapes do not match, or a size cap would be exceeded."""


class CapExceededError(DimensionError):
    """An enumeration or tensor product would exceed its configured cap."""


class ScopeError(LabelingError, ValueError):
    """An operation was called on an observable outside its scope (e.g. a
    binary-only formula on a three-effect observable)."""


class NoInformativeProbeError(LabelingError):
    """The two effects to be told apart are equal, so no probe separates them."""


class InconsistencyError(LabelingError):
    """Observations contradict each other (empty candidate intersection)."""
