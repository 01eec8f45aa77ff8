"""Exception and warning types shared across the toolkit."""


class GakError(Exception):
    """Base class for all toolkit errors."""


class FormatError(GakError):
    """Malformed file header or inconsistent array metadata."""


class UnsupportedRank(GakError):
    """Array rank outside the supported {2, 3}."""


class UnsupportedFormat(GakError):
    """File uses a dtype, order, or format version we do not read."""


class TruncationError(GakError):
    """Payload shorter than the header promises."""


class IoError(GakError):
    """Path cannot be read or written."""


class NonFiniteInput(GakError):
    """NaN or Inf encountered where finite values are required."""


class DegenerateRow(GakError):
    """An entire score row sits at the floor sentinel; softmax is meaningless."""


class InfeasibleLength(GakError):
    """Too few frames for the label sequence under the active topology."""


class EmptyLabels(GakError):
    """Alignment requested for an empty label sequence."""


class VocabError(GakError):
    """Label vocabulary id outside the posterior matrix."""


class SequenceMismatch(GakError):
    """Hypothesis and reference word counts differ."""


class WordMismatch(GakError):
    """Word text differs between hypothesis and reference in strict mode."""


class ShapeError(GakError):
    """Array shape violates an operation's contract."""


class NumericalError(GakError):
    """Non-finite loss or intermediate value during model evaluation."""


class InvalidEpsilon(GakError):
    """Finite-difference step size must be positive."""


class LayerError(GakError):
    """Requested layer tag is not exposed by the model."""


class ValidationWarning(UserWarning):
    """Soft contract violation (warn-only validations)."""


class ArgmaxAmbiguous(ValidationWarning):
    """A row of all-equal values makes the argmax arbitrary; first index taken."""
