"""Exception hierarchy shared across the toolkit."""


class QsheafError(Exception):
    """Base class for every toolkit error."""


class DimensionError(QsheafError):
    """Shapes or Hilbert-space dimensions do not line up."""


class ValidationError(QsheafError):
    """An input violates a structural invariant (Hermiticity, trace, schema, ...)."""


class ScenarioError(ValidationError):
    """A scenario file failed to parse or validate; message carries field context."""


class MalformedCellError(ValidationError):
    """A declared 2-cell is not a closed walk in the graph."""


class UnsupportedCellError(QsheafError):
    """A 2-cell touches an edge whose channel is not unitary."""


class MissingStateError(QsheafError):
    """A vertex in the requested subset has no configured operator."""


class AlignmentFailureError(QsheafError):
    """Decoding left a residual above tolerance (wrong or truncated coefficients)."""


class NoWitnessError(QsheafError):
    """The encoder is injective on obstruction classes; no converse witness exists."""


class UndefinedCapacityError(QsheafError):
    """Semantic capacity is undefined when the obstruction dimension is 0 or 1."""


class UndefinedBoundError(QsheafError):
    """Rate-reduction bound is undefined for a zero-dimensional classical obstruction."""


class ScaleError(QsheafError):
    """Requested enumeration exceeds the desk-scale bound."""


class NoPartitionError(QsheafError):
    """Partition search requires declared tensor factorizations; none were given."""


class UnsupportedDimensionError(QsheafError):
    """Full measurement search only covers qubit B systems; coarse override not set."""


class PayloadError(QsheafError):
    """The scenario lacks the payload a command needs (empirical models, states, ...)."""


class DivergenceError(QsheafError):
    """Diffusion iteration left the stability region and blew up."""


class LPError(QsheafError):
    """Linear-program solver failure."""


class InfeasibleError(LPError):
    """No feasible point satisfies the constraints."""


class UnboundedError(LPError):
    """The objective is unbounded below on the feasible set."""
