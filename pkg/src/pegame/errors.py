"""Exception types shared across the package."""


class DimensionMismatch(ValueError):
    """Game matrices have inconsistent shapes."""


class NonSymmetric(ValueError):
    """A weight matrix is asymmetric beyond tolerance."""


class FiniteEscape(RuntimeError):
    """A Riccati flow blew up before reaching the requested time.

    Carries the detection report in ``report`` when available.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class StepUnderflow(RuntimeError):
    """Adaptive step shrank below the minimum without meeting tolerance."""


class OutOfRange(ValueError):
    """Evaluation time outside the solved interval."""


class UnsortedInstants(ValueError):
    """Communication instants not strictly increasing inside the horizon."""


class DegenerateSchedule(RuntimeError):
    """The backward recursion collapsed onto the initial time."""


class NoFeasibleInstance(RuntimeError):
    """No admissible next communication time exists; signals a numerical fault."""


class EventOrdering(ValueError):
    """Simulation events unsorted or outside the open horizon."""


class InadmissibleInterval(ValueError):
    """Interval contains an escape time; error-value flow undefined on it."""


class IntervalAdmissible(ValueError):
    """Interval is escape-free; a risky deviation cannot profit on it."""


class NegativeBudget(ValueError):
    """Control-effort budget must be nonnegative."""


class ParseError(ValueError):
    """Input file is not valid JSON."""


class SchemaError(ValueError):
    """Input file parses but violates the game-spec schema."""
