"""Exception hierarchy shared by all qreduce modules."""


class QReduceError(Exception):
    """Base class for every error raised by qreduce."""


class UsageError(QReduceError, ValueError):
    """Invalid arguments, unsupported combination of options, or empty input."""


class DomainError(QReduceError, ValueError):
    """Parameter outside the domain of a curve or surface."""


class SingularPointError(QReduceError):
    """Curve tangent vanishes (|d1| = 0)."""


class DegenerateParametrizationError(QReduceError):
    """Surface partials are parallel (r_u x r_v = 0)."""


class DegenerateMetricError(QReduceError):
    """First fundamental form is not positive definite."""


class LayerBreakdownError(QReduceError):
    """Tubular (layer) coordinates are invalid at the requested offset."""


class DegenerateLatitudeError(QReduceError):
    """Latitude circle or its layer window reaches a pole."""


class NotSecondClassError(QReduceError):
    """Constraint bracket matrix is singular at the evaluation point."""


class UnsupportedDomainError(QReduceError):
    """Operation needs a closed curve (or another domain the input lacks)."""


class SolverError(QReduceError):
    """Eigensolver did not converge within its iteration cap."""
