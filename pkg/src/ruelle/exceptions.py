"""Exception hierarchy shared by every module of the package."""


class RuelleError(Exception):
    """Base class for all errors raised by :mod:`ruelle`."""


class InvalidTransitionMatrix(RuelleError, ValueError):
    pass


class NotAperiodic(InvalidTransitionMatrix):
    pass


class DegenerateRow(InvalidTransitionMatrix):
    pass


class DegenerateColumn(InvalidTransitionMatrix):
    pass


class SizeLimit(RuelleError):
    pass


class WordTooShort(RuelleError, ValueError):
    pass


class InadmissibleWord(RuelleError, ValueError):
    pass


class AlphabetMismatch(RuelleError, ValueError):
    """Operands live on different shifts or carry different ``theta``."""


class LevelTooSmall(RuelleError, ValueError):
    pass


class NoConvergence(RuelleError):
    pass


class EigenFailure(RuelleError):
    pass


class OrbitTooShort(RuelleError, ValueError):
    pass


class NotNormalized(RuelleError):
    """A candidate cone member does not integrate to one against ``nu``."""


class ConeViolation(RuelleError):
    """A candidate cone member breaks a cylinder ratio condition or is negative."""


class BoundViolated(RuelleError):
    """An explicit inequality failed on an exact computation.

    Attributes
    ----------
    row : CheckRow
        The first failing row.
    report : Report or None
        The full report the row came from.
    """

    def __init__(self, row, report=None):
        self.row = row
        self.report = report
        where = f" at n={row.n}" if row.n is not None else ""
        super().__init__(
            f"{row.bound_id}{where}: actual {row.actual_value!r} exceeds bound "
            f"{row.bound_value!r} (margin {row.margin!r})"
        )


class InputParse(RuelleError, ValueError):
    pass
