"""Exception hierarchy shared by all ptbreak modules."""


class PTBreakError(Exception):
    """Base class for errors raised by ptbreak."""


class ParameterError(PTBreakError, ValueError):
    """Invalid input parameters (dimensions, probabilities, grids)."""


class NumericalError(PTBreakError, ArithmeticError):
    """A linear-algebra routine failed or was numerically singular."""


class IntegrityError(PTBreakError):
    """A spectrum violated conjugation closure.

    Raised when a complex eigenvalue has no conjugate partner, which means
    either the eigensolver failed or the matrix is not PT symmetric.
    """

    def __init__(self, message, unpaired=()):
        super().__init__(message)
        self.unpaired = tuple(unpaired)


class RangeError(PTBreakError, ValueError):
    """A requested quantity lies outside the range covered by the data."""
