"""Exception hierarchy shared by every phipart module."""


class PhipartError(ValueError):
    """Base class for all validation and numerical errors raised by phipart."""


class DimensionMismatch(PhipartError):
    pass


class IndivisibleSampleCount(PhipartError):
    """Raised when m = m0**d does not divide the number of partitioning samples."""


class DuplicateOverflow(PhipartError):
    """Raised when tied coordinates straddle a cut so equal empirical mass is impossible."""


class NegativeRatio(PhipartError):
    pass


class BadRange(PhipartError):
    pass


class NoSolution(PhipartError):
    pass


class ZeroMass(PhipartError):
    """A cell carries P-samples but zero Q-mass (P is not absolutely continuous w.r.t. Q)."""


class ZeroDensity(PhipartError):
    pass


class Unavailable(PhipartError):
    """No closed form exists for the requested (pair, family) combination."""


class BadParams(PhipartError):
    pass


class OracleFailure(PhipartError):
    pass


class RegularizationViolation(PhipartError):
    """A custom phi family failed the grid spot-check of its K0/K1/K2 bounds."""


class ParseError(PhipartError):
    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ConfigError(PhipartError):
    pass
