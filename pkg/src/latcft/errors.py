"""Exception types shared across the package.

Each exception carries an ``exit_code`` used by the command-line front end,
so that every failure class maps to a distinct nonzero process status.
"""


class LatCFTError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(LatCFTError):
    exit_code = 2


class LatticeTooLarge(LatCFTError):
    exit_code = 3


class DegenerateGroundState(LatCFTError):
    exit_code = 4


class MassiveDensityUnsupported(LatCFTError):
    exit_code = 5


class NyquistViolation(LatCFTError):
    exit_code = 6


class UndefinedForUnitK(LatCFTError):
    exit_code = 7


class UnsupportedOrder(LatCFTError):
    exit_code = 8


class FilterTooWide(LatCFTError):
    exit_code = 9


class ScaleOrderViolation(LatCFTError):
    exit_code = 10


class NonConvergence(LatCFTError):
    exit_code = 11


class NonHermitianGenerator(LatCFTError):
    exit_code = 12


class NonHermitianObservable(LatCFTError):
    exit_code = 13


class TooManyQubits(LatCFTError):
    exit_code = 14


class DeltaOutOfRange(LatCFTError):
    exit_code = 15


class DegenerateFit(LatCFTError):
    exit_code = 16
