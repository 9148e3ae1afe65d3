"""Exception hierarchy shared by every module of the package."""


class ProperTimeError(Exception):
    """Base class for all errors raised by :mod:`propertime`."""


class DegenerateSystem(ProperTimeError):
    pass


class UnexpectedKernel(ProperTimeError):
    pass


class NonpositiveMass(ProperTimeError, ValueError):
    pass


class GridTooCoarse(ProperTimeError, ValueError):
    pass


class ZeroProjection(ProperTimeError):
    pass


class BadInterval(ProperTimeError, ValueError):
    pass


class Aliased(ProperTimeError, ValueError):
    pass


class ExpDiverged(ProperTimeError):
    pass


class ZeroEigenvalue(ProperTimeError):
    pass


class ParseError(ProperTimeError):
    pass


class ValidationError(ProperTimeError, ValueError):
    pass
