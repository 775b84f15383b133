"""Exception types raised across the package."""


class FFMTError(Exception):
    """Base class for all errors raised by ffmt."""


class NotPrime(FFMTError, ValueError):
    pass


class NotIrreducible(FFMTError, ValueError):
    pass


class FieldTooLarge(FFMTError, ValueError):
    pass


class FieldMismatch(FFMTError, ValueError):
    pass


class DivisionByZero(FFMTError, ZeroDivisionError):
    pass


class PolySyntaxError(FFMTError, ValueError):
    """Polynomial literal does not match the accepted grammar."""


class CoefficientOutOfRange(FFMTError, ValueError):
    pass


class NotMonic(FFMTError, ValueError):
    pass


class NotCoprime(FFMTError, ValueError):
    pass


class BudgetExceeded(FFMTError, MemoryError):
    """The requested table or enumeration is larger than the configured budget."""


class DegreeExceedsTable(FFMTError, ValueError):
    """A polynomial's degree is beyond the sieve table's max_deg."""


class PoolTooSmall(FFMTError, ValueError):
    pass


class SieveFileError(FFMTError, ValueError):
    """A persisted sieve file is malformed or fails validation."""
