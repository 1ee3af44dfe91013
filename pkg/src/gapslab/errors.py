"""Exception hierarchy.  Each class carries a machine-readable ``error_class``
and the CLI exit code it maps to."""


class GapslabError(Exception):
    error_class = "error"
    exit_code = 1


class ValidationError(GapslabError, ValueError):
    error_class = "validation-error"
    exit_code = 2


class LimitExceeded(ValidationError):
    error_class = "limit-exceeded"


class InvalidResidue(ValidationError):
    error_class = "invalid-residue"


class DomainError(ValidationError):
    error_class = "domain-error"


class NotPrime(ValidationError):
    error_class = "non-prime-modulus"


class ProductOverflow(ValidationError):
    error_class = "overflow"


class Infeasible(ValidationError):
    error_class = "infeasible"


class SegmentMiss(ValidationError):
    error_class = "segment-miss"


class BudgetExceeded(GapslabError):
    error_class = "budget-exceeded"
    exit_code = 3


class CacheError(GapslabError, OSError):
    error_class = "io-error"
    exit_code = 4


class CorruptCache(CacheError):
    error_class = "corrupt-cache"
