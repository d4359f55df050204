"""Exception types shared across the package.

Each maps onto one CLI exit code.
"""


class CRError(Exception):
    exit_code = 4


class SpecError(CRError, ValueError):
    """Invalid space/system/config description."""
    exit_code = 2


class ResourceLimitError(CRError):
    exit_code = 3


class InvariantViolation(CRError):
    exit_code = 4


class IntegratorError(CRError):
    exit_code = 4
