"""Exception hierarchy shared by all weaksrk modules."""


class WeakSRKError(Exception):
    """Base class for every error raised by this package."""


class TableauError(WeakSRKError, ValueError):
    pass


class DimensionMismatch(TableauError):
    pass


class ExplicitnessViolation(TableauError):
    def __init__(self, matrix, row, col, value):
        self.matrix = matrix
        self.row = row
        self.col = col
        self.value = value
        super().__init__(
            f"{matrix}[{row + 1}][{col + 1}] = {value!r} must be 0 "
            "(explicit stages need a strictly lower triangular matrix)"
        )


class NonFiniteEntry(TableauError):
    pass


class TableauViolations(TableauError):
    """Raised when validation collects more than zero violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class InvalidSign(WeakSRKError, ValueError):
    pass


class ConstraintViolation(WeakSRKError, ValueError):
    pass


class UnknownCase(WeakSRKError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown case"


class VariantUnverified(WeakSRKError):
    pass


class DomainError(WeakSRKError, ValueError):
    pass


class IndexOutOfRange(WeakSRKError, IndexError):
    pass


class SupportTooLarge(WeakSRKError, ValueError):
    pass


class GridMismatch(WeakSRKError, ValueError):
    pass


class NonFiniteState(WeakSRKError, FloatingPointError):
    def __init__(self, t, stage, path=None):
        self.t = t
        self.stage = stage
        self.path = path
        where = f" on path {path}" if path is not None else ""
        super().__init__(f"non-finite value at t={t!r} in stage {stage}{where}")


class InsufficientPaths(WeakSRKError, ValueError):
    pass


class TooFewPoints(WeakSRKError, ValueError):
    pass
