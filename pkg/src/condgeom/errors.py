"""Exception hierarchy shared by all submodules."""


class GeometryError(ValueError):
    """Base class for invalid inputs to the conditional-geometry routines."""


class BadShapeError(GeometryError):
    pass


class ShapeMismatchError(GeometryError):
    pass


class NonPositiveEntryError(GeometryError):
    def __init__(self, i, j, value=None):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"entry ({i}, {j}) is not strictly positive: {value!r}")


class NotNormalizedError(GeometryError):
    def __init__(self, row, total=None):
        self.row, self.total = row, total
        super().__init__(f"row {row} sums to {total!r}, expected 1")


class RowSumNotZeroError(GeometryError):
    def __init__(self, row, total=None):
        self.row, self.total = row, total
        super().__init__(f"tangent row {row} sums to {total!r}, expected 0")


class RowIndexOutOfRangeError(GeometryError, IndexError):
    pass


class IndexOutOfRangeError(GeometryError, IndexError):
    pass


class NonPositiveArgumentError(GeometryError):
    pass


class PartitionError(GeometryError):
    pass


class OverlapError(PartitionError):
    pass


class GapError(PartitionError):
    pass


class EmptyBlockError(PartitionError):
    pass


class NotAPermutationError(GeometryError):
    pass


class NotComposableError(GeometryError):
    """Raised when ``g o f`` cannot be written as a single Markov morphism."""


class PreconditionViolatedError(GeometryError):
    pass


class SizeCapExceededError(GeometryError):
    def __init__(self, rows, cols, cap):
        self.rows, self.cols, self.cap = rows, cols, cap
        super().__init__(
            f"uniformizer output {rows} x {cols} = {rows * cols} cells exceeds cap {cap}"
        )


class PerturbationLeavesConeError(GeometryError):
    def __init__(self, t):
        self.t = t
        super().__init__(f"p + t*eps has a non-positive entry at t={t!r}")


class EmptyDatasetError(GeometryError):
    pass


class ExponentOverflowError(GeometryError, OverflowError):
    pass


class NotConvergedError(RuntimeError):
    """The optimizer hit its iteration limit; the partial fit is in ``result``."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class UnknownSuiteError(GeometryError):
    pass
