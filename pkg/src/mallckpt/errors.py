"""Exception hierarchy shared by all mallckpt modules."""


class MallckptError(Exception):
    """Base class for data and model errors (CLI exit status 1)."""


class TraceFormatError(MallckptError, ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class InsufficientHistoryError(MallckptError):
    """No usable failure/repair history before the requested time."""


class ProfileError(MallckptError, ValueError):
    pass


class PolicyError(MallckptError, ValueError):
    pass


class SpareMatrixError(MallckptError, ArithmeticError):
    pass


class ChainError(MallckptError):
    pass


class SearchError(MallckptError):
    def __init__(self, message, interval=None):
        self.interval = interval
        if interval is not None:
            message = f"at interval {interval!r} s: {message}"
        super().__init__(message)


class SimulationError(MallckptError, ValueError):
    pass
