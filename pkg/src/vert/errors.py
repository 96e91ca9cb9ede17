"""Exception hierarchy shared across the toolkit."""


class VertError(Exception):
    """Base class for every error raised by this package."""


class UnboundIdentifier(VertError):
    pass


class PastDepthExceedsTrace(VertError):
    pass


class UnterminatedIfdef(VertError):
    pass


class ParseFailure(VertError):
    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class EmptyPool(VertError):
    pass


class PoolTooSmall(VertError):
    pass


class NoClockFound(VertError):
    pass


class UnsupportedStmt(VertError):
    pass


class SpanNotOnPath(VertError):
    pass


class CombLoopDetected(VertError):
    pass


class UnelaboratedModule(VertError):
    pass


class UnsupportedWidth(VertError):
    pass


class SignalMissing(VertError):
    pass


class AtomBudgetExceeded(VertError):
    pass
