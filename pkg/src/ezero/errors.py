"""Exception hierarchy shared by all ezero modules."""


class EzeroError(Exception):
    """Base class for every error raised by this package."""


class CheckedRuntimeError(EzeroError):
    """A checked access violated a runtime invariant (bad index, dead
    buffer, wrong injection tag, selector on a non-cons, ...)."""


class ParseError(EzeroError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class ExpansionError(EzeroError):
    """Macroexpansion or transform application failed."""


class AnalysisError(EzeroError):
    """Dimension analysis or resynthesization received malformed input."""


class ImageError(EzeroError):
    """Marshalling or unmarshalling failed."""


class ExecError(ImageError):
    """An image could not be loaded into a fresh state."""


class PrimitiveFailure(EzeroError):
    """Raised by primitive functions; the machine turns it into a
    Primitive failure outcome.  `code` is a short stable identifier
    such as DivideByZero or IndexOutOfBounds."""

    def __init__(self, code, message):
        self.code = code
        super().__init__(f"{code}: {message}")


class EvalFailure(EzeroError):
    """A toplevel evaluation reached a failure configuration.

    kind is a FailureKind value; handle is the offending frame's handle
    when one is known.
    """

    def __init__(self, kind, message, handle=None):
        self.kind = kind
        self.handle = handle
        super().__init__(message)


class FuelExhausted(EzeroError):
    """The step budget ran out before a final configuration was reached."""


class ResourceOverflow(EzeroError):
    """A configured stack or value-stack depth limit was exceeded."""
