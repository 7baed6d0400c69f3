"""Exception hierarchy shared by the library and the command-line tool."""


class ProtoselError(Exception):
    """Base class for all errors raised by protosel."""


class InputError(ProtoselError, ValueError):
    """Rejected input: malformed data, bad parameter, dimension mismatch."""


class StateError(ProtoselError, RuntimeError):
    """An operation was requested on an object that cannot support it."""


class SolverError(ProtoselError, RuntimeError):
    """A numerical solver gave up (iteration or retry cap reached)."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
