class UpbBellError(Exception):
    """Base class for every error raised by the services."""


class ArgumentError(UpbBellError, ValueError):
    pass


class MalformedInequalityError(ArgumentError):
    pass


class PreconditionError(UpbBellError):
    pass


class CapacityError(UpbBellError):
    def __init__(self, what: str, count: int, limit: int):
        super().__init__(f"{what}: {count} exceeds the limit of {limit}")
        self.what = what
        self.count = count
        self.limit = limit


class InternalError(UpbBellError):
    pass
