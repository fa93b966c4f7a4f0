"""Exception hierarchy shared by all edgepart modules."""


class EdgePartError(Exception):
    """Base class for every error raised by edgepart."""


class ParseError(EdgePartError, ValueError):
    """A model, profile or plan document is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(EdgePartError, ValueError):
    """A document parsed but its content violates a structural invariant."""

    def __init__(self, message: str, layer_id: int | None = None):
        self.layer_id = layer_id
        if layer_id is not None:
            message = f"layer {layer_id}: {message}"
        super().__init__(message)


class InfeasibleError(EdgePartError, ValueError):
    """No plan exists for the requested number of partitions."""


class SearchSpaceError(EdgePartError, ValueError):
    """An exhaustive search would exceed its size guard."""

    def __init__(self, size: int, limit: int):
        self.size = size
        self.limit = limit
        super().__init__(f"search space of {size} assignments exceeds guard of {limit}")
