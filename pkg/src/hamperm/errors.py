"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid arguments or malformed data supplied by a caller."""


class ParseError(InputError):
    """A text file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
