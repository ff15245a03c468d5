"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A config/data file violates its schema or an internal invariant."""


class DataError(ValueError):
    """An input data file (ratings CSV, trajectory) is malformed."""


class SmfError(ValueError):
    """A Standard MIDI File could not be parsed or serialized."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
