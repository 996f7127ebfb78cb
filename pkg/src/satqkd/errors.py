"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """A configuration field violates one of its invariants.

    The message always starts with the (dotted) field name so that callers can
    report ``orbit.altitude: must be > 0`` style errors.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")

    def prefixed(self, section: str) -> "ConfigError":
        return ConfigError(f"{section}.{self.field}", str(self).split(": ", 1)[1])


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class NumericError(RuntimeError):
    """A numerical routine (quadrature, special function) failed."""


class ChannelError(RuntimeError):
    """A loss channel failed while assembling a budget or simulating a pass."""

    def __init__(self, channel: str, cause: Exception, index: int | None = None):
        self.channel = channel
        self.index = index
        where = f"sample {index}: " if index is not None else ""
        super().__init__(f"{where}{channel}: {cause}")


def require(condition: bool, field: str, message: str) -> None:
    if not condition:
        raise ConfigError(field, message)
