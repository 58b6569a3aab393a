"""Exception hierarchy shared across the codec, key chain, and protocol layers."""


class ProtocolError(Exception):
    """Base class for every error raised by this package."""


class WidthError(ProtocolError, ValueError):
    """A field value does not fit its declared bit width."""

    def __init__(self, name: str, value: int, bits: int):
        super().__init__(f"{name}={value!r} does not fit in {bits} bits")
        self.name = name
        self.value = value
        self.bits = bits


class FrameIntegrityError(ProtocolError):
    """Frame failed its parity check and could not be corrected."""


class UnknownPayloadError(ProtocolError):
    """ME field carries a type code outside the assigned payload codes."""


class CaptureFormatError(ProtocolError, ValueError):
    """A hex capture line is malformed."""


class DegenerateChainError(ProtocolError, ValueError):
    """Requested key chain is too short to be usable."""


class DepthExceededError(ProtocolError):
    """Chain walk would exceed the configured maximum depth."""


class ChainExhaustedError(ProtocolError):
    """The sender's key chain has no key left for the next interval."""


class InvalidKeyError(ProtocolError):
    """A disclosed key does not link to the authenticated chain."""


class ConfigError(ProtocolError, ValueError):
    """Simulation or protocol configuration is inconsistent."""
