"""Exception taxonomy shared by all modules."""


class UncersegError(Exception):
    """Base class for every error raised by this package."""


class DomainError(UncersegError, ValueError):
    """An argument violates a documented precondition or invariant."""


class EmptyForegroundError(DomainError):
    """A ground-truth mask has no foreground pixels."""


class InsufficientForegroundError(DomainError):
    """A mask has fewer foreground pixels than the requested sample size."""


class GenerationFailedError(UncersegError):
    """A seeded rejection search exhausted its proposal budget."""


class EmptyUncertaintyError(UncersegError):
    """An uncertainty map is identically zero, so no region can be extracted."""


class DecodeError(UncersegError):
    """A file or byte payload could not be decoded as the expected format."""


class EvalRunError(UncersegError):
    """Too many per-entry failures for an evaluation run to be trusted."""


class SegmenterError(UncersegError):
    """Base class for failures reported by a segmentation backend."""


class TransportError(SegmenterError):
    """A remote endpoint could not be reached, including after retries."""


class ProtocolError(SegmenterError):
    """A remote endpoint answered with a malformed or incomplete response."""


class BackendError(SegmenterError):
    """A backend reached the server but reported a failure."""
