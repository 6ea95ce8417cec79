"""Exception types shared across the package."""


class WindowExhaustedError(RuntimeError):
    """A truncated identity would have to be read off outside the exact window.

    Carries the smallest per-variable degree cap that would make the requested
    window non-empty, so callers can retry with a larger grid.
    """

    def __init__(self, message: str, needed_degree: int):
        super().__init__(message)
        self.needed_degree = needed_degree


class PreconditionError(RuntimeError):
    """A gated operation was called on an operator that fails its gate."""


class InconclusiveTruncationError(RuntimeError):
    """Extracted data touches the window boundary; no verdict at this degree cap."""


class NotToeplitzProductError(ValueError):
    """The coefficient condition fails, so no elementary decomposition exists."""

    def __init__(self, message: str, witnesses):
        super().__init__(message)
        self.witnesses = list(witnesses)


class FactorizationError(RuntimeError):
    """A factorization postcondition failed (non-constant coupling, rank
    mismatch, or a range that is not polynomially generated at this degree cap)."""
