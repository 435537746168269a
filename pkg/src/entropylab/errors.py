"""Exception types shared across the package."""


class EntropyLabError(ValueError):
    """Base class for domain errors raised by entropylab."""


class CoprimalityError(EntropyLabError):
    """Integer coefficients were required to have gcd 1 but do not."""


class CollisionError(EntropyLabError):
    """A base-M relabeling collided; the chosen base M is too small."""


class SpecParseError(EntropyLabError):
    """Syntax error in an inequality specification."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class ResourceBoundError(EntropyLabError):
    """A configured resource bound (support size, enumeration budget) was hit."""
