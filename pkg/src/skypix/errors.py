"""Exception types shared across the package."""


class SkypixError(Exception):
    """Base class for all skypix errors."""


class AddressingError(SkypixError, ValueError):
    """Invalid pixel index, resolution or ordering scheme."""


class DomainError(SkypixError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class BoundsError(SkypixError, IndexError):
    """Row index outside the addressable range of a table."""


class FormatError(SkypixError, ValueError):
    """Malformed, truncated or unsupported file content."""


class SchemaError(SkypixError, ValueError):
    """Missing column or mismatched table schema."""


class UniquenessError(SkypixError, ValueError):
    """Pixel-key collision where unique keys were required."""


class GeometryError(SkypixError, ValueError):
    """Degenerate or self-intersecting spherical region."""


class ParameterError(SkypixError, ValueError):
    """Covariance-model parameter outside the family's valid domain."""


class StratificationError(SkypixError, ValueError):
    """Invalid stratum layout (empty or overlapping strata)."""


class NetworkError(SkypixError, IOError):
    """Download failed or was disabled."""
