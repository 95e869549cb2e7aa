"""Exception types shared across the package."""


class CapacityError(RuntimeError):
    """A requested object exceeds the configured dense/sparse size caps."""


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of restarts before reaching tolerance."""


class DecodeError(ValueError):
    """A state could not be pulled back through an encoding (e.g. full leakage)."""


class SchemaError(ValueError):
    """A JSON document does not match the expected on-disk schema."""
