"""Shared exception types."""


class ConfigError(ValueError):
    """A configuration value is out of range or inconsistent with another."""


class SchemaError(ValueError):
    """A dataset directory violates the on-disk schema (missing/malformed files)."""


class IntegrityError(ValueError):
    """Dataset contents violate an invariant (size mismatch, empty mask, ...)."""


class ShapeError(ValueError):
    """A tensor shape does not match what an operator was built for."""


class DiagnosticError(RuntimeError):
    """A numerical failure (NaN/Inf) inside the model; names the offending stage."""

    def __init__(self, stage: str, message: str = ""):
        self.stage = stage
        super().__init__(f"non-finite values at stage '{stage}'" + (f": {message}" if message else ""))
