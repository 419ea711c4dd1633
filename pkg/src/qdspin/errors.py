"""Exception types shared across the package."""


class CapacityError(ValueError):
    """A matrix would exceed the configured dense-size cap."""


class NumericError(ArithmeticError):
    """A numerical step failed or produced physically inconsistent output."""


class DegeneratePolesError(NumericError):
    """Residue inversion needs simple poles; use the spectral evolver instead."""
