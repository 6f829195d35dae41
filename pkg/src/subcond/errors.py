class InputError(ValueError):
    """Malformed dimension, symbol, coordinate, parameter or file."""


class CapacityError(InputError):
    """A dense table would exceed the enumeration cap."""
