class InputError(ValueError):
    """Invalid parameters: a violated precondition of a public operation."""


class ConsistencyError(RuntimeError):
    """An internal identity failed (mass, integrality, Betti number, ...)."""
