"""Exact arithmetic for CM points reducing onto definite quaternion class sets."""

from .errors import ConsistencyError, InputError

__version__ = "0.1.0"

__all__ = ["ConsistencyError", "InputError", "__version__"]
