"""Tools for a fabric soft pneumatic limb built from triangular actuator arrays."""

from ._core import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
