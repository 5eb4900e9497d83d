"""Exact topological recursion on genus-zero curves with KP integrability checks."""

from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
