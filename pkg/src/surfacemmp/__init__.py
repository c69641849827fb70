"""Exact intersection-theoretic minimal model program for projective normal surfaces."""

from .errors import EngineError

__version__ = "0.1.0"

__all__ = ["EngineError", "__version__"]
