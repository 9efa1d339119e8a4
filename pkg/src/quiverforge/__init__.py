"""quiverforge - exact algebra of full quivers of representations."""

__version__ = "0.1.0"

# Export key modules for easier imports
from .config import ForgeConfig
from .documents import QuiverDocument, dumps, export_dot, load, loads
from .exceptions import (
    BoundExceededError,
    ConfigurationError,
    DocumentError,
    PassError,
    PolynomialSyntaxError,
    QuiverError,
    QuiverForgeError,
    RingError,
)
from .materialize import Materialized, materialize
from .quiver import Arrow, FullQuiver, Vertex, validate

__all__ = [
    "Arrow",
    "BoundExceededError",
    "ConfigurationError",
    "DocumentError",
    "ForgeConfig",
    "FullQuiver",
    "Materialized",
    "PassError",
    "PolynomialSyntaxError",
    "QuiverDocument",
    "QuiverError",
    "QuiverForgeError",
    "RingError",
    "Vertex",
    "dumps",
    "export_dot",
    "load",
    "loads",
    "materialize",
    "validate",
]
