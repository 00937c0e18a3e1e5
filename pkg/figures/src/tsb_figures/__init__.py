"""Figure rendering for experiment CSV logs (schema-checked, CLI-driven)."""

from .reader import SchemaError
from .render import KINDS, render

__all__ = ["render", "KINDS", "SchemaError"]
__version__ = "0.1.0"
