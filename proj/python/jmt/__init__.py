"""Symbolic checking of Java memory model litmus tests."""

from importlib import resources

from ._core import (
    CompileError,
    HerdError,
    JmtError,
    ModelError,
    ParseError,
    Session,
    SolverError,
    normalize_litmus,
    registers,
    to_herd_x86,
)

__all__ = [
    "CompileError",
    "HerdError",
    "JmtError",
    "ModelError",
    "ParseError",
    "Session",
    "SolverError",
    "default_model",
    "normalize_litmus",
    "registers",
    "to_herd_x86",
]


def default_model() -> str:
    """Path of the bundled JLS04 cat model."""
    return str(resources.files(__name__) / "jls04.cat")
