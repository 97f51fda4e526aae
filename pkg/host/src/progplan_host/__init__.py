"""Subprocess host for generated planning programs."""

from .api import Policy, PlanningProgram, ValueFunction
from .loader import IMPORT_ALLOWLIST, LoadedProgram, ProgramLoadError, load_program
from .protocol import serve

__all__ = [
    "IMPORT_ALLOWLIST",
    "LoadedProgram",
    "Policy",
    "PlanningProgram",
    "ProgramLoadError",
    "ValueFunction",
    "load_program",
    "serve",
]
