"""Load one generated program class from source text.

The source runs with a guarded import hook: only a small allowlist of
standard-library modules is importable, so a forbidden import fails at
load time and is reported in the handshake. The base classes are
pre-bound in the namespace; the program defines exactly one subclass of
the expected kind, which is instantiated once with the problem context.
"""

from __future__ import annotations

import builtins

from .api import Policy, PlanningProgram, ValueFunction
from .pddl import Context, read_context

IMPORT_ALLOWLIST = frozenset(
    {"math", "itertools", "collections", "heapq", "functools", "random",
     "typing"})

_REMOVED_BUILTINS = ("open", "exec", "eval", "compile", "input", "breakpoint")


class ProgramLoadError(Exception):
    pass


def _guarded_import(name, globals=None, locals=None, fromlist=(), level=0):
    root = name.split(".")[0]
    if root not in IMPORT_ALLOWLIST:
        raise ProgramLoadError(f"import of '{name}' is not allowed "
                               f"(allowed: {', '.join(sorted(IMPORT_ALLOWLIST))})")
    return __import__(name, globals, locals, fromlist, level)


def _restricted_builtins() -> dict:
    table = dict(vars(builtins))
    for name in _REMOVED_BUILTINS:
        table.pop(name, None)
    table["__import__"] = _guarded_import
    return table


class LoadedProgram:
    def __init__(self, kind: str, instance, context: Context):
        self.kind = kind
        self.instance = instance
        self.context = context

    def evaluate(self, state) -> float:
        return self.instance.value(state)

    def choose(self, state, applicable) -> int:
        return self.instance.choose(state, applicable)


def load_program(kind: str, domain_text: str, problem_text: str,
                 source: str) -> LoadedProgram:
    if kind not in ("value", "policy"):
        raise ProgramLoadError(f"unknown program kind {kind!r}")
    try:
        context = read_context(domain_text, problem_text)
    except Exception as exc:
        raise ProgramLoadError(f"cannot read domain/problem: {exc}") from exc

    base = ValueFunction if kind == "value" else Policy
    namespace = {
        "__builtins__": _restricted_builtins(),
        "PlanningProgram": PlanningProgram,
        "ValueFunction": ValueFunction,
        "Policy": Policy,
    }
    try:
        exec(compile(source, "<program>", "exec"), namespace)
    except ProgramLoadError:
        raise
    except BaseException as exc:
        raise ProgramLoadError(f"program failed to load: {exc!r}") from exc

    classes = [obj for obj in namespace.values()
               if isinstance(obj, type) and issubclass(obj, base)
               and obj not in (PlanningProgram, ValueFunction, Policy)]
    if not classes:
        raise ProgramLoadError(f"program defines no {base.__name__} subclass")
    if len(classes) > 1:
        names = ", ".join(sorted(c.__name__ for c in classes))
        raise ProgramLoadError(f"program defines several candidate classes: {names}")
    try:
        instance = classes[0](context)
    except BaseException as exc:
        raise ProgramLoadError(f"program constructor failed: {exc!r}") from exc
    return LoadedProgram(kind, instance, context)
