"""The surface available to loaded programs.

States are frozensets of atoms; an atom is a tuple of lower-case
strings ("predicate", "arg1", ...). Applicable actions are tuples of
the same shape ("action-name", "arg1", ...). A program subclasses
ValueFunction or Policy and overrides one method; the base class is
constructed by the host with the parsed domain/problem context. This
surface is documented verbatim in the planner's synthesis prompt and
the two must stay in step.
"""

from __future__ import annotations

from .pddl import Context

State = frozenset
Atom = tuple


class PlanningProgram:
    """Base class giving generated code access to its problem."""

    def __init__(self, context: Context):
        self._context = context
        self.objects: dict[str, str] = dict(context.objects)
        self.goal: frozenset[tuple[str, ...]] = context.goal_pos
        self.goal_negative: frozenset[tuple[str, ...]] = context.goal_neg

    def objects_of_type(self, type_name: str) -> list[str]:
        """Object names whose type is type_name or a subtype of it."""
        return self._context.objects_of_type(type_name)

    @staticmethod
    def holds(state, predicate: str, *args: str) -> bool:
        return (predicate, *args) in state

    @staticmethod
    def atoms(state, predicate: str) -> list[tuple[str, ...]]:
        """Argument tuples of every atom of the given predicate."""
        return sorted(atom[1:] for atom in state if atom[0] == predicate)


class ValueFunction(PlanningProgram):
    """Override value(); smaller means closer to a goal; math.inf means
    certainly unreachable (the planner converts it to a large finite
    value)."""

    def value(self, state) -> float:
        raise NotImplementedError


class Policy(PlanningProgram):
    """Override choose(); return an index into the applicable list."""

    def choose(self, state, applicable) -> int:
        raise NotImplementedError
