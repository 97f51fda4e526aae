"""Independent plan checker.

This module replays plans directly over the domain/problem syntax with
its own substitution and applicability code. It deliberately shares no
transition logic with the grounder, so it can serve as an oracle for
the search: a grounder bug and a matching validator bug would have to
be introduced twice.
"""

from __future__ import annotations

from dataclasses import dataclass

from .pddl.model import (
    Atom,
    Domain,
    Equality,
    PddlError,
    Problem,
    UnknownObject,
)
from .planio import PlanSteps

INAPPLICABLE = "inapplicable-literal"
GOAL_UNSATISFIED = "goal-unsatisfied"


class UnknownAction(PddlError):
    pass


@dataclass(frozen=True)
class ValidationOutcome:
    valid: bool
    cost: int | None = None
    step: int | None = None     # 0-based failing step; len(plan) for goal failure
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.valid


def _ancestors(dom: Domain, type_name: str) -> set[str]:
    parents = dict(dom.types)
    out = {type_name}
    cur = type_name
    while cur != "object":
        cur = parents.get(cur, "object")
        out.add(cur)
    return out


def validate_plan(dom: Domain, prob: Problem, steps: PlanSteps) -> ValidationOutcome:
    """Replay a plan from the initial state; Valid iff every action is
    applicable in sequence and the final state satisfies the goal."""
    schemas = {s.name: s for s in dom.schemas}
    obj_type = {o.name: o.type for o in prob.objects}

    state: set[Atom] = set(prob.init)
    for i, (name, args) in enumerate(steps):
        schema = schemas.get(name)
        if schema is None:
            raise UnknownAction(f"step {i}: unknown action '{name}'")
        if len(args) != len(schema.parameters):
            raise UnknownAction(
                f"step {i}: '{name}' takes {len(schema.parameters)} arguments, "
                f"got {len(args)}")
        for arg in args:
            if arg not in obj_type:
                raise UnknownObject(f"step {i}: unknown object '{arg}'")

        binding = {p.name: a for p, a in zip(schema.parameters, args)}

        # ill-typed arguments behave like a violated static precondition
        typed_ok = all(
            p.type in _ancestors(dom, obj_type[a])
            for p, a in zip(schema.parameters, args))
        if not typed_ok:
            return ValidationOutcome(False, step=i, reason=INAPPLICABLE)

        for item in schema.precondition:
            if isinstance(item, Equality):
                left, right = binding[item.left], binding[item.right]
                holds = (left != right) if item.negated else (left == right)
            else:
                ground = Atom(item.atom.predicate,
                              tuple(binding[a] for a in item.atom.args))
                holds = (ground not in state) if item.negated else (ground in state)
            if not holds:
                return ValidationOutcome(False, step=i, reason=INAPPLICABLE)

        for atom in schema.delete:
            state.discard(Atom(atom.predicate, tuple(binding[a] for a in atom.args)))
        for atom in schema.add:
            state.add(Atom(atom.predicate, tuple(binding[a] for a in atom.args)))

    for lit in prob.goal:
        holds = (lit.atom not in state) if lit.negated else (lit.atom in state)
        if not holds:
            return ValidationOutcome(False, step=len(steps), reason=GOAL_UNSATISFIED)
    return ValidationOutcome(True, cost=len(steps))
