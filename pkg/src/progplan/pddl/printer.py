"""Printer for the supported PDDL fragment.

Output re-parses to a structurally identical Domain/Problem: section and
declaration order is preserved, init atoms are emitted in sorted order
(init is a set) and preconditions/effects keep their stored order.
"""

from __future__ import annotations

from .model import Domain, Problem, TypedName


def _typed(items: tuple[TypedName, ...] | list[TypedName]) -> str:
    return " ".join(f"{x.name} - {x.type}" for x in items)


def print_domain(dom: Domain) -> str:
    lines = [f"(define (domain {dom.name})"]
    if dom.requirements:
        flags = " ".join(f":{r}" for r in dom.requirements)
        lines.append(f"  (:requirements {flags})")
    if dom.types:
        decls = " ".join(f"{t} - {p}" for t, p in dom.types)
        lines.append(f"  (:types {decls})")
    lines.append("  (:predicates")
    for pred in dom.predicates:
        params = f" {_typed(pred.params)}" if pred.params else ""
        lines.append(f"    ({pred.name}{params})")
    lines.append("  )")
    for schema in dom.schemas:
        lines.append(f"  (:action {schema.name}")
        lines.append(f"   :parameters ({_typed(schema.parameters)})")
        pre = " ".join(str(item) for item in schema.precondition)
        lines.append(f"   :precondition (and {pre})".rstrip() if pre
                     else "   :precondition (and)")
        eff = [str(a) for a in schema.add] + [f"(not {a})" for a in schema.delete]
        lines.append(f"   :effect (and {' '.join(eff)}))")
    lines.append(")")
    return "\n".join(lines) + "\n"


def print_problem(prob: Problem) -> str:
    lines = [
        f"(define (problem {prob.name})",
        f"  (:domain {prob.domain_name})",
    ]
    if prob.objects:
        lines.append(f"  (:objects {_typed(prob.objects)})")
    lines.append("  (:init")
    for atom in sorted(prob.init):
        lines.append(f"    {atom}")
    lines.append("  )")
    goal = " ".join(str(lit) for lit in prob.goal)
    lines.append(f"  (:goal (and {goal}))")
    lines.append(")")
    return "\n".join(lines) + "\n"


def print_pddl(dom: Domain, prob: Problem) -> tuple[str, str]:
    """Render both files; parse(print(x)) equals x structurally."""
    return print_domain(dom), print_problem(prob)
