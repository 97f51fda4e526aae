"""Bijective renaming of PDDL identifiers to nondescript symbols.

Types become t1, t2, ..., predicates p1, p2, ..., action schemas a1,
a2, ... and objects o1, o2, ..., each numbered by first occurrence
(declaration order; objects across all problems in the order given).
The f prefix is reserved for numeric functions, which the fragment does
not have. The root type "object" maps to itself. Variable names are
local to a schema and are left unchanged.
"""

from __future__ import annotations

from .model import (
    ROOT_TYPE,
    ActionSchema,
    Atom,
    Domain,
    Equality,
    Literal,
    NameMap,
    PddlError,
    PredicateDecl,
    Problem,
    TypedName,
)

_PREFIX = {"type": "t", "predicate": "p", "schema": "a", "object": "o",
           "function": "f"}

PlanSteps = tuple[tuple[str, tuple[str, ...]], ...]


class UnknownName(PddlError):
    """A plan mentions a name absent from the NameMap."""


def build_name_map(dom: Domain, probs: list[Problem]) -> NameMap:
    forward: dict[tuple[str, str], str] = {("type", ROOT_TYPE): ROOT_TYPE}
    counters = dict.fromkeys(_PREFIX, 0)

    def assign(category: str, name: str) -> None:
        key = (category, name)
        if key in forward:
            return
        counters[category] += 1
        forward[key] = f"{_PREFIX[category]}{counters[category]}"

    for tname, _ in dom.types:
        assign("type", tname)
    for pred in dom.predicates:
        assign("predicate", pred.name)
    for schema in dom.schemas:
        assign("schema", schema.name)
    for prob in probs:
        for obj in prob.objects:
            assign("object", obj.name)

    backward = {(cat, new): old for (cat, old), new in forward.items()}
    if len(backward) != len(forward):
        raise PddlError("anonymization produced a name collision")
    return NameMap(forward, backward)


def _rename_atom(atom: Atom, names: dict[tuple[str, str], str],
                 arg_category: str) -> Atom:
    pred = names[("predicate", atom.predicate)]
    args = tuple(a if a.startswith("?") else names[(arg_category, a)]
                 for a in atom.args)
    return Atom(pred, args)


def _rename_domain(dom: Domain, names: dict[tuple[str, str], str]) -> Domain:
    def t(name: str) -> str:
        return names[("type", name)]

    types = tuple((t(n), t(p)) for n, p in dom.types)
    predicates = tuple(
        PredicateDecl(names[("predicate", p.name)],
                      tuple(TypedName(v.name, t(v.type)) for v in p.params))
        for p in dom.predicates)
    schemas = []
    for s in dom.schemas:
        pre = tuple(
            item if isinstance(item, Equality)
            else Literal(_rename_atom(item.atom, names, "object"), item.negated)
            for item in s.precondition)
        schemas.append(ActionSchema(
            names[("schema", s.name)],
            tuple(TypedName(v.name, t(v.type)) for v in s.parameters),
            pre,
            tuple(_rename_atom(a, names, "object") for a in s.add),
            tuple(_rename_atom(a, names, "object") for a in s.delete),
        ))
    return Domain(dom.name, types, predicates, tuple(schemas), dom.requirements)


def _rename_problem(prob: Problem, dom_name: str,
                    names: dict[tuple[str, str], str]) -> Problem:
    objects = tuple(TypedName(names[("object", o.name)],
                              names[("type", o.type)]) for o in prob.objects)
    init = frozenset(_rename_atom(a, names, "object") for a in prob.init)
    goal = tuple(Literal(_rename_atom(l.atom, names, "object"), l.negated)
                 for l in prob.goal)
    return Problem(prob.name, dom_name, objects, init, goal)


def anonymize(dom: Domain, probs: list[Problem]
              ) -> tuple[Domain, list[Problem], NameMap]:
    """Rename every identifier per-category; same name maps identically
    across all files."""
    nm = build_name_map(dom, probs)
    new_dom = _rename_domain(dom, nm.forward)
    new_probs = [_rename_problem(p, new_dom.name, nm.forward) for p in probs]
    return new_dom, new_probs, nm


def deanonymize(dom: Domain, probs: list[Problem], nm: NameMap
                ) -> tuple[Domain, list[Problem]]:
    """Inverse of anonymize under the same NameMap."""
    new_dom = _rename_domain(dom, nm.backward)
    return new_dom, [_rename_problem(p, new_dom.name, nm.backward) for p in probs]


def _rename_steps(steps: PlanSteps, names: dict[tuple[str, str], str]) -> PlanSteps:
    out = []
    for name, args in steps:
        if ("schema", name) not in names:
            raise UnknownName(f"plan action '{name}' not in name map")
        for arg in args:
            if ("object", arg) not in names:
                raise UnknownName(f"plan argument '{arg}' not in name map")
        out.append((names[("schema", name)],
                    tuple(names[("object", a)] for a in args)))
    return tuple(out)


def anonymize_plan(steps: PlanSteps, nm: NameMap) -> PlanSteps:
    return _rename_steps(steps, nm.forward)


def deanonymize_plan(steps: PlanSteps, nm: NameMap) -> PlanSteps:
    """Map a plan over anonymized names back to the original names."""
    return _rename_steps(steps, nm.backward)


# -- persistence: one "category<TAB>original<TAB>anonymous" line per entry ---


def save_name_map(nm: NameMap, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for (cat, old), new in sorted(nm.forward.items()):
            fh.write(f"{cat}\t{old}\t{new}\n")


def load_name_map(path: str) -> NameMap:
    forward: dict[tuple[str, str], str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            cat, old, new = line.split("\t")
            if cat not in NameMap.CATEGORIES:
                raise PddlError(f"bad name map category '{cat}'")
            forward[(cat, old)] = new
    backward = {(cat, new): old for (cat, old), new in forward.items()}
    return NameMap(forward, backward)
