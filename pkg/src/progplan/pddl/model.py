"""Core data model for the supported PDDL fragment.

The fragment is typed STRIPS plus negative preconditions and equality
literals. All structures are immutable; identifiers are lower-cased at
parse time, so model-level comparisons are plain string comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field

ROOT_TYPE = "object"


class PddlError(Exception):
    """Base class for all PDDL front-end errors."""


class UnknownPredicate(PddlError):
    pass


class UnknownObject(PddlError):
    pass


class UnknownType(PddlError):
    pass


class UnknownVariable(PddlError):
    pass


class ArityMismatch(PddlError):
    pass


class TypeMismatch(PddlError):
    pass


class DuplicateName(PddlError):
    pass


class ConflictingEffects(PddlError):
    """An add effect can unify with a delete effect of the same schema."""


@dataclass(frozen=True, order=True)
class Atom:
    """A predicate applied to arguments (variables or object names)."""

    predicate: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        if not self.args:
            return f"({self.predicate})"
        return f"({self.predicate} {' '.join(self.args)})"


@dataclass(frozen=True)
class Literal:
    """An atom or its negation."""

    atom: Atom
    negated: bool = False

    def __str__(self) -> str:
        return f"(not {self.atom})" if self.negated else str(self.atom)


@dataclass(frozen=True)
class Equality:
    """An equality (= a b) or inequality (not (= a b)) literal."""

    left: str
    right: str
    negated: bool = False

    def __str__(self) -> str:
        base = f"(= {self.left} {self.right})"
        return f"(not {base})" if self.negated else base


# A precondition is an ordered conjunction of these.
PrecondItem = Literal | Equality


@dataclass(frozen=True)
class TypedName:
    """A variable or object name with its declared type."""

    name: str
    type: str = ROOT_TYPE


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    params: tuple[TypedName, ...]

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: tuple[TypedName, ...]
    precondition: tuple[PrecondItem, ...]
    add: tuple[Atom, ...]
    delete: tuple[Atom, ...]

    def positive_preconditions(self) -> tuple[Atom, ...]:
        return tuple(
            p.atom for p in self.precondition
            if isinstance(p, Literal) and not p.negated
        )

    def negative_preconditions(self) -> tuple[Atom, ...]:
        return tuple(
            p.atom for p in self.precondition
            if isinstance(p, Literal) and p.negated
        )

    def equalities(self) -> tuple[Equality, ...]:
        return tuple(p for p in self.precondition if isinstance(p, Equality))


@dataclass(frozen=True)
class Domain:
    name: str
    types: tuple[tuple[str, str], ...]  # (type, parent) in declaration order
    predicates: tuple[PredicateDecl, ...]
    schemas: tuple[ActionSchema, ...]
    requirements: tuple[str, ...] = ()

    def predicate(self, name: str) -> PredicateDecl:
        for p in self.predicates:
            if p.name == name:
                return p
        raise UnknownPredicate(f"unknown predicate '{name}'")

    def schema(self, name: str) -> ActionSchema:
        for s in self.schemas:
            if s.name == name:
                return s
        raise UnknownObject(f"unknown action schema '{name}'")

    def type_names(self) -> tuple[str, ...]:
        return (ROOT_TYPE,) + tuple(t for t, _ in self.types)

    def supertypes(self, type_name: str) -> tuple[str, ...]:
        """All ancestors of a type, from itself up to the root."""
        parents = dict(self.types)
        chain = [type_name]
        while chain[-1] != ROOT_TYPE:
            chain.append(parents.get(chain[-1], ROOT_TYPE))
        return tuple(chain)

    def is_subtype(self, sub: str, sup: str) -> bool:
        return sup in self.supertypes(sub)


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: tuple[TypedName, ...]  # declaration order
    init: frozenset[Atom]
    goal: tuple[Literal, ...]

    def object_type(self, name: str) -> str:
        for obj in self.objects:
            if obj.name == name:
                return obj.type
        raise UnknownObject(f"unknown object '{name}'")


@dataclass(frozen=True)
class NameMap:
    """Per-category bijection between original and anonymous identifiers.

    Keys are (category, name) pairs; categories are "type", "predicate",
    "schema" and "object" ("function" is reserved but unused, since the
    fragment has no numeric functions).
    """

    forward: dict[tuple[str, str], str] = field(default_factory=dict)
    backward: dict[tuple[str, str], str] = field(default_factory=dict)

    CATEGORIES = ("type", "predicate", "schema", "object", "function")

    def rename(self, category: str, name: str) -> str:
        return self.forward[(category, name)]

    def original(self, category: str, name: str) -> str:
        return self.backward[(category, name)]
