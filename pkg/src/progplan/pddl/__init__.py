"""PDDL front end: model, parser, printer and anonymizer."""

from .anonymizer import (
    UnknownName,
    anonymize,
    anonymize_plan,
    build_name_map,
    deanonymize,
    deanonymize_plan,
    load_name_map,
    save_name_map,
)
from .model import (
    ROOT_TYPE,
    ActionSchema,
    ArityMismatch,
    Atom,
    ConflictingEffects,
    Domain,
    DuplicateName,
    Equality,
    Literal,
    NameMap,
    PddlError,
    PredicateDecl,
    Problem,
    TypedName,
    TypeMismatch,
    UnknownObject,
    UnknownPredicate,
    UnknownType,
    UnknownVariable,
)
from .parser import ParseError, UnsupportedFeature, parse_domain, parse_problem
from .printer import print_domain, print_pddl, print_problem

__all__ = [
    "ROOT_TYPE",
    "ActionSchema",
    "ArityMismatch",
    "Atom",
    "ConflictingEffects",
    "Domain",
    "DuplicateName",
    "Equality",
    "Literal",
    "NameMap",
    "ParseError",
    "PddlError",
    "PredicateDecl",
    "Problem",
    "TypedName",
    "TypeMismatch",
    "UnknownName",
    "UnknownObject",
    "UnknownPredicate",
    "UnknownType",
    "UnknownVariable",
    "UnsupportedFeature",
    "anonymize",
    "anonymize_plan",
    "build_name_map",
    "deanonymize",
    "deanonymize_plan",
    "load_name_map",
    "parse_domain",
    "parse_problem",
    "print_domain",
    "print_pddl",
    "print_problem",
    "save_name_map",
]
