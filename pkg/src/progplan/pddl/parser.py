"""Recursive-descent parser for the typed-STRIPS PDDL fragment.

Accepted requirement flags: :strips :typing :negative-preconditions
:equality. Numeric fluents, conditional effects, quantifiers and
disjunctive preconditions are recognized only to be rejected with an
UnsupportedFeature diagnostic. Identifiers are case-insensitive and
canonicalized to lower case; ";" starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

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
    PddlError,
    PrecondItem,
    PredicateDecl,
    Problem,
    TypedName,
    TypeMismatch,
    UnknownObject,
    UnknownPredicate,
    UnknownType,
    UnknownVariable,
)

ACCEPTED_REQUIREMENTS = frozenset(
    {"strips", "typing", "negative-preconditions", "equality"}
)

_NUMERIC_HEADS = frozenset(
    {">=", "<=", ">", "<", "increase", "decrease", "assign", "scale-up", "scale-down"}
)
_UNSUPPORTED_SECTIONS = {
    "functions": "numeric fluent",
    "constants": "domain constants",
    "derived": "derived predicates",
    "axioms": "axioms",
    "metric": "metric optimization",
    "length": "length specification",
}


class ParseError(PddlError):
    """Syntax error with 1-based line and 0-based column position."""

    def __init__(self, line: int, col: int, expected: str, got: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        self.got = got
        detail = f", got {got}" if got else ""
        super().__init__(f"line {line}, col {col}: expected {expected}{detail}")


class UnsupportedFeature(PddlError):
    """A recognized PDDL construct outside the supported fragment."""

    def __init__(self, construct: str, detail: str = ""):
        self.construct = construct
        msg = construct if not detail else f"{construct}: {detail}"
        super().__init__(f"unsupported feature: {msg}")


# -- tokenizer ---------------------------------------------------------------

_NAME_RE = re.compile(r"[a-zA-Z0-9_\-]+")
_OP_RE = re.compile(r">=|<=|=|>|<")


@dataclass(frozen=True)
class _Token:
    kind: str  # '(' ')' 'name' 'var' 'op' 'eof'
    value: str
    line: int
    col: int


def tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, bol = 0, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
            bol = i
            continue
        if ch in " \t\r":
            i += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        col = i - bol
        if ch in "()":
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            continue
        if ch == "?":
            m = _NAME_RE.match(text, i + 1)
            if not m:
                raise ParseError(line, col, "variable name after '?'")
            tokens.append(_Token("var", "?" + m.group(0).lower(), line, col))
            i = m.end()
            continue
        if ch == ":":
            m = _NAME_RE.match(text, i + 1)
            if not m:
                raise ParseError(line, col, "keyword after ':'")
            tokens.append(_Token("name", ":" + m.group(0).lower(), line, col))
            i = m.end()
            continue
        m = _OP_RE.match(text, i)
        if m:
            tokens.append(_Token("op", m.group(0), line, col))
            i = m.end()
            continue
        m = _NAME_RE.match(text, i)
        if m:
            tokens.append(_Token("name", m.group(0).lower(), line, col))
            i = m.end()
            continue
        raise ParseError(line, col, "token", repr(ch))
    tokens.append(_Token("eof", "", line, (n - bol) if n else 0))
    return tokens


class _Stream:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, value: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value if value is not None else kind
            raise ParseError(tok.line, tok.col, f"'{want}'", repr(tok.value or tok.kind))
        return self.next()

    def at(self, kind: str, value: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (value is None or tok.value == value)


# -- shared pieces -----------------------------------------------------------


def _parse_typed_list(ts: _Stream, kind: str) -> list[TypedName]:
    """Parse ``n1 n2 - type n3 ...`` until ')'. kind is 'var' or 'name'."""
    out: list[TypedName] = []
    pending: list[_Token] = []
    while not ts.at(")"):
        if ts.at("name", "-"):
            ts.next()
            tok = ts.peek()
            if tok.kind != "name":
                raise ParseError(tok.line, tok.col, "type name", repr(tok.value))
            typ = ts.next().value
            if not pending:
                raise ParseError(tok.line, tok.col, f"{kind} before '-'")
            out.extend(TypedName(p.value, typ) for p in pending)
            pending = []
        elif ts.at(kind):
            pending.append(ts.next())
        else:
            tok = ts.peek()
            raise ParseError(tok.line, tok.col, f"{kind} or ')'", repr(tok.value or tok.kind))
    out.extend(TypedName(p.value) for p in pending)
    return out


def _parse_name_args(ts: _Stream, allow_vars: bool) -> tuple[str, ...]:
    args: list[str] = []
    while not ts.at(")"):
        tok = ts.peek()
        if tok.kind == "(":
            raise UnsupportedFeature("numeric fluent", "function term in atom")
        if tok.kind == "var":
            if not allow_vars:
                raise ParseError(tok.line, tok.col, "object name", tok.value)
            args.append(ts.next().value)
        elif tok.kind == "name":
            args.append(ts.next().value)
        else:
            raise ParseError(tok.line, tok.col, "argument or ')'", repr(tok.value or tok.kind))
    ts.expect(")")
    return tuple(args)


def _head(ts: _Stream) -> _Token:
    """Peek the head token just after an already-consumed '('."""
    return ts.peek()


def _parse_literal_or_eq(ts: _Stream, allow_vars: bool, allow_negation: bool,
                         allow_equality: bool) -> PrecondItem:
    """Parse one literal starting at '('. Rejects non-fragment constructs."""
    ts.expect("(")
    tok = _head(ts)
    if tok.kind == "op":
        if tok.value != "=":
            raise UnsupportedFeature("numeric fluent", f"comparison '{tok.value}'")
        ts.next()
        if ts.at("("):
            raise UnsupportedFeature("numeric fluent", "function term in '='")
        if not allow_equality:
            raise UnsupportedFeature("numeric fluent", "'=' outside preconditions")
        left = ts.next()
        if ts.at("("):
            raise UnsupportedFeature("numeric fluent", "function term in '='")
        right = ts.next()
        ts.expect(")")
        return Equality(left.value, right.value)
    if tok.kind != "name":
        raise ParseError(tok.line, tok.col, "predicate name", repr(tok.value or tok.kind))
    head = tok.value
    if head in _NUMERIC_HEADS:
        raise UnsupportedFeature("numeric fluent", f"'{head}'")
    if head == "when":
        raise UnsupportedFeature("conditional effect", "'when'")
    if head in ("forall", "exists"):
        raise UnsupportedFeature("quantifier", f"'{head}'")
    if head in ("or", "imply"):
        raise UnsupportedFeature("disjunctive precondition", f"'{head}'")
    if head == "not":
        if not allow_negation:
            raise UnsupportedFeature("negated literal", "'not' not allowed here")
        ts.next()
        inner = _parse_literal_or_eq(ts, allow_vars, allow_negation=False,
                                     allow_equality=allow_equality)
        ts.expect(")")
        if isinstance(inner, Equality):
            return Equality(inner.left, inner.right, negated=True)
        return Literal(inner.atom, negated=True)
    ts.next()
    args = _parse_name_args(ts, allow_vars)
    return Literal(Atom(head, args))


def _parse_conjunction(ts: _Stream, allow_vars: bool, allow_equality: bool) -> list[PrecondItem]:
    """Parse ``(and lit*)`` or a single literal."""
    ts.expect("(")
    if ts.at("name", "and"):
        ts.next()
        items: list[PrecondItem] = []
        while not ts.at(")"):
            items.append(_parse_literal_or_eq(ts, allow_vars, True, allow_equality))
        ts.expect(")")
        return items
    if ts.at(")"):  # empty "()" conjunction
        ts.next()
        return []
    # single literal: re-enter with the '(' we already consumed
    ts.pos -= 1
    return [_parse_literal_or_eq(ts, allow_vars, True, allow_equality)]


# -- domain ------------------------------------------------------------------


def parse_domain(text: str) -> Domain:
    """Parse a domain file and validate the fragment's invariants."""
    ts = _Stream(tokenize(text))
    ts.expect("(")
    ts.expect("name", "define")
    ts.expect("(")
    ts.expect("name", "domain")
    name = ts.expect("name").value
    ts.expect(")")

    requirements: list[str] = []
    types: list[tuple[str, str]] = []
    predicates: list[PredicateDecl] = []
    schemas: list[ActionSchema] = []

    while not ts.at(")"):
        ts.expect("(")
        section = ts.expect("name").value
        if not section.startswith(":"):
            raise ParseError(ts.peek().line, ts.peek().col, "section keyword", section)
        key = section[1:]
        if key == "requirements":
            while not ts.at(")"):
                flag = ts.expect("name").value
                if not flag.startswith(":") or flag[1:] not in ACCEPTED_REQUIREMENTS:
                    raise UnsupportedFeature(f"requirement {flag}")
                requirements.append(flag[1:])
            ts.expect(")")
        elif key == "types":
            for tn in _parse_typed_list(ts, "name"):
                types.append((tn.name, tn.type))
            ts.expect(")")
        elif key == "predicates":
            while ts.at("("):
                ts.next()
                tok = ts.peek()
                if tok.kind != "name":
                    raise ParseError(tok.line, tok.col, "predicate name", repr(tok.value))
                pname = ts.next().value
                params = tuple(_parse_typed_list(ts, "var"))
                ts.expect(")")
                predicates.append(PredicateDecl(pname, params))
            ts.expect(")")
        elif key == "action":
            schemas.append(_parse_action(ts))
        elif key in _UNSUPPORTED_SECTIONS:
            raise UnsupportedFeature(_UNSUPPORTED_SECTIONS[key], f"':{key}'")
        else:
            raise UnsupportedFeature(f"section ':{key}'")
    ts.expect(")")
    ts.expect("eof")

    dom = Domain(name, tuple(types), tuple(predicates), tuple(schemas),
                 tuple(requirements))
    _validate_domain(dom)
    return dom


def _parse_action(ts: _Stream) -> ActionSchema:
    name = ts.expect("name").value
    parameters: tuple[TypedName, ...] = ()
    precondition: list[PrecondItem] = []
    add: list[Atom] = []
    delete: list[Atom] = []
    seen_effect = False
    while not ts.at(")"):
        kw = ts.expect("name").value
        if kw == ":parameters":
            ts.expect("(")
            parameters = tuple(_parse_typed_list(ts, "var"))
            ts.expect(")")
        elif kw == ":precondition":
            precondition = _parse_conjunction(ts, allow_vars=True, allow_equality=True)
        elif kw == ":effect":
            seen_effect = True
            for item in _parse_conjunction(ts, allow_vars=True, allow_equality=False):
                assert isinstance(item, Literal)
                (delete if item.negated else add).append(item.atom)
        else:
            raise UnsupportedFeature(f"action part '{kw}'")
    ts.expect(")")
    if not seen_effect:
        tok = ts.peek()
        raise ParseError(tok.line, tok.col, ":effect in action " + name)
    return ActionSchema(name, parameters, tuple(precondition), tuple(add), tuple(delete))


def _validate_domain(dom: Domain) -> None:
    # type tree: unique names, parents declared or root, acyclic via the root
    declared = {ROOT_TYPE}
    for tname, _ in dom.types:
        if tname in declared:
            raise DuplicateName(f"type '{tname}' declared twice")
        declared.add(tname)
    parents = dict(dom.types)
    for tname, parent in dom.types:
        if parent not in declared:
            raise UnknownType(f"parent type '{parent}' of '{tname}' is not declared")
        seen = {tname}
        cur = parent
        while cur != ROOT_TYPE:
            if cur in seen:
                raise UnknownType(f"type cycle through '{tname}'")
            seen.add(cur)
            cur = parents[cur]

    pred_names = [p.name for p in dom.predicates]
    if len(set(pred_names)) != len(pred_names):
        raise DuplicateName("duplicate predicate name")
    schema_names = [s.name for s in dom.schemas]
    if len(set(schema_names)) != len(schema_names):
        raise DuplicateName("duplicate action name")
    categories = [set(declared), set(pred_names), set(schema_names)]
    for i in range(len(categories)):
        for j in range(i + 1, len(categories)):
            clash = categories[i] & categories[j]
            if clash:
                raise DuplicateName(f"name used in two categories: {sorted(clash)}")

    for pred in dom.predicates:
        for param in pred.params:
            if param.type not in declared:
                raise UnknownType(f"predicate '{pred.name}': unknown type '{param.type}'")
    for schema in dom.schemas:
        _validate_schema(dom, schema, declared)


def _validate_schema(dom: Domain, schema: ActionSchema, types: set[str]) -> None:
    params = {}
    for p in schema.parameters:
        if p.name in params:
            raise DuplicateName(f"action '{schema.name}': duplicate parameter {p.name}")
        if p.type not in types:
            raise UnknownType(f"action '{schema.name}': unknown type '{p.type}'")
        params[p.name] = p.type

    def check_atom(atom: Atom) -> None:
        decl = None
        for p in dom.predicates:
            if p.name == atom.predicate:
                decl = p
                break
        if decl is None:
            raise UnknownPredicate(
                f"action '{schema.name}': unknown predicate '{atom.predicate}'")
        if len(atom.args) != decl.arity:
            raise ArityMismatch(
                f"action '{schema.name}': {atom} has arity {len(atom.args)}, "
                f"declared {decl.arity}")
        for arg, dparam in zip(atom.args, decl.params):
            if not arg.startswith("?"):
                raise UnknownVariable(
                    f"action '{schema.name}': constant '{arg}' in schema atom "
                    "(fragment has no domain constants)")
            if arg not in params:
                raise UnknownVariable(
                    f"action '{schema.name}': variable {arg} not in parameters")
            if not dom.is_subtype(params[arg], dparam.type):
                raise TypeMismatch(
                    f"action '{schema.name}': {arg} has type {params[arg]}, "
                    f"predicate '{decl.name}' expects {dparam.type}")

    for item in schema.precondition:
        if isinstance(item, Equality):
            for side in (item.left, item.right):
                if not side.startswith("?") or side not in params:
                    raise UnknownVariable(
                        f"action '{schema.name}': equality over unknown term '{side}'")
        else:
            check_atom(item.atom)
    for atom in schema.add + schema.delete:
        check_atom(atom)
    _check_effect_conflict(schema)


def _check_effect_conflict(schema: ActionSchema) -> None:
    """Reject schemas whose add and delete sets can overlap after grounding."""
    forced_eq = [(e.left, e.right) for e in schema.equalities() if not e.negated]
    forced_neq = {frozenset((e.left, e.right))
                  for e in schema.equalities() if e.negated}

    def find(parent: dict[str, str], x: str) -> str:
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for added in schema.add:
        for deleted in schema.delete:
            if added.predicate != deleted.predicate:
                continue
            parent: dict[str, str] = {}
            for a, b in forced_eq:
                parent[find(parent, a)] = find(parent, b)
            ok = True
            for a, b in zip(added.args, deleted.args):
                parent[find(parent, a)] = find(parent, b)
            for pair in forced_neq:
                a, b = tuple(pair)
                if find(parent, a) == find(parent, b):
                    ok = False
                    break
            if ok:
                raise ConflictingEffects(
                    f"action '{schema.name}': {added} may be both added and deleted")


# -- problem -----------------------------------------------------------------


def parse_problem(text: str, dom: Domain) -> Problem:
    """Parse a problem file and validate all atoms against the domain."""
    ts = _Stream(tokenize(text))
    ts.expect("(")
    ts.expect("name", "define")
    ts.expect("(")
    ts.expect("name", "problem")
    name = ts.expect("name").value
    ts.expect(")")

    domain_name = ""
    objects: list[TypedName] = []
    init: list[Atom] = []
    goal: list[Literal] = []
    saw_goal = False

    while not ts.at(")"):
        ts.expect("(")
        section = ts.expect("name").value
        key = section[1:] if section.startswith(":") else section
        if key == "domain":
            domain_name = ts.expect("name").value
            ts.expect(")")
        elif key == "requirements":
            while not ts.at(")"):
                ts.next()
            ts.expect(")")
        elif key == "objects":
            objects = _parse_typed_list(ts, "name")
            ts.expect(")")
        elif key == "init":
            while ts.at("("):
                item = _parse_literal_or_eq(ts, allow_vars=False,
                                            allow_negation=False, allow_equality=False)
                assert isinstance(item, Literal)
                init.append(item.atom)
            ts.expect(")")
        elif key == "goal":
            saw_goal = True
            for item in _parse_conjunction(ts, allow_vars=False, allow_equality=False):
                assert isinstance(item, Literal)
                goal.append(item)
            ts.expect(")")
        elif key in _UNSUPPORTED_SECTIONS:
            raise UnsupportedFeature(_UNSUPPORTED_SECTIONS[key], f"':{key}'")
        else:
            raise UnsupportedFeature(f"section ':{key}'")
    ts.expect(")")
    ts.expect("eof")

    if domain_name != dom.name:
        raise PddlError(
            f"problem '{name}' is for domain '{domain_name}', not '{dom.name}'")
    if not goal:
        tok = ts.peek()
        if not saw_goal:
            raise ParseError(tok.line, tok.col, "(:goal ...) section")
        raise PddlError(f"problem '{name}': goal must be non-empty")

    prob = Problem(name, domain_name, tuple(objects), frozenset(init), tuple(goal))
    _validate_problem(dom, prob)
    return prob


def _validate_problem(dom: Domain, prob: Problem) -> None:
    type_names = set(dom.type_names())
    obj_types: dict[str, str] = {}
    for obj in prob.objects:
        if obj.name in obj_types:
            raise DuplicateName(f"object '{obj.name}' declared twice")
        if obj.type not in type_names:
            raise UnknownType(f"object '{obj.name}' has unknown type '{obj.type}'")
        obj_types[obj.name] = obj.type

    preds = {p.name: p for p in dom.predicates}

    def check_ground_atom(atom: Atom, where: str) -> None:
        decl = preds.get(atom.predicate)
        if decl is None:
            raise UnknownPredicate(f"{where}: unknown predicate in {atom}")
        if len(atom.args) != decl.arity:
            raise ArityMismatch(
                f"{where}: {atom} has arity {len(atom.args)}, declared {decl.arity}")
        for arg, dparam in zip(atom.args, decl.params):
            if arg not in obj_types:
                raise UnknownObject(f"{where}: unknown object '{arg}' in {atom}")
            if not dom.is_subtype(obj_types[arg], dparam.type):
                raise TypeMismatch(
                    f"{where}: '{arg}' has type {obj_types[arg]}, "
                    f"predicate '{decl.name}' expects {dparam.type}")

    for atom in prob.init:
        check_ground_atom(atom, "init")
    for lit in prob.goal:
        check_ground_atom(lit.atom, "goal")
