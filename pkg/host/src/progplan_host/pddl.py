"""Small, self-contained reader for the PDDL context the host hands to
loaded programs: the type tree, the typed object list and the goal.

This is intentionally independent of the planner's front end; the host
only ever receives files the planner already validated, so unknown
sections are skipped rather than rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class PddlReadError(Exception):
    pass


def _strip_comments(text: str) -> str:
    return "\n".join(line.split(";", 1)[0] for line in text.splitlines())


def parse_sexp(text: str):
    """Parse s-expressions into nested lists of lower-case strings."""
    tokens = _strip_comments(text).replace("(", " ( ").replace(")", " ) ").split()
    if not tokens:
        raise PddlReadError("empty input")

    def read(i: int):
        if tokens[i] == "(":
            items = []
            i += 1
            while i < len(tokens) and tokens[i] != ")":
                item, i = read(i)
                items.append(item)
            if i >= len(tokens):
                raise PddlReadError("unbalanced parentheses")
            return items, i + 1
        return tokens[i].lower(), i + 1

    out = []
    i = 0
    while i < len(tokens):
        node, i = read(i)
        out.append(node)
    return out


def _typed_pairs(tokens: list) -> list[tuple[str, str]]:
    """Decode ``n1 n2 - type n3 ...`` into (name, type) pairs."""
    pairs: list[tuple[str, str]] = []
    pending: list[str] = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok == "-":
            typ = tokens[i + 1]
            pairs.extend((name, typ) for name in pending)
            pending = []
            i += 2
        else:
            pending.append(tok)
            i += 1
    pairs.extend((name, "object") for name in pending)
    return pairs


@dataclass
class Context:
    """Everything a generated program may query about its problem."""

    type_parents: dict[str, str] = field(default_factory=dict)
    objects: dict[str, str] = field(default_factory=dict)
    goal_pos: frozenset[tuple[str, ...]] = frozenset()
    goal_neg: frozenset[tuple[str, ...]] = frozenset()

    def objects_of_type(self, type_name: str) -> list[str]:
        out = []
        for name, typ in self.objects.items():
            cur = typ
            seen = set()  # guards against malformed parent cycles
            while True:
                if cur == type_name:
                    out.append(name)
                    break
                if cur == "object" or cur in seen:
                    break
                seen.add(cur)
                cur = self.type_parents.get(cur, "object")
        return out


def read_context(domain_text: str, problem_text: str) -> Context:
    ctx = Context()
    domain = parse_sexp(domain_text)[0]
    for section in domain:
        if isinstance(section, list) and section and section[0] == ":types":
            ctx.type_parents = dict(_typed_pairs(section[1:]))

    problem = parse_sexp(problem_text)[0]
    goal_pos: set[tuple[str, ...]] = set()
    goal_neg: set[tuple[str, ...]] = set()
    for section in problem:
        if not isinstance(section, list) or not section:
            continue
        if section[0] == ":objects":
            ctx.objects = dict(_typed_pairs(section[1:]))
        elif section[0] == ":goal":
            expr = section[1]
            literals = expr[1:] if expr and expr[0] == "and" else [expr]
            for lit in literals:
                if lit and lit[0] == "not":
                    goal_neg.add(tuple(lit[1]))
                else:
                    goal_pos.add(tuple(lit))
    ctx.goal_pos = frozenset(goal_pos)
    ctx.goal_neg = frozenset(goal_neg)
    return ctx
