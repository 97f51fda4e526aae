"""States, applicable-action generation and successor computation.

Applicable actions are computed by joining schema preconditions against
per-predicate indices of the current state's atoms, in the spirit of
evaluating conjunctive database queries; small tasks are fully grounded
up front instead. Action costs are fixed at 1 (the fragment has no cost
syntax), so plan cost equals plan length.

Ordering is deterministic and name-invariant: actions are returned in
schema declaration order, then by the declaration index of their
argument objects. Renaming identifiers therefore never changes the
order in which actions are generated.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator

from .pddl.model import ActionSchema, Atom, Domain, PddlError, Problem

GROUND_ALL_LIMIT = 10**6  # max candidate substitutions for upfront grounding


class Inapplicable(PddlError):
    """Applying an action in a state where some precondition fails."""

    def __init__(self, action: "GroundAction", literal: str):
        self.action = action
        self.literal = literal
        super().__init__(f"{action.name}: violated {literal}")


class State:
    """An immutable set of ground atoms with a canonical sorted form.

    Hashes are derived from the canonical byte encoding, so they are
    stable across processes and runs.
    """

    __slots__ = ("atoms", "_canonical", "_hash")

    def __init__(self, atoms: Iterable[Atom]):
        self.atoms = frozenset(atoms)
        self._canonical: tuple[Atom, ...] | None = None
        self._hash: int | None = None

    @property
    def canonical(self) -> tuple[Atom, ...]:
        if self._canonical is None:
            self._canonical = tuple(sorted(self.atoms))
        return self._canonical

    def encode(self) -> bytes:
        return b"\n".join(
            b"\x1f".join(s.encode() for s in (a.predicate,) + a.args)
            for a in self.canonical)

    def __contains__(self, atom: Atom) -> bool:
        return atom in self.atoms

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.canonical)

    def __len__(self) -> int:
        return len(self.atoms)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, State) and self.atoms == other.atoms

    def __hash__(self) -> int:
        if self._hash is None:
            digest = hashlib.blake2b(self.encode(), digest_size=8).digest()
            self._hash = int.from_bytes(digest, "big")
        return self._hash

    def __repr__(self) -> str:
        return f"State({len(self.atoms)} atoms)"


@dataclass(frozen=True)
class GroundAction:
    schema: str
    args: tuple[str, ...]
    pre_pos: frozenset[Atom]
    pre_neg: frozenset[Atom]
    add: frozenset[Atom]
    delete: frozenset[Atom]
    cost: int = 1

    @property
    def name(self) -> str:
        if not self.args:
            return f"({self.schema})"
        return f"({self.schema} {' '.join(self.args)})"

    def __str__(self) -> str:
        return self.name


@dataclass
class _PreparedSchema:
    """Schema preprocessed for matching: slots, merged equalities and
    the positive-literal join order."""

    schema: ActionSchema
    index: int
    param_slots: dict[str, int]           # variable -> slot (after eq merging)
    emit_slots: tuple[int, ...]           # slot per declared parameter
    slot_types: tuple[str, ...]           # most specific type per slot
    positives: tuple[tuple[str, tuple[int, ...]], ...]
    negatives: tuple[tuple[str, tuple[int, ...]], ...]
    inequalities: tuple[tuple[int, int], ...]
    add: tuple[tuple[str, tuple[int, ...]], ...]
    delete: tuple[tuple[str, tuple[int, ...]], ...]


class Task:
    """A ground planning task: domain + problem with matching indices."""

    def __init__(self, domain: Domain, problem: Problem,
                 ground_all_limit: int = GROUND_ALL_LIMIT):
        if problem.domain_name != domain.name:
            raise PddlError(
                f"problem '{problem.name}' does not belong to domain '{domain.name}'")
        self.domain = domain
        self.problem = problem

        self.obj_index: dict[str, int] = {
            o.name: i for i, o in enumerate(problem.objects)}
        self.obj_types: dict[str, str] = {o.name: o.type for o in problem.objects}

        closure: dict[str, set[str]] = {t: {t} for t in domain.type_names()}
        for tname, _ in domain.types:
            for sup in domain.supertypes(tname):
                closure[sup].add(tname)
        self._type_closure: dict[str, frozenset[str]] = {
            t: frozenset(subs) for t, subs in closure.items()}
        self.objects_by_type: dict[str, tuple[str, ...]] = {
            t: tuple(o.name for o in problem.objects if o.type in subs)
            for t, subs in closure.items()}

        effect_preds = {a.predicate for s in domain.schemas
                        for a in s.add + s.delete}
        self.static_predicates = frozenset(
            p.name for p in domain.predicates if p.name not in effect_preds)
        self.static_atoms = frozenset(
            a for a in problem.init if a.predicate in self.static_predicates)

        self.goal_pos = frozenset(l.atom for l in problem.goal if not l.negated)
        self.goal_neg = frozenset(l.atom for l in problem.goal if l.negated)

        self.initial_state = State(problem.init)
        self._prepared = [self._prepare(s, i)
                          for i, s in enumerate(domain.schemas)]

        self._grounded: tuple[GroundAction, ...] | None = None
        if self._candidate_count() <= ground_all_limit:
            self._grounded = tuple(self._ground_all())

    # -- construction helpers -------------------------------------------

    def _prepare(self, schema: ActionSchema, index: int) -> _PreparedSchema:
        # union-find over parameters for positive equality literals
        parent = {p.name: p.name for p in schema.parameters}

        def find(x: str) -> str:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for eq in schema.equalities():
            if not eq.negated:
                parent[find(eq.left)] = find(eq.right)

        roots: list[str] = []
        slot_of: dict[str, int] = {}
        for p in schema.parameters:
            r = find(p.name)
            if r not in slot_of:
                slot_of[r] = len(roots)
                roots.append(r)
        param_slots = {p.name: slot_of[find(p.name)] for p in schema.parameters}

        # a merged slot must satisfy every participating parameter's type
        slot_types: list[str] = [""] * len(roots)
        for p in schema.parameters:
            slot = param_slots[p.name]
            cur = slot_types[slot]
            if not cur or self.domain.is_subtype(p.type, cur):
                slot_types[slot] = p.type
            elif not self.domain.is_subtype(cur, p.type):
                # incompatible branches: no object can satisfy both
                slot_types[slot] = "\x00none"

        def atom_slots(atom: Atom) -> tuple[str, tuple[int, ...]]:
            return atom.predicate, tuple(param_slots[a] for a in atom.args)

        inequalities = []
        for eq in schema.equalities():
            if eq.negated:
                inequalities.append((param_slots[eq.left], param_slots[eq.right]))

        return _PreparedSchema(
            schema=schema,
            index=index,
            param_slots=param_slots,
            emit_slots=tuple(param_slots[p.name] for p in schema.parameters),
            slot_types=tuple(slot_types),
            positives=tuple(atom_slots(a) for a in schema.positive_preconditions()),
            negatives=tuple(atom_slots(a) for a in schema.negative_preconditions()),
            inequalities=tuple(inequalities),
            add=tuple(atom_slots(a) for a in schema.add),
            delete=tuple(atom_slots(a) for a in schema.delete),
        )

    def _candidate_count(self) -> int:
        total = 0
        for schema in self.domain.schemas:
            count = 1
            for p in schema.parameters:
                count *= len(self.objects_by_type.get(p.type, ()))
                if count > GROUND_ALL_LIMIT:
                    break
            total += count
            if total > GROUND_ALL_LIMIT:
                break
        return total

    # -- matching --------------------------------------------------------

    def _match(self, prep: _PreparedSchema, atoms_by_pred: dict[str, list[Atom]],
               statics_only: bool) -> Iterator[tuple[str, ...]]:
        """Yield argument bindings for one schema against an atom index.

        With statics_only, dynamic preconditions are ignored: this is
        the relaxed match used for upfront grounding. Otherwise all
        preconditions are enforced against the given index.
        """
        nslots = len(prep.slot_types)
        closure = self._type_closure
        obj_types = self.obj_types
        bindings: list[list[str | None]] = [[None] * nslots]

        for pred, slots in prep.positives:
            if statics_only and pred not in self.static_predicates:
                continue
            candidates = atoms_by_pred.get(pred, [])
            new_bindings: list[list[str | None]] = []
            for b in bindings:
                for atom in candidates:
                    b2 = b
                    copied = False
                    for slot, obj in zip(slots, atom.args):
                        bound = b2[slot]
                        if bound is None:
                            allowed = closure.get(prep.slot_types[slot])
                            if allowed is None or obj_types[obj] not in allowed:
                                b2 = None
                                break
                            if not copied:
                                b2 = list(b2)
                                copied = True
                            b2[slot] = obj
                        elif bound != obj:
                            b2 = None
                            break
                    if b2 is not None:
                        new_bindings.append(b2)
            bindings = new_bindings
            if not bindings:
                return

        for b in bindings:
            open_slots = [i for i in range(nslots) if b[i] is None]
            pools = [self.objects_by_type.get(prep.slot_types[i], ())
                     for i in open_slots]
            for combo in product(*pools):
                values = list(b)
                for slot, obj in zip(open_slots, combo):
                    values[slot] = obj
                if any(values[i] == values[j] for i, j in prep.inequalities):
                    continue
                violated = False
                for pred, slots in prep.negatives:
                    if statics_only:
                        if pred not in self.static_predicates:
                            continue
                        atom = Atom(pred, tuple(values[s] for s in slots))
                        violated = atom in self.static_atoms
                    else:
                        atom = Atom(pred, tuple(values[s] for s in slots))
                        violated = atom in atoms_by_pred.get(pred, _EMPTY_MARK)
                    if violated:
                        break
                if violated:
                    continue
                yield tuple(values[s] for s in prep.emit_slots)

    def _instantiate(self, prep: _PreparedSchema,
                     args: tuple[str, ...]) -> GroundAction:
        values = [""] * len(prep.slot_types)
        for slot, obj in zip(prep.emit_slots, args):
            values[slot] = obj

        def ground(items: tuple[tuple[str, tuple[int, ...]], ...]) -> frozenset[Atom]:
            return frozenset(Atom(p, tuple(values[s] for s in slots))
                             for p, slots in items)

        return GroundAction(
            schema=prep.schema.name,
            args=args,
            pre_pos=ground(prep.positives),
            pre_neg=ground(prep.negatives),
            add=ground(prep.add),
            delete=ground(prep.delete),
        )

    def _ground_all(self) -> list[GroundAction]:
        index: dict[str, list[Atom]] = {}
        for atom in self.static_atoms:
            index.setdefault(atom.predicate, []).append(atom)
        actions: list[GroundAction] = []
        for prep in self._prepared:
            matches = sorted(self._match(prep, index, statics_only=True),
                             key=lambda args: tuple(self.obj_index[a] for a in args))
            actions.extend(self._instantiate(prep, args) for args in matches)
        return actions

    def _arg_order(self, action: GroundAction) -> tuple[int, ...]:
        return tuple(self.obj_index[a] for a in action.args)

    @property
    def upfront_grounded(self) -> bool:
        return self._grounded is not None


_EMPTY_MARK: tuple = ()


def build_task(dom: Domain, prob: Problem, **kwargs) -> Task:
    return Task(dom, prob, **kwargs)


def applicable_actions(task: Task, state: State) -> list[GroundAction]:
    """Exactly the ground actions applicable in state, in deterministic
    (schema declaration, then object declaration index) order."""
    if task._grounded is not None:
        return [a for a in task._grounded
                if a.pre_pos <= state.atoms and not (a.pre_neg & state.atoms)]
    index: dict[str, list[Atom]] = {}
    for atom in state.atoms:
        index.setdefault(atom.predicate, []).append(atom)
    out: list[GroundAction] = []
    for prep in task._prepared:
        matches = sorted(set(task._match(prep, index, statics_only=False)),
                         key=lambda args: tuple(task.obj_index[a] for a in args))
        out.extend(task._instantiate(prep, args) for args in matches)
    return out


def apply(task: Task, state: State, action: GroundAction) -> State:
    """Successor state, or raise Inapplicable (the undefined-transition case)."""
    for atom in action.pre_pos:
        if atom not in state.atoms:
            raise Inapplicable(action, f"missing {atom}")
    for atom in action.pre_neg:
        if atom in state.atoms:
            raise Inapplicable(action, f"present {atom}")
    return State((state.atoms - action.delete) | action.add)


def is_applicable(task: Task, state: State, action: GroundAction) -> bool:
    return action.pre_pos <= state.atoms and not (action.pre_neg & state.atoms)


def is_goal(task: Task, state: State) -> bool:
    return task.goal_pos <= state.atoms and not (task.goal_neg & state.atoms)
