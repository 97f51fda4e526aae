"""Search modes: greedy best-first search on a value function, policy
rollout, and the dual-queue combination of both.

The dual-queue search keeps two priority queues ordered by heuristic
value: q_h holds all generated successors (FIFO tie-breaking), q_p
holds the states the policy prefers, with ties broken by depth (deepest
first, then FIFO) so that a policy making steady progress keeps
extending its own rollout instead of being starved by policy successors
of sideline states. Pops alternate strictly between the queues (falling
back to the non-empty one when the scheduled queue is empty, which
preserves completeness). After each pop the policy's successor of the
popped state is pushed to q_p; all successors are pushed to q_h.
States are marked visited when generated, goal tests happen at
generation time, and no state is ever expanded twice.
"""

from __future__ import annotations

import heapq
import random
import time
from dataclasses import dataclass, field
from enum import Enum

from .grounding import GroundAction, State, Task, applicable_actions, apply, is_goal
from .planio import PlanSteps
from .programs import PolicyFn, ValueFn, sound_action

ROLLOUT_STEP_FACTOR = 10
ROLLOUT_STEP_BASE = 1000


class Outcome(Enum):
    SOLVED = "solved"
    UNSOLVABLE = "unsolvable"
    FAILURE = "failure"  # rollout dead end: no applicable actions
    STEP_LIMIT = "step-limit"
    TIME_LIMIT = "time-limit"
    MEMORY_LIMIT = "memory-limit"


@dataclass
class ResourceLimits:
    time_limit_s: float | None = None
    max_expansions: int | None = None
    max_generations: int | None = None  # stands in for a memory budget
    max_steps: int | None = None        # rollout only; None = derived default
    seed: int = 0


@dataclass
class Stats:
    expansions: int = 0
    generations: int = 0
    evaluations: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class Plan:
    actions: tuple[GroundAction, ...]

    @property
    def cost(self) -> int:
        return sum(a.cost for a in self.actions)

    @property
    def steps(self) -> PlanSteps:
        return tuple((a.schema, a.args) for a in self.actions)

    def __len__(self) -> int:
        return len(self.actions)


@dataclass
class SearchResult:
    outcome: Outcome
    plan: Plan | None = None
    stats: Stats = field(default_factory=Stats)

    @property
    def solved(self) -> bool:
        return self.outcome is Outcome.SOLVED


@dataclass
class SearchNode:
    state: State
    parent: "SearchNode | None" = None
    action: GroundAction | None = None
    g: int = 0
    h: float = 0.0


def extract_plan(node: SearchNode) -> Plan:
    """Plan along the parent chain, in application order."""
    actions: list[GroundAction] = []
    while node.parent is not None:
        assert node.action is not None
        actions.append(node.action)
        node = node.parent
    actions.reverse()
    return Plan(tuple(actions))


class _Clock:
    def __init__(self, limit_s: float | None):
        self.start = time.monotonic()
        self.limit = limit_s

    def elapsed(self) -> float:
        return time.monotonic() - self.start

    def expired(self) -> bool:
        return self.limit is not None and self.elapsed() > self.limit


def gbfs(task: Task, h: ValueFn, limits: ResourceLimits | None = None,
         trace: list | None = None) -> SearchResult:
    """Greedy best-first search ordered by h, FIFO tie-breaking, goal
    test at generation time."""
    limits = limits or ResourceLimits()
    clock = _Clock(limits.time_limit_s)
    stats = Stats()

    root_state = task.initial_state
    if is_goal(task, root_state):
        stats.wall_time = clock.elapsed()
        return SearchResult(Outcome.SOLVED, Plan(()), stats)

    root = SearchNode(root_state)
    root.h = h.evaluate(task, root_state)
    stats.evaluations += 1

    counter = 0
    frontier: list[tuple[float, int, SearchNode]] = [(root.h, counter, root)]
    visited = {root_state}

    while frontier:
        if clock.expired():
            stats.wall_time = clock.elapsed()
            return SearchResult(Outcome.TIME_LIMIT, None, stats)
        if limits.max_expansions is not None and stats.expansions >= limits.max_expansions:
            stats.wall_time = clock.elapsed()
            return SearchResult(Outcome.STEP_LIMIT, None, stats)
        if limits.max_generations is not None and stats.generations >= limits.max_generations:
            stats.wall_time = clock.elapsed()
            return SearchResult(Outcome.MEMORY_LIMIT, None, stats)

        _, _, node = heapq.heappop(frontier)
        stats.expansions += 1
        if trace is not None:
            trace.append(("expand", node.state))

        for action in applicable_actions(task, node.state):
            succ = apply(task, node.state, action)
            stats.generations += 1
            if succ in visited:
                continue
            child = SearchNode(succ, node, action, node.g + action.cost)
            if is_goal(task, succ):
                stats.wall_time = clock.elapsed()
                return SearchResult(Outcome.SOLVED, extract_plan(child), stats)
            visited.add(succ)
            child.h = h.evaluate(task, succ)
            stats.evaluations += 1
            counter += 1
            heapq.heappush(frontier, (child.h, counter, child))

    stats.wall_time = clock.elapsed()
    return SearchResult(Outcome.UNSOLVABLE, None, stats)


def default_rollout_steps(task: Task) -> int:
    return ROLLOUT_STEP_FACTOR * (len(task.initial_state) + ROLLOUT_STEP_BASE)


def policy_rollout(task: Task, policy: PolicyFn,
                   limits: ResourceLimits | None = None) -> SearchResult:
    """Repeatedly apply the policy's (soundness-wrapped) action choice
    from the initial state until a goal or a dead end. Revisited states
    are allowed; only the step and time limits stop a looping policy."""
    limits = limits or ResourceLimits()
    clock = _Clock(limits.time_limit_s)
    stats = Stats()
    rng = random.Random(getattr(policy, "seed", limits.seed))
    max_steps = limits.max_steps
    if max_steps is None:
        max_steps = default_rollout_steps(task)

    state = task.initial_state
    actions: list[GroundAction] = []
    while True:
        if is_goal(task, state):
            stats.wall_time = clock.elapsed()
            return SearchResult(Outcome.SOLVED, Plan(tuple(actions)), stats)
        if len(actions) >= max_steps:
            stats.wall_time = clock.elapsed()
            return SearchResult(Outcome.STEP_LIMIT, None, stats)
        if clock.expired():
            stats.wall_time = clock.elapsed()
            return SearchResult(Outcome.TIME_LIMIT, None, stats)
        apps = applicable_actions(task, state)
        if not apps:
            stats.wall_time = clock.elapsed()
            return SearchResult(Outcome.FAILURE, None, stats)
        action = sound_action(policy, task, state, apps, rng)
        stats.evaluations += 1
        state = apply(task, state, action)
        stats.expansions += 1
        stats.generations += 1
        actions.append(action)


def dual_queue_gbfs(task: Task, h: ValueFn, policy: PolicyFn,
                    limits: ResourceLimits | None = None,
                    trace: list | None = None) -> SearchResult:
    """GBFS over two queues: heuristic successors and policy-preferred
    states, popped in strict alternation."""
    limits = limits or ResourceLimits()
    clock = _Clock(limits.time_limit_s)
    stats = Stats()
    rng = random.Random(getattr(policy, "seed", limits.seed))

    root_state = task.initial_state
    if is_goal(task, root_state):
        stats.wall_time = clock.elapsed()
        return SearchResult(Outcome.SOLVED, Plan(()), stats)

    root = SearchNode(root_state)
    root.h = h.evaluate(task, root_state)
    stats.evaluations += 1

    counter = 0
    q_h: list[tuple[float, int, SearchNode]] = [(root.h, counter, root)]
    q_p: list[tuple[float, int, int, SearchNode]] = []  # (h, -g, counter, node)
    visited = {root_state}
    pop_h = True

    while q_h or q_p:
        if clock.expired():
            stats.wall_time = clock.elapsed()
            return SearchResult(Outcome.TIME_LIMIT, None, stats)
        if limits.max_expansions is not None and stats.expansions >= limits.max_expansions:
            stats.wall_time = clock.elapsed()
            return SearchResult(Outcome.STEP_LIMIT, None, stats)
        if limits.max_generations is not None and stats.generations >= limits.max_generations:
            stats.wall_time = clock.elapsed()
            return SearchResult(Outcome.MEMORY_LIMIT, None, stats)

        use_h = pop_h if (q_h if pop_h else q_p) else not pop_h
        if trace is not None:
            trace.append(("pop", "h" if use_h else "p", len(q_h), len(q_p)))
        if use_h:
            _, _, node = heapq.heappop(q_h)
        else:
            _, _, _, node = heapq.heappop(q_p)
        pop_h = not pop_h
        stats.expansions += 1

        apps = applicable_actions(task, node.state)

        # policy-preferred successor goes to q_p (same visited discipline)
        if apps:
            action = sound_action(policy, task, node.state, apps, rng)
            stats.evaluations += 1
            succ = apply(task, node.state, action)
            stats.generations += 1
            if succ not in visited:
                child = SearchNode(succ, node, action, node.g + action.cost)
                if is_goal(task, succ):
                    stats.wall_time = clock.elapsed()
                    return SearchResult(Outcome.SOLVED, extract_plan(child), stats)
                visited.add(succ)
                child.h = h.evaluate(task, succ)
                stats.evaluations += 1
                counter += 1
                heapq.heappush(q_p, (child.h, -child.g, counter, child))

        for action in apps:
            succ = apply(task, node.state, action)
            stats.generations += 1
            if succ in visited:
                continue
            child = SearchNode(succ, node, action, node.g + action.cost)
            if is_goal(task, succ):
                stats.wall_time = clock.elapsed()
                return SearchResult(Outcome.SOLVED, extract_plan(child), stats)
            visited.add(succ)
            child.h = h.evaluate(task, succ)
            stats.evaluations += 1
            counter += 1
            heapq.heappush(q_h, (child.h, counter, child))

    stats.wall_time = clock.elapsed()
    return SearchResult(Outcome.UNSOLVABLE, None, stats)
