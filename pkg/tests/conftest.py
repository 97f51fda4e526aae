import sys
from importlib import resources
from pathlib import Path

import pytest

from progplan.grounding import build_task
from progplan.pddl import parse_domain, parse_problem
from progplan.programs import PolicyFn, ValueFn, safe_value

TESTS_DIR = Path(__file__).parent
FIXTURES_DIR = TESTS_DIR / "fixtures"
STUB_HOST = TESTS_DIR / "stub_host.py"


def stub_host_cmd() -> tuple[str, ...]:
    return (sys.executable, str(STUB_HOST))


@pytest.fixture(scope="session")
def host_cmd():
    return stub_host_cmd()


# -- fixture domains ----------------------------------------------------------


def gripper_domain_text() -> str:
    return resources.files("progplan.data.gripper").joinpath("domain.pddl") \
        .read_text(encoding="utf-8")


def fixture_domain_text(name: str) -> str:
    return (FIXTURES_DIR / name / "domain.pddl").read_text(encoding="utf-8")


def gripper_problem_text(n_balls: int, name: str | None = None,
                         goal_room: str = "roomb",
                         unsolvable: bool = False) -> str:
    name = name or f"gripper-{n_balls}"
    balls = [f"ball{i}" for i in range(1, n_balls + 1)]
    objects = ["rooma - room", "roomb - room"]
    objects += [f"{b} - ball" for b in balls]
    objects += ["left - gripper", "right - gripper"]
    init = ["(at-robby rooma)"] + [f"(at {b} rooma)" for b in balls]
    init += ["(free left)", "(free right)"]
    if unsolvable:
        # a ball cannot be on the floor and carried at the same time
        goal = ["(at ball1 rooma)", "(carry ball1 left)"]
    else:
        goal = [f"(at {b} {goal_room})" for b in balls]
    return (
        f"(define (problem {name})\n  (:domain gripper)\n"
        f"  (:objects {' '.join(objects)})\n"
        f"  (:init {' '.join(init)})\n"
        f"  (:goal (and {' '.join(goal)})))\n"
    )


def tagworld_problem_text(n_balls: int, unsolvable: bool = False) -> str:
    balls = [f"ball{i}" for i in range(1, n_balls + 1)]
    objects = ["rooma", "roomb", *balls, "left", "right"]
    init = ["(room rooma)", "(room roomb)"]
    init += [f"(ball {b})" for b in balls]
    init += ["(gripper left)", "(gripper right)", "(at-robby rooma)"]
    init += [f"(at {b} rooma)" for b in balls]
    init += ["(free left)", "(free right)"]
    goal = (["(at ball1 rooma)", "(carry ball1 left)"] if unsolvable
            else [f"(at {b} roomb)" for b in balls])
    return (
        f"(define (problem tagworld-{n_balls})\n  (:domain tagworld)\n"
        f"  (:objects {' '.join(objects)})\n"
        f"  (:init {' '.join(init)})\n"
        f"  (:goal (and {' '.join(goal)})))\n"
    )


def blocks_problem_text(n: int, cyclic_goal: bool = False) -> str:
    blocks = [f"b{i}" for i in range(1, n + 1)]
    init = [f"(ontable {b})" for b in blocks]
    init += [f"(clear {b})" for b in blocks]
    init += ["(handempty)"]
    if cyclic_goal:
        goal = ["(on b1 b2)", "(on b2 b1)"]
    else:
        goal = [f"(on {a} {b})" for a, b in zip(blocks, blocks[1:])]
    return (
        f"(define (problem blocks-{n}{'u' if cyclic_goal else ''})\n"
        f"  (:domain blocks)\n"
        f"  (:objects {' '.join(f'{b} - block' for b in blocks)})\n"
        f"  (:init {' '.join(init)})\n"
        f"  (:goal (and {' '.join(goal)})))\n"
    )


def corridor_problem_text(n_rooms: int, n_items: int,
                          blocked_goal: bool = False,
                          disconnected: bool = False) -> str:
    rooms = [f"r{i}" for i in range(1, n_rooms + 1)]
    items = [f"i{i}" for i in range(1, n_items + 1)]
    last = rooms[-1]
    edges = []
    cut = n_rooms - 1 if disconnected else None
    for k in range(n_rooms - 1):
        if cut is not None and k == cut - 1:
            continue  # no edge into the last room
        edges.append((rooms[k], rooms[k + 1]))
        edges.append((rooms[k + 1], rooms[k]))
    init = ["(at-robot r1)", "(handfree)"]
    init += [f"(at {i} r1)" for i in items]
    init += [f"(adj {a} {b})" for a, b in edges]
    if blocked_goal:
        init += [f"(blocked {last})"]
    goal = [f"(at {i} {last})" for i in items]
    suffix = "b" if blocked_goal else ("d" if disconnected else "")
    return (
        f"(define (problem corridor-{n_rooms}-{n_items}{suffix})\n"
        f"  (:domain corridor)\n"
        f"  (:objects {' '.join(f'{r} - room' for r in rooms)} "
        f"{' '.join(f'{i} - item' for i in items)})\n"
        f"  (:init {' '.join(init)})\n"
        f"  (:goal (and {' '.join(goal)})))\n"
    )


def load_task(domain_text: str, problem_text: str):
    dom = parse_domain(domain_text)
    prob = parse_problem(problem_text, dom)
    return dom, prob, build_task(dom, prob)


@pytest.fixture(scope="session")
def gripper2():
    return load_task(gripper_domain_text(), gripper_problem_text(2))


@pytest.fixture(scope="session")
def gripper4():
    return load_task(gripper_domain_text(), gripper_problem_text(4))


# -- in-process programs -------------------------------------------------------


class ScriptedGripperPolicy(PolicyFn):
    """Hand-written policy that solves every two-room instance."""

    name = "scripted-gripper"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def predict(self, task, state, apps):
        goal_room = {a.args[0]: a.args[1] for a in task.goal_pos
                     if a.predicate == "at"}
        for act in apps:
            if act.schema == "drop" and goal_room.get(act.args[0]) == act.args[1]:
                return act
        for act in apps:
            if act.schema == "pick" and \
                    goal_room.get(act.args[0]) not in (None, act.args[1]):
                return act
        carried = [a.args[0] for a in state.atoms if a.predicate == "carry"]
        for act in apps:
            if act.schema == "move" and carried and \
                    goal_room.get(carried[0]) == act.args[1]:
                return act
        for act in apps:
            if act.schema != "move":
                continue
            for ball, room in goal_room.items():
                ball_there = any(a.predicate == "at" and a.args == (ball, act.args[1])
                                 for a in state.atoms)
                if ball_there and room != act.args[1]:
                    return act
        return apps[0]


class OutOfSetPolicy(PolicyFn):
    """Adversarial: always proposes an action that is not applicable."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def predict(self, task, state, apps):
        from progplan.grounding import GroundAction
        return GroundAction("no-such-action", ("x",), frozenset(), frozenset(),
                            frozenset(), frozenset())


class RaisingPolicy(PolicyFn):
    def __init__(self, seed: int = 0):
        self.seed = seed

    def predict(self, task, state, apps):
        raise RuntimeError("policy crashed")


class NonePolicy(PolicyFn):
    def __init__(self, seed: int = 0):
        self.seed = seed

    def predict(self, task, state, apps):
        return None


class WrappedValue(ValueFn):
    """Safety wrapper for an arbitrary raw evaluator, as applied to any
    untrusted value source."""

    def __init__(self, raw):
        self.raw = raw

    def evaluate(self, task, state):
        return safe_value(self.raw, task, state)


# -- canned sources for the stub host ------------------------------------------

STUB_POLICY_CORRECT = """\
def choose(state, applicable):
    goal_room = {a[1]: a[2] for a in GOAL if a[0] == "at"}
    for i, act in enumerate(applicable):
        if act[0] == "drop" and goal_room.get(act[1]) == act[2]:
            return i
    for i, act in enumerate(applicable):
        if act[0] == "pick" and goal_room.get(act[1]) not in (None, act[2]):
            return i
    carried = [a[1] for a in state if a[0] == "carry"]
    for i, act in enumerate(applicable):
        if act[0] == "move" and carried and goal_room.get(carried[0]) == act[2]:
            return i
    for i, act in enumerate(applicable):
        if act[0] == "move":
            for ball, room in goal_room.items():
                if ("at", ball, act[2]) in state and room != act[2]:
                    return i
    return 0
"""

STUB_POLICY_FIRST = "def choose(state, applicable):\n    return 0\n"

STUB_POLICY_BAD_INDEX = "def choose(state, applicable):\n    return 999\n"

STUB_POLICY_RAISES = (
    "def choose(state, applicable):\n    raise RuntimeError('boom')\n")

STUB_POLICY_CRASH = """\
import os
CALLS = [0]
def choose(state, applicable):
    CALLS[0] += 1
    if CALLS[0] >= 3:
        os._exit(1)
    return 0
"""

STUB_POLICY_LOOP = """\
def choose(state, applicable):
    while True:
        pass
"""

STUB_POLICY_NOISY = """\
import sys
def choose(state, applicable):
    print("chatter that does not belong on the protocol channel")
    sys.stdout.flush()
    return 0
"""

STUB_VALUE_GOALCOUNT = """\
def evaluate(state):
    return (sum(1 for a in GOAL if a not in state)
            + sum(1 for a in GOAL_NEG if a in state))
"""

STUB_VALUE_ZERO = "def evaluate(state):\n    return 0\n"

STUB_VALUE_INF = "def evaluate(state):\n    return float('inf')\n"

STUB_VALUE_NEG = "def evaluate(state):\n    return -3\n"

STUB_VALUE_CRASH = """\
import os
CALLS = [0]
def evaluate(state):
    CALLS[0] += 1
    if CALLS[0] >= 2:
        os._exit(1)
    return 1
"""

STUB_BROKEN_SOURCE = "def broken(:\n"
