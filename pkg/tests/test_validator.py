import random

import pytest

from progplan.grounding import applicable_actions, build_task, State
from progplan.pddl import parse_domain, parse_problem, UnknownObject
from progplan.planio import format_plan, parse_plan
from progplan.validation import (
    GOAL_UNSATISFIED,
    INAPPLICABLE,
    UnknownAction,
    validate_plan,
)

from . import oracles
from .conftest import (
    blocks_problem_text,
    fixture_domain_text,
    gripper_domain_text,
    gripper_problem_text,
)

GRIPPER2_PLAN = (
    ("pick", ("ball1", "rooma", "left")),
    ("pick", ("ball2", "rooma", "right")),
    ("move", ("rooma", "roomb")),
    ("drop", ("ball1", "roomb", "left")),
    ("drop", ("ball2", "roomb", "right")),
)


@pytest.fixture(scope="module")
def gripper():
    dom = parse_domain(gripper_domain_text())
    prob = parse_problem(gripper_problem_text(2), dom)
    return dom, prob


def test_valid_plan(gripper):
    dom, prob = gripper
    outcome = validate_plan(dom, prob, GRIPPER2_PLAN)
    assert outcome.valid and outcome.cost == 5


def test_empty_plan_on_satisfied_goal(gripper):
    dom, prob = gripper
    text = gripper_problem_text(2).replace("(at ball1 roomb)", "(at ball1 rooma)") \
                                  .replace("(at ball2 roomb)", "(at ball2 rooma)")
    trivial = parse_problem(text, dom)
    outcome = validate_plan(dom, trivial, ())
    assert outcome.valid and outcome.cost == 0


def test_swapped_actions_invalid(gripper):
    dom, prob = gripper
    plan = list(GRIPPER2_PLAN)
    plan[2], plan[3] = plan[3], plan[2]  # drop before moving
    outcome = validate_plan(dom, prob, tuple(plan))
    assert not outcome.valid
    assert outcome.step == 2
    assert outcome.reason == INAPPLICABLE


def test_incomplete_plan_goal_unsatisfied(gripper):
    dom, prob = gripper
    outcome = validate_plan(dom, prob, GRIPPER2_PLAN[:-1])
    assert not outcome.valid
    assert outcome.step == len(GRIPPER2_PLAN) - 1
    assert outcome.reason == GOAL_UNSATISFIED


def test_unknown_action_and_object(gripper):
    dom, prob = gripper
    with pytest.raises(UnknownAction):
        validate_plan(dom, prob, (("fly", ("rooma",)),))
    with pytest.raises(UnknownObject):
        validate_plan(dom, prob, (("move", ("rooma", "roomz")),))
    with pytest.raises(UnknownAction):
        validate_plan(dom, prob, (("move", ("rooma",)),))


def test_ill_typed_argument_is_inapplicable(gripper):
    dom, prob = gripper
    outcome = validate_plan(dom, prob, (("move", ("ball1", "roomb")),))
    assert not outcome.valid and outcome.reason == INAPPLICABLE


def test_equality_precondition_checked():
    dom = parse_domain(fixture_domain_text("blocks"))
    prob = parse_problem(blocks_problem_text(3), dom)
    # stack a block onto itself: ruled out by (not (= ?x ?y))
    outcome = validate_plan(dom, prob, (
        ("pick-up", ("b1",)),
        ("stack", ("b1", "b1")),
    ))
    assert not outcome.valid and outcome.step == 1


def test_plan_file_round_trip(tmp_path, gripper):
    dom, prob = gripper
    text = format_plan(GRIPPER2_PLAN)
    assert "; cost = 5 (unit cost)" in text
    assert parse_plan(text) == GRIPPER2_PLAN


@pytest.mark.parametrize("dom_text,prob_text", [
    (gripper_domain_text(), gripper_problem_text(3)),
    (fixture_domain_text("blocks"), blocks_problem_text(4)),
])
def test_agreement_with_grounder(dom_text, prob_text):
    """Validator and grounder decide applicability identically on
    random (state, action) pairs; they are independent code paths."""
    dom = parse_domain(dom_text)
    prob = parse_problem(prob_text, dom)
    task = build_task(dom, prob)
    instances = oracles.all_ground_instances(dom, prob)
    rng = random.Random(99)
    states = oracles.random_walk_states(dom, prob, rng, walks=60, max_depth=10)

    checked = 0
    for atoms in states:
        state = State(atoms)
        applicable = {(a.schema, a.args) for a in applicable_actions(task, state)}
        sample = rng.sample(instances, min(len(instances), 40))
        for inst in sample:
            step = (inst["name"], inst["args"])
            # validator's verdict on [step] from this state, via a
            # synthetic problem whose init is the current state
            synthetic = parse_problem(
                _problem_with_init(prob_text, atoms), dom)
            verdict = validate_plan(dom, synthetic, (step,))
            grounder_says = step in applicable
            validator_says = verdict.valid or verdict.reason == GOAL_UNSATISFIED
            assert grounder_says == validator_says
            checked += 1
    assert checked >= 5000


def _problem_with_init(prob_text: str, atoms) -> str:
    lines = [f"({a.predicate} {' '.join(a.args)})" if a.args else f"({a.predicate})"
             for a in sorted(atoms)]
    start = prob_text.index("(:init")
    end = prob_text.index("(:goal")
    return prob_text[:start] + f"(:init {' '.join(lines)})\n  " + prob_text[end:]
