"""Acceptance suite: one test per criterion, each printing a PASS line
(run with ``pytest tests/test_acceptance.py -s`` to see them). The
external-program criteria run against the stub host; the production
host has its own conformance suite in its package.
"""

import math
import random
import time

import pytest

from progplan.grounding import State, applicable_actions, build_task
from progplan.harness import SolveSpec, run_solve
from progplan.pddl import (
    anonymize,
    deanonymize,
    deanonymize_plan,
    parse_domain,
    parse_problem,
    print_domain,
    print_problem,
)
from progplan.programs import (
    BlindValue,
    ExternalPolicy,
    ExternalValue,
    FirstApplicablePolicy,
    GoalCountValue,
    RandomPolicy,
    open_program,
)
from progplan.search import (
    Outcome,
    ResourceLimits,
    dual_queue_gbfs,
    gbfs,
    policy_rollout,
)
from progplan.synthesis import (
    CandidateProgram,
    DegenerateInput,
    pearson,
    select_best,
    validation_score,
)
from progplan.validation import validate_plan

from . import conftest as ct
from . import oracles
from .conftest import (
    NonePolicy,
    OutOfSetPolicy,
    RaisingPolicy,
    ScriptedGripperPolicy,
    WrappedValue,
    blocks_problem_text,
    corridor_problem_text,
    fixture_domain_text,
    gripper_domain_text,
    gripper_problem_text,
    load_task,
    stub_host_cmd,
    tagworld_problem_text,
)


def _passed(line: str) -> None:
    print(f"\nACCEPTANCE {line}: PASS")


def _fixture_pool():
    cases = [
        (gripper_domain_text(), gripper_problem_text(2)),
        (gripper_domain_text(), gripper_problem_text(3)),
        (gripper_domain_text(), gripper_problem_text(2, unsolvable=True)),
        (fixture_domain_text("blocks"), blocks_problem_text(3)),
        (fixture_domain_text("blocks"), blocks_problem_text(4)),
        (fixture_domain_text("blocks"), blocks_problem_text(3, cyclic_goal=True)),
        (fixture_domain_text("corridor"), corridor_problem_text(3, 1)),
        (fixture_domain_text("corridor"), corridor_problem_text(4, 2)),
        (fixture_domain_text("corridor"),
         corridor_problem_text(3, 1, blocked_goal=True)),
        (fixture_domain_text("tagworld"), tagworld_problem_text(2)),
    ]
    return [load_task(d, p) for d, p in cases]


def test_criterion_1_soundness():
    """Theorems 1-3: every Solved result across all three modes and any
    program behavior passes the independent validator."""
    pool = _fixture_pool()
    limits = ResourceLimits(time_limit_s=10.0, max_steps=300,
                            max_generations=20_000)
    host = stub_host_cmd()

    runs = 0
    solved = 0
    start = time.monotonic()

    def check(dom, prob, result):
        nonlocal runs, solved
        runs += 1
        if result.outcome is Outcome.SOLVED:
            solved += 1
            assert result.plan is not None
            verdict = validate_plan(dom, prob, result.plan.steps)
            assert verdict.valid, f"invalid plan on {prob.name}: {verdict}"

    in_process_policies = [ScriptedGripperPolicy, FirstApplicablePolicy,
                           RandomPolicy, OutOfSetPolicy, RaisingPolicy,
                           NonePolicy]
    raw_values = [
        lambda t, s: float(len(s)),
        lambda t, s: -7.0,
        lambda t, s: math.inf,
        lambda t, s: (_ for _ in ()).throw(RuntimeError("bad value")),
        lambda t, s: float(hash(s) % 97),
    ]

    # in-process programs: 800 randomized (task, program, mode) runs
    rng = random.Random(20250810)
    for i in range(800):
        dom, prob, task = pool[rng.randrange(len(pool))]
        seed = rng.randrange(10_000)
        mode = i % 3
        if mode == 0:
            value = rng.choice([GoalCountValue(), BlindValue(),
                                WrappedValue(rng.choice(raw_values))])
            check(dom, prob, gbfs(task, value, limits))
        elif mode == 1:
            policy = rng.choice(in_process_policies)(seed)
            check(dom, prob, policy_rollout(task, policy, limits))
        else:
            value = rng.choice([GoalCountValue(), BlindValue()])
            policy = rng.choice(in_process_policies)(seed)
            check(dom, prob, dual_queue_gbfs(task, value, policy, limits))

    # subprocess-backed programs, including crashing and misbehaving ones
    policy_sources = [ct.STUB_POLICY_CORRECT, ct.STUB_POLICY_FIRST,
                      ct.STUB_POLICY_BAD_INDEX, ct.STUB_POLICY_RAISES,
                      ct.STUB_POLICY_CRASH]
    value_sources = [ct.STUB_VALUE_GOALCOUNT, ct.STUB_VALUE_ZERO,
                     ct.STUB_VALUE_INF, ct.STUB_VALUE_NEG, ct.STUB_VALUE_CRASH]
    for i in range(220):
        dom, prob, task = pool[rng.randrange(len(pool))]
        seed = rng.randrange(10_000)
        if i % 2 == 0:
            with open_program(rng.choice(policy_sources), "policy", task,
                              host_cmd=host) as handle:
                result = policy_rollout(task, ExternalPolicy(handle, seed), limits)
        else:
            with open_program(rng.choice(value_sources), "value", task,
                              host_cmd=host) as handle:
                result = gbfs(task, ExternalValue(handle), limits)
        check(dom, prob, result)

    elapsed = time.monotonic() - start
    assert runs >= 1000
    assert solved > 100  # the pool is not degenerate
    assert elapsed < 300.0
    _passed(f"1 soundness ({runs} runs, {solved} solved, {elapsed:.0f}s)")


def test_criterion_2_completeness():
    """Theorems 2-3: gbfs and dual-queue agree with the breadth-first
    oracle on plan existence over an exhaustive fixture family."""
    family = [
        (gripper_domain_text(), gripper_problem_text(1)),
        (gripper_domain_text(), gripper_problem_text(2)),
        (gripper_domain_text(), gripper_problem_text(3)),
        (gripper_domain_text(), gripper_problem_text(1, unsolvable=True)),
        (gripper_domain_text(), gripper_problem_text(2, unsolvable=True)),
        (fixture_domain_text("tagworld"), tagworld_problem_text(2)),
        (fixture_domain_text("tagworld"), tagworld_problem_text(2, unsolvable=True)),
        (fixture_domain_text("blocks"), blocks_problem_text(3)),
        (fixture_domain_text("blocks"), blocks_problem_text(4)),
        (fixture_domain_text("blocks"), blocks_problem_text(5)),
        (fixture_domain_text("blocks"), blocks_problem_text(6)),
        (fixture_domain_text("blocks"), blocks_problem_text(3, cyclic_goal=True)),
        (fixture_domain_text("blocks"), blocks_problem_text(4, cyclic_goal=True)),
        (fixture_domain_text("blocks"), blocks_problem_text(5, cyclic_goal=True)),
        (fixture_domain_text("blocks"), blocks_problem_text(6, cyclic_goal=True)),
        (fixture_domain_text("corridor"), corridor_problem_text(3, 1)),
        (fixture_domain_text("corridor"), corridor_problem_text(4, 2)),
        (fixture_domain_text("corridor"), corridor_problem_text(5, 2)),
        (fixture_domain_text("corridor"),
         corridor_problem_text(4, 2, blocked_goal=True)),
        (fixture_domain_text("corridor"),
         corridor_problem_text(4, 2, disconnected=True)),
    ]
    start = time.monotonic()
    checked = 0
    for dom_text, prob_text in family:
        dom, prob, task = load_task(dom_text, prob_text)
        oracle = oracles.bfs(dom, prob)
        assert oracle.complete and oracle.reachable <= 100_000
        plain = gbfs(task, GoalCountValue())
        dual = dual_queue_gbfs(task, GoalCountValue(), FirstApplicablePolicy())
        assert plain.solved is oracle.solvable, prob.name
        assert dual.solved is oracle.solvable, prob.name
        if not oracle.solvable:
            assert plain.outcome is Outcome.UNSOLVABLE
            assert dual.outcome is Outcome.UNSOLVABLE
        else:
            assert validate_plan(dom, prob, plain.plan.steps).valid
            assert validate_plan(dom, prob, dual.plan.steps).valid
        checked += 1
    elapsed = time.monotonic() - start
    assert elapsed < 600.0
    _passed(f"2 completeness ({checked} instances, {elapsed:.0f}s)")


def test_criterion_3_grounder_oracle_equivalence():
    """applicable_actions matches brute-force enumeration on 1000
    random reachable states across four fixture domains."""
    cases = [
        (gripper_domain_text(), gripper_problem_text(4)),
        (fixture_domain_text("blocks"), blocks_problem_text(5)),
        (fixture_domain_text("corridor"), corridor_problem_text(5, 2)),
        (fixture_domain_text("tagworld"), tagworld_problem_text(3)),
    ]
    rng = random.Random(42)
    total = 0
    mismatches = 0
    for dom_text, prob_text in cases:
        dom, prob, task = load_task(dom_text, prob_text)
        instances = oracles.all_ground_instances(dom, prob)
        states = oracles.random_walk_states(dom, prob, rng, walks=60,
                                            max_depth=14)
        rng.shuffle(states)
        for atoms in states[:260]:
            got = {(a.schema, a.args)
                   for a in applicable_actions(task, State(atoms))}
            want = oracles.oracle_applicable(instances, atoms)
            if got != want:
                mismatches += 1
            total += 1
    assert total >= 1000
    assert mismatches == 0
    _passed(f"3 grounder-oracle equivalence ({total} states, 0 mismatches)")


def test_criterion_4_validation_score_exactness():
    for i in range(1000):
        t = 60.0 * i / 1000.0
        expected = 1.0 / (1.0 + math.log(t + 1.0))
        assert abs(validation_score(t, True) - expected) <= 1e-12
    assert validation_score(0.0, True) == 1.0
    assert validation_score(59.999999, True) > 0.0
    assert validation_score(60.0, True) == 0.0
    grid = [validation_score(60.0 * i / 1000.0, True) for i in range(1000)]
    assert all(a > b for a, b in zip(grid, grid[1:]))
    _passed("4 validation-score exactness (1000-point grid, 1e-12)")


def test_criterion_5_anonymization_ablation():
    """Plans found on anonymized instances map back and validate on the
    originals; the rename round-trips; expansion counts are identical."""
    cases = [
        (gripper_domain_text(), gripper_problem_text(3)),
        (fixture_domain_text("blocks"), blocks_problem_text(4)),
        (fixture_domain_text("corridor"), corridor_problem_text(4, 2)),
        (fixture_domain_text("tagworld"), tagworld_problem_text(2)),
    ]
    for dom_text, prob_text in cases:
        dom = parse_domain(dom_text)
        prob = parse_problem(prob_text, dom)
        anon_dom, anon_probs, nm = anonymize(dom, [prob])

        # name map round-trips exactly
        back_dom, back_probs = deanonymize(anon_dom, anon_probs, nm)
        assert back_dom == dom and back_probs == [prob]

        # run on the anonymized encoding as written to disk
        anon_dom2 = parse_domain(print_domain(anon_dom))
        anon_prob2 = parse_problem(print_problem(anon_probs[0]), anon_dom2)
        task = build_task(dom, prob)
        anon_task = build_task(anon_dom2, anon_prob2)

        limits = ResourceLimits(seed=11)
        original = gbfs(task, GoalCountValue(), limits)
        renamed = gbfs(anon_task, GoalCountValue(), limits)
        assert original.solved and renamed.solved
        mapped = deanonymize_plan(renamed.plan.steps, nm)
        assert validate_plan(dom, prob, mapped).valid

        # search is name-invariant: identical expansion counts
        assert original.stats.expansions == renamed.stats.expansions
        assert original.stats.generations == renamed.stats.generations
        dual_a = dual_queue_gbfs(task, GoalCountValue(),
                                 FirstApplicablePolicy(seed=11), limits)
        dual_b = dual_queue_gbfs(anon_task, GoalCountValue(),
                                 FirstApplicablePolicy(seed=11), limits)
        assert dual_a.stats.expansions == dual_b.stats.expansions
    _passed("5 anonymization ablation (round-trip, validation, "
            "identical expansions)")


def test_criterion_6_dual_queue_behavior():
    """With a perfect scripted policy and a constant heuristic on the
    20-ball fixture, the policy queue drives the search: the dual-queue
    expands at most 3x the rollout plan length while plain search with
    the same constant heuristic needs at least 10x more expansions."""
    dom, prob, task = load_task(gripper_domain_text(), gripper_problem_text(20))

    rollout = policy_rollout(task, ScriptedGripperPolicy())
    assert rollout.solved
    plan_len = len(rollout.plan)

    dual = dual_queue_gbfs(task, BlindValue(), ScriptedGripperPolicy())
    assert dual.solved
    assert validate_plan(dom, prob, dual.plan.steps).valid
    assert dual.stats.expansions <= 3 * plan_len

    cap = 10 * dual.stats.expansions
    plain = gbfs(task, BlindValue(), ResourceLimits(max_expansions=cap + 1))
    assert not plain.solved
    assert plain.stats.expansions > cap
    _passed(f"6 dual-queue behavior (rollout {plan_len} steps, dual "
            f"{dual.stats.expansions} expansions, plain >{cap})")


def test_criterion_7_pearson_correlation():
    assert abs(pearson([1.0, 2.0, 3.0, 4.0], [3.0, 5.0, 7.0, 9.0]) - 1.0) <= 1e-12
    assert abs(pearson([1.0, 2.0, 3.0], [9.0, 6.0, 3.0]) + 1.0) <= 1e-12
    with pytest.raises(DegenerateInput):
        pearson([1.0, 2.0], [5.0, 5.0])
    with pytest.raises(DegenerateInput):
        pearson([1.0], [1.0])

    # synthetic candidate pool: candidate k solves instances of at most
    # k balls and stalls on bigger ones, so true ability grows with k
    template = """\
LIMIT = {limit}
def choose(state, applicable):
    balls = {{a[1] for a in GOAL if a[0] == "at"}}
    if len(balls) > LIMIT:
        for i, act in enumerate(applicable):
            if act[0] == "move":
                return i
        return 0
{body}
"""
    body = "\n".join("    " + line if line else ""
                     for line in ct.STUB_POLICY_CORRECT.splitlines()[1:])
    candidates = [
        CandidateProgram(f"policy-{k:02d}", k, "policy",
                         template.format(limit=k, body=body), "synthetic", 0.0)
        for k in range(1, 6)
    ]
    dom = parse_domain(gripper_domain_text())
    train = [parse_problem(gripper_problem_text(n, name=f"train-{n}"), dom)
             for n in (1, 2, 3, 4)]
    test = [parse_problem(gripper_problem_text(n, name=f"test-{n}"), dom)
            for n in (1, 2, 3, 4, 5)]
    limits = ResourceLimits(time_limit_s=30.0, max_steps=120)
    _, train_records = select_best(candidates, dom, train, "policy",
                                   limits=limits, host_cmd=stub_host_cmd())
    _, test_records = select_best(candidates, dom, test, "policy",
                                  limits=limits, host_cmd=stub_host_cmd())
    scores = [r.mean_score for r in train_records]
    coverages = [sum(p.solved for p in r.per_problem) for r in test_records]
    r = pearson(scores, coverages)
    assert r >= 0.9
    _passed(f"7 pearson correlation (exact +/-1; synthetic pool r={r:.3f})")


def test_criterion_8_resource_enforcement(tmp_path):
    dom_path = tmp_path / "domain.pddl"
    dom_path.write_text(gripper_domain_text())

    # a policy that loops forever inside one protocol call, with a
    # per-call timeout longer than the whole budget: only the parent's
    # limit-plus-grace kill can end this run
    prob_path = tmp_path / "p3.pddl"
    prob_path.write_text(gripper_problem_text(3, unsolvable=True))
    policy_path = tmp_path / "loop.py"
    policy_path.write_text(ct.STUB_POLICY_LOOP)
    spec = SolveSpec(str(dom_path), str(prob_path), "rollout",
                     policy=str(policy_path), time_limit_s=5.0,
                     memory_limit_bytes=None, host_cmd=stub_host_cmd(),
                     program_timeout_s=60.0)
    start = time.monotonic()
    record = run_solve(spec, grace_s=2.0)
    wall = time.monotonic() - start
    assert wall < 10.0
    assert record.outcome == "time-limit"

    # a state-flooding blind search under a 256 MiB address-space cap
    flood_path = tmp_path / "p12.pddl"
    flood_path.write_text(gripper_problem_text(12))
    spec = SolveSpec(str(dom_path), str(flood_path), "gbfs",
                     heuristic="blind", time_limit_s=120.0,
                     memory_limit_bytes=256 << 20)
    record = run_solve(spec)
    assert record.outcome == "memory-limit"
    _passed(f"8 resource enforcement (wall {wall:.1f}s < 10s; "
            "256MiB cap -> memory-limit)")
