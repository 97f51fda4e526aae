"""Experiment harness: runs one problem per child process under wall
clock and address-space caps, and records validator-approved outcomes.

The child enforces the time limit cooperatively inside the search; the
parent terminates the child at the limit plus a grace period as a
backstop (a looping external program can block the child for up to one
protocol call timeout). The memory budget is applied with RLIMIT_AS in
the child before the search starts and is inherited by the program host
it spawns.
"""

from __future__ import annotations

import csv
import multiprocessing
import os
import resource
import time
from dataclasses import dataclass
from pathlib import Path

from . import planio
from .grounding import build_task
from .pddl.parser import parse_domain, parse_problem
from .programs import (
    BlindValue,
    ExternalPolicy,
    ExternalValue,
    FirstApplicablePolicy,
    GoalCountValue,
    RandomPolicy,
    open_program,
)
from .search import Outcome, ResourceLimits, dual_queue_gbfs, gbfs, policy_rollout
from .validation import validate_plan

GRACE_PERIOD_S = 5.0
DEFAULT_TIME_LIMIT_S = 1800.0
DEFAULT_MEMORY_LIMIT = 8 * 2**30

BUILTIN_VALUES = ("goal-count", "blind")
BUILTIN_POLICIES = ("first", "random")


class ConfigError(Exception):
    pass


@dataclass
class SolveSpec:
    """Everything a child process needs to run one problem."""

    domain_path: str
    problem_path: str
    mode: str  # gbfs | rollout | dual
    heuristic: str = "goal-count"   # builtin name or path to a program file
    policy: str = "first"           # builtin name or path to a program file
    heuristic_source: str | None = None  # inline program text, overrides path
    policy_source: str | None = None
    time_limit_s: float = DEFAULT_TIME_LIMIT_S
    memory_limit_bytes: int | None = DEFAULT_MEMORY_LIMIT
    seed: int = 0
    host_cmd: tuple[str, ...] | None = None
    program_timeout_s: float = 10.0
    max_steps: int | None = None
    max_generations: int | None = None


@dataclass
class RunRecord:
    problem: str
    mode: str
    outcome: str
    plan_cost: int | None = None
    wall_time: float = 0.0
    expansions: int = 0
    peak_memory: int = 0
    candidate_id: str = ""
    error: str = ""
    plan_steps: planio.PlanSteps | None = None

    @property
    def solved(self) -> bool:
        return self.outcome == Outcome.SOLVED.value


def _resolve_programs(spec: SolveSpec, task):
    """Build the value function and policy named by the spec; external
    programs get their own host subprocess."""
    handles = []

    def source_of(name: str, inline: str | None) -> str:
        if inline is not None:
            return inline
        return Path(name).read_text(encoding="utf-8")

    heuristic = None
    if spec.mode in ("gbfs", "dual"):
        if spec.heuristic == "goal-count" and spec.heuristic_source is None:
            heuristic = GoalCountValue()
        elif spec.heuristic == "blind" and spec.heuristic_source is None:
            heuristic = BlindValue()
        else:
            handle = open_program(
                source_of(spec.heuristic, spec.heuristic_source), "value", task,
                host_cmd=spec.host_cmd, call_timeout_s=spec.program_timeout_s)
            handles.append(handle)
            heuristic = ExternalValue(handle)

    policy = None
    if spec.mode in ("rollout", "dual"):
        if spec.policy == "first" and spec.policy_source is None:
            policy = FirstApplicablePolicy(spec.seed)
        elif spec.policy == "random" and spec.policy_source is None:
            policy = RandomPolicy(spec.seed)
        else:
            handle = open_program(
                source_of(spec.policy, spec.policy_source), "policy", task,
                host_cmd=spec.host_cmd, call_timeout_s=spec.program_timeout_s)
            handles.append(handle)
            policy = ExternalPolicy(handle, spec.seed)

    return heuristic, policy, handles


def solve_inline(spec: SolveSpec) -> RunRecord:
    """Run one problem in the current process (no isolation)."""
    domain = parse_domain(Path(spec.domain_path).read_text(encoding="utf-8"))
    problem = parse_problem(Path(spec.problem_path).read_text(encoding="utf-8"),
                            domain)
    task = build_task(domain, problem)
    limits = ResourceLimits(
        time_limit_s=spec.time_limit_s,
        max_steps=spec.max_steps,
        max_generations=spec.max_generations,
        seed=spec.seed,
    )
    heuristic, policy, handles = _resolve_programs(spec, task)
    try:
        if spec.mode == "gbfs":
            result = gbfs(task, heuristic, limits)
        elif spec.mode == "rollout":
            result = policy_rollout(task, policy, limits)
        elif spec.mode == "dual":
            result = dual_queue_gbfs(task, heuristic, policy, limits)
        else:
            raise ConfigError(f"unknown mode '{spec.mode}'")
    finally:
        for handle in handles:
            handle.close()

    record = RunRecord(
        problem=problem.name,
        mode=spec.mode,
        outcome=result.outcome.value,
        wall_time=result.stats.wall_time,
        expansions=result.stats.expansions,
        peak_memory=resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024,
    )
    if result.solved and result.plan is not None:
        verdict = validate_plan(domain, problem, result.plan.steps)
        if verdict.valid:
            record.plan_cost = result.plan.cost
            record.plan_steps = result.plan.steps
        else:
            record.outcome = "error"
            record.error = f"search returned an invalid plan: {verdict.reason}"
    return record


def _child_main(spec: SolveSpec, conn) -> None:
    try:
        if spec.memory_limit_bytes is not None:
            resource.setrlimit(resource.RLIMIT_AS,
                               (spec.memory_limit_bytes, spec.memory_limit_bytes))
        record = solve_inline(spec)
    except MemoryError:
        record = RunRecord(problem=os.path.basename(spec.problem_path),
                           mode=spec.mode, outcome=Outcome.MEMORY_LIMIT.value)
        record.peak_memory = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    except Exception as exc:  # reported, not raised: the harness must survive
        record = RunRecord(problem=os.path.basename(spec.problem_path),
                           mode=spec.mode, outcome="error", error=repr(exc))
    try:
        conn.send(record)
    except (BrokenPipeError, OSError, MemoryError):
        pass
    conn.close()


def run_solve(spec: SolveSpec, grace_s: float = GRACE_PERIOD_S) -> RunRecord:
    """Run one problem in an isolated child process, enforcing the time
    limit (plus grace) and the memory cap."""
    ctx = multiprocessing.get_context("fork")
    parent_conn, child_conn = ctx.Pipe(duplex=False)
    child = ctx.Process(target=_child_main, args=(spec, child_conn))
    start = time.monotonic()
    child.start()
    child_conn.close()

    deadline = spec.time_limit_s + grace_s
    record: RunRecord | None = None
    if parent_conn.poll(deadline):
        try:
            record = parent_conn.recv()
        except (EOFError, OSError):
            record = None
    child.join(timeout=max(0.0, deadline - (time.monotonic() - start)))
    if child.is_alive():
        child.terminate()
        child.join(timeout=2.0)
        if child.is_alive():
            child.kill()
            child.join()
    parent_conn.close()

    if record is None:
        outcome = Outcome.TIME_LIMIT.value
        if child.exitcode not in (0, None) and spec.memory_limit_bytes is not None:
            # killed by the OS under the address-space cap
            outcome = Outcome.MEMORY_LIMIT.value
        record = RunRecord(problem=Path(spec.problem_path).stem, mode=spec.mode,
                           outcome=outcome,
                           wall_time=time.monotonic() - start)
    return record


EXIT_CODES = {
    Outcome.SOLVED.value: 0,
    Outcome.UNSOLVABLE.value: 2,
    Outcome.TIME_LIMIT.value: 3,
    Outcome.MEMORY_LIMIT.value: 4,
    Outcome.STEP_LIMIT.value: 5,
    Outcome.FAILURE.value: 6,
    "error": 1,
}


# -- record persistence --------------------------------------------------------

_RECORD_FIELDS = ["problem", "mode", "outcome", "plan_cost", "wall_time",
                  "expansions", "peak_memory", "candidate_id", "error"]


def save_records(records: list[RunRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# progplan run-records v1\n")
        writer = csv.writer(fh)
        writer.writerow(_RECORD_FIELDS)
        for r in records:
            writer.writerow([
                r.problem, r.mode, r.outcome,
                "" if r.plan_cost is None else r.plan_cost,
                f"{r.wall_time:.4f}", r.expansions, r.peak_memory,
                r.candidate_id, r.error,
            ])


def load_records(path: str | Path) -> list[RunRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    records = []
    for row in csv.DictReader(rows):
        records.append(RunRecord(
            problem=row["problem"], mode=row["mode"], outcome=row["outcome"],
            plan_cost=int(row["plan_cost"]) if row["plan_cost"] else None,
            wall_time=float(row["wall_time"]), expansions=int(row["expansions"]),
            peak_memory=int(row["peak_memory"]),
            candidate_id=row.get("candidate_id", ""), error=row.get("error", "")))
    return records
