"""Program synthesis pipeline: prompt assembly, candidate generation
(HTTP chat endpoint or offline program directory), validation scoring,
and selection of the best value function, policy and execution mode.
"""

from __future__ import annotations

import csv
import hashlib
import math
import re
import statistics
import time
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Sequence

from .grounding import Task, build_task
from .pddl.model import Domain, Problem
from .programs import (
    ExternalPolicy,
    ExternalValue,
    HandshakeError,
    open_program,
)
from .search import Outcome, ResourceLimits, gbfs, policy_rollout
from .validation import validate_plan

VALIDATION_TIME_LIMIT_S = 60.0

_CODE_BLOCK_RE = re.compile(r"```[a-zA-Z0-9_+-]*[ \t]*\n(.*?)```", re.DOTALL)


class SynthesisError(Exception):
    pass


class MissingFixture(SynthesisError):
    pass


class EndpointError(SynthesisError):
    pass


class NoLoadableCandidate(SynthesisError):
    pass


class DegenerateInput(SynthesisError):
    pass


class Mode(Enum):
    ROLLOUT_ONLY = "rollout"
    DUAL_QUEUE = "dual"


# -- prompt ------------------------------------------------------------------

_API_DOC = """\
Your class runs against a planning state given as a frozenset of atoms;
each atom is a tuple of lower-case strings ("predicate", "arg1", ...).
The base class provides:
  self.objects          dict mapping object name -> type name
  self.objects_of_type(type_name)   list of object names (subtypes included)
  self.goal             frozenset of atoms that must hold in a goal state
  self.goal_negative    frozenset of atoms that must NOT hold
  self.holds(state, predicate, *args)   membership test
  self.atoms(state, predicate)          list of argument tuples for a predicate
Only these imports are allowed: math, itertools, collections, heapq,
functools, random, typing. Define exactly one subclass; do not
instantiate it and do not write any top-level driver code.
Answer with a single fenced Python code block.
"""

_VALUE_INSTRUCTIONS = """\
Write a Python class that implements a value function (a heuristic) for
the planning domain below. Subclass ValueFunction and override
value(self, state), returning a number that estimates the cost to reach
a goal state: the smaller the value, the closer the state is to a goal.
Return math.inf if you are certain no goal can be reached. The value
function will guide a greedy best-first search on problems from this
domain with many more objects than the examples.
""" + _API_DOC

_POLICY_INSTRUCTIONS = """\
Write a Python class that implements a policy (a reactive controller)
for the planning domain below. Subclass Policy and override
choose(self, state, applicable), where applicable is the non-empty list
of currently applicable ground actions, each a tuple of lower-case
strings ("action-name", "arg1", ...). Return the integer index of the
action to execute. The policy is rolled out action by action and must
eventually reach a goal state on problems from this domain with many
more objects than the examples.
""" + _API_DOC


@dataclass(frozen=True)
class PromptSpec:
    """Prompt content, in order: instructions, target domain and two of
    its training problems, an example domain and problem, an example
    program for the example domain."""

    kind: str
    instructions: str
    domain_text: str
    problem_texts: tuple[str, str]
    example_domain_text: str
    example_problem_text: str
    example_program_text: str

    def render(self) -> str:
        parts = [
            self.instructions,
            "## Target domain (PDDL)\n\n" + self.domain_text,
            "## Training problem 1 (PDDL)\n\n" + self.problem_texts[0],
            "## Training problem 2 (PDDL)\n\n" + self.problem_texts[1],
            "## Example domain (PDDL)\n\n" + self.example_domain_text,
            "## Example problem (PDDL)\n\n" + self.example_problem_text,
            f"## Example {self.kind} program for the example domain\n\n"
            "```python\n" + self.example_program_text + "```",
        ]
        return "\n\n".join(parts)


def _gripper_fixture(name: str) -> str:
    ref = resources.files("progplan.data.gripper").joinpath(name)
    try:
        return ref.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise MissingFixture(f"packaged fixture {name} missing") from exc


def build_prompt(kind: str, domain_text: str,
                 problem_texts: Sequence[str]) -> PromptSpec:
    """Assemble the prompt deterministically. Gripper is the single
    in-context example: it teaches the file syntax and class structure
    without revealing anything about the target domain."""
    if kind not in ("value", "policy"):
        raise ValueError(f"kind must be 'value' or 'policy', not {kind!r}")
    if len(problem_texts) != 2:
        raise ValueError("exactly two training problems go into the prompt")
    instructions = _VALUE_INSTRUCTIONS if kind == "value" else _POLICY_INSTRUCTIONS
    example_program = _gripper_fixture(
        "value_example.py" if kind == "value" else "policy_example.py")
    return PromptSpec(
        kind=kind,
        instructions=instructions,
        domain_text=domain_text,
        problem_texts=(problem_texts[0], problem_texts[1]),
        example_domain_text=_gripper_fixture("domain.pddl"),
        example_problem_text=_gripper_fixture("example.pddl"),
        example_program_text=example_program,
    )


# -- candidates --------------------------------------------------------------


@dataclass
class CandidateProgram:
    cand_id: str
    index: int
    kind: str
    source: str | None
    model: str
    gen_time_s: float
    raw_response: str | None = None
    extraction_failed: bool = False


def extract_code(response: str) -> str | None:
    """Last fenced code block of the response, or None."""
    blocks = _CODE_BLOCK_RE.findall(response)
    return blocks[-1] if blocks else None


@dataclass
class EndpointConfig:
    url: str
    model: str
    api_key: str | None = None
    temperature: float | None = None
    request_timeout_s: float = 300.0
    max_retries: int = 2


class ChatEndpoint:
    """Minimal chat-completions client."""

    def __init__(self, config: EndpointConfig):
        self.config = config

    def generate(self, prompt: str) -> tuple[str, float]:
        import requests

        payload: dict = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        if self.config.temperature is not None:
            payload["temperature"] = self.config.temperature
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        start = time.perf_counter()
        response = requests.post(self.config.url, json=payload, headers=headers,
                                 timeout=self.config.request_timeout_s)
        response.raise_for_status()
        body = response.json()
        text = body["choices"][0]["message"]["content"]
        return text, time.perf_counter() - start


def generate_candidates(prompt: PromptSpec, endpoint: ChatEndpoint,
                        n: int = 10) -> list[CandidateProgram]:
    """Call the endpoint n times; failed calls are retried a bounded
    number of times, then recorded as failed candidates."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rendered = prompt.render()
    candidates: list[CandidateProgram] = []
    successes = 0
    for i in range(n):
        cand_id = f"{prompt.kind}-{i:02d}"
        response = None
        elapsed = 0.0
        for _ in range(endpoint.config.max_retries + 1):
            try:
                response, elapsed = endpoint.generate(rendered)
                break
            except Exception:
                continue
        if response is None:
            candidates.append(CandidateProgram(
                cand_id, i, prompt.kind, None, endpoint.config.model, 0.0,
                raw_response=None, extraction_failed=True))
            continue
        successes += 1
        source = extract_code(response)
        candidates.append(CandidateProgram(
            cand_id, i, prompt.kind, source, endpoint.config.model, elapsed,
            raw_response=response, extraction_failed=source is None))
    if successes == 0:
        raise EndpointError("every endpoint call failed after retries")
    return candidates


def load_candidates_dir(directory: str | Path, kind: str) -> list[CandidateProgram]:
    """Offline mode: one candidate per .py file, in sorted name order."""
    paths = sorted(Path(directory).glob("*.py"))
    return [
        CandidateProgram(
            cand_id=f"{kind}-{path.stem}", index=i, kind=kind,
            source=path.read_text(encoding="utf-8"),
            model="offline", gen_time_s=0.0)
        for i, path in enumerate(paths)
    ]


def save_candidates(candidates: list[CandidateProgram], directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "manifest.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write("# progplan candidate-manifest v1\n")
        writer = csv.writer(fh)
        writer.writerow(["cand_id", "model", "gen_time_s", "sha256", "extraction_failed"])
        for cand in candidates:
            digest = ""
            if cand.source is not None:
                digest = hashlib.sha256(cand.source.encode()).hexdigest()
                (directory / f"{cand.cand_id}.py").write_text(cand.source,
                                                              encoding="utf-8")
            if cand.raw_response is not None:
                (directory / f"{cand.cand_id}.response.txt").write_text(
                    cand.raw_response, encoding="utf-8")
            writer.writerow([cand.cand_id, cand.model, f"{cand.gen_time_s:.3f}",
                             digest, int(cand.extraction_failed)])


# -- validation scoring and selection ----------------------------------------


def validation_score(t: float, solved: bool) -> float:
    """1/(1 + ln(t+1)) for a solve in t < 60 seconds, else 0."""
    if t < 0:
        raise ValueError("time must be non-negative")
    if not solved or t >= VALIDATION_TIME_LIMIT_S:
        return 0.0
    return 1.0 / (1.0 + math.log(t + 1.0))


@dataclass
class ProblemScore:
    problem: str
    solved: bool
    time_s: float
    score: float


@dataclass
class ValidationRecord:
    candidate_id: str
    loadable: bool
    per_problem: list[ProblemScore] = field(default_factory=list)

    @property
    def mean_score(self) -> float:
        if not self.per_problem:
            return 0.0
        return sum(p.score for p in self.per_problem) / len(self.per_problem)


def _run_candidate(cand: CandidateProgram, task: Task, kind: str,
                   limits: ResourceLimits,
                   host_cmd: Sequence[str] | None) -> tuple[bool, float]:
    handle = open_program(cand.source or "", kind, task, host_cmd=host_cmd)
    try:
        if kind == "value":
            result = gbfs(task, ExternalValue(handle), limits)
        else:
            result = policy_rollout(task, ExternalPolicy(handle, limits.seed),
                                    limits)
    finally:
        handle.close()
    solved = result.outcome is Outcome.SOLVED and result.plan is not None
    if solved:
        solved = bool(validate_plan(task.domain, task.problem, result.plan.steps))
    return solved, result.stats.wall_time


def select_best(candidates: list[CandidateProgram], domain: Domain,
                problems: list[Problem], kind: str,
                limits: ResourceLimits | None = None,
                time_limit_s: float = VALIDATION_TIME_LIMIT_S, seed: int = 0,
                host_cmd: Sequence[str] | None = None,
                ) -> tuple[CandidateProgram, list[ValidationRecord]]:
    """Score every loadable candidate on the training problems (value
    functions via search, policies via rollout, each run capped, 60 s
    by default) and return the one with the best mean score; ties go to
    the earlier generation."""
    if limits is None:
        limits = ResourceLimits(time_limit_s=time_limit_s, seed=seed)
    tasks = [build_task(domain, p) for p in problems]
    records: list[ValidationRecord] = []
    for cand in candidates:
        if cand.source is None:
            records.append(ValidationRecord(cand.cand_id, loadable=False))
            continue
        record = ValidationRecord(cand.cand_id, loadable=False)
        for prob, task in zip(problems, tasks):
            try:
                solved, elapsed = _run_candidate(cand, task, kind, limits,
                                                 host_cmd)
                record.loadable = True
            except HandshakeError:
                solved, elapsed = False, 0.0
            record.per_problem.append(ProblemScore(
                prob.name, solved, elapsed, validation_score(elapsed, solved)))
        records.append(record)

    loadable = [(r, c) for r, c in zip(records, candidates) if r.loadable]
    if not loadable:
        raise NoLoadableCandidate(f"no loadable {kind} candidate")
    best_record, best_cand = max(loadable,
                                 key=lambda rc: (rc[0].mean_score, -rc[1].index))
    return best_cand, records


def select_mode(policy_mean: float, value_mean: float) -> Mode:
    """Portfolio choice: rollout when the policy alone validates
    strictly better, otherwise the complete dual-queue search."""
    return Mode.ROLLOUT_ONLY if policy_mean > value_mean else Mode.DUAL_QUEUE


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise DegenerateInput("need two sequences of equal length >= 2")
    try:
        return statistics.correlation(list(xs), list(ys))
    except statistics.StatisticsError as exc:
        raise DegenerateInput(str(exc)) from exc


# -- persistence -------------------------------------------------------------


def save_validation_records(records: list[ValidationRecord],
                            path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# progplan validation-records v1\n")
        writer = csv.writer(fh)
        writer.writerow(["candidate_id", "problem", "solved", "time_s", "score"])
        for record in records:
            for ps in record.per_problem:
                writer.writerow([record.candidate_id, ps.problem,
                                 int(ps.solved), f"{ps.time_s:.4f}",
                                 f"{ps.score:.6f}"])


def load_validation_records(path: str | Path) -> list[ValidationRecord]:
    by_id: dict[str, ValidationRecord] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in fh if not r.startswith("#")]
    for row in csv.DictReader(rows):
        record = by_id.setdefault(
            row["candidate_id"], ValidationRecord(row["candidate_id"], loadable=True))
        record.per_problem.append(ProblemScore(
            row["problem"], bool(int(row["solved"])),
            float(row["time_s"]), float(row["score"])))
    return list(by_id.values())
