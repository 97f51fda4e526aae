"""End-to-end experiment pipeline: prompts, candidate programs,
validation-based selection, mode choice and test runs, with optional
identifier anonymization (plans are mapped back to the original names
before validation, so coverage is always judged on the original
problems)."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from . import planio
from .harness import ConfigError, RunRecord, SolveSpec, run_solve, save_records
from .pddl import anonymizer
from .pddl.model import Domain, Problem
from .pddl.parser import parse_domain, parse_problem
from .pddl.printer import print_domain, print_problem
from .reports import write_coverage
from .search import ResourceLimits
from .synthesis import (
    CandidateProgram,
    ChatEndpoint,
    EndpointConfig,
    Mode,
    NoLoadableCandidate,
    build_prompt,
    generate_candidates,
    load_candidates_dir,
    save_candidates,
    save_validation_records,
    select_best,
    select_mode,
)
from .validation import validate_plan


class PipelineError(Exception):
    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


@dataclass
class PipelineConfig:
    domain_path: str
    train_dir: str
    test_dir: str
    out_dir: str
    mode: str = "auto"  # auto | gbfs | rollout | dual
    programs_dir: str | None = None
    endpoint: EndpointConfig | None = None
    n_candidates: int = 10
    train_count: int = 10
    time_limit_s: float = 1800.0
    memory_limit_bytes: int | None = 8 * 2**30
    validation_time_limit_s: float = 60.0
    validation_max_steps: int | None = None  # rollout step cap during selection
    stride: int = 1  # subsample every Nth problem from both splits
    seed: int = 0
    anonymize: bool = False
    host_cmd: tuple[str, ...] | None = None

    def check(self) -> None:
        if self.time_limit_s <= 0 or self.validation_time_limit_s <= 0:
            raise ConfigError("time limits must be positive")
        if self.memory_limit_bytes is not None and self.memory_limit_bytes <= 0:
            raise ConfigError("memory limit must be positive")
        if self.n_candidates < 1 or self.train_count < 1 or self.stride < 1:
            raise ConfigError("candidate, training and stride counts must be positive")
        if self.programs_dir is None and self.endpoint is None:
            raise ConfigError("need --programs-dir or an endpoint configuration")
        if self.mode not in ("auto", "gbfs", "rollout", "dual"):
            raise ConfigError(f"unknown mode '{self.mode}'")


@dataclass
class PipelineResult:
    mode: str
    best_value_id: str | None
    best_policy_id: str | None
    records: list[RunRecord]
    notes: list[str] = field(default_factory=list)

    @property
    def coverage(self) -> int:
        return sum(1 for r in self.records if r.solved)


def _load_problems(directory: str, domain: Domain,
                   stride: int = 1) -> list[tuple[Path, Problem]]:
    paths = sorted(Path(directory).glob("*.pddl"))[::stride]
    return [(p, parse_problem(p.read_text(encoding="utf-8"), domain))
            for p in paths]


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    cfg.check()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    # stage: parse
    try:
        domain = parse_domain(Path(cfg.domain_path).read_text(encoding="utf-8"))
        train = _load_problems(cfg.train_dir, domain, cfg.stride)
        test = _load_problems(cfg.test_dir, domain, cfg.stride)
    except Exception as exc:
        raise PipelineError("parse", str(exc)) from exc
    if not train:
        raise PipelineError("parse", f"no training problems in {cfg.train_dir}")
    if not test:
        raise PipelineError("parse", f"no test problems in {cfg.test_dir}")

    # the train_count smallest problems (by object count) are scored;
    # the two smallest go into the prompt
    train.sort(key=lambda pair: (len(pair[1].objects), pair[0].name))
    train = train[:cfg.train_count]

    # stage: anonymize (optional). Search and selection run on the
    # renamed encoding; plans are mapped back before validation.
    name_map = None
    run_domain, run_train, run_test = domain, train, test
    if cfg.anonymize:
        try:
            all_probs = [p for _, p in train] + [p for _, p in test]
            anon_dom, anon_probs, name_map = anonymizer.anonymize(domain, all_probs)
            anon_dir = out / "anonymized"
            for sub in ("", "train", "test"):
                (anon_dir / sub).mkdir(parents=True, exist_ok=True)
            (anon_dir / "domain.pddl").write_text(print_domain(anon_dom),
                                                  encoding="utf-8")
            anonymizer.save_name_map(name_map, str(anon_dir / "names.map"))
            renamed = []
            splits = ["train"] * len(train) + ["test"] * len(test)
            for (path, _), prob, split in zip(train + test, anon_probs, splits):
                anon_path = anon_dir / split / path.name
                anon_path.write_text(print_problem(prob), encoding="utf-8")
                renamed.append((anon_path, prob))
            run_domain = anon_dom
            run_train = renamed[:len(train)]
            run_test = renamed[len(train):]
            run_domain_path = anon_dir / "domain.pddl"
        except Exception as exc:
            raise PipelineError("anonymize", str(exc)) from exc
    else:
        run_domain_path = Path(cfg.domain_path)

    # stage: prompts (persisted even in offline mode; they are cheap
    # and document exactly what an endpoint would have seen)
    try:
        prompt_dir = out / "prompts"
        prompt_dir.mkdir(exist_ok=True)
        domain_text = print_domain(run_domain)
        two = [print_problem(p) for _, p in run_train[:2]]
        if len(two) == 1:
            two.append(two[0])
        prompts = {kind: build_prompt(kind, domain_text, two)
                   for kind in ("value", "policy")}
        for kind, prompt in prompts.items():
            (prompt_dir / f"{kind}.txt").write_text(prompt.render(),
                                                    encoding="utf-8")
    except Exception as exc:
        raise PipelineError("prompt", str(exc)) from exc

    # stage: candidates
    notes: list[str] = []
    pools: dict[str, list[CandidateProgram]] = {}
    try:
        for kind in ("value", "policy"):
            if cfg.programs_dir is not None:
                pool_dir = Path(cfg.programs_dir) / kind
                pools[kind] = (load_candidates_dir(pool_dir, kind)
                               if pool_dir.is_dir() else [])
            else:
                assert cfg.endpoint is not None
                pools[kind] = generate_candidates(
                    prompts[kind], ChatEndpoint(cfg.endpoint), cfg.n_candidates)
            if pools[kind]:
                save_candidates(pools[kind], out / "candidates" / kind)
            else:
                notes.append(f"missing {kind} candidate pool")
    except Exception as exc:
        raise PipelineError("candidates", str(exc)) from exc

    # stage: selection
    best: dict[str, CandidateProgram | None] = {"value": None, "policy": None}
    means: dict[str, float] = {"value": 0.0, "policy": 0.0}
    try:
        for kind in ("value", "policy"):
            if not pools[kind]:
                continue
            try:
                limits = ResourceLimits(
                    time_limit_s=cfg.validation_time_limit_s,
                    max_steps=cfg.validation_max_steps, seed=cfg.seed)
                chosen, records = select_best(
                    pools[kind], run_domain, [p for _, p in run_train], kind,
                    limits=limits, host_cmd=cfg.host_cmd)
            except NoLoadableCandidate:
                notes.append(f"no loadable {kind} candidate")
                continue
            best[kind] = chosen
            by_id = {r.candidate_id: r for r in records}
            means[kind] = by_id[chosen.cand_id].mean_score
            save_validation_records(records, out / f"validation_{kind}.csv")
    except Exception as exc:
        raise PipelineError("selection", str(exc)) from exc

    # stage: mode resolution
    mode = cfg.mode
    if mode == "auto":
        if best["value"] and best["policy"]:
            chosen_mode = select_mode(means["policy"], means["value"])
            mode = "rollout" if chosen_mode is Mode.ROLLOUT_ONLY else "dual"
        elif best["policy"]:
            mode = "rollout"
        elif best["value"]:
            mode = "gbfs"
            notes.append("auto mode degraded to gbfs: no policy available")
        else:
            raise PipelineError("mode", "auto mode needs a value or policy candidate")
    if mode in ("gbfs", "dual") and best["value"] is None:
        raise PipelineError("mode", f"mode {mode} needs a loadable value candidate")
    if mode in ("rollout", "dual") and best["policy"] is None:
        raise PipelineError("mode", f"mode {mode} needs a loadable policy candidate")

    # stage: test runs
    records: list[RunRecord] = []
    plans_dir = out / "plans"
    plans_dir.mkdir(exist_ok=True)
    try:
        for (run_path, run_prob), (orig_path, orig_prob) in zip(run_test, test):
            spec = SolveSpec(
                domain_path=str(run_domain_path),
                problem_path=str(run_path),
                mode=mode,
                heuristic_source=best["value"].source if best["value"] else None,
                policy_source=best["policy"].source if best["policy"] else None,
                heuristic="candidate" if best["value"] else "goal-count",
                policy="candidate" if best["policy"] else "first",
                time_limit_s=cfg.time_limit_s,
                memory_limit_bytes=cfg.memory_limit_bytes,
                seed=cfg.seed,
                host_cmd=cfg.host_cmd,
            )
            record = run_solve(spec)
            record.problem = orig_prob.name
            record.candidate_id = "+".join(
                best[k].cand_id for k in ("value", "policy") if best[k])
            if record.solved and record.plan_steps is not None:
                steps = record.plan_steps
                if name_map is not None:
                    steps = anonymizer.deanonymize_plan(steps, name_map)
                verdict = validate_plan(domain, orig_prob, steps)
                if not verdict.valid:
                    record.outcome = "error"
                    record.error = f"plan failed validation: {verdict.reason}"
                    record.plan_cost = None
                else:
                    planio.write_plan(steps, str(plans_dir / f"{orig_path.stem}.plan"))
            records.append(record)
    except Exception as exc:
        raise PipelineError("test-runs", str(exc)) from exc

    # stage: reports
    try:
        save_records(records, out / "records.csv")
        write_coverage({mode: records}, out)
        lines = [f"mode: {mode}"]
        for kind in ("value", "policy"):
            chosen = best[kind]
            lines.append(f"best {kind}: {chosen.cand_id if chosen else 'none'}")
        lines.extend(f"note: {n}" for n in notes)
        (out / "selection.md").write_text("\n".join(lines) + "\n", encoding="utf-8")
    except Exception as exc:
        raise PipelineError("report", str(exc)) from exc

    return PipelineResult(
        mode=mode,
        best_value_id=best["value"].cand_id if best["value"] else None,
        best_policy_id=best["policy"].cand_id if best["policy"] else None,
        records=records,
        notes=notes,
    )
