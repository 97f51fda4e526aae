"""Command-line interface.

Subcommands: parse, anonymize, solve, validate, synthesize, select,
pipeline, report. The endpoint API key is read from the environment
variable named by --key-env (default PROGPLAN_API_KEY).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import planio
from .harness import (
    DEFAULT_MEMORY_LIMIT,
    DEFAULT_TIME_LIMIT_S,
    EXIT_CODES,
    ConfigError,
    SolveSpec,
    run_solve,
    save_records,
    load_records,
)
from .pddl import anonymizer
from .pddl.parser import parse_domain, parse_problem
from .pddl.printer import print_domain, print_problem
from .pipeline import PipelineConfig, PipelineError, run_pipeline
from .reports import write_correlation, write_cost_pairs, write_coverage
from .synthesis import (
    ChatEndpoint,
    EndpointConfig,
    build_prompt,
    generate_candidates,
    load_candidates_dir,
    load_validation_records,
    save_candidates,
    save_validation_records,
    select_best,
)
from .validation import validate_plan


def _add_limits(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT_S,
                        help="wall-clock limit per problem in seconds")
    parser.add_argument("--memory-limit", type=int, default=DEFAULT_MEMORY_LIMIT,
                        help="address-space cap per problem in bytes; 0 disables")
    parser.add_argument("--seed", type=int, default=0)


def _add_host(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--host-cmd", default=None,
                        help="program host command (default: python -m progplan_host, "
                             "or $PROGPLAN_HOST_CMD)")
    parser.add_argument("--program-timeout", type=float, default=10.0,
                        help="per-request timeout for external programs in seconds")


def _host_cmd(args) -> tuple[str, ...] | None:
    return tuple(args.host_cmd.split()) if args.host_cmd else None


def _load_domain(path: str):
    return parse_domain(Path(path).read_text(encoding="utf-8"))


def _problem_paths(problems: list[str]) -> list[Path]:
    paths: list[Path] = []
    for entry in problems:
        p = Path(entry)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.pddl")))
        else:
            paths.append(p)
    return paths


def cmd_parse(args) -> int:
    dom = _load_domain(args.domain)
    print(f"domain {dom.name}: {len(dom.types)} types, "
          f"{len(dom.predicates)} predicates, {len(dom.schemas)} actions")
    for path in _problem_paths(args.problems):
        prob = parse_problem(path.read_text(encoding="utf-8"), dom)
        print(f"problem {prob.name}: {len(prob.objects)} objects, "
              f"{len(prob.init)} init atoms, {len(prob.goal)} goal literals")
    return 0


def cmd_anonymize(args) -> int:
    dom = _load_domain(args.domain)
    paths = _problem_paths(args.problems)
    probs = [parse_problem(p.read_text(encoding="utf-8"), dom) for p in paths]
    anon_dom, anon_probs, name_map = anonymizer.anonymize(dom, probs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "domain.pddl").write_text(print_domain(anon_dom), encoding="utf-8")
    for path, prob in zip(paths, anon_probs):
        (out / path.name).write_text(print_problem(prob), encoding="utf-8")
    anonymizer.save_name_map(name_map, str(out / "names.map"))
    print(f"wrote anonymized domain, {len(anon_probs)} problems and names.map to {out}")
    return 0


def cmd_solve(args) -> int:
    spec = SolveSpec(
        domain_path=args.domain,
        problem_path=args.problem,
        mode=args.mode,
        heuristic=args.heuristic,
        policy=args.policy,
        time_limit_s=args.time_limit,
        memory_limit_bytes=args.memory_limit or None,
        seed=args.seed,
        host_cmd=_host_cmd(args),
        program_timeout_s=args.program_timeout,
    )
    record = run_solve(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if record.solved and record.plan_steps is not None:
        planio.write_plan(record.plan_steps, str(out / f"{Path(args.problem).stem}.plan"))
    save_records([record], out / "record.csv")
    print(f"{record.problem}: {record.outcome}"
          + (f", cost {record.plan_cost}" if record.solved else "")
          + f", {record.wall_time:.2f}s, {record.expansions} expansions")
    return EXIT_CODES.get(record.outcome, 1)


def cmd_validate(args) -> int:
    dom = _load_domain(args.domain)
    prob = parse_problem(Path(args.problem).read_text(encoding="utf-8"), dom)
    steps = planio.read_plan(args.plan)
    outcome = validate_plan(dom, prob, steps)
    if outcome.valid:
        print(f"valid, cost {outcome.cost}")
        return 0
    print(f"invalid at step {outcome.step}: {outcome.reason}")
    return 1


def _endpoint_from_args(args) -> EndpointConfig:
    """Endpoint settings from a JSON config file and/or flags; flags
    win, and the API key always comes from the environment."""
    settings: dict = {}
    if getattr(args, "endpoint_config", None):
        import json

        settings = json.loads(Path(args.endpoint_config).read_text(encoding="utf-8"))
    url = args.endpoint or settings.get("url")
    model = args.model or settings.get("model")
    key_env = args.key_env or settings.get("key_env", "PROGPLAN_API_KEY")
    temperature = args.temperature
    if temperature is None:
        temperature = settings.get("temperature")
    if not url or not model:
        raise ConfigError("an endpoint URL and model are required "
                          "without --programs-dir")
    return EndpointConfig(
        url=url,
        model=model,
        api_key=os.environ.get(key_env),
        temperature=temperature,
    )


def cmd_synthesize(args) -> int:
    dom = _load_domain(args.domain)
    paths = _problem_paths(args.problems)
    probs = [parse_problem(p.read_text(encoding="utf-8"), dom) for p in paths]
    probs.sort(key=lambda p: len(p.objects))
    if len(probs) < 2:
        raise ConfigError("need at least two training problems for the prompt")
    prompt = build_prompt(args.kind, print_domain(dom),
                          [print_problem(p) for p in probs[:2]])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"prompt_{args.kind}.txt").write_text(prompt.render(), encoding="utf-8")
    if args.programs_dir:
        candidates = load_candidates_dir(args.programs_dir, args.kind)
    else:
        candidates = generate_candidates(prompt, ChatEndpoint(_endpoint_from_args(args)),
                                         n=args.num_candidates)
    save_candidates(candidates, out / "candidates")
    print(f"saved {len(candidates)} {args.kind} candidates to {out / 'candidates'}")
    return 0


def cmd_select(args) -> int:
    dom = _load_domain(args.domain)
    paths = _problem_paths(args.problems)
    probs = [parse_problem(p.read_text(encoding="utf-8"), dom) for p in paths]
    candidates = load_candidates_dir(args.candidates, args.kind)
    if not candidates:
        raise ConfigError(f"no candidate programs in {args.candidates}")
    best, records = select_best(
        candidates, dom, probs, args.kind,
        time_limit_s=args.validation_time_limit, seed=args.seed,
        host_cmd=_host_cmd(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_validation_records(records, out / f"validation_{args.kind}.csv")
    by_id = {r.candidate_id: r for r in records}
    print(f"best {args.kind}: {best.cand_id} "
          f"(mean score {by_id[best.cand_id].mean_score:.3f})")
    (out / f"best_{args.kind}.txt").write_text(best.cand_id + "\n", encoding="utf-8")
    return 0


def cmd_pipeline(args) -> int:
    endpoint = None
    if not args.programs_dir:
        endpoint = _endpoint_from_args(args)
    cfg = PipelineConfig(
        domain_path=args.domain,
        train_dir=args.train_dir,
        test_dir=args.test_dir,
        out_dir=args.out,
        mode=args.mode,
        programs_dir=args.programs_dir,
        endpoint=endpoint,
        n_candidates=args.num_candidates,
        train_count=args.train_count,
        time_limit_s=args.time_limit,
        memory_limit_bytes=args.memory_limit or None,
        validation_time_limit_s=args.validation_time_limit,
        validation_max_steps=args.validation_max_steps,
        stride=args.stride,
        seed=args.seed,
        anonymize=args.anonymize,
        host_cmd=_host_cmd(args),
    )
    result = run_pipeline(cfg)
    print(f"mode {result.mode}: solved {result.coverage}/{len(result.records)}")
    for note in result.notes:
        print(f"note: {note}")
    return 0


def cmd_report(args) -> int:
    record_sets = {}
    for entry in args.records:
        if "=" in entry:
            label, path = entry.split("=", 1)
        else:
            label, path = Path(entry).stem, entry
        record_sets[label] = load_records(path)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_coverage(record_sets, out)
    labels = list(record_sets)
    if len(labels) >= 2:
        write_cost_pairs(labels[0], record_sets[labels[0]],
                         labels[1], record_sets[labels[1]], out,
                         sentinel=args.cost_sentinel)
    if args.validation:
        validation = load_validation_records(args.validation)
        coverage_by_candidate: dict[str, int] = {}
        for records in record_sets.values():
            for record in records:
                if record.candidate_id:
                    coverage_by_candidate[record.candidate_id] = (
                        coverage_by_candidate.get(record.candidate_id, 0)
                        + int(record.solved))
        r = write_correlation(validation, coverage_by_candidate, out)
        print(f"pearson r (validation score vs coverage): {r}")
    print(f"reports written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="progplan",
        description="Satisficing PDDL planner driven by external programs "
                    "as value functions and policies.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and check PDDL files")
    p.add_argument("--domain", required=True)
    p.add_argument("--problems", nargs="*", default=[])
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("anonymize", help="rename all identifiers to symbols")
    p.add_argument("--domain", required=True)
    p.add_argument("--problems", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_anonymize)

    p = sub.add_parser("solve", help="solve one problem under resource caps")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--mode", choices=["gbfs", "rollout", "dual"], default="gbfs")
    p.add_argument("--heuristic", default="goal-count",
                   help="goal-count | blind | path to a value program")
    p.add_argument("--policy", default="first",
                   help="first | random | path to a policy program")
    p.add_argument("--out", default="out")
    _add_limits(p)
    _add_host(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="check a plan file against a problem")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--plan", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("synthesize", help="build prompts and generate candidates")
    p.add_argument("--domain", required=True)
    p.add_argument("--problems", nargs="+", required=True,
                   help="training problems (files or a directory)")
    p.add_argument("--kind", choices=["value", "policy"], required=True)
    p.add_argument("--programs-dir", default=None,
                   help="offline mode: read candidates from this directory")
    p.add_argument("--endpoint", default=None, help="chat-completions URL")
    p.add_argument("--model", default=None)
    p.add_argument("--key-env", default="PROGPLAN_API_KEY")
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--endpoint-config", default=None,
                   help="JSON file with url/model/key_env/temperature")
    p.add_argument("--num-candidates", type=int, default=10)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("select", help="score candidates and pick the best")
    p.add_argument("--domain", required=True)
    p.add_argument("--problems", nargs="+", required=True)
    p.add_argument("--candidates", required=True,
                   help="directory of candidate .py files")
    p.add_argument("--kind", choices=["value", "policy"], required=True)
    p.add_argument("--validation-time-limit", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out")
    _add_host(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("pipeline", help="synthesis + selection + test runs")
    p.add_argument("--domain", required=True)
    p.add_argument("--train-dir", required=True)
    p.add_argument("--test-dir", required=True)
    p.add_argument("--mode", choices=["auto", "gbfs", "rollout", "dual"],
                   default="auto")
    p.add_argument("--programs-dir", default=None,
                   help="offline pools: <dir>/value/*.py and <dir>/policy/*.py")
    p.add_argument("--endpoint", default=None)
    p.add_argument("--model", default=None)
    p.add_argument("--key-env", default="PROGPLAN_API_KEY")
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--endpoint-config", default=None,
                   help="JSON file with url/model/key_env/temperature")
    p.add_argument("--num-candidates", type=int, default=10)
    p.add_argument("--train-count", type=int, default=10)
    p.add_argument("--stride", type=int, default=1,
                   help="use every Nth problem of each split")
    p.add_argument("--validation-time-limit", type=float, default=60.0)
    p.add_argument("--validation-max-steps", type=int, default=None,
                   help="rollout step cap while scoring candidates")
    p.add_argument("--anonymize", action="store_true")
    p.add_argument("--out", default="out")
    _add_limits(p)
    _add_host(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("report", help="coverage, cost pairs and correlation")
    p.add_argument("--records", nargs="+", required=True,
                   help="records CSVs, optionally label=path")
    p.add_argument("--validation", default=None,
                   help="validation records CSV for the correlation table")
    p.add_argument("--cost-sentinel", type=float, default=None,
                   help="cost for unsolved problems (default: 10x max observed)")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
