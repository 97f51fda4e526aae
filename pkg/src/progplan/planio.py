"""Plan interchange format: one "(name arg1 ... argk)" action per line,
";" comment lines, and a trailing "; cost = N (unit cost)" line."""

from __future__ import annotations

import re

PlanSteps = tuple[tuple[str, tuple[str, ...]], ...]

_ACTION_RE = re.compile(r"^\(\s*([^\s()]+)((?:\s+[^\s()]+)*)\s*\)$")


def format_plan(steps: PlanSteps) -> str:
    lines = []
    for name, args in steps:
        body = " ".join((name,) + args)
        lines.append(f"({body})")
    lines.append(f"; cost = {len(steps)} (unit cost)")
    return "\n".join(lines) + "\n"


def parse_plan(text: str) -> PlanSteps:
    steps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        m = _ACTION_RE.match(line)
        if not m:
            raise ValueError(f"plan line {lineno}: cannot parse {raw!r}")
        name = m.group(1).lower()
        args = tuple(a.lower() for a in m.group(2).split())
        steps.append((name, args))
    return tuple(steps)


def read_plan(path: str) -> PlanSteps:
    with open(path, encoding="utf-8") as fh:
        return parse_plan(fh.read())


def write_plan(steps: PlanSteps, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_plan(steps))
