"""Report artifacts: coverage tables, paired plan costs and the
correlation between validation score and coverage.

Unsolved problems in cost pairs get a sentinel value (the plot axis
limit): by default ten times the largest observed cost, so downstream
plots can clip while the CSV stays machine readable.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .harness import RunRecord
from .synthesis import DegenerateInput, ValidationRecord, pearson


class EmptyInput(Exception):
    pass


def coverage_rows(record_sets: dict[str, list[RunRecord]]) -> list[tuple[str, int, int]]:
    if not record_sets:
        raise EmptyInput("no record sets")
    return [(label, sum(1 for r in records if r.solved), len(records))
            for label, records in record_sets.items()]


def cost_pair_rows(label_a: str, records_a: list[RunRecord],
                   label_b: str, records_b: list[RunRecord],
                   sentinel: float | None = None,
                   ) -> tuple[list[tuple[str, float, float]], float]:
    """Per-problem cost pairs; a problem one side did not solve gets the
    sentinel in that side's column."""
    by_a = {r.problem: r for r in records_a}
    by_b = {r.problem: r for r in records_b}
    problems = sorted(set(by_a) | set(by_b))
    if not problems:
        raise EmptyInput("no problems in either record set")
    if sentinel is None:
        observed = [r.plan_cost for r in records_a + records_b
                    if r.plan_cost is not None]
        sentinel = 10.0 * max(observed) if observed else 1.0
    rows = []
    for prob in problems:
        a = by_a.get(prob)
        b = by_b.get(prob)
        cost_a = float(a.plan_cost) if a and a.solved and a.plan_cost is not None else sentinel
        cost_b = float(b.plan_cost) if b and b.solved and b.plan_cost is not None else sentinel
        rows.append((prob, cost_a, cost_b))
    return rows, sentinel


def correlation_rows(validation_records: list[ValidationRecord],
                     coverage_by_candidate: dict[str, int],
                     ) -> tuple[list[tuple[str, float, int]], float | str]:
    """Mean validation score vs. test coverage per candidate; the
    Pearson r is "degenerate" when it is undefined."""
    rows = []
    for record in validation_records:
        if record.candidate_id in coverage_by_candidate:
            rows.append((record.candidate_id, record.mean_score,
                         coverage_by_candidate[record.candidate_id]))
    if not rows:
        raise EmptyInput("no candidates shared between records")
    try:
        r = pearson([row[1] for row in rows], [row[2] for row in rows])
    except DegenerateInput:
        r = "degenerate"
    return rows, r


# -- file emission -----------------------------------------------------------


def write_coverage(record_sets: dict[str, list[RunRecord]], out_dir: str | Path) -> None:
    out_dir = Path(out_dir)
    rows = coverage_rows(record_sets)
    with open(out_dir / "coverage.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write("# progplan coverage v1\n")
        writer = csv.writer(fh)
        writer.writerow(["approach", "solved", "total"])
        writer.writerows(rows)
    lines = ["| approach | coverage |", "| --- | --- |"]
    lines += [f"| {label} | {solved}/{total} |" for label, solved, total in rows]
    (out_dir / "coverage.md").write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_cost_pairs(label_a: str, records_a: list[RunRecord],
                     label_b: str, records_b: list[RunRecord],
                     out_dir: str | Path, sentinel: float | None = None) -> None:
    out_dir = Path(out_dir)
    rows, used_sentinel = cost_pair_rows(label_a, records_a, label_b, records_b,
                                         sentinel)
    with open(out_dir / "cost_pairs.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# progplan cost-pairs v1 sentinel={used_sentinel}\n")
        writer = csv.writer(fh)
        writer.writerow(["problem", f"cost_{label_a}", f"cost_{label_b}"])
        writer.writerows(rows)
    lines = [f"unsolved sentinel: {used_sentinel:g}", "",
             f"| problem | cost {label_a} | cost {label_b} |",
             "| --- | --- | --- |"]
    lines += [f"| {p} | {a:g} | {b:g} |" for p, a, b in rows]
    (out_dir / "cost_pairs.md").write_text("\n".join(lines) + "\n",
                                           encoding="utf-8")


def write_correlation(validation_records: list[ValidationRecord],
                      coverage_by_candidate: dict[str, int],
                      out_dir: str | Path) -> float | str:
    out_dir = Path(out_dir)
    rows, r = correlation_rows(validation_records, coverage_by_candidate)
    with open(out_dir / "correlation.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# progplan correlation v1 pearson_r={r}\n")
        writer = csv.writer(fh)
        writer.writerow(["candidate_id", "mean_validation_score", "coverage"])
        writer.writerows(rows)
    lines = [f"Pearson r (validation score vs coverage): {r}", "",
             "| candidate | mean validation score | coverage |",
             "| --- | --- | --- |"]
    lines += [f"| {c} | {s:.4f} | {cov} |" for c, s, cov in rows]
    (out_dir / "correlation.md").write_text("\n".join(lines) + "\n",
                                            encoding="utf-8")
    return r
