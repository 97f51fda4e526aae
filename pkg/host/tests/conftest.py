import json
import subprocess
import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
PROGRAMS_DIR = TESTS_DIR / "programs"

HOST_CMD = (sys.executable, "-m", "progplan_host")

GRIPPER_DOMAIN = """\
(define (domain gripper)
  (:requirements :strips :typing :equality)
  (:types room ball gripper)
  (:predicates
    (at-robby ?r - room)
    (at ?b - ball ?r - room)
    (free ?g - gripper)
    (carry ?b - ball ?g - gripper))
  (:action move
   :parameters (?from - room ?to - room)
   :precondition (and (at-robby ?from) (not (= ?from ?to)))
   :effect (and (at-robby ?to) (not (at-robby ?from))))
  (:action pick
   :parameters (?b - ball ?r - room ?g - gripper)
   :precondition (and (at ?b ?r) (at-robby ?r) (free ?g))
   :effect (and (carry ?b ?g) (not (at ?b ?r)) (not (free ?g))))
  (:action drop
   :parameters (?b - ball ?r - room ?g - gripper)
   :precondition (and (carry ?b ?g) (at-robby ?r))
   :effect (and (at ?b ?r) (free ?g) (not (carry ?b ?g))))
)
"""


def gripper_problem(n_balls: int, name: str | None = None) -> str:
    name = name or f"gripper-{n_balls}"
    balls = [f"ball{i}" for i in range(1, n_balls + 1)]
    objects = ["rooma - room", "roomb - room"]
    objects += [f"{b} - ball" for b in balls]
    objects += ["left - gripper", "right - gripper"]
    init = ["(at-robby rooma)"] + [f"(at {b} rooma)" for b in balls]
    init += ["(free left)", "(free right)"]
    goal = [f"(at {b} roomb)" for b in balls]
    return (
        f"(define (problem {name})\n  (:domain gripper)\n"
        f"  (:objects {' '.join(objects)})\n"
        f"  (:init {' '.join(init)})\n"
        f"  (:goal (and {' '.join(goal)})))\n"
    )


def state_atoms(n_balls: int) -> list[list[str]]:
    atoms = [["at-robby", "rooma"], ["free", "left"], ["free", "right"]]
    atoms += [["at", f"ball{i}", "rooma"] for i in range(1, n_balls + 1)]
    return atoms


class HostSession:
    """One host subprocess driven line by line."""

    def __init__(self):
        self.proc = subprocess.Popen(
            HOST_CMD, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.PIPE, text=True, encoding="utf-8", bufsize=1)
        self.raw_lines: list[str] = []

    def send(self, obj) -> None:
        self.proc.stdin.write(json.dumps(obj) + "\n")
        self.proc.stdin.flush()

    def send_raw(self, line: str) -> None:
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()

    def recv(self) -> dict:
        line = self.proc.stdout.readline()
        self.raw_lines.append(line)
        return json.loads(line)

    def rpc(self, obj) -> dict:
        self.send(obj)
        return self.recv()

    def init(self, kind: str, program: str, problem: str | None = None) -> dict:
        return self.rpc({
            "op": "init", "kind": kind, "domain": GRIPPER_DOMAIN,
            "problem": problem or gripper_problem(4), "program": program,
        })

    def close(self) -> tuple[int, str]:
        try:
            self.send({"op": "quit"})
        except (BrokenPipeError, OSError, ValueError):
            pass
        try:
            self.proc.stdin.close()
        except OSError:
            pass
        try:
            code = self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            code = self.proc.wait()
        stderr = self.proc.stderr.read() if self.proc.stderr else ""
        return code, stderr


@pytest.fixture()
def session():
    s = HostSession()
    yield s
    s.close()


def reference_program(name: str) -> str:
    return (PROGRAMS_DIR / name).read_text(encoding="utf-8")
