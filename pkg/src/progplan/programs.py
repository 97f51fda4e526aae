"""Value functions and policies: built-ins, external subprocess programs
and the wrappers that make policies sound and heuristics safe.

External programs are served by a host subprocess speaking a
line-delimited JSON protocol over stdin/stdout (one message per line,
UTF-8, atoms as arrays of lower-cased name strings):

    -> {"op":"init","kind":"value"|"policy","domain":...,"problem":...,"program":...}
    <- {"ok":true} | {"ok":false,"error":...}
    -> {"op":"evaluate","state":[["at","b1","rooma"],...]}
    <- {"value":4.5} | {"value":"inf"} | {"error":...}
    -> {"op":"choose","state":[...],"applicable":[["pick","b1","rooma","left"],...]}
    <- {"index":0} | {"error":...}
    -> {"op":"quit"}

Any protocol failure (crash, timeout, malformed reply) marks the handle
dead and degrades to the wrapper fallback: the LARGE constant for value
functions, a seeded-random applicable action for policies. The planner
itself never raises on a misbehaving program.
"""

from __future__ import annotations

import json
import math
import os
import queue
import random
import subprocess
import sys
import threading
from typing import Callable, Sequence

from .grounding import GroundAction, State, Task
from .pddl.printer import print_domain, print_problem

LARGE_VALUE = 10.0**9
DEFAULT_CALL_TIMEOUT_S = 10.0


class ProgramError(Exception):
    pass


class SpawnError(ProgramError):
    pass


class HandshakeError(ProgramError):
    pass


class ProgramDead(ProgramError):
    pass


def encode_state(state: State) -> list[list[str]]:
    return [[a.predicate, *a.args] for a in state.canonical]


def encode_action(action: GroundAction) -> list[str]:
    return [action.schema, *action.args]


class ProgramHandle:
    """A live external evaluator reachable over the subprocess protocol.

    Requests are strictly sequential per handle. A handle that times
    out, crashes or replies with garbage is flagged dead and killed;
    later requests fail fast with ProgramDead.
    """

    def __init__(self, proc: subprocess.Popen, kind: str,
                 call_timeout_s: float = DEFAULT_CALL_TIMEOUT_S):
        self.proc = proc
        self.kind = kind
        self.call_timeout_s = call_timeout_s
        self.alive = True
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        try:
            for line in self.proc.stdout:  # type: ignore[union-attr]
                self._lines.put(line)
        except (ValueError, OSError):
            pass
        self._lines.put(None)

    def request(self, message: dict) -> dict:
        if not self.alive:
            raise ProgramDead("handle is closed")
        try:
            self.proc.stdin.write(json.dumps(message) + "\n")  # type: ignore[union-attr]
            self.proc.stdin.flush()  # type: ignore[union-attr]
        except (BrokenPipeError, OSError, ValueError) as exc:
            self._kill()
            raise ProgramDead(f"write failed: {exc}") from exc
        try:
            line = self._lines.get(timeout=self.call_timeout_s)
        except queue.Empty:
            self._kill()
            raise ProgramDead("reply timeout") from None
        if line is None:
            self._kill()
            raise ProgramDead("program exited")
        try:
            reply = json.loads(line)
        except json.JSONDecodeError as exc:
            self._kill()
            raise ProgramDead(f"malformed reply: {line[:80]!r}") from exc
        if not isinstance(reply, dict):
            self._kill()
            raise ProgramDead(f"non-object reply: {line[:80]!r}")
        return reply

    def _kill(self) -> None:
        self.alive = False
        try:
            self.proc.kill()
        except OSError:
            pass

    def close(self) -> None:
        if self.alive:
            try:
                self.proc.stdin.write(json.dumps({"op": "quit"}) + "\n")  # type: ignore[union-attr]
                self.proc.stdin.flush()  # type: ignore[union-attr]
            except (BrokenPipeError, OSError, ValueError):
                pass
            self.alive = False
        try:
            self.proc.wait(timeout=2)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()

    def __enter__(self) -> "ProgramHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def default_host_command() -> list[str]:
    """Command for the program host; override with PROGPLAN_HOST_CMD."""
    env = os.environ.get("PROGPLAN_HOST_CMD")
    if env:
        return env.split()
    return [sys.executable, "-m", "progplan_host"]


def open_program(source: str, kind: str, task: Task,
                 host_cmd: Sequence[str] | None = None,
                 call_timeout_s: float = DEFAULT_CALL_TIMEOUT_S,
                 stderr=subprocess.DEVNULL) -> ProgramHandle:
    """Spawn a host subprocess and hand it the program source.

    The handshake sends the program kind, the domain and problem as
    PDDL text, and the program source; the host answers {"ok": true}
    once the program is loaded.
    """
    if kind not in ("value", "policy"):
        raise ValueError(f"kind must be 'value' or 'policy', not {kind!r}")
    cmd = list(host_cmd) if host_cmd is not None else default_host_command()
    try:
        proc = subprocess.Popen(
            cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=stderr,
            text=True, encoding="utf-8", bufsize=1)
    except OSError as exc:
        raise SpawnError(f"cannot spawn host {cmd!r}: {exc}") from exc
    handle = ProgramHandle(proc, kind, call_timeout_s)
    init = {
        "op": "init",
        "kind": kind,
        "domain": print_domain(task.domain),
        "problem": print_problem(task.problem),
        "program": source,
    }
    try:
        reply = handle.request(init)
    except ProgramDead as exc:
        handle.close()
        raise HandshakeError(f"host died during handshake: {exc}") from exc
    if not reply.get("ok"):
        handle.close()
        raise HandshakeError(str(reply.get("error", "program failed to load")))
    return handle


# -- value functions ---------------------------------------------------------


def goal_count(task: Task, state: State) -> int:
    """Number of goal literals not satisfied in the state."""
    unsatisfied = sum(1 for a in task.goal_pos if a not in state.atoms)
    unsatisfied += sum(1 for a in task.goal_neg if a in state.atoms)
    return unsatisfied


def safe_value(raw: Callable[[Task, State], object], task: Task, state: State,
               large: float = LARGE_VALUE) -> float:
    """Clamp a raw evaluation to a finite value: infinities, NaNs,
    errors, timeouts and malformed replies all become the large
    constant; finite negatives clamp to 0. Never raises."""
    try:
        value = raw(task, state)
    except Exception:
        return large
    try:
        value = float(value)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        return large
    if math.isnan(value) or math.isinf(value):
        return large
    return max(0.0, value)


class ValueFn:
    """Base value function; evaluate() must return a finite value."""

    name = "value"

    def evaluate(self, task: Task, state: State) -> float:
        raise NotImplementedError


class GoalCountValue(ValueFn):
    name = "goal-count"

    def evaluate(self, task: Task, state: State) -> float:
        return float(goal_count(task, state))


class BlindValue(ValueFn):
    """Constant-zero heuristic."""

    name = "blind"

    def evaluate(self, task: Task, state: State) -> float:
        return 0.0


class ExternalValue(ValueFn):
    name = "external-value"

    def __init__(self, handle: ProgramHandle, large: float = LARGE_VALUE):
        self.handle = handle
        self.large = large

    def _raw(self, task: Task, state: State) -> object:
        reply = self.handle.request({"op": "evaluate", "state": encode_state(state)})
        if "error" in reply:
            raise ProgramError(str(reply["error"]))
        value = reply.get("value")
        if value == "inf":
            return math.inf
        return value

    def evaluate(self, task: Task, state: State) -> float:
        return safe_value(self._raw, task, state, self.large)


# -- policies ----------------------------------------------------------------


class PolicyFn:
    """Base policy; predict() proposes an action or None.

    The soundness wrapper (sound_action) turns any proposal into a
    guaranteed member of the applicable set, falling back to a seeded
    random choice. The seed is carried by the policy.
    """

    name = "policy"
    seed = 0

    def predict(self, task: Task, state: State,
                apps: list[GroundAction]) -> GroundAction | None:
        raise NotImplementedError


class FirstApplicablePolicy(PolicyFn):
    name = "first-applicable"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def predict(self, task, state, apps):
        return apps[0]


class RandomPolicy(PolicyFn):
    name = "random"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._rng = random.Random(seed)

    def predict(self, task, state, apps):
        return self._rng.choice(apps)


class ExternalPolicy(PolicyFn):
    """Protocol-backed policy; replies are indices into the transmitted
    applicable-action list, which makes the membership check structural."""

    name = "external-policy"

    def __init__(self, handle: ProgramHandle, seed: int = 0):
        self.handle = handle
        self.seed = seed

    def predict(self, task, state, apps):
        reply = self.handle.request({
            "op": "choose",
            "state": encode_state(state),
            "applicable": [encode_action(a) for a in apps],
        })
        index = reply.get("index")
        if isinstance(index, bool) or not isinstance(index, int):
            return None
        if 0 <= index < len(apps):
            return apps[index]
        return None


def sound_action(policy: PolicyFn, task: Task, state: State,
                 apps: list[GroundAction], rng: random.Random) -> GroundAction:
    """The returned action is always a member of apps: an invalid
    prediction (wrong action, bad index, timeout, crash, exception)
    falls back to a uniform random applicable action. The policy is
    queried once per state; there is no re-query after a bad reply."""
    if not apps:
        raise ValueError("sound_action requires a non-empty applicable set")
    try:
        choice = policy.predict(task, state, apps)
    except Exception:
        choice = None
    if choice is not None and choice in apps:
        return choice
    return rng.choice(apps)
