"""The request loop: line-delimited JSON over stdin/stdout.

stdout carries protocol lines only. User code runs with sys.stdout
swapped to stderr, so stray prints cannot corrupt the channel, and
every user exception after the handshake is reported as an error reply
rather than terminating the process. A nonzero exit happens only on a
protocol violation before the handshake completes.
"""

from __future__ import annotations

import contextlib
import json
import math
import sys

from .loader import ProgramLoadError, load_program


@contextlib.contextmanager
def _shield_stdout():
    saved = sys.stdout
    sys.stdout = sys.stderr
    try:
        yield
    finally:
        sys.stdout = saved


def _write(out, obj) -> None:
    out.write(json.dumps(obj) + "\n")
    out.flush()


def serve(stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    out = stdout if stdout is not None else sys.stdout

    line = stdin.readline()
    if not line:
        return 1
    try:
        init = json.loads(line)
        if init.get("op") != "init":
            return 1
    except (json.JSONDecodeError, AttributeError):
        return 1

    try:
        with _shield_stdout():
            program = load_program(
                init.get("kind", ""), init.get("domain", ""),
                init.get("problem", ""), init.get("program", ""))
    except ProgramLoadError as exc:
        _write(out, {"ok": False, "error": str(exc)})
        return 0
    _write(out, {"ok": True})

    for line in stdin:
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            _write(out, {"error": "malformed request"})
            continue
        op = message.get("op")
        if op == "quit":
            return 0
        try:
            if op == "evaluate":
                state = frozenset(tuple(a) for a in message["state"])
                with _shield_stdout():
                    value = float(program.evaluate(state))
                if math.isfinite(value):
                    _write(out, {"value": value})
                else:
                    _write(out, {"value": "inf"})
            elif op == "choose":
                state = frozenset(tuple(a) for a in message["state"])
                applicable = [tuple(a) for a in message["applicable"]]
                with _shield_stdout():
                    index = program.choose(state, applicable)
                if isinstance(index, bool) or not isinstance(index, int):
                    _write(out, {"error":
                                 f"choose returned {type(index).__name__}, "
                                 "expected int"})
                else:
                    _write(out, {"index": index})
            else:
                _write(out, {"error": f"unknown op {op!r}"})
        except Exception as exc:
            _write(out, {"error": repr(exc)})
    return 0


def main() -> int:
    return serve()


if __name__ == "__main__":
    sys.exit(main())
