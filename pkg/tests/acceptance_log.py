"""Collects one pass/fail line per acceptance criterion for the terminal summary."""

RESULTS = {}


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    RESULTS[number] = line
    print(line)
