"""Shared store for acceptance result lines (printed in the terminal summary)."""

LINES: list[str] = []


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}"
    LINES.append(line)
    print(line)
