"""Shared record of acceptance outcomes, printed in the pytest terminal summary."""

LINES: list[str] = []


def record(number: int, title: str, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2} {title}: {detail}"
    LINES.append(line)
    print(line)
    return ok
