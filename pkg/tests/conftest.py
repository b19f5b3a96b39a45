"""Shared pytest wiring: the acceptance suite's one-line-per-criterion report."""

import re

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(num: int, name: str, **metrics) -> None:
    detail = ", ".join(f"{k}={v}" for k, v in metrics.items())
    line = f"[acceptance {num:02d}] {name}: PASS" + (f"  ({detail})" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    lines = list(ACCEPTANCE_LINES)
    for rep in terminalreporter.stats.get("failed", []):
        m = re.search(r"test_c(\d+)_(\w+)", rep.nodeid)
        if m:
            lines.append(f"[acceptance {int(m.group(1)):02d}] "
                         f"{m.group(2).replace('_', ' ')}: FAIL")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
