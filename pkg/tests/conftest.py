import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import time

import pytest

_criteria_lines: list[str] = []


@pytest.fixture
def criterion(request, capsys):
    """Time an acceptance criterion and print one PASS/FAIL line for it."""
    record = {}

    def start(number: int, title: str, limit: float):
        record.update(number=number, title=title, limit=limit, t0=time.perf_counter())

    yield start
    elapsed = time.perf_counter() - record["t0"]
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed and elapsed < record["limit"]
    line = (
        f"[{'PASS' if ok else 'FAIL'}] criterion {record['number']}: {record['title']} "
        f"({elapsed:.2f}s, limit {record['limit']:.0f}s)"
    )
    _criteria_lines.append(line)
    with capsys.disabled():
        print("\n" + line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if _criteria_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_criteria_lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
