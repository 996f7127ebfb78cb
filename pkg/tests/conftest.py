"""Shared fixtures and the per-criterion acceptance report."""
from __future__ import annotations

import math

import pytest

from satqkd.channel import LinkModels
from satqkd.orbitpass import generate_pass

ZENITH = math.pi / 2


@pytest.fixture(scope="session")
def models() -> LinkModels:
    return LinkModels()


@pytest.fixture(scope="session")
def overhead_pass(models):
    return generate_pass(models.orbit)


_results: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    entry = _results.setdefault(number, {"title": title, "ok": True, "failed": []})
    if report.when == "call" or (report.when == "setup" and not report.passed):
        if report.failed or report.skipped:
            entry["ok"] = False
            entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        entry = _results[number]
        status = "PASS" if entry["ok"] else "FAIL"
        line = f"AC{number:<2} {status}  {entry['title']}"
        if entry["failed"]:
            line += f"  (failing: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)
