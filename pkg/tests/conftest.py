"""Shared fixtures and the acceptance summary reporter.

Acceptance tests carry the ``acceptance(n, description)`` marker; after a
run, one PASS/FAIL line per criterion is printed in the terminal summary.
"""

from __future__ import annotations

import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(number, description): acceptance criterion test")


_RESULTS: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number = marker.args[0]
    description = marker.args[1] if len(marker.args) > 1 else item.name
    status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
    _RESULTS[number] = (status, description)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_RESULTS):
        status, description = _RESULTS[number]
        terminalreporter.write_line(f"criterion {number:2d} {status}: {description}")
