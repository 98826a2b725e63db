"""Prints one line per acceptance criterion at the end of the session."""

from __future__ import annotations

import pytest

_OUTCOMES: dict[int, list[tuple[str, bool]]] = {}
_TITLES: dict[int, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        n = marker.args[0]
        _TITLES.setdefault(n, marker.kwargs.get("title", ""))
        _OUTCOMES.setdefault(n, []).append((item.name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        results = _OUTCOMES[n]
        failed = [name for name, passed in results if not passed]
        line = f"criterion {n}: {'FAIL' if failed else 'PASS'}  {_TITLES[n]}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        terminalreporter.write_line(line)
