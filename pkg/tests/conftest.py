"""Test-suite configuration: hypothesis profiles and the acceptance summary.

After a full run, one PASS/FAIL line per acceptance criterion is printed to
the terminal, keyed off the test_criterion_* outcomes in test_acceptance.py.
"""

from __future__ import annotations

import re

from hypothesis import HealthCheck, settings

settings.register_profile(
    "module",
    max_examples=60,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile(
    "acceptance",
    max_examples=200,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("module")

# 200-case profile for the structural-invariant suite (criterion 8).
ACCEPTANCE = settings.get_profile("acceptance")

_CRITERION = re.compile(r"test_criterion_(\d+)([a-z_]*)")
_outcomes: dict[str, tuple[bool, str]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    key = f"{int(m.group(1)):02d}{m.group(2)}"
    # Parametrized criteria produce several reports; all must pass.
    prev_ok, prev_note = _outcomes.get(key, (True, ""))
    if report.passed:
        _outcomes[key] = (prev_ok, prev_note)
    elif hasattr(report, "wasxfail"):
        # strict xfail: a documented, expected failure
        _outcomes[key] = (False, prev_note or "expected failure (documented defect)")
    else:
        _outcomes[key] = (False, prev_note)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_outcomes):
        ok, note = _outcomes[key]
        num = key[:2].lstrip("0")
        tag = key[2:].lstrip("_")
        label = f"criterion {num}" + (f" [{tag}]" if tag else "")
        verdict = "PASS" if ok else "FAIL"
        line = f"{label}: {verdict}"
        if note:
            line += f" - {note}"
        terminalreporter.write_line(line)
