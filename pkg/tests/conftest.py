import os

import hypothesis
import numpy as np
import pytest

from dsekit.core import EvaluatedSolution, ObjectiveVector, Solution

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def evaluated(points) -> list[EvaluatedSolution]:
    """Wrap raw minimization vectors as evaluated solutions (index = position + 1)."""
    return [
        EvaluatedSolution(Solution((float(i),)), ObjectiveVector(tuple(p)), i + 1)
        for i, p in enumerate(np.atleast_2d(points))
    ]


def brute_force_nondominated(points: np.ndarray) -> np.ndarray:
    """O(n^2) double loop, written independently of the library."""
    n = len(points)
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        for j in range(n):
            if i != j and all(points[j] <= points[i]) and any(points[j] < points[i]):
                keep[i] = False
                break
    return keep


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance summary: one PASS/FAIL line per criterion ---------------------

_criteria: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    report = (yield).get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "ok": True, "notes": []})
    if hasattr(report, "wasxfail") and report.skipped:
        # a strict xfail records a shortfall; the criterion stays red
        entry["ok"] = False
        entry["notes"].append(f"unmet, tracked as strict xfail: {item.name}")
    elif report.failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2} {status}  {entry['title']}")
        for note in entry["notes"]:
            terminalreporter.write_line(f"              {note}")
