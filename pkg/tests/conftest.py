import re

import numpy as np
import pytest

_CRITERION = re.compile(r"test_acceptance\.py::.*test_criterion_(\d+)")
_results: dict[int, bool] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or report.failed:
        k = int(m.group(1))
        _results[k] = _results.get(k, True) and not report.failed


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_results):
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if _results[k] else 'FAIL'}")
