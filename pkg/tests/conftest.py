import math
import re
from collections import defaultdict

import numpy as np
import pytest

from fiberlink.model import params_from_ratio

_CRITERIA = defaultdict(list)
_CRITERION_RE = re.compile(r"test_criterion_(\d+)")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=[0.0, 0.5, math.sqrt(2) / 2, 1.0, 3.0])
def params(request):
    return params_from_ratio(request.param)


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    match = _CRITERION_RE.search(report.nodeid)
    if match and (report.when == "call" or report.outcome != "passed"):
        _CRITERIA[int(match.group(1))].append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status = "PASS" if all(_CRITERIA[number]) else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status}")
