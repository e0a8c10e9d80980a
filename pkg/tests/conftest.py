import sys
import math

import numpy as np
import pytest

from secdispatch.network import Bus, InputInstance, Line, Network, load_case


@pytest.fixture(scope="session")
def two_bus():
    return load_case("2bus")


@pytest.fixture(scope="session")
def pjm5():
    return load_case("pjm5")


def make_two_bus(alpha1=1.0, alpha2=2.0, limits=(100.0, 100.0), b=(1.0, 1.0)):
    return Network(
        "2bus-custom",
        (Bus(1, alpha1), Bus(2, alpha2)),
        (Line(1, 1, 2, b[0], limits[0]), Line(2, 1, 2, b[1], limits[1])),
    )


def unlimited(d1, d2):
    return InputInstance([math.inf, math.inf], [d1, d2])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS.values():
            terminalreporter.write_line(line)
