import cmath

import pytest

from tropodegen import ShapeAssignment, build_gluing_system, load_fixture


@pytest.fixture(scope="session")
def fig8():
    return load_fixture("fig8")


@pytest.fixture(scope="session")
def system(fig8):
    return build_gluing_system(fig8)


@pytest.fixture(scope="session")
def meridian(fig8):
    return fig8.curve("meridian")


@pytest.fixture(scope="session")
def longitude(fig8):
    return fig8.curve("longitude")


def on_variety(w: complex) -> ShapeAssignment:
    """fig8 shapes (w, z) with z on the + branch of z(1-z)w(1-w) = 1."""
    z = (1 + cmath.sqrt(1 + 4 / (w * (w - 1)))) / 2
    return ShapeAssignment.from_z([w, z])


COMPLETE = complex(0.5, 3**0.5 / 2)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])
