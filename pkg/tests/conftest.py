import random

import pytest
from hypothesis import HealthCheck, settings

from orbichar.orbifold import (
    EquivariantComplex,
    cube_torus,
    cyclic_group,
    point_quotient,
    product_group,
    rotation_action,
    torus_rotation,
    trivial_action,
)

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def pt_z2():
    return EquivariantComplex(point_quotient(cyclic_group(2)), name="pt-mod-z2")


@pytest.fixture(scope="session")
def pt_klein():
    return EquivariantComplex(point_quotient(product_group(cyclic_group(2), cyclic_group(2))), name="pt-mod-z2xz2")


@pytest.fixture(scope="session")
def circle_z3():
    return EquivariantComplex(rotation_action(3, 1), name="circle-z3")


@pytest.fixture(scope="session")
def torus_z2():
    return EquivariantComplex(torus_rotation(3), name="torus-z2")


@pytest.fixture(scope="session")
def t3():
    return EquivariantComplex(trivial_action(cube_torus(3)), name="t3")


@pytest.fixture
def rng():
    return random.Random(1234)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
