import math

import pytest

from uavnet.model import Role, UavNode, UserDevice

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_user(uid, angle, rates=(1.0, 4.0, 2.0), radius=200.0, sector=None):
    return UserDevice(
        id=uid,
        radius=radius,
        angle=angle % (2 * math.pi),
        gen_rate=list(rates),
        base_gen_rate=tuple(rates),
        sector_id=sector,
    )


def make_uav(uid, x, y, role=Role.SERVING, sector=None, altitude=90.0):
    return UavNode(id=uid, x=x, y=y, altitude=altitude, role=role, sector_id=sector)
