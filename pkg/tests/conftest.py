import math

import numpy as np
import pytest

from pointmusic import ScattererSet, WaveConfig, synthesize_far_field, uniform_circle_directions

THREE_SRC_POSITIONS = [(5.0, 0.0, 0.0), (-5.0, 0.0, 0.0), (3.0, 9.0, 0.0)]
THREE_SRC_ALPHAS = [1 + 1j, 3 + 5j, -1 + 5j]


@pytest.fixture
def three_src():
    return ScattererSet(THREE_SRC_POSITIONS, THREE_SRC_ALPHAS)


@pytest.fixture
def w2pi():
    return WaveConfig(2 * math.pi)


@pytest.fixture
def dirs20():
    return uniform_circle_directions(20)


@pytest.fixture
def F3(three_src, dirs20, w2pi):
    return synthesize_far_field(dirs20, three_src, w2pi)


def random_config(rng, m_max=6, spread=8.0, min_sep=0.5):
    """Random admissible-looking scatterer set: distinct positions, Im(alpha) >= 0."""
    m = int(rng.integers(1, m_max + 1))
    while True:
        pos = rng.uniform(-spread, spread, size=(m, 3))
        d = np.linalg.norm(pos[:, None] - pos[None], axis=-1) + np.eye(m) * 1e9
        if d.min() > min_sep:
            break
    alphas = rng.uniform(-5, 5, m) + 1j * rng.uniform(0, 8, m)
    return ScattererSet(pos, alphas)


# acceptance summary: one line per criterion

_acceptance = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "_acceptance", None)
    if marker is None or report.when != "call" and not (report.when == "setup" and report.failed):
        return
    number, title = marker
    entry = _acceptance.setdefault(number, {"title": title, "passed": 0, "failed": 0})
    entry["passed" if report.passed else "failed"] += 1


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m is not None:
        rep._acceptance = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        e = _acceptance[number]
        status = "PASS" if e["failed"] == 0 else "FAIL"
        terminalreporter.write_line(
            f"[{status}] {number:2d}. {e['title']}  ({e['passed']} passed, {e['failed']} failed)"
        )
