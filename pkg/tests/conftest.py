import random
from fractions import Fraction

import pytest

from kshadow.generate import comb, corpus, hanging_bar, l_polygon, square
from kshadow.geometry import Point, PointLocation, classify_point


@pytest.fixture
def sq():
    return square()


@pytest.fixture
def L():
    return l_polygon()


@pytest.fixture(scope="session")
def bar():
    return hanging_bar()


@pytest.fixture(scope="session")
def comb2():
    return comb(2)


@pytest.fixture(scope="session")
def comb3():
    return comb(3)


@pytest.fixture(scope="session")
def polygons():
    """The 200-polygon random corpus (4 to 12 vertices)."""
    return corpus()


def interior_points(P, count, rng, den=1009):
    """Random rational points strictly inside P."""
    x0, y0, x1, y1 = P.bbox
    out = []
    while len(out) < count:
        q = Point(
            Fraction(rng.randint(int(x0 * den), int(x1 * den)), den),
            Fraction(rng.randint(int(y0 * den), int(y1 * den)), den),
        )
        if classify_point(q, P.vertices) is PointLocation.INSIDE:
            out.append(q)
    return out


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
