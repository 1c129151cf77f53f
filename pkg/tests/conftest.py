import hypothesis.strategies as st
import pytest

from rulplan.model import AssetRecord, Point2D, ProblemInstance

coords = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)
points = st.builds(Point2D, coords, coords)


@st.composite
def instances(draw, min_n=1, max_n=7, rul=st.floats(min_value=1.0, max_value=3e3)):
    """Random valid instances, including tight deadlines and service times."""
    n = draw(st.integers(min_n, max_n))
    assets = tuple(
        AssetRecord(
            f"A{i}",
            draw(points),
            draw(rul),
            draw(st.sampled_from([0.0, 0.0, 1.5, 10.0])),
            draw(st.floats(min_value=0.0, max_value=500.0)),
        )
        for i in range(n)
    )
    return ProblemInstance(
        draw(points),
        assets,
        travel_speed=draw(st.sampled_from([0.5, 1.0, 60.0])),
        return_to_center=draw(st.booleans()),
        hourly_wage=draw(st.sampled_from([0.0, 25.0, 50.0])),
    )


@pytest.fixture
def line3():
    """Center at the origin, three assets on the positive x axis."""
    assets = tuple(AssetRecord(f"A{i}", Point2D(float(i + 1), 0.0), 100.0) for i in range(3))
    return ProblemInstance(Point2D(0.0, 0.0), assets)


@pytest.fixture
def detour():
    """Exactly one route is shorter than the other and it misses a deadline.

    A0 at (1, 0) is relaxed, A1 at (-2, 0) must be reached within 2.5 h.
    [A0, A1] covers 1 + 3 = 4 km and reaches A1 at 4 h (late by 1.5).
    [A1, A0] covers 2 + 3 = 5 km and is on time everywhere.
    """
    assets = (
        AssetRecord("A0", Point2D(1.0, 0.0), 100.0),
        AssetRecord("A1", Point2D(-2.0, 0.0), 2.5),
    )
    return ProblemInstance(Point2D(0.0, 0.0), assets)


# ---- acceptance report ----------------------------------------------------------

_acceptance_results = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _acceptance_results.append((mark.args[0], mark.args[1], rep.passed, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, duration in sorted(_acceptance_results):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title} ({duration:.1f}s)")
