import pytest

from syzcert.lattice import NumClass
from syzcert.surface import build_surface

_CRITERIA: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and rep.when == "call":
        status = "PASS" if rep.passed else "FAIL"
        _CRITERIA.append((str(marker.args[0]), status, getattr(item, "criterion_detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n, status, detail in sorted(_CRITERIA, key=lambda t: int(t[0])):
        terminalreporter.write_line(f"criterion {n}: {status}  {detail}")


def enr(a, b, *v):
    """a*e + b*f + v in U+E8(-1) coordinates."""
    v = tuple(v) + (0,) * (8 - len(v))
    return NumClass((a, b) + v)


@pytest.fixture(scope="session")
def enriques():
    return build_surface("enriques")


@pytest.fixture(scope="session")
def z6():
    return build_surface("bielliptic:Z/6")


@pytest.fixture(scope="session")
def z2():
    return build_surface("bielliptic:Z/2")
