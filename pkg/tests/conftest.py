from pathlib import Path

import pytest

from flatlab import load_surface

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.surf"


def surf(name: str):
    return load_surface(fixture_path(name))


@pytest.fixture
def load():
    return surf


_ACCEPTANCE: dict[str, tuple[str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: one of the twelve acceptance criteria")


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].removeprefix("test_criterion_")
    if report.when == "call" or report.failed:
        verdict = "PASS" if report.passed else "FAIL"
        if name not in _ACCEPTANCE or verdict == "FAIL":
            _ACCEPTANCE[name] = (verdict, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        verdict, seconds = _ACCEPTANCE[name]
        num, _, label = name.partition("_")
        terminalreporter.write_line(f"criterion {int(num):2d} {verdict}  {label.replace('_', ' ')}  ({seconds:.2f} s)")
