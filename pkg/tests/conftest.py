import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def mask_top(m, dims):
    """Zero rows/columns touching the top Fock level of any factor."""
    labels = np.array(np.unravel_index(np.arange(int(np.prod(dims))), dims)).T
    keep = np.all(labels < np.array(dims) - 1, axis=1)
    out = np.array(m, dtype=complex)
    out[~keep, :] = 0
    out[:, ~keep] = 0
    return out


# acceptance reporting: one PASS/FAIL line per numbered criterion
_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    numbers = [m.args[0] for m in item.iter_markers("criterion")]
    if not numbers or report.when not in ("setup", "call"):
        return
    ok = report.passed if report.when == "call" else not report.failed
    if report.when == "setup" and ok:
        return
    for n in numbers:
        _criteria.setdefault(n, []).append(ok)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if all(_criteria[n]) else 'FAIL'}")
