import pytest

from closedmems import Domain, assemble, build_grid, make_profile


@pytest.fixture(scope="session")
def interval_problem():
    """Reference problem: a = rho^0.5 on (0, 1), n = 256."""
    grid = build_grid(Domain.interval(1.0), 256)
    op = assemble(grid)
    return grid, op, make_profile(grid, 0.5)


@pytest.fixture(scope="session")
def disk_problem():
    grid = build_grid(Domain.disk(1.0), 32)
    op = assemble(grid)
    return grid, op, make_profile(grid, 0.5)


_LOG = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record ``(number, passed, detail)`` for the per-criterion summary."""
    log = request.config.stash.setdefault(_LOG, {})

    def record(number: int, passed: bool, detail: str) -> bool:
        log[number] = (bool(passed), detail)
        print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_LOG, {})
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(log):
        passed, detail = log[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
