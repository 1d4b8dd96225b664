import pytest

from surfverify.evolve import InitialDatum, SolverConfig, iter_blocks
from surfverify.residual import series_from_blocks


def pytest_addoption(parser):
    parser.addoption("--run-long", action="store_true", default=False,
                     help="also run full-horizon reproductions marked 'long'")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-long"):
        return
    skip = pytest.mark.skip(reason="needs --run-long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


def make_series(datum: str, n_modes: int, dt: float, t_end: float, linf_mode: str = "grid"):
    cfg = SolverConfig(n_modes, dt, t_end)
    return series_from_blocks(iter_blocks(cfg, InitialDatum.parse(datum)), dt, linf_mode)


@pytest.fixture(scope="session")
def sin_x_series():
    """sin x, N = 128, h = 1e-5 up to t = 1.6 (about 25 s)."""
    return make_series("sin(x)", 128, 1e-5, 1.6)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def criterion(request, capsys):
    """``criterion(label, ok, detail)`` prints one pass/fail line and records it."""
    log = request.config.stash.setdefault(ACCEPTANCE, [])

    def report(label: str, ok: bool, detail: str) -> bool:
        line = f"criterion {label}: {'PASS' if ok else 'FAIL'}  {detail}"
        log.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
