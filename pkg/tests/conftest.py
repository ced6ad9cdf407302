import math

import pytest

from tqg.config import SimConfig
from tqg.runner import run

# (criterion number, title, passed, detail), filled by the acceptance tests
ACCEPTANCE_LINES: list[tuple[int, str, bool, str]] = []


def report(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append((number, title, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(
            f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {title}: {detail}")


def shear_config(tmp_dir, **changes) -> SimConfig:
    base = SimConfig(n=64, t_end=0.2, dt=1e-3, diag_cadence=10, snapshot_cadence=50,
                     output_dir=str(tmp_dir))
    return base.with_(**changes)


@pytest.fixture(scope="session")
def shear256(tmp_path_factory):
    """The reference shear run: n=256, dt=1e-3, T=1, dealiased."""
    out = tmp_path_factory.mktemp("shear256")
    cfg = SimConfig(n=256, t_end=1.0, dt=1e-3, diag_cadence=10, snapshot_cadence=500,
                    output_dir=str(out))
    result = run(cfg)
    assert math.isclose(result.records[-1].t, 1.0, rel_tol=1e-12)
    return cfg, result
