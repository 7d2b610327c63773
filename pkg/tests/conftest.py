from __future__ import annotations

from importlib import resources

import pytest

from sidebarsim import SimConfig


@pytest.fixture(scope="session")
def config() -> SimConfig:
    """The shipped default configuration, loaded from the packaged file."""
    packaged = resources.files("sidebarsim").joinpath("default.cfg")
    with resources.as_file(packaged) as path:
        return SimConfig.from_file(path)


def pytest_terminal_summary(terminalreporter):
    from _acceptance_report import LINES

    if not LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in LINES:
        terminalreporter.write_line(line)
