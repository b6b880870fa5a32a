from __future__ import annotations

import pytest

from haltflow import sample_path, tm
from haltflow.runtime import System

SAMPLES = ("halt3.tm", "loop.tm", "bb-small.tm", "one-step.tm")


def load(name: str) -> tm.TMSpec:
    return tm.parse_tm(sample_path(name).read_text(encoding="utf-8"))


_SYSTEMS: dict[str, System] = {}


def system_for(name: str) -> System:
    # building is cheap but not free; share across tests
    if name not in _SYSTEMS:
        _SYSTEMS[name] = System.build(load(name))
    return _SYSTEMS[name]


@pytest.fixture(scope="session")
def halt3() -> System:
    return system_for("halt3.tm")


@pytest.fixture(scope="session")
def loop() -> System:
    return system_for("loop.tm")


@pytest.fixture(scope="session")
def one_step() -> System:
    return system_for("one-step.tm")


@pytest.fixture(scope="session")
def bb_small() -> System:
    return system_for("bb-small.tm")


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
