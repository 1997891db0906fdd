import warnings
from functools import lru_cache

import numpy as np
import pytest

from hapsvec.channel import realize_channels
from hapsvec.harness import channel_seed, solve_slot
from hapsvec.metrics import scheme
from hapsvec.scenario import ScenarioConfig, generate_scenario


@lru_cache(maxsize=None)
def instance(seed: int = 0, num_icvs: int = 10, **overrides):
    cfg = ScenarioConfig(num_icvs=num_icvs, **overrides)
    sc = generate_scenario(cfg, seed)
    return sc, realize_channels(sc, channel_seed(seed, 0))


@lru_cache(maxsize=None)
def solved(seed: int = 0, name: str = "HRVIN", mode: str = "sum", enforce: bool = True,
           num_icvs: int = 10):
    sc, ch = instance(seed, num_icvs)
    return solve_slot(sc, ch, scheme(name, enforce, mode))


@pytest.fixture(autouse=True)
def _quiet_solver_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def report_line(line: str) -> None:
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
