import functools
import math

import pytest

from pairshift.dynamics import BoundPairSpec, ExperimentConfig, WavepacketSpec, default_geometry, run_experiment
from pairshift.dynamics.experiment import Engine
from pairshift.model import ModelParams, PairKind

_LINES_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line; returns ``check(ok, label, detail)`` that also asserts."""
    lines = request.config.stash[_LINES_KEY]

    def check(ok, label, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f"  ({detail})" if detail else "")
        lines.append(line)
        print(line)
        return bool(ok)

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@functools.lru_cache(maxsize=None)
def cached_run(kind, kappa, u, v, n_sites, k0, sigma, engine="full", spin=0, center=None, position=None):
    """Experiments are expensive; share them between tests in one session."""
    kind = PairKind(kind)
    c0, p0 = default_geometry(sigma)
    params = ModelParams(kappa, u, v, n_sites, kind.statistics)
    cfg = ExperimentConfig(
        params,
        WavepacketSpec(k0, sigma, c0 if center is None else center),
        BoundPairSpec(kind, p0 if position is None else position),
        engine=Engine(engine),
        incident_spin=spin,
    )
    return run_experiment(cfg)


HALF_PI = math.pi / 2
