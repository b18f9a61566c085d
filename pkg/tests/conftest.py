"""Shared fixtures. Session-scoped environments are reused across test modules
because building the desk covariance is the slowest setup step."""
from dataclasses import replace

import numpy as np
import pytest

from chest import (build_environment, desk_config, pilot_covariance,
                   validate_config)
from chest.propagation import PathSet


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)


@pytest.fixture(scope="session")
def desk():
    return desk_config()


@pytest.fixture(scope="session")
def desk_env(desk):
    return build_environment(desk)


@pytest.fixture(scope="session")
def desk_cov(desk_env):
    return pilot_covariance(desk_env)


@pytest.fixture(scope="session")
def tiny():
    """Small bundle for harness-level tests: cheap but structurally complete."""
    base = desk_config(n_rx=4, n_subcarriers=16, cp_length=8, n_pilots=8,
                       n_trials=12, snr_grid_db=(-10.0, 0.0, 10.0))
    scenario = replace(base.scenario, n_paths=6, n_dt_paths=3)
    estimator = replace(base.estimator, n_batch=8)
    return validate_config(base.system, scenario, estimator)


@pytest.fixture
def make_paths():
    """Factory for hand-placed path sets with normalized power."""

    def _make(delays_us, elevations=None, azimuths=None, powers=None):
        delays = np.asarray(delays_us, dtype=float) * 1e-6
        n = delays.size
        if powers is None:
            powers = np.full(n, 1.0 / n)
        powers = np.asarray(powers, dtype=float)
        powers = powers / powers.sum()
        if elevations is None:
            elevations = np.linspace(-0.8, 0.8, n)
        if azimuths is None:
            azimuths = np.linspace(-1.2, 1.2, n)
        return PathSet(elevation=np.asarray(elevations, dtype=float),
                       azimuth=np.asarray(azimuths, dtype=float),
                       delay=delays, amplitude=np.sqrt(powers))

    return _make
