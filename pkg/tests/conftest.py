import numpy as np
import pytest

from ftcontrol.config import ScenarioConfig
from ftcontrol.gpr_camera import GprHyperParams, fit
from ftcontrol.harness import build_artifacts


@pytest.fixture(scope="session")
def default_config():
    return ScenarioConfig()


@pytest.fixture(scope="session")
def artifacts(default_config):
    """Camera model + calibrated monitors, shared by the slower tests."""
    return build_artifacts(default_config)


@pytest.fixture(scope="session")
def small_gpr():
    """A cheap smooth model for controller/fdi unit tests."""
    grid = np.linspace(-1.0, 1.0, 8)
    X = np.array([[a, b] for a in grid for b in grid])
    Y = np.column_stack([np.sin(X[:, 0]) * np.cos(X[:, 1]),
                         np.cos(X[:, 0]) + 0.3 * X[:, 1]])
    return fit(X, Y, GprHyperParams(lengthscale=0.5, signal_var=1.0,
                                    noise_var=1e-4))
