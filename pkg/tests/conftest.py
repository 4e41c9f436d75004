import numpy as np
import pytest

from synthcavity.optics import OpticalSetup, eta_table


@pytest.fixture(scope="session")
def reference_reports():
    """Pinhole reports for n = 1..5 at the reference optics, j up to 4."""
    return {n: eta_table(OpticalSetup(hopping_step=n), 4) for n in range(1, 6)}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
