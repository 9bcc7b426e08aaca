import cmath
import math

import pytest

from fastescape.frame import SectorFrame
from fastescape.function import canonical
from fastescape.modulus import ScanConfig, find_thresholds


@pytest.fixture(scope="session")
def cosh_fn():
    return canonical("cosh-sqrt")


@pytest.fixture(scope="session")
def frame():
    return SectorFrame(theta2=0.1, psi=0.6, psi_prime=0.8)


@pytest.fixture(scope="session")
def thresholds(cosh_fn, frame):
    return find_thresholds(cosh_fn, frame, ScanConfig(r_min=1.0, r_max=1e10, ratio=1.25))


@pytest.fixture(scope="session")
def islands_at_1e7(cosh_fn, frame, thresholds):
    """Shared traced islands for the construction tests (criterion scale)."""
    from fastescape.islands import construct_islands

    records, pack = construct_islands(
        cosh_fn, frame, 1e7, nu=1.0, c1=1e-3, mesh=512,
        r1=thresholds.r1.value(), r2=thresholds.r2.value(),
    )
    return records, pack


def log_cosh_sqrt(z):
    """Closed-form oracle: log cosh(sqrt(z)), overflow-safe."""
    s = cmath.sqrt(z)
    if s.real > 300.0:
        return s - math.log(2.0)
    return s - math.log(2.0) + cmath.log(1.0 + cmath.exp(-2.0 * s))


def tanh_sqrt_over(z):
    """Closed-form oracle: f'/f = tanh(sqrt z) / (2 sqrt z) for cosh(sqrt z)."""
    s = cmath.sqrt(z)
    if s.real > 300.0:
        return 1.0 / (2.0 * s)
    return cmath.tanh(s) / (2.0 * s)
