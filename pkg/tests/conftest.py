import numpy as np
import pytest

from qlimits import kernels
from qlimits.lattice import GridSpec, WaveFunction, gaussian_packet, normalize


@pytest.fixture
def grid1():
    return GridSpec(1, 16.0, 1024)


@pytest.fixture
def grid2():
    return GridSpec(2, 8.0, 128)


@pytest.fixture
def packet1(grid1):
    return gaussian_packet(grid1)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_state(grid, rng, smooth=True):
    """Random normalised state; ``smooth`` keeps it well inside the box and band."""
    if smooth:
        coeffs = rng.normal(size=(6, grid.dim)) + 1j * rng.normal(size=(6, grid.dim))
        u = 0
        for k, c in enumerate(coeffs):
            centre = rng.uniform(-2, 2, size=grid.dim)
            mom = rng.uniform(-2, 2, size=grid.dim)
            u = u + complex(c[0]) * gaussian_packet(grid, centre, 0.5 + 0.2 * k, mom).samples
        return normalize(WaveFunction(grid, u))
    raw = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    return normalize(WaveFunction(grid, raw))


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    return kernels.get_backend(request.param)


# --- acceptance summary ---------------------------------------------------------

ACCEPTANCE = {}
N_CRITERIA = 11


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    ran = [item for item in terminalreporter.stats.get("passed", []) + terminalreporter.stats.get("failed", [])
           if "test_acceptance" in item.nodeid]
    if not ran and not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in range(1, N_CRITERIA + 1):
        if k in ACCEPTANCE:
            title, ok, detail = ACCEPTANCE[k]
            terminalreporter.write_line(f"AC{k:02d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        else:
            terminalreporter.write_line(f"AC{k:02d} FAIL  not completed")
