import numpy as np
import pytest

from muse_fse.grid import DataArea, build_isotropic_weights
from muse_fse.basis import build_dictionary


def pytest_addoption(parser):
    parser.addoption("--corpus", default=None,
                     help="directory of clean 512x512 grayscale PGM/PNG images for the "
                          "corpus acceptance criteria (default: scikit-image sample photos)")


def random_area(rng, M, N, loss=None, low=0, high=255):
    """Random area with a rectangular loss ``(r, c, h, w)`` (random if None)."""
    lost = np.zeros((M, N), bool)
    if loss is None:
        h, w = rng.integers(1, M // 2 + 1), rng.integers(1, N // 2 + 1)
        r, c = rng.integers(0, M - h + 1), rng.integers(0, N - w + 1)
        loss = (r, c, h, w)
    r, c, h, w = loss
    lost[r:r + h, c:c + w] = True
    return DataArea(rng.uniform(low, high, (M, N)), lost)


def setup(area, rho_hat=0.8):
    weights = build_isotropic_weights(area, rho_hat)
    return weights, build_dictionary(area, weights)


@pytest.fixture
def rng():
    return np.random.default_rng(20080901)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
