import numpy as np
import pytest

from hallmhd.grid import (
    dealias,
    forward_transform,
    leray_project,
    make_grid,
    pin_zero_mode,
)


def solenoidal_field(g, seed, amplitude=1.0):
    """Random dealiased divergence-free zero-mean spectral field."""
    rng = np.random.default_rng(seed)
    f = rng.standard_normal((3, g.n, g.n, g.n))
    s = pin_zero_mode(leray_project(dealias(forward_transform(f, g), g), g))
    peak = np.abs(s).max()
    return s * (amplitude / peak)


@pytest.fixture(scope="session")
def grid16():
    return make_grid(16, 2 * np.pi)


@pytest.fixture(scope="session")
def grid32():
    return make_grid(32, 16.0)
