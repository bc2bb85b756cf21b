import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dwlink.device import DeviceGeometry  # noqa: E402
from dwlink.magnetics import MagGrid, MaterialParams  # noqa: E402


@pytest.fixture(scope="session")
def p():
    return MaterialParams()


@pytest.fixture(scope="session")
def strip():
    """Narrow 200 x 20 nm device used wherever the benchmark size is not needed."""
    return DeviceGeometry(width=20e-9)


def smooth_state(rng, nx=9, ny=7, cell=2e-9, fixed=None):
    x = np.arange(nx)[None, :] / nx
    y = np.arange(ny)[:, None] / ny
    th = 1.2 + 0.9 * np.sin(2 * np.pi * x + rng.uniform(0, 2 * np.pi)) \
        * np.cos(2 * np.pi * y + rng.uniform(0, 2 * np.pi))
    ph = rng.uniform(0, 2 * np.pi) + 2.0 * np.sin(2 * np.pi * (x + 0.5 * y))
    m = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], -1)
    mask = np.zeros((ny, nx), bool) if fixed is None else fixed
    return MagGrid(nx, ny, cell, cell, 0.6e-9, m, mask)
