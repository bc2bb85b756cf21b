import os
import subprocess
import sys

import numpy as np
import pytest

from dwlink import _backend
from dwlink.device import init_racetrack, wall_position
from dwlink.magnetics import (LLGSolver, anisotropy_coefficient, dmi_coefficient,
                              exchange_coefficient, gamma_ll, she_rate)

from conftest import smooth_state

needs_cython = pytest.mark.skipif("cython" not in _backend.available_backends(),
                                  reason="compiled kernels not built")


def test_numpy_backend_always_available():
    assert "numpy" in _backend.available_backends()
    assert _backend.get_kernels("numpy") is not None
    with pytest.raises(ValueError):
        _backend.get_kernels("fortran")


def test_environment_variable_forces_numpy():
    env = dict(os.environ, DWLINK_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import dwlink; print(dwlink.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def _coeffs(p):
    return exchange_coefficient(p), anisotropy_coefficient(p), dmi_coefficient(p)


@needs_cython
@pytest.mark.parametrize("seed", range(5))
def test_field_and_rhs_agree(p, seed):
    rng = np.random.default_rng(seed)
    fixed = np.zeros((7, 9), bool)
    fixed[:, :2] = True
    g = smooth_state(rng, fixed=fixed)
    c_ex, c_an, c_dmi = _coeffs(p)
    a = she_rate(p, 1.3e12)
    res = {}
    for name in ("numpy", "cython"):
        k = _backend.get_kernels(name)
        h = np.zeros_like(g.m)
        r = np.zeros_like(g.m)
        k.effective_field(g.m, h, g.dx, g.dy, c_ex, c_an, c_dmi)
        k.llg_rhs(g.m, g.fixed_mask.view(np.uint8), r, g.dx, g.dy, c_ex, c_an, c_dmi, a,
                  gamma_ll(p), p.alpha, True)
        res[name] = (h, r)
    for x, y in zip(res["numpy"], res["cython"]):
        assert np.allclose(x, y, rtol=1e-12, atol=1e-12 * np.max(np.abs(x)))


@needs_cython
def test_trajectories_agree(p, strip):
    out = []
    for name in ("numpy", "cython"):
        g = init_racetrack(strip, p, "down-left", 40e-9, relax_steps=0)
        s = LLGSolver(g, p, kernel_module=_backend.get_kernels(name))
        s.run(500, 1.5e12)
        s.run(500, -1e12, 0.8)
        out.append((g.m.copy(), wall_position(g)))
    assert np.max(np.abs(out[0][0] - out[1][0])) < 1e-9
    assert out[0][1] == pytest.approx(out[1][1], abs=1e-13)


@pytest.mark.parametrize("name", _backend.available_backends())
def test_backend_is_deterministic(p, strip, name):
    runs = []
    for _ in range(2):
        g = init_racetrack(strip, p, "up-left", 60e-9, relax_steps=0)
        LLGSolver(g, p, kernel_module=_backend.get_kernels(name)).run(300, 2e12)
        runs.append(g.m.tobytes())
    assert runs[0] == runs[1]
