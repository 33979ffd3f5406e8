import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.linalg import expm

from killing_transport._kernels import BACKEND, backends


def problem(steps, d=3, k=2, seed=0):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((steps + 1, d, d))
    mid = 0.5 * (A[:-1] + A[1:])
    return A, mid, 1.0 / steps, rng.standard_normal((d, k))


@pytest.mark.parametrize("name", sorted(backends()))
def test_constant_coefficients_match_expm(name):
    rk4 = backends()[name]
    A = np.array([[0.0, -1.0, 0.3], [1.0, 0.0, 0.0], [0.2, 0.0, 0.1]])
    steps = 200
    qn = np.broadcast_to(A, (steps + 1, 3, 3))
    qm = np.broadcast_to(A, (steps, 3, 3))
    y0 = np.eye(3)
    out = rk4(qn, qm, 1.0 / steps, y0)
    assert out.shape == (steps + 1, 3, 3)
    assert np.array_equal(out[0], y0)
    np.testing.assert_allclose(out[-1], expm(A), atol=1e-10)


def test_backends_agree():
    impls = backends()
    if "cython" not in impls:
        pytest.skip("compiled extension not built")
    qn, qm, dt, y0 = problem(500)
    np.testing.assert_allclose(impls["cython"](qn, qm, dt, y0), impls["python"](qn, qm, dt, y0), rtol=0, atol=1e-12)


def test_backend_reported():
    assert BACKEND in backends()


def test_pure_fallback_env():
    code = "from killing_transport._kernels import BACKEND; print(BACKEND)"
    env = dict(os.environ, KILLING_TRANSPORT_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
