import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from klminimax import _kernels
from klminimax._kernels import _pykernels
from klminimax._kernels._gk21 import GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES

BACKENDS = [pytest.param(_pykernels, id="python")]
if _kernels.compiled_backend is not None:
    BACKENDS.append(pytest.param(_kernels.compiled_backend, id="cython"))


def test_rule_constants():
    assert np.allclose(NODES, -NODES[::-1])
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)


def test_compiled_backend_is_active_when_built():
    assert _kernels.BACKEND in ("cython", "python")
    if _kernels.compiled_backend is not None:
        assert _kernels.BACKEND == "cython"


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("degree", [0, 1, 5, 19, 31])
def test_gk21_exact_for_polynomials(backend, degree):
    # the 21-point Kronrod rule integrates polynomials up to degree 31 exactly
    lo, hi = -0.3, 1.7
    c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
    x = c + h * NODES
    res, _ = backend.gk21_reduce((x ** degree)[None, :], np.array([h]))
    exact = (hi ** (degree + 1) - lo ** (degree + 1)) / (degree + 1)
    assert res[0] == pytest.approx(exact, rel=1e-13)


@pytest.mark.parametrize("backend", BACKENDS)
def test_gk21_error_estimate_flags_rough_panels(backend):
    h = np.array([1.0, 1.0])
    smooth = np.cos(NODES)
    kink = np.abs(NODES - 0.31)
    _, err = backend.gk21_reduce(np.vstack([smooth, kink]), h)
    assert err[0] < 1e-13
    assert err[1] > 1e-6


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=21, max_size=21), st.floats(1e-3, 10.0))
def test_backends_agree_on_gk21(values, half):
    if _kernels.compiled_backend is None:
        pytest.skip("compiled backend not built")
    f = np.array([values])
    h = np.array([half])
    r_py, e_py = _pykernels.gk21_reduce(f, h)
    r_c, e_c = _kernels.compiled_backend.gk21_reduce(f, h)
    assert np.allclose(r_py, r_c, rtol=1e-13, atol=1e-13)
    assert np.allclose(e_py, e_c, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("backend", BACKENDS)
def test_pchip_interpolates_and_stays_monotone(backend):
    x = np.array([0.0, 0.1, 0.5, 0.6, 2.0, 3.0])
    y = np.array([0.0, 0.0, 0.3, 0.9, 0.95, 1.0])
    d = backend.pchip_slopes(x, y)
    assert np.allclose(backend.pchip_eval(x, y, d, x), y, atol=1e-15)
    t = np.linspace(-1.0, 4.0, 5001)
    v = backend.pchip_eval(x, y, d, t)
    assert np.all(np.diff(v) >= -1e-15)
    assert v[0] == 0.0 and v[-1] == 1.0


@pytest.mark.parametrize("backend", BACKENDS)
def test_pchip_reproduces_linear_data(backend):
    x = np.array([0.0, 1.0, 2.5, 4.0])
    y = 3.0 * x - 1.0
    d = backend.pchip_slopes(x, y)
    t = np.linspace(0, 4, 33)
    assert np.allclose(backend.pchip_eval(x, y, d, t), 3.0 * t - 1.0, atol=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 5.0), min_size=3, max_size=30),
       st.lists(st.floats(0.0, 5.0), min_size=3, max_size=30))
def test_backends_agree_on_pchip(steps, rises):
    if _kernels.compiled_backend is None:
        pytest.skip("compiled backend not built")
    n = min(len(steps), len(rises))
    x = np.concatenate([[0.0], np.cumsum(steps[:n])])
    y = np.concatenate([[0.0], np.cumsum(rises[:n])])
    t = np.linspace(-1.0, x[-1] + 1.0, 97)
    d_py = _pykernels.pchip_slopes(x, y)
    d_c = _kernels.compiled_backend.pchip_slopes(x, y)
    assert np.allclose(d_py, d_c, rtol=1e-12, atol=1e-12)
    assert np.allclose(_pykernels.pchip_eval(x, y, d_py, t),
                       _kernels.compiled_backend.pchip_eval(x, y, d_c, t), rtol=1e-12, atol=1e-12)
    assert np.all(np.diff(_pykernels.pchip_eval(x, y, d_py, t)) >= -1e-12)


def test_pure_python_fallback_end_to_end():
    script = (
        "import klminimax\n"
        "from klminimax import densities, saddle, verify\n"
        "sp = saddle.solve(densities.gaussian_pair(1.0), 0.1)\n"
        "x = verify.sample_density(sp.g0L, 1000, seed=0)\n"
        "print(klminimax.BACKEND, repr(sp.y_U), repr(float(x.sum())))\n"
    )
    env = dict(os.environ, KLMINIMAX_PURE_PYTHON="1")
    proc = subprocess.run([sys.executable, "-c", script], env=env, capture_output=True,
                          text=True, check=True)
    backend, y_U, total = proc.stdout.split()
    assert backend == "python"
    assert float(y_U) == pytest.approx(0.6083526178977076, abs=1e-12)
    from klminimax import densities, saddle, verify

    sp = saddle.solve(densities.gaussian_pair(1.0), 0.1)
    assert float(total) == pytest.approx(float(verify.sample_density(sp.g0L, 1000, seed=0).sum()),
                                         rel=1e-9)
