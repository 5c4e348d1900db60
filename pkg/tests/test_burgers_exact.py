import numpy as np
import pytest

import cn_burgers
from alpinn.problems import (
    BURGERS_C,
    burgers_exact,
    burgers_exact_derivatives,
)


def test_initial_profile():
    x = np.linspace(-1, 1, 11)
    assert np.allclose(burgers_exact(0.0, x), -np.sin(np.pi * x), atol=1e-14)


def test_scalar_input_returns_float():
    v = burgers_exact(0.5, 0.25)
    assert isinstance(v, float)


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        burgers_exact(-0.1, 0.0)
    with pytest.raises(ValueError):
        burgers_exact_derivatives(-0.1, 0.0)


def test_boundary_values_vanish():
    for t in (0.1, 0.5, 0.9):
        assert abs(burgers_exact(t, -1.0)) < 1e-12
        assert abs(burgers_exact(t, 1.0)) < 1e-12


def test_odd_symmetry():
    x = np.array([0.2, 0.5, 0.8])
    for t in (0.2, 0.7):
        assert np.allclose(burgers_exact(t, x), -burgers_exact(t, -x), atol=1e-12)


def test_quadrature_converged():
    x = np.linspace(-0.9, 0.9, 13)
    for t in (0.1, 0.5, 0.95):
        a = burgers_exact(t, x, n_nodes=120)
        b = burgers_exact(t, x, n_nodes=170)
        assert np.abs(a - b).max() < 1e-10


def test_derivatives_match_quadrature_finite_differences():
    t, eps = 0.4, 1e-5
    x = np.array([-0.6, -0.2, 0.3, 0.7])
    u, ut, utt, ux, uxx = burgers_exact_derivatives(t, x)
    assert np.allclose(u, burgers_exact(t, x), atol=1e-10)
    fd_x = (burgers_exact(t, x + eps) - burgers_exact(t, x - eps)) / (2 * eps)
    fd_xx = (burgers_exact(t, x + eps) - 2 * burgers_exact(t, x) + burgers_exact(t, x - eps)) / eps**2
    fd_t = (burgers_exact(t + eps, x) - burgers_exact(t - eps, x)) / (2 * eps)
    fd_tt = (burgers_exact(t + eps, x) - 2 * u + burgers_exact(t - eps, x)) / eps**2
    assert np.abs(ux - fd_x).max() < 1e-6
    assert np.abs(uxx - fd_xx).max() < 1e-3
    assert np.abs(ut - fd_t).max() < 1e-6
    assert np.abs(utt - fd_tt).max() < 1e-3


def test_satisfies_pde():
    t = 0.6
    x = np.linspace(-0.8, 0.8, 9)
    u, ut, _, ux, uxx = burgers_exact_derivatives(t, x)
    res = ut + u * ux - BURGERS_C * uxx
    assert np.abs(res).max() < 1e-9


def test_coarse_crank_nicolson_agreement():
    # Quick version of the finite-difference oracle; the fine-grid run
    # lives in the acceptance suite.
    dx, dt = 1.0 / 512, 1.0 / 1024
    xs, times, frames = cn_burgers.solve(dx, dt, 0.8)
    for t in (0.25, 0.5, 0.75):
        for xq in (-0.7, -0.3, 0.4, 0.8):
            ref = cn_burgers.at(xs, frames, times, t, xq, dt)
            assert abs(burgers_exact(t, xq) - ref) < 2e-3
