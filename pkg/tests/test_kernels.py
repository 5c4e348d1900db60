import numpy as np
import pytest

from alpinn import _kernels_py as kpy
from alpinn import kernels

try:
    from alpinn import _kernels as kc
except ImportError:
    kc = None

needs_compiled = pytest.mark.skipif(kc is None, reason="compiled extension unavailable")


def bundles(d, m, seed=0):
    rng = np.random.default_rng(seed)
    c = 1 + 2 * d
    x = np.ascontiguousarray(rng.normal(size=(c, m)))
    bar = np.ascontiguousarray(rng.normal(size=(c, m)))
    return x, bar


@pytest.mark.parametrize("d", [2, 3])
def test_forward_matches_chain_rule(d):
    x, _ = bundles(d, 20)
    for fwd, f, fp, fpp in [
        (kpy.tanh_jet_fwd, np.tanh, lambda v: 1 - np.tanh(v) ** 2,
         lambda v: -2 * np.tanh(v) * (1 - np.tanh(v) ** 2)),
        (kpy.sin_jet_fwd, np.sin, np.cos, lambda v: -np.sin(v)),
    ]:
        out = fwd(x, d)
        v = x[0]
        assert np.allclose(out[0], f(v))
        for i in range(d):
            g, h = x[1 + i], x[1 + d + i]
            assert np.allclose(out[1 + i], fp(v) * g)
            assert np.allclose(out[1 + d + i], fpp(v) * g * g + fp(v) * h)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("name", ["tanh", "sin"])
def test_backward_matches_finite_differences(d, name):
    fwd = getattr(kpy, f"{name}_jet_fwd")
    bwd = getattr(kpy, f"{name}_jet_bwd")
    x, bar = bundles(d, 6, seed=3)
    y = fwd(x, d)
    ax = bwd(x, y, bar, d)
    eps = 1e-6
    for r in range(x.shape[0]):
        for col in (0, 3):
            xp = x.copy()
            xp[r, col] += eps
            xm = x.copy()
            xm[r, col] -= eps
            fd = ((fwd(xp, d) * bar).sum() - (fwd(xm, d) * bar).sum()) / (2 * eps)
            assert abs(ax[r, col] - fd) < 1e-6


@needs_compiled
@pytest.mark.parametrize("d", [2, 3])
def test_backends_agree(d):
    x, bar = bundles(d, 500, seed=7)
    for name in ("tanh", "sin"):
        fp = getattr(kpy, f"{name}_jet_fwd")
        fc = getattr(kc, f"{name}_jet_fwd")
        yp, yc = fp(x, d), fc(x, d)
        assert np.allclose(yp, yc, atol=1e-14, rtol=1e-14)
        bp = getattr(kpy, f"{name}_jet_bwd")(x, yp, bar, d)
        bc = getattr(kc, f"{name}_jet_bwd")(x, np.ascontiguousarray(yc), bar, d)
        assert np.allclose(bp, bc, atol=1e-13, rtol=1e-13)


def test_backend_selection_reports():
    assert kernels.BACKEND in ("compiled", "python")


def test_pure_python_env_forces_fallback():
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "import alpinn.kernels as k; print(k.BACKEND)"],
        env={"ALPINN_PURE_PYTHON": "1", "PATH": "/usr/bin:/bin"},
        capture_output=True,
        text=True,
    )
    assert out.stdout.strip() == "python"
