import numpy as np
import pytest

from alpinn.jets import seed_input
from alpinn.network import (
    Architecture,
    Params,
    bind_params,
    forward,
    forward_values,
    init,
    load_params,
    save_params,
)
from alpinn.tape import Tape


def test_m1_parameter_count():
    arch = Architecture.from_tag("M1", 2)
    assert arch.n_params() == 29377


def test_tag_table():
    assert Architecture.from_tag("M2", 2).hidden == [256, 256]
    assert Architecture.from_tag("M3", 2).residual
    assert not Architecture.from_tag("M1", 3).residual
    with pytest.raises(ValueError):
        Architecture.from_tag("M5", 2)


def test_branched_architecture():
    arch = Architecture.branched_3d()
    assert arch.input_dim == 3
    assert len(arch.heads) == 3
    assert arch.hidden == [64, 50, 50, 50]
    # trunk + 3 heads of (3 hidden + 1 output) layers
    assert len(arch.layer_dims()) == 4 + 3 * 4


def test_init_bounds_and_determinism():
    arch = Architecture(2, [8])
    p1 = init(arch, "kaiming_uniform", seed=5)
    p2 = init(arch, "kaiming_uniform", seed=5)
    for (w1, b1), (w2, b2) in zip(p1.layers, p2.layers):
        assert np.array_equal(w1, w2)
        assert np.all(b1 == 0) and np.all(b2 == 0)
    w, _ = p1.layers[0]
    assert np.abs(w).max() <= np.sqrt(6.0 / 2)
    px = init(arch, "xavier_uniform", seed=5)
    wx, _ = px.layers[0]
    assert np.abs(wx).max() <= np.sqrt(6.0 / (2 + 8))
    with pytest.raises(ValueError):
        init(arch, "normal", seed=0)


def test_flatten_roundtrip():
    arch = Architecture(2, [4, 4])
    p = init(arch, seed=0)
    vec = p.flatten()
    assert vec.size == arch.n_params()
    q = Params.from_flat(arch, vec)
    for (w1, b1), (w2, b2) in zip(p.layers, q.layers):
        assert np.array_equal(w1, w2)
        assert np.array_equal(b1, b2)
    with pytest.raises(ValueError):
        Params.from_flat(arch, vec[:-1])


@pytest.mark.parametrize(
    "arch",
    [
        Architecture(2, [8, 8]),
        Architecture(2, [8, 8, 8], residual=True),
        Architecture(2, [8, 8], feature_map="sinusoidal", freq_scale=2.0),
        Architecture(3, [6, 6], heads=[("u", [4], 1), ("v", [4], 1)]),
    ],
)
def test_jet_forward_matches_plain_forward(arch):
    p = init(arch, seed=2)
    x = np.random.default_rng(0).uniform(-1, 1, (arch.input_dim, 6))
    t = Tape()
    outs = forward(bind_params(t, p, arch), arch, seed_input(x, t))
    plain = forward_values(p, arch, x)
    assert len(outs) == len(plain)
    for jet, vals in zip(outs, plain):
        assert np.allclose(jet.v.value, vals, atol=1e-12)


def test_forward_input_derivatives_match_fd():
    arch = Architecture(2, [10, 10], residual=True)
    p = init(arch, seed=4)
    x = np.random.default_rng(1).uniform(-1, 1, (2, 5))
    t = Tape()
    u = forward(bind_params(t, p, arch), arch, seed_input(x, t))[0]
    eps = 1e-4
    base = forward_values(p, arch, x)[0]
    for i in range(2):
        xp = x.copy()
        xp[i] += eps
        xm = x.copy()
        xm[i] -= eps
        up = forward_values(p, arch, xp)[0]
        um = forward_values(p, arch, xm)[0]
        assert np.abs(u.g[i].value - (up - um) / (2 * eps)).max() < 1e-6
        assert np.abs(u.h[i].value - (up - 2 * base + um) / eps**2).max() < 1e-4


def test_residual_skip_changes_output():
    plainarch = Architecture(2, [8, 8])
    resarch = Architecture(2, [8, 8], residual=True)
    p = init(plainarch, seed=0)
    x = np.array([[0.3], [0.4]])
    a = forward_values(p, plainarch, x)[0]
    b = forward_values(p, resarch, x)[0]
    assert not np.allclose(a, b)


def test_input_dim_validation():
    with pytest.raises(ValueError):
        Architecture(1, [4])
    with pytest.raises(ValueError):
        Architecture(2, [4], feature_map="fourier")


def test_save_load_roundtrip(tmp_path):
    arch = Architecture(2, [6, 6])
    p = init(arch, seed=9)
    path = tmp_path / "m.bin"
    save_params(path, p)
    q = load_params(path, arch)
    assert np.array_equal(p.flatten(), q.flatten())


def test_load_rejects_bad_files(tmp_path):
    arch = Architecture(2, [6, 6])
    p = init(arch, seed=9)
    path = tmp_path / "m.bin"
    save_params(path, p)
    data = path.read_bytes()
    (tmp_path / "magic.bin").write_bytes(b"XXXX" + data[4:])
    with pytest.raises(ValueError, match="magic"):
        load_params(tmp_path / "magic.bin", arch)
    (tmp_path / "ver.bin").write_bytes(data[:4] + b"\x09\x00\x00\x00" + data[8:])
    with pytest.raises(ValueError, match="version"):
        load_params(tmp_path / "ver.bin", arch)
    with pytest.raises(ValueError, match="parameters"):
        load_params(path, Architecture(2, [6, 7]))
