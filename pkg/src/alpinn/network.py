"""Multilayer perceptrons with jet-valued forward passes.

Architectures follow the benchmark naming used throughout the package:
M1 = eight hidden layers of 64 units, M2 = two hidden layers of 256,
M3/M4 = the same with residual connections between equal-width hidden
layers.  A branched variant with a shared trunk and three output heads
covers the incompressible-flow problem, optionally with a sinusoidal
first layer.

``forward`` runs on jets so a single pass yields u and all diagonal
input derivatives; ``forward_values`` is the plain-real mirror used for
evaluation grids (no tape, no derivatives).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .jets import Jet
from .tape import Tape, TapeError, Var

__all__ = [
    "Architecture",
    "Params",
    "init",
    "bind_params",
    "forward",
    "forward_values",
    "save_params",
    "load_params",
]

MODEL_MAGIC = b"ALPN"
MODEL_VERSION = 1


@dataclass
class Architecture:
    input_dim: int
    hidden: list[int]
    residual: bool = False
    feature_map: str = "none"  # none | sinusoidal
    heads: list[tuple[str, list[int], int]] = field(
        default_factory=lambda: [("u", [], 1)]
    )
    freq_scale: float = 1.0

    def __post_init__(self):
        if self.input_dim not in (2, 3):
            raise ValueError(f"input_dim must be 2 or 3, got {self.input_dim}")
        if self.feature_map not in ("none", "sinusoidal"):
            raise ValueError(f"unknown feature_map {self.feature_map!r}")
        if any(w <= 0 for w in self.hidden):
            raise ValueError("hidden widths must be positive")

    @classmethod
    def from_tag(cls, tag: str, input_dim: int, feature_map: str = "none") -> "Architecture":
        tag = tag.upper()
        table = {
            "M1": ([64] * 8, False),
            "M2": ([256] * 2, False),
            "M3": ([64] * 8, True),
            "M4": ([256] * 2, True),
        }
        if tag not in table:
            raise ValueError(f"unknown model tag {tag!r} (expected M1..M4)")
        hidden, residual = table[tag]
        return cls(input_dim, hidden, residual=residual, feature_map=feature_map)

    @classmethod
    def branched_3d(cls, feature_map: str = "none") -> "Architecture":
        """Shared trunk (t,x,y)-64-50-50-50 with three 50-50-50-1 heads."""
        return cls(
            3,
            [64, 50, 50, 50],
            feature_map=feature_map,
            heads=[("u", [50, 50, 50], 1), ("v", [50, 50, 50], 1), ("p", [50, 50, 50], 1)],
        )

    def layer_dims(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) for every layer: trunk first, then each head."""
        dims = []
        prev = self.input_dim
        for w in self.hidden:
            dims.append((prev, w))
            prev = w
        trunk_out = prev
        for _, widths, out in self.heads:
            prev = trunk_out
            for w in widths:
                dims.append((prev, w))
                prev = w
            dims.append((prev, out))
        return dims

    def n_params(self) -> int:
        return sum(fi * fo + fo for fi, fo in self.layer_dims())


@dataclass
class Params:
    """Per-layer weights and biases, flattenable in a fixed order."""

    layers: list[tuple[np.ndarray, np.ndarray]]
    rng_seed: int = 0

    def flatten(self) -> np.ndarray:
        return np.concatenate([a.ravel() for w, b in self.layers for a in (w, b)])

    @classmethod
    def from_flat(cls, arch: Architecture, vec: np.ndarray, rng_seed: int = 0) -> "Params":
        layers = []
        pos = 0
        for fi, fo in arch.layer_dims():
            w = vec[pos : pos + fi * fo].reshape(fo, fi).copy()
            pos += fi * fo
            b = vec[pos : pos + fo].copy()
            pos += fo
            layers.append((w, b))
        if pos != vec.size:
            raise ValueError(f"flat vector length {vec.size} != expected {pos}")
        return cls(layers, rng_seed)

    def copy(self) -> "Params":
        return Params([(w.copy(), b.copy()) for w, b in self.layers], self.rng_seed)


def init(arch: Architecture, scheme: str = "kaiming_uniform", seed: int = 0) -> Params:
    """Draw weights uniformly on the scheme's bound; biases start at zero.

    kaiming_uniform: +-sqrt(6/fan_in); xavier_uniform: +-sqrt(6/(fan_in+fan_out)).
    Deterministic in ``seed``.
    """
    rng = np.random.default_rng(seed)
    layers = []
    for fi, fo in arch.layer_dims():
        if scheme == "kaiming_uniform":
            bound = np.sqrt(6.0 / fi)
        elif scheme == "xavier_uniform":
            bound = np.sqrt(6.0 / (fi + fo))
        else:
            raise ValueError(f"unknown init scheme {scheme!r}")
        w = rng.uniform(-bound, bound, size=(fo, fi))
        b = np.zeros(fo)
        layers.append((w, b))
    return Params(layers, seed)


@dataclass
class BoundParams:
    """Parameters registered as leaves on a tape, in flattening order."""

    arch: Architecture
    layers: list[tuple[Var, Var]]
    tape: Tape

    def leaf_indices(self) -> list[int]:
        return [v.idx for w, b in self.layers for v in (w, b)]


def bind_params(tape: Tape, params: Params, arch: Architecture) -> BoundParams:
    """Register every weight and bias as a tape leaf (once per step)."""
    layers = [(tape.leaf(w), tape.leaf(b)) for w, b in params.layers]
    return BoundParams(arch, layers, tape)


def _bundle(tape: Tape, x: list[Jet]) -> tuple[Var, int]:
    """Stack d input jets into a (C, d, N) bundle; returns (bundle, d)."""
    d = x[0].dim
    if len(x) != d:
        raise TapeError(f"expected {d} input jets, got {len(x)}")
    comps = [[j.v for j in x]]
    comps += [[j.g[i] for j in x] for i in range(d)]
    comps += [[j.h[i] for j in x] for i in range(d)]
    rows = [tape.stack(c) for c in comps]
    return tape.stack(rows), d


def forward(bound: BoundParams, arch: Architecture, x: list[Jet]) -> list[Jet]:
    """Jet-valued forward pass; returns one output jet per head.

    tanh on hidden layers, affine output; with a sinusoidal feature map
    the first layer's activation is sin (pre-activation scaled by
    ``freq_scale``).  Residual variants add identity skips between
    consecutive equal-width hidden layers.
    """
    if len(x) != arch.input_dim:
        raise TapeError(
            f"architecture expects {arch.input_dim} inputs, got {len(x)}"
        )
    tape = bound.tape
    # Promote scalar-valued jets to batch size 1 so one code path serves both.
    if not isinstance(x[0].v.value, np.ndarray):
        x = [
            Jet(
                tape.stack([j.v]),
                tuple(tape.stack([g]) for g in j.g),
                tuple(tape.stack([h]) for h in j.h),
            )
            for j in x
        ]
    X, d = _bundle(tape, x)
    li = 0
    prev_width = arch.input_dim
    for k, w in enumerate(arch.hidden):
        wv, bv = bound.layers[li]
        li += 1
        Z = tape.jet_affine(wv, X, bv)
        if k == 0 and arch.feature_map == "sinusoidal":
            if arch.freq_scale != 1.0:
                Z = Z * arch.freq_scale
            A = tape.sin_jet(Z, d)
        else:
            A = tape.tanh_jet(Z, d)
        if arch.residual and w == prev_width:
            X = A + X
        else:
            X = A
        prev_width = w
    trunk = X
    outputs = []
    for _, widths, out_dim in arch.heads:
        H = trunk
        for _ in widths:
            wv, bv = bound.layers[li]
            li += 1
            H = tape.tanh_jet(tape.jet_affine(wv, H, bv), d)
        wv, bv = bound.layers[li]
        li += 1
        O = tape.jet_affine(wv, H, bv)
        if out_dim != 1:
            raise TapeError("only scalar output heads are supported")
        v = tape.index0(tape.index0(O, 0), 0)
        g = tuple(tape.index0(tape.index0(O, 1 + i), 0) for i in range(d))
        h = tuple(tape.index0(tape.index0(O, 1 + d + i), 0) for i in range(d))
        outputs.append(Jet(v, g, h))
    return outputs


def forward_values(params: Params, arch: Architecture, x: np.ndarray) -> list[np.ndarray]:
    """Plain-real forward pass on points ``x`` of shape (d, N)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != arch.input_dim:
        raise ValueError(f"expected {arch.input_dim}-dimensional points")
    li = 0
    h = x
    prev_width = arch.input_dim
    for k, w in enumerate(arch.hidden):
        W, b = params.layers[li]
        li += 1
        z = W @ h + b[:, None]
        if k == 0 and arch.feature_map == "sinusoidal":
            a = np.sin(arch.freq_scale * z)
        else:
            a = np.tanh(z)
        h = a + h if (arch.residual and w == prev_width) else a
        prev_width = w
    trunk = h
    outs = []
    for _, widths, _ in arch.heads:
        h = trunk
        for _ in widths:
            W, b = params.layers[li]
            li += 1
            h = np.tanh(W @ h + b[:, None])
        W, b = params.layers[li]
        li += 1
        outs.append((W @ h + b[:, None])[0])
    return outs


def save_params(path, params: Params) -> None:
    """Write the flat parameter vector: magic, version u32, count u64, f64 LE."""
    vec = params.flatten()
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(struct.pack("<I", MODEL_VERSION))
        f.write(struct.pack("<Q", vec.size))
        f.write(vec.astype("<f8").tobytes())


def load_params(path, arch: Architecture) -> Params:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MODEL_MAGIC:
            raise ValueError(f"bad model file magic {magic!r}")
        (version,) = struct.unpack("<I", f.read(4))
        if version != MODEL_VERSION:
            raise ValueError(f"unsupported model version {version}")
        (count,) = struct.unpack("<Q", f.read(8))
        if count != arch.n_params():
            raise ValueError(
                f"model has {count} parameters, architecture expects {arch.n_params()}"
            )
        vec = np.frombuffer(f.read(8 * count), dtype="<f8").astype(np.float64)
    return Params.from_flat(arch, vec)
