"""Pure-numpy implementations of the fused jet-activation kernels.

Channel layout of a bundle ``x`` with shape (C, M), C = 1 + 2d:
row 0 is the function value v, rows 1..d the first input derivatives
g_i, rows d+1..2d the diagonal second input derivatives h_i.

Propagation rules for a smooth unary f:
    out_v  = f(v)
    out_gi = f'(v) * g_i
    out_hi = f''(v) * g_i**2 + f'(v) * h_i
The backward passes are the exact adjoints of these maps; ``y`` is the
forward output (reused so tanh/sin need not be recomputed).
"""

from __future__ import annotations

import numpy as np


def tanh_jet_fwd(x: np.ndarray, d: int) -> np.ndarray:
    v = x[0]
    tv = np.tanh(v)
    s = 1.0 - tv * tv
    out = np.empty_like(x)
    out[0] = tv
    for i in range(d):
        g = x[1 + i]
        out[1 + i] = s * g
        out[1 + d + i] = s * x[1 + d + i] - 2.0 * tv * s * g * g
    return out


def tanh_jet_bwd(x: np.ndarray, y: np.ndarray, bar: np.ndarray, d: int) -> np.ndarray:
    tv = y[0]
    s = 1.0 - tv * tv
    ax = np.empty_like(x)
    av = bar[0] * s
    for i in range(d):
        g = x[1 + i]
        h = x[1 + d + i]
        bg = bar[1 + i]
        bh = bar[1 + d + i]
        av = av - 2.0 * tv * s * (bg * g + bh * h) - 2.0 * s * (s - 2.0 * tv * tv) * bh * g * g
        ax[1 + i] = bg * s - 4.0 * tv * s * bh * g
        ax[1 + d + i] = bh * s
    ax[0] = av
    return ax


def sin_jet_fwd(x: np.ndarray, d: int) -> np.ndarray:
    v = x[0]
    sv = np.sin(v)
    cv = np.cos(v)
    out = np.empty_like(x)
    out[0] = sv
    for i in range(d):
        g = x[1 + i]
        out[1 + i] = cv * g
        out[1 + d + i] = cv * x[1 + d + i] - sv * g * g
    return out


def sin_jet_bwd(x: np.ndarray, y: np.ndarray, bar: np.ndarray, d: int) -> np.ndarray:
    sv = y[0]
    cv = np.cos(x[0])
    ax = np.empty_like(x)
    av = bar[0] * cv
    for i in range(d):
        g = x[1 + i]
        h = x[1 + d + i]
        bg = bar[1 + i]
        bh = bar[1 + d + i]
        av = av - sv * bg * g - bh * (sv * h + cv * g * g)
        ax[1 + i] = bg * cv - 2.0 * sv * bh * g
        ax[1 + d + i] = bh * cv
    ax[0] = av
    return ax
