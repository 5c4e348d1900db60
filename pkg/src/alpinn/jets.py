"""Forward-mode jets: value, input gradient, diagonal second derivatives.

A ``Jet`` carries the quantities needed by the PDE residuals: u, the
first derivatives du/dx_i, and the pure second derivatives d2u/dx_i2,
for a fixed input dimension d (2 or 3).  Every coefficient is a tape
``Var``, so any expression built from jets remains differentiable with
respect to the network parameters.

Mixed second partials are deliberately not carried; requesting one has
no representation here and the operation set cannot produce one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tape as tp
from .tape import Tape, TapeError, Var

__all__ = ["Jet", "jet_op", "seed_input"]


@dataclass
class Jet:
    v: Var
    g: tuple[Var, ...]
    h: tuple[Var, ...]

    @property
    def dim(self) -> int:
        return len(self.g)

    # Arithmetic sugar; all routes through jet_op.  Plain numbers are
    # constants: zero first and second derivatives.
    def __add__(self, other):
        return jet_op("add", self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return jet_op("sub", self, other)

    def __rsub__(self, other):
        return jet_op("neg", jet_op("sub", self, other))

    def __mul__(self, other):
        return jet_op("mul", self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return jet_op("div", self, other)

    def __neg__(self):
        return jet_op("neg", self)

    def __pow__(self, n: int):
        return jet_op("pow_int", self, n)


def _check_dims(*jets: Jet) -> int:
    d = jets[0].dim
    for j in jets[1:]:
        if j.dim != d:
            raise TapeError(f"jet dimension mismatch: {j.dim} != {d}")
    return d


def _unary_chain(u: Jet, fv: Var, fp: Var, fpp: Var) -> Jet:
    """Chain rule through a unary map given f(v), f'(v), f''(v)."""
    g = tuple(fp * gi for gi in u.g)
    h = tuple(fpp * tp.square(gi) + fp * hi for gi, hi in zip(u.g, u.h))
    return Jet(fv, g, h)


def _add(u: Jet, w: Jet) -> Jet:
    _check_dims(u, w)
    return Jet(
        u.v + w.v,
        tuple(a + b for a, b in zip(u.g, w.g)),
        tuple(a + b for a, b in zip(u.h, w.h)),
    )


def _sub(u: Jet, w: Jet) -> Jet:
    _check_dims(u, w)
    return Jet(
        u.v - w.v,
        tuple(a - b for a, b in zip(u.g, w.g)),
        tuple(a - b for a, b in zip(u.h, w.h)),
    )


def _mul(u: Jet, w: Jet) -> Jet:
    _check_dims(u, w)
    v = u.v * w.v
    g = tuple(ug * w.v + u.v * wg for ug, wg in zip(u.g, w.g))
    h = tuple(
        uh * w.v + 2.0 * (ug * wg) + u.v * wh
        for ug, uh, wg, wh in zip(u.g, u.h, w.g, w.h)
    )
    return Jet(v, g, h)


def _inv(w: Jet) -> Jet:
    r = 1.0 / w.v  # raises on zero denominator
    return _unary_chain(w, r, -(r * r), 2.0 * (r * r * r))


def _neg(u: Jet) -> Jet:
    return Jet(-u.v, tuple(-gi for gi in u.g), tuple(-hi for hi in u.h))


def jet_op(op: str, *args) -> Jet:
    """Apply an elementwise operation to jets with exact first- and
    diagonal-second-order chain rules.  Binary ops accept a plain number
    in place of one jet (a constant with zero derivatives)."""
    if op in ("add", "sub", "mul", "div"):
        u, w = args
        if isinstance(w, (int, float)):
            c = float(w)
            if op == "add":
                return Jet(u.v + c, u.g, u.h)
            if op == "sub":
                return Jet(u.v - c, u.g, u.h)
            if op == "mul":
                return Jet(u.v * c, tuple(g * c for g in u.g), tuple(h * c for h in u.h))
            return Jet(u.v / c, tuple(g / c for g in u.g), tuple(h / c for h in u.h))
    if op == "add":
        return _add(*args)
    if op == "sub":
        return _sub(*args)
    if op == "mul":
        return _mul(*args)
    if op == "div":
        u, w = args
        _check_dims(u, w)
        return _mul(u, _inv(w))
    if op == "neg":
        return _neg(*args)
    if op == "sin":
        (u,) = args
        return _unary_chain(u, tp.sin(u.v), tp.cos(u.v), -tp.sin(u.v))
    if op == "cos":
        (u,) = args
        return _unary_chain(u, tp.cos(u.v), -tp.sin(u.v), -tp.cos(u.v))
    if op == "tanh":
        (u,) = args
        t = tp.tanh(u.v)
        s = 1.0 - tp.square(t)
        return _unary_chain(u, t, s, -2.0 * (t * s))
    if op == "exp":
        (u,) = args
        e = tp.exp(u.v)
        return _unary_chain(u, e, e, e)
    if op == "square":
        (u,) = args
        return _unary_chain(u, tp.square(u.v), 2.0 * u.v, _const_like(u, 2.0))
    if op == "pow_int":
        u, n = args
        if not isinstance(n, int):
            raise TapeError("pow_int exponent must be an int")
        fp = float(n) * u.v ** (n - 1)
        fpp = float(n * (n - 1)) * u.v ** (n - 2) if n != 1 else _const_like(u, 0.0)
        return _unary_chain(u, u.v ** n, fp, fpp)
    raise TapeError(f"unknown jet op {op!r}")


def _const_like(u: Jet, c: float) -> Var:
    val = u.v.value
    t = u.v.tape
    if isinstance(val, np.ndarray):
        return t.constant(np.full_like(val, c))
    return t.constant(c)


def seed_input(x, tape: Tape) -> list[Jet]:
    """Seed jets for the input coordinates.

    ``x`` is (d,) for a single point or (d, N) for a batch.  Jet i gets
    v = x[i] as a constant leaf, g = e_i, h = 0, so derivatives computed
    downstream are with respect to the input coordinates.
    """
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[0]
    if d not in (2, 3):
        raise TapeError(f"input dimension must be 2 or 3, got {d}")

    def fill(c):
        return np.full(x.shape[1:], c) if x.ndim > 1 else c

    jets = []
    for i in range(d):
        v = tape.constant(x[i])
        g = tuple(tape.constant(fill(1.0 if j == i else 0.0)) for j in range(d))
        h = tuple(tape.constant(fill(0.0)) for _ in range(d))
        jets.append(Jet(v, g, h))
    return jets
