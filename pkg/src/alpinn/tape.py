"""Reverse-mode automatic differentiation on an append-only tape.

A ``Tape`` records every arithmetic operation as a node whose parents
strictly precede it, so a single reverse sweep in reverse insertion order
computes exact adjoints for every leaf.  Node values are either Python
floats or float64 ndarrays; an ndarray-valued node behaves like a bundle
of independent scalar nodes evaluated at many collocation points, which
keeps the per-node semantics of scalar taping while letting the numeric
work run through numpy.

Beyond the elementwise operation set there are a few structural nodes
(``stack``/``index0``) and two fused nodes used by the network forward
pass: ``jet_affine`` (an affine layer applied to every jet channel at
once) and the activation nodes ``tanh_jet``/``sin_jet`` whose kernels
live in :mod:`alpinn.kernels`.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels

__all__ = ["Tape", "Var", "TapeError", "CrossTapeError", "var_op", "reverse"]


class TapeError(Exception):
    """Raised on invalid tape usage (bad root, malformed operands)."""


class CrossTapeError(TapeError):
    """Raised when an operation mixes variables from different tapes."""


# Op codes.  Kept as small ints so the reverse sweep dispatches cheaply.
_LEAF = 0
_ADD = 1
_SUB = 2
_MUL = 3
_DIV = 4
_NEG = 5
_SIN = 6
_COS = 7
_TANH = 8
_EXP = 9
_SQUARE = 10
_POW_INT = 11
_ADDC = 12
_RSUBC = 13
_MULC = 14
_DIVC = 15
_RDIVC = 16
_SUM = 17
_MEAN = 18
_STACK = 19
_INDEX0 = 20
_JET_AFFINE = 21
_TANH_JET = 22
_SIN_JET = 23

_UNARY_NAMES = {
    "neg": _NEG,
    "sin": _SIN,
    "cos": _COS,
    "tanh": _TANH,
    "exp": _EXP,
    "square": _SQUARE,
}
_BINARY_NAMES = {"add": _ADD, "sub": _SUB, "mul": _MUL, "div": _DIV}


class Tape:
    """Append-only record of operations plus per-node adjoint storage."""

    def __init__(self):
        self.ops: list[int] = []
        self.parents: list[tuple[int, ...]] = []
        self.values: list = []
        self.payload: list = []

    def __len__(self):
        return len(self.ops)

    # -- node construction -------------------------------------------------

    def _append(self, op, parents, value, payload=None) -> "Var":
        idx = len(self.ops)
        self.ops.append(op)
        self.parents.append(parents)
        self.values.append(value)
        self.payload.append(payload)
        return Var(self, idx)

    def leaf(self, value) -> "Var":
        """Register an independent input (parameter or constant) node."""
        if isinstance(value, np.ndarray):
            value = np.ascontiguousarray(value, dtype=np.float64)
        else:
            value = float(value)
        return self._append(_LEAF, (), value)

    constant = leaf

    # -- structural ops ----------------------------------------------------

    def stack(self, vs: list["Var"]) -> "Var":
        """Stack equally shaped variables along a new leading axis."""
        for v in vs:
            self._check(v)
        value = np.stack([np.asarray(v.value, dtype=np.float64) for v in vs])
        return self._append(_STACK, tuple(v.idx for v in vs), value)

    def index0(self, v: "Var", i: int) -> "Var":
        """Select index ``i`` along the leading axis."""
        self._check(v)
        return self._append(_INDEX0, (v.idx,), v.value[i], i)

    def jet_affine(self, w: "Var", x: "Var", b: "Var" | None = None) -> "Var":
        """Affine map applied channelwise to a jet bundle.

        ``x`` has shape (C, k, N) with channel 0 carrying function values
        and the remaining channels first/second input derivatives; ``w``
        is (m, k).  The bias, being constant in the inputs, is added to
        channel 0 only.
        """
        self._check(w)
        self._check(x)
        wv, xv = w.value, x.value
        c, k, n = xv.shape
        if wv.shape[1] != k:
            raise TapeError(f"jet_affine shape mismatch: {wv.shape} @ {xv.shape}")
        out = wv @ xv.swapaxes(0, 1).reshape(k, c * n)
        out = out.reshape(wv.shape[0], c, n).swapaxes(0, 1).copy()
        if b is not None:
            self._check(b)
            out[0] += b.value[:, None]
            return self._append(_JET_AFFINE, (w.idx, x.idx, b.idx), out)
        return self._append(_JET_AFFINE, (w.idx, x.idx), out)

    def tanh_jet(self, x: "Var", d: int) -> "Var":
        """Fused tanh applied to a jet bundle with ``d`` input dimensions."""
        self._check(x)
        out = kernels.tanh_jet_fwd(_as2d(x.value), d).reshape(x.value.shape)
        return self._append(_TANH_JET, (x.idx,), out, d)

    def sin_jet(self, x: "Var", d: int) -> "Var":
        """Fused sine applied to a jet bundle with ``d`` input dimensions."""
        self._check(x)
        out = kernels.sin_jet_fwd(_as2d(x.value), d).reshape(x.value.shape)
        return self._append(_SIN_JET, (x.idx,), out, d)

    # -- helpers -----------------------------------------------------------

    def _check(self, v):
        if not isinstance(v, Var):
            raise TapeError(f"expected Var, got {type(v).__name__}")
        if v.tape is not self:
            raise CrossTapeError("operands recorded on different tapes")


def _as2d(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a.reshape(a.shape[0], -1))


def _size(v) -> int:
    return v.size if isinstance(v, np.ndarray) else 1


class Var:
    """Handle to a tape node: (tape, index).  Value is read off the tape."""

    __slots__ = ("tape", "idx")

    # Defer mixed ndarray-Var arithmetic to Var's reflected operators
    # instead of letting numpy broadcast over the handle.
    __array_ufunc__ = None

    def __init__(self, tape: Tape, idx: int):
        self.tape = tape
        self.idx = idx

    @property
    def value(self):
        return self.tape.values[self.idx]

    def __repr__(self):
        return f"Var(idx={self.idx}, value={self.value!r})"

    # -- arithmetic --------------------------------------------------------

    def _binary(self, other, op):
        t = self.tape
        t._check(other)
        b = other.value
        if op == _DIV and np.any(np.asarray(b) == 0.0):
            raise ZeroDivisionError(
                f"division by zero at tape node {len(t)} (denominator node {other.idx})"
            )
        val = _BIN_FWD[op](self.value, b)
        return t._append(op, (self.idx, other.idx), val)

    def __add__(self, other):
        if isinstance(other, Var):
            return self._binary(other, _ADD)
        return self.tape._append(_ADDC, (self.idx,), self.value + _as_const(other), None)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Var):
            return self._binary(other, _SUB)
        return self.tape._append(_ADDC, (self.idx,), self.value - _as_const(other), None)

    def __rsub__(self, other):
        c = _as_const(other)
        return self.tape._append(_RSUBC, (self.idx,), c - self.value, c)

    def __mul__(self, other):
        if isinstance(other, Var):
            return self._binary(other, _MUL)
        c = _as_const(other)
        return self.tape._append(_MULC, (self.idx,), self.value * c, c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Var):
            return self._binary(other, _DIV)
        c = _as_const(other)
        if np.any(np.asarray(c) == 0.0):
            raise ZeroDivisionError(f"division by zero constant at tape node {len(self.tape)}")
        return self.tape._append(_MULC, (self.idx,), self.value * (1.0 / c), 1.0 / c)

    def __rtruediv__(self, other):
        c = _as_const(other)
        if np.any(np.asarray(self.value) == 0.0):
            raise ZeroDivisionError(
                f"division by zero at tape node {len(self.tape)} (denominator node {self.idx})"
            )
        return self.tape._append(_RDIVC, (self.idx,), c / self.value, c)

    def __neg__(self):
        return self.tape._append(_NEG, (self.idx,), -self.value)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TapeError("only integer powers are recorded; use exp/log composites otherwise")
        if n < 0 and np.any(np.asarray(self.value) == 0.0):
            raise ZeroDivisionError(
                f"zero base with negative power at tape node {len(self.tape)} (node {self.idx})"
            )
        return self.tape._append(_POW_INT, (self.idx,), self.value ** n, n)

    # -- reductions --------------------------------------------------------

    def sum(self):
        v = self.value
        val = float(np.sum(v)) if isinstance(v, np.ndarray) else v
        return self.tape._append(_SUM, (self.idx,), val)

    def mean(self):
        v = self.value
        val = float(np.mean(v)) if isinstance(v, np.ndarray) else v
        return self.tape._append(_MEAN, (self.idx,), val)


def _as_const(c):
    if isinstance(c, np.ndarray):
        return c.astype(np.float64, copy=False)
    if isinstance(c, (int, float)):
        return float(c)
    raise TapeError(f"unsupported operand type {type(c).__name__}")


_BIN_FWD = {
    _ADD: lambda a, b: a + b,
    _SUB: lambda a, b: a - b,
    _MUL: lambda a, b: a * b,
    _DIV: lambda a, b: a / b,
}
def _unary(v: Var, op: int):
    t = v.tape
    x = v.value
    if op == _SIN:
        val = np.sin(x) if isinstance(x, np.ndarray) else math.sin(x)
    elif op == _COS:
        val = np.cos(x) if isinstance(x, np.ndarray) else math.cos(x)
    elif op == _TANH:
        val = np.tanh(x) if isinstance(x, np.ndarray) else math.tanh(x)
    elif op == _EXP:
        val = np.exp(x) if isinstance(x, np.ndarray) else math.exp(x)
    elif op == _SQUARE:
        val = x * x
    else:  # pragma: no cover
        raise TapeError(f"unknown unary op {op}")
    return t._append(op, (v.idx,), val)


def sin(v: Var) -> Var:
    return _unary(v, _SIN)


def cos(v: Var) -> Var:
    return _unary(v, _COS)


def tanh(v: Var) -> Var:
    return _unary(v, _TANH)


def exp(v: Var) -> Var:
    return _unary(v, _EXP)


def square(v: Var) -> Var:
    return _unary(v, _SQUARE)


def var_op(op: str, *args) -> Var:
    """Name-dispatched operation entry point.

    ``op`` is one of add/sub/mul/div/neg/sin/cos/tanh/exp/pow_int/square.
    All arguments must live on the same tape.
    """
    if op in _BINARY_NAMES:
        a, b = args
        return a._binary(b, _BINARY_NAMES[op])
    if op == "neg":
        (a,) = args
        return -a
    if op == "pow_int":
        a, n = args
        return a ** n
    if op in _UNARY_NAMES:
        (a,) = args
        return _unary(a, _UNARY_NAMES[op])
    raise TapeError(f"unknown op {op!r}")


def _accum(adj, values, idx, grad):
    """Accumulate ``grad`` into the adjoint slot of node ``idx``.

    The adjoint is reduced to the node's value shape: a scalar node used
    in an array context receives the sum of its elementwise adjoints.
    """
    v = values[idx]
    if not isinstance(v, np.ndarray) and isinstance(grad, np.ndarray):
        grad = float(np.sum(grad))
    cur = adj[idx]
    if cur is None:
        if isinstance(grad, np.ndarray):
            adj[idx] = grad.copy()
        else:
            adj[idx] = grad
    else:
        if isinstance(cur, np.ndarray):
            cur += grad
        else:
            adj[idx] = cur + grad


def reverse(tape: Tape, root: Var) -> list:
    """Run the reverse sweep from a scalar root.

    Returns the per-node adjoint list; entry ``i`` is d(root)/d(node i)
    (``None`` for nodes the root does not depend on).  The root adjoint
    is 1.  Visits every node at most once, in reverse insertion order.
    """
    if root.tape is not tape:
        raise TapeError("root does not belong to this tape")
    if isinstance(root.value, np.ndarray):
        raise TapeError("reverse requires a scalar root; reduce with sum()/mean() first")
    n = len(tape)
    ops = tape.ops
    parents = tape.parents
    values = tape.values
    payload = tape.payload
    adj = [None] * n
    adj[root.idx] = 1.0
    for i in range(root.idx, -1, -1):
        g = adj[i]
        if g is None:
            continue
        op = ops[i]
        if op == _LEAF:
            continue
        ps = parents[i]
        if op == _ADD:
            _accum(adj, values, ps[0], g)
            _accum(adj, values, ps[1], g)
        elif op == _SUB:
            _accum(adj, values, ps[0], g)
            _accum(adj, values, ps[1], -g)
        elif op == _MUL:
            _accum(adj, values, ps[0], g * values[ps[1]])
            _accum(adj, values, ps[1], g * values[ps[0]])
        elif op == _DIV:
            b = values[ps[1]]
            _accum(adj, values, ps[0], g / b)
            _accum(adj, values, ps[1], -g * values[i] / b)
        elif op == _NEG:
            _accum(adj, values, ps[0], -g)
        elif op == _SIN:
            x = values[ps[0]]
            _accum(adj, values, ps[0], g * (np.cos(x) if isinstance(x, np.ndarray) else math.cos(x)))
        elif op == _COS:
            x = values[ps[0]]
            _accum(adj, values, ps[0], -g * (np.sin(x) if isinstance(x, np.ndarray) else math.sin(x)))
        elif op == _TANH:
            y = values[i]
            _accum(adj, values, ps[0], g * (1.0 - y * y))
        elif op == _EXP:
            _accum(adj, values, ps[0], g * values[i])
        elif op == _SQUARE:
            _accum(adj, values, ps[0], g * 2.0 * values[ps[0]])
        elif op == _POW_INT:
            x = values[ps[0]]
            k = payload[i]
            _accum(adj, values, ps[0], g * k * x ** (k - 1))
        elif op == _ADDC:
            _accum(adj, values, ps[0], g)
        elif op == _RSUBC:
            _accum(adj, values, ps[0], -g)
        elif op == _MULC:
            _accum(adj, values, ps[0], g * payload[i])
        elif op == _RDIVC:
            x = values[ps[0]]
            _accum(adj, values, ps[0], -g * values[i] / x)
        elif op == _SUM:
            x = values[ps[0]]
            if isinstance(x, np.ndarray):
                _accum(adj, values, ps[0], np.full_like(x, g))
            else:
                _accum(adj, values, ps[0], g)
        elif op == _MEAN:
            x = values[ps[0]]
            if isinstance(x, np.ndarray):
                _accum(adj, values, ps[0], np.full_like(x, g / x.size))
            else:
                _accum(adj, values, ps[0], g)
        elif op == _STACK:
            for k, p in enumerate(ps):
                _accum(adj, values, p, g[k])
        elif op == _INDEX0:
            x = values[ps[0]]
            full = np.zeros_like(x)
            full[payload[i]] = g
            _accum(adj, values, ps[0], full)
        elif op == _JET_AFFINE:
            w = values[ps[0]]
            x = values[ps[1]]
            c, k, nn = x.shape
            m = w.shape[0]
            g3 = g  # (C, m, N)
            gm = g3.swapaxes(0, 1).reshape(m, c * nn)
            xm = x.swapaxes(0, 1).reshape(k, c * nn)
            _accum(adj, values, ps[0], gm @ xm.T)
            gx = (w.T @ gm).reshape(k, c, nn).swapaxes(0, 1)
            _accum(adj, values, ps[1], np.ascontiguousarray(gx))
            if len(ps) == 3:
                _accum(adj, values, ps[2], g3[0].sum(axis=1))
        elif op == _TANH_JET:
            x = values[ps[0]]
            shp = x.shape
            gx = kernels.tanh_jet_bwd(
                _as2d(x), _as2d(values[i]), _as2d(g), payload[i]
            ).reshape(shp)
            _accum(adj, values, ps[0], gx)
        elif op == _SIN_JET:
            x = values[ps[0]]
            shp = x.shape
            gx = kernels.sin_jet_bwd(
                _as2d(x), _as2d(values[i]), _as2d(g), payload[i]
            ).reshape(shp)
            _accum(adj, values, ps[0], gx)
        else:  # pragma: no cover
            raise TapeError(f"unknown op code {op} at node {i}")
    return adj
