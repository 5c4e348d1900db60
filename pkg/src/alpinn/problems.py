"""Benchmark PDE problems: residuals, constraints, data, exact solutions.

Four problems are provided:

* ``helmholtz``     -- u_xx + u_yy + u = f on [-1,1]^2, zero Dirichlet data,
                       manufactured from u = sin(pi x) sin(4 pi y).
* ``burgers``       -- u_t + u u_x - c u_xx = 0 on [0,1]x[-1,1] with
                       c = 0.01/pi, u(0,x) = -sin(pi x), u(t,+-1) = 0; the
                       exact solution is evaluated by Gauss-Hermite
                       quadrature of the heat-kernel (Cole-Hopf) form.
* ``klein_gordon``  -- u_tt - u_xx + u^3 = f on [0,1]^2, data fabricated
                       from u = x cos(5 pi t) + (t x)^3.
* ``navier_stokes`` -- 2D transient incompressible flow on
                       [0,2]x[0.5,4.5]^2 with a decaying-vortex closed-form
                       solution; Dirichlet velocity and Neumann pressure
                       boundary data plus initial data for all three fields.

Each constraint group owns one multiplier slot in the balancer.  Interior
collocation grids are cell-centered so residual and constraint point sets
never overlap; boundary faces are sampled half-open so corners belong to
exactly one face.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .jets import Jet
from .tape import Var

__all__ = [
    "GridSpec",
    "ConstraintGroup",
    "PdeProblem",
    "SampledPoints",
    "helmholtz",
    "burgers",
    "burgers_exact",
    "burgers_exact_derivatives",
    "klein_gordon",
    "navier_stokes",
    "by_name",
    "sample",
    "interior_grid",
]

PI = math.pi


@dataclass
class GridSpec:
    n_r: int
    n_b: int
    n_i: int = 0


@dataclass
class ConstraintGroup:
    """One constrained data set (boundary or initial) with its own multiplier."""

    name: str
    kind: str  # dirichlet_boundary | initial_value | initial_time_derivative | neumann_boundary | periodic_pair
    count_key: str  # "n_b" or "n_i"
    sampler: Callable[[int], tuple[np.ndarray, np.ndarray | None]]
    residual: Callable[[list[Jet], np.ndarray, np.ndarray | None], Var]


@dataclass
class PdeProblem:
    name: str
    input_dim: int
    domain: list[tuple[float, float]]
    head_names: list[str]
    residual: Callable[[list[Jet], np.ndarray], list[Var]]
    constraints: list[ConstraintGroup]
    exact: Callable[[np.ndarray], list[np.ndarray]]
    exact_derivatives: Callable[[np.ndarray], list[tuple[np.ndarray, np.ndarray, np.ndarray]]]


@dataclass
class SampledPoints:
    interior: np.ndarray  # (d, N_r)
    groups: list[tuple[np.ndarray, np.ndarray | None]]  # (points, aux) per constraint


# ---------------------------------------------------------------------------
# grids


def interior_grid(domain, n: int) -> np.ndarray:
    """Cell-centered tensor-product grid of ``n`` points strictly inside the box."""
    d = len(domain)
    k = round(n ** (1.0 / d))
    if k**d != n:
        raise ValueError(f"interior count {n} is not a {d}-dim tensor grid size")
    axes = [lo + (np.arange(k) + 0.5) * (hi - lo) / k for lo, hi in domain]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh])


def _box_perimeter_2d(domain, n: int) -> np.ndarray:
    """Uniform points on the 4 faces of a 2D box, corners on exactly one face."""
    if n % 4 != 0:
        raise ValueError(f"boundary count {n} must split evenly over 4 faces")
    m = n // 4
    (xlo, xhi), (ylo, yhi) = domain
    xs = np.linspace(xlo, xhi, m, endpoint=False)
    ys = np.linspace(ylo, yhi, m, endpoint=False)
    bottom = np.stack([xs, np.full(m, ylo)])
    right = np.stack([np.full(m, xhi), ys])
    top = np.stack([xhi - (xs - xlo), np.full(m, yhi)])
    left = np.stack([np.full(m, xlo), yhi - (ys - ylo)])
    return np.concatenate([bottom, right, top, left], axis=1)


def _time_sides_1d(domain, n: int) -> np.ndarray:
    """Points on the two spatial ends x = lo, hi over the full time range."""
    if n % 2 != 0:
        raise ValueError(f"boundary count {n} must split evenly over 2 faces")
    m = n // 2
    (t0, t1), (xlo, xhi) = domain
    ts = np.linspace(t0, t1, m)
    lo = np.stack([ts, np.full(m, xlo)])
    hi = np.stack([ts, np.full(m, xhi)])
    return np.concatenate([lo, hi], axis=1)


def _initial_line(domain, n: int) -> np.ndarray:
    """Uniform points on the t = t0 slice of a (t, x) domain."""
    (t0, _), (xlo, xhi) = domain
    xs = np.linspace(xlo, xhi, n)
    return np.stack([np.full(n, t0), xs])


def _initial_plane(domain, n: int) -> np.ndarray:
    """Uniform (x, y) grid on the t = t0 slice of a (t, x, y) domain."""
    k = round(math.sqrt(n))
    if k * k != n:
        raise ValueError(f"initial count {n} is not a perfect square")
    (t0, _), (xlo, xhi), (ylo, yhi) = domain
    xs = np.linspace(xlo, xhi, k)
    ys = np.linspace(ylo, yhi, k)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.stack([np.full(n, t0), gx.ravel(), gy.ravel()])


def _time_faces_2d(domain, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Points on the 4 spatial faces of a (t, x, y) box, with outward normals."""
    if n % 4 != 0:
        raise ValueError(f"boundary count {n} must split evenly over 4 faces")
    m = n // 4
    k = round(math.sqrt(m))
    if k * k != m:
        raise ValueError(f"per-face boundary count {m} is not a perfect square")
    (t0, t1), (xlo, xhi), (ylo, yhi) = domain
    ts = np.linspace(t0, t1, k)
    pts = []
    normals = []
    for fixed_axis, fixed_val, sign in (
        (1, xlo, -1.0),
        (1, xhi, 1.0),
        (2, ylo, -1.0),
        (2, yhi, 1.0),
    ):
        free = np.linspace(*domain[3 - fixed_axis], k)
        gt, gf = np.meshgrid(ts, free, indexing="ij")
        p = np.empty((3, m))
        p[0] = gt.ravel()
        p[fixed_axis] = fixed_val
        p[3 - fixed_axis] = gf.ravel()
        nrm = np.zeros((3, m))
        nrm[fixed_axis] = sign
        pts.append(p)
        normals.append(nrm)
    return np.concatenate(pts, axis=1), np.concatenate(normals, axis=1)


def sample(problem: PdeProblem, grid: GridSpec, seed: int = 0) -> SampledPoints:
    """Deterministic uniform sampling of interior and constraint points.

    ``seed`` is reserved for future random layouts; the uniform layout
    ignores it.
    """
    interior = interior_grid(problem.domain, grid.n_r)
    groups = []
    for g in problem.constraints:
        n = grid.n_b if g.count_key == "n_b" else grid.n_i
        groups.append(g.sampler(n))
    return SampledPoints(interior, groups)


# ---------------------------------------------------------------------------
# Helmholtz


def _helm_u(x, y):
    return np.sin(PI * x) * np.sin(4 * PI * y)


def _helm_f(x, y):
    return (-(PI**2) - 16 * PI**2 + 1.0) * _helm_u(x, y)


def helmholtz() -> PdeProblem:
    domain = [(-1.0, 1.0), (-1.0, 1.0)]

    def residual(outputs, pts):
        u = outputs[0]
        f = _helm_f(pts[0], pts[1])
        return [u.h[0] + u.h[1] + u.v - f]

    def boundary_residual(outputs, pts, aux):
        return outputs[0].v  # target is identically zero

    def exact(pts):
        return [_helm_u(pts[0], pts[1])]

    def exact_derivatives(pts):
        x, y = pts
        u = _helm_u(x, y)
        sx, cx = np.sin(PI * x), np.cos(PI * x)
        sy, cy = np.sin(4 * PI * y), np.cos(4 * PI * y)
        g = np.stack([PI * cx * sy, 4 * PI * sx * cy])
        h = np.stack([-(PI**2) * u, -16 * PI**2 * u])
        return [(u, g, h)]

    groups = [
        ConstraintGroup(
            "boundary",
            "dirichlet_boundary",
            "n_b",
            lambda n, d=domain: (_box_perimeter_2d(d, n), None),
            boundary_residual,
        )
    ]
    return PdeProblem(
        "helmholtz", 2, domain, ["u"], residual, groups, exact, exact_derivatives
    )


# ---------------------------------------------------------------------------
# viscous Burgers

BURGERS_C = 0.01 / PI
_HERMITE_NODES = 160


def _hermgauss(n):
    return np.polynomial.hermite.hermgauss(n)


def burgers_exact(t, x, c: float = BURGERS_C, n_nodes: int = _HERMITE_NODES):
    """Exact viscous Burgers solution via Gauss-Hermite quadrature.

    Evaluates u = -int sin(pi(x-eta)) F(x-eta) K deta / int F(x-eta) K deta
    with F(y) = exp(-cos(pi y) / (2 pi c)) and heat kernel
    K = exp(-eta^2 / (4 c t)), after the substitution eta = 2 sqrt(c t) z.
    At t = 0 the initial profile -sin(pi x) is returned directly.
    ``t`` may be a scalar or an array broadcastable against ``x``.
    """
    t = np.asarray(t, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError(f"time must be nonnegative, got {t.min()}")
    t, x = np.broadcast_arrays(t, x)
    z, w = _hermgauss(n_nodes)
    ts = np.where(t > 0, t, 1.0)  # placeholder where the t=0 formula applies
    y = x[..., None] - 2.0 * np.sqrt(c * ts)[..., None] * z
    f = np.exp(-np.cos(PI * y) / (2 * PI * c))
    num = -np.sum(w * np.sin(PI * y) * f, axis=-1)
    den = np.sum(w * f, axis=-1)
    out = np.where(t > 0, num / den, -np.sin(PI * x))
    return out if out.ndim else float(out)


def burgers_exact_derivatives(t, x, c: float = BURGERS_C, n_nodes: int = _HERMITE_NODES):
    """u, u_t, u_tt, u_x, u_xx of the exact Burgers solution.

    Uses the heat-transformed potential phi with phi_t = c phi_xx, so
    u = -2c phi_x / phi and every derivative reduces to quadratures of
    d^k/dx^k of the initial potential phi0 = exp((1 - cos pi x)/(2 pi c));
    with r_k = (d^k/dx^k phi) / phi, time derivatives follow from
    dr_k/dt = c (r_{k+2} - r_k r_2).  At t = 0 everything is closed form
    in the initial profile.  ``t`` may be a scalar or an array.
    """
    t = np.asarray(t, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError(f"time must be nonnegative, got {t.min()}")
    t, x = np.broadcast_arrays(t, x)
    if np.all(t == 0.0):
        s, co = np.sin(PI * x), np.cos(PI * x)
        u = -s
        u_x = -PI * co
        u_xx = PI**2 * s
        u_t = c * u_xx - u * u_x  # from the equation itself
        # u_tt = d/dt (c u_xx - u u_x) with every term known in closed form.
        u_tx = c * PI**3 * co - PI**2 * (co * co - s * s)
        u_txx = -c * PI**4 * s + 4 * PI**3 * s * co
        u_tt = c * u_txx - u_t * u_x - u * u_tx
        return u, u_t, u_tt, u_x, u_xx
    if np.any(t == 0.0):
        parts = [
            np.asarray(v)
            for v in zip(
                *(burgers_exact_derivatives(tv, xv, c, n_nodes)
                  for tv, xv in zip(t.ravel(), x.ravel()))
            )
        ]
        return tuple(p.reshape(t.shape) for p in parts)
    z, w = _hermgauss(n_nodes)
    y = x[..., None] - 2.0 * np.sqrt(c * t)[..., None] * z
    sy, cy = np.sin(PI * y), np.cos(PI * y)
    q1 = sy / (2 * c)
    q2 = PI * cy / (2 * c)
    q3 = -(PI**2) * sy / (2 * c)
    q4 = -(PI**3) * cy / (2 * c)
    q5 = PI**4 * sy / (2 * c)
    phi0 = np.exp((1.0 - cy) / (2 * PI * c))
    # Faa di Bruno coefficients for d^k/dy^k exp(q(y)).
    b = [
        np.ones_like(y),
        q1,
        q2 + q1**2,
        q3 + 3 * q1 * q2 + q1**3,
        q4 + 4 * q3 * q1 + 3 * q2**2 + 6 * q2 * q1**2 + q1**4,
        q5 + 5 * q4 * q1 + 10 * q3 * q2 + 10 * q3 * q1**2
        + 15 * q2**2 * q1 + 10 * q2 * q1**3 + q1**5,
    ]
    p = [np.sum(w * bk * phi0, axis=-1) for bk in b]
    r = [pk / p[0] for pk in p]
    r1, r2, r3, r4, r5 = r[1], r[2], r[3], r[4], r[5]
    u = -2 * c * r1
    u_x = -2 * c * (r2 - r1**2)
    u_xx = -2 * c * (r3 - 3 * r2 * r1 + 2 * r1**3)
    u_t = -2 * c * c * (r3 - r1 * r2)
    u_tt = -2 * c**3 * (r5 - 2 * r2 * r3 - r1 * r4 + 2 * r1 * r2**2)
    return u, u_t, u_tt, u_x, u_xx


def burgers() -> PdeProblem:
    domain = [(0.0, 1.0), (-1.0, 1.0)]
    c = BURGERS_C

    def residual(outputs, pts):
        u = outputs[0]
        return [u.g[0] + u.v * u.g[1] - c * u.h[1]]

    def initial_residual(outputs, pts, aux):
        return outputs[0].v + np.sin(PI * pts[1])

    def boundary_residual(outputs, pts, aux):
        return outputs[0].v  # zero Dirichlet data at x = +-1

    def exact(pts):
        t, x = pts
        return [burgers_exact(t, x)]

    def exact_derivatives(pts):
        t, x = pts
        u, ut, utt, ux, uxx = burgers_exact_derivatives(t, x)
        return [(u, np.stack([ut, ux]), np.stack([utt, uxx]))]

    groups = [
        ConstraintGroup(
            "initial",
            "initial_value",
            "n_i",
            lambda n, d=domain: (_initial_line(d, n), None),
            initial_residual,
        ),
        ConstraintGroup(
            "boundary",
            "dirichlet_boundary",
            "n_b",
            lambda n, d=domain: (_time_sides_1d(d, n), None),
            boundary_residual,
        ),
    ]
    return PdeProblem(
        "burgers", 2, domain, ["u"], residual, groups, exact, exact_derivatives
    )


# ---------------------------------------------------------------------------
# Klein--Gordon


def _kg_u(t, x):
    return x * np.cos(5 * PI * t) + (t * x) ** 3


def _kg_f(t, x):
    u = _kg_u(t, x)
    u_tt = -25 * PI**2 * x * np.cos(5 * PI * t) + 6 * t * x**3
    u_xx = 6 * t**3 * x
    return u_tt - u_xx + u**3


def klein_gordon() -> PdeProblem:
    domain = [(0.0, 1.0), (0.0, 1.0)]

    def residual(outputs, pts):
        u = outputs[0]
        f = _kg_f(pts[0], pts[1])
        return [u.h[0] - u.h[1] + u.v**3 - f]

    def initial_value_residual(outputs, pts, aux):
        return outputs[0].v - pts[1]  # u(0, x) = x

    def initial_slope_residual(outputs, pts, aux):
        return outputs[0].g[0]  # du/dt(0, x) = 0

    def boundary_residual(outputs, pts, aux):
        return outputs[0].v - _kg_u(pts[0], pts[1])

    def exact(pts):
        return [_kg_u(pts[0], pts[1])]

    def exact_derivatives(pts):
        t, x = pts
        u = _kg_u(t, x)
        u_t = -5 * PI * x * np.sin(5 * PI * t) + 3 * t**2 * x**3
        u_x = np.cos(5 * PI * t) + 3 * t**3 * x**2
        u_tt = -25 * PI**2 * x * np.cos(5 * PI * t) + 6 * t * x**3
        u_xx = 6 * t**3 * x
        return [(u, np.stack([u_t, u_x]), np.stack([u_tt, u_xx]))]

    groups = [
        ConstraintGroup(
            "initial_value",
            "initial_value",
            "n_i",
            lambda n, d=domain: (_initial_line(d, n), None),
            initial_value_residual,
        ),
        ConstraintGroup(
            "initial_slope",
            "initial_time_derivative",
            "n_i",
            lambda n, d=domain: (_initial_line(d, n), None),
            initial_slope_residual,
        ),
        ConstraintGroup(
            "boundary",
            "dirichlet_boundary",
            "n_b",
            lambda n, d=domain: (_time_sides_1d(d, n), None),
            boundary_residual,
        ),
    ]
    return PdeProblem(
        "klein_gordon", 2, domain, ["u"], residual, groups, exact, exact_derivatives
    )


# ---------------------------------------------------------------------------
# 2D transient Navier--Stokes (decaying vortex)


def navier_stokes(nu: float = 0.01) -> PdeProblem:
    if nu <= 0:
        raise ValueError(f"viscosity must be positive, got {nu}")
    domain = [(0.0, 2.0), (0.5, 4.5), (0.5, 4.5)]

    def _e(t):
        return np.exp(-2 * PI**2 * nu * t)

    def u_ex(t, x, y):
        return np.sin(PI * x) * np.cos(PI * y) * _e(t)

    def v_ex(t, x, y):
        return -np.cos(PI * x) * np.sin(PI * y) * _e(t)

    def p_ex(t, x, y):
        # The decaying-vortex pressure that balances both momentum
        # equations is 1/4 (cos 2 pi x + cos 2 pi y) e^{-4 pi^2 nu t}.
        return 0.25 * (np.cos(2 * PI * x) + np.cos(2 * PI * y)) * _e(t) ** 2

    def grad_p(t, x, y):
        e2 = _e(t) ** 2
        return (
            -0.5 * PI * np.sin(2 * PI * x) * e2,
            -0.5 * PI * np.sin(2 * PI * y) * e2,
        )

    def residual(outputs, pts):
        u, v, p = outputs
        cont = u.g[1] + v.g[2]
        momx = u.g[0] + u.v * u.g[1] + v.v * u.g[2] + p.g[1] - nu * (u.h[1] + u.h[2])
        momy = v.g[0] + u.v * v.g[1] + v.v * v.g[2] + p.g[2] - nu * (v.h[1] + v.h[2])
        return [cont, momx, momy]

    def mk_initial(head_idx, field_fn):
        def r(outputs, pts, aux):
            return outputs[head_idx].v - field_fn(pts[0], pts[1], pts[2])

        return r

    def mk_dirichlet(head_idx, field_fn):
        def r(outputs, pts, aux):
            return outputs[head_idx].v - field_fn(pts[0], pts[1], pts[2])

        return r

    def neumann_p_residual(outputs, pts, aux):
        p = outputs[2]
        px, py = grad_p(pts[0], pts[1], pts[2])
        target = aux[1] * px + aux[2] * py
        return aux[1] * p.g[1] + aux[2] * p.g[2] - target

    def exact(pts):
        t, x, y = pts
        return [u_ex(t, x, y), v_ex(t, x, y), p_ex(t, x, y)]

    def exact_derivatives(pts):
        t, x, y = pts
        e = _e(t)
        e2 = e * e
        sx, cx = np.sin(PI * x), np.cos(PI * x)
        sy, cy = np.sin(PI * y), np.cos(PI * y)
        u = sx * cy * e
        v = -cx * sy * e
        p = 0.25 * (np.cos(2 * PI * x) + np.cos(2 * PI * y)) * e2
        k = 2 * PI**2 * nu
        du = (
            np.stack([-k * u, PI * cx * cy * e, -PI * sx * sy * e]),
            np.stack([k * k * u, -(PI**2) * u, -(PI**2) * u]),
        )
        dv = (
            np.stack([-k * v, PI * sx * sy * e, -PI * cx * cy * e]),
            np.stack([k * k * v, -(PI**2) * v, -(PI**2) * v]),
        )
        dp = (
            np.stack(
                [
                    -2 * k * p,
                    -0.5 * PI * np.sin(2 * PI * x) * e2,
                    -0.5 * PI * np.sin(2 * PI * y) * e2,
                ]
            ),
            np.stack(
                [
                    4 * k * k * p,
                    -(PI**2) * np.cos(2 * PI * x) * e2,
                    -(PI**2) * np.cos(2 * PI * y) * e2,
                ]
            ),
        )
        return [(u, *du), (v, *dv), (p, *dp)]

    def init_sampler(n, d=domain):
        return _initial_plane(d, n), None

    def face_sampler(n, d=domain):
        pts, normals = _time_faces_2d(d, n)
        return pts, normals

    groups = [
        ConstraintGroup("initial_u", "initial_value", "n_i", init_sampler, mk_initial(0, u_ex)),
        ConstraintGroup("initial_v", "initial_value", "n_i", init_sampler, mk_initial(1, v_ex)),
        ConstraintGroup("initial_p", "initial_value", "n_i", init_sampler, mk_initial(2, p_ex)),
        ConstraintGroup("boundary_u", "dirichlet_boundary", "n_b", face_sampler, mk_dirichlet(0, u_ex)),
        ConstraintGroup("boundary_v", "dirichlet_boundary", "n_b", face_sampler, mk_dirichlet(1, v_ex)),
        ConstraintGroup("boundary_p", "neumann_boundary", "n_b", face_sampler, neumann_p_residual),
    ]
    return PdeProblem(
        "navier_stokes",
        3,
        domain,
        ["u", "v", "p"],
        residual,
        groups,
        exact,
        exact_derivatives,
    )


_REGISTRY = {
    "helmholtz": helmholtz,
    "burgers": burgers,
    "klein-gordon": klein_gordon,
    "klein_gordon": klein_gordon,
    "navier-stokes": navier_stokes,
    "navier_stokes": navier_stokes,
}


def by_name(name: str, **kwargs) -> PdeProblem:
    key = name.lower()
    if key not in _REGISTRY:
        raise ValueError(
            f"unknown problem {name!r}; expected one of helmholtz, burgers, "
            "klein-gordon, navier-stokes"
        )
    return _REGISTRY[key](**kwargs)
