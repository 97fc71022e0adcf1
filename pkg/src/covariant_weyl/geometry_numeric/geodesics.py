"""Geodesics, exponential and log maps, parallel transport, Synge's world function
and the van Vleck-Morette determinant on a single chart."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from ..settings import tolerance
from .manifolds import BundleConnectionSpec, GeometryError, ManifoldSpec

TOL_ODE = tolerance("TOL_ODE")
TOL_BVP = tolerance("TOL_BVP")
H_VV = tolerance("H_VV")


class LeftChart(GeometryError):
    pass


class StepFailure(GeometryError):
    pass


class NoConvergence(GeometryError):
    def __init__(self, msg: str, residual: float = float("nan")):
        super().__init__(f"{msg} (residual {residual:.3e})")
        self.residual = residual


class IllConditioned(GeometryError):
    pass


@dataclass
class GeodesicResult:
    endpoint: np.ndarray
    velocity: np.ndarray
    transport: Optional[np.ndarray] = None
    jacobian: Optional[np.ndarray] = None
    steps: dict = field(default_factory=dict)


def _rtol(tol: float) -> float:
    # the integrator's local tolerance is set well below the requested global one
    return max(tol * 1e-3, 2.5e-14)


def geodesic_shoot(m: ManifoldSpec, x, v, t: float = 1.0,
                   bundle: Optional[BundleConnectionSpec] = None, jacobian: bool = False,
                   tol_ode: float = TOL_ODE) -> GeodesicResult:
    """Integrate the geodesic with initial point x and velocity v up to time t.

    With ``bundle`` the parallel transport matrix J_{x(t) <- x} of that bundle is
    integrated alongside.  With ``jacobian`` the variational equations give
    d x(t) / d v (the Jacobi fields with J(0) = 0, J'(0) = 1).
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    d = m.dim
    if not m.in_domain(x):
        raise LeftChart(f"start point {x} outside the chart")
    n = bundle.rank if bundle is not None else 0
    y0 = [x, v]
    if bundle is not None:
        y0.append(np.eye(n).ravel())
    if jacobian:
        y0 += [np.zeros(d * d), np.eye(d).ravel()]
    y0 = np.concatenate(y0)
    lo, hi = np.asarray(m.lower, dtype=float), np.asarray(m.upper, dtype=float)

    def rhs(_, y):
        pos, vel = y[:d], y[d:2 * d]
        gam = m.christoffel(pos)
        out = [vel, -np.einsum("abc,b,c->a", gam, vel, vel)]
        k = 2 * d
        if bundle is not None:
            p = y[k:k + n * n].reshape(n, n)
            w = np.einsum("mab,m->ab", bundle.connection(pos), vel)
            out.append((-w @ p).ravel())
            k += n * n
        if jacobian:
            jj = y[k:k + d * d].reshape(d, d)
            jd = y[k + d * d:k + 2 * d * d].reshape(d, d)
            dgam = m.christoffel_deriv(pos)
            acc = (-np.einsum("abce,ek,b,c->ak", dgam, jj, vel, vel)
                   - 2 * np.einsum("abc,b,ck->ak", gam, vel, jd))
            out += [jd.ravel(), acc.ravel()]
        return np.concatenate(out)

    def leave(_, y):
        pos = y[:d]
        return min(np.min(pos - lo), np.min(hi - pos))

    leave.terminal = True
    leave.direction = -1
    rtol = _rtol(tol_ode)
    sol = solve_ivp(rhs, (0.0, t), y0, method="DOP853", rtol=rtol, atol=rtol,
                    events=leave)
    if sol.status == 1:
        raise LeftChart(f"geodesic from {x} with velocity {v} leaves the chart")
    if sol.status != 0:
        raise StepFailure(sol.message)
    y = sol.y[:, -1]
    res = GeodesicResult(y[:d].copy(), y[d:2 * d].copy(),
                         steps={"nfev": int(sol.nfev), "nsteps": int(len(sol.t) - 1)})
    k = 2 * d
    if bundle is not None:
        res.transport = y[k:k + n * n].reshape(n, n).copy()
        k += n * n
    if jacobian:
        res.jacobian = y[k:k + d * d].reshape(d, d).copy()
    g0, g1 = m.g(x), m.g(res.endpoint)
    res.steps["norm_drift"] = float(abs(res.velocity @ g1 @ res.velocity - v @ g0 @ v))
    return res


def exp_map(m: ManifoldSpec, x, v, tol_ode: float = TOL_ODE) -> np.ndarray:
    return geodesic_shoot(m, x, v, tol_ode=tol_ode).endpoint


def transport(m: ManifoldSpec, bundle: BundleConnectionSpec, x, v,
              tol_ode: float = TOL_ODE) -> np.ndarray:
    """J_{x+v <- x} along the geodesic with initial velocity v."""
    return geodesic_shoot(m, x, v, bundle=bundle, tol_ode=tol_ode).transport


def convexity_radius(m: ManifoldSpec, x) -> float:
    """Heuristic radius pi / (2 sqrt(K_max)) from the sectional curvatures at x."""
    if m.signature != "riemannian":
        return float("inf")
    k = m.max_sectional(x)
    return float("inf") if k < 1e-14 else float(np.pi / (2 * np.sqrt(k)))


def log_map(m: ManifoldSpec, x, y, tol_bvp: float = TOL_BVP, max_iter: int = 40,
            v0=None, tol_ode: float = TOL_ODE, check_convexity: bool = True) -> np.ndarray:
    """Initial velocity v with exp_x(v) = y, by Newton iteration on the shooting map.

    The Newton Jacobian dy/dv comes from the variational equations.  Iteration
    continues past ``tol_bvp`` until the residual stops improving so that
    downstream finite differences see a smooth function of (x, y).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    v = (y - x).copy() if v0 is None else np.asarray(v0, dtype=float).copy()
    if np.allclose(x, y, rtol=0, atol=0):
        return np.zeros_like(x)
    best = np.inf
    stall = 0
    radius = convexity_radius(m, x) if check_convexity else float("inf")
    for _ in range(max_iter):
        try:
            r = geodesic_shoot(m, x, v, jacobian=True, tol_ode=tol_ode)
        except LeftChart:
            raise NoConvergence(f"shooting from {x} left the chart") from None
        res = r.endpoint - y
        err = float(np.linalg.norm(res))
        if err < best * 0.5:
            stall = 0
        else:
            stall += 1
        if err < best:
            best, vbest = err, v.copy()
        if err < 1e-15 * (1 + np.linalg.norm(y)) or stall >= 2:
            break
        if np.linalg.cond(r.jacobian) > 1e10:
            raise NoConvergence(f"conjugate point between {x} and {y}", err)
        v = v - np.linalg.solve(r.jacobian, res)
    if best > tol_bvp:
        raise NoConvergence(f"log map from {x} to {y} did not converge", best)
    if m.signature == "riemannian":
        length = float(np.sqrt(vbest @ m.g(x) @ vbest))
        if length > radius:
            raise NoConvergence(f"{y} lies outside the estimated convex neighbourhood of {x} "
                                f"(distance {length:.4f} > radius {radius:.4f})", best)
    return vbest


def synge(m: ManifoldSpec, x, y, **kw) -> float:
    """Synge's world function: half the squared geodesic length."""
    v = log_map(m, x, y, **kw)
    return 0.5 * float(v @ m.g(x) @ v)


def _det_ratio(m: ManifoldSpec, x, y, det_h: float) -> float:
    gx, gy = np.linalg.det(m.g(x)), np.linalg.det(m.g(y))
    return det_h / (np.sign(gx) * np.sqrt(abs(gx * gy)))


def _mixed_hessian(m: ManifoldSpec, x, y, h: float, v0, **kw) -> np.ndarray:
    d = m.dim
    out = np.zeros((d, d))
    eye = np.eye(d)
    for a in range(d):
        for b in range(d):
            acc = 0.0
            for sa, sb, w in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
                xs, ys = x + sa * h * eye[a], y + sb * h * eye[b]
                v = log_map(m, xs, ys, v0=v0, **kw)
                acc += w * 0.5 * float(v @ m.g(xs) @ v)
            out[a, b] = acc / (4 * h * h)
    return out


def van_vleck(m: ManifoldSpec, x, y, h: float = H_VV, cond_max: float = 1e12, **kw) -> float:
    """Delta = det(-d_x d_y sigma) / sqrt|g(x) g(y)| from a 4-point stencil on sigma,
    with one Richardson extrapolation step (h, h/2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    v0 = log_map(m, x, y, **kw)
    hess = (4 * _mixed_hessian(m, x, y, h / 2, v0, **kw) - _mixed_hessian(m, x, y, h, v0, **kw)) / 3
    if np.linalg.cond(hess) > cond_max:
        raise IllConditioned(f"mixed Hessian of sigma has condition {np.linalg.cond(hess):.3e}")
    return float(_det_ratio(m, x, y, np.linalg.det(-hess)))


def van_vleck_jacobi(m: ManifoldSpec, x, y, **kw) -> float:
    """Delta = sqrt|g(x) / g(y)| / det(d y / d v) from the Jacobi fields along the geodesic."""
    x = np.asarray(x, dtype=float)
    v = log_map(m, x, y, **kw)
    jac = geodesic_shoot(m, x, v, jacobian=True, tol_ode=kw.get("tol_ode", TOL_ODE)).jacobian
    gx, gy = np.linalg.det(m.g(x)), np.linalg.det(m.g(y))
    return float(np.sqrt(abs(gx / gy)) / np.linalg.det(jac))
