"""Numeric checks of coincidence limits, triangle vectors, holonomy and the
horizontal-derivative lemma.  Each returns a VerificationReport."""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import root

from ..report import VerificationReport
from ..settings import tolerance
from .geodesics import (NoConvergence, TOL_BVP, exp_map, geodesic_shoot, log_map,
                        transport, van_vleck, van_vleck_jacobi)
from .manifolds import BundleConnectionSpec, ManifoldSpec, tangent_bundle

SLOPE_TOL = tolerance("SLOPE_TOL")
SCALES = tuple(float(s) for s in np.geomspace(0.02, 0.2, 7))


def loglog_slope(scales, residuals) -> float:
    return float(np.polyfit(np.log(scales), np.log(residuals), 1)[0])


def _vec(x) -> list:
    return [float(t) for t in np.asarray(x, dtype=float).ravel()]


# ----------------------------------------------------------------------------- coincidence limits

def coincidence_limits(m: ManifoldSpec, z, gamma, h: float = 0.05, route: str = "jacobi",
                       rel_tol: float = 1e-4, abs_tol: float = 1e-8) -> VerificationReport:
    """Hessian at u = 0 of f(u) = Delta^-gamma(z - u/2, z + u/2) against -(gamma/3) Ricci(z).

    Central second differences with steps h and h/2 combined by one Richardson step.
    """
    z = np.asarray(z, dtype=float)
    gamma = float(gamma)
    delta = van_vleck_jacobi if route == "jacobi" else van_vleck
    d = m.dim
    eye = np.eye(d)

    def f(u):
        if not np.any(u):
            return 1.0
        return delta(m, exp_map(m, z, -u / 2), exp_map(m, z, u / 2)) ** (-gamma)

    def hessian(step):
        out = np.zeros((d, d))
        for a in range(d):
            for b in range(a, d):
                if a == b:
                    out[a, a] = (f(step * eye[a]) - 2 * f(0 * eye[a]) + f(-step * eye[a])) / step ** 2
                else:
                    e, o = step * (eye[a] + eye[b]), step * (eye[a] - eye[b])
                    out[a, b] = out[b, a] = (f(e) - f(o) - f(-o) + f(-e)) / (4 * step ** 2)
        return out

    num = (4 * hessian(h / 2) - hessian(h)) / 3
    ref = -(gamma / 3) * m.ricci(z)
    err = float(np.linalg.norm(num - ref))
    scale = float(np.linalg.norm(ref))
    rep = VerificationReport(f"coincidence limits on {m.name}",
                             config={"manifold": m.name, "z": _vec(z), "gamma": gamma, "h": h,
                                     "route": route})
    if scale > abs_tol:
        rep.add("second derivative", err / scale < rel_tol, residual=err / scale,
                details={"numeric": _vec(num), "expected": _vec(ref)})
    else:
        rep.add("second derivative", err < abs_tol, residual=err,
                details={"numeric": _vec(num), "expected": _vec(ref)})
    grad = np.array([(f(h * eye[a]) - f(-h * eye[a])) / (2 * h) for a in range(d)])
    rep.add("first derivative vanishes", float(np.max(np.abs(grad))) < abs_tol,
            residual=float(np.max(np.abs(grad))))
    return rep


# ----------------------------------------------------------------------------- triangle vectors

class TriangleVectors(NamedTuple):
    v1: np.ndarray
    v2: np.ndarray
    w: np.ndarray
    w_tilde: np.ndarray


def triangle_vectors(m: ManifoldSpec, z, u1, u2, tol_bvp: float = TOL_BVP) -> TriangleVectors:
    """Solve for v1, v2 at z such that the geodesics through z+v1 with half-vector
    J u2 and through z+v2 with half-vector J u1 share the endpoint z+w~, while their
    other endpoints z-w and z+w are mirror images through z."""
    z, u1, u2 = (np.asarray(a, dtype=float) for a in (z, u1, u2))
    if not np.any(u1) and not np.any(u2):
        zero = np.zeros_like(z)
        return TriangleVectors(zero, zero, zero, zero)
    tb = tangent_bundle(m)
    d = m.dim

    def legs(v, u):
        base = exp_map(m, z, v)
        half = transport(m, tb, z, v) @ u
        return base, exp_map(m, base, half), exp_map(m, base, -half)

    def residual(q):
        _, top1, bot1 = legs(q[:d], u2)
        _, top2, bot2 = legs(q[d:], u1)
        return np.concatenate([top1 - top2,
                               log_map(m, z, bot1, check_convexity=False)
                               + log_map(m, z, bot2, check_convexity=False)])

    sol = root(residual, np.concatenate([u1, u2]), method="hybr", options={"xtol": 1e-14})
    err = float(np.linalg.norm(residual(sol.x)))
    if err > tol_bvp:
        raise NoConvergence("triangle vectors", err)
    v1, v2 = sol.x[:d], sol.x[d:]
    _, top, bot = legs(v1, u2)
    return TriangleVectors(v1, v2, -log_map(m, z, bot, check_convexity=False),
                           log_map(m, z, top, check_convexity=False))


def v1_expansion(m: ManifoldSpec, z, u1, u2, order: int = 3) -> np.ndarray:
    """u1 + 1/2 R u2 u1 u2 (+ the nabla R quartic term when order >= 4)."""
    r = m.riemann(z)
    out = u1 + 0.5 * np.einsum("mabc,a,b,c->m", r, u2, u1, u2)
    if order >= 4:
        dr = m.nabla_riemann(z)
        quart = (5 * np.einsum("mabcd,a,b,c,d->m", dr, u2, u1, u2, u1)
                 - np.einsum("mabcd,a,b,c,d->m", dr, u1, u2, u1, u2)
                 - 2 * np.einsum("mabcd,a,b,c,d->m", dr, u1, u2, u1, u1)
                 + 2 * np.einsum("mabcd,a,b,c,d->m", dr, u2, u1, u2, u2))
        out = out + quart / 24
    return out


def check_triangle_vectors(m: ManifoldSpec, z, u1, u2, scales=SCALES, order: int = 3,
                           slope_target: float | None = None,
                           slope_tol: float = SLOPE_TOL) -> VerificationReport:
    """Residual of the v1 expansion at inputs (s u1, s u2) against the numeric solve."""
    z, u1, u2 = (np.asarray(a, dtype=float) for a in (z, u1, u2))
    res = []
    for s in scales:
        tv = triangle_vectors(m, z, s * u1, s * u2)
        res.append(float(np.linalg.norm(tv.v1 - v1_expansion(m, z, s * u1, s * u2, order))))
    target = order + 1 if slope_target is None else slope_target
    rep = VerificationReport(f"triangle vectors on {m.name}",
                             config={"manifold": m.name, "z": _vec(z), "u1": _vec(u1),
                                     "u2": _vec(u2), "scales": list(scales), "order": order})
    if max(res) < 1e-12:
        rep.add(f"v1 order-{order} expansion exact", True, residual=max(res))
    else:
        slope = loglog_slope(scales, res)
        rep.add(f"v1 order-{order} expansion residual slope {target}", abs(slope - target) <= slope_tol,
                residual=res[0], slope=slope, details={"residuals": res})
    return rep


# ----------------------------------------------------------------------------- holonomy

def loop_holonomy(m: ManifoldSpec, bundle: BundleConnectionSpec, z, u1, u2) -> np.ndarray:
    """Transport around z -> z+v2 -> z+w~ -> z+v1 -> z along geodesic legs."""
    z = np.asarray(z, dtype=float)
    tv = triangle_vectors(m, z, u1, u2)
    corners = [z, exp_map(m, z, tv.v2), exp_map(m, z, tv.w_tilde), exp_map(m, z, tv.v1), z]
    hol = np.eye(bundle.rank)
    for a, b in zip(corners[:-1], corners[1:]):
        leg = log_map(m, a, b, check_convexity=False)
        hol = geodesic_shoot(m, a, leg, bundle=bundle).transport @ hol
    return hol


def holonomy_expansion(m: ManifoldSpec, bundle: BundleConnectionSpec, z, u1, u2,
                       order: int = 3) -> np.ndarray:
    f = bundle.curvature(z)
    out = np.eye(bundle.rank) + np.einsum("abmn,m,n->ab", f, u1, u2)
    if order >= 3:
        df = bundle.nabla_curvature(m, z)
        out = out + 0.5 * np.einsum("abmnc,m,n,c->ab", df, u1, u2, u1 + u2)
    return out


def holonomy_quad(m: ManifoldSpec, bundle: BundleConnectionSpec, z, u1, u2, scales=SCALES,
                  leading_scale: float = 0.01, slope_target: float = 4.0,
                  slope_tol: float = SLOPE_TOL, leading_tol: float = 1e-3):
    """Holonomy of the geodesic quadrilateral at (u1, u2) and a report comparing the
    third-order expansion at scaled inputs."""
    z, u1, u2 = (np.asarray(a, dtype=float) for a in (z, u1, u2))
    hol = loop_holonomy(m, bundle, z, u1, u2)
    rep = VerificationReport(f"holonomy on {m.name}",
                             config={"manifold": m.name, "z": _vec(z), "u1": _vec(u1),
                                     "u2": _vec(u2), "scales": list(scales),
                                     "leading_scale": leading_scale})
    res = [float(np.linalg.norm(loop_holonomy(m, bundle, z, s * u1, s * u2)
                                - holonomy_expansion(m, bundle, z, s * u1, s * u2)))
           for s in scales]
    if max(res) < 1e-12:
        rep.add("third-order expansion exact", True, residual=max(res))
    else:
        slope = loglog_slope(scales, res)
        rep.add("third-order expansion residual slope", abs(slope - slope_target) <= slope_tol,
                residual=res[0], slope=slope, details={"residuals": res})
    s = leading_scale
    lead = np.einsum("abmn,m,n->ab", bundle.curvature(z), u1, u2)
    num = (loop_holonomy(m, bundle, z, s * u1, s * u2) - np.eye(bundle.rank)) / s ** 2
    scale = float(np.linalg.norm(lead))
    err = float(np.linalg.norm(num - lead))
    if scale > 1e-12:
        rep.add("leading curvature term", err / scale < leading_tol, residual=err / scale)
    else:
        rep.add("leading curvature term", err < 1e-8, residual=err)
    return hol, rep


# ----------------------------------------------------------------------------- lemma

def _cotransport(m: ManifoldSpec, x, v) -> np.ndarray:
    """Matrix taking a covector at x to its parallel transport at x+v."""
    return np.linalg.inv(transport(m, tangent_bundle(m), x, v)).T


def check_hderiv_lemma(m: ManifoldSpec, bundle: BundleConnectionSpec, section: Callable, z, p,
                       direction: int, h: float = 1e-3, tol: float = 1e-6) -> VerificationReport:
    """First-order case of the lemma: the horizontal derivative of a section u(x, p)
    of the pulled-back bundle equals d/dt of J_{z<-z+te} u(z+te, J_{z+te<-z} p) at 0.

    The right side is differentiated along geodesics; the left side uses the
    coordinate formula d_mu u + omega_mu u + Gamma^s_{mu n} p_s d u / d p_n.
    Both use central differences with one Richardson step.
    """
    z, p = np.asarray(z, dtype=float), np.asarray(p, dtype=float)
    e = np.eye(m.dim)[direction]

    def pulled(t):
        if t == 0:
            return np.atleast_1d(section(z, p))
        v = t * e
        forward = geodesic_shoot(m, z, v, bundle=bundle).transport
        y = exp_map(m, z, v)
        return np.linalg.solve(forward, np.atleast_1d(section(y, _cotransport(m, z, v) @ p)))

    def rich(fun, step):
        d1 = (fun(step) - fun(-step)) / (2 * step)
        d2 = (fun(step / 2) - fun(-step / 2)) / step
        return (4 * d2 - d1) / 3

    lemma = rich(pulled, h)
    u0 = np.atleast_1d(section(z, p))
    dx = rich(lambda t: np.atleast_1d(section(z + t * e, p)), h)
    gam = m.christoffel(z)
    fiber = np.zeros_like(u0)
    for n in range(m.dim):
        en = np.eye(m.dim)[n]
        dp = rich(lambda t: np.atleast_1d(section(z, p + t * en)), h)
        fiber = fiber + float(np.einsum("s,s->", gam[:, direction, n], p)) * dp
    coord = dx + bundle.connection(z)[direction] @ u0 + fiber
    err = float(np.max(np.abs(lemma - coord)))
    rep = VerificationReport(f"horizontal derivative lemma on {m.name}",
                             config={"manifold": m.name, "z": _vec(z), "p": _vec(p),
                                     "direction": direction, "h": h})
    rep.add("transported difference equals coordinate formula", err < tol, residual=err,
            details={"transported": _vec(lemma), "coordinate": _vec(coord)})
    return rep
