"""Charts with metrics, connections and curvature, plus the built-in test manifolds.

Curvature convention: [nabla_c, nabla_d] v^a = R^a_{bcd} v^b, Ricci R_{bd} = R^a_{bad}.
Arrays are indexed in the order the indices are written, with derivative
indices last: ``christoffel(x)[a, b, c] = Gamma^a_{bc}``,
``christoffel_deriv(x)[a, b, c, e] = d_e Gamma^a_{bc}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
import sympy as sp


class GeometryError(Exception):
    pass


class DegenerateMetric(GeometryError):
    pass


class UnknownManifold(GeometryError, KeyError):
    pass


def _fd(fun: Callable, x: np.ndarray, h: float) -> np.ndarray:
    """Central differences; derivative index appended last."""
    cols = []
    for e in range(len(x)):
        dx = np.zeros_like(x)
        dx[e] = h
        cols.append((np.asarray(fun(x + dx)) - np.asarray(fun(x - dx))) / (2 * h))
    return np.stack(cols, axis=-1)


@dataclass(frozen=True)
class ManifoldSpec:
    name: str
    dim: int
    metric: Callable
    lower: tuple
    upper: tuple
    signature: str = "riemannian"
    christoffel_fn: Optional[Callable] = None
    christoffel_deriv_fn: Optional[Callable] = None
    riemann_fn: Optional[Callable] = None
    riemann_deriv_fn: Optional[Callable] = None
    h_fd: float = 1e-5
    det_min: float = 1e-12

    def in_domain(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= np.asarray(self.lower)) and np.all(x <= np.asarray(self.upper)))

    def g(self, x) -> np.ndarray:
        m = np.asarray(self.metric(np.asarray(x, dtype=float)), dtype=float)
        if abs(np.linalg.det(m)) < self.det_min:
            raise DegenerateMetric(f"{self.name}: metric degenerate at {np.asarray(x)}")
        return m

    def christoffel(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.christoffel_fn is not None:
            return np.asarray(self.christoffel_fn(x), dtype=float)
        ginv = np.linalg.inv(self.g(x))
        dg = _fd(self.metric, x, self.h_fd)          # dg[b, c, e] = d_e g_bc
        # low[e, b, c] = 1/2 (d_b g_ec + d_c g_eb - d_e g_bc)
        low = 0.5 * (np.einsum("ecb->ebc", dg) + np.einsum("ebc->ebc", dg)
                     - np.einsum("bce->ebc", dg))
        return np.einsum("ae,ebc->abc", ginv, low)

    def christoffel_deriv(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.christoffel_deriv_fn is not None:
            return np.asarray(self.christoffel_deriv_fn(x), dtype=float)
        step = self.h_fd if self.christoffel_fn is not None else 1e-4
        return _fd(self.christoffel, x, step)

    def riemann(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.riemann_fn is not None:
            return np.asarray(self.riemann_fn(x), dtype=float)
        gam = self.christoffel(x)
        dg = self.christoffel_deriv(x)
        return (np.einsum("adbc->abcd", dg) - np.einsum("acbd->abcd", dg)
                + np.einsum("ace,edb->abcd", gam, gam) - np.einsum("ade,ecb->abcd", gam, gam))

    def riemann_deriv(self, x) -> np.ndarray:
        """Partial derivative d_e R^a_{bcd}, index order [a, b, c, d, e]."""
        x = np.asarray(x, dtype=float)
        if self.riemann_deriv_fn is not None:
            return np.asarray(self.riemann_deriv_fn(x), dtype=float)
        return _fd(self.riemann, x, 1e-3)

    def ricci(self, x) -> np.ndarray:
        return np.einsum("abad->bd", self.riemann(x))

    def nabla_riemann(self, x) -> np.ndarray:
        """nabla_e R^a_{bcd}, index order [a, b, c, d, e]."""
        gam = self.christoffel(x)
        r = self.riemann(x)
        return (self.riemann_deriv(x)
                + np.einsum("aef,fbcd->abcde", gam, r)
                - np.einsum("feb,afcd->abcde", gam, r)
                - np.einsum("fec,abfd->abcde", gam, r)
                - np.einsum("fed,abcf->abcde", gam, r))

    def max_sectional(self, x) -> float:
        """Largest |sectional curvature| over coordinate planes (Riemannian estimate)."""
        g = self.g(x)
        low = np.einsum("ae,ebcd->abcd", g, self.riemann(x))
        k = 0.0
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                area = g[i, i] * g[j, j] - g[i, j] ** 2
                if abs(area) > 0:
                    k = max(k, abs(low[i, j, i, j] / area))
        return k


@dataclass(frozen=True)
class BundleConnectionSpec:
    """Connection coefficients ``omega(x)[mu, A, B] = omega^A_{B mu}``.

    Curvature ``F^A_{B mu nu} = d_mu omega_nu - d_nu omega_mu + [omega_mu, omega_nu]``
    is returned with index order [A, B, mu, nu].
    """

    rank: int
    omega: Callable
    curvature_fn: Optional[Callable] = None
    curvature_deriv_fn: Optional[Callable] = None
    fiber_metric: Optional[Callable] = None
    h_fd: float = 1e-5

    def connection(self, x) -> np.ndarray:
        return np.asarray(self.omega(np.asarray(x, dtype=float)), dtype=float)

    def curvature(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.curvature_fn is not None:
            return np.asarray(self.curvature_fn(x), dtype=float)
        w = self.connection(x)
        dw = _fd(self.connection, x, self.h_fd)     # dw[nu, A, B, mu] = d_mu omega_nu
        f = np.einsum("nabm->abmn", dw) - np.einsum("mabn->abmn", dw)
        return f + np.einsum("mac,ncb->abmn", w, w) - np.einsum("nac,mcb->abmn", w, w)

    def curvature_deriv(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.curvature_deriv_fn is not None:
            return np.asarray(self.curvature_deriv_fn(x), dtype=float)
        return _fd(self.curvature, x, 1e-3)

    def nabla_curvature(self, m: ManifoldSpec, x) -> np.ndarray:
        """nabla_c F^A_{B mu nu}, index order [A, B, mu, nu, c]."""
        w = self.connection(x)
        gam = m.christoffel(x)
        f = self.curvature(x)
        return (self.curvature_deriv(x)
                + np.einsum("cak,kbmn->abmnc", w, f)
                - np.einsum("akmn,ckb->abmnc", f, w)
                - np.einsum("lcm,abln->abmnc", gam, f)
                - np.einsum("lcn,abml->abmnc", gam, f))


def tangent_bundle(m: ManifoldSpec) -> BundleConnectionSpec:
    """Levi-Civita connection on TM: omega^A_{B mu} = Gamma^A_{mu B}."""
    return BundleConnectionSpec(
        m.dim, lambda x: np.einsum("amb->mab", m.christoffel(x)), m.riemann,
        m.riemann_deriv, m.metric, m.h_fd)


def trivial_bundle(m: ManifoldSpec, rank: int = 1) -> BundleConnectionSpec:
    zero = np.zeros((m.dim, rank, rank))
    return BundleConnectionSpec(rank, lambda x: zero,
                                lambda x: np.zeros((rank, rank, m.dim, m.dim)),
                                lambda x: np.zeros((rank, rank, m.dim, m.dim, m.dim)),
                                lambda x: np.eye(rank))


# ----------------------------------------------------------------------------- registry

def _array_fn(coords, arr):
    f = sp.lambdify(coords, arr.tolist(), "numpy", cse=True)
    return lambda x: np.asarray(f(*x), dtype=float)


def from_sympy(name: str, coords, gmat, lower, upper, signature: str = "riemannian") -> ManifoldSpec:
    """Manifold whose Christoffel symbols and curvature are derived exactly by sympy."""
    d = len(coords)
    g = sp.Matrix(gmat)
    ginv = g.inv()
    gam = sp.MutableDenseNDimArray.zeros(d, d, d)
    for a in range(d):
        for b in range(d):
            for c in range(d):
                gam[a, b, c] = sp.simplify(sum(
                    ginv[a, e] * (sp.diff(g[e, c], coords[b]) + sp.diff(g[e, b], coords[c])
                                  - sp.diff(g[b, c], coords[e])) for e in range(d)) / 2)
    dgam = sp.derive_by_array(gam, coords)                        # [e, a, b, c]
    dgam = sp.permutedims(dgam, (1, 2, 3, 0))
    riem = sp.MutableDenseNDimArray.zeros(d, d, d, d)
    for a in range(d):
        for b in range(d):
            for c in range(d):
                for e in range(d):
                    riem[a, b, c, e] = sp.simplify(
                        sp.diff(gam[a, e, b], coords[c]) - sp.diff(gam[a, c, b], coords[e])
                        + sum(gam[a, c, f] * gam[f, e, b] - gam[a, e, f] * gam[f, c, b]
                              for f in range(d)))
    driem = sp.permutedims(sp.derive_by_array(riem, coords), (1, 2, 3, 4, 0))
    return ManifoldSpec(name, d, _array_fn(coords, g), tuple(lower), tuple(upper), signature,
                        _array_fn(coords, gam), _array_fn(coords, dgam),
                        _array_fn(coords, riem), _array_fn(coords, driem))


def _flat2():
    x, y = sp.symbols("x y")
    return from_sympy("flat2", (x, y), sp.eye(2), (-10, -10), (10, 10))


def _flat4_lorentz():
    c = sp.symbols("t x y z")
    return from_sympy("flat4_lorentz", c, sp.diag(-1, 1, 1, 1), (-10,) * 4, (10,) * 4,
                      "lorentzian")


def _sphere2():
    th, ph = sp.symbols("theta phi")
    return from_sympy("sphere2", (th, ph), sp.diag(1, sp.sin(th) ** 2),
                      (0.05, -50.0), (np.pi - 0.05, 50.0))


def _schwarzschild_like():
    t, r, th, ph = sp.symbols("t r theta phi")
    f = 1 - 2 / r
    return from_sympy("schwarzschild_like", (t, r, th, ph),
                      sp.diag(-f, 1 / f, r ** 2, r ** 2 * sp.sin(th) ** 2),
                      (-1e3, 2.2, 0.05, -50.0), (1e3, 1e3, np.pi - 0.05, 50.0), "lorentzian")


def _warped2():
    # conformally flat surface with non-constant Gaussian curvature
    x, y = sp.symbols("x y")
    phi = sp.Rational(3, 20) * x ** 2 + y / 20
    return from_sympy("warped2", (x, y), sp.exp(2 * phi) * sp.eye(2), (-3, -3), (3, 3))


_BUILDERS = {"flat2": _flat2, "flat4_lorentz": _flat4_lorentz, "sphere2": _sphere2,
             "schwarzschild_like": _schwarzschild_like, "warped2": _warped2}
MANIFOLDS = tuple(_BUILDERS)


@lru_cache(maxsize=None)
def manifold(name: str) -> ManifoldSpec:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise UnknownManifold(f"unknown manifold {name!r}; known: {', '.join(MANIFOLDS)}") from None
