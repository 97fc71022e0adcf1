"""Named geometry checks with default sample configurations per manifold."""

from __future__ import annotations


import numpy as np

from ..report import VerificationReport
from .checks import (check_hderiv_lemma, check_triangle_vectors, coincidence_limits,
                     holonomy_quad, triangle_vectors)
from .geodesics import exp_map, geodesic_shoot, log_map, synge, van_vleck, van_vleck_jacobi
from .manifolds import ManifoldSpec, manifold, tangent_bundle, trivial_bundle

CHECKS = ("geodesic", "vanvleck", "coincidence", "holonomy", "triangle", "lemma")

DEFAULTS = {
    "flat2": {"z": (0.2, -0.1), "u1": (0.6, 0.3), "u2": (-0.2, 0.8), "v": (0.7, -0.4)},
    "sphere2": {"z": (1.1, 0.3), "u1": (0.6, 0.3), "u2": (-0.2, 0.8), "v": (0.3, 0.5)},
    "warped2": {"z": (0.3, 0.1), "u1": (0.6, 0.3), "u2": (-0.2, 0.8), "v": (0.3, 0.5)},
    "flat4_lorentz": {"z": (0.0, 0.1, 0.2, 0.3), "v": (1.0, 0.5, 0.2, -0.1),
                      "u1": (0.1, 0.6, 0.3, 0.0), "u2": (0.05, -0.2, 0.8, 0.1)},
    "schwarzschild_like": {"z": (0.0, 10.0, 1.2, 0.3), "v": (1.1, 0.05, 0.01, 0.03),
                           "u1": (0.1, 0.6, 0.03, 0.0), "u2": (0.05, -0.2, 0.08, 0.01)},
}


def sphere_pairs(n: int = 20, base=(1.1, 0.3)):
    """(x, y, rho) with geodesic distance rho spread over [0.1, 1.0]."""
    m = manifold("sphere2")
    x = np.asarray(base, dtype=float)
    out = []
    for j, rho in enumerate(np.linspace(0.1, 1.0, n)):
        ang = 0.37 * j
        v = np.array([rho * np.cos(ang), rho * np.sin(ang) / np.sin(x[0])])
        out.append((x, exp_map(m, x, v), float(rho)))
    return out


def _geodesic(m: ManifoldSpec, cfg: dict, rep: VerificationReport) -> None:
    z, v = np.asarray(cfg["z"], float), np.asarray(cfg["v"], float)
    r = geodesic_shoot(m, z, v)
    rep.add("norm conservation", r.steps["norm_drift"] < 1e-9, residual=r.steps["norm_drift"])
    r2 = geodesic_shoot(m, z, v, tol_ode=1e-12)
    step = float(np.max(np.abs(r.endpoint - r2.endpoint)))
    rep.add("endpoint stable under tighter tolerance", step < 1e-8, residual=step)
    back = log_map(m, z, r.endpoint)
    err = float(np.max(np.abs(back - v)))
    rep.add("log(exp(v)) = v", err < 1e-8, residual=err)
    if m.name.startswith("flat"):
        err = float(np.max(np.abs(r.endpoint - (z + v))))
        rep.add("flat endpoint x + v", err < 1e-10, residual=err)
    if m.name == "sphere2":
        eq = geodesic_shoot(m, (np.pi / 2, 0.3), (0.0, 0.7)).endpoint
        err = float(abs(eq[1] - 1.0) + abs(eq[0] - np.pi / 2))
        rep.add("equatorial shot advances longitude", err < 1e-10, residual=err)


def _vanvleck(m: ManifoldSpec, cfg: dict, rep: VerificationReport) -> None:
    if m.name == "sphere2":
        worst = cross = 0.0
        pairs = sphere_pairs(base=cfg["z"])
        for x, y, rho in pairs:
            want = rho / np.sin(rho)
            worst = max(worst, abs(van_vleck(m, x, y) - want))
            cross = max(cross, abs(van_vleck_jacobi(m, x, y) - want))
        rep.add("finite-difference Delta = rho / sin rho (20 pairs)", worst < 1e-6, residual=worst)
        rep.add("Jacobi-field Delta = rho / sin rho (20 pairs)", cross < 1e-6, residual=cross)
        x, y, _ = pairs[5]
        asym = abs(synge(m, x, y) - synge(m, y, x))
        rep.add("sigma symmetric", asym < 1e-8, residual=asym)
        asym = abs(van_vleck(m, x, y) - van_vleck(m, y, x))
        rep.add("Delta symmetric", asym < 1e-8, residual=asym)
        return
    z, v = np.asarray(cfg["z"], float), np.asarray(cfg["v"], float)
    y = exp_map(m, z, 0.5 * v)
    a, b = van_vleck(m, z, y), van_vleck_jacobi(m, z, y)
    rep.add("finite-difference and Jacobi routes agree", abs(a - b) < 1e-6, residual=abs(a - b))
    if m.name.startswith("flat"):
        rep.add("flat Delta = 1", abs(a - 1) < 1e-8, residual=abs(a - 1))


def geometry_report(name: str, check: str, gamma=None, z=None, u1=None, u2=None,
                    direction: int = 0) -> VerificationReport:
    m = manifold(name)
    cfg = dict(DEFAULTS.get(name, {}))
    for key, val in (("z", z), ("u1", u1), ("u2", u2)):
        if val is not None:
            cfg[key] = tuple(float(t) for t in val)
    for key in ("z", "u1", "u2"):
        if len(cfg[key]) != m.dim:
            raise ValueError(f"{key} has {len(cfg[key])} components; {name} has dimension {m.dim}")
    if not m.in_domain(np.asarray(cfg["z"], float)):
        raise ValueError(f"point {list(cfg['z'])} is outside the chart of {name}")
    rep = VerificationReport(f"geometry:{name}:{check}",
                             config={"manifold": name, "check": check,
                                     **{k: list(v) for k, v in cfg.items()}})
    z = np.asarray(cfg["z"], float)
    if check == "geodesic":
        _geodesic(m, cfg, rep)
    elif check == "vanvleck":
        _vanvleck(m, cfg, rep)
    elif check == "coincidence":
        gammas = [0.0, 0.5, 1.0] if gamma is None else [float(gamma)]
        rep.config["gammas"] = gammas
        for g in gammas:
            rep.extend(coincidence_limits(m, z, g), prefix=f"gamma={g}: ")
    elif check == "holonomy":
        _, sub = holonomy_quad(m, tangent_bundle(m), z, cfg["u1"], cfg["u2"])
        rep.extend(sub)
    elif check == "triangle":
        tv = triangle_vectors(manifold("flat2"), (0.0, 0.0), cfg["u1"][:2], cfg["u2"][:2])
        u1, u2 = np.asarray(cfg["u1"][:2]), np.asarray(cfg["u2"][:2])
        err = max(float(np.max(np.abs(a - b))) for a, b in
                  zip(tv, (u1, u2, u2 - u1, u1 + u2)))
        rep.add("flat triangle vectors exact", err < 1e-12, residual=err)
        # the quartic term of v1 is linear in nabla Riemann; where that vanishes the
        # cubic truncation is accurate to fifth order
        symmetric = float(np.max(np.abs(m.nabla_riemann(z)))) < 1e-10
        rep.config["nabla_riemann_vanishes"] = symmetric
        rep.extend(check_triangle_vectors(m, z, cfg["u1"], cfg["u2"], order=3,
                                          slope_target=5 if symmetric else 4))
        rep.extend(check_triangle_vectors(m, z, cfg["u1"], cfg["u2"], order=4))
    elif check == "lemma":
        p = np.linspace(0.4, -0.7, m.dim)
        section = lambda x, q: np.array([q[0] * np.sin(x[0]) * x[-1] + q[-1] * np.cos(x[-1])])
        rep.extend(check_hderiv_lemma(m, trivial_bundle(m), section, z, p, direction))
        vec = lambda x, q: np.array([np.sin(x[-1]) * q[0]] + [x[0] * q[-1] ** 2] * (m.dim - 1))
        rep.extend(check_hderiv_lemma(m, tangent_bundle(m), vec, z, p, direction),
                   prefix="tangent bundle: ")
    else:
        raise ValueError(f"unknown geometry check {check!r}; known: {', '.join(CHECKS)}")
    return rep
