"""Ready-made Moyal-equation and Wigner-transform checks on periodic boxes."""

from __future__ import annotations

import numpy as np

from ..expr_lang.context import Context
from ..expr_lang.parser import parse_expr
from ..report import VerificationReport
from ..settings import tolerance
from .wigner import (apply_constant_operator, moyal_residual_flat, quadratic_coefficients,
                     sample, star_terms_flat, wigner_flat)

SLOPE_TOL = tolerance("SLOPE_TOL")
MINKOWSKI_2 = np.diag([-1.0, 1.0])


def _symbol(text: str):
    ctx = Context()
    ctx.tensor("mass2", ())
    ctx.tensor("k2", ())
    return parse_expr(text, ctx)


def wave_symbol():
    """g^{ab} p_a p_b - mass2: on the Minkowski plane -p_t^2 + p_x^2 - mass2."""
    return _symbol("p[_a] * p[^a] - mass2")


def plane_wave_1p1(grid: int = 512, epsilon: float = 0.1, mode: int = 5, mass2: float = 0.0,
                   samples: int = 8) -> tuple:
    """Relative residual of d * W for the right-mover exp(i k (x - t) / eps) on a
    grid x grid periodic (t, x) box, evaluated at ``samples`` positions."""
    length = 2 * np.pi
    k = 2 * np.pi * epsilon * mode / length
    psi = sample(lambda t, x: np.exp(1j * k * (x - t) / epsilon), (0.0, 0.0),
                 (length, length), (grid, grid), epsilon)
    centers = [(grid * j // samples, grid * ((3 * j) % samples) // samples)
               for j in range(samples)]
    W = wigner_flat(psi, psi, centers=centers, reach=1)
    res = moyal_residual_flat(wave_symbol(), W, MINKOWSKI_2, {"mass2": mass2},
                              centers=np.array(centers))
    return res, {"grid": grid, "epsilon": epsilon, "k": k, "mass2": mass2, "samples": samples,
                 "window": W.window}


def plane_wave_1d(grid: int = 512, epsilon: float = 0.1, mode: int = 5, k_symbol=None):
    length = 2 * np.pi
    k = 2 * np.pi * epsilon * mode / length
    ks = k if k_symbol is None else k_symbol
    psi = sample(lambda x: np.exp(1j * k * x / epsilon), (0.0,), (length,), (grid,), epsilon)
    W = wigner_flat(psi, psi)
    return moyal_residual_flat(_symbol("p[_a] * p[^a] - k2"), W, np.eye(1), {"k2": ks * ks})


def wkb_packet(epsilon: float, grid: int = 512, k: float = 1.0, width: float = 0.3):
    """Gaussian envelope times exp(i k x / eps): on shell for p^2 - k^2 up to O(eps)."""
    length = 2 * np.pi
    return sample(lambda x: np.exp(-(x - np.pi) ** 2 / (2 * width ** 2)) * np.exp(1j * k * x / epsilon),
                  (0.0,), (length,), (grid,), epsilon)


def wkb_scaling(epsilons=(0.1, 0.05, 0.025), grid: int = 512, k: float = 1.0) -> tuple:
    sym = _symbol("p[_a] * p[^a] - k2")
    res = []
    for eps in epsilons:
        psi = wkb_packet(eps, grid, k)
        res.append(moyal_residual_flat(sym, wigner_flat(psi, psi), np.eye(1), {"k2": k * k}).relative)
    slope = float(np.polyfit(np.log(epsilons), np.log(res), 1)[0])
    return slope, res


def direct_operator_check(epsilon: float = 0.05, grid: int = 512, k: float = 1.0) -> float:
    """max |d * W[phi, phi] - W[phi, D phi]| relative to max |W[phi, D phi]|, with D
    applied spectrally: an independent route to the same phase-space function."""
    sym = _symbol("p[_a] * p[^a] - k2")
    psi = wkb_packet(epsilon, grid, k)
    a, b, c = quadratic_coefficients(sym, np.eye(1), {"k2": k * k})
    W = wigner_flat(psi, psi)
    Wd = wigner_flat(psi, apply_constant_operator(a, b, c, psi), check=False)
    where = W.lookup()
    diff = max(float(np.max(np.abs(star_terms_flat(a, b, c, W, z, where) - Wd.values[where[tuple(z)]])))
               for z in W.index)
    return diff / float(np.max(np.abs(Wd.values)))


def hermiticity(grid: int = 256, epsilon: float = 0.1, seed: int = 0) -> float:
    """max |W[psi, phi]^dagger - W[phi, psi]| for two-component packets."""
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=(2, 2, 3)) + 1j * rng.normal(size=(2, 2, 3))

    def packet(c):
        def f(x):
            env = np.exp(-(x - np.pi) ** 2 / 0.5)
            return np.stack([env * sum(c[a, j] * np.exp(1j * (j + 1) * 0.3 * x / epsilon)
                                       for j in range(3)) for a in range(2)], axis=-1)
        return f

    psi = sample(packet(coeffs[0]), (0.0,), (2 * np.pi,), (grid,), epsilon)
    phi = sample(packet(coeffs[1]), (0.0,), (2 * np.pi,), (grid,), epsilon)
    w1 = wigner_flat(psi, phi).values
    w2 = wigner_flat(phi, psi).values
    return float(np.max(np.abs(np.conj(np.swapaxes(w1, -1, -2)) - w2)))


def moyal_report(case: str = "all", grid: int = 512, epsilon: float = 0.1,
                 tol: float = 1e-6, off_min: float = 1e-2, slope_tol: float = SLOPE_TOL,
                 herm_tol: float = 1e-10) -> VerificationReport:
    rep = VerificationReport("Moyal equation (flat)",
                             config={"case": case, "grid": grid, "epsilon": epsilon, "tol": tol,
                                     "off_shell_min": off_min, "slope_tol": slope_tol,
                                     "window": "periodic box [0, 2 pi)^d, no taper"})
    if case in ("all", "onshell"):
        r, cfg = plane_wave_1p1(grid, epsilon)
        rep.add("on-shell 1+1 plane wave", r.relative <= tol, residual=r.relative,
                details={"absolute": r.norm, "p_integral": r.p_integral_relative, **cfg})
    if case in ("all", "offshell"):
        r, cfg = plane_wave_1p1(grid, epsilon, mass2=0.25)
        rep.add("off-shell 1+1 control", r.relative >= off_min, residual=r.relative,
                details={"absolute": r.norm, **cfg})
    if case in ("all", "wkb"):
        slope, res = wkb_scaling(grid=grid)
        rep.add("WKB packet residual linear in eps", abs(slope - 1) <= slope_tol, slope=slope,
                residual=res[-1], details={"residuals": res, "epsilons": [0.1, 0.05, 0.025]})
    if case in ("all", "hermiticity"):
        h = hermiticity()
        rep.add("W[psi, phi]^dagger = W[phi, psi]", h <= herm_tol, residual=h)
    return rep
