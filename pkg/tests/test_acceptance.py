"""The twelve acceptance criteria at their stated tolerances.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import random
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from covariant_weyl.geometry_numeric import (check_triangle_vectors, coincidence_limits,
                                             geometry_report, manifold)
from covariant_weyl.geometry_numeric.suite import DEFAULTS
from covariant_weyl.quantizer import (catalog, dequantize, formal_adjoint, operators_equal,
                                      quantize, verify_catalog)
from covariant_weyl.quantizer.catalog import star_route_wave
from covariant_weyl.expr_lang import Context, parse_expr
from covariant_weyl.star_engine import (StarOptions, adjoint_law, associativity, degree_violation,
                                        generic_chain, random_polynomial_symbol, star_order,
                                        tau_shift)
from covariant_weyl.star_engine.star import is_self_adjoint
from covariant_weyl.symbol_calculus import GradedSymbol, adjoint
from covariant_weyl.tensor_core import TensorExpr, canonicalize, equal_mod_identities
from covariant_weyl.wigner_numeric import hermiticity, moyal_report

from conftest import ACCEPTANCE_LINES
from oracles import Components, evaluate, flat_moyal_tensor, translation_shift


def record(number: int, title: str, passed: bool, detail: str = "") -> None:
    line = f"criterion {number:>2} {title}: {'PASS' if passed else 'FAIL'}"
    if detail:
        line += f"  ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def random_pairs(n: int, seed: int):
    rng = random.Random(seed)
    return [(random_polynomial_symbol(rng, "a"), random_polynomial_symbol(rng, "b"))
            for _ in range(n)]


# ------------------------------------------------------------------ 1

def test_criterion_01_catalog_equality():
    t0 = time.perf_counter()
    reports = {name: verify_catalog(name) for name in ("wave", "maxwell", "einstein_lin",
                                                      "yang_mills")}
    entry = catalog("dirac")
    want = parse_expr("-GammaMatrix[^^A __B ^m] * p[_m] - mass * delta.S[^^A __B]", entry.context)
    dirac = canonicalize(entry.symbol.expr - want).is_zero() and verify_catalog("dirac").passed
    seconds = time.perf_counter() - t0
    ok = all(r.passed for r in reports.values()) and dirac and seconds < 10
    record(1, "catalog equality", ok, f"{seconds:.1f} s")
    for r in reports.values():
        assert r.passed, r.to_text()
    assert dirac and seconds < 10


# ------------------------------------------------------------------ 2

def test_criterion_02_star_route_wave():
    sr = star_route_wave()
    higher = TensorExpr.from_items((fs, i, e, p) for fs, i, e, p in sr.items() if e > 0)
    want = parse_expr("-eps^-2 * g_inv[^m ^n] * p[_m] * p[_n] + gamma/3 * RicciScalar", Context())
    ok = higher.is_zero() and canonicalize(sr - want).is_zero()
    record(2, "star-route wave symbol", ok, f"eps^3 terms: {len(higher)}")
    assert ok


# ------------------------------------------------------------------ 3

def test_criterion_03_adjoint_law():
    reps = [adjoint_law(*generic_chain(bundles=None)[:2], max_order=3),
            adjoint_law(*generic_chain()[:2], max_order=3)]
    ok = all(r.passed for r in reps)
    record(3, "adjoint law, orders 0..3", ok)
    for r in reps:
        assert r.passed, r.to_text()


# ------------------------------------------------------------------ 4

def test_criterion_04_flat_moyal_equivalence():
    flat = StarOptions(flat=True)
    bad = [(n, k) for n, (a, b) in enumerate(random_pairs(50, seed=4)) for k in range(4)
           if not canonicalize(star_order(a, b, k, flat) - flat_moyal_tensor(a.expr, b.expr, k))
           .is_zero()]
    record(4, "flat Moyal equivalence, 50 pairs, k=0..3", not bad, f"mismatches: {bad[:5]}")
    assert not bad


# ------------------------------------------------------------------ 5

def test_criterion_05_associativity_scalar():
    t0 = time.perf_counter()
    rep = associativity(*generic_chain(bundles=None), max_order=3, required=2)
    seconds = time.perf_counter() - t0
    eps3 = rep.checks[3]
    ok = rep.passed and seconds < 120
    record(5, "associativity, scalar symbols", ok,
           f"eps^3 residual terms: {int(eps3.residual)}, {seconds:.1f} s")
    assert ok, rep.to_text()


@pytest.mark.xfail(strict=True, reason="bundle-valued symbols leave an eps^2 residual built "
                                       "from the curvatures of the outer bundles")
def test_criterion_05_associativity_bundle_valued():
    t0 = time.perf_counter()
    rep = associativity(*generic_chain(), max_order=3, required=2)
    seconds = time.perf_counter() - t0
    eps2 = rep.checks[2]
    record(5, "associativity, bundle-valued symbols", rep.passed,
           f"eps^2 residual terms: {int(eps2.residual)}, {seconds:.1f} s; xfail")
    assert seconds < 120
    assert rep.passed, rep.to_text()


# ------------------------------------------------------------------ 6

DEGREE_FAILURES: list = []


@settings(max_examples=200, deadline=None, derandomize=True,
          suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 2 ** 32 - 1))
def _degree_case(seed):
    rng = random.Random(seed)
    a, b = random_polynomial_symbol(rng, "a"), random_polynomial_symbol(rng, "b")
    bad = degree_violation(a, b)
    if bad:
        DEGREE_FAILURES.append((seed, bad))
    assert bad is None


def test_criterion_06_degree_bound():
    try:
        _degree_case()
    finally:
        record(6, "p-degree bound, 200 cases", not DEGREE_FAILURES, str(DEGREE_FAILURES[:1]))


# ------------------------------------------------------------------ 7

def test_criterion_07_van_vleck():
    vv = geometry_report("sphere2", "vanvleck")
    z = np.asarray(DEFAULTS["sphere2"]["z"])
    limits = [coincidence_limits(manifold("sphere2"), z, g) for g in (0.0, 0.5, 1.0)]
    ok = vv.passed and all(r.passed for r in limits)
    worst = max(c.residual for c in vv.checks[:2])
    record(7, "van Vleck on the sphere", ok, f"max |Delta - rho/sin rho| = {worst:.1e}")
    assert vv.passed, vv.to_text()
    for r in limits:
        assert r.passed, r.to_text()


# ------------------------------------------------------------------ 8

def test_criterion_08_holonomy():
    rep = geometry_report("sphere2", "holonomy")
    slope, lead = rep.checks[0], rep.checks[1]
    record(8, "holonomy expansion on the sphere", rep.passed,
           f"slope {slope.slope:.3f}, leading term {lead.residual:.1e}")
    assert rep.passed, rep.to_text()


# ------------------------------------------------------------------ 9

def test_criterion_09_triangle_vectors():
    sphere = geometry_report("sphere2", "triangle")
    d = DEFAULTS["warped2"]
    warped = check_triangle_vectors(manifold("warped2"), d["z"], d["u1"], d["u2"], order=3)
    ok = sphere.passed and warped.passed
    slopes = [c.slope for c in sphere.checks[1:]] + [warped.checks[0].slope]
    record(9, "triangle vectors: flat exact, cubic correction", ok,
           "sphere slopes (order 3, 4): {:.2f}, {:.2f}; non-constant curvature order 3: {:.2f}"
           .format(*slopes))
    assert sphere.passed, sphere.to_text()
    assert warped.passed, warped.to_text()


@pytest.mark.xfail(strict=True, reason="nabla Riemann vanishes on the round sphere, so the "
                                       "cubic truncation is accurate to fifth order")
def test_criterion_09_literal_sphere_slope_four():
    d = DEFAULTS["sphere2"]
    rep = check_triangle_vectors(manifold("sphere2"), d["z"], d["u1"], d["u2"], order=3,
                                 slope_target=4)
    record(9, "triangle vectors: sphere residual slope 4", rep.passed,
           f"slope {rep.checks[0].slope:.3f}; xfail")
    assert rep.passed, rep.to_text()


# ------------------------------------------------------------------ 10

def test_criterion_10_moyal_equation():
    t0 = time.perf_counter()
    rep = moyal_report("all")
    seconds = time.perf_counter() - t0
    on, off, wkb = rep.checks[:3]
    ok = rep.passed and seconds < 60
    record(10, "Moyal equation on grids", ok,
           f"on-shell {on.residual:.1e}, off-shell {off.residual:.2f}, "
           f"WKB slope {wkb.slope:.3f}, {seconds:.1f} s")
    assert ok, rep.to_text()


# ------------------------------------------------------------------ 11

def test_criterion_11_tau_shift():
    flat_ok = True
    for n, (a, _) in enumerate(random_pairs(10, seed=11)):
        comp = Components(dim=2, seed=n)
        for sigma, tau in ((1, Fraction(1, 2)), (Fraction(1, 2), 0), (0, 1)):
            got = evaluate(tau_shift(a, sigma, tau, max_order=2).expr, comp)
            want = translation_shift(evaluate(a.expr, comp), Fraction(sigma) - Fraction(tau),
                                     comp, 2)
            flat_ok &= got == want
    ctx = Context()
    ctx.tensor("K", (None, None))
    ctx.tensor("Y", (None,))
    ctx.tensor("f", ())
    curved = GradedSymbol(parse_expr("-eps^-2 * K[^m ^n] * p[_m] * p[_n]"
                                     " + i * eps^-1 * Y[^m ; _k] * p[_m] * Y[^k] + f", ctx))
    round_ok = True
    for s in [curved] + [a for a, _ in random_pairs(10, seed=12)]:
        there = tau_shift(s, Fraction(1, 2), 1, gamma=Fraction(1, 2), gamma_prime=0)
        back = tau_shift(there, 1, Fraction(1, 2), gamma=0, gamma_prime=Fraction(1, 2))
        lead = min(s.expr.eps_powers())
        round_ok &= canonicalize(back.expr.truncate(lead + 2) - s.expr).is_zero()
    record(11, "tau-shift: flat translation, curved round trip", flat_ok and round_ok)
    assert flat_ok and round_ok


# ------------------------------------------------------------------ 12

def test_criterion_12_hermiticity_chain():
    ctx = Context()
    ctx.tensor("S2", (None, None), symmetry=(((1, 0), 1),))
    ctx.tensor("B1", (None,))
    ctx.tensor("f", ())
    base = GradedSymbol(parse_expr("-eps^-2 * S2[^m ^n] * p[_m] * p[_n]"
                                   " + i * eps^-1 * B1[^m] * p[_m] + f + i * f", ctx))
    s = base.with_expr(canonicalize(base.expr + adjoint(base).expr))
    ok = is_self_adjoint(s)
    for gamma in (None, Fraction(1, 2)):
        op = quantize(s, gamma)
        ok &= operators_equal(formal_adjoint(op), op)
        ok &= is_self_adjoint(dequantize(op, gamma))
        ok &= equal_mod_identities(dequantize(op, gamma).expr, s.expr).equal
    h = hermiticity()
    ok &= h <= 1e-10
    record(12, "hermiticity chain", ok, f"|W[psi,phi]^dag - W[phi,psi]| = {h:.1e}")
    assert ok
