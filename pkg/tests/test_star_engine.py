import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from covariant_weyl.expr_lang import Context, parse_expr
from covariant_weyl.star_engine import (StarOptions, TruncationOverflow, adjoint_law,
                                        associativity, associativity_defect, degree_violation,
                                        generic_chain, moyal_bracket, outer_curvature_defect,
                                        random_polynomial_symbol, star, star_order, tau_shift)
from covariant_weyl.star_engine.star import is_self_adjoint
from covariant_weyl.symbol_calculus import (BundleSignature, GradedSymbol, WiringMismatch,
                                            adjoint, identity_symbol)
from covariant_weyl.tensor_core import Slot, canonicalize, equal_mod_identities, reduce_mod_identities

from oracles import Components, evaluate, flat_moyal_tensor, moyal_order, translation_shift

FLAT = StarOptions(flat=True)


def scalar(src, **tensors):
    ctx = Context()
    for name, kinds in tensors.items():
        ctx.tensor(name, kinds)
    return GradedSymbol(parse_expr(src, ctx))


def same(x, y):
    return canonicalize(x - y).is_zero()


# ------------------------------------------------------------------ worked examples

def test_position_times_momentum_flat():
    comp = Components(dim=2)
    comp.set("f", lambda idx, x: x[0])
    a = scalar("f", f=())
    b = GradedSymbol(parse_expr("p[_m]", Context()), extra=(Slot("m", False),))
    got = sum((comp.eps ** k * evaluate(star_order(a, b, k, FLAT), comp, {"m": 0})
               for k in range(4)), comp.R.zero)
    assert got == comp.x[0] * comp.p[0] + comp.i * comp.eps / 2


def test_identity_symbol_is_neutral(ctx):
    a = GradedSymbol(parse_expr("a[^^A __B]", ctx),
                     BundleSignature((Slot("A", True, "E"),), (Slot("B", False, "E"),)))
    one = identity_symbol("E", "B", "C")
    ab = star(a, one)
    assert equal_mod_identities(ab.expr, a.expr.relabel({"B": ab.signature.domain[0].label}))
    ba = star(identity_symbol("E", "Z", "A"), a)
    assert equal_mod_identities(ba.expr, a.expr.relabel({"A": "Z"}))


def test_momentum_products_flat():
    ctx = Context()
    pm = GradedSymbol(parse_expr("p[_m]", ctx), extra=(Slot("m", False),))
    pn = GradedSymbol(parse_expr("p[_n]", ctx), extra=(Slot("n", False),))
    assert same(star(pm, pn, FLAT).expr, parse_expr("p[_m] * p[_n]", ctx))


def test_bracket_with_itself_vanishes():
    rng = random.Random(3)
    a = random_polynomial_symbol(rng, "a")
    assert moyal_bracket(a, a).expr.is_zero()


def test_flat_first_order_bracket_is_poisson():
    rng = random.Random(5)
    a, b = random_polynomial_symbol(rng, "a"), random_polynomial_symbol(rng, "b")
    comp = Components(dim=2, seed=1)
    A, B = evaluate(a.expr, comp), evaluate(b.expr, comp)
    poisson = sum((A.diff(comp.x[i]) * B.diff(comp.p[i]) - A.diff(comp.p[i]) * B.diff(comp.x[i])
                   for i in range(2)), comp.R.zero)
    br = moyal_bracket(a, b, StarOptions(max_order=1, flat=True)).expr
    assert evaluate(br, comp) == comp.i * comp.eps * poisson


def test_position_only_endomorphisms_commutator():
    ctx = Context()
    ctx.add_bundle("E")
    ctx.tensor("U", ("E", "E"), n_cod=1)
    ctx.tensor("W", ("E", "E"), n_cod=1)
    sig = BundleSignature((Slot("A", True, "E"),), (Slot("B", False, "E"),))
    u = GradedSymbol(parse_expr("U[^^A __B]", ctx), sig)
    w = GradedSymbol(parse_expr("W[^^A __B]", ctx), sig)
    br = moyal_bracket(u, w)
    want = parse_expr("U[^^A __C] * W[^^C __B] - W[^^A __C] * U[^^C __B]", ctx)
    assert same(br.expr, want.relabel({"B": br.signature.domain[0].label}))


def test_order_zero_is_composition():
    rng = random.Random(8)
    a, b = random_polynomial_symbol(rng, "a"), random_polynomial_symbol(rng, "b")
    assert same(star_order(a, b, 0), a.expr * b.expr)


def test_truncation_overflow():
    a = scalar("f", f=())
    with pytest.raises(TruncationOverflow):
        star_order(a, a, 4)
    with pytest.raises(TruncationOverflow):
        StarOptions(max_order=5)
    with pytest.raises(TruncationOverflow):
        tau_shift(a, 0, 1, max_order=3)


def test_wiring_mismatch():
    a, b, _ = generic_chain()
    with pytest.raises(WiringMismatch):
        star(b, a)


# ------------------------------------------------------------------ flat Moyal oracles

def _pairs(n, seed):
    rng = random.Random(seed)
    return [(random_polynomial_symbol(rng, "a"), random_polynomial_symbol(rng, "b"))
            for _ in range(n)]


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_flat_star_matches_tensor_level_moyal(k):
    for a, b in _pairs(50, seed=11):
        assert same(star_order(a, b, k, FLAT), flat_moyal_tensor(a.expr, b.expr, k))


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_flat_star_matches_component_moyal(k):
    for n, (a, b) in enumerate(_pairs(12, seed=12)):
        comp = Components(dim=2, seed=n)
        A, B = evaluate(a.expr, comp), evaluate(b.expr, comp)
        assert evaluate(star_order(a, b, k, FLAT), comp) == moyal_order(A, B, k, comp)


# ------------------------------------------------------------------ ordering shift

@pytest.mark.parametrize("sigma,tau", [(1, Fraction(1, 2)), (0, 1), (Fraction(1, 2), 0)])
def test_tau_shift_flat_translation(sigma, tau):
    for n, (a, _) in enumerate(_pairs(10, seed=20)):
        comp = Components(dim=2, seed=n)
        got = evaluate(tau_shift(a, sigma, tau, max_order=2).expr, comp)
        want = translation_shift(evaluate(a.expr, comp), Fraction(sigma) - Fraction(tau), comp, 2)
        assert got == want


def test_tau_shift_identity_and_round_trip():
    for a, _ in _pairs(10, seed=21):
        assert same(tau_shift(a, Fraction(1, 3), Fraction(1, 3)).expr, a.expr)
        there = tau_shift(a, 1, Fraction(1, 2), gamma=Fraction(1, 2), gamma_prime=0)
        back = tau_shift(there, Fraction(1, 2), 1, gamma=0, gamma_prime=Fraction(1, 2))
        assert same(back.expr.truncate(2), a.expr)


# ------------------------------------------------------------------ adjoint and self-adjointness

def test_adjoint_law_scalar_and_bundle():
    for chain in (generic_chain(bundles=None), generic_chain()):
        rep = adjoint_law(chain[0], chain[1], max_order=3)
        assert rep.passed, rep.to_text()


def test_self_adjoint_closure():
    a, b, _ = generic_chain(bundles=("E", "E", "E", "E"), names=("m", "n", "k"))
    s = GradedSymbol(canonicalize(a.expr + _aligned_adjoint(a)), a.signature)
    b = GradedSymbol(b.expr.relabel({"X1": "X0", "X2": "X1"}), a.signature)
    t = GradedSymbol(canonicalize(b.expr + _aligned_adjoint(b)), a.signature)
    assert is_self_adjoint(s) and is_self_adjoint(t)
    st_, ts = star(s, t), star(t, s)
    ts_expr = _relabel_to(st_, ts)
    anti = st_.with_expr(canonicalize(st_.expr + ts_expr))
    comm = st_.with_expr(canonicalize(st_.expr - ts_expr))
    assert equal_mod_identities(_relabel_to(anti, adjoint(anti)), anti.expr)
    assert equal_mod_identities(_relabel_to(comm, adjoint(comm)), -comm.expr)


def _aligned_adjoint(s):
    d = adjoint(s)
    return d.expr.relabel({x.label: y.label for x, y in zip(d.free_slots(), s.free_slots())})


def _relabel_to(target, other):
    return other.expr.relabel({x.label: y.label
                               for x, y in zip(other.free_slots(), target.free_slots())})


# ------------------------------------------------------------------ associativity and degree

def test_associativity_scalar():
    a, b, c = generic_chain(bundles=None)
    rep = associativity(a, b, c, max_order=3, required=3)
    assert rep.passed, rep.to_text()


def test_associativity_bundle_low_orders_and_curvature_defect():
    a, b, c = generic_chain()
    defect = associativity_defect(a, b, c, max_order=2)
    assert reduce_mod_identities(defect.eps_part(0)).is_zero()
    assert reduce_mod_identities(defect.eps_part(1)).is_zero()
    residual = reduce_mod_identities(defect.eps_part(2) - outer_curvature_defect(a, b, c))
    assert residual.is_zero()
    assert not reduce_mod_identities(defect.eps_part(2)).is_zero()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_degree_bound_property(seed):
    rng = random.Random(seed)
    a, b = random_polynomial_symbol(rng, "a"), random_polynomial_symbol(rng, "b")
    assert degree_violation(a, b) is None


def test_component_oracle_detects_a_sign_error():
    a, b = _pairs(1, seed=12)[0]
    comp = Components(dim=2, seed=0)
    A, B = evaluate(a.expr, comp), evaluate(b.expr, comp)
    got = evaluate(star_order(a, b, 1, FLAT).scaled(-1), comp)
    assert moyal_order(A, B, 1, comp) and got != moyal_order(A, B, 1, comp)
