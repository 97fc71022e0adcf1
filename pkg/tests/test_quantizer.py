from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from covariant_weyl.expr_lang import Context, parse_expr
from covariant_weyl.quantizer import (NAMES, DegreeTooHigh, GradeMismatch, MissingParam,
                                      SecondOrderOperator, UnknownName, catalog, dequantize,
                                      formal_adjoint, load_fixture, operators_equal, quantize,
                                      verify_catalog)
from covariant_weyl.star_engine.star import is_self_adjoint
from covariant_weyl.symbol_calculus import BundleSignature, GradedSymbol
from covariant_weyl.tensor_core import Slot, TensorExpr, canonicalize, equal_mod_identities

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures" / "catalog"
SCALAR = BundleSignature()
ENDO = BundleSignature((Slot("A", True, "E"),), (Slot("B", False, "E"),))


def context():
    ctx = Context()
    ctx.add_bundle("E")
    ctx.tensor("f", ())
    ctx.tensor("S2", (None, None), symmetry=(((1, 0), 1),))
    ctx.tensor("B1", (None,))
    ctx.tensor("U", ("E", "E", None), n_cod=1)
    ctx.tensor("W", ("E", "E"), n_cod=1)
    return ctx


CTX = context()
P = lambda src: parse_expr(src, CTX)

SCALAR_PARTS = {
    "a2": ["g_inv[^m ^n]", "S2[^m ^n]", "f * g_inv[^m ^n]"],
    "b1": ["B1[^m]", "f * B1[^m]", "S2[^m ^k ; _k]", "i * B1[^m]"],
    "c0": ["f", "RicciScalar", "B1[^k ; _k]", "i * f"],
}
ENDO_PARTS = {
    "a2": ["delta.E[^^A __B] * g_inv[^m ^n]", "delta.E[^^A __B] * S2[^m ^n]"],
    "b1": ["U[^^A __B ^m]", "f * U[^^A __B ^m]", "i * U[^^A __B ^m]"],
    "c0": ["W[^^A __B]", "delta.E[^^A __B] * RicciScalar", "U[^^A __B ^k ; _k]"],
}


def combo(draw, pool):
    picks = draw(st.lists(st.tuples(st.sampled_from(pool),
                                    st.integers(-3, 3).filter(bool)), min_size=0, max_size=2))
    out = TensorExpr()
    for src, c in picks:
        out = out + P(src).scaled(c)
    return canonicalize(out)


@st.composite
def operators(draw):
    bundle = draw(st.booleans())
    pool, sig = (ENDO_PARTS, ENDO) if bundle else (SCALAR_PARTS, SCALAR)
    return SecondOrderOperator(sig, combo(draw, pool["a2"]), combo(draw, pool["b1"]),
                               combo(draw, pool["c0"]))


gammas = st.sampled_from([None, Fraction(0), Fraction(1, 2), Fraction(1)])


def same(x, y):
    return canonicalize(x - y).is_zero()


def aligned(op: SecondOrderOperator, other: SecondOrderOperator) -> SecondOrderOperator:
    """``other`` with its free bundle labels renamed to those of ``op``."""
    m = {x.label: y.label for x, y in zip(other.signature.codomain + other.signature.domain,
                                          op.signature.codomain + op.signature.domain)}
    return SecondOrderOperator(op.signature, other.a2.relabel(m), other.b1.relabel(m),
                               other.c0.relabel(m))


# ------------------------------------------------------------------ worked examples

def test_wave_operator_symbol():
    op = SecondOrderOperator(SCALAR, P("g_inv[^m ^n]"), TensorExpr(), TensorExpr())
    want = P("-eps^-2 * g_inv[^m ^n] * p[_m] * p[_n] + gamma/3 * RicciScalar")
    assert same(dequantize(op).expr, want)


def test_multiplication_operator_symbol():
    op = SecondOrderOperator(SCALAR, TensorExpr(), TensorExpr(), P("f"))
    assert same(dequantize(op, Fraction(1, 2)).expr, P("f"))
    back = quantize(GradedSymbol(P("f")))
    assert back.a2.is_zero() and back.b1.is_zero() and same(back.c0, P("f"))


def test_wave_symbol_quantizes_to_laplacian():
    s = GradedSymbol(P("-eps^-2 * g_inv[^m ^n] * p[_m] * p[_n] + gamma/3 * RicciScalar"))
    op = quantize(s)
    assert same(op.a2, P("g_inv[^m ^n]")) and op.b1.is_zero() and op.c0.is_zero()


def test_quantize_rejects_bad_symbols():
    with pytest.raises(DegreeTooHigh):
        quantize(GradedSymbol(P("eps^-3 * p[_m] * p[_n] * p[_k] * g_inv[^m ^n] * B1[^k]")))
    with pytest.raises(GradeMismatch):
        quantize(GradedSymbol(P("p[_m] * B1[^m]")))


# ------------------------------------------------------------------ properties

@settings(max_examples=40, deadline=None)
@given(operators(), gammas)
def test_quantize_inverts_dequantize(op, gamma):
    assert operators_equal(quantize(dequantize(op, gamma), gamma), op)


@settings(max_examples=40, deadline=None)
@given(operators(), gammas)
def test_dequantize_inverts_quantize(op, gamma):
    s = dequantize(op, gamma)
    assert equal_mod_identities(dequantize(quantize(s, gamma), gamma).expr, s.expr)


@settings(max_examples=40, deadline=None)
@given(operators())
def test_gamma_enters_affinely_through_ricci(op):
    diff = dequantize(op, 1).expr - dequantize(op, 0).expr
    ricci = P("Ricci[_m _n]")
    assert equal_mod_identities(diff, (op.a2 * ricci).scaled(Fraction(1, 3)))
    half = dequantize(op, Fraction(1, 2)).expr
    assert equal_mod_identities(half, (dequantize(op, 1).expr + dequantize(op, 0).expr)
                                .scaled(Fraction(1, 2)))


@settings(max_examples=40, deadline=None)
@given(operators(), gammas)
def test_formally_self_adjoint_operator_has_self_adjoint_symbol(op, gamma):
    adj = aligned(op, formal_adjoint(op))
    herm = SecondOrderOperator(op.signature, canonicalize(op.a2 + adj.a2),
                               canonicalize(op.b1 + adj.b1), canonicalize(op.c0 + adj.c0))
    assert operators_equal(aligned(herm, formal_adjoint(herm)), herm)
    s = dequantize(herm, gamma)
    assert is_self_adjoint(s)
    back = quantize(s, gamma)
    assert operators_equal(aligned(back, formal_adjoint(back)), back)


# ------------------------------------------------------------------ catalog

@pytest.mark.parametrize("name", NAMES)
def test_catalog_dequantize_matches_printed_symbol(name):
    rep = verify_catalog(name)
    assert rep.passed, rep.to_text()


def test_wave_star_route():
    rep = verify_catalog("wave", gamma=Fraction(1, 2))
    assert [c.name for c in rep.checks] == ["dequantize", "star_route"] and rep.passed


def test_dirac_symbol_and_mass_parameter():
    e = catalog("dirac")
    ctx = e.context
    assert same(e.symbol.expr, parse_expr("-GammaMatrix[^^A __B ^m] * p[_m]"
                                          " - mass * delta.S[^^A __B]", ctx))
    heavy = catalog("dirac", params={"mass": 2})
    assert same(heavy.symbol.expr, parse_expr("-GammaMatrix[^^A __B ^m] * p[_m]"
                                              " - 2 * delta.S[^^A __B]", ctx))
    assert verify_catalog("dirac", params={"mass": 2}).passed


def test_einstein_parameters():
    e = catalog("einstein_lin", params={"Lambda": 3, "d": 4})
    assert "LambdaRed" not in e.symbol.expr.heads()
    assert verify_catalog("einstein_lin", params={"Lambda": 3, "d": 4}).passed
    with pytest.raises(MissingParam):
        catalog("einstein_lin", params={"Lambda": 3})


def test_abelian_yang_mills_is_maxwell_times_identity():
    ym = catalog("yang_mills", params={"abelian": True})
    mx = catalog("maxwell")
    ctx = ym.context
    want = mx.symbol.expr * parse_expr("delta.g[^^A __B]", ctx)
    assert equal_mod_identities(ym.symbol.expr, want)


def test_unknown_name():
    with pytest.raises(UnknownName):
        catalog("klein_bottle")


@pytest.mark.parametrize("name", NAMES)
def test_shipped_fixtures_match_catalog(name):
    fx = load_fixture(FIXTURES / f"{name}.wsym")
    assert same(fx.expr, catalog(name).symbol.expr)
    assert verify_catalog(name, expected=fx).passed


def test_sign_flipped_fixture_fails_with_witness():
    fx = load_fixture(FIXTURES / "maxwell.wsym")
    rep = verify_catalog("maxwell", expected=-fx)
    assert not rep.passed
    assert rep.checks[0].witness
