import json
from pathlib import Path

import pytest
from hypothesis import given, settings

from covariant_weyl.expr_lang import (Context, ParseError, UnknownHead, WsymError, dump, load,
                                      parse_expr, print_expr, to_json, to_latex, to_text)
from covariant_weyl.expr_lang.wsym import check_wsym_consistency, expr_from_obj
from covariant_weyl.symbol_calculus import GradedSymbol
from covariant_weyl.tensor_core import (MOMENTUM, ArityError, MalformedIndex, TensorExpr,
                                        UnbalancedIndex, canonicalize)
from conftest import same
from strategies import S, T, X, exprs

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def test_wave_kinetic_term(P):
    e = P("(-1) * eps^-2 * g_inv[^m ^n] * p[_m] * p[_n]")
    (coeff, factors), = e.terms()
    assert coeff.eps_power == -2 and coeff.rational == -1
    assert sum(f.head is MOMENTUM for f in factors) == 2


def test_arity_error(P):
    with pytest.raises(ArityError):
        P("Riemann[_a _b _c]")


def test_unbalanced_index(P):
    with pytest.raises(UnbalancedIndex):
        P("p[_a] * X[_a]")


def test_syntax_error_has_position(P):
    with pytest.raises(ParseError) as info:
        P("p[_a] * ")
    assert "position" in str(info.value)


def test_unknown_head(P):
    with pytest.raises(UnknownHead):
        P("Q[_a]")


def test_bundle_slots_need_bundle_kind(P):
    with pytest.raises(MalformedIndex):
        P("X[^^A]")


def test_h_derivative_operator(P):
    e = P("H(_m, a[__A ^^B])")
    (_, (f,)), = e.terms()
    assert f.head.name == "a" and len(f.h) == 1 and f.h[0].label == "m" and not f.v


def test_v_derivative_operator(P):
    (_, (f,)), = P("V(^m, a[__A ^^B])").terms()
    assert len(f.v) == 1 and f.v[0].up


def test_zero_prints_as_zero():
    assert to_text(TensorExpr()) == "0"
    assert to_latex(TensorExpr()) == "0"


def test_wave_latex(P):
    e = canonicalize(P("-eps^-2 * g_inv[^m ^n] * p[_m] * p[_n] + gamma/3 * RicciScalar"))
    assert to_latex(e) == r"-\frac{1}{\epsilon^2} g^{\mu\nu} p_\mu p_\nu + \frac{\gamma}{3} R"


def _roundtrip_ctx():
    c = Context()
    for h in (T, S, X):
        c.declare(h)
    return c


@settings(max_examples=150, deadline=None)
@given(exprs())
def test_text_roundtrip(e):
    c = canonicalize(e)
    assert canonicalize(parse_expr(to_text(c), _roundtrip_ctx())) == c


@settings(max_examples=100, deadline=None)
@given(exprs())
def test_json_roundtrip(e):
    c = canonicalize(e)
    obj = json.loads(to_json(c))
    assert obj["version"] == 1
    assert canonicalize(expr_from_obj(obj, _roundtrip_ctx())) == c


def test_print_formats(P):
    e = P("X[_a] * p[^a]")
    assert print_expr(e, "text") == to_text(e)
    assert json.loads(print_expr(e, "json"))["kind"] == "expr"


def test_version_required(P):
    obj = json.loads(to_json(P("X[_a]")))
    obj["version"] = 2
    with pytest.raises(WsymError):
        expr_from_obj(obj, _roundtrip_ctx())


@pytest.mark.parametrize("path", sorted((FIXTURES / "catalog").glob("*.wsym"))
                         + sorted((FIXTURES / "symbols").glob("*.wsym")), ids=lambda p: p.name)
def test_fixture_corpus_parses(path):
    value = load(path)
    assert isinstance(value, GradedSymbol)
    obj = json.loads(path.read_text())
    if "terms" in obj:
        assert check_wsym_consistency(obj)


def test_catalog_fixtures_print_roundtrip():
    for path in sorted((FIXTURES / "catalog").glob("*.wsym")):
        s = load(path)
        obj = json.loads(path.read_text())
        from covariant_weyl.expr_lang.wsym import context_from
        back = parse_expr(to_text(s.expr), context_from(obj))
        assert same(back, s.expr), path.name


def test_dump_load_roundtrip(tmp_path, P):
    from covariant_weyl.star_engine.checks import generic_chain
    a, _, _ = generic_chain()
    dump(a, tmp_path / "a.wsym")
    back = load(tmp_path / "a.wsym")
    assert back.signature == a.signature and same(back.expr, a.expr)


def test_load_rejects_bad_json(tmp_path):
    (tmp_path / "bad.wsym").write_text("{not json")
    with pytest.raises(WsymError):
        load(tmp_path / "bad.wsym")
