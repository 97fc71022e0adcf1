from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covariant_weyl.expr_lang import to_text
from covariant_weyl.tensor_core import (GAMMA, ArityError, Coefficient, IndexNotFree,
                                        MalformedIndex, TensorExpr, canonicalize,
                                        equal_mod_identities, reduce_mod_identities,
                                        substitute_head, symmetrize)
from conftest import same
from strategies import exprs, terms


# ----------------------------------------------------------------------------- coefficients

def test_coefficient_i_power_reduced_mod_4():
    c = Coefficient(Fraction(1), 7)
    assert c == Coefficient(Fraction(-1), 1)


def test_coefficient_products_are_exact():
    c = Coefficient(Fraction(1, 3), 1, -2) * Coefficient(Fraction(3, 7), 1, 3)
    assert c == Coefficient(Fraction(-1, 7), 0, 1)


def test_gamma_polynomial_arithmetic():
    c = (GAMMA * GAMMA) * Coefficient(Fraction(2))
    assert c.poly == (Fraction(0), Fraction(0), Fraction(2))
    assert c.evaluate(Fraction(1, 2)) == Fraction(1, 2)
    assert (TensorExpr.scalar(c) + TensorExpr.scalar(GAMMA)).substitute_gamma(1) == \
        TensorExpr.scalar(3)


def test_zero_terms_dropped(P):
    assert (P("T[_a _b]") - P("T[_a _b]")).is_zero()


# ----------------------------------------------------------------------------- canonicalize

def test_riemann_first_pair_antisymmetry(P):
    assert canonicalize(P("Riemann[_a _b _c _d] + Riemann[_b _a _c _d]")).is_zero()


def test_riemann_pair_exchange(P):
    assert canonicalize(P("Riemann[_a _b _c _d] - Riemann[_c _d _a _b]")).is_zero()


def test_dummy_relabel_invariance(P):
    assert canonicalize(P("g_inv[^a ^b] * p[_a] * p[_b]")) == \
        canonicalize(P("g_inv[^c ^a] * p[_c] * p[_a]"))


def test_metric_absorbed(P):
    assert same(P("g[_a _b] * X[^b]"), P("X[_a]"))


def test_riemann_trace_is_ricci(P):
    assert same(P("Riemann[^c _a _c _b]"), P("Ricci[_a _b]"))


def test_ricci_symmetric(P):
    assert same(P("Ricci[_a _b]"), P("Ricci[_b _a]"))


def test_bundle_curvature_antisymmetric(P):
    assert canonicalize(P("BundleCurv.E[^^A __B _a _b] + BundleCurv.E[^^A __B _b _a]")).is_zero()


def test_malformed_index_rejected():
    from covariant_weyl.tensor_core import RICCI, Factor, Slot
    bad = TensorExpr.from_factors((Factor(RICCI, (Slot("a", False), Slot("a", False))),))
    with pytest.raises(MalformedIndex):
        canonicalize(bad)


def test_arity_error(P):
    with pytest.raises(ArityError):
        P("Riemann[_a _b _c]")


@settings(max_examples=150, deadline=None)
@given(exprs())
def test_canonicalize_idempotent(e):
    c = canonicalize(e)
    assert canonicalize(c) == c


@settings(max_examples=100, deadline=None)
@given(exprs(), exprs())
def test_canonicalize_additive(e1, e2):
    assert canonicalize(e1 + e2) == canonicalize(canonicalize(e1) + canonicalize(e2))


@settings(max_examples=150, deadline=None)
@given(terms(), st.data())
def test_symmetry_generator_sign(t, data):
    """Applying a head's symmetry to its slots (with the sign) leaves the canonical form fixed."""
    (coeff, factors), = t.terms()
    j = data.draw(st.integers(0, len(factors) - 1))
    f = factors[j]
    if not f.head.symmetry:
        return
    perm, sign = data.draw(st.sampled_from(f.head.symmetry))
    moved = f.__class__(f.head, tuple(f.slots[k] for k in perm), f.cov, f.h, f.v, f.hsym, f.csym)
    other = TensorExpr.from_factors(factors[:j] + (moved,) + factors[j + 1:], coeff)
    assert canonicalize(t) == canonicalize(other.scaled(sign))


# ----------------------------------------------------------------------------- identities

def test_first_bianchi(P):
    e = canonicalize(P("Riemann[_a _b _c _d] + Riemann[_a _c _d _b] + Riemann[_a _d _b _c]"))
    assert reduce_mod_identities(e).is_zero()


def test_bundle_bianchi(P):
    e = P("BundleCurv.E[^^A __B _a _b ; _c] + BundleCurv.E[^^A __B _b _c ; _a]"
          " + BundleCurv.E[^^A __B _c _a ; _b]")
    assert reduce_mod_identities(canonicalize(e)).is_zero()


def test_non_identity_monomial_unchanged(P):
    e = canonicalize(P("T[_a _b] * Ricci[_c _d]"))
    assert reduce_mod_identities(e) == e


def _instances(kind, labels):
    a, b, c, d, e = labels
    if kind == "first":
        return (f"Riemann[_{a} _{b} _{c} _{d}] + Riemann[_{a} _{c} _{d} _{b}]"
                f" + Riemann[_{a} _{d} _{b} _{c}]")
    if kind == "second":
        return (f"Riemann[_{a} _{b} _{c} _{d} ; _{e}] + Riemann[_{a} _{b} _{d} _{e} ; _{c}]"
                f" + Riemann[_{a} _{b} _{e} _{c} ; _{d}]")
    return (f"BundleCurv.E[^^A __B _{a} _{b} ; _{c}] + BundleCurv.E[^^A __B _{b} _{c} ; _{a}]"
            f" + BundleCurv.E[^^A __B _{c} _{a} ; _{b}]")


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["first", "second", "bundle"]),
       st.lists(st.tuples(st.permutations("abcde"), st.integers(-5, 5), st.integers(1, 4)),
                min_size=1, max_size=4))
def test_identity_span_reduces_to_zero(kind, combo):
    from covariant_weyl.expr_lang import Context, parse_expr
    ctx = Context()
    ctx.add_bundle("E")
    total = TensorExpr()
    for labels, num, den in combo:
        keep = {"first": "abcd", "second": "abcde", "bundle": "abc"}[kind]
        labels = [x for x in labels if x in keep]
        labels += ["y"] * (5 - len(labels))
        inst = parse_expr(_instances(kind, labels), ctx)
        total = total + inst.scaled(Fraction(num, den))
    assert reduce_mod_identities(canonicalize(total)).is_zero()


# ----------------------------------------------------------------------------- symmetrize / substitute

def test_symmetrize_pair(P):
    got = symmetrize(P("p[_a] * X[_b]"), ["a", "b"])
    assert same(got, P("1/2 * p[_a] * X[_b] + 1/2 * p[_b] * X[_a]"))


def test_symmetrize_symmetric_unchanged(P):
    assert same(symmetrize(P("g[_a _b]"), ["a", "b"]), P("g[_a _b]"))


def test_antisymmetrize_ricci(P):
    assert canonicalize(symmetrize(P("Ricci[_a _b]"), ["a", "b"], anti=True)).is_zero()


def test_symmetrize_idempotent(P):
    once = symmetrize(P("T[_a _b]"), ["a", "b"])
    assert same(symmetrize(once, ["a", "b"]), once)


def test_symmetrize_requires_free(P):
    with pytest.raises(IndexNotFree):
        symmetrize(P("T[_a ^a]"), ["a", "b"])


def test_substitute_to_zero(P):
    e = P("Riemann[_a _b _c _d] * T[^a ^b] + T[_c _d]")
    assert same(substitute_head(e, "Riemann", None), P("T[_c _d]"))


def test_substitute_by_delta_collapses(P, ctx):
    e = P("T[_a _b] * X[^b]")
    got = substitute_head(e, "T", P("g[_a _b]"), ["a", "b"])
    assert same(got, P("X[_a]"))


def test_equal_mod_identities_examples(P):
    e = P("Riemann[_a _b _c _d]")
    assert equal_mod_identities(e, e).equal
    assert equal_mod_identities(e, P("-Riemann[_b _a _c _d]")).equal
    chk = equal_mod_identities(e, P("Riemann[_a _c _b _d]"))
    assert not chk.equal and not chk.witness.is_zero()


def test_substitute_composite_distributes_derivatives(P):
    e = P("T[_a _b ; _c]")
    got = substitute_head(e, "T", P("X[_a] * X[_b]"), ["a", "b"])
    assert same(got, P("X[_a ; _c] * X[_b] + X[_a] * X[_b ; _c]"))
