"""Symbolic identity suites for the star product: adjoint law, associativity,
the p-degree bound, and generators of generic and random polynomial symbols."""

from __future__ import annotations

import random
import time
from fractions import Fraction
from typing import Optional

from ..expr_lang.context import Context
from ..expr_lang.parser import parse_expr
from ..expr_lang.printer import to_text
from ..report import VerificationReport
from ..symbol_calculus.symbols import BundleSignature, GradedSymbol, adjoint
from ..tensor_core.canonical import canonicalize
from ..tensor_core.coefficient import Coefficient
from ..tensor_core.expr import TensorExpr
from ..tensor_core.heads import MOMENTUM, Factor, Slot, declare_tensor
from ..tensor_core.identities import equal_mod_identities, reduce_mod_identities
from .star import StarOptions, star, star_order


def _align(target: GradedSymbol, other: GradedSymbol) -> TensorExpr:
    """Relabel the free slots of ``other`` to those of ``target`` (same order)."""
    mapping = {x.label: y.label for x, y in zip(other.free_slots(), target.free_slots())}
    return other.expr.relabel(mapping)


# ----------------------------------------------------------------------------- generic symbols

def generic_chain(bundles=("H", "G", "F", "E"), names=("a", "b", "c"), ctx=None):
    """Generic symbols a: G -> H, b: F -> G, c: E -> F (one fiber index per side).

    ``bundles=None`` gives scalar symbols.
    """
    ctx = ctx or Context()
    out = []
    if bundles is None:
        for n in names:
            ctx.symbol(n)
            out.append(GradedSymbol(parse_expr(n, ctx)))
        return out
    labels = [f"X{k}" for k in range(len(names) + 1)]
    for k, n in enumerate(names):
        cod, dom = bundles[k], bundles[k + 1]
        ctx.symbol(n, (cod,), (dom,))
        e = parse_expr(f"{n}[^^{labels[k]} __{labels[k + 1]}]", ctx)
        out.append(GradedSymbol(e, BundleSignature((Slot(labels[k], True, cod),),
                                                   (Slot(labels[k + 1], False, dom),))))
    return out


# ----------------------------------------------------------------------------- adjoint law

def adjoint_law(a: GradedSymbol, b: GradedSymbol, max_order: int = 3,
                report: Optional[VerificationReport] = None) -> VerificationReport:
    """adjoint((a*b)_k) against (adjoint(b) * adjoint(a))_k for k = 0..max_order."""
    rep = report or VerificationReport("adjoint law", config={"max_order": max_order})
    ab_sig = BundleSignature(a.signature.codomain, b.signature.domain,
                             a.signature.flat | b.signature.flat)
    bd, ad = adjoint(b), adjoint(a)
    ba_sig = BundleSignature(bd.signature.codomain, ad.signature.domain, ab_sig.flat)
    for k in range(max_order + 1):
        lhs = adjoint(GradedSymbol(star_order(a, b, k), ab_sig))
        rhs = GradedSymbol(star_order(bd, ad, k), ba_sig)
        chk = equal_mod_identities(lhs.expr, _align(lhs, rhs), ab_sig.flat)
        rep.add(f"order {k}", chk.equal, witness=None if chk.equal else to_text(chk.witness),
                details={"terms": len(lhs.expr)})
    return rep


# ----------------------------------------------------------------------------- associativity

def associativity_defect(a, b, c, max_order: int = 3) -> TensorExpr:
    """(a*b)*c - a*(b*c), canonicalized, in the labels of the left product."""
    opts = StarOptions(max_order=max_order)
    left = star(star(a, b, opts), c, opts)
    right = star(a, star(b, c, opts), opts)
    return canonicalize(left.expr - _align(left, right))


def outer_curvature_defect(a, b, c) -> TensorExpr:
    """Closed form of the eps^2 associativity defect for bundle-valued a, b, c:

    1/8 a^(m) b^(n) [nabla_m, nabla_n] c + 1/8 ([nabla_m, nabla_n] a) b^(m) c^(n),

    with ^(m) the vertical derivative and the commutators acting only through the
    fiber indices of the outer bundles (H of a, E of c) and their neighbours (G, F).
    """
    h, g = a.signature.codomain[0], a.signature.domain[0]
    f, e = b.signature.domain[0], c.signature.domain[0]
    ctx = Context()
    for s in (a, b, c):
        for fac in next(iter(s.expr.items()))[0]:
            ctx.declare(fac.head)
    an, bn, cn = (next(iter(s.expr.items()))[0][0].head.name for s in (a, b, c))
    src = (f"-1/8 * eps^2 * V(^m1, {an}[^^{h.label} __Q1]) * V(^m2, {bn}[^^Q1 __Q2])"
           f" * {cn}[^^Q2 __Q3] * BundleCurv.{e.bundle}[^^Q3 __{e.label} _m1 _m2]"
           f" + 1/8 * eps^2 * V(^m1, {an}[^^{h.label} __Q1]) * V(^m2, {bn}[^^Q1 __Q2])"
           f" * BundleCurv.{f.bundle}[^^Q2 __Q3 _m1 _m2] * {cn}[^^Q3 __{e.label}]"
           f" + 1/8 * eps^2 * BundleCurv.{h.bundle}[^^{h.label} __Q1 _m1 _m2] * {an}[^^Q1 __Q2]"
           f" * V(^m1, {bn}[^^Q2 __Q3]) * V(^m2, {cn}[^^Q3 __{e.label}])"
           f" - 1/8 * eps^2 * {an}[^^{h.label} __Q1] * BundleCurv.{g.bundle}[^^Q1 __Q2 _m1 _m2]"
           f" * V(^m1, {bn}[^^Q2 __Q3]) * V(^m2, {cn}[^^Q3 __{e.label}])")
    return canonicalize(parse_expr(src, ctx))


def associativity(a, b, c, max_order: int = 3, required: int = 2,
                  report: Optional[VerificationReport] = None) -> VerificationReport:
    """Per-order check of (a*b)*c = a*(b*c) modulo the curvature identities.

    Orders up to ``required`` must vanish; higher orders are executed and their
    reduced residual is reported as a witness without failing the report.
    """
    rep = report or VerificationReport("associativity", config={"max_order": max_order})
    t0 = time.perf_counter()
    defect = associativity_defect(a, b, c, max_order)
    lead = min(a.expr.eps_powers()) + min(b.expr.eps_powers()) + min(c.expr.eps_powers())
    for k in range(max_order + 1):
        part = defect.eps_part(lead + k)
        red = reduce_mod_identities(part)
        rep.add(f"order {k}", red.is_zero() or k > required,
                residual=float(len(red)),
                witness=None if red.is_zero() else to_text(red),
                details={"terms_before_reduction": len(part), "reduced_terms": len(red),
                         "required": k <= required})
    rep.config["seconds"] = round(time.perf_counter() - t0, 1)
    return rep


# ----------------------------------------------------------------------------- random polynomial symbols

def random_polynomial_symbol(rng: random.Random, name: str, max_degree: int = 3,
                             n_terms: int = 2, derivative_prob: float = 0.3) -> GradedSymbol:
    """Scalar symbol sum_k c_k T_k^{m1..md}(x) p_m1 ... p_md with random degrees,
    rational coefficients and occasional covariant derivatives on T_k."""
    out = TensorExpr()
    for t in range(n_terms):
        deg = rng.randint(0, max_degree)
        labels = [f"{name}{t}i{j}" for j in range(deg)]
        cov = ()
        kinds = (None,) * deg
        if deg and rng.random() < derivative_prob:
            # contract one momentum with a derivative index instead of a coefficient slot
            labels_cov = [f"{name}{t}c"]
            kinds = (None,) * (deg - 1)
            head = declare_tensor(f"{name.upper()}{t}", kinds)
            slots = tuple(Slot(l, True) for l in labels[:deg - 1])
            cov = (Slot(labels_cov[0], False),)
            moms = [Factor(MOMENTUM, (Slot(l, False),)) for l in labels[:deg - 1]]
            moms.append(Factor(MOMENTUM, (Slot(labels_cov[0], True),)))
        else:
            head = declare_tensor(f"{name.upper()}{t}", kinds)
            slots = tuple(Slot(l, True) for l in labels)
            moms = [Factor(MOMENTUM, (Slot(l, False),)) for l in labels]
        coeff = Coefficient(Fraction(rng.randint(-5, 5) or 1, rng.randint(1, 4)),
                            rng.randint(0, 1))
        out = out + TensorExpr.from_factors((Factor(head, slots, cov),) + tuple(moms), coeff)
    return GradedSymbol(canonicalize(out))


def p_degree(expr: TensorExpr) -> int:
    """Largest number of momentum factors in a monomial (-1 for the zero expression)."""
    return max((sum(1 for f in fs if f.head is MOMENTUM) for _, fs in expr.terms()), default=-1)


def degree_violation(a: GradedSymbol, b: GradedSymbol, max_order: int = 3) -> Optional[str]:
    """None when every (a*b)_k has p-degree <= deg a + deg b - k, else a description."""
    da, db = p_degree(a.expr), p_degree(b.expr)
    for k in range(max_order + 1):
        got = p_degree(star_order(a, b, k))
        if got >= 0 and got > da + db - k:
            return f"order {k}: degree {got} > {da + db - k}"
    return None


def degree_bound(cases: int = 200, seed: int = 0, max_order: int = 3) -> VerificationReport:
    """p-degree of (a*b)_k is at most deg a + deg b - k on random polynomial pairs."""
    rng = random.Random(seed)
    rep = VerificationReport("degree bound", config={"cases": cases, "seed": seed,
                                                    "max_order": max_order})
    worst = None
    for case in range(cases):
        a = random_polynomial_symbol(rng, "a")
        b = random_polynomial_symbol(rng, "b")
        bad = degree_violation(a, b, max_order)
        if bad and worst is None:
            worst = f"case {case}: {bad}"
    rep.add("p-degree of every order", worst is None, witness=worst)
    return rep
