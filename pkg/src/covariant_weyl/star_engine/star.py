"""Truncated covariant star product, Moyal bracket and tau-shift.

Derivative conventions: a string of lower indices on a symbol is a sequence
of horizontal derivatives, the first index applied first; upper indices are
vertical derivatives.  ``F`` stands for the curvature of the middle bundle
acting on the codomain indices of the right factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from ..symbol_calculus.symbols import (BundleSignature, GradedSymbol, adjoint,
                                       rename_for_composition)
from ..tensor_core.calculus import contract_hv, curvature_action, hderiv, normal_order, vderiv
from ..tensor_core.canonical import canonicalize
from ..tensor_core.coefficient import Coefficient, poly
from ..tensor_core.expr import TensorExpr, fresh_names
from ..tensor_core.heads import MOMENTUM, RICCI, RIEMANN, Factor, Slot


class TruncationOverflow(ValueError):
    pass


MAX_ORDER = 3
CURVATURE_HEADS = ("Riemann", "Ricci", "RicciScalar")


@dataclass(frozen=True)
class StarOptions:
    max_order: int = 3
    gamma: Optional[Fraction] = None   # None keeps gamma symbolic
    flat: bool = False

    def __post_init__(self):
        if not 0 <= self.max_order <= MAX_ORDER:
            raise TruncationOverflow(f"orders above {MAX_ORDER} are not available")


def drop_curvature(e: TensorExpr) -> TensorExpr:
    """Set Riemann, its traces and every bundle curvature to zero."""
    return TensorExpr({k: p for k, p in e._t.items()
                       if not any(f.head.name in CURVATURE_HEADS or
                                  f.head.name.startswith("BundleCurv.") for f in k[0])})


class _Star:
    """Term builders for one (a, b) pair with labels fixed."""

    def __init__(self, a: TensorExpr, b: TensorExpr, mid_labels, flat_bundles):
        self.a, self.b = a, b
        self.mid = list(mid_labels)
        self.flat = flat_bundles
        used = a.all_labels() | b.all_labels()
        self.gen = fresh_names(used, "s")
        self.al = [next(self.gen) for _ in range(4)]
        self.beta = next(self.gen)

    def lab(self, k: int) -> str:
        return self.al[k - 1]

    @staticmethod
    def d(e: TensorExpr, h: Sequence[str] = (), v: Sequence[str] = ()) -> TensorExpr:
        for x in h:
            e = hderiv(e, Slot(x, False))
        for x in v:
            e = vderiv(e, Slot(x, True))
        return e

    def A(self, h=(), v=()) -> TensorExpr:
        return self.d(self.a, [self.lab(k) if isinstance(k, int) else k for k in h],
                      [self.lab(k) for k in v])

    def B(self, h=(), v=()) -> TensorExpr:
        return self.d(self.b, [self.lab(k) if isinstance(k, int) else k for k in h],
                      [self.lab(k) for k in v])

    def F(self, b_expr: TensorExpr, mu: int, nu: int, cov=()) -> TensorExpr:
        """Middle-bundle curvature F_{mu nu} (with ';' derivatives) applied to b_expr."""
        return curvature_action(b_expr, self.mid, Slot(self.lab(mu), False),
                                Slot(self.lab(nu), False), self.flat,
                                cov=tuple(Slot(self.lab(c), False) for c in cov))

    def riemann_up(self, a1: int, a2: int, a3: int, cov=()) -> TensorExpr:
        f = Factor(RIEMANN, (Slot(self.beta, True), Slot(self.lab(a1), False),
                             Slot(self.lab(a2), False), Slot(self.lab(a3), False)),
                   tuple(Slot(self.lab(c), False) for c in cov))
        return TensorExpr.from_factors((f,))

    def riemann_p(self, a1, a2, a3, cov=()) -> TensorExpr:
        return self.riemann_up(a1, a2, a3, cov) * TensorExpr.from_factors(
            (Factor(MOMENTUM, (Slot(self.beta, False),)),))

    def ricci(self, a1: int, a2: int, cov=()) -> TensorExpr:
        f = Factor(RICCI, (Slot(self.lab(a1), False), Slot(self.lab(a2), False)),
                   tuple(Slot(self.lab(c), False) for c in cov))
        return TensorExpr.from_factors((f,))

    # ------------------------------------------------------------------ orders
    def order0(self) -> TensorExpr:
        return self.a * self.b

    def order1(self) -> TensorExpr:
        A, B = self.A, self.B
        return (A(h=[1]) * B(v=[1]) - A(v=[1]) * B(h=[1])).scaled(Coefficient(Fraction(1, 2), 1))

    def order2(self) -> TensorExpr:
        A, B = self.A, self.B
        out = (A(h=[1, 2]) * B(v=[1, 2])
               - (A(h=[1], v=[2]) * B(h=[2], v=[1])).scaled(2)
               + A(v=[1, 2]) * B(h=[1, 2])).scaled(Fraction(-1, 8))
        out = out + (self.ricci(1, 2) * A(v=[1]) * B(v=[2])).scaled(_g(Fraction(3, 12),
                                                                       Fraction(-4, 12)))
        out = out + (self.riemann_p(1, 2, 3) * (A(v=[2]) * B(v=[1, 3]) + A(v=[1, 3]) * B(v=[2]))
                     ).scaled(Fraction(-1, 24))
        out = out + (A(v=[1]) * self.F(B(v=[2]), 1, 2)).scaled(Fraction(-1, 4))
        return out

    def order3(self) -> TensorExpr:
        A, B = self.A, self.B
        i = lambda q: Coefficient(Fraction(q), 1)
        t1 = (A(h=[1, 2, 3]) * B(v=[1, 2, 3])
              - (A(h=[1, 2], v=[3]) * B(h=[3], v=[1, 2])).scaled(3)
              + (A(h=[1], v=[2, 3]) * B(h=[2, 3], v=[1])).scaled(3)
              - A(v=[1, 2, 3]) * B(h=[1, 2, 3])).scaled(i(Fraction(-1, 48)))
        t2 = (self.ricci(1, 2) * (A(h=[3], v=[2]) * B(v=[1, 3]) - A(v=[2, 3]) * B(h=[3], v=[1]))
              ).scaled(_g(Fraction(3, 24), Fraction(-4, 24), i_power=1))
        beta = self.beta
        t3 = (self.riemann_up(1, 2, 3) * (A(h=[beta], v=[1, 3]) * B(v=[2])
                                          - A(v=[2]) * B(h=[beta], v=[1, 3]))
              ).scaled(i(Fraction(-1, 16)))
        t4 = (self.riemann_p(1, 2, 3) * (- A(h=[4], v=[1, 3]) * B(v=[2, 4])
                                         - A(h=[4], v=[2]) * B(v=[1, 3, 4])
                                         + A(v=[1, 3, 4]) * B(h=[4], v=[2])
                                         + A(v=[2, 4]) * B(h=[4], v=[1, 3]))
              ).scaled(i(Fraction(1, 48)))
        t5 = (self.ricci(1, 2, cov=[3]) * (A(v=[3]) * B(v=[1, 2]) - A(v=[1, 2]) * B(v=[3]))
              ).scaled(_g(Fraction(3, 48), Fraction(-4, 48), i_power=1))
        t6 = (self.riemann_p(1, 2, 3, cov=[4]) * (A(v=[1, 3, 4]) * B(v=[2])
                                                  - A(v=[2]) * B(v=[1, 3, 4]))
              ).scaled(i(Fraction(1, 48)))
        t7 = (A(h=[3], v=[1]) * self.F(B(v=[2, 3]), 1, 2)
              + A(v=[2, 3]) * self.F(B(h=[3], v=[1]), 1, 2)).scaled(i(Fraction(-1, 8)))
        t8 = (A(v=[1]) * self.F(B(v=[2, 3]), 1, 2, cov=[3])
              + A(v=[2, 3]) * self.F(B(v=[1]), 1, 2, cov=[3])).scaled(i(Fraction(-1, 16)))
        return t1 + t2 + t3 + t4 + t5 + t6 + t7 + t8


def _g(c0: Fraction, c1: Fraction, i_power: int = 0) -> Coefficient:
    """c0 + c1*gamma (times i^i_power)."""
    return Coefficient.from_poly(poly(c0, c1), i_power)


def _finish(e: TensorExpr, opts: StarOptions, flat_bundles) -> TensorExpr:
    if opts.flat:
        e = drop_curvature(e)
    e = canonicalize(normal_order(e, flat_bundles), check=False)
    if opts.flat:
        e = drop_curvature(e)
    if opts.gamma is not None:
        e = e.substitute_gamma(Fraction(opts.gamma))
    return e


def _prepare(a: GradedSymbol, b: GradedSymbol):
    b = rename_for_composition(a, b)
    sig = BundleSignature(a.signature.codomain, b.signature.domain,
                          a.signature.flat | b.signature.flat)
    return b, sig


def star_order(a: GradedSymbol, b: GradedSymbol, k: int,
               opts: StarOptions = StarOptions()) -> TensorExpr:
    """The coefficient (a*b)_k, without the eps^k weight."""
    if not 0 <= k <= MAX_ORDER:
        raise TruncationOverflow(f"order {k} is not available")
    b, sig = _prepare(a, b)
    st = _Star(a.expr, b.expr, [s.label for s in b.signature.codomain], sig.flat)
    e = [st.order0, st.order1, st.order2, st.order3][k]()
    return _finish(e, opts, sig.flat)


def star(a: GradedSymbol, b: GradedSymbol, opts: StarOptions = StarOptions()) -> GradedSymbol:
    """Sum of eps^k (a*b)_k over input grades, truncated opts.max_order above the
    leading grade of the product."""
    b, sig = _prepare(a, b)
    out = TensorExpr()
    if a.expr.is_zero() or b.expr.is_zero():
        return GradedSymbol(out, sig, tuple(a.extra) + tuple(b.extra))
    lead = min(a.expr.eps_powers()) + min(b.expr.eps_powers())
    top = lead + opts.max_order
    mid = [s.label for s in b.signature.codomain]
    for ea in a.expr.eps_powers():
        for eb in b.expr.eps_powers():
            for k in range(MAX_ORDER + 1):
                if ea + eb + k > top:
                    break
                st = _Star(a.expr.eps_part(ea), b.expr.eps_part(eb), mid, sig.flat)
                term = [st.order0, st.order1, st.order2, st.order3][k]()
                out = out + term.scaled(Coefficient(eps_power=k))
    out = _finish(out, opts, sig.flat)
    return GradedSymbol(out, sig, tuple(a.extra) + tuple(b.extra))


def moyal_bracket(a: GradedSymbol, b: GradedSymbol,
                  opts: StarOptions = StarOptions()) -> GradedSymbol:
    ab = star(a, b, opts)
    ba = star(b, a, opts)
    # align the labels of b*a with those of a*b
    mapping = {x.label: y.label for x, y in zip(ba.free_slots(), ab.free_slots())}
    return ab.with_expr(canonicalize(ab.expr - ba.expr.relabel(mapping)))


def tau_shift(a: GradedSymbol, sigma, tau, gamma=None, gamma_prime=None,
              max_order: int = 2) -> GradedSymbol:
    """Symbol of the same operator in the tau-quantization, from its sigma-symbol.

    ``gamma`` is the van Vleck exponent of the target quantization and
    ``gamma_prime`` that of the source; None means symbolic gamma for the target
    (then ``gamma_prime`` must also be given symbolically as None, i.e. equal).
    """
    if not 0 <= max_order <= 2:
        raise TruncationOverflow("tau_shift is available through second order")
    s = Fraction(sigma) - Fraction(tau)
    e = a.expr
    if e.is_zero():
        return a
    lead = min(e.eps_powers())
    used = e.all_labels() | {x.label for x in a.free_slots()}
    gen = fresh_names(used, "u")
    mu, nu = next(gen), next(gen)
    out = e
    if max_order >= 1 and s:
        out = out + contract_hv(e, [mu]).scaled(Coefficient(-s, 1, 1))
    if max_order >= 2:
        if s:
            out = out + contract_hv(e, [mu, nu]).scaled(Coefficient(-s * s / 2, 0, 2))
        dg = _gamma_difference(gamma, gamma_prime)
        if dg:
            ric = TensorExpr.from_factors((Factor(RICCI, (Slot(mu, False), Slot(nu, False))),))
            vv = vderiv(vderiv(e, Slot(mu, True)), Slot(nu, True))
            out = out + (ric * vv).scaled(Coefficient.from_poly(
                tuple(-x / 6 for x in dg), 0, 2))
    out = canonicalize(normal_order(out, a.flat)).truncate(lead + max_order)
    return a.with_expr(out)


def _gamma_difference(gamma, gamma_prime) -> tuple:
    """gamma - gamma_prime as a gamma polynomial; None stands for symbolic gamma."""
    to_poly = lambda g: (Fraction(0), Fraction(1)) if g is None else (Fraction(g),)
    a, b = to_poly(gamma), to_poly(gamma_prime)
    n = max(len(a), len(b))
    a, b = a + (Fraction(0),) * (n - len(a)), b + (Fraction(0),) * (n - len(b))
    out = [x - y for x, y in zip(a, b)]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def is_self_adjoint(s: GradedSymbol) -> bool:
    d = adjoint(s)
    back = d.expr.relabel({x.label: y.label for x, y in zip(d.free_slots(), s.free_slots())})
    return canonicalize(back - s.expr).is_zero()
