"""Second-order differential operators and their Weyl symbols.

An operator is stored in symmetrized normal form

    D = a2^{mn} nabla_(m nabla_n) + b1^m nabla_m + c0

acting on sections of the domain bundle.  The symbol of grades -2, -1, 0 is

    -eps^-2 a^{mn} p_m p_n + i eps^-1 b^m p_m + c

and the two are related by the divergence and Ricci corrections implemented
in ``dequantize`` / ``quantize``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from ..symbol_calculus.symbols import BundleSignature, GradedSymbol, adjoint_expr
from ..tensor_core.calculus import hderiv, normal_order, vderiv
from ..tensor_core.canonical import canonicalize
from ..tensor_core.coefficient import GAMMA, Coefficient
from ..tensor_core.errors import TensorError
from ..tensor_core.expr import TensorExpr, fresh_names, rename_factors, term_labels
from ..tensor_core.heads import METRIC, MOMENTUM, RICCI, Factor, Slot, metric_for, norm_sym
from ..tensor_core.identities import symmetrize


class DegreeTooHigh(TensorError):
    pass


class GradeMismatch(TensorError):
    pass


class OperatorFormError(TensorError):
    pass


def _gamma_coeff(gamma) -> Coefficient:
    return GAMMA if gamma is None else Coefficient(Fraction(gamma))


def _p(label: str) -> TensorExpr:
    return TensorExpr.from_factors((Factor(MOMENTUM, (Slot(label, False),)),))


@dataclass(frozen=True)
class SecondOrderOperator:
    """Coefficients a2 (free: signature + ^mu ^nu, symmetric), b1 (+ ^mu), c0."""

    signature: BundleSignature
    a2: TensorExpr
    b1: TensorExpr
    c0: TensorExpr
    mu: str = "m"
    nu: str = "n"
    dim: Optional[int] = None

    def __post_init__(self):
        clash = {self.mu, self.nu} & self.signature.labels
        if clash:
            raise OperatorFormError(f"derivative labels {sorted(clash)} used by the signature")

    def canonical(self) -> "SecondOrderOperator":
        return replace(self, a2=canonicalize(symmetrize(self.a2, [self.mu, self.nu])
                                             if not self.a2.is_zero() else self.a2),
                       b1=canonicalize(self.b1), c0=canonicalize(self.c0))

    def parts(self) -> tuple:
        return self.a2, self.b1, self.c0


def _fresh(e: TensorExpr, avoid, n: int = 1):
    gen = fresh_names(e.all_labels() | set(avoid), "q")
    return [next(gen) for _ in range(n)]


def divergence(t: TensorExpr, label: str) -> TensorExpr:
    """nabla_x t^{..x..} contracting the free upper index ``label``."""
    (x,) = _fresh(t, {label})
    return hderiv(t, Slot(x, False)).relabel({label: x})


# ----------------------------------------------------------------------------- action form

def from_action(expr: TensorExpr, section: str, signature: BundleSignature,
                mu: str = "m", nu: str = "n") -> SecondOrderOperator:
    """Read off the coefficients of an operator given by its action on a test section.

    ``expr`` is linear in the tensor head ``section`` whose slots run parallel to
    ``signature.domain`` (opposite variance); ``;`` derivatives on the section
    are the operator's covariant derivatives, in any order.
    """
    e = canonicalize(normal_order(expr, signature.flat))
    reserved = signature.labels | {mu, nu}
    parts = {0: TensorExpr(), 1: TensorExpr(), 2: TensorExpr()}
    for coeff, factors in e.terms():
        where = [j for j, f in enumerate(factors) if f.head.name == section]
        if len(where) != 1:
            raise OperatorFormError("every term must contain the section exactly once")
        counts = term_labels(factors)
        clash = [lab for lab in reserved if counts.get(lab, 0) == 2]
        if clash:
            gen = fresh_names(set(counts) | reserved, "q")
            factors = rename_factors(factors, {lab: next(gen) for lab in clash})
        j = where[0]
        f = factors[j]
        if f.h or f.v or len(f.cov) > 2:
            raise OperatorFormError("the section may carry at most two ';' derivatives")
        if len(f.slots) != len(signature.domain):
            raise OperatorFormError("section slots do not match the domain")
        links = []
        for s, d in zip(f.slots, signature.domain):
            links.append(Factor(metric_for(s.bundle), (s, d)))
        for s, lab in zip(f.cov, (mu, nu)):
            links.append(Factor(METRIC, (s, Slot(lab, True))))
        term = TensorExpr.from_factors(factors[:j] + factors[j + 1:] + tuple(links), coeff)
        parts[len(f.cov)] = parts[len(f.cov)] + term
    a2 = canonicalize(parts[2])
    if not a2.is_zero():
        a2 = symmetrize(a2, [mu, nu])
    return SecondOrderOperator(signature, a2, canonicalize(parts[1]), canonicalize(parts[0]),
                               mu, nu)


def to_action(op: SecondOrderOperator, section) -> TensorExpr:
    """Inverse of ``from_action``: the operator applied to a section head."""
    sl = tuple(Slot(d.label, not d.up, d.bundle) for d in op.signature.domain)
    m, n = Slot(op.mu, False), Slot(op.nu, False)
    out = op.a2 * TensorExpr.from_factors((Factor(section, sl, (m, n), csym=norm_sym(2, 2)),))
    out = out + op.b1 * TensorExpr.from_factors((Factor(section, sl, (m,)),))
    out = out + op.c0 * TensorExpr.from_factors((Factor(section, sl),))
    return canonicalize(out)


# ----------------------------------------------------------------------------- symbol map

def dequantize(op: SecondOrderOperator, gamma=None) -> GradedSymbol:
    """Weyl symbol of a second-order operator (gamma None keeps gamma symbolic)."""
    mu, nu = op.mu, op.nu
    a2, b1, c0 = op.parts()
    div_a = divergence(a2, mu).relabel({nu: mu})
    b = b1 - div_a
    ddiv_a = divergence(divergence(a2, nu), mu)
    ricci = TensorExpr.from_factors((Factor(RICCI, (Slot(mu, False), Slot(nu, False))),))
    c = (c0 + (a2 * ricci).scaled(_gamma_coeff(gamma) * Fraction(1, 3))
         + ddiv_a.scaled(Fraction(1, 4)) - divergence(b1, mu).scaled(Fraction(1, 2)))
    s = ((a2 * _p(mu) * _p(nu)).scaled(Coefficient(Fraction(-1), eps_power=-2))
         + (b * _p(mu)).scaled(Coefficient(i_power=1, eps_power=-1)) + c)
    return GradedSymbol(canonicalize(normal_order(s, op.signature.flat)), op.signature)


def _p_degree(factors) -> int:
    return sum(1 for f in factors if f.head is MOMENTUM)


def split_symbol(s: GradedSymbol, mu: str = "m", nu: str = "n") -> tuple:
    """(a, b, c) of a polynomial symbol of grades -2, -1, 0."""
    e = canonicalize(s.expr)
    for coeff, factors in e.terms():
        deg = _p_degree(factors)
        if deg > 2:
            raise DegreeTooHigh(f"p-degree {deg} > 2")
        if any(f.head.is_symbol for f in factors):
            raise GradeMismatch("generic symbol heads are not polynomial in p")
        if -coeff.eps_power != deg:
            raise GradeMismatch(f"eps^{coeff.eps_power} term of p-degree {deg}")
    lower = Coefficient(eps_power=2)
    top = e.eps_part(-2).scaled(lower)
    a = vderiv(vderiv(top, Slot(nu, True)), Slot(mu, True)).scaled(Fraction(-1, 2))
    mid = e.eps_part(-1).scaled(Coefficient(i_power=-1, eps_power=1))
    b = vderiv(mid, Slot(mu, True))
    return canonicalize(a), canonicalize(b), canonicalize(e.eps_part(0))


def quantize(s: GradedSymbol, gamma=None, mu: str = "m", nu: str = "n") -> SecondOrderOperator:
    """Operator of a symbol -eps^-2 a p p + i eps^-1 b p + c (inverse of dequantize)."""
    a, b, c = split_symbol(s, mu, nu)
    b1 = b + divergence(a, mu).relabel({nu: mu})
    ricci = TensorExpr.from_factors((Factor(RICCI, (Slot(mu, False), Slot(nu, False))),))
    c0 = (c - (a * ricci).scaled(_gamma_coeff(gamma) * Fraction(1, 3))
          + divergence(divergence(a, nu), mu).scaled(Fraction(1, 4))
          + divergence(b, mu).scaled(Fraction(1, 2)))
    flat = s.signature.flat
    return SecondOrderOperator(s.signature, canonicalize(normal_order(a, flat)),
                               canonicalize(normal_order(b1, flat)),
                               canonicalize(normal_order(c0, flat)), mu, nu)


def formal_adjoint(op: SecondOrderOperator) -> SecondOrderOperator:
    """Formal adjoint with respect to the fiber metrics and the volume form.

    D^dag phi = nabla_m nabla_n (a^dag phi) - nabla_m (b^dag phi) + c^dag phi.
    """
    mu, nu = op.mu, op.nu
    flip = op.signature.labels
    a = adjoint_expr(op.a2, flip)
    b = adjoint_expr(op.b1, flip)
    c = adjoint_expr(op.c0, flip)
    b1 = divergence(a, mu).relabel({nu: mu}).scaled(2) - b
    c0 = divergence(divergence(a, nu), mu) - divergence(b, mu) + c
    sig = op.signature.adjoint()
    flat = sig.flat
    return SecondOrderOperator(sig, canonicalize(normal_order(a, flat)),
                               canonicalize(normal_order(b1, flat)),
                               canonicalize(normal_order(c0, flat)), mu, nu)


def operators_equal(x: SecondOrderOperator, y: SecondOrderOperator) -> bool:
    from ..tensor_core.identities import equal_mod_identities

    flat = x.signature.flat | y.signature.flat
    return all(equal_mod_identities(p, q, flat) for p, q in zip(x.parts(), y.parts()))
