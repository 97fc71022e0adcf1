"""GradedSymbol and the operations that act on it.

A symbol is a TensorExpr whose free indices are the codomain slots, the domain
slots and possibly some extra coordinate slots.  Composition contracts the
domain slots of the left factor with the codomain slots of the right one.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from ..tensor_core.calculus import hderiv, normal_order, vderiv
from ..tensor_core.canonical import canonicalize
from ..tensor_core.errors import IndexNotFree, SignatureMismatch
from ..tensor_core.expr import TensorExpr, fresh_names
from ..tensor_core.heads import Factor, Slot, dagger_head, metric_for, role_swap_order


class WiringMismatch(SignatureMismatch):
    pass


def _flip(s: Slot) -> Slot:
    return s if s.up is None else Slot(s.label, not s.up, s.bundle)


@dataclass(frozen=True)
class BundleSignature:
    """Free slots of the codomain and domain fibers; ``flat`` lists bundles
    whose curvature vanishes."""

    codomain: tuple = ()
    domain: tuple = ()
    flat: frozenset = frozenset()

    @property
    def labels(self) -> set:
        return {s.label for s in self.codomain + self.domain}

    def relabel(self, mapping: dict) -> "BundleSignature":
        f = lambda ss: tuple(s.with_label(mapping.get(s.label, s.label)) for s in ss)
        return replace(self, codomain=f(self.codomain), domain=f(self.domain))

    def adjoint(self) -> "BundleSignature":
        return replace(self, codomain=tuple(_flip(s) for s in self.domain),
                       domain=tuple(_flip(s) for s in self.codomain))

    def kinds(self):
        return (tuple((s.bundle, s.up) for s in self.codomain),
                tuple((s.bundle, s.up) for s in self.domain))


@dataclass(frozen=True)
class GradedSymbol:
    """eps-graded symbol: one TensorExpr holding all grades, plus its wiring."""

    expr: TensorExpr
    signature: BundleSignature = field(default_factory=BundleSignature)
    extra: tuple = ()
    max_order: Optional[int] = None

    def __post_init__(self):
        if self.max_order is not None and not self.expr.is_zero():
            lead = min(self.expr.eps_powers())
            object.__setattr__(self, "expr", self.expr.truncate(lead + self.max_order))

    @property
    def flat(self) -> frozenset:
        return self.signature.flat

    def component(self, k: int) -> TensorExpr:
        return self.expr.eps_part(k)

    def components(self) -> dict:
        return {k: self.expr.eps_part(k) for k in self.expr.eps_powers()}

    def with_expr(self, e: TensorExpr) -> "GradedSymbol":
        return replace(self, expr=e)

    def canonical(self) -> "GradedSymbol":
        return self.with_expr(canonicalize(normal_order(self.expr, self.flat)))

    def free_slots(self) -> tuple:
        return self.signature.codomain + self.signature.domain + tuple(self.extra)

    def check(self) -> None:
        want = sorted(self.free_slots())
        for factors, *_ in self.expr.items():
            got = sorted(TensorExpr.from_factors(factors).free_slots())
            if got != want:
                raise SignatureMismatch(f"term free slots {got} != signature {want}")

    def __add__(self, other: "GradedSymbol") -> "GradedSymbol":
        return self.with_expr(self.expr + other.expr)

    def __sub__(self, other: "GradedSymbol") -> "GradedSymbol":
        return self.with_expr(self.expr - other.expr)

    def __neg__(self) -> "GradedSymbol":
        return self.with_expr(-self.expr)

    def scaled(self, c) -> "GradedSymbol":
        return self.with_expr(self.expr.scaled(c))

    def __str__(self):
        from ..expr_lang.printer import to_text
        return to_text(self.expr)


def identity_symbol(bundle: Optional[str], cod: str = "A", dom: str = "B",
                    up: bool = True) -> GradedSymbol:
    """Identity endomorphism of a bundle (or of TM / T*M for bundle None)."""
    if bundle is None and cod == dom:
        return GradedSymbol(TensorExpr.scalar(1))
    c, d = Slot(cod, up, bundle), Slot(dom, not up, bundle)
    e = TensorExpr.from_factors((Factor(metric_for(bundle), (c, d)),))
    return GradedSymbol(e, BundleSignature((c,), (d,)))


def symbol_hderiv(s: GradedSymbol, idx: str) -> GradedSymbol:
    e = hderiv(s.expr, Slot(idx, False))
    return replace(s, expr=e, extra=tuple(s.extra) + (Slot(idx, False),))


def symbol_vderiv(s: GradedSymbol, idx: str) -> GradedSymbol:
    e = vderiv(s.expr, Slot(idx, True))
    return replace(s, expr=e, extra=tuple(s.extra) + (Slot(idx, True),))


def normal_order_h(s: GradedSymbol) -> GradedSymbol:
    """Symmetrize every h- and ;-string, inserting the curvature commutator terms."""
    return s.canonical()


def rename_for_composition(a: GradedSymbol, b: GradedSymbol):
    """Relabel b so that its codomain labels equal a's domain labels and nothing else clashes."""
    ad, bc = a.signature.domain, b.signature.codomain
    if len(ad) != len(bc):
        raise WiringMismatch(f"domain {ad} vs codomain {bc}")
    for x, y in zip(ad, bc):
        if x.bundle != y.bundle or x.up is None or y.up is None or x.up == y.up:
            raise WiringMismatch(f"cannot contract {x} with {y}")
    a_free = {s.label for s in a.free_slots()}
    b_labels = b.expr.all_labels() | {s.label for s in b.free_slots()}
    target = {y.label: x.label for x, y in zip(ad, bc)}
    avoid = a.expr.all_labels() | a_free | b_labels | set(target.values())
    gen = fresh_names(avoid, "b")
    mapping = dict(target)
    for s in b.free_slots():
        if s.label not in mapping and s.label in a_free:
            mapping[s.label] = next(gen)
    # move target labels held by other free slots of b out of the way
    for s in b.free_slots():
        if s.label in target.values() and s.label not in mapping:
            mapping[s.label] = next(gen)
    e = b.expr.relabel(mapping)
    sig = b.signature.relabel(mapping)
    extra = tuple(x.with_label(mapping.get(x.label, x.label)) for x in b.extra)
    return replace(b, expr=e, signature=sig, extra=extra)


def compose(a: GradedSymbol, b: GradedSymbol) -> GradedSymbol:
    """Pointwise product a b (fiber composition)."""
    b = rename_for_composition(a, b)
    sig = BundleSignature(a.signature.codomain, b.signature.domain,
                          a.signature.flat | b.signature.flat)
    return GradedSymbol(canonicalize(a.expr * b.expr), sig, tuple(a.extra) + tuple(b.extra))


def _adjoint_factor(f: Factor, flip: set):
    seq = [(_flip(s) if (s.label in flip or s.bundle is not None) else s) for s in f.slots]
    h = f.head
    sign = 1
    if h.conj in ("dagger", "herm", "antiherm") and (h.n_cod or h.n_dom):
        order = role_swap_order(h)
        seq = [seq[k] for k in order]
        if h.conj == "dagger":
            h = dagger_head(h)
        elif h.conj == "antiherm":
            sign = -1
    elif h.conj == "dagger":
        h = dagger_head(h)
    return sign, f._replace(head=h, slots=tuple(seq))


def adjoint_expr(e: TensorExpr, flip_labels) -> TensorExpr:
    flip = set(flip_labels)

    def fn(factors):
        sign = 1
        out = []
        for f in factors:
            sg, nf = _adjoint_factor(f, flip)
            sign *= sg
            out.append(nf)
        return [(sign, tuple(out))]

    return canonicalize(canonicalize(e).conjugate_coefficients().map_terms(fn))


def adjoint(s: GradedSymbol) -> GradedSymbol:
    """Pointwise adjoint: conjugated coefficients, daggered symbol heads,
    codomain and domain exchanged (variances flipped through the fiber metrics)."""
    e = adjoint_expr(s.expr, s.signature.labels)
    return replace(s, expr=e, signature=s.signature.adjoint())


def _raise_lower(s: GradedSymbol, idx: str, up: bool) -> GradedSymbol:
    free = {x.label: x for x in s.free_slots()}
    if idx not in free:
        raise IndexNotFree(idx)
    cur = free[idx]
    if cur.up == up:
        return s
    gen = fresh_names(s.expr.all_labels() | set(free), "m")
    tmp = next(gen)
    g = Factor(metric_for(cur.bundle), (Slot(idx, up, cur.bundle), Slot(tmp, not cur.up, cur.bundle)))
    e = canonicalize(s.expr.relabel({idx: tmp}) * TensorExpr.from_factors((g,)))
    fix = lambda ss: tuple(Slot(x.label, up, x.bundle) if x.label == idx else x for x in ss)
    sig = replace(s.signature, codomain=fix(s.signature.codomain), domain=fix(s.signature.domain))
    return replace(s, expr=e, signature=sig, extra=fix(s.extra))


def raise_index(s: GradedSymbol, idx: str) -> GradedSymbol:
    return _raise_lower(s, idx, True)


def lower(s: GradedSymbol, idx: str) -> GradedSymbol:
    return _raise_lower(s, idx, False)
