"""Derivations on TensorExpr: horizontal and vertical derivatives, the
curvature action, and normal ordering of derivative strings.

Conventions: [nabla_mu, nabla_nu] v^r = Riemann^r_{s mu nu} v^s, and on
symbols [h_mu, h_nu] a = Riemann^c_{b mu nu} p_c v^b a + (curvature action on
every index of a).  Derivative strings are stored in application order.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from itertools import permutations
from math import factorial
from typing import Iterable, Union

from .coefficient import poly_mul
from .errors import IndexCollision
from .expr import TensorExpr, fresh_names, rename_factors, term_labels
from .heads import (MOMENTUM, RIEMANN, Factor, Slot, bundle_curv, metric_for, norm_sym)

SlotLike = Union[str, Slot]


def _as_slot(s: SlotLike, up: bool) -> Slot:
    return s if isinstance(s, Slot) else Slot(s, up, None)


def _clear(factors: tuple, label: str) -> tuple:
    """Rename a dummy that happens to use ``label``."""
    counts = term_labels(factors)
    if counts.get(label, 0) == 0:
        return factors
    gen = fresh_names(set(counts) | {label}, "c")
    return rename_factors(factors, {label: next(gen)})


def _check_fresh(e: TensorExpr, label: str) -> None:
    if label in e.free_labels():
        raise IndexCollision(f"derivative index {label!r} is already free")


def hderiv(e: TensorExpr, idx: SlotLike) -> TensorExpr:
    """Horizontal (covariant) derivative with a new lower index, product rule."""
    slot = _as_slot(idx, False)
    _check_fresh(e, slot.label)

    def fn(factors):
        factors = _clear(factors, slot.label)
        out = []
        for j, f in enumerate(factors):
            if f.head.parallel or f.head is MOMENTUM:
                continue
            if f.head.is_symbol:
                nf = f._replace(h=f.h + (slot,))
            else:
                nf = f._replace(cov=f.cov + (slot,))
            out.append((1, factors[:j] + (nf,) + factors[j + 1:]))
        return out

    return e.map_terms(fn)


def vderiv(e: TensorExpr, idx: SlotLike) -> TensorExpr:
    """Vertical (momentum) derivative with a new upper index, product rule."""
    slot = _as_slot(idx, True)
    _check_fresh(e, slot.label)

    def fn(factors):
        factors = _clear(factors, slot.label)
        out = []
        for j, f in enumerate(factors):
            if f.head is MOMENTUM:
                nf = Factor(metric_for(None), (slot, f.slots[0]))
            elif f.head.is_symbol:
                nf = f._replace(v=f.v + (slot,))
            else:
                continue
            out.append((1, factors[:j] + (nf,) + factors[j + 1:]))
        return out

    return e.map_terms(fn)


def hderivs(e: TensorExpr, idxs: Iterable[SlotLike]) -> TensorExpr:
    for s in idxs:
        e = hderiv(e, s)
    return e


def vderivs(e: TensorExpr, idxs: Iterable[SlotLike]) -> TensorExpr:
    for s in idxs:
        e = vderiv(e, s)
    return e


def _action_on_slot(s: Slot, x: str, mu: Slot, nu: Slot, flat: frozenset):
    """(sign, curvature factor, replacement slot) for one index, or None if flat."""
    up = True if s.up is None else s.up
    if s.bundle is None:
        if up:
            return 1, Factor(RIEMANN, (Slot(s.label, s.up, None), Slot(x, False), mu, nu)), \
                Slot(x, True, None)
        return -1, Factor(RIEMANN, (Slot(x, True), Slot(s.label, s.up, None), mu, nu)), \
            Slot(x, False, None)
    if s.bundle in flat:
        return None
    head = bundle_curv(s.bundle)
    if up:
        return 1, Factor(head, (Slot(s.label, True, s.bundle), Slot(x, False, s.bundle), mu, nu)), \
            Slot(x, True, s.bundle)
    return -1, Factor(head, (Slot(x, True, s.bundle), Slot(s.label, False, s.bundle), mu, nu)), \
        Slot(x, False, s.bundle)


def curvature_action(e: TensorExpr, labels: Iterable[str], mu: SlotLike, nu: SlotLike,
                     flat_bundles=frozenset(), cov: tuple = ()) -> TensorExpr:
    """Sum over the listed indices of the curvature endomorphism (mu, nu) acting there.

    Upper coordinate index: +Riemann^L_{x mu nu} T^x; lower: -Riemann^x_{L mu nu} T_x;
    bundle indices use the bundle curvature head in the same way.  Indices of
    flat bundles contribute nothing.  ``cov`` decorates the inserted curvature
    with ';' derivatives.
    """
    mu, nu = _as_slot(mu, False), _as_slot(nu, False)
    cov = tuple(_as_slot(s, False) for s in cov)
    labels = list(labels)
    flat = frozenset(flat_bundles)

    def fn(factors):
        out = []
        counts = term_labels(factors)
        gen = fresh_names(set(counts) | {mu.label, nu.label} | set(labels)
                          | {s.label for s in cov}, "k")
        for lab in labels:
            if counts.get(lab, 0) != 1:
                continue
            x = next(gen)
            for j, f in enumerate(factors):
                seq = f.all_slots()
                for k, s in enumerate(seq):
                    if s.label != lab:
                        continue
                    act = _action_on_slot(s, x, mu, nu, flat)
                    if act is None:
                        continue
                    sign, curv, repl = act
                    if cov:
                        curv = curv._replace(cov=tuple(cov))
                    nseq = list(seq)
                    nseq[k] = repl
                    nf = f.split(nseq)
                    out.append((sign, factors[:j] + (nf,) + factors[j + 1:] + (curv,)))
        return out

    return e.map_terms(fn)


def slot_labels(f: Factor) -> list:
    return [s.label for s in f.all_slots()]


def commutator(f: Factor, mu: Slot, nu: Slot, flat_bundles=frozenset()) -> TensorExpr:
    """[nabla_mu, nabla_nu] applied to a single factor (h-derivatives for symbols)."""
    labels = slot_labels(f)
    single = TensorExpr.from_factors((f,))
    out = curvature_action(single, labels, mu, nu, flat_bundles)
    if f.head.is_symbol:
        gen = fresh_names(set(labels) | {mu.label, nu.label}, "q")
        a, b = next(gen), next(gen)
        vf = f._replace(v=f.v + (Slot(b, True),))
        out = out + TensorExpr.from_factors(
            (vf, Factor(RIEMANN, (Slot(a, True), Slot(b, False), mu, nu)),
             Factor(MOMENTUM, (Slot(a, False),))))
    return out


def _needs_order(f: Factor):
    if len(f.h) >= 2 and f.hsym < len(f.h):
        return "h"
    if len(f.cov) >= 2 and f.csym < len(f.cov):
        return "cov"
    return None


def _with_string(f: Factor, which: str, st: tuple, sym: int) -> Factor:
    if which == "h":
        return f._replace(h=st, hsym=norm_sym(sym, len(st)))
    return f._replace(cov=st, csym=norm_sym(sym, len(st)))


def order_factor(f: Factor, which: str, flat_bundles=frozenset()) -> TensorExpr:
    """Rewrite one factor's derivative string as its symmetrization plus commutators."""
    string = f.h if which == "h" else f.cov
    k = f.hsym if which == "h" else f.csym
    # a string index contracted inside the factor itself is renamed while the
    # string is re-applied, then contracted again
    labels = slot_labels(f)
    if any(labels.count(s.label) > 1 for s in string):
        gen = fresh_names(set(labels), "t")
        back, st = {}, []
        for s in string:
            if labels.count(s.label) > 1:
                t = next(gen)
                back[t] = s.label
                s = s.with_label(t)
            st.append(s)
        inner = order_factor(_with_string(f, which, tuple(st), k), which, flat_bundles)
        return inner.relabel(back)
    k = f.hsym if which == "h" else f.csym
    n = len(string)
    orders: dict = defaultdict(Fraction)
    if k >= 2:
        for perm in permutations(range(k)):
            orders[tuple(string[q] for q in perm) + string[k:]] += Fraction(1, factorial(k))
    else:
        orders[string] += 1
    result = TensorExpr.from_factors((_with_string(f, which, string, n),))
    diffs: dict = defaultdict(Fraction)
    nfact = factorial(n)
    for sigma, w in orders.items():
        for target in permutations(sigma):
            rho = list(sigma)
            for pos in range(n):
                q = rho.index(target[pos])
                while q > pos:
                    diffs[(tuple(rho), q - 1)] += w / nfact
                    rho[q - 1], rho[q] = rho[q], rho[q - 1]
                    q -= 1
    for (rho, j), w in diffs.items():
        if w == 0:
            continue
        x, y = rho[j], rho[j + 1]
        inner = _with_string(f, which, rho[:j], 0)
        term = commutator(inner, y, x, flat_bundles)
        for s in rho[j + 2:]:
            term = hderiv(term, s)
        result = result + term.scaled(w)
    return result


def normal_order(e: TensorExpr, flat_bundles=frozenset()) -> TensorExpr:
    """Fully symmetrize every h-string and ;-string, inserting curvature terms."""
    done: list = []
    pending = list(e.items())
    while pending:
        factors, i, ep, p = pending.pop()
        for j, f in enumerate(factors):
            which = _needs_order(f)
            if which:
                break
        else:
            done.append((factors, i, ep, p))
            continue
        rest = TensorExpr.from_factors(factors[:j] + factors[j + 1:])
        expanded = rest * order_factor(f, which, flat_bundles)
        for nf, i2, e2, p2 in expanded.items():
            pending.append((nf, i + i2, ep + e2, poly_mul(p, p2)))
    return TensorExpr.from_items(done)


def contract_hv(e: TensorExpr, pairs: Iterable[str]) -> TensorExpr:
    """Apply h_x v^x for each given label x (contracted pairs, application order)."""
    pairs = list(pairs)
    used = e.all_labels() | set(pairs)
    gen = fresh_names(used, "w")
    tmp = [next(gen) for _ in pairs]
    for x in pairs:
        e = hderiv(e, x)
    for y in tmp:
        e = vderiv(e, y)
    return e.relabel(dict(zip(tmp, pairs)))
