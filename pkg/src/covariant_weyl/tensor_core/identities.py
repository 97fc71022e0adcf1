"""Multiterm identities, (anti)symmetrization and head substitution.

Reduction works by exact elimination over the monomials that occur in an
expression plus the monomials produced by identity instances generated from
them (first and second Bianchi for Riemann, the cyclic identity for bundle
curvature, the contracted Bianchi identity for Ricci).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import permutations
from math import factorial
from typing import Iterable, Optional, Sequence

from .calculus import hderiv, normal_order, vderiv
from .canonical import canonicalize
from .errors import IndexNotFree, SignatureMismatch
from .expr import TensorExpr, fresh_names
from .heads import (DIM, METRIC, RICCI, RICCI_SCALAR, RIEMANN, Factor, HeadInfo, Slot)

_HALF = Fraction(1, 2)


def _mono_key(factors: tuple):
    return tuple(
        (f.head.name,
         tuple((s.label, -1 if s.up is None else int(s.up), s.bundle or "") for s in f.all_slots()),
         len(f.cov), len(f.h), len(f.v), f.hsym, f.csym)
        for f in factors)


def _ordered_strings(string: tuple, k: int):
    """Ordered expansions (with weights) of a string whose first k entries are symmetrized."""
    if k < 2:
        return [(string, Fraction(1))]
    w = Fraction(1, factorial(k))
    return [(tuple(string[q] for q in perm) + string[k:], w) for perm in permutations(range(k))]


def _replace(factors: tuple, j: int, new) -> tuple:
    return factors[:j] + tuple(new) + factors[j + 1:]


def _relations_for(factors: tuple) -> list:
    """Identity instances (lists of (coeff, factors)) touching one monomial."""
    rels = []
    for j, f in enumerate(factors):
        if f.head is RIEMANN:
            a, b, c, d = f.slots
            rels.append([(1, _replace(factors, j, [f._replace(slots=(a, b, c, d))])),
                         (1, _replace(factors, j, [f._replace(slots=(a, c, d, b))])),
                         (1, _replace(factors, j, [f._replace(slots=(a, d, b, c))]))])
            if f.cov:
                for st, _ in _ordered_strings(f.cov, f.csym):
                    e, rest = st[0], st[1:]
                    for x, y, z, w in ((a, b, c, d), (c, d, a, b)):
                        terms = []
                        for p, q, r in ((z, w, e), (w, e, z), (e, z, w)):
                            nf = Factor(RIEMANN, (x, y, p, q), (r,) + rest)
                            terms.append((1, _replace(factors, j, [nf])))
                        rels.append(terms)
        elif f.head.name.startswith("BundleCurv.") and f.cov:
            A, B, c, d = f.slots
            for st, _ in _ordered_strings(f.cov, f.csym):
                e, rest = st[0], st[1:]
                terms = []
                for p, q, r in ((c, d, e), (d, e, c), (e, c, d)):
                    nf = Factor(f.head, (A, B, p, q), (r,) + rest)
                    terms.append((1, _replace(factors, j, [nf])))
                rels.append(terms)
        elif f.head is RICCI and f.cov:
            base = {s.label: k for k, s in enumerate(f.slots)}
            for st, _ in _ordered_strings(f.cov, f.csym):
                for k, s in enumerate(st):
                    if s.label not in base:
                        continue
                    other = f.slots[1 - base[s.label]]
                    rest = st[:k] + st[k + 1:]
                    ric = Factor(RICCI, (f.slots[base[s.label]], other), (s,) + rest)
                    sc = Factor(RICCI_SCALAR, (), (other,) + rest)
                    rels.append([(1, _replace(factors, j, [ric])),
                                 (-_HALF, _replace(factors, j, [sc]))])
    return rels


def _to_vector(terms: list) -> dict:
    e = TensorExpr.from_items((fs, 0, 0, (Fraction(c),)) for c, fs in terms)
    e = canonicalize(normal_order(e), check=False)
    vec = {}
    for fs, i, ep, p in e.items():
        # identity instances carry rational coefficients only
        vec[fs] = p[0] if len(p) == 1 else Fraction(0)
    return {k: v for k, v in vec.items() if v}


class _Echelon:
    """Rows with distinct leading monomials (largest key), fully reduced on insert."""

    def __init__(self):
        self.rows: dict = {}
        self.keys: dict = {}

    def _key(self, m):
        k = self.keys.get(m)
        if k is None:
            k = self.keys[m] = _mono_key(m)
        return k

    def reduce(self, vec: dict) -> dict:
        vec = dict(vec)
        while True:
            pivots = [m for m in vec if m in self.rows]
            if not pivots:
                return vec
            m = max(pivots, key=self._key)
            c = vec[m]
            for mm, v in self.rows[m].items():
                nv = vec.get(mm, 0) - c * v
                if nv:
                    vec[mm] = nv
                else:
                    vec.pop(mm, None)

    def add(self, vec: dict) -> None:
        vec = self.reduce(vec)
        if not vec:
            return
        lead = max(vec, key=self._key)
        c = vec[lead]
        self.rows[lead] = {m: v / c for m, v in vec.items()}


def identity_basis(monomials: Iterable[tuple], depth: int = 2) -> _Echelon:
    ech = _Echelon()
    seen = set()
    frontier = list(monomials)
    for _ in range(depth):
        nxt = []
        for m in frontier:
            if m in seen:
                continue
            seen.add(m)
            for rel in _relations_for(m):
                vec = _to_vector(rel)
                if vec:
                    ech.add(vec)
                    nxt.extend(vec)
        frontier = nxt
    return ech


def reduce_mod_identities(e: TensorExpr, depth: int = 2) -> TensorExpr:
    """Representative of e modulo the identity span; 0 whenever e lies in it."""
    if e.is_zero():
        return e
    ech = identity_basis((fs for fs, *_ in e.items()), depth)
    sectors: dict = defaultdict(dict)
    for fs, i, ep, p in e.items():
        for g, c in enumerate(p):
            if c:
                sectors[(i, ep, g)][fs] = c
    items = []
    for (i, ep, g), vec in sorted(sectors.items()):
        for fs, c in ech.reduce(vec).items():
            items.append((fs, i, ep, (Fraction(0),) * g + (c,)))
    return TensorExpr.from_items(items)


@dataclass(frozen=True)
class IdentityCheck:
    equal: bool
    witness: TensorExpr

    def __bool__(self):
        return self.equal


def _signature(e: TensorExpr):
    return sorted((s.label, s.up, s.bundle) for s in e.free_slots())


def equal_mod_identities(e1: TensorExpr, e2: TensorExpr, flat_bundles=frozenset(),
                         depth: int = 2) -> IdentityCheck:
    if not e1.is_zero() and not e2.is_zero() and _signature(e1) != _signature(e2):
        raise SignatureMismatch(f"{_signature(e1)} vs {_signature(e2)}")
    diff = canonicalize(normal_order(e1 - e2, flat_bundles))
    witness = reduce_mod_identities(diff, depth)
    return IdentityCheck(witness.is_zero(), witness)


def symmetrize(e: TensorExpr, indices: Sequence[str], anti: bool = False) -> TensorExpr:
    """Normalized (anti)symmetrization over free indices."""
    indices = list(indices)
    free = {s.label: s for s in e.free_slots()}
    for lab in indices:
        if lab not in free and not e.is_zero():
            raise IndexNotFree(lab)
    n = len(indices)
    w = Fraction(1, factorial(n))
    out = TensorExpr()
    for perm in permutations(range(n)):
        sign = _perm_sign(perm) if anti else 1
        mapping = {indices[k]: indices[perm[k]] for k in range(n)}
        out = out + e.relabel(mapping).scaled(w * sign)
    return canonicalize(out)


def _perm_sign(perm) -> int:
    sign, seen = 1, set()
    for k in range(len(perm)):
        if k in seen:
            continue
        j, length = k, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def substitute_head(e: TensorExpr, head: str, replacement: Optional[TensorExpr] = None,
                    pattern: Sequence[str] = ()) -> TensorExpr:
    """Replace every factor with head name ``head``.

    ``pattern`` lists the free labels of ``replacement`` in base-slot order.
    Derivative decorations of the replaced factor act on the replacement by
    the product rule.  A missing or zero replacement deletes the terms.
    """
    if replacement is None or replacement.is_zero():
        return TensorExpr({k: p for k, p in e._t.items()
                           if not any(f.head.name == head for f in k[0])})
    pattern = list(pattern)
    rfree = {s.label: s for s in replacement.free_slots()}
    if sorted(rfree) != sorted(pattern):
        raise SignatureMismatch(f"replacement free indices {sorted(rfree)} != {pattern}")

    def expand(f: Factor) -> TensorExpr:
        if len(f.slots) != len(pattern):
            raise SignatureMismatch(f"{head} has {len(f.slots)} slots, pattern {len(pattern)}")
        used = set(replacement.all_labels()) | {s.label for s in f.all_slots()}
        gen = fresh_names(used, "t")
        tmp = {lab: next(gen) for lab in pattern}
        rep = replacement.relabel(tmp)
        extra = []
        final = {}
        for s, lab in zip(f.slots, pattern):
            r = rfree[lab]
            if r.bundle != s.bundle:
                raise SignatureMismatch(f"index kind mismatch at {lab!r}")
            if s.up is None or r.up is None or s.up == r.up:
                final[tmp[lab]] = s.label
                if s.up is not None and r.up is None:
                    rep = rep.with_variance(tmp[lab], s.up)
                elif s.up is None and r.up is not None:
                    rep = rep.with_variance(tmp[lab], None)
            elif r.bundle is None:
                mid = next(gen)
                rep = rep.relabel({tmp[lab]: mid})
                extra.append(Factor(METRIC, (Slot(s.label, s.up), Slot(mid, not r.up))))
            else:
                raise SignatureMismatch(f"bundle index {lab!r} has the wrong variance")
        rep = rep.relabel(final)
        if extra:
            rep = rep * TensorExpr.from_factors(extra)
        out = TensorExpr()
        for st_h, wh in _ordered_strings(f.h, f.hsym):
            for st_c, wc in _ordered_strings(f.cov, f.csym):
                t = rep
                for s in st_c + st_h:
                    t = hderiv(t, s)
                for s in f.v:
                    t = vderiv(t, s)
                out = out + t.scaled(wh * wc)
        return out

    def fn(factors):
        others = []
        targets = []
        for f in factors:
            (targets if f.head.name == head else others).append(f)
        if not targets:
            return TensorExpr.from_factors(factors)
        res = TensorExpr.from_factors(others)
        for f in targets:
            res = res * expand(f)
        return res

    return e.map_exprs(fn)


def identify_bundle(e: TensorExpr, bundle: str) -> TensorExpr:
    """Treat ``bundle`` as the (co)tangent bundle: its indices become coordinate
    indices, its curvature becomes Riemann, its identity the metric."""

    def head_map(h: HeadInfo) -> HeadInfo:
        if h.name == f"BundleCurv.{bundle}":
            return RIEMANN
        if h.name == f"delta.{bundle}":
            return METRIC
        if h.name == f"rank.{bundle}":
            return DIM
        if bundle in h.kinds:
            return _rekind(h, bundle)
        return h

    def fn(factors):
        out = []
        for f in factors:
            seq = [Slot(s.label, s.up, None) if s.bundle == bundle else s
                   for s in f.all_slots()]
            out.append(f.split(seq)._replace(head=head_map(f.head)))
        return [(1, tuple(out))]

    return e.map_terms(fn)


def _rekind(h: HeadInfo, bundle: str) -> HeadInfo:
    return replace(h, kinds=tuple(None if k == bundle else k for k in h.kinds))

