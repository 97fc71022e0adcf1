"""Canonical form of tensor monomials.

Order of work for one term:

1. validate index usage;
2. absorb metric and identity factors into their contraction partners;
3. rewrite self-contracted Riemann/Ricci into Ricci/RicciScalar;
4. branch-and-bound search over factor order and per-factor slot symmetries
   for the lexicographically smallest encoding, with dummies numbered by
   first appearance.  Two minimal encodings of opposite sign mean the term
   vanishes.

Factors sort by (head rank, head name), then by slot encoding: symbol heads
first, then declared tensors, curvature, metric, momentum, traces.
"""

from __future__ import annotations

from collections import defaultdict
from functools import lru_cache

from .errors import MalformedIndex, VarianceError
from .expr import TensorExpr, term_labels
from .heads import (RICCI, RICCI_SCALAR, RIEMANN, Factor, Slot, metric_for, slot_group,
                    trace_for)

# Riemann slot pairs contracted -> (sign, remaining slot positions for Ricci)
_RIEMANN_TRACES = {
    (0, 2): (1, (1, 3)),
    (0, 3): (-1, (1, 2)),
    (1, 2): (-1, (0, 3)),
    (1, 3): (1, (0, 2)),
    (0, 1): (0, None),
    (2, 3): (0, None),
}


def _validate(factors: tuple) -> None:
    seen: dict = defaultdict(list)
    for f in factors:
        for s in f.all_slots():
            seen[s.label].append(s)
    for label, slots in seen.items():
        if len(slots) > 2:
            raise MalformedIndex(f"index {label!r} appears {len(slots)} times")
        if len(slots) == 2:
            a, b = slots
            if a.bundle != b.bundle:
                raise MalformedIndex(f"index {label!r} contracts different kinds")
            if a.up is not None and b.up is not None and a.up == b.up:
                raise VarianceError(f"index {label!r} contracted with equal variance")
            if a.bundle is not None and (a.up is None or b.up is None):
                raise VarianceError(f"bundle index {label!r} needs explicit variance")


def _locate(factors: list) -> dict:
    loc: dict = defaultdict(list)
    for j, f in enumerate(factors):
        for k, s in enumerate(f.all_slots()):
            loc[s.label].append((j, k))
    return loc


def _set_slot(f: Factor, pos: int, slot: Slot) -> Factor:
    seq = list(f.all_slots())
    seq[pos] = slot
    return f.split(seq)


def _absorb_metrics(factors: list) -> list:
    fs = list(factors)
    while True:
        loc = _locate(fs)
        done = True
        for j, f in enumerate(fs):
            if f.head.role != "metric":
                continue
            for k in (0, 1):
                s = f.slots[k]
                places = loc[s.label]
                if len(places) < 2:
                    continue
                other = places[0] if places[1] == (j, k) else places[1]
                t = f.slots[1 - k]
                if other[0] == j:
                    fs[j] = Factor(trace_for(f.head.kinds[0]), ())
                else:
                    oj, ok = other
                    target = fs[oj].all_slots()[ok]
                    fs[oj] = _set_slot(fs[oj], ok, Slot(t.label, t.up, target.bundle))
                    del fs[j]
                done = False
                break
            if not done:
                break
        if done:
            return fs


def _contract_curvature(factors: list):
    """Returns (sign, factors) with no self-contracted base slots on Riemann/Ricci."""
    sign = 1
    fs = list(factors)
    changed = True
    while changed:
        changed = False
        for j, f in enumerate(fs):
            if f.head is RIEMANN:
                labels = [s.label for s in f.slots]
                for (a, b), (sg, keep) in _RIEMANN_TRACES.items():
                    if labels[a] == labels[b]:
                        if sg == 0:
                            return 0, None
                        sign *= sg
                        fs[j] = Factor(RICCI, (f.slots[keep[0]], f.slots[keep[1]]),
                                       f.cov, csym=f.csym)
                        changed = True
                        break
            elif f.head is RICCI and f.slots[0].label == f.slots[1].label:
                fs[j] = Factor(RICCI_SCALAR, (), f.cov, csym=f.csym)
                changed = True
            if changed:
                break
    return sign, fs


def _static_key(f: Factor):
    return (f.head.sort_key, len(f.cov), len(f.h), len(f.v), f.hsym, f.csym)


def _encode(seq, free: set, naming: dict, nxt: int):
    codes = []
    new = {}
    for s in seq:
        upc = -1 if s.up is None else int(s.up)
        if s.label in free:
            codes.append((0, s.label, upc))
            continue
        n = naming.get(s.label)
        if n is None:
            n = new.get(s.label)
            if n is None:
                n = nxt
                nxt += 1
                new[s.label] = n
        codes.append((1, n, upc if s.bundle is not None else -1))
    return tuple(codes), new, nxt


def _search(factors: list):
    n = len(factors)
    if n == 0:
        return 1, ()
    counts = term_labels(factors)
    free = {lab for lab, c in counts.items() if c == 1}
    statics = [_static_key(f) for f in factors]
    seqs = [f.all_slots() for f in factors]
    groups = [slot_group(f.head, len(f.cov), len(f.h), len(f.v), f.hsym, f.csym)
              for f in factors]
    # state: (remaining tuple, naming dict, next number, sign, choices)
    states = [(tuple(range(n)), {}, 0, 1, ())]
    for _ in range(n):
        best = None
        cands = []
        for rem, naming, nxt, sign, choices in states:
            smin = min(statics[j] for j in rem)
            tried = set()
            for j in rem:
                if statics[j] != smin or factors[j] in tried:
                    continue
                tried.add(factors[j])
                seq = seqs[j]
                for perm, gsign in groups[j]:
                    pseq = [seq[k] for k in perm]
                    codes, new, nxt2 = _encode(pseq, free, naming, nxt)
                    seg = (smin, codes)
                    if best is None or seg < best:
                        best = seg
                        cands = []
                    if seg == best:
                        cands.append((rem, naming, new, nxt2, sign * gsign, choices, j, perm))
        states = []
        dedup = set()
        for rem, naming, new, nxt2, sign, choices, j, perm in cands:
            nm = dict(naming)
            nm.update(new)
            rem2 = tuple(k for k in rem if k != j)
            key = (rem2, tuple(sorted(nm.items())), sign)
            if key in dedup:
                continue
            dedup.add(key)
            states.append((rem2, nm, nxt2, sign, choices + ((j, perm),)))
    signs = {st[3] for st in states}
    if len(signs) > 1:
        return 0, None
    rem, naming, nxt, sign, choices = states[0]
    # final names: by first appearance, separate sequences for coordinate / bundle
    kind_of = {}
    for f in factors:
        for s in f.all_slots():
            kind_of[s.label] = s.bundle
    names = {}
    ccount = bcount = 0
    for label, num in sorted(naming.items(), key=lambda kv: kv[1]):
        if kind_of[label] is None:
            while True:
                ccount += 1
                cand = f"d{ccount}"
                if cand not in free:
                    break
        else:
            while True:
                bcount += 1
                cand = f"D{bcount}"
                if cand not in free:
                    break
        names[label] = cand
    out = []
    for j, perm in choices:
        f = factors[j]
        seq = f.all_slots()
        new_seq = []
        for k in perm:
            s = seq[k]
            if s.label in free:
                new_seq.append(s)
            elif s.bundle is None:
                new_seq.append(Slot(names[s.label], None, None))
            else:
                new_seq.append(Slot(names[s.label], s.up, s.bundle))
        out.append(f.split(new_seq))
    return sign, tuple(out)


@lru_cache(maxsize=200000)
def canonical_term(factors: tuple):
    """(sign, canonical factors) or (0, None) when the monomial vanishes."""
    _validate(factors)
    fs = _absorb_metrics(list(factors))
    sign, fs = _contract_curvature(fs)
    if sign == 0:
        return 0, None
    s2, out = _search(fs)
    if s2 == 0:
        return 0, None
    return sign * s2, out


def check_free_signature(e: TensorExpr) -> None:
    sig = None
    for factors, *_ in e.items():
        counts = term_labels(factors)
        cur = sorted((s.label, s.up, s.bundle) for f in factors for s in f.all_slots()
                     if counts[s.label] == 1)
        if sig is None:
            sig = cur
        elif cur != sig:
            raise MalformedIndex(f"terms have different free indices: {sig} vs {cur}")


def canonicalize(e: TensorExpr, check: bool = True) -> TensorExpr:
    """Canonical representative: renamed dummies, sorted factors, symmetries applied,
    metrics absorbed, like terms merged, zero terms dropped.  Idempotent."""

    def fn(factors):
        sign, out = canonical_term(factors)
        if sign == 0:
            return []
        return [(sign, out)]

    out = e.map_terms(fn)
    if check:
        check_free_signature(out)
    return out


def metric(a: Slot, b: Slot) -> Factor:
    return Factor(metric_for(a.bundle), (a, b))
