"""TensorExpr: sums of coefficient-weighted products of tensor factors."""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from typing import Callable, Iterable, Iterator

from .coefficient import (Coefficient, GammaPoly, fold_i, poly_add, poly_compose, poly_eval,
                          poly_mul, poly_neg, poly_scale)
from .heads import Factor, Slot

Key = tuple  # (factors, i_power, eps_power)


def term_labels(factors: Iterable[Factor]) -> Counter:
    c: Counter = Counter()
    for f in factors:
        for s in f.all_slots():
            c[s.label] += 1
    return c


def term_free_slots(factors: Iterable[Factor]) -> tuple:
    counts = term_labels(factors)
    out = [s for f in factors for s in f.all_slots() if counts[s.label] == 1]
    return tuple(sorted(out))


def fresh_names(used, prefix: str = "x") -> Iterator[str]:
    k = 1
    while True:
        name = f"{prefix}{k}"
        if name not in used:
            yield name
        k += 1


def rename_factors(factors: Iterable[Factor], mapping: dict) -> tuple:
    return tuple(f.relabel(mapping) for f in factors)


def join_factors(left: tuple, right: tuple) -> tuple:
    """Concatenate two factor lists, renaming clashing dummies.

    Shared free labels contract (Einstein convention); dummy labels on either
    side that collide with any label of the other side are renamed.
    """
    lc, rc = term_labels(left), term_labels(right)
    used = set(lc) | set(rc)
    gen = fresh_names(used, "j")
    lmap = {lab: next(gen) for lab, n in lc.items() if n == 2 and lab in rc}
    rmap = {lab: next(gen) for lab, n in rc.items() if n == 2 and lab in lc}
    return rename_factors(left, lmap) + rename_factors(right, rmap)


def _as_coefficient(x) -> Coefficient:
    if isinstance(x, Coefficient):
        return x
    return Coefficient(Fraction(x))


class TensorExpr:
    """Immutable sum of terms keyed by (factors, i power, eps power)."""

    __slots__ = ("_t",)

    def __init__(self, terms: dict | None = None):
        self._t = {k: v for k, v in (terms or {}).items() if v}

    # construction -------------------------------------------------------
    @classmethod
    def zero(cls) -> "TensorExpr":
        return cls()

    @classmethod
    def from_factors(cls, factors: Iterable[Factor], coeff=1) -> "TensorExpr":
        c = _as_coefficient(coeff)
        if c.is_zero():
            return cls()
        return cls({(tuple(factors), c.i_power, c.eps_power): c.poly})

    @classmethod
    def scalar(cls, coeff=1) -> "TensorExpr":
        return cls.from_factors((), coeff)

    @classmethod
    def from_items(cls, items: Iterable[tuple]) -> "TensorExpr":
        acc: dict = {}
        for factors, i, e, p in items:
            sign, i = fold_i(i)
            if sign < 0:
                p = poly_neg(p)
            key = (tuple(factors), i, e)
            acc[key] = poly_add(acc.get(key, ()), p)
        return cls(acc)

    # inspection ---------------------------------------------------------
    def items(self) -> Iterator[tuple]:
        for (factors, i, e), p in self._t.items():
            yield factors, i, e, p

    def terms(self) -> list:
        return [(Coefficient.from_poly(p, i, e), factors) for factors, i, e, p in self.items()]

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self):
        return bool(self._t)

    def __len__(self):
        return len(self._t)

    def __eq__(self, other):
        if not isinstance(other, TensorExpr):
            return NotImplemented
        return self._t == other._t

    def __hash__(self):
        return hash(frozenset(self._t.items()))

    def free_slots(self) -> tuple:
        for factors, *_ in self.items():
            return term_free_slots(factors)
        return ()

    def free_labels(self) -> set:
        return {s.label for s in self.free_slots()}

    def all_labels(self) -> set:
        out: set = set()
        for factors, *_ in self.items():
            out |= set(term_labels(factors))
        return out

    def eps_powers(self) -> list:
        return sorted({e for _, _, e, _ in self.items()})

    def eps_part(self, k: int) -> "TensorExpr":
        return TensorExpr({key: p for key, p in self._t.items() if key[2] == k})

    def truncate(self, max_eps: int) -> "TensorExpr":
        return TensorExpr({key: p for key, p in self._t.items() if key[2] <= max_eps})

    def heads(self) -> set:
        return {f.head.name for factors, *_ in self.items() for f in factors}

    # arithmetic ---------------------------------------------------------
    def __add__(self, other: "TensorExpr") -> "TensorExpr":
        if not isinstance(other, TensorExpr):
            return NotImplemented
        acc = dict(self._t)
        for key, p in other._t.items():
            acc[key] = poly_add(acc.get(key, ()), p)
        return TensorExpr(acc)

    def __neg__(self) -> "TensorExpr":
        return TensorExpr({k: poly_neg(p) for k, p in self._t.items()})

    def __sub__(self, other: "TensorExpr") -> "TensorExpr":
        return self + (-other)

    def scaled(self, coeff) -> "TensorExpr":
        c = _as_coefficient(coeff)
        if c.is_zero():
            return TensorExpr()
        cp = c.poly
        acc: dict = {}
        for (factors, i, e), p in self._t.items():
            sign, k = fold_i(i + c.i_power)
            q = poly_mul(p, cp)
            if sign < 0:
                q = poly_neg(q)
            key = (factors, k, e + c.eps_power)
            acc[key] = poly_add(acc.get(key, ()), q)
        return TensorExpr(acc)

    def __mul__(self, other) -> "TensorExpr":
        if not isinstance(other, TensorExpr):
            return self.scaled(other)
        acc: dict = {}
        for (f1, i1, e1), p1 in self._t.items():
            for (f2, i2, e2), p2 in other._t.items():
                sign, k = fold_i(i1 + i2)
                q = poly_mul(p1, p2)
                if sign < 0:
                    q = poly_neg(q)
                key = (join_factors(f1, f2), k, e1 + e2)
                acc[key] = poly_add(acc.get(key, ()), q)
        return TensorExpr(acc)

    def __rmul__(self, other) -> "TensorExpr":
        return self.scaled(other)

    # transformation ------------------------------------------------------
    def map_terms(self, fn: Callable[[tuple], Iterable[tuple]]) -> "TensorExpr":
        """fn(factors) yields (Coefficient | number, new_factors) pairs."""
        acc: dict = {}
        for (factors, i, e), p in self._t.items():
            for c, nf in fn(factors):
                c = _as_coefficient(c)
                if c.is_zero():
                    continue
                sign, k = fold_i(i + c.i_power)
                q = poly_mul(p, c.poly)
                if sign < 0:
                    q = poly_neg(q)
                key = (tuple(nf), k, e + c.eps_power)
                acc[key] = poly_add(acc.get(key, ()), q)
        return TensorExpr(acc)

    def map_exprs(self, fn: Callable[[tuple], "TensorExpr"]) -> "TensorExpr":
        """Replace each term's factor list by fn(factors), keeping the coefficient."""
        acc: dict = {}
        for (factors, i, e), p in self._t.items():
            sub = fn(factors)
            for (nf, i2, e2), p2 in sub._t.items():
                sign, k = fold_i(i + i2)
                q = poly_mul(p, p2)
                if sign < 0:
                    q = poly_neg(q)
                key = (nf, k, e + e2)
                acc[key] = poly_add(acc.get(key, ()), q)
        return TensorExpr(acc)

    def relabel(self, mapping: dict) -> "TensorExpr":
        """Rename free labels; clashing dummies are moved out of the way first."""
        if not mapping:
            return self
        targets = set(mapping.values())

        def fn(factors):
            counts = term_labels(factors)
            clash = {lab for lab, n in counts.items() if n == 2 and lab in targets}
            if clash:
                gen = fresh_names(set(counts) | targets | set(mapping), "r")
                factors = rename_factors(factors, {lab: next(gen) for lab in clash})
            return [(1, rename_factors(factors, mapping))]

        return self.map_terms(fn)

    def with_variance(self, label: str, up: bool) -> "TensorExpr":
        """Reinterpret the variance of a free slot (no metric inserted)."""
        def fn(factors):
            out = []
            for f in factors:
                out.append(f.split(Slot(s.label, up, s.bundle) if s.label == label else s
                                   for s in f.all_slots()))
            return [(1, out)]
        return self.map_terms(fn)

    def substitute_gamma(self, value) -> "TensorExpr":
        """Replace gamma by a number or by a gamma polynomial (tuple)."""
        acc: dict = {}
        for key, p in self._t.items():
            if isinstance(value, tuple):
                q = poly_compose(p, value)
            else:
                v = poly_eval(p, Fraction(value))
                q = (v,) if v else ()
            acc[key] = poly_add(acc.get(key, ()), q)
        return TensorExpr(acc)

    def conjugate_coefficients(self) -> "TensorExpr":
        return TensorExpr({k: (poly_neg(p) if k[1] else p) for k, p in self._t.items()})

    def drop_heads(self, names) -> "TensorExpr":
        names = set(names)
        return TensorExpr({k: p for k, p in self._t.items()
                           if not any(f.head.name in names for f in k[0])})

    def __repr__(self):
        from ..expr_lang.printer import to_text
        return f"TensorExpr({to_text(self)!r})"

    def __str__(self):
        from ..expr_lang.printer import to_text
        return to_text(self)


def gamma_poly_of(coeff: Coefficient) -> GammaPoly:
    return poly_scale(coeff.gamma_poly, coeff.rational)
