"""Independent flat-space oracles.

Tensor expressions whose heads are plain tensors, p, metrics and curvatures are
evaluated in components on flat R^d (Cartesian chart, Euclidean metric, every
curvature zero, covariant derivatives = partial derivatives).  Random integer
polynomials stand in for the tensor components; all arithmetic happens in the
sparse polynomial ring QQ(i)[x, p, eps, gamma].  Flat star products and ordering
shifts are then computed directly from their exponential formulas.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from math import comb, factorial

from sympy import QQ_I, I as SYM_I
from sympy.polys.rings import ring

CURVATURE = {"Riemann", "Ricci", "RicciScalar"}
METRICS = {"g", "g_inv", "delta"}


class Components:
    """Random polynomial components T^{i1..ik}(x) for each tensor head."""

    def __init__(self, dim: int = 2, seed: int = 0, degree: int = 3):
        self.dim = dim
        names = [f"x{i}" for i in range(dim)] + [f"p{i}" for i in range(dim)] + ["eps", "gamma"]
        self.R, *gens = ring(",".join(names), QQ_I)
        self.x, self.p = gens[:dim], gens[dim:2 * dim]
        self.eps, self.gamma = gens[-2], gens[-1]
        self.i = self.R(QQ_I.from_sympy(SYM_I))
        self.rng = random.Random(seed)
        self.degree = degree
        self.table: dict = {}
        self.fixed: dict = {}

    def set(self, head: str, fn) -> None:
        """Fix the components of ``head``: fn(index tuple, x generators) -> ring element."""
        self.fixed[head] = fn

    def value(self, head: str, idx: tuple):
        if head in self.fixed:
            return self.R(self.fixed[head](idx, self.x))
        key = (head, idx)
        if key not in self.table:
            out = self.R.zero
            for m in itertools.product(range(self.degree + 1), repeat=self.dim):
                if sum(m) <= self.degree:
                    mono = self.R.one
                    for xi, e in zip(self.x, m):
                        mono *= xi ** e
                    out += self.rng.randint(-3, 3) * mono
            self.table[key] = out
        return self.table[key]

    def derivative(self, head: str, idx: tuple, dirs: tuple):
        """Partial derivatives of a component (flat: their order is irrelevant)."""
        key = (head, idx, dirs)
        if key not in self.table:
            val = self.value(head, idx)
            for i in dirs:
                val = val.diff(self.x[i])
            self.table[key] = val
        return self.table[key]

    def rational(self, q: Fraction):
        return self.R(q.numerator).quo_ground(q.denominator)


def evaluate(expr, comp: Components, free: dict | None = None):
    """Component value of a TensorExpr with the free labels fixed by ``free``."""
    free = free or {}
    R = comp.R
    total = R.zero
    for coeff, factors in expr.terms():
        c = R(coeff.rational.numerator) * comp.i ** coeff.i_power
        c = c.quo_ground(coeff.rational.denominator) if coeff.rational.denominator != 1 else c
        c *= comp.eps ** coeff.eps_power
        gp = R.zero
        for n, q in enumerate(coeff.gamma_poly):
            gp += R(q.numerator).quo_ground(q.denominator) * comp.gamma ** n
        c *= gp
        if any(f.head.name in CURVATURE or f.head.name.startswith("BundleCurv")
               for f in factors):
            continue
        labels = sorted({s.label for f in factors for s in f.all_slots()} - set(free))
        for values in itertools.product(range(comp.dim), repeat=len(labels)):
            env = dict(free, **dict(zip(labels, values)))
            term = c
            for f in factors:
                name = f.head.name
                if f.h or f.v:
                    raise ValueError(f"generic symbol head {name} has no components")
                idx = tuple(env[s.label] for s in f.slots)
                if name in METRICS:
                    if idx[0] != idx[1]:
                        term = R.zero
                        break
                    continue
                if name == "p":
                    term = term * comp.p[idx[0]]
                else:
                    term = term * comp.derivative(
                        name, idx, tuple(sorted(env[s.label] for s in f.cov)))
                if not term:
                    break
            total += term
    return total


def moyal_order(a, b, k: int, comp: Components):
    """Coefficient of eps^k in a exp((i eps/2)(<-d_x . ->d_p - <-d_p . ->d_x)) b."""
    x, p = comp.x, comp.p
    total = comp.R.zero
    for j in range(k + 1):
        # j factors of (d_x a)(d_p b), k - j factors of -(d_p a)(d_x b)
        for xs in itertools.product(range(comp.dim), repeat=j):
            for ps in itertools.product(range(comp.dim), repeat=k - j):
                da = a
                for i in xs:
                    da = da.diff(x[i])
                for i in ps:
                    da = da.diff(p[i])
                if not da:
                    continue
                db = b
                for i in xs:
                    db = db.diff(p[i])
                for i in ps:
                    db = db.diff(x[i])
                total += comb(k, j) * (-1) ** (k - j) * da * db
    return total * comp.i ** k * comp.R(1).quo_ground(factorial(k) * 2 ** k)


def translation_shift(a, s: Fraction, comp: Components, max_order: int):
    """exp(-i eps s d_p . d_x) a truncated after eps^max_order."""
    step = comp.rational(Fraction(s)) * (-comp.i) * comp.eps
    total = comp.R.zero
    term = a
    for k in range(max_order + 1):
        total += term
        div = sum((term.diff(comp.p[i]).diff(comp.x[i]) for i in range(comp.dim)), comp.R.zero)
        term = (div * step).quo_ground(k + 1)
    return total


def flat_moyal_tensor(a, b, k: int):
    """Tensor-level flat expander: (i/2)^k/k! sum_j C(k,j) (-1)^(k-j)
    (h^j v^(k-j) a)(v^j h^(k-j) b), contracted pairwise."""
    from covariant_weyl.star_engine import drop_curvature
    from covariant_weyl.tensor_core import (Coefficient, TensorExpr, canonicalize, hderiv,
                                            normal_order, vderiv)

    out = TensorExpr()
    used = a.all_labels() | b.all_labels()
    names = [n for n in (f"o{j}" for j in range(k + len(used))) if n not in used][:k]
    for j in range(k + 1):
        left, right = a, b
        for m in names[:j]:
            left, right = hderiv(left, m), vderiv(right, m)
        for m in names[j:k]:
            left, right = vderiv(left, m), hderiv(right, m)
        w = Fraction(comb(k, j) * (-1) ** (k - j), factorial(k) * 2 ** k)
        out = out + (left * right).scaled(Coefficient(w, k))
    return canonicalize(drop_curvature(canonicalize(normal_order(out))))
