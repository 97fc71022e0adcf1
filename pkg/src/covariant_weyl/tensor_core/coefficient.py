"""Exact coefficients in Q[gamma] * i^k * eps^m.

A gamma polynomial is stored as a tuple of Fractions ``(c0, c1, ...)`` with
trailing zeros trimmed; the empty tuple is the zero polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

Number = Union[int, Fraction]
GammaPoly = tuple


def poly(*coeffs: Number) -> GammaPoly:
    return poly_trim(tuple(Fraction(c) for c in coeffs))


def poly_trim(c: Sequence[Fraction]) -> GammaPoly:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def poly_add(a: GammaPoly, b: GammaPoly) -> GammaPoly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for k, x in enumerate(b):
        out[k] += x
    return poly_trim(out)


def poly_neg(a: GammaPoly) -> GammaPoly:
    return tuple(-x for x in a)


def poly_scale(a: GammaPoly, q: Number) -> GammaPoly:
    if q == 0:
        return ()
    return tuple(x * q for x in a)


def poly_mul(a: GammaPoly, b: GammaPoly) -> GammaPoly:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return poly_trim(out)


def poly_eval(a: GammaPoly, gamma):
    """Evaluate at a number (exact if ``gamma`` is a Fraction)."""
    acc = 0
    for x in reversed(a):
        acc = acc * gamma + x
    return acc


def poly_compose(a: GammaPoly, b: GammaPoly) -> GammaPoly:
    """a(b(gamma))."""
    acc: GammaPoly = ()
    for x in reversed(a):
        acc = poly_add(poly_mul(acc, b), (x,) if x else ())
    return acc


def fold_i(i_power: int) -> tuple[int, int]:
    """Reduce a power of i to (sign, i in {0, 1})."""
    k = i_power % 4
    return (1, k) if k < 2 else (-1, k - 2)


@dataclass(frozen=True)
class Coefficient:
    """rational * i^i_power * eps^eps_power * gamma_poly(gamma).

    Normal form: i_power in {0, 1} (i^2 folded into the sign) and gamma_poly
    monic, so that equal values have equal fields.
    """

    rational: Fraction = Fraction(1)
    i_power: int = 0
    eps_power: int = 0
    gamma_poly: GammaPoly = (Fraction(1),)

    def __post_init__(self):
        sign, k = fold_i(self.i_power)
        p = poly_trim(tuple(Fraction(x) for x in self.gamma_poly))
        r = Fraction(self.rational) * sign
        if r == 0 or not p:
            r, p, k, e = Fraction(0), (Fraction(1),), 0, 0
        else:
            lead = p[-1]
            r *= lead
            p = tuple(x / lead for x in p)
            e = self.eps_power
        object.__setattr__(self, "rational", r)
        object.__setattr__(self, "i_power", k)
        object.__setattr__(self, "eps_power", e)
        object.__setattr__(self, "gamma_poly", p)

    @classmethod
    def from_poly(cls, p: GammaPoly, i_power: int = 0, eps_power: int = 0) -> "Coefficient":
        return cls(Fraction(1), i_power, eps_power, p)

    @property
    def poly(self) -> GammaPoly:
        return poly_scale(self.gamma_poly, self.rational)

    def is_zero(self) -> bool:
        return self.rational == 0

    def __mul__(self, other: "Coefficient") -> "Coefficient":
        if not isinstance(other, Coefficient):
            other = Coefficient(Fraction(other))
        return Coefficient(self.rational * other.rational, self.i_power + other.i_power,
                           self.eps_power + other.eps_power,
                           poly_mul(self.gamma_poly, other.gamma_poly))

    __rmul__ = __mul__

    def __neg__(self) -> "Coefficient":
        return Coefficient(-self.rational, self.i_power, self.eps_power, self.gamma_poly)

    def conjugate(self) -> "Coefficient":
        return Coefficient(self.rational * (-1 if self.i_power else 1), self.i_power,
                           self.eps_power, self.gamma_poly)

    def evaluate(self, gamma, eps=1):
        """Complex value for numeric gamma and eps."""
        return complex(self.rational) * (1j ** self.i_power) * eps ** self.eps_power * \
            complex(poly_eval(self.gamma_poly, gamma))


ONE = Coefficient()
GAMMA = Coefficient.from_poly(poly(0, 1))
I = Coefficient(i_power=1)


def eps(k: int) -> Coefficient:
    return Coefficient(eps_power=k)


def rat(p: Number, q: Number = 1) -> Coefficient:
    return Coefficient(Fraction(p, q) if isinstance(p, int) and isinstance(q, int)
                       else Fraction(p) / Fraction(q))
