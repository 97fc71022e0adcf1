"""Recursive-descent parser for the expression grammar.

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := unary (('*' unary) | ('/' INT))*
    unary  := '-' unary | atom ['^' ['-'] INT]      (powers only on i, eps, gamma)
    atom   := INT | 'i' | 'eps' | 'gamma' | '(' expr ')'
            | ('H' | 'V' | 'HS') '(' slots ',' expr ')'
            | HEAD ['~'] ['[' slots [';' covslots] ']']
    slot   := '^' NAME | '_' NAME | '^^' NAME | '__' NAME
    covslots := ['(' slots ')'] slots

A parenthesized group in front of the ``;`` slots marks a symmetrized prefix.
"""

from __future__ import annotations

import re
from collections import Counter
from fractions import Fraction
from typing import NamedTuple, Optional

from ..tensor_core.calculus import hderiv, vderiv
from ..tensor_core.coefficient import Coefficient, poly
from ..tensor_core.errors import (ArityError, MalformedIndex, UnbalancedIndex, VarianceError)
from ..tensor_core.expr import TensorExpr
from ..tensor_core.heads import Factor, Slot, norm_sym
from .context import Context, UnknownHead


class ParseError(SyntaxError):
    """Syntax error with a character offset."""

    def __init__(self, msg: str, position: int):
        super().__init__(f"{msg} at position {position}")
        self.position = position


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z][A-Za-z0-9_]*(?:\.[A-Za-z][A-Za-z0-9_]*)?)
  | (?P<op>\^\^|__|[-+*/^_\[\];(),~])
""", re.VERBOSE)


class Token(NamedTuple):
    kind: str
    text: str
    pos: int


def tokenize(src: str) -> list:
    out = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), pos))
        pos = m.end()
    out.append(Token("end", "", len(src)))
    return out


class Parser:
    def __init__(self, src: str, ctx: Optional[Context] = None):
        self.src = src
        self.ctx = ctx or Context()
        self.toks = tokenize(src)
        self.k = 0

    # token helpers ------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.k]

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.k += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            raise ParseError(f"expected {text!r}, found {self.tok.text or 'end'!r}", self.tok.pos)

    def expect_kind(self, kind: str) -> Token:
        t = self.tok
        if t.kind != kind:
            raise ParseError(f"expected {kind}, found {t.text or 'end'!r}", t.pos)
        self.k += 1
        return t

    # grammar ------------------------------------------------------------
    def parse(self) -> TensorExpr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return e

    def expr(self) -> TensorExpr:
        if self.accept("-"):
            out = -self.term()
        else:
            self.accept("+")
            out = self.term()
        while True:
            if self.accept("+"):
                out = out + self.term()
            elif self.accept("-"):
                out = out - self.term()
            else:
                return out

    def term(self) -> TensorExpr:
        out = self.unary()
        while True:
            if self.accept("*"):
                out = out * self.unary()
            elif self.accept("/"):
                t = self.expect_kind("int")
                if int(t.text) == 0:
                    raise ParseError("division by zero", t.pos)
                out = out.scaled(Fraction(1, int(t.text)))
            else:
                return out

    def unary(self) -> TensorExpr:
        if self.accept("-"):
            return -self.unary()
        return self.atom()

    def _power(self) -> int:
        if not self.accept("^"):
            return 1
        neg = self.accept("-")
        n = int(self.expect_kind("int").text)
        return -n if neg else n

    def atom(self) -> TensorExpr:
        t = self.tok
        if t.kind == "int":
            self.k += 1
            return TensorExpr.scalar(int(t.text))
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if t.kind != "name":
            raise ParseError(f"unexpected {t.text or 'end'!r}", t.pos)
        self.k += 1
        if t.text == "i":
            return TensorExpr.scalar(Coefficient(i_power=self._power()))
        if t.text == "eps":
            return TensorExpr.scalar(Coefficient(eps_power=self._power()))
        if t.text == "gamma":
            n = self._power()
            if n < 0:
                raise ParseError("negative power of gamma", t.pos)
            return TensorExpr.scalar(Coefficient.from_poly(poly(*([0] * n + [1]))))
        if t.text in ("H", "V", "HS") and self.tok.text == "(":
            return self.derivative(t)
        return self.factor(t)

    def derivative(self, t: Token) -> TensorExpr:
        self.expect("(")
        slots = self.slot_list(stop=(",",))
        self.expect(",")
        inner = self.expr()
        self.expect(")")
        for s in slots:
            if s.bundle is not None:
                raise MalformedIndex(f"derivative index {s.label!r} must be a coordinate index")
        if t.text == "V":
            for s in slots:
                if not s.up:
                    raise VarianceError(f"vertical derivative index {s.label!r} must be upper")
                inner = vderiv(inner, s)
            return inner
        for s in slots:
            if s.up:
                raise VarianceError(f"horizontal derivative index {s.label!r} must be lower")
        if t.text == "H":
            for s in slots:
                inner = hderiv(inner, s)
            return inner
        # HS: symmetrized string on bare symbol factors
        n = len(slots)

        def fn(factors):
            out = []
            for j, f in enumerate(factors):
                if f.h:
                    raise ParseError("HS applies to factors without h-derivatives", t.pos)
                if not f.head.is_symbol:
                    continue
                nf = f._replace(h=tuple(slots), hsym=norm_sym(n, n))
                out.append((1, factors[:j] + (nf,) + factors[j + 1:]))
            return out

        return inner.map_terms(fn)

    def slot(self) -> Slot:
        t = self.tok
        if t.kind != "op" or t.text not in ("^", "_", "^^", "__"):
            raise ParseError(f"expected an index, found {t.text or 'end'!r}", t.pos)
        self.k += 1
        name = self.expect_kind("name").text
        bundle = "?" if t.text in ("^^", "__") else None
        return Slot(name, t.text.startswith("^"), bundle)

    def slot_list(self, stop=("]", ";")) -> list:
        out = []
        while not (self.tok.kind == "op" and self.tok.text in stop) and self.tok.kind != "end":
            out.append(self.slot())
        return out

    def factor(self, t: Token) -> TensorExpr:
        name = t.text
        if self.accept("~"):
            name += "~"
        try:
            head = self.ctx.lookup(name)
        except UnknownHead:
            raise UnknownHead(f"unknown head {name!r} at position {t.pos}") from None
        slots, cov, csym = [], [], 0
        if self.accept("["):
            slots = self.slot_list()
            if self.accept(";"):
                if self.accept("("):
                    cov = self.slot_list(stop=(")",))
                    self.expect(")")
                    csym = len(cov)
                cov += self.slot_list(stop=("]",))
            self.expect("]")
        if len(slots) != head.arity:
            raise ArityError(f"{name} takes {head.arity} indices, got {len(slots)} "
                             f"(position {t.pos})")
        fixed = []
        for s, kind in zip(slots, head.kinds):
            if (s.bundle is None) != (kind is None):
                raise MalformedIndex(f"index {s.label!r} of {name} has the wrong kind "
                                     f"(position {t.pos})")
            fixed.append(Slot(s.label, s.up, kind))
        for s in cov:
            if s.bundle is not None or s.up:
                raise VarianceError(f"covariant derivative index {s.label!r} must be a lower "
                                    "coordinate index")
        if cov and not head.position_only:
            raise ArityError(f"{name} cannot carry ';' derivatives")
        f = Factor(head, tuple(fixed), tuple(cov), csym=norm_sym(csym, len(cov)))
        check_factor_indices(f)
        return TensorExpr.from_factors((f,))


def check_factor_indices(f: Factor) -> None:
    seen: dict = {}
    for s in f.all_slots():
        if s.label in seen:
            other = seen[s.label]
            if other.up == s.up:
                raise UnbalancedIndex(f"index {s.label!r} repeated with the same variance")
            if other.bundle != s.bundle:
                raise MalformedIndex(f"index {s.label!r} contracts different kinds")
        seen[s.label] = s
    c = Counter(s.label for s in f.all_slots())
    for label, n in c.items():
        if n > 2:
            raise MalformedIndex(f"index {label!r} appears {n} times")


def check_term_indices(e: TensorExpr) -> None:
    for factors, *_ in e.items():
        seen: dict = {}
        for f in factors:
            for s in f.all_slots():
                seen.setdefault(s.label, []).append(s)
        for label, slots in seen.items():
            if len(slots) > 2:
                raise MalformedIndex(f"index {label!r} appears {len(slots)} times")
            if len(slots) == 2:
                a, b = slots
                if a.up is not None and a.up == b.up:
                    raise UnbalancedIndex(f"index {label!r} repeated with the same variance")
                if a.bundle != b.bundle:
                    raise MalformedIndex(f"index {label!r} contracts different kinds")


def parse_expr(src: str, ctx: Optional[Context] = None) -> TensorExpr:
    """Parse expression text into a TensorExpr (not canonicalized)."""
    e = Parser(src, ctx).parse()
    check_term_indices(e)
    return e
