"""Printers for TensorExpr: canonical text, LaTeX and JSON.

Coordinate dummies are stored without variance.  Printers choose one: momentum,
horizontal and ``;`` slots print lower, vertical slots upper, the first Riemann
slot upper; when both ends of a contraction want the same variance, an
explicit metric factor is inserted in front of the term.
"""

from __future__ import annotations

import json
from fractions import Fraction

from ..tensor_core.expr import TensorExpr, fresh_names, term_labels
from ..tensor_core.heads import METRIC, MOMENTUM, RIEMANN, Factor, Slot
from .context import head_name_in_text

JSON_VERSION = 1

GREEK = ["mu", "nu", "alpha", "beta", "rho", "sigma", "lambda", "kappa", "tau", "eta", "xi",
         "zeta", "theta", "chi", "omega", "pi", "phi", "psi", "iota", "upsilon"]
LATIN_BUNDLE = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _preferred(f: Factor, pos: int) -> bool:
    nb, nc, nh = len(f.slots), len(f.cov), len(f.h)
    if pos < nb:
        if f.head is RIEMANN:
            return pos == 0
        if f.head is METRIC:
            return True
        return False
    if pos < nb + nc + nh:
        return False
    return True


def resolve_variances(factors: tuple) -> tuple:
    """Give every coordinate dummy an explicit variance, inserting metrics as needed."""
    counts = term_labels(factors)
    gen = fresh_names(set(counts), "d")
    places: dict = {}
    for j, f in enumerate(factors):
        for k, s in enumerate(f.all_slots()):
            if counts[s.label] == 2 and s.bundle is None:
                places.setdefault(s.label, []).append((j, k))
    seqs = [list(f.all_slots()) for f in factors]
    metrics = []
    for label, ((j1, k1), (j2, k2)) in places.items():
        s1, s2 = seqs[j1][k1], seqs[j2][k2]
        u1 = s1.up if s1.up is not None else (None if s2.up is None else not s2.up)
        u2 = s2.up if s2.up is not None else (None if u1 is None else not u1)
        if u1 is None:
            u1 = _preferred(factors[j1], k1)
            u2 = _preferred(factors[j2], k2)
        if u1 != u2:
            seqs[j1][k1] = Slot(label, u1)
            seqs[j2][k2] = Slot(label, u2)
            continue
        y = next(gen)
        seqs[j1][k1] = Slot(label, u1)
        seqs[j2][k2] = Slot(y, u2)
        metrics.append(Factor(METRIC, (Slot(label, not u1), Slot(y, not u2))))
    out = tuple(metrics) + tuple(f.split(seq) for f, seq in zip(factors, seqs))
    return out


# ----------------------------------------------------------------------------- text

def _slot_text(s: Slot) -> str:
    mark = ("^" if s.up else "_") if s.up is not None else "_"
    if s.bundle is not None:
        mark = mark * 2
    return mark + s.label


def _slots_text(slots) -> str:
    return " ".join(_slot_text(s) for s in slots)


def factor_text(f: Factor) -> str:
    ups = tuple(s.up for s in f.slots) if f.head is METRIC else None
    name = head_name_in_text(f.head, ups)
    inner = _slots_text(f.slots)
    if f.cov:
        if f.csym:
            cov = "(" + _slots_text(f.cov[:f.csym]) + ")"
            if f.cov[f.csym:]:
                cov += " " + _slots_text(f.cov[f.csym:])
        else:
            cov = _slots_text(f.cov)
        inner = (inner + " ; " if inner else "; ") + cov
    text = f"{name}[{inner}]" if inner or f.head.arity else name
    if f.hsym:
        text = f"HS({_slots_text(f.h[:f.hsym])}, {text})"
    for s in f.h[f.hsym:]:
        text = f"H({_slot_text(s)}, {text})"
    for s in f.v:
        text = f"V({_slot_text(s)}, {text})"
    return text


def _frac_text(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _coeff_parts(c: Fraction, i: int, e: int, g: int) -> list:
    parts = []
    if abs(c) != 1:
        parts.append(_frac_text(abs(c)))
    if i:
        parts.append("i")
    if e:
        parts.append("eps" if e == 1 else f"eps^{e}")
    if g:
        parts.append("gamma" if g == 1 else f"gamma^{g}")
    return parts


def _term_rows(e: TensorExpr):
    rows = []
    for factors, i, ep, p in e.items():
        shown = resolve_variances(factors)
        for g, c in enumerate(p):
            if c:
                rows.append((ep, g, i, c, shown))
    return rows


def to_text(e: TensorExpr) -> str:
    """Canonical text; parses back to the same expression after canonicalize."""
    rows = []
    for ep, g, i, c, shown in _term_rows(e):
        parts = _coeff_parts(c, i, ep, g) + [factor_text(f) for f in shown]
        body = " * ".join(parts) if parts else "1"
        rows.append(((ep, g, i, body), c < 0, body))
    if not rows:
        return "0"
    rows.sort()
    out = []
    for n, (_, neg, body) in enumerate(rows):
        if n == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


# ----------------------------------------------------------------------------- latex

_LATEX_HEADS = {"Riemann": "R", "Ricci": "R", "RicciScalar": "R", "p": "p", "dim": "d"}


def _latex_head(f: Factor) -> str:
    name = f.head.name
    if f.head is METRIC:
        ups = [s.up for s in f.slots]
        return r"\delta" if ups[0] != ups[1] else "g"
    if name in _LATEX_HEADS:
        return _LATEX_HEADS[name]
    base, _, bundle = name.partition(".")
    if base == "BundleCurv":
        return "F"
    if base == "delta":
        return r"\delta"
    if base == "rank":
        return rf"\mathrm{{rank}}\,{bundle}"
    dag = name.endswith("~")
    base = name.rstrip("~")
    if len(base) > 1:
        base = rf"\mathrm{{{base}}}"
    return base + (r"^\dagger" if dag else "")


def _latex_label(label: str, names: dict) -> str:
    return names.get(label, label)


def _latex_indices(groups: list) -> str:
    """groups: (up, index text) pairs; consecutive equal variances share a block."""
    merged: list = []
    for up, txt in groups:
        if merged and merged[-1][0] == up:
            merged[-1][1].append(txt)
        else:
            merged.append((up, [txt]))
    out = []
    for n, (up, items) in enumerate(merged):
        body = "".join(items)
        bare = len(items) == 1 and (len(body) == 1 or (body.startswith("\\") and body[1:].isalpha()))
        block = ("^" if up else "_") + (body if bare else "{" + body + "}")
        out.append(("{}" if n else "") + block)
    return "".join(out)


def factor_latex(f: Factor, names: dict) -> str:
    head = _latex_head(f)
    groups = []
    for s in f.slots:
        groups.append((bool(s.up), _latex_label(s.label, names)))
    for k, s in enumerate(f.cov):
        txt = _latex_label(s.label, names)
        groups.append((bool(s.up), (";" if k == 0 else "") + txt))
    for s in f.h:
        groups.append((False, _latex_label(s.label, names)))
    for s in f.v:
        groups.append((True, _latex_label(s.label, names)))
    return head + _latex_indices(groups)


def _power(sym: str, k: int) -> str:
    if k == 1:
        return sym
    return f"{sym}^{k}" if k < 10 else f"{sym}^{{{k}}}"


def _latex_coeff(c: Fraction, i: int, e: int, g: int) -> str:
    a = abs(c)
    num = (["i"] if i else []) + ([_power(r"\gamma", g)] if g else []) + \
        ([_power(r"\epsilon", e)] if e > 0 else [])
    den = ([str(a.denominator)] if a.denominator != 1 else []) + \
        ([_power(r"\epsilon", -e)] if e < 0 else [])
    if num:
        top = " ".join(([str(a.numerator)] if a.numerator != 1 else []) + num)
    else:
        top = str(a.numerator)
    if den:
        return rf"\frac{{{top}}}{{{' '.join(den)}}}"
    return "" if top == "1" else top


def to_latex(e: TensorExpr) -> str:
    rows = []
    for ep, g, i, c, shown in _term_rows(e):
        counts = term_labels(shown)
        names: dict = {}
        greek = iter(GREEK)
        latin = iter(ch for ch in LATIN_BUNDLE if ch not in counts)
        for f in shown:
            for s in f.all_slots():
                if counts[s.label] == 2 and s.label not in names:
                    names[s.label] = ("\\" + next(greek)) if s.bundle is None else next(latin)
        body_f = " ".join(factor_latex(f, names) for f in shown)
        coeff = _latex_coeff(c, i, ep, g)
        body = " ".join(x for x in (coeff, body_f) if x) or "1"
        rows.append(((ep, g, i, body), c < 0, body))
    if not rows:
        return "0"
    rows.sort()
    out = []
    for n, (_, neg, body) in enumerate(rows):
        if n == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


# ----------------------------------------------------------------------------- json

def _slot_json(s: Slot) -> dict:
    return {"label": s.label, "up": s.up, "bundle": s.bundle}


def head_json(h) -> dict:
    return {"kinds": list(h.kinds), "role": h.role,
            "symmetry": [[list(p), s] for p, s in h.symmetry],
            "n_cod": h.n_cod, "n_dom": h.n_dom, "conj": h.conj, "parallel": h.parallel,
            "rank": h.rank}


def to_json_obj(e: TensorExpr, kind: str = "expr", extra: dict | None = None) -> dict:
    terms = []
    heads = {}
    for coeff, factors in e.terms():
        fl = []
        for f in factors:
            heads[f.head.name] = head_json(f.head)
            fl.append({"head": f.head.name, "slots": [_slot_json(s) for s in f.slots],
                       "cov": [_slot_json(s) for s in f.cov], "h": [_slot_json(s) for s in f.h],
                       "v": [_slot_json(s) for s in f.v], "hsym": f.hsym, "csym": f.csym})
        terms.append({"coeff": {"rat": _frac_text(coeff.rational), "i": coeff.i_power,
                                "eps": coeff.eps_power,
                                "gamma": [_frac_text(x) for x in coeff.gamma_poly]},
                      "factors": fl})
    terms.sort(key=lambda t: json.dumps(t, sort_keys=True))
    obj = {"version": JSON_VERSION, "kind": kind, "terms": terms, "heads": heads}
    if extra:
        obj.update(extra)
    return obj


def to_json(e: TensorExpr, kind: str = "expr", extra: dict | None = None) -> str:
    return json.dumps(to_json_obj(e, kind, extra), sort_keys=True, indent=1)


def print_expr(e: TensorExpr, fmt: str = "text") -> str:
    if fmt in ("text", "canonical-text"):
        return to_text(e)
    if fmt == "latex":
        return to_latex(e)
    if fmt == "json":
        return to_json(e)
    raise ValueError(f"unknown format {fmt!r}")
