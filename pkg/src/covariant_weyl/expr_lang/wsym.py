"""``.wsym`` files: versioned JSON for expressions and symbols.

A file either carries canonical ``terms`` (with a ``heads`` map describing
every head), or an authoring form with ``declarations`` and ``source`` text in
the expression grammar.  When both are present ``terms`` wins and
``check_wsym_consistency`` can compare the two.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

from ..tensor_core.canonical import canonicalize
from ..tensor_core.coefficient import Coefficient
from ..tensor_core.expr import TensorExpr
from ..tensor_core.heads import Factor, HeadInfo, Slot, declare_symbol, declare_tensor
from .context import BUILTIN, Context, UnknownHead
from .parser import parse_expr
from .printer import JSON_VERSION, to_json_obj


class WsymError(ValueError):
    pass


def _slot(d) -> Slot:
    return Slot(d["label"], d["up"], d.get("bundle"))


def _slot_json(s: Slot) -> dict:
    return {"label": s.label, "up": s.up, "bundle": s.bundle}


def _head(name: str, info: Optional[dict], ctx: Context) -> HeadInfo:
    base = name.split(".")[0]
    if name in BUILTIN or base in ("BundleCurv", "delta", "rank"):
        return ctx.lookup(name)
    if info is None:
        try:
            return ctx.lookup(name)
        except UnknownHead:
            raise WsymError(f"no description for head {name!r}") from None
    sym = tuple((tuple(p), s) for p, s in info.get("symmetry", []))
    return HeadInfo(name, tuple(info["kinds"]), info["role"], sym, info.get("n_cod", 0),
                    info.get("n_dom", 0), info.get("conj", "real"),
                    info.get("parallel", False), info.get("rank", 1))


def _declare(ctx: Context, d: dict) -> None:
    sym = tuple((tuple(p), s) for p, s in d.get("symmetry", []))
    if d.get("flat"):
        for b in d["flat"]:
            ctx.add_bundle(b, flat=True)
    if "name" not in d:
        return
    if d.get("kind", "tensor") == "symbol":
        ctx.declare(declare_symbol(d["name"], tuple(d.get("codomain", ())),
                                   tuple(d.get("domain", ())), tuple(d.get("extra", ())), sym))
    else:
        ctx.declare(declare_tensor(d["name"], tuple(d.get("kinds", ())), sym,
                                   d.get("n_cod", 0), d.get("n_dom", 0),
                                   d.get("conj", "real"), d.get("parallel", False)))


def context_from(obj: dict, ctx: Optional[Context] = None) -> Context:
    ctx = ctx.copy() if ctx else Context()
    for d in obj.get("declarations", []):
        _declare(ctx, d)
    for name, info in obj.get("heads", {}).items():
        if name not in BUILTIN and name.split(".")[0] not in ("BundleCurv", "delta", "rank"):
            ctx.absorb([_head(name, info, ctx)])
    return ctx


def expr_from_terms(obj: dict, ctx: Context) -> TensorExpr:
    heads = obj.get("heads", {})
    items = []
    for t in obj["terms"]:
        c = t["coeff"]
        coeff = Coefficient(Fraction(c.get("rat", "1")), c.get("i", 0), c.get("eps", 0),
                            tuple(Fraction(x) for x in c.get("gamma", ["1"])))
        fl = []
        for f in t["factors"]:
            h = _head(f["head"], heads.get(f["head"]), ctx)
            fl.append(Factor(h, tuple(_slot(s) for s in f["slots"]),
                             tuple(_slot(s) for s in f.get("cov", [])),
                             tuple(_slot(s) for s in f.get("h", [])),
                             tuple(_slot(s) for s in f.get("v", [])),
                             f.get("hsym", 0), f.get("csym", 0)))
        items.append((tuple(fl), coeff.i_power, coeff.eps_power, coeff.poly))
    return TensorExpr.from_items(items)


def expr_from_obj(obj: dict, ctx: Optional[Context] = None) -> TensorExpr:
    if obj.get("version") != JSON_VERSION:
        raise WsymError(f"unsupported version {obj.get('version')!r}")
    ctx = context_from(obj, ctx)
    if "terms" in obj:
        return expr_from_terms(obj, ctx)
    if "source" in obj:
        return parse_expr(obj["source"], ctx)
    raise WsymError("neither 'terms' nor 'source' present")


def signature_json(sig) -> dict:
    return {"codomain": [_slot_json(s) for s in sig.codomain],
            "domain": [_slot_json(s) for s in sig.domain], "flat": sorted(sig.flat)}


def symbol_to_obj(s, source: Optional[str] = None, declarations=None) -> dict:
    extra = {"signature": signature_json(s.signature),
             "extra": [_slot_json(x) for x in s.extra]}
    if s.max_order is not None:
        extra["max_order"] = s.max_order
    if source is not None:
        extra["source"] = source
    if declarations is not None:
        extra["declarations"] = declarations
    return to_json_obj(s.expr, "symbol", extra)


def symbol_from_obj(obj: dict, ctx: Optional[Context] = None):
    from ..symbol_calculus.symbols import BundleSignature, GradedSymbol

    e = expr_from_obj(obj, ctx)
    sig = obj.get("signature", {})
    flat = frozenset(sig.get("flat", ())) | frozenset(context_from(obj, ctx).flat)
    bs = BundleSignature(tuple(_slot(x) for x in sig.get("codomain", [])),
                         tuple(_slot(x) for x in sig.get("domain", [])), flat)
    return GradedSymbol(e, bs, tuple(_slot(x) for x in obj.get("extra", [])),
                        obj.get("max_order"))


def load(path: Union[str, Path], ctx: Optional[Context] = None):
    """Read a ``.wsym`` file: a GradedSymbol for kind 'symbol', else a TensorExpr."""
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise WsymError(f"{path}: not valid JSON ({exc})") from None
    if obj.get("kind") == "symbol":
        return symbol_from_obj(obj, ctx)
    return expr_from_obj(obj, ctx)


def dump(obj_or_value, path: Union[str, Path]) -> None:
    from ..symbol_calculus.symbols import GradedSymbol

    if isinstance(obj_or_value, GradedSymbol):
        obj = symbol_to_obj(obj_or_value)
    elif isinstance(obj_or_value, TensorExpr):
        obj = to_json_obj(obj_or_value)
    else:
        obj = obj_or_value
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")


def check_wsym_consistency(obj: dict, ctx: Optional[Context] = None) -> bool:
    """True when the stored terms equal the canonicalized parse of the source."""
    c = context_from(obj, ctx)
    a = canonicalize(expr_from_terms(obj, c))
    b = canonicalize(parse_expr(obj["source"], c))
    return (a - b).is_zero() or canonicalize(a - b).is_zero()
