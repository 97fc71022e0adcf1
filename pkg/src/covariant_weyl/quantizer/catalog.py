"""Catalog of physical operators with their printed Weyl symbols.

Each entry stores the operator as its action on a test section (text grammar)
and the expected symbol.  ``verify_catalog`` dequantizes the operator and
compares, and for the wave operator also composes first-order factors with the
star product.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from ..expr_lang.context import Context
from ..expr_lang.parser import parse_expr
from ..expr_lang.printer import to_text
from ..expr_lang.wsym import context_from, expr_from_obj, symbol_from_obj, symbol_to_obj
from ..report import VerificationReport
from ..symbol_calculus.symbols import BundleSignature, GradedSymbol
from ..tensor_core.canonical import canonicalize
from ..tensor_core.errors import TensorError
from ..tensor_core.expr import TensorExpr
from ..tensor_core.heads import Slot
from ..tensor_core.identities import equal_mod_identities, substitute_head, symmetrize
from .operators import SecondOrderOperator, dequantize, from_action


class UnknownName(TensorError, KeyError):
    pass


class MissingParam(TensorError, KeyError):
    pass


NAMES = ("wave", "dirac", "maxwell", "yang_mills", "einstein_lin")

ANTISYM_LAST2 = [[[0, 2, 1], -1]]
SWAP = [[[1, 0], 1]]


def _c(label, up, bundle=None):
    return {"label": label, "up": up, "bundle": bundle}


# Each definition: declarations, section head, signature, operator action,
# expected symbol, optional rewrite rules ("substitute head by source") applied
# to both sides, and the free pairs to symmetrize before comparing.
DEFINITIONS = {
    "wave": {
        "declarations": [{"name": "phi", "kind": "tensor", "kinds": []}],
        "section": "phi",
        "signature": {"codomain": [], "domain": []},
        "operator": "g_inv[^m ^n] * phi[; _n _m]",
        "symbol": "-eps^-2 * g_inv[^m ^n] * p[_m] * p[_n] + gamma/3 * RicciScalar",
    },
    "dirac": {
        "declarations": [
            {"name": "GammaMatrix", "kind": "tensor", "kinds": ["S", "S", None],
             "n_cod": 1, "n_dom": 1, "parallel": True, "conj": "dagger"},
            {"name": "mass", "kind": "tensor", "kinds": [], "parallel": True},
            {"name": "psi", "kind": "tensor", "kinds": ["S"]},
        ],
        "section": "psi",
        "signature": {"codomain": [_c("A", True, "S")], "domain": [_c("B", False, "S")]},
        "operator": "i * eps * GammaMatrix[^^A __B ^m] * psi[^^B ; _m] - mass * psi[^^A]",
        "symbol": "-GammaMatrix[^^A __B ^m] * p[_m] - mass * delta.S[^^A __B]",
    },
    "maxwell": {
        "declarations": [{"name": "phi", "kind": "tensor", "kinds": [None]}],
        "section": "phi",
        "signature": {"codomain": [_c("a", False)], "domain": [_c("b", True)]},
        "operator": "g_inv[^b ^k] * phi[_b ; _a _k] - g_inv[^k ^l] * phi[_a ; _l _k]",
        "symbol": ("-eps^-2 * (p[^b] * p[_a] - delta[^b _a] * g_inv[^k ^l] * p[_k] * p[_l])"
                   " + 1/3 * ((3 + 2*gamma)/2 * Ricci[_a ^b]"
                   " - gamma * RicciScalar * delta[^b _a])"),
    },
    "yang_mills": {
        "declarations": [
            {"flat": ["g"]},
            {"name": "f", "kind": "tensor", "kinds": ["g", "g", "g"], "parallel": True,
             "symmetry": ANTISYM_LAST2},
            {"name": "gauge_field", "kind": "tensor", "kinds": ["g", None]},
            {"name": "field_strength", "kind": "tensor", "kinds": ["g", None, None],
             "symmetry": ANTISYM_LAST2},
            {"name": "phi", "kind": "tensor", "kinds": ["g", None]},
        ],
        "section": "phi",
        "signature": {"codomain": [_c("A", True, "g"), _c("a", False)],
                      "domain": [_c("B", False, "g"), _c("b", True)]},
        "operator": (
            "-g_inv[^k ^l] * phi[^^A _a ; _l _k] + g_inv[^c ^k] * phi[^^A _c ; _a _k]"
            " + f[^^A __B __C] * (2 * gauge_field[^^C ^k] * phi[^^B _a ; _k]"
            "   - gauge_field[^^C _a] * g_inv[^c ^k] * phi[^^B _c ; _k]"
            "   - gauge_field[^^C ^c] * phi[^^B _c ; _a])"
            " + f[^^A __B __C] * (gauge_field[^^C ^k ; _k] * phi[^^B _a]"
            "   - g_inv[^c ^k] * gauge_field[^^C _a ; _k] * phi[^^B _c])"
            " + f[^^A __B __C] * field_strength[^^C _a _k] * g_inv[^k ^c] * phi[^^B _c]"
            " + f[^^A __D __E] * f[^^E __B __C] * (gauge_field[^^D ^k] * gauge_field[^^C _k]"
            "   * phi[^^B _a] - gauge_field[^^D ^c] * gauge_field[^^C _a] * phi[^^B _c])"),
        "symbol": (
            "-eps^-2 * delta.g[^^A __B] * (p[^b] * p[_a] - delta[^b _a] * g_inv[^k ^l]"
            "   * p[_k] * p[_l])"
            " + 1/3 * delta.g[^^A __B] * ((3 + 2*gamma)/2 * Ricci[_a ^b]"
            "   - gamma * RicciScalar * delta[^b _a])"
            " + i * eps^-1 * f[^^A __B __C] * (2 * delta[^b _a] * gauge_field[^^C ^k] * p[_k]"
            "   - gauge_field[^^C _a] * p[^b] - gauge_field[^^C ^b] * p[_a])"
            " + 3/2 * f[^^A __B __C] * field_strength[^^C _a _k] * g_inv[^k ^b]"
            " - 1/2 * f[^^A __B __C] * f[^^C __D __E] * gauge_field[^^D _a]"
            "   * gauge_field[^^E ^b]"
            " + f[^^A __D __E] * f[^^E __B __C] * (delta[^b _a] * gauge_field[^^D ^k]"
            "   * gauge_field[^^C _k] - gauge_field[^^D ^b] * gauge_field[^^C _a])"),
        # field strength of the background potential
        "rewrite": {
            "field_strength": {
                "pattern": ["C", "x", "y"],
                "source": ("gauge_field[^^C _y ; _x] - gauge_field[^^C _x ; _y]"
                           " + f[^^C __D __E] * gauge_field[^^D _x] * gauge_field[^^E _y]"),
            }
        },
    },
    "einstein_lin": {
        "declarations": [
            {"name": "LambdaRed", "kind": "tensor", "kinds": [], "parallel": True},
            {"name": "h", "kind": "tensor", "kinds": [None, None], "symmetry": SWAP},
        ],
        "section": "h",
        "signature": {"codomain": [_c("a", False), _c("b", False)],
                      "domain": [_c("s", True), _c("d", True)]},
        "operator": (
            "g_inv[^k ^l] * h[_a _b ; _l _k] + 4 * LambdaRed * h[_a _b]"
            " - g_inv[^s ^k] * h[_s _a ; _b _k] - g_inv[^s ^k] * h[_s _b ; _a _k]"
            " + g_inv[^s ^d] * h[_s _d ; _b _a]"
            " + g[_a _b] * g_inv[^s ^k] * g_inv[^d ^l] * h[_s _d ; _l _k]"
            " - g[_a _b] * g_inv[^s ^d] * (g_inv[^k ^l] * h[_s _d ; _l _k]"
            "   + 2 * LambdaRed * h[_s _d])"),
        "symbol": (
            "-eps^-2 * (delta[^s _a] * delta[^d _b] * g_inv[^k ^l] * p[_k] * p[_l]"
            "   - g[_a _b] * g_inv[^s ^d] * g_inv[^k ^l] * p[_k] * p[_l]"
            "   + g_inv[^s ^d] * p[_a] * p[_b] + g[_a _b] * p[^s] * p[^d]"
            "   - delta[^d _a] * p[^s] * p[_b] - delta[^d _b] * p[^s] * p[_a])"
            " + gamma/3 * RicciScalar * (delta[^s _a] * delta[^d _b]"
            "   - g[_a _b] * g_inv[^s ^d])"
            " + gamma/3 * (g_inv[^s ^d] * Ricci[_a _b] + g[_a _b] * Ricci[^s ^d])"
            " - (3 + 2*gamma)/6 * (delta[^d _b] * Ricci[_a ^s] + delta[^d _a] * Ricci[_b ^s])"
            " + 1/2 * (Riemann[^d _b ^s _a] + Riemann[^d _a ^s _b])"
            " + 4 * LambdaRed * (delta[^s _a] * delta[^d _b] - 1/2 * g[_a _b] * g_inv[^s ^d])"),
        "symmetrize": [["s", "d"], ["a", "b"]],
        "assumptions": ["vacuum background with cosmological constant; "
                        "LambdaRed stands for Lambda/(d-2) and is not eliminated"],
    },
}


@dataclass
class CatalogEntry:
    name: str
    operator: SecondOrderOperator
    symbol: GradedSymbol
    context: Context
    action: TensorExpr
    assumptions: list = field(default_factory=list)
    rewrite: dict = field(default_factory=dict)
    symmetrize: list = field(default_factory=list)


def _signature(d: dict, flat) -> BundleSignature:
    mk = lambda xs: tuple(Slot(x["label"], x["up"], x.get("bundle")) for x in xs)
    return BundleSignature(mk(d["codomain"]), mk(d["domain"]), frozenset(flat))


def _apply_params(name: str, e: TensorExpr, params: dict) -> TensorExpr:
    if name == "dirac" and "mass" in params:
        return canonicalize(substitute_head(e, "mass", TensorExpr.scalar(Fraction(params["mass"]))))
    if name == "einstein_lin" and ("Lambda" in params or "d" in params):
        if "Lambda" not in params or "d" not in params:
            raise MissingParam("einstein_lin needs both 'Lambda' and 'd'")
        d = int(params["d"])
        if d <= 2:
            raise ValueError("einstein_lin needs d > 2")
        value = Fraction(params["Lambda"]) / (d - 2)
        return canonicalize(substitute_head(e, "LambdaRed", TensorExpr.scalar(value)))
    if name == "yang_mills" and (params.get("abelian") or params.get("f") == 0):
        return canonicalize(substitute_head(e, "f", None))
    return e


def catalog(name: str, gamma=None, params: Optional[dict] = None) -> CatalogEntry:
    """Operator and expected symbol of a catalog entry (gamma None: symbolic)."""
    if name not in DEFINITIONS:
        raise UnknownName(name)
    params = dict(params or {})
    d = DEFINITIONS[name]
    obj = {"version": 1, "declarations": d["declarations"]}
    ctx = context_from(obj)
    sig = _signature(d["signature"], ctx.flat)
    action = _apply_params(name, canonicalize(parse_expr(d["operator"], ctx)), params)
    sym = _apply_params(name, canonicalize(parse_expr(d["symbol"], ctx)), params)
    if gamma is not None:
        sym = sym.substitute_gamma(Fraction(gamma))
    op = from_action(action, d["section"], sig)
    return CatalogEntry(name, op, GradedSymbol(sym, sig), ctx, action,
                        list(d.get("assumptions", [])), dict(d.get("rewrite", {})),
                        list(d.get("symmetrize", [])))


def _normalize(entry: CatalogEntry, e: TensorExpr) -> TensorExpr:
    for head, rule in entry.rewrite.items():
        rep = parse_expr(rule["source"], entry.context)
        e = substitute_head(e, head, rep, rule["pattern"])
    for pair in entry.symmetrize:
        e = symmetrize(e, pair)
    return canonicalize(e)


def compare_symbols(entry: CatalogEntry, got: TensorExpr, want: TensorExpr):
    flat = entry.symbol.flat
    return equal_mod_identities(_normalize(entry, got), _normalize(entry, want), flat)


def star_route_wave(gamma=None) -> TensorExpr:
    """Wave symbol as the star product of (i/eps) p^m and (i/eps) p_m."""
    from ..star_engine.star import StarOptions, star

    ctx = Context()
    a = GradedSymbol(parse_expr("i * eps^-1 * p[^m]", ctx),
                     BundleSignature((), (Slot("m", True),)))
    b = GradedSymbol(parse_expr("i * eps^-1 * p[_m]", ctx),
                     BundleSignature((Slot("m", False),), ()))
    opts = StarOptions(max_order=3, gamma=None if gamma is None else Fraction(gamma))
    return canonicalize(star(a, b, opts).expr)


def verify_catalog(name: str, gamma=None, params: Optional[dict] = None,
                   expected: Optional[GradedSymbol] = None) -> VerificationReport:
    """Dequantize route (and star route for the wave operator) against the printed symbol.

    ``expected`` overrides the stored symbol, e.g. with a fixture read from disk.
    """
    entry = catalog(name, gamma, params)
    want = entry.symbol.expr if expected is None else expected.expr
    rep = VerificationReport(f"catalog:{name}", config={
        "gamma": "symbolic" if gamma is None else str(Fraction(gamma)),
        "params": {k: str(v) for k, v in sorted((params or {}).items())},
        "assumptions": entry.assumptions})
    got = dequantize(entry.operator, gamma).expr
    chk = compare_symbols(entry, got, want)
    rep.add("dequantize", chk.equal, witness=None if chk.equal else to_text(chk.witness),
            details={"symbol": to_text(canonicalize(got))})
    if name == "wave":
        sr = star_route_wave(gamma)
        higher = TensorExpr.from_items((fs, i, e, p) for fs, i, e, p in sr.items() if e > 0)
        chk2 = compare_symbols(entry, sr - higher, want)
        rep.add("star_route", chk2.equal and higher.is_zero(),
                witness=None if chk2.equal else to_text(chk2.witness),
                details={"symbol": to_text(sr), "eps3_terms": len(higher)})
    return rep


def fixture_obj(name: str) -> dict:
    """JSON object of the shipped fixture for a catalog entry."""
    d = DEFINITIONS[name]
    entry = catalog(name)
    obj = symbol_to_obj(entry.symbol, source=d["symbol"], declarations=d["declarations"])
    obj["operator"] = {"section": d["section"], "source": d["operator"]}
    if "rewrite" in d:
        obj["rewrite"] = d["rewrite"]
    if "symmetrize" in d:
        obj["symmetrize"] = d["symmetrize"]
    if "assumptions" in d:
        obj["assumptions"] = d["assumptions"]
    obj["name"] = name
    return obj


def write_fixtures(directory) -> list:
    out = []
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name in NAMES:
        path = directory / f"{name}.wsym"
        path.write_text(json.dumps(fixture_obj(name), sort_keys=True, indent=1) + "\n")
        out.append(path)
    return out


def load_fixture(path) -> GradedSymbol:
    obj = json.loads(Path(path).read_text())
    return symbol_from_obj(obj)


def fixture_operator(path) -> TensorExpr:
    obj = json.loads(Path(path).read_text())
    return expr_from_obj({"version": obj["version"], "declarations": obj.get("declarations", []),
                          "source": obj["operator"]["source"]})
