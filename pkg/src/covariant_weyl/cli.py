"""Command-line front end: symbol operations and verification suites.

Exit status: 0 when every check passes, 1 on a verification failure, 2 on a
usage, input or parse error.  Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import settings
from .report import REPORT_VERSION, VerificationReport

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
GAMMA_HELP = "van Vleck exponent: a rational such as 1/2, or 'symbolic' (default)"
IDENTITY_CHECKS = ("adjoint", "associativity", "associativity-bundle", "degree", "star-route")
MOYAL_CASES = ("all", "onshell", "offshell", "wkb", "hermiticity")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ----------------------------------------------------------------------------- argument helpers

def _gamma(text: str):
    if text == "symbolic":
        return None
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational or 'symbolic': {text!r}") from None


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def _vector(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from None


def _param(text: str) -> tuple:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value: {text!r}")
    return key, value


def _gamma_text(g) -> str:
    return "symbolic" if g is None else str(g)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "json"), default="text",
                   help="output format (default: text)")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="covariant-weyl",
                  description="Covariant Weyl symbol calculus on curved backgrounds with "
                              "bundle-valued symbols.",
                  epilog=f"Tolerances may be overridden through {settings.ENV_PREFIX}<NAME> "
                         f"environment variables, NAME in {', '.join(settings.DEFAULTS)}.")
    sub = top.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    for name, text in (("star", "star product a * b, order by order"),
                       ("bracket", "Moyal bracket a * b - b * a")):
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("-a", required=True, metavar="FILE", help="left symbol (.wsym)")
        p.add_argument("-b", required=True, metavar="FILE", help="right symbol (.wsym)")
        p.add_argument("--order", type=int, default=3, help="highest eps order, 0..3 (default 3)")
        p.add_argument("--gamma", type=_gamma, default=None, help=GAMMA_HELP)
        p.add_argument("--flat", action="store_true",
                       help="set Riemann and every bundle curvature to zero")
        p.add_argument("-o", "--output", metavar="FILE", help="also write the result as .wsym")
        _common(p)

    p = sub.add_parser("tau-shift", help="rewrite a sigma-symbol as a tau-symbol",
                       description="Symbol of the same operator in another quantization.")
    p.add_argument("-a", required=True, metavar="FILE", help="symbol (.wsym)")
    p.add_argument("--sigma", type=_rational, required=True, help="source ordering parameter")
    p.add_argument("--tau", type=_rational, required=True, help="target ordering parameter")
    p.add_argument("--gamma", type=_gamma, default=None, help="target exponent; " + GAMMA_HELP)
    p.add_argument("--gamma-prime", type=_gamma, default=None,
                   help="source exponent; " + GAMMA_HELP)
    p.add_argument("--order", type=int, default=2, help="highest eps order, 0..2 (default 2)")
    p.add_argument("-o", "--output", metavar="FILE", help="also write the result as .wsym")
    _common(p)

    p = sub.add_parser("adjoint", help="adjoint symbol",
                       description="Adjoint of a symbol with respect to the fiber metrics.")
    p.add_argument("-a", required=True, metavar="FILE", help="symbol (.wsym)")
    p.add_argument("-o", "--output", metavar="FILE", help="also write the result as .wsym")
    _common(p)

    p = sub.add_parser("quantize", help="second-order operator of a polynomial symbol",
                       description="Operator of a symbol of p-degree at most 2, written as "
                                   "its action on a test section.")
    p.add_argument("-a", required=True, metavar="FILE", help="symbol (.wsym)")
    p.add_argument("--gamma", type=_gamma, default=None, help=GAMMA_HELP)
    p.add_argument("--section", default="phi", help="name of the test section (default phi)")
    p.add_argument("-o", "--output", metavar="FILE",
                   help="also write an operator file readable by 'dequantize'")
    _common(p)

    p = sub.add_parser("dequantize", help="symbol of a second-order operator",
                       description="Weyl symbol of an operator given by its action on a "
                                   "test section.")
    p.add_argument("--operator", required=True, metavar="FILE",
                   help="operator file: declarations, signature and "
                        "operator = {section, source} (catalog fixtures qualify)")
    p.add_argument("--gamma", type=_gamma, default=None, help=GAMMA_HELP)
    p.add_argument("-o", "--output", metavar="FILE", help="also write the result as .wsym")
    _common(p)

    p = sub.add_parser("catalog", help="operator catalog", description="Catalog operators "
                       "and their symbols.")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--list", action="store_true", help="list catalog names")
    g.add_argument("--name", help="show one entry")
    g.add_argument("--write-fixtures", metavar="DIR", help="write every entry as .wsym into DIR")
    p.add_argument("--gamma", type=_gamma, default=None, help=GAMMA_HELP)
    p.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE",
                   help="entry parameter, e.g. mass=1, Lambda=1 with d=4, abelian=1")
    _common(p)

    p = sub.add_parser("verify", help="run a verification suite",
                       description="Verification suites; exit 1 if any check fails.")
    vs = p.add_subparsers(dest="suite", metavar="SUITE", parser_class=_Parser)
    vs.required = True

    q = vs.add_parser("identities", help="symbolic identities of the star product")
    q.add_argument("--check", choices=IDENTITY_CHECKS + ("all",), default="all",
                   help="which identity (default all)")
    q.add_argument("--max-order", type=int, default=3, help="highest eps order (default 3)")
    q.add_argument("--cases", type=int, default=200, help="random cases for 'degree' (default 200)")
    q.add_argument("--seed", type=int, default=0, help="random seed for 'degree' (default 0)")
    q.add_argument("--gamma", type=_gamma, default=None, help="for 'star-route'; " + GAMMA_HELP)
    _common(q)

    q = vs.add_parser("catalog", help="catalog symbols against dequantize and star routes")
    q.add_argument("--name", default="all", help="catalog name or 'all' (default)")
    q.add_argument("--gamma", type=_gamma, default=None, help=GAMMA_HELP)
    q.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE",
                   help="entry parameter")
    q.add_argument("--fixtures", metavar="DIR",
                   help="compare against the symbols stored in DIR/<name>.wsym")
    _common(q)

    q = vs.add_parser("geometry", help="numeric geometry checks on a chart")
    q.add_argument("--manifold", required=True, help="sphere2, flat2, warped2, flat4_lorentz "
                   "or schwarzschild_like")
    q.add_argument("--check", required=True,
                   choices=("geodesic", "vanvleck", "coincidence", "holonomy", "triangle", "lemma"),
                   help="which check")
    q.add_argument("--point", type=_vector, metavar="X1,X2,..", help="base point z")
    q.add_argument("--u1", type=_vector, metavar="U1,U2,..", help="first displacement")
    q.add_argument("--u2", type=_vector, metavar="U1,U2,..", help="second displacement")
    q.add_argument("--gamma", type=float, default=None,
                   help="exponent for 'coincidence' (default: 0, 1/2 and 1)")
    q.add_argument("--direction", type=int, default=0, help="coordinate direction for 'lemma'")
    _common(q)

    q = vs.add_parser("moyal", help="flat Moyal equation for Wigner functions on grids")
    q.add_argument("--case", choices=MOYAL_CASES, default="all", help="which case (default all)")
    q.add_argument("--grid", type=int, default=512, help="points per axis (default 512)")
    q.add_argument("--epsilon", type=float, default=0.1, help="semiclassical parameter")
    _common(q)

    p = sub.add_parser("parse-check", help="parse expressions or .wsym files",
                       description="Parse and canonicalize; report the first error.")
    p.add_argument("files", nargs="*", metavar="FILE", help=".wsym files")
    p.add_argument("--expr", action="append", default=[], help="expression text")
    p.add_argument("--declare", action="append", default=[], metavar="NAME:KINDS",
                   help="declare a tensor for --expr, e.g. A:2 or s:E,E")
    _common(p)
    return top


# ----------------------------------------------------------------------------- output

class Output:
    def __init__(self, fmt: str, command: str, config: dict):
        self.fmt, self.command, self.config = fmt, command, config

    def result(self, payload: dict, text: str) -> int:
        if self.fmt == "json":
            obj = {"version": REPORT_VERSION, "command": self.command, "config": self.config,
                   **payload}
            print(json.dumps(obj, sort_keys=True, indent=1))
        else:
            print(f"# {self.command} {json.dumps(self.config, sort_keys=True)}")
            print(text)
        return EXIT_OK

    def report(self, rep: VerificationReport) -> int:
        rep.config = {**self.config, **rep.config}
        if self.fmt == "json":
            print(rep.to_json())
        else:
            print(f"# {self.command} {json.dumps(rep.config, sort_keys=True, default=str)}")
            print(rep.to_text())
        return EXIT_OK if rep.passed else EXIT_FAIL


def _write_symbol(sym, path: Optional[str]) -> None:
    if path:
        from .expr_lang.wsym import dump
        dump(sym, path)


def _load_symbol(path: str):
    from .expr_lang.wsym import load
    from .symbol_calculus.symbols import GradedSymbol

    s = load(path)
    if not isinstance(s, GradedSymbol):
        raise UsageError(f"{path}: expected kind 'symbol'")
    return s


def _symbol_payload(sym, orders: Optional[list] = None) -> tuple:
    from .expr_lang.printer import to_text
    from .expr_lang.wsym import symbol_to_obj

    payload = {"symbol": symbol_to_obj(sym), "text": to_text(sym.expr)}
    lines = []
    if orders is not None:
        payload["orders"] = [to_text(e) for e in orders]
        lines = [f"order {k}: {to_text(e)}" for k, e in enumerate(orders)]
    lines.append(f"result: {to_text(sym.expr)}")
    return payload, "\n".join(lines)


# ----------------------------------------------------------------------------- commands

def cmd_star(args, out: Output) -> int:
    from .star_engine.star import StarOptions, moyal_bracket, star, star_order

    a, b = _load_symbol(args.a), _load_symbol(args.b)
    opts = StarOptions(max_order=args.order, gamma=args.gamma, flat=args.flat)
    if args.command == "star":
        res = star(a, b, opts)
        orders = [star_order(a, b, k, opts) for k in range(args.order + 1)]
    else:
        res, orders = moyal_bracket(a, b, opts), None
    _write_symbol(res, args.output)
    return out.result(*_symbol_payload(res, orders))


def cmd_tau_shift(args, out: Output) -> int:
    from .star_engine.star import tau_shift

    res = tau_shift(_load_symbol(args.a), args.sigma, args.tau, args.gamma, args.gamma_prime,
                    args.order)
    _write_symbol(res, args.output)
    return out.result(*_symbol_payload(res))


def cmd_adjoint(args, out: Output) -> int:
    from .symbol_calculus.symbols import adjoint

    res = adjoint(_load_symbol(args.a))
    _write_symbol(res, args.output)
    return out.result(*_symbol_payload(res))


def _operator_obj(op, section_name: str, declarations: list) -> dict:
    from .expr_lang.printer import to_text
    from .expr_lang.wsym import signature_json
    from .tensor_core.heads import declare_tensor
    from .quantizer.operators import to_action

    kinds = tuple(d.bundle for d in op.signature.domain)
    section = declare_tensor(section_name, kinds)
    decl = [d for d in declarations if d.get("name") != section_name]
    decl.append({"kind": "tensor", "name": section_name, "kinds": list(kinds)})
    return {"version": 1, "kind": "operator", "declarations": decl,
            "signature": signature_json(op.signature),
            "operator": {"section": section_name, "source": to_text(to_action(op, section))},
            "coefficients": {"a2": to_text(op.a2), "b1": to_text(op.b1), "c0": to_text(op.c0)}}


def cmd_quantize(args, out: Output) -> int:
    from .quantizer.operators import quantize

    sym = _load_symbol(args.a)
    op = quantize(sym, args.gamma)
    declarations = json.loads(Path(args.a).read_text()).get("declarations", [])
    obj = _operator_obj(op, args.section, declarations)
    if args.output:
        Path(args.output).write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n")
    c = obj["coefficients"]
    text = "\n".join([f"action: {obj['operator']['source']}",
                      f"a2: {c['a2']}", f"b1: {c['b1']}", f"c0: {c['c0']}"])
    return out.result({"operator": obj}, text)


def load_operator(path: str):
    """SecondOrderOperator from a file with declarations, signature and operator fields."""
    from .expr_lang.parser import parse_expr
    from .expr_lang.wsym import WsymError, context_from, symbol_from_obj
    from .quantizer.operators import from_action
    from .tensor_core.canonical import canonicalize

    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise WsymError(f"{path}: not valid JSON ({exc})") from None
    if "operator" not in obj:
        raise WsymError(f"{path}: no 'operator' field")
    ctx = context_from({"declarations": obj.get("declarations", [])})
    sig = symbol_from_obj({"version": 1, "declarations": obj.get("declarations", []),
                           "signature": obj.get("signature", {}), "terms": []}).signature
    action = canonicalize(parse_expr(obj["operator"]["source"], ctx))
    return from_action(action, obj["operator"]["section"], sig)


def cmd_dequantize(args, out: Output) -> int:
    from .quantizer.operators import dequantize

    res = dequantize(load_operator(args.operator), args.gamma)
    _write_symbol(res, args.output)
    return out.result(*_symbol_payload(res))


def cmd_catalog(args, out: Output) -> int:
    from .expr_lang.printer import to_text
    from .quantizer.catalog import NAMES, catalog, write_fixtures
    from .quantizer.operators import to_action

    if args.list:
        return out.result({"names": list(NAMES)}, "\n".join(NAMES))
    if args.write_fixtures:
        paths = [str(p) for p in write_fixtures(args.write_fixtures)]
        return out.result({"written": paths}, "\n".join(paths))
    entry = catalog(args.name, args.gamma, dict(args.param))
    action = to_text(entry.action)
    sym = to_text(entry.symbol.expr)
    text = "\n".join([f"operator: {action}", f"symbol: {sym}"]
                     + [f"assumption: {a}" for a in entry.assumptions])
    return out.result({"name": args.name, "operator": action, "symbol": sym,
                       "assumptions": entry.assumptions}, text)


def cmd_verify_identities(args, out: Output) -> int:
    from .quantizer.catalog import verify_catalog
    from .star_engine import checks

    which = IDENTITY_CHECKS if args.check == "all" else (args.check,)
    rep = VerificationReport("identities", config={"checks": list(which)})
    for name in which:
        if name == "adjoint":
            a, b, _ = checks.generic_chain()
            rep.extend(checks.adjoint_law(a, b, args.max_order), prefix="adjoint law: ")
        elif name == "associativity":
            a, b, c = checks.generic_chain(None)
            rep.extend(checks.associativity(a, b, c, args.max_order),
                       prefix="associativity (scalar): ")
        elif name == "associativity-bundle":
            a, b, c = checks.generic_chain()
            rep.extend(checks.associativity(a, b, c, args.max_order),
                       prefix="associativity (bundle): ")
        elif name == "degree":
            rep.extend(checks.degree_bound(args.cases, args.seed, args.max_order),
                       prefix="degree bound: ")
        else:
            sub = verify_catalog("wave", args.gamma)
            sub.checks = [c for c in sub.checks if c.name == "star_route"]
            rep.extend(sub, prefix="wave operator: ")
    return out.report(rep)


def cmd_verify_catalog(args, out: Output) -> int:
    from .quantizer.catalog import NAMES, load_fixture, verify_catalog

    names = NAMES if args.name == "all" else (args.name,)
    rep = VerificationReport("catalog", config={"names": list(names)})
    for name in names:
        expected = None
        if args.fixtures:
            expected = load_fixture(Path(args.fixtures) / f"{name}.wsym")
            if args.gamma is not None:
                expected = expected.with_expr(expected.expr.substitute_gamma(args.gamma))
        rep.extend(verify_catalog(name, args.gamma, dict(args.param), expected),
                   prefix=f"{name}: ")
    return out.report(rep)


def cmd_verify_geometry(args, out: Output) -> int:
    from .geometry_numeric.suite import geometry_report

    return out.report(geometry_report(args.manifold, args.check, args.gamma, args.point,
                                      args.u1, args.u2, args.direction))


def cmd_verify_moyal(args, out: Output) -> int:
    from .wigner_numeric.suite import moyal_report

    return out.report(moyal_report(args.case, args.grid, args.epsilon))


def _declare_from_flag(ctx, text: str) -> None:
    name, _, kinds = text.partition(":")
    if kinds.isdigit():
        ctx.tensor(name, (None,) * int(kinds))
    else:
        ctx.tensor(name, tuple(None if k in ("", "T") else k for k in kinds.split(",")
                               ) if kinds else ())


def cmd_parse_check(args, out: Output) -> int:
    from .expr_lang.context import Context
    from .expr_lang.parser import parse_expr
    from .expr_lang.printer import to_text
    from .expr_lang.wsym import check_wsym_consistency, load
    from .tensor_core.canonical import canonicalize
    from .tensor_core.expr import TensorExpr

    if not args.files and not args.expr:
        raise UsageError("parse-check: give FILE arguments or --expr")
    ctx = Context()
    for d in args.declare:
        _declare_from_flag(ctx, d)
    rep = VerificationReport("parse-check")
    for path in args.files:
        value = load(path)
        expr = value if isinstance(value, TensorExpr) else value.expr
        obj = json.loads(Path(path).read_text())
        consistent = "source" not in obj or "terms" not in obj or check_wsym_consistency(obj)
        rep.add(path, consistent, witness=None if consistent else "terms differ from source",
                details={"terms": len(expr)})
    for text in args.expr:
        rep.add(text, True, details={"canonical": to_text(canonicalize(parse_expr(text, ctx)))})
    return out.report(rep)


COMMANDS = {"star": cmd_star, "bracket": cmd_star, "tau-shift": cmd_tau_shift,
            "adjoint": cmd_adjoint, "quantize": cmd_quantize, "dequantize": cmd_dequantize,
            "catalog": cmd_catalog, "parse-check": cmd_parse_check,
            ("verify", "identities"): cmd_verify_identities,
            ("verify", "catalog"): cmd_verify_catalog,
            ("verify", "geometry"): cmd_verify_geometry,
            ("verify", "moyal"): cmd_verify_moyal}


def _config(args) -> dict:
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in ("format",):
            continue
        if isinstance(v, Fraction) or (k in ("gamma", "gamma_prime") and v is None):
            v = _gamma_text(v) if k.startswith("gamma") else str(v)
        elif isinstance(v, tuple):
            v = list(v)
        elif isinstance(v, list):
            v = [list(x) if isinstance(x, tuple) else x for x in v]
        cfg[k] = v
    cfg["tolerances"] = settings.resolved()
    return cfg


def main(argv: Optional[list] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        settings.resolved()
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except settings.SettingsError as exc:
        print(f"covariant-weyl: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:          # --help
        return int(exc.code or 0)
    # imported after the tolerance check: the numeric modules read tolerances on import
    from .expr_lang.context import UnknownHead
    from .expr_lang.parser import ParseError
    from .expr_lang.wsym import WsymError
    from .geometry_numeric.manifolds import GeometryError, UnknownManifold
    from .tensor_core.errors import TensorError

    key = (args.command, args.suite) if args.command == "verify" else args.command
    command = args.command if args.command != "verify" else f"verify {args.suite}"
    out = Output(args.format, command, _config(args))
    try:
        return COMMANDS[key](args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
    except UnknownManifold as exc:
        print(f"covariant-weyl: {exc.args[0]}", file=sys.stderr)
    except GeometryError as exc:
        # a numeric failure inside a suite is a verification failure, not a usage error
        print(f"covariant-weyl: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ParseError, WsymError, UnknownHead, OSError) as exc:
        print(f"covariant-weyl: input error: {exc}", file=sys.stderr)
    except (TensorError, ValueError, KeyError) as exc:
        print(f"covariant-weyl: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
