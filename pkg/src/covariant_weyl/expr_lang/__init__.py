"""Text grammar, printers and file formats for tensor expressions and symbols."""

from .context import BUILTIN, Context, UnknownHead
from .parser import ParseError, parse_expr
from .printer import print_expr, to_json, to_latex, to_text
from .wsym import WsymError, dump, expr_from_obj, load, symbol_from_obj, symbol_to_obj
