"""Bundle-typed, eps-graded phase-space symbols."""

from .symbols import (BundleSignature, GradedSymbol, WiringMismatch, adjoint, compose,
                      identity_symbol, lower, normal_order_h, raise_index, rename_for_composition,
                      symbol_hderiv, symbol_vderiv)

hderiv = symbol_hderiv
vderiv = symbol_vderiv
