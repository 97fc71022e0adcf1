"""Symbol/operator dictionary for second-order operators and the operator catalog."""

from .catalog import (NAMES, CatalogEntry, MissingParam, UnknownName, catalog, load_fixture,
                      verify_catalog, write_fixtures)
from .operators import (DegreeTooHigh, GradeMismatch, OperatorFormError, SecondOrderOperator,
                        dequantize, formal_adjoint, from_action, operators_equal, quantize,
                        split_symbol, to_action)
