"""Covariant star product through third order, Moyal bracket and tau-shift."""

from .star import (StarOptions, TruncationOverflow, drop_curvature, moyal_bracket, star,
                   star_order, tau_shift)
from .checks import (adjoint_law, associativity, associativity_defect, degree_bound,
                     degree_violation, generic_chain, outer_curvature_defect, p_degree,
                     random_polynomial_symbol)
