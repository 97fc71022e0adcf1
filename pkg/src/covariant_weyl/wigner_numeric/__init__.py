"""Flat-chart Wigner transforms and the numeric Moyal residual."""

from .wigner import (POINTS_PER_WAVELENGTH, DegreeTooHigh, GridMismatch, GridSection,
                     MoyalResidual, PhaseSpaceGrid, UnderResolved, apply_constant_operator,
                     evaluate_symbol, moyal_residual_flat, quadratic_coefficients, sample,
                     star_terms_flat, wigner_flat)
from .suite import (direct_operator_check, hermiticity, moyal_report, plane_wave_1d,
                    plane_wave_1p1, wave_symbol, wkb_scaling)
