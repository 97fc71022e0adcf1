"""Covariant Weyl quantization of bundle-valued symbols: exact symbolic star products,
the second-order symbol/operator dictionary, and numeric oracles on charts and grids."""

from .report import VerificationReport

__version__ = "0.1.0"

__all__ = ["VerificationReport", "__version__"]
