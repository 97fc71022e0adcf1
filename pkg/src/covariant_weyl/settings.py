"""Numeric tolerances, each overridable through a COVARIANT_WEYL_<NAME> environment variable."""

from __future__ import annotations

import os

ENV_PREFIX = "COVARIANT_WEYL_"

DEFAULTS = {
    "TOL_ODE": 1e-10,    # relative/absolute target of the geodesic integrator
    "TOL_BVP": 1e-9,     # residual target of the Newton shooting for log maps
    "H_VV": 1e-3,        # finite-difference step of the van Vleck stencil
    "SLOPE_TOL": 0.3,    # accepted deviation of a log-log convergence slope
}


class SettingsError(ValueError):
    pass


def tolerance(name: str) -> float:
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return DEFAULTS[name]
    try:
        value = float(raw)
    except ValueError:
        raise SettingsError(f"{ENV_PREFIX}{name}={raw!r} is not a number") from None
    if not value > 0:
        raise SettingsError(f"{ENV_PREFIX}{name} must be positive")
    return value


def resolved() -> dict:
    """Every tolerance after environment overrides."""
    return {name.lower(): tolerance(name) for name in DEFAULTS}
