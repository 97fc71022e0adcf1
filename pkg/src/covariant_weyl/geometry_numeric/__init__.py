"""Numeric differential geometry on single charts: the oracle for the symbolic expansions."""

from .checks import (SCALES, TriangleVectors, check_hderiv_lemma, check_triangle_vectors,
                     coincidence_limits, holonomy_expansion, holonomy_quad, loglog_slope,
                     loop_holonomy, triangle_vectors, v1_expansion)
from .geodesics import (H_VV, TOL_BVP, TOL_ODE, GeodesicResult, IllConditioned, LeftChart,
                        NoConvergence, StepFailure, convexity_radius, exp_map, geodesic_shoot,
                        log_map, synge, transport, van_vleck, van_vleck_jacobi)
from .manifolds import (MANIFOLDS, BundleConnectionSpec, DegenerateMetric, GeometryError,
                        ManifoldSpec, UnknownManifold, from_sympy, manifold, tangent_bundle,
                        trivial_bundle)
from .suite import CHECKS, DEFAULTS, geometry_report, sphere_pairs
