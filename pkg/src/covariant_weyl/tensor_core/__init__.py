"""Indexed tensor expressions with exact coefficients and canonical forms."""

from .calculus import (commutator, curvature_action, hderiv, hderivs, normal_order, vderiv,
                       vderivs)
from .canonical import canonical_term, canonicalize, check_free_signature, metric
from .coefficient import GAMMA, I, ONE, Coefficient, eps, rat
from .errors import (ArityError, IndexCollision, IndexNotFree, MalformedIndex,
                     SignatureMismatch, TensorError, UnbalancedIndex, VarianceError)
from .expr import TensorExpr
from .heads import (DIM, METRIC, MOMENTUM, RICCI, RICCI_SCALAR, RIEMANN, Factor, HeadInfo, Slot,
                    bdn, bundle_curv, bundle_metric, bundle_rank, bup, dagger_head,
                    declare_symbol, declare_tensor, dn, make_factor, up)
from .identities import (IdentityCheck, equal_mod_identities, identify_bundle,
                         reduce_mod_identities, substitute_head, symmetrize)
from .calculus import contract_hv
