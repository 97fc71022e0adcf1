"""Index slots, head metadata and tensor factors."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import NamedTuple, Optional

from .errors import ArityError


class Slot(NamedTuple):
    """One index position.

    ``up`` is True/False, or None for a coordinate dummy (contracted pairs of
    coordinate indices carry no variance in canonical form).  ``bundle`` is
    None for coordinate indices, otherwise the bundle id.
    """

    label: str
    up: Optional[bool]
    bundle: Optional[str] = None

    def with_label(self, label: str) -> "Slot":
        return Slot(label, self.up, self.bundle)


def co(label: str, up: bool) -> Slot:
    return Slot(label, up, None)


def up(label: str) -> Slot:
    return Slot(label, True, None)


def dn(label: str) -> Slot:
    return Slot(label, False, None)


def bup(label: str, bundle: str) -> Slot:
    return Slot(label, True, bundle)


def bdn(label: str, bundle: str) -> Slot:
    return Slot(label, False, bundle)


POSITION_ROLES = ("metric", "curvature", "tensor")


@dataclass(frozen=True)
class HeadInfo:
    """Static description of a factor head.

    role: metric | momentum | curvature | tensor | symbol.
    kinds: per base slot, None for coordinate or a bundle id.
    symmetry: generators (permutation of base slots, sign).
    n_cod / n_dom: leading base slots forming the codomain and domain groups;
    conjugation swaps the two groups.
    conj: real | dagger | herm | antiherm.
    """

    name: str
    kinds: tuple
    role: str
    symmetry: tuple = ()
    n_cod: int = 0
    n_dom: int = 0
    conj: str = "real"
    parallel: bool = False
    rank: int = 1

    def __hash__(self):
        return hash(self.name)

    @property
    def arity(self) -> int:
        return len(self.kinds)

    @property
    def sort_key(self):
        return (self.rank, self.name)

    @property
    def position_only(self) -> bool:
        return self.role in POSITION_ROLES

    @property
    def is_symbol(self) -> bool:
        return self.role == "symbol"


RIEMANN_SYM = (((1, 0, 2, 3), -1), ((0, 1, 3, 2), -1), ((2, 3, 0, 1), 1))
SWAP_SYM = (((1, 0), 1),)

METRIC = HeadInfo("g", (None, None), "metric", SWAP_SYM, 1, 1, "herm", True, 6)
MOMENTUM = HeadInfo("p", (None,), "momentum", rank=7)
RIEMANN = HeadInfo("Riemann", (None,) * 4, "curvature", RIEMANN_SYM, rank=3)
RICCI = HeadInfo("Ricci", (None, None), "curvature", SWAP_SYM, rank=4)
RICCI_SCALAR = HeadInfo("RicciScalar", (), "curvature", rank=5)
DIM = HeadInfo("dim", (), "tensor", parallel=True, rank=8)


@lru_cache(maxsize=None)
def bundle_metric(bundle: str) -> HeadInfo:
    return HeadInfo(f"delta.{bundle}", (bundle, bundle), "metric", SWAP_SYM, 1, 1,
                    "herm", True, 6)


@lru_cache(maxsize=None)
def bundle_curv(bundle: str) -> HeadInfo:
    return HeadInfo(f"BundleCurv.{bundle}", (bundle, bundle, None, None), "curvature",
                    (((0, 1, 3, 2), -1),), 1, 1, "antiherm", False, 2)


@lru_cache(maxsize=None)
def bundle_rank(bundle: str) -> HeadInfo:
    return HeadInfo(f"rank.{bundle}", (), "tensor", parallel=True, rank=8)


def metric_for(kind: Optional[str]) -> HeadInfo:
    return METRIC if kind is None else bundle_metric(kind)


def trace_for(kind: Optional[str]) -> HeadInfo:
    return DIM if kind is None else bundle_rank(kind)


def declare_symbol(name: str, codomain: tuple = (), domain: tuple = (),
                   extra: tuple = (), symmetry: tuple = ()) -> HeadInfo:
    """Generic phase-space symbol; kinds are codomain + domain + extra slots."""
    kinds = tuple(codomain) + tuple(domain) + tuple(extra)
    return HeadInfo(name, kinds, "symbol", tuple(symmetry), len(codomain), len(domain),
                    "dagger", False, 0)


def declare_tensor(name: str, kinds: tuple = (), symmetry: tuple = (), n_cod: int = 0,
                   n_dom: int = 0, conj: str = "real", parallel: bool = False) -> HeadInfo:
    """Position-only tensor (coefficient field, gauge potential, constant...)."""
    return HeadInfo(name, tuple(kinds), "tensor", tuple(symmetry), n_cod, n_dom, conj,
                    parallel, 1)


def dagger_head(info: HeadInfo) -> HeadInfo:
    """Head of the pointwise adjoint: codomain and domain groups swapped."""
    c, d = info.n_cod, info.n_dom
    order = list(range(c, c + d)) + list(range(c)) + list(range(c + d, info.arity))
    inv = {old: new for new, old in enumerate(order)}
    kinds = tuple(info.kinds[k] for k in order)
    sym = []
    for perm, sign in info.symmetry:
        newperm = [0] * info.arity
        for new_pos, old_pos in enumerate(order):
            newperm[new_pos] = inv[perm[old_pos]]
        sym.append((tuple(newperm), sign))
    name = info.name[:-1] if info.name.endswith("~") else info.name + "~"
    return HeadInfo(name, kinds, info.role, tuple(sym), d, c, info.conj, info.parallel,
                    info.rank)


def role_swap_order(info: HeadInfo) -> list:
    c, d = info.n_cod, info.n_dom
    return list(range(c, c + d)) + list(range(c)) + list(range(c + d, info.arity))


class Factor(NamedTuple):
    """A head with base slots and derivative decorations.

    cov: covariant (;) derivative slots of position-only heads.
    h / v: horizontal / vertical derivative slots of symbol heads, in
    application order.  The first ``hsym`` (``csym``) slots of h (cov) are
    symmetrized.
    """

    head: HeadInfo
    slots: tuple
    cov: tuple = ()
    h: tuple = ()
    v: tuple = ()
    hsym: int = 0
    csym: int = 0

    def all_slots(self) -> tuple:
        return self.slots + self.cov + self.h + self.v

    def split(self, seq) -> "Factor":
        nb, nc, nh = len(self.slots), len(self.cov), len(self.h)
        seq = tuple(seq)
        return self._replace(slots=seq[:nb], cov=seq[nb:nb + nc], h=seq[nb + nc:nb + nc + nh],
                             v=seq[nb + nc + nh:])

    def relabel(self, mapping: dict) -> "Factor":
        if not mapping:
            return self
        return self.split(s if s.label not in mapping else s.with_label(mapping[s.label])
                          for s in self.all_slots())


def norm_sym(k: int, n: int) -> int:
    k = min(k, n)
    return 0 if k < 2 else k


def make_factor(head: HeadInfo, slots=(), cov=(), h=(), v=(), hsym=0, csym=0) -> Factor:
    slots = tuple(slots)
    if len(slots) != head.arity:
        raise ArityError(f"{head.name} takes {head.arity} slots, got {len(slots)}")
    fixed = []
    for s, kind in zip(slots, head.kinds):
        if s.bundle != kind:
            s = Slot(s.label, s.up, kind)
        fixed.append(s)
    cov, h, v = tuple(cov), tuple(h), tuple(v)
    if (h or v) and not head.is_symbol:
        raise ArityError(f"{head.name} cannot carry h/v derivative slots")
    if cov and not head.position_only:
        raise ArityError(f"{head.name} cannot carry covariant derivative slots")
    return Factor(head, tuple(fixed), cov, h, v, norm_sym(hsym, len(h)), norm_sym(csym, len(cov)))


def _closure(gens: tuple, n: int) -> list:
    ident = tuple(range(n))
    elems = {ident: 1}
    frontier = [ident]
    while frontier:
        nxt = []
        for e in frontier:
            for g, s in gens:
                comp = tuple(e[g[k]] for k in range(n))
                sign = elems[e] * s
                if comp not in elems:
                    elems[comp] = sign
                    nxt.append(comp)
        frontier = nxt
    return list(elems.items())


@lru_cache(maxsize=None)
def slot_group(head: HeadInfo, ncov: int, nh: int, nv: int, hsym: int, csym: int) -> tuple:
    """All (permutation, sign) pairs acting on the full slot sequence.

    A permutation ``perm`` maps new position k to old position perm[k].
    """
    nb = head.arity
    base = _closure(head.symmetry, nb) if head.symmetry else [(tuple(range(nb)), 1)]
    blocks = []
    if csym:
        blocks.append((nb, csym))
    if hsym:
        blocks.append((nb + ncov, hsym))
    if nv > 1:
        blocks.append((nb + ncov + nh, nv))
    total = nb + ncov + nh + nv
    out = []
    for bperm, bsign in base:
        partial = [list(bperm) + list(range(nb, total))]
        for off, size in blocks:
            new = []
            for p in partial:
                for sp in permutations(range(size)):
                    q = list(p)
                    for k in range(size):
                        q[off + k] = p[off + sp[k]]
                    new.append(q)
            partial = new
        out.extend((tuple(p), bsign) for p in partial)
    return tuple(out)
