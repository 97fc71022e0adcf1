"""Head declarations known to the parser."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..tensor_core.heads import (DIM, METRIC, MOMENTUM, RICCI, RICCI_SCALAR, RIEMANN, HeadInfo,
                                 bundle_curv, bundle_metric, bundle_rank, dagger_head,
                                 declare_symbol, declare_tensor)


class UnknownHead(KeyError):
    pass


BUILTIN = {
    "g": METRIC, "g_inv": METRIC, "delta": METRIC,
    "p": MOMENTUM, "Riemann": RIEMANN, "Ricci": RICCI, "RicciScalar": RICCI_SCALAR,
    "dim": DIM,
}


@dataclass
class Context:
    """Bundles, declared heads and flat bundles for one parsing session."""

    bundles: set = field(default_factory=set)
    heads: dict = field(default_factory=dict)
    flat: set = field(default_factory=set)

    def copy(self) -> "Context":
        return Context(set(self.bundles), dict(self.heads), set(self.flat))

    def add_bundle(self, name: str, flat: bool = False) -> None:
        self.bundles.add(name)
        if flat:
            self.flat.add(name)

    def declare(self, info: HeadInfo) -> HeadInfo:
        for k in info.kinds:
            if k is not None:
                self.bundles.add(k)
        self.heads[info.name] = info
        return info

    def symbol(self, name: str, codomain=(), domain=(), extra=(), symmetry=()) -> HeadInfo:
        return self.declare(declare_symbol(name, codomain, domain, extra, symmetry))

    def tensor(self, name: str, kinds=(), **kw) -> HeadInfo:
        return self.declare(declare_tensor(name, kinds, **kw))

    def lookup(self, name: str) -> HeadInfo:
        if name in BUILTIN:
            return BUILTIN[name]
        base, _, bundle = name.partition(".")
        if bundle and base in ("BundleCurv", "delta", "rank"):
            maker = {"BundleCurv": bundle_curv, "delta": bundle_metric, "rank": bundle_rank}[base]
            return maker(bundle)
        if name in self.heads:
            return self.heads[name]
        if name.endswith("~") and name[:-1] in self.heads:
            return dagger_head(self.heads[name[:-1]])
        raise UnknownHead(name)

    def absorb(self, heads) -> None:
        """Register heads met in an expression (e.g. daggered symbols)."""
        for h in heads:
            if h.role in ("symbol", "tensor") and h.name not in BUILTIN:
                if h.name.endswith("~") and h.name[:-1] in self.heads:
                    continue
                self.heads.setdefault(h.name, h)
            for k in h.kinds:
                if k is not None:
                    self.bundles.add(k)


def default_context() -> Context:
    return Context()


def head_name_in_text(info: HeadInfo, ups: Optional[tuple] = None) -> str:
    """Surface name of a head; the coordinate metric depends on slot variances."""
    if info is METRIC and ups is not None:
        if ups == (False, False):
            return "g"
        if ups == (True, True):
            return "g_inv"
        return "delta"
    return info.name
