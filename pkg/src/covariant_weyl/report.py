"""Structured pass/fail records shared by the verification suites."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

REPORT_VERSION = 1


@dataclass
class Check:
    name: str
    passed: bool
    residual: Optional[float] = None
    slope: Optional[float] = None
    witness: Optional[str] = None
    details: dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    subject: str
    checks: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, **kw) -> Check:
        c = Check(name, bool(passed), **kw)
        self.checks.append(c)
        return c

    def extend(self, other: "VerificationReport", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.passed, c.residual, c.slope, c.witness,
                                     dict(c.details)))

    def to_obj(self) -> dict:
        return {"version": REPORT_VERSION, "subject": self.subject, "passed": self.passed,
                "config": self.config, "checks": [_clean(asdict(c)) for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=True, indent=1)

    def to_text(self) -> str:
        lines = [f"{self.subject}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            parts = [f"  [{'PASS' if c.passed else 'FAIL'}] {c.name}"]
            if c.residual is not None:
                parts.append(f"residual={c.residual:.3e}")
            if c.slope is not None:
                parts.append(f"slope={c.slope:.3f}")
            lines.append(" ".join(parts))
            if c.witness:
                lines.append(f"    witness: {c.witness}")
        return "\n".join(lines)


def _clean(x: Any) -> Any:
    """Round floats so that reports are byte-stable across platforms."""
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return float(f"{x:.10g}")
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x
