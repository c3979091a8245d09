"""Pass/fail records for numerically verified identities and inequalities."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass(frozen=True)
class Certificate:
    """A number checked against a threshold.

    ``direction`` is ``"<="`` for residuals (pass iff value <= tolerance) and
    ``">="`` for lower bounds such as minimal eigenvalues (pass iff value >=
    tolerance, where the tolerance is then usually a small negative number).
    """

    label: str
    value: float
    tolerance: float
    direction: str = "<="
    context: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.direction not in ("<=", ">="):
            raise ValueError(f"direction must be '<=' or '>=', got {self.direction!r}")

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.value):
            return False
        if self.direction == "<=":
            return bool(self.value <= self.tolerance)
        return bool(self.value >= self.tolerance)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "value": float(self.value),
            "tolerance": float(self.tolerance),
            "direction": self.direction,
            "verdict": self.verdict,
            "context": _plain(self.context),
        }


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (frozenset, set)):
        return sorted(_plain(v) for v in obj)
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def residual(label: str, value: float, tol: float, **context) -> Certificate:
    return Certificate(label, float(value), float(tol), "<=", context)


def lower_bound(label: str, value: float, tol: float, **context) -> Certificate:
    return Certificate(label, float(value), float(tol), ">=", context)
