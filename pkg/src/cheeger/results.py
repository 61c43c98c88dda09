"""Result record shared by the convex, strip and sector solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import ValidationError
from .geometry import ArcPolygon


@dataclass(frozen=True)
class CheegerResult:
    """Cheeger constant of a domain, with bounds and the optimal set if known.

    ``r_star = 1/h`` is the radius of the free-boundary arcs whenever a
    Cheeger set exists.  ``k`` is the dimensionless excess ``(h - 1/a) * |G|``
    populated for strips, rectangles and sectors (half-width ``a``, core
    curve length ``|G|``); it is ``None`` where no such normalization
    applies.  ``tolerance`` records the accuracy actually achieved by the
    numerical method named in ``method``.
    """

    h: float
    r_star: float
    lower_bound: float
    upper_bound: float
    cheeger_set: Optional[ArcPolygon] = None
    k: Optional[float] = None
    method: str = ""
    tolerance: Optional[float] = None
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.h <= 0.0:
            raise ValidationError("Cheeger constant must be positive")
        slack = 1e-12 * self.h
        if not (self.lower_bound - slack <= self.h <= self.upper_bound + slack):
            raise ValidationError(
                f"h = {self.h!r} escapes its own bounds "
                f"[{self.lower_bound!r}, {self.upper_bound!r}]"
            )

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "r_star": self.r_star,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "k": self.k,
            "method": self.method,
            "tolerance": self.tolerance,
            "cheeger_set": None
            if self.cheeger_set is None
            else self.cheeger_set.to_dict(),
            "details": dict(self.details),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CheegerResult":
        cs = data.get("cheeger_set")
        return cls(
            h=float(data["h"]),
            r_star=float(data["r_star"]),
            lower_bound=float(data["lower_bound"]),
            upper_bound=float(data["upper_bound"]),
            cheeger_set=None if cs is None else ArcPolygon.from_dict(cs),
            k=data.get("k"),
            method=data.get("method", ""),
            tolerance=data.get("tolerance"),
            details=data.get("details", {}),
        )
