"""
Sugimoto indices of the limiting operators: every branch of both limits,
linearly shifted to a positive phase, aggregated into one (γ, γ₀, convex).
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

from app.config.settings import GeometryConfig
from app.errors import GeometryError
from app.geometry.contact import sugimoto_indices
from app.geometry.phase import linear_shift
from app.symbol.roots import LimitRoots

logger = logging.getLogger(__name__)


@dataclass
class LimitingGeometry:
    n: int
    gamma: Optional[int]
    gamma0: Optional[int]
    convex: bool
    branches: list = field(default_factory=list)
    excluded: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "gamma": self.gamma,
            "gamma0": self.gamma0,
            "convex": self.convex,
            "branches": self.branches,
            "excluded": self.excluded,
        }


def limiting_geometry(limit_roots: LimitRoots, config: Optional[GeometryConfig] = None) -> LimitingGeometry:
    config = config or GeometryConfig()
    n = limit_roots.operator_plus.n
    if n == 1:
        return LimitingGeometry(n=1, gamma=None, gamma0=None, convex=True)

    sides = ["plus"]
    if limit_roots.operator_plus.to_dict() != limit_roots.operator_minus.to_dict():
        sides.append("minus")

    branches, excluded = [], []
    for side in sides:
        for k in range(limit_roots.side(side).m):
            try:
                phase = linear_shift(limit_roots, k, side, config)
            except GeometryError as e:
                logger.warning("Branch %s[%d] excluded from index aggregation: %s", side, k, e)
                excluded.append({"side": side, "k": k, "reason": str(e)})
                continue
            report = sugimoto_indices(phase, config)
            branches.append({"side": side, "k": k, "gamma": report.gamma,
                             "gamma0": report.gamma0, "convex": report.convex})

    if not branches:
        raise GeometryError("No limiting branch is sign-definite after the linear shift")
    gamma = max(b["gamma"] for b in branches)
    gamma0 = max(b["gamma0"] for b in branches)
    convex = all(b["convex"] for b in branches)
    logger.info("Limiting geometry: gamma=%d gamma0=%d convex=%s (%d branches, %d excluded)",
                gamma, gamma0, convex, len(branches), len(excluded))
    return LimitingGeometry(n=n, gamma=gamma, gamma0=gamma0, convex=convex,
                            branches=branches, excluded=excluded)
