"""The trusted-computation game: parameters, costs and closed-form best responses.

The sensor fuses its private estimate ``y_hat`` with the computer's output
``y_bar`` as ``alpha * y_hat + (1 - alpha) * y_bar`` and picks ``alpha`` in
[0, 1]; the attacker picks ``y_bar`` to drag the fused value to ``y_attack``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import AlphaSaturated
from .geometry import as_vec, project_onto_affine_hull

#: Fusion weights at or above ``1 - TAU_ONE`` are treated as exactly one.
TAU_ONE = 1e-9


class Region(enum.Enum):
    """Which sensor response a computer output ``y_bar`` induces."""

    TRUST_COMPUTER = "TrustComputer"  # alpha* = 0
    MIXED = "Mixed"  # alpha* in (0, 1)
    TRUST_SELF = "TrustSelf"  # alpha* = 1


@dataclass(frozen=True)
class GameParams:
    """All quantities the two cost functions depend on.

    ``mu`` is the sensor's conditional mean of the true value given
    ``y_hat``; ``zeta`` is the attacker's mean of ``y_hat``. The optional
    variances are the second-moment constants of the expected costs; they
    shift costs by a constant and never move a minimizer.
    """

    y_hat: np.ndarray
    mu: np.ndarray
    zeta: np.ndarray
    y_attack: np.ndarray
    var_y: Optional[float] = None
    var_yhat: Optional[float] = None

    def __post_init__(self):
        vecs = {}
        for name in ("y_hat", "mu", "zeta", "y_attack"):
            vecs[name] = as_vec(getattr(self, name), name)
            object.__setattr__(self, name, vecs[name])
        dims = {v.size for v in vecs.values()}
        if len(dims) != 1:
            raise ValueError(f"all game vectors must share a dimension, got {sorted(dims)}")
        for name in ("var_y", "var_yhat"):
            v = getattr(self, name)
            if v is not None and not (np.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be a nonnegative finite number")

    @property
    def k(self) -> int:
        return self.y_hat.size

    def with_(self, **changes) -> "GameParams":
        return replace(self, **changes)

    def mu_hat(self) -> np.ndarray:
        """Projection of ``mu`` onto the affine hull of ``y_hat``, ``zeta``, ``y_attack``."""
        return project_onto_affine_hull(self.mu, [self.y_hat, self.zeta, self.y_attack])


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"fusion weight must lie in [0, 1], got {alpha}")
    return alpha


def fuse(alpha: float, y_hat, y_bar) -> np.ndarray:
    alpha = _check_alpha(alpha)
    y_hat, y_bar = as_vec(y_hat, "y_hat"), as_vec(y_bar, "y_bar")
    return alpha * y_hat + (1.0 - alpha) * y_bar


def cost_defender(alpha: float, y_bar, p: GameParams) -> float:
    """Expected squared error of the fused value about the true value."""
    alpha = _check_alpha(alpha)
    y_bar = as_vec(y_bar, "y_bar")
    e = alpha * (p.y_hat - y_bar) + y_bar - p.mu
    return float(e @ e) + (p.var_y or 0.0)


def cost_attacker(alpha: float, y_bar, p: GameParams) -> float:
    """Expected squared distance of the fused value from the attack target."""
    alpha = _check_alpha(alpha)
    y_bar = as_vec(y_bar, "y_bar")
    e = (1.0 - alpha) * y_bar + alpha * p.zeta - p.y_attack
    return float(e @ e) + alpha * alpha * (p.var_yhat or 0.0)


def _sensor_case(y_bar: np.ndarray, y_hat: np.ndarray, mean: np.ndarray) -> tuple[Region, float]:
    # Case conditions overlap on boundaries; TrustComputer wins, then TrustSelf.
    if (y_bar - mean) @ (y_hat - y_bar) >= 0.0:
        return Region.TRUST_COMPUTER, 0.0
    if (y_hat - mean) @ (y_bar - y_hat) >= 0.0:
        return Region.TRUST_SELF, 1.0
    d = y_bar - y_hat
    a = float((y_bar - mean) @ d) / float(d @ d)
    # round-off next to a region boundary can land on (or past) 0 or 1
    if a >= 1.0:
        return Region.TRUST_SELF, 1.0
    if a <= 0.0:
        return Region.TRUST_COMPUTER, 0.0
    return Region.MIXED, a


def best_response_sensor(y_bar, p: GameParams, mean=None) -> float:
    """Optimal fusion weight against the computer output ``y_bar``.

    ``mean`` defaults to ``p.mu``; passing the projected mean gives the same
    answer for any ``y_bar`` in the plane of ``y_hat``, ``zeta``, ``y_attack``.
    """
    y_bar = as_vec(y_bar, "y_bar")
    m = p.mu if mean is None else as_vec(mean, "mean")
    return _sensor_case(y_bar, p.y_hat, m)[1]


def best_response_attacker(alpha: float, p: GameParams, tau_one: float = TAU_ONE) -> np.ndarray:
    """Attacker output minimizing its cost at fusion weight ``alpha`` (< 1)."""
    alpha = _check_alpha(alpha)
    if alpha >= 1.0 - tau_one:
        raise AlphaSaturated(f"alpha={alpha!r} is treated as 1; the attacker output is arbitrary there")
    return (p.y_attack - alpha * p.zeta) / (1.0 - alpha)


def classify_region(y_bar, p: GameParams) -> Region:
    y_bar = as_vec(y_bar, "y_bar")
    return _sensor_case(y_bar, p.y_hat, p.mu)[0]
