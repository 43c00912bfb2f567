"""Nash equilibria of the fusion game in closed form, plus a brute-force check.

Two kinds exist. The sensor may trust the computer outright
(``alpha* = 0``, ``y_bar* = y_attack``), or both play mixed: the
attacker's output then sits on the ray from ``zeta`` through
``y_attack``, ``y_bar* = zeta + r (y_attack - zeta)``, where ``r`` solves a
quadratic. Real roots are only candidates. Each one is checked against
both best responses before it is reported.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateGame
from .game import (
    TAU_ONE,
    GameParams,
    best_response_sensor,
    cost_attacker,
    cost_defender,
)
from .geometry import degeneracy_tol

VALIDATION_TOL = 1e-8


class EquilibriumKind(enum.Enum):
    ZERO_ALPHA = "ZeroAlpha"
    MIXED = "Mixed"


@dataclass(frozen=True)
class Equilibrium:
    kind: EquilibriumKind
    alpha_star: float
    y_bar_star: np.ndarray
    r: Optional[float] = None


def zero_equilibrium_slack(p: GameParams) -> float:
    """``(y_A - mu)^T (y_hat - mu) - ||y_A - mu||^2``; nonnegative iff (0, y_A) is an equilibrium."""
    u = p.y_attack - p.mu
    return float(u @ (p.y_hat - p.mu) - u @ u)


def zero_equilibrium_exists(p: GameParams) -> bool:
    return zero_equilibrium_slack(p) >= 0.0


def zero_equilibrium(p: GameParams) -> Equilibrium:
    return Equilibrium(EquilibriumKind.ZERO_ALPHA, 0.0, p.y_attack.copy())


def quadratic_coefficients(p: GameParams) -> tuple[float, float, float]:
    """Coefficients ``(a, b, c)`` of ``a r^2 + b r + c = 0`` for the mixed fixed point.

    With ``z_A = y_A - zeta``, ``zh = y_hat - zeta`` and
    ``delta = zeta - mu`` (so ``y_hat - mu = zh + delta``)::

        a = z_A . (zh + z_A + delta)
        b = -zh . (zh + 2 z_A + delta)
        c = zh . zh
    """
    z_a = p.y_attack - p.zeta
    z_h = p.y_hat - p.zeta
    delta = p.zeta - p.mu
    if np.linalg.norm(z_h) <= degeneracy_tol(p.y_hat, p.zeta):
        raise DegenerateGame("y_hat coincides with zeta; the mixed fixed-point equation is vacuous")
    a = float(z_a @ (z_h + z_a + delta))
    b = float(-(z_h @ (z_h + 2.0 * z_a + delta)))
    c = float(z_h @ z_h)
    return a, b, c


def solve_quadratic(a: float, b: float, c: float, rtol: float = 1e-12) -> list[float]:
    """Real roots of ``a x^2 + b x + c``, ascending, computed without cancellation.

    A leading coefficient below ``rtol`` times the coefficient scale is
    treated as zero and the linear equation is solved instead.
    """
    scale = abs(a) + abs(b) + abs(c)
    if scale == 0.0:
        return []
    if abs(a) <= rtol * scale:
        if abs(b) <= rtol * scale:
            return []
        return [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    if q == 0.0:
        return [0.0]
    r1, r2 = q / a, c / q
    return sorted({r1, r2})


@dataclass
class Candidate:
    r: float
    y_bar: np.ndarray
    alpha: float
    valid: bool
    reason: str = ""


@dataclass
class MixedAnalysis:
    """Everything computed on the way to the mixed equilibria."""

    coefficients: tuple[float, float, float]
    discriminant: float
    roots: list[float]
    candidates: list[Candidate] = field(default_factory=list)

    @property
    def has_real_roots(self) -> bool:
        return bool(self.roots)

    @property
    def equilibria(self) -> list[Equilibrium]:
        return [
            Equilibrium(EquilibriumKind.MIXED, c.alpha, c.y_bar, c.r)
            for c in self.candidates if c.valid
        ]

    @property
    def spurious(self) -> bool:
        """Real roots exist but none yields a valid mixed equilibrium."""
        return self.has_real_roots and not self.equilibria


def analyze_mixed(p: GameParams, tau_one: float = TAU_ONE) -> MixedAnalysis:
    a, b, c = quadratic_coefficients(p)
    z_a = p.y_attack - p.zeta
    report = MixedAnalysis((a, b, c), b * b - 4.0 * a * c, solve_quadratic(a, b, c))
    for r in report.roots:
        yb = p.zeta + r * z_a
        alpha = best_response_sensor(yb, p)
        if not tau_one < alpha < 1.0 - tau_one:
            report.candidates.append(Candidate(r, yb, alpha, False, f"sensor response {alpha:.6g} is not mixed"))
            continue
        # the attacker answers weight a with the ray point r = 1/(1-a), so a
        # root fixes the weight; yb is then the attacker's response exactly
        if r <= 1.0:
            report.candidates.append(Candidate(r, yb, alpha, False, "root is not an attacker response"))
            continue
        a_root = 1.0 - 1.0 / r
        err = abs(alpha - a_root)
        if err <= VALIDATION_TOL:
            report.candidates.append(Candidate(r, yb, a_root, True))
        else:
            report.candidates.append(Candidate(r, yb, alpha, False, f"sensor residual {err:.3g}"))
    return report


def mixed_equilibria(p: GameParams, tau_one: float = TAU_ONE) -> list[Equilibrium]:
    """Validated mixed equilibria (possibly none). Raises DegenerateGame if ``y_hat == zeta``."""
    return analyze_mixed(p, tau_one).equilibria


def verify_nash(candidate: Equilibrium, p: GameParams, alpha_grid: int = 1001,
                perturbations: int = 200, seed: int = 0, tol: float = 1e-8) -> bool:
    """Brute-force check that neither player gains by deviating.

    The sensor deviation is scanned over a uniform grid on [0, 1]. The
    attacker deviation is sampled as ``perturbations`` seeded offsets whose
    norm is at most ``1 + ||y_bar*||``.
    """
    a_star, y_star = float(candidate.alpha_star), np.asarray(candidate.y_bar_star, dtype=float)
    jd = cost_defender(a_star, y_star, p)
    for a in np.linspace(0.0, 1.0, alpha_grid):
        if jd > cost_defender(float(a), y_star, p) + tol:
            return False
    ja = cost_attacker(a_star, y_star, p)
    rng = np.random.default_rng(seed)
    reach = 1.0 + float(np.linalg.norm(y_star))
    for _ in range(perturbations):
        g = rng.standard_normal(p.k)
        eta = g / np.linalg.norm(g) * reach * rng.uniform() ** (1.0 / p.k)
        if ja > cost_attacker(a_star, y_star + eta, p) + tol:
            return False
    return True
