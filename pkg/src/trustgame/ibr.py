"""Iterated best response: the attacker plays first, then the players alternate.

``ibr_run`` is the traced reference loop. ``run_batch`` returns the same
terminal outcomes for many starting points through the compiled kernel and
is what the sweeps use.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import SamplingExhausted
from .game import GameParams, Region, _sensor_case
from .geometry import as_vec


class OutcomeKind(enum.IntEnum):
    CONVERGED_ZERO = _kernels.CONVERGED_ZERO
    CONVERGED_MIXED = _kernels.CONVERGED_MIXED
    EXIT_ALPHA_ONE = _kernels.EXIT_ALPHA_ONE
    TRIVIAL_INIT = _kernels.TRIVIAL_INIT
    DIVERGED = _kernels.DIVERGED
    MAX_ITER = _kernels.MAX_ITER

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    OutcomeKind.CONVERGED_ZERO: "ConvergedZero",
    OutcomeKind.CONVERGED_MIXED: "ConvergedMixed",
    OutcomeKind.EXIT_ALPHA_ONE: "ExitAlphaOne",
    OutcomeKind.TRIVIAL_INIT: "TrivialInit",
    OutcomeKind.DIVERGED: "Diverged",
    OutcomeKind.MAX_ITER: "MaxIterNoConvergence",
}


@dataclass(frozen=True)
class IbrConfig:
    max_iter: int = 100
    alpha_tol: float = 1e-9
    tau_one: float = 1e-9
    divergence_norm: float = 1e12

    def __post_init__(self):
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be a positive integer")
        if not 0 < self.alpha_tol < 1:
            raise ValueError("alpha_tol must lie in (0, 1)")
        if not 0 < self.tau_one < 1:
            raise ValueError("tau_one must lie in (0, 1)")
        if not self.divergence_norm > 0:
            raise ValueError("divergence_norm must be positive")


@dataclass(frozen=True)
class IbrOutcome:
    """Terminal classification of one IBR run.

    ``alpha_star``/``y_bar_star`` are set only for converged runs.
    ``last_alpha`` is the final sensor response whatever the outcome, and
    ``contraction`` (MaxIter runs only) is the ratio of the last two
    attacker step lengths: below one the run was still closing in on a
    fixed point when the iteration budget ran out.
    """

    kind: OutcomeKind
    iterations: int
    last_alpha: float
    alpha_star: Optional[float] = None
    y_bar_star: Optional[np.ndarray] = None
    contraction: Optional[float] = None

    @property
    def converged(self) -> bool:
        return self.kind in (OutcomeKind.CONVERGED_ZERO, OutcomeKind.CONVERGED_MIXED)


def is_converging(outcome: IbrOutcome) -> bool:
    """Whether a run counts as producing a steady fusion weight below one.

    Converged runs count. So do runs that exhausted ``max_iter`` while
    their attacker steps were still shrinking geometrically; with a fixed
    step budget a slow contraction never meets the stopping tolerance.
    """
    if outcome.converged:
        return True
    return outcome.kind is OutcomeKind.MAX_ITER and outcome.contraction is not None and outcome.contraction < 1.0


def is_converging_mixed(outcome: IbrOutcome) -> bool:
    """``is_converging`` with a strictly positive limiting fusion weight."""
    return is_converging(outcome) and outcome.last_alpha > 0.0


@dataclass
class IbrTrace:
    initial_y_bar: np.ndarray
    steps: list = field(default_factory=list)  # (alpha_i, y_bar_i, region of y_bar_{i-1})
    outcome: Optional[IbrOutcome] = None

    @property
    def alphas(self) -> np.ndarray:
        return np.array([s[0] for s in self.steps])

    @property
    def y_bars(self) -> np.ndarray:
        return np.array([s[1] for s in self.steps])


def ibr_run(p: GameParams, y_bar_0, cfg: IbrConfig = IbrConfig()) -> IbrTrace:
    """Run the alternating protocol from ``y_bar_0`` and record every step.

    Stop rules, checked in order each iteration: a fusion weight of one
    (TrivialInit on the first step, else ExitAlphaOne); both the weight and
    the attacker output settled (from the second step on); attacker output
    farther than ``divergence_norm`` from ``zeta``; otherwise continue until
    ``max_iter``. On an exit at weight one the attacker does not move and
    its previous output is recorded.
    """
    yb = as_vec(y_bar_0, "y_bar_0")
    if yb.shape != p.y_hat.shape:
        raise ValueError("y_bar_0 has the wrong dimension")
    trace = IbrTrace(initial_y_bar=yb.copy())
    a_prev = 0.0
    steps = [np.nan, np.nan]
    for i in range(1, cfg.max_iter + 1):
        region, a = _sensor_case(yb, p.y_hat, p.mu)
        if a >= 1.0 - cfg.tau_one:
            trace.steps.append((a, yb.copy(), region))
            kind = OutcomeKind.TRIVIAL_INIT if i == 1 else OutcomeKind.EXIT_ALPHA_ONE
            trace.outcome = IbrOutcome(kind, i, a)
            return trace
        new = (p.y_attack - a * p.zeta) / (1.0 - a)
        step = float(np.linalg.norm(new - yb))
        steps = [steps[1], step]
        yb = new
        trace.steps.append((a, yb.copy(), region))
        if i >= 2 and abs(a - a_prev) < cfg.alpha_tol and step <= cfg.alpha_tol * (1.0 + np.linalg.norm(yb)):
            kind = OutcomeKind.CONVERGED_ZERO if a == 0.0 else OutcomeKind.CONVERGED_MIXED
            trace.outcome = IbrOutcome(kind, i, a, alpha_star=a, y_bar_star=yb.copy())
            return trace
        if np.linalg.norm(yb - p.zeta) > cfg.divergence_norm:
            trace.outcome = IbrOutcome(OutcomeKind.DIVERGED, i, a)
            return trace
        a_prev = a
    prev, last = steps
    if prev > 0:
        ratio = last / prev
    else:
        ratio = 0.0 if last == 0.0 else float("inf")
    trace.outcome = IbrOutcome(OutcomeKind.MAX_ITER, cfg.max_iter, a, contraction=ratio)
    return trace


def run_batch(p: GameParams, starts, cfg: IbrConfig = IbrConfig(), backend: Optional[str] = None) -> list[IbrOutcome]:
    """Terminal outcomes of ``ibr_run`` for every row of ``starts`` (no traces)."""
    starts = np.atleast_2d(np.asarray(starts, dtype=np.float64))
    kinds, alphas, ybars, iters, contr = _kernels.ibr_terminal_batch(
        p.y_hat, p.mu, p.zeta, p.y_attack, starts,
        cfg.max_iter, cfg.alpha_tol, cfg.tau_one, cfg.divergence_norm, backend=backend,
    )
    out = []
    for kind, a, yb, it, c in zip(kinds, alphas, ybars, iters, contr):
        kind = OutcomeKind(int(kind))
        conv = kind in (OutcomeKind.CONVERGED_ZERO, OutcomeKind.CONVERGED_MIXED)
        out.append(IbrOutcome(
            kind, int(it), float(a),
            alpha_star=float(a) if conv else None,
            y_bar_star=yb.copy() if conv else None,
            contraction=float(c) if kind is OutcomeKind.MAX_ITER else None,
        ))
    return out


def is_nontrivial_init(p: GameParams, y_bar_0, tau_one: float = 1e-9) -> bool:
    """True when the first sensor response to ``y_bar_0`` is not a weight of one."""
    region, a = _sensor_case(as_vec(y_bar_0, "y_bar_0"), p.y_hat, p.mu)
    return region is not Region.TRUST_SELF and a < 1.0 - tau_one


def sample_initial_conditions(p: GameParams, count: int, radius: float, seed,
                              tau_one: float = 1e-9, max_rejections: int = 1000) -> np.ndarray:
    """Seeded uniform draws from the ball of ``radius`` about ``mu``, non-trivial only.

    Rejected draws are replaced; more than ``max_rejections`` rejections for
    a single point raises SamplingExhausted. ``seed`` is anything
    ``numpy.random.default_rng`` accepts. Returns a ``(count, k)`` array.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if not radius > 0:
        raise ValueError("radius must be positive")
    rng = np.random.default_rng(seed)
    k = p.k
    out = np.empty((count, k))
    for n in range(count):
        for _ in range(max_rejections + 1):
            x = p.mu + radius * _unit_ball(rng, k)
            if is_nontrivial_init(p, x, tau_one):
                out[n] = x
                break
        else:
            raise SamplingExhausted(
                f"no non-trivial initial condition after {max_rejections} rejections"
            )
    return out


def _unit_ball(rng: np.random.Generator, k: int) -> np.ndarray:
    g = rng.standard_normal(k)
    nrm = np.linalg.norm(g)
    while nrm == 0.0:
        g = rng.standard_normal(k)
        nrm = np.linalg.norm(g)
    return g / nrm * rng.uniform() ** (1.0 / k)
