"""Analytic convergence predicates for iterated best response.

Every inequality is reported as a signed slack that is nonnegative when the
inequality holds (strict inequalities need a positive slack). A tolerance
``tol`` moves each verdict in the direction that favors the claim under
test. Necessary conditions are relaxed to ``slack >= -tol`` and sufficient
conditions tightened to ``slack >= tol``, so round-off on a region boundary
is never reported as a counterexample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ParamsMismatch, PreconditionViolated
from .game import GameParams
from .geometry import (
    DEGENERACY_RTOL,
    _hull_projection,
    as_vec,
    degeneracy_tol,
    distance_to_line,
    norm,
    projection_length,
    same_closed_side,
)


@dataclass
class PredicateReport:
    zero_case: bool
    weak_case: bool
    mixed_case: Optional[bool]  # None when y_hat == y_attack (no separating line)
    weak_necessary: bool
    suf1_holds: bool
    suf2_holds: bool
    strong_sufficient: bool
    slacks: dict = field(default_factory=dict)
    psi_branch: Optional[str] = None  # "in", "out" or "both" (zeta or mu_hat on the line)
    collinear: bool = False


def _holds(slack: float, tol: float, necessary: bool, strict: bool = False) -> bool:
    if math.isnan(slack):
        return False
    bound = -tol if necessary else tol
    return slack > bound if strict else slack >= bound


def mismatch_bound_holds(p: GameParams, eps: float) -> bool:
    """Mean mismatch bound ``||zeta - mu|| <= eps/(1+eps) ||y_hat - mu||``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    return norm(p.zeta - p.mu) <= eps / (1.0 + eps) * norm(p.y_hat - p.mu)


def projected_mismatch_bound_holds(p: GameParams, eps: float, tol: float = 0.0) -> bool:
    """``||zeta - mu_hat|| <= eps ||y_hat - mu_hat||`` (requires the mismatch bound)."""
    if not mismatch_bound_holds(p, eps):
        raise PreconditionViolated("mismatch bound does not hold for this eps")
    m = p.mu_hat()
    return norm(p.zeta - m) <= eps * norm(p.y_hat - m) + tol


def _collinear(a: np.ndarray, b: np.ndarray, c: np.ndarray, tau: Optional[float] = None) -> bool:
    """Whether ``c`` lies on the line through ``a`` and ``b`` (any point does if ``a == b``)."""
    if tau is None:
        tau = degeneracy_tol(a, b, c)
    if norm(b - a) <= tau:
        return True
    return distance_to_line(c, a, b, tau) <= tau


def predicate_report(p: GameParams, tol: float = 0.0) -> PredicateReport:
    """Evaluate the weak-convergence necessary and strong-convergence sufficient conditions.

    Necessary: ``zero_case or (weak_case and mixed_case)``. The third case
    picks its branch by which side of the line through ``y_hat`` and
    ``y_attack`` holds ``zeta`` relative to ``mu_hat``. When either point is
    on that line both branches are evaluated and OR-ed.
    Sufficient: ``suf1 and suf2``. A projection onto a zero vector is
    undefined and drops out of the minimum in ``suf2``.
    """
    y_hat, zeta, y_a = p.y_hat, p.zeta, p.y_attack
    # one threshold for every degeneracy test, scaled by all inputs
    tau = degeneracy_tol(y_hat, zeta, y_a, p.mu)
    m = _hull_projection(p.mu, [y_hat, zeta, y_a], tau)
    g = y_hat - m
    dist_az = norm(y_a - zeta)

    s_zero = float((y_a - m) @ (y_hat - y_a))
    s_weak = -float(g @ (y_a - y_hat))
    line_ok = norm(y_a - y_hat) > tau
    s_mix_in = projection_length(g, y_hat - y_a, tau) - dist_az if line_ok else math.nan
    s_mix_out = norm(g) - dist_az

    zero_case = _holds(s_zero, tol, True)
    weak_case = _holds(s_weak, tol, True, strict=True)
    if line_ok:
        if distance_to_line(zeta, y_hat, y_a, tau) <= tau or distance_to_line(m, y_hat, y_a, tau) <= tau:
            branch = "both"
            mixed_case = _holds(s_mix_in, tol, True) or _holds(s_mix_out, tol, True)
        elif same_closed_side(zeta, y_hat, y_a, m, tau):
            branch = "in"
            mixed_case = _holds(s_mix_in, tol, True)
        else:
            branch = "out"
            mixed_case = _holds(s_mix_out, tol, True)
    else:
        branch, mixed_case = None, None
    weak_nec = zero_case or (weak_case and bool(mixed_case))

    s_suf1 = -float((y_a - zeta) @ g)
    terms = [projection_length(g, d, tau) for d in (y_a - zeta, y_a - y_hat) if norm(d) > tau]
    s_suf2 = (min(terms) if terms else 0.0) - dist_az
    suf1 = _holds(s_suf1, tol, False)
    suf2 = _holds(s_suf2, tol, False)

    return PredicateReport(
        zero_case=zero_case,
        weak_case=weak_case,
        mixed_case=mixed_case,
        weak_necessary=weak_nec,
        suf1_holds=suf1,
        suf2_holds=suf2,
        strong_sufficient=suf1 and suf2,
        slacks={
            "zero": s_zero,
            "weak": s_weak,
            "mixed_in": s_mix_in,
            "mixed_out": s_mix_out,
            "suf1": s_suf1,
            "suf2": s_suf2,
        },
        psi_branch=branch,
        collinear=_collinear(m, y_a, y_hat, tau),
    )


def weak_necessary(p: GameParams, tol: float = 0.0) -> PredicateReport:
    return predicate_report(p, tol)


def strong_sufficient(p: GameParams, tol: float = 0.0) -> PredicateReport:
    return predicate_report(p, tol)


def _require_equal_means(p: GameParams) -> None:
    if norm(p.zeta - p.mu) > degeneracy_tol(p.zeta, p.mu):
        raise ParamsMismatch("equal-means conditions need zeta == mu")


def equal_means_report(p: GameParams, tol: float = 0.0) -> PredicateReport:
    """The necessary and sufficient conditions specialized to ``zeta == mu``.

    No projection of the mean and no half-plane test are needed: ``mu``
    already lies in the plane, and the mixed case always takes the branch
    with the projected bound.
    """
    _require_equal_means(p)
    y_hat, mu, y_a = p.y_hat, p.mu, p.y_attack
    g = y_hat - mu
    dist = norm(y_a - mu)
    tau = degeneracy_tol(y_hat, mu, y_a)

    s_zero = float((y_a - mu) @ (y_hat - y_a))
    s_weak = -float(g @ (y_a - y_hat))
    s_mix = projection_length(g, y_hat - y_a, tau) - dist
    zero_case = _holds(s_zero, tol, True)
    weak_case = _holds(s_weak, tol, True, strict=True)
    mixed_case = _holds(s_mix, tol, True)

    s_suf1 = -float((y_a - mu) @ g)
    if dist > tau:
        s_suf2 = projection_length(g, y_a - mu, tau) - dist
    else:
        # y_attack == mu: the left side is 0 and only the y_hat-side bound is defined
        s_suf2 = projection_length(g, y_a - y_hat, tau)
    suf1 = _holds(s_suf1, tol, False)
    suf2 = _holds(s_suf2, tol, False)
    return PredicateReport(
        zero_case=zero_case,
        weak_case=weak_case,
        mixed_case=mixed_case,
        weak_necessary=zero_case or (weak_case and mixed_case),
        suf1_holds=suf1,
        suf2_holds=suf2,
        strong_sufficient=suf1 and suf2,
        slacks={"zero": s_zero, "weak": s_weak, "mixed_in": s_mix, "mixed_out": math.nan,
                "suf1": s_suf1, "suf2": s_suf2},
        psi_branch="in",
        collinear=_collinear(mu, y_a, y_hat, tau),
    )


def weak_necessary_equal_means(p: GameParams, tol: float = 0.0) -> PredicateReport:
    return equal_means_report(p, tol)


def strong_sufficient_equal_means(p: GameParams, tol: float = 0.0) -> PredicateReport:
    return equal_means_report(p, tol)


def _rownorm(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->i", x, x))


def _rowdot(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", x, y)


def _batch_hull_projection(mu: np.ndarray, anchors: np.ndarray, tau: np.ndarray) -> np.ndarray:
    """Row-wise ``_hull_projection`` of ``mu`` onto ``anchors[n]`` (shape ``(n, 3, k)``)."""
    n, _, k = anchors.shape
    dists = np.linalg.norm(anchors - mu, axis=2)
    base = anchors[np.arange(n), np.argmin(dists, axis=1)]
    basis = []
    for j in range(3):
        v = anchors[:, j] - base
        for _ in range(2):
            for q in basis:
                v = v - _rowdot(q, v)[:, None] * q
        nv = _rownorm(v)
        ok = nv > tau
        q = np.zeros_like(v)
        q[ok] = v[ok] / nv[ok, None]
        basis.append(q)
    r = mu - base
    out = base.copy()
    for q in basis:
        out += _rowdot(q, r)[:, None] * q
    rank = sum((_rownorm(q) > 0).astype(int) for q in basis)
    full = rank >= k
    out[full] = mu
    return out


def _batch_line_distance(q: np.ndarray, a: np.ndarray, d: np.ndarray) -> np.ndarray:
    r = q - a
    dd = float(d @ d)
    return _rownorm(r - (r @ d)[:, None] / dd * d[None, :])


def predicate_batch(y_hat, mu, zetas, y_attack, tol: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """``(weak_necessary, strong_sufficient)`` of ``predicate_report`` for every row of ``zetas``.

    Same formulas and degeneracy rules as the scalar report, evaluated
    with array operations for large sets of attacker means.
    """
    y_hat = np.asarray(y_hat, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    y_a = np.asarray(y_attack, dtype=np.float64)
    Z = np.atleast_2d(np.asarray(zetas, dtype=np.float64))
    n = Z.shape[0]
    scale = np.maximum.reduce([_rownorm(Z), np.full(n, norm(y_hat)), np.full(n, norm(y_a)), np.full(n, norm(mu))])
    tau = DEGENERACY_RTOL * np.where(scale > 0.0, scale, 1.0)

    anchors = np.stack([np.broadcast_to(y_hat, Z.shape), Z, np.broadcast_to(y_a, Z.shape)], axis=1)
    M = _batch_hull_projection(mu, anchors, tau)
    G = y_hat - M
    dist_az = _rownorm(y_a - Z)

    s_zero = _rowdot(y_a - M, np.broadcast_to(y_hat - y_a, Z.shape))
    s_weak = -(G @ (y_a - y_hat))
    zero_case = s_zero >= -tol
    weak_case = s_weak > -tol

    d_line = y_a - y_hat
    line_len = norm(d_line)
    line_ok = line_len > tau
    if line_len > 0.0:
        proj_in = np.abs(G @ d_line) / line_len
        on_z = _batch_line_distance(Z, y_hat, d_line) <= tau
        on_m = _batch_line_distance(M, y_hat, d_line) <= tau
        oz = (Z - y_hat) - ((Z - y_hat) @ d_line)[:, None] / (line_len ** 2) * d_line
        om = (M - y_hat) - ((M - y_hat) @ d_line)[:, None] / (line_len ** 2) * d_line
        same_side = _rowdot(oz, om) >= 0.0
    else:
        proj_in = np.zeros(n)
        on_z = on_m = same_side = np.ones(n, dtype=bool)
    mix_in = line_ok & (proj_in - dist_az >= -tol)
    mix_out = _rownorm(G) - dist_az >= -tol
    both = on_z | on_m
    mixed = np.where(both, mix_in | mix_out, np.where(same_side, mix_in, mix_out)) & line_ok
    weak_nec = zero_case | (weak_case & mixed)

    s_suf1 = -_rowdot(y_a - Z, G)
    big = np.inf
    d1 = y_a - Z
    n1 = _rownorm(d1)
    t1 = np.full(n, big)
    ok1 = n1 > tau
    t1[ok1] = np.abs(_rowdot(G[ok1], d1[ok1])) / n1[ok1]
    t2 = np.full(n, big)
    if line_len > 0.0:
        t2 = np.where(line_ok, proj_in, big)
    m12 = np.minimum(t1, t2)
    m12 = np.where(np.isinf(m12), 0.0, m12)
    s_suf2 = m12 - dist_az
    strong = (s_suf1 >= tol) & (s_suf2 >= tol)
    return weak_nec, strong


# ---------------------------------------------------------------------------
# Uncertain attacker mean: union / intersection over a sampled set of zetas.


@dataclass(frozen=True)
class ZetaSet:
    """Seeded sample of candidate attacker means around ``center``.

    Samples are ``center + rho * u_j`` for fixed unit draws ``u_j`` (ball or
    sphere) and every ``rho`` in ``inner_radii`` plus ``radius``. Sets built
    with the same seed and growing radii are therefore nested.
    """

    center: np.ndarray
    radius: float
    sample_count: int = 100
    seed: int = 0
    shape: str = "ball"
    inner_radii: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec(self.center, "center"))
        if self.radius < 0 or any(r < 0 for r in self.inner_radii):
            raise ValueError("radii must be nonnegative")
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.shape not in ("ball", "circle"):
            raise ValueError("shape must be 'ball' or 'circle'")

    def unit_samples(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        k = self.center.size
        g = rng.standard_normal((self.sample_count, k))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        if self.shape == "ball":
            g *= rng.uniform(size=(self.sample_count, 1)) ** (1.0 / k)
        return g

    def points(self) -> np.ndarray:
        u = self.unit_samples()
        out = []
        for rho in sorted(set(self.inner_radii) | {self.radius}):
            out.append(self.center[None, :] if rho == 0 else self.center + rho * u)
        return np.concatenate(out)


def nested_zeta_sets(center, radii: Sequence[float], sample_count: int = 100, seed: int = 0,
                     shape: str = "ball") -> list[ZetaSet]:
    radii = sorted({float(r) for r in radii})
    return [ZetaSet(center, r, sample_count, seed, shape, tuple(radii[:i])) for i, r in enumerate(radii)]


class ZetaRegion:
    """Membership test for ``y_attack`` over a sampled set of attacker means.

    ``mode="union"`` accepts a target that meets the necessary conditions
    for at least one sampled mean; ``mode="intersection"`` needs the
    sufficient conditions for every sampled mean.
    """

    def __init__(self, y_hat, mu, zset: ZetaSet, mode: str, tol: float = 0.0, eps: Optional[float] = None):
        if mode not in ("union", "intersection"):
            raise ValueError("mode must be 'union' or 'intersection'")
        self.y_hat = as_vec(y_hat, "y_hat")
        self.mu = as_vec(mu, "mu")
        self.zset = zset
        self.mode = mode
        self.tol = tol
        self.zetas = zset.points()
        self.mismatch_bound_ok = None
        if eps is not None:
            # Samples are checked against the mismatch bound and the result is reported, not enforced.
            probe = GameParams(self.y_hat, self.mu, self.mu, self.mu)
            self.mismatch_bound_ok = np.array([mismatch_bound_holds(probe.with_(zeta=z), eps) for z in self.zetas])

    def __call__(self, y_attack) -> bool:
        y_attack = as_vec(y_attack, "y_attack")
        nec, suf = predicate_batch(self.y_hat, self.mu, self.zetas, y_attack, self.tol)
        return bool(nec.any()) if self.mode == "union" else bool(suf.all())


def necessary_region_union(y_hat, mu, zset: ZetaSet, tol: float = 0.0, eps: Optional[float] = None) -> ZetaRegion:
    return ZetaRegion(y_hat, mu, zset, "union", tol, eps)


def sufficient_region_intersection(y_hat, mu, zset: ZetaSet, tol: float = 0.0,
                                   eps: Optional[float] = None) -> ZetaRegion:
    return ZetaRegion(y_hat, mu, zset, "intersection", tol, eps)
