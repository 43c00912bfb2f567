"""Vector primitives: orthogonal projections and closed half-plane tests.

Every point of the game (estimates, means, targets) is a 1-D float64 array.
Degeneracy is judged against ``DEGENERACY_RTOL`` times the scale of the
inputs, so all predicates stay total at double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateDirection

DEGENERACY_RTOL = 1e-12


def as_vec(x, name: str = "vector") -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float64 array (scalars become length 1)."""
    v = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D vector, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise ValueError(f"{name} has non-finite coordinates")
    return v


def norm(v: np.ndarray) -> float:
    return math.sqrt(float(v @ v))


def input_scale(*vecs: np.ndarray) -> float:
    """Largest 2-norm among ``vecs``; 1.0 when every vector is zero."""
    s = max((norm(v) for v in vecs), default=0.0)
    return s if s > 0.0 else 1.0


def degeneracy_tol(*vecs: np.ndarray) -> float:
    return DEGENERACY_RTOL * input_scale(*vecs)


def project(x1, x2) -> np.ndarray:
    """Orthogonal projection of ``x1`` onto the direction of ``x2``.

    Raises DegenerateDirection when ``x2`` is numerically zero.
    """
    x1 = as_vec(x1, "x1")
    x2 = as_vec(x2, "x2")
    if x1.shape != x2.shape:
        raise ValueError(f"dimension mismatch: {x1.shape} vs {x2.shape}")
    nn = float(x2 @ x2)
    if math.sqrt(nn) <= degeneracy_tol(x1, x2):
        raise DegenerateDirection("cannot project onto a zero-length direction")
    return (float(x1 @ x2) / nn) * x2


def projection_length(x1: np.ndarray, x2: np.ndarray, tau: Optional[float] = None) -> float:
    """``||project(x1, x2)||``, taken as 0 when ``x2`` is degenerate.

    Unvalidated fast path for internal callers holding float64 vectors;
    ``tau`` overrides the scale-based degeneracy threshold.
    """
    nn = float(x2 @ x2)
    if tau is None:
        tau = degeneracy_tol(x1, x2)
    if math.sqrt(nn) <= tau:
        return 0.0
    return abs(float(x1 @ x2)) / math.sqrt(nn)


def project_onto_affine_hull(p, anchors: Sequence) -> np.ndarray:
    """Closest point to ``p`` in the affine hull of ``anchors``.

    The hull may be a point, a line, a plane or all of R^k; collinear or
    coincident anchors simply lower its dimension. The anchor nearest to
    ``p`` is used as the origin of the hull, so a ``p`` that coincides with
    an anchor is returned unchanged, bit for bit.
    """
    p = as_vec(p, "p")
    pts = [as_vec(a, "anchor") for a in anchors]
    if not pts:
        raise ValueError("anchors must be non-empty")
    if any(a.shape != p.shape for a in pts):
        raise ValueError("anchors and p must share a dimension")
    return _hull_projection(p, pts)


def _hull_projection(p: np.ndarray, pts: list, tol: Optional[float] = None) -> np.ndarray:
    base = min(pts, key=lambda a: norm(a - p))
    if tol is None:
        tol = degeneracy_tol(p, *pts)
    basis = []
    for a in pts:
        v = a - base
        # two Gram-Schmidt passes keep the basis orthonormal to round-off
        for _ in range(2):
            for q in basis:
                v = v - float(q @ v) * q
        n = norm(v)
        if n > tol:
            basis.append(v / n)
        if len(basis) == p.size:
            return p.copy()
    r = p - base
    out = base.copy()
    for q in basis:
        out = out + float(q @ r) * q
    return out


def distance_to_line(q: np.ndarray, a: np.ndarray, b: np.ndarray, tau: Optional[float] = None) -> float:
    """Distance from ``q`` to the line through ``a`` and ``b`` (to ``a`` if they coincide)."""
    d = b - a
    if tau is None:
        tau = degeneracy_tol(a, b)
    if norm(d) <= tau:
        return norm(q - a)
    return norm(_offset_from_line(q, a, d))


def _offset_from_line(q: np.ndarray, a: np.ndarray, d: np.ndarray) -> np.ndarray:
    r = q - a
    return r - (float(r @ d) / float(d @ d)) * d


@dataclass(frozen=True)
class HalfPlane:
    """Closed half-plane bounded by the line through ``a`` and ``b``, on the side of ``witness``."""

    a: np.ndarray
    b: np.ndarray
    witness: np.ndarray

    def __post_init__(self):
        for name in ("a", "b", "witness"):
            object.__setattr__(self, name, as_vec(getattr(self, name), name))
        if norm(self.b - self.a) <= degeneracy_tol(self.a, self.b):
            raise DegenerateDirection("half-plane line needs two distinct points")

    @property
    def direction(self) -> np.ndarray:
        return self.b - self.a

    def flipped(self) -> "HalfPlane":
        """The complementary closed half-plane (witness mirrored across the line)."""
        off = _offset_from_line(self.witness, self.a, self.direction)
        return HalfPlane(self.a, self.b, self.witness - 2.0 * off)

    def on_boundary(self, q) -> bool:
        q = as_vec(q, "q")
        off = _offset_from_line(q, self.a, self.direction)
        return norm(off) <= degeneracy_tol(q, self.a, self.b, self.witness)

    def contains(self, q) -> bool:
        return in_closed_half_plane(q, self)


def in_closed_half_plane(q, h: HalfPlane) -> bool:
    """True iff ``q`` is on the witness side of ``h``'s line or on the line itself.

    Points are assumed coplanar with the half-plane. A witness lying on the
    line does not pick a side, so every ``q`` is accepted in that case.
    """
    return same_closed_side(as_vec(q, "q"), h.a, h.b, h.witness)


def same_closed_side(q: np.ndarray, a: np.ndarray, b: np.ndarray, witness: np.ndarray,
                     tol: Optional[float] = None) -> bool:
    """Unvalidated core of ``in_closed_half_plane``; ``a != b`` is assumed."""
    d = b - a
    if tol is None:
        tol = degeneracy_tol(q, a, b, witness)
    oq = _offset_from_line(q, a, d)
    if norm(oq) <= tol:
        return True
    ow = _offset_from_line(witness, a, d)
    if norm(ow) <= tol:
        return True
    return bool(oq @ ow >= 0.0)
