"""Batch IBR kernels (terminal state only, no trace).

Two interchangeable backends run the same loop over a batch of starting
points: a numba ``@njit`` kernel that walks each start in turn, and a
numpy fallback that advances the whole batch in lock-step under a mask.
Set ``TRUSTGAME_DISABLE_NUMBA=1`` before import to force the numpy path;
it is also used automatically when numba is missing.
"""

from __future__ import annotations

import os

import numpy as np

# Outcome codes shared with ibr.OutcomeKind.
CONVERGED_ZERO = 0
CONVERGED_MIXED = 1
EXIT_ALPHA_ONE = 2
TRIVIAL_INIT = 3
DIVERGED = 4
MAX_ITER = 5

_DISABLED = os.environ.get("TRUSTGAME_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("numba disabled by TRUSTGAME_DISABLE_NUMBA")
    from numba import njit
except ImportError:
    njit = None

HAVE_NUMBA = njit is not None


def _ibr_batch_python(y_hat, mu, zeta, y_attack, starts, max_iter, alpha_tol, tau_one, div_norm):
    n, k = starts.shape
    kinds = np.full(n, MAX_ITER, dtype=np.int8)
    alphas = np.zeros(n)
    ybars = starts.copy()
    iters = np.zeros(n, dtype=np.int64)
    contraction = np.full(n, np.nan)
    for s in range(n):
        yb = starts[s].copy()
        a_prev = 0.0
        step_prev = -1.0
        step_last = -1.0
        a = 0.0
        done = False
        for i in range(1, max_iter + 1):
            # sensor best response
            c0 = 0.0
            c1 = 0.0
            for j in range(k):
                c0 += (yb[j] - mu[j]) * (y_hat[j] - yb[j])
                c1 += (y_hat[j] - mu[j]) * (yb[j] - y_hat[j])
            if c0 >= 0.0:
                a = 0.0
            elif c1 >= 0.0:
                a = 1.0
            else:
                num = 0.0
                den = 0.0
                for j in range(k):
                    dj = yb[j] - y_hat[j]
                    num += (yb[j] - mu[j]) * dj
                    den += dj * dj
                a = min(max(num / den, 0.0), 1.0)
            iters[s] = i
            alphas[s] = a
            if a >= 1.0 - tau_one:
                kinds[s] = TRIVIAL_INIT if i == 1 else EXIT_ALPHA_ONE
                done = True
                break
            # attacker best response
            step = 0.0
            ny = 0.0
            dz = 0.0
            for j in range(k):
                new = (y_attack[j] - a * zeta[j]) / (1.0 - a)
                step += (new - yb[j]) * (new - yb[j])
                ny += new * new
                dz += (new - zeta[j]) * (new - zeta[j])
                yb[j] = new
            step = np.sqrt(step)
            step_prev = step_last
            step_last = step
            if i >= 2 and abs(a - a_prev) < alpha_tol and step <= alpha_tol * (1.0 + np.sqrt(ny)):
                kinds[s] = CONVERGED_ZERO if a == 0.0 else CONVERGED_MIXED
                done = True
                break
            if np.sqrt(dz) > div_norm:
                kinds[s] = DIVERGED
                done = True
                break
            a_prev = a
        ybars[s] = yb
        if not done:
            if step_prev > 0.0:
                contraction[s] = step_last / step_prev
            elif step_last == 0.0:
                contraction[s] = 0.0
            else:
                contraction[s] = np.inf
    return kinds, alphas, ybars, iters, contraction


_ibr_batch_numba = njit(cache=True, nogil=True)(_ibr_batch_python) if HAVE_NUMBA else None


def _ibr_batch_numpy(y_hat, mu, zeta, y_attack, starts, max_iter, alpha_tol, tau_one, div_norm):
    n, _ = starts.shape
    kinds = np.full(n, MAX_ITER, dtype=np.int8)
    alphas = np.zeros(n)
    Y = starts.copy()
    iters = np.zeros(n, dtype=np.int64)
    a_prev = np.zeros(n)
    step_prev = np.full(n, -1.0)
    step_last = np.full(n, -1.0)
    live = np.ones(n, dtype=bool)
    for i in range(1, max_iter + 1):
        idx = np.flatnonzero(live)
        if idx.size == 0:
            break
        yb = Y[idx]
        c0 = np.sum((yb - mu) * (y_hat - yb), axis=1)
        c1 = np.sum((y_hat - mu) * (yb - y_hat), axis=1)
        d = yb - y_hat
        with np.errstate(divide="ignore", invalid="ignore"):
            mixed = np.sum((yb - mu) * d, axis=1) / np.sum(d * d, axis=1)
        a = np.where(c0 >= 0.0, 0.0, np.where(c1 >= 0.0, 1.0, np.clip(mixed, 0.0, 1.0)))
        iters[idx] = i
        alphas[idx] = a

        one = a >= 1.0 - tau_one
        kinds[idx[one]] = TRIVIAL_INIT if i == 1 else EXIT_ALPHA_ONE
        live[idx[one]] = False
        keep = ~one
        idx, a, yb = idx[keep], a[keep], yb[keep]

        new = (y_attack - a[:, None] * zeta) / (1.0 - a[:, None])
        step = np.sqrt(np.sum((new - yb) ** 2, axis=1))
        ny = np.sqrt(np.sum(new * new, axis=1))
        dz = np.sqrt(np.sum((new - zeta) ** 2, axis=1))
        Y[idx] = new
        step_prev[idx] = step_last[idx]
        step_last[idx] = step

        if i >= 2:
            conv = (np.abs(a - a_prev[idx]) < alpha_tol) & (step <= alpha_tol * (1.0 + ny))
        else:
            conv = np.zeros(idx.size, dtype=bool)
        kinds[idx[conv]] = np.where(a[conv] == 0.0, CONVERGED_ZERO, CONVERGED_MIXED)
        div = ~conv & (dz > div_norm)
        kinds[idx[div]] = DIVERGED
        live[idx[conv | div]] = False
        a_prev[idx] = a

    contraction = np.full(n, np.nan)
    m = kinds == MAX_ITER
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = step_last / step_prev
    ratio = np.where(step_prev > 0.0, ratio, np.where(step_last == 0.0, 0.0, np.inf))
    contraction[m] = ratio[m]
    return kinds, alphas, Y, iters, contraction


def ibr_terminal_batch(y_hat, mu, zeta, y_attack, starts, max_iter, alpha_tol, tau_one,
                       divergence_norm, backend=None):
    """Run IBR from every row of ``starts``; return per-run terminal arrays.

    Returns ``(kinds, alphas, y_bars, iterations, contraction)``. ``alphas``
    holds the last sensor response computed; ``contraction`` is the ratio of
    the last two attacker step lengths for runs that hit ``max_iter`` (NaN
    otherwise). ``backend`` is ``"numba"``, ``"numpy"`` or None (default).
    """
    args = (
        np.ascontiguousarray(y_hat, dtype=np.float64),
        np.ascontiguousarray(mu, dtype=np.float64),
        np.ascontiguousarray(zeta, dtype=np.float64),
        np.ascontiguousarray(y_attack, dtype=np.float64),
        np.ascontiguousarray(np.atleast_2d(starts), dtype=np.float64),
        int(max_iter), float(alpha_tol), float(tau_one), float(divergence_norm),
    )
    if backend is None:
        backend = default_backend()
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but unavailable")
        return _ibr_batch_numba(*args)
    if backend == "numpy":
        return _ibr_batch_numpy(*args)
    if backend == "python":
        return _ibr_batch_python(*args)
    raise ValueError(f"unknown backend {backend!r}")


def default_backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
