"""Grid sweeps over the attacker target, cross-checked against the predicates.

Each grid point gets its own generator, seeded from ``(seed, index)``, so a
row depends only on the config and its index. Rows are written in index
order whether the grid is evaluated serially or by a process pool, which
makes the CSV byte-identical across runs and worker counts.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO

import numpy as np

from .config import SweepConfig
from .convergence import (
    PredicateReport,
    ZetaRegion,
    equal_means_report,
    nested_zeta_sets,
    predicate_report,
)
from .errors import SamplingExhausted
from .game import GameParams
from .geometry import degeneracy_tol, norm
from .ibr import is_converging, is_converging_mixed, run_batch, sample_initial_conditions

CONVERGES = "Converges"
DIVERGES = "Diverges"
OK = "OK"
NECESSARY_VIOLATED = "NecessaryViolated"
SUFFICIENT_VIOLATED = "SufficientViolated"

SLACK_KEYS = ("zero", "weak", "mixed_in", "mixed_out", "suf1", "suf2")
SWEEP_COLUMNS = (
    "yA_1", "yA_2", "empirical", "converged_fraction", "alpha_star",
    "zero_case", "weak_case", "mixed_case", "weak_necessary", "suf1", "suf2",
    "strong_sufficient", "consistency", "mixed_fraction",
    *(f"slack_{k}" for k in SLACK_KEYS), "note",
)
REGION_COLUMNS = ("radius", "yA_1", "yA_2", "union_necessary", "intersection_sufficient")
ALPHA_AGREEMENT = 1e-6


def fmt_float(x: Optional[float]) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return "%.17g" % x


def fmt_bool(b: Optional[bool]) -> str:
    return "NA" if b is None else ("true" if b else "false")


def grid_axes(cfg: SweepConfig) -> list[np.ndarray]:
    """Grid values per swept coordinate, rounded to 12 decimals so endpoints land exactly."""
    axes = []
    for lo, hi, st in zip(cfg.grid_min, cfg.grid_max, cfg.grid_step):
        n = int(math.floor((hi - lo) / st + 1e-9)) + 1
        axes.append(np.round(lo + st * np.arange(n), 12))
    return axes


def grid_points(cfg: SweepConfig) -> np.ndarray:
    """All swept ``y_attack`` vectors, first coordinate varying slowest.

    With ``k > 2`` only the first two coordinates are swept; the others come
    from ``y_attack`` in the config, or from ``mu`` when it is absent.
    """
    axes = grid_axes(cfg)
    base = cfg.base_params().y_attack
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=1)
    pts = np.repeat(base[None, :], flat.shape[0], axis=0)
    pts[:, : flat.shape[1]] = flat
    return pts


def equal_means(p: GameParams) -> bool:
    return norm(p.zeta - p.mu) <= degeneracy_tol(p.zeta, p.mu)


def report_for(p: GameParams, tol: float) -> PredicateReport:
    """The equal-means specialization when ``zeta == mu``, else the general report."""
    return equal_means_report(p, tol) if equal_means(p) else predicate_report(p, tol)


@dataclass
class RegionVerdict:
    y_attack: np.ndarray
    empirical: str
    converged_fraction: float
    mixed_fraction: float
    alpha_star: Optional[float]
    report: PredicateReport
    consistency: str
    note: str = ""

    def csv_fields(self) -> list[str]:
        r = self.report
        y2 = fmt_float(self.y_attack[1]) if self.y_attack.size > 1 else ""
        return [
            fmt_float(self.y_attack[0]), y2, self.empirical,
            fmt_float(self.converged_fraction), fmt_float(self.alpha_star),
            fmt_bool(r.zero_case), fmt_bool(r.weak_case), fmt_bool(r.mixed_case),
            fmt_bool(r.weak_necessary), fmt_bool(r.suf1_holds), fmt_bool(r.suf2_holds),
            fmt_bool(r.strong_sufficient), self.consistency, fmt_float(self.mixed_fraction),
            *(fmt_float(r.slacks[k]) for k in SLACK_KEYS), self.note,
        ]


def classify(empirical: str, weak_nec: bool, strong_suf: bool, mode: str) -> str:
    """Consistency of one row; a pure function of the row's own columns."""
    if empirical == CONVERGES and not weak_nec:
        return NECESSARY_VIOLATED
    if mode == "strong" and strong_suf and empirical == DIVERGES:
        return SUFFICIENT_VIOLATED
    return OK


def evaluate_point(cfg: SweepConfig, y_attack: np.ndarray, index: int) -> RegionVerdict:
    """Run IBR from ``init_count`` sampled starts and compare with the predicates.

    A run counts as converging per ``is_converging``. Weak mode asks for at
    least one converging run, strong mode for all of them.
    """
    p = cfg.base_params().with_(y_attack=y_attack)
    report = report_for(p, cfg.slack_tol)
    note = ""
    try:
        starts = sample_initial_conditions(p, cfg.init_count, cfg.radius, [cfg.seed, index], cfg.ibr.tau_one)
        outcomes = run_batch(p, starts, cfg.ibr, cfg.backend)
    except SamplingExhausted:
        outcomes = []
        note = "SamplingExhausted"
    conv = [is_converging(o) for o in outcomes]
    mixed = [is_converging_mixed(o) for o in outcomes]
    n = len(outcomes)
    frac = sum(conv) / n if n else 0.0
    mfrac = sum(mixed) / n if n else 0.0
    if cfg.mode == "weak":
        converges = any(conv)
    else:
        converges = n > 0 and all(conv)
    alphas = [o.last_alpha for o, c in zip(outcomes, conv) if c]
    alpha_star = None
    if converges and alphas and max(alphas) - min(alphas) <= ALPHA_AGREEMENT:
        alpha_star = alphas[0]
    empirical = CONVERGES if converges else DIVERGES
    return RegionVerdict(
        y_attack=np.asarray(y_attack, dtype=np.float64).copy(),
        empirical=empirical,
        converged_fraction=frac,
        mixed_fraction=mfrac,
        alpha_star=alpha_star,
        report=report,
        consistency=classify(empirical, report.weak_necessary, report.strong_sufficient, cfg.mode),
        note=note,
    )


def _chunk_rows(args) -> list[list[str]]:
    cfg, indices, points = args
    return [evaluate_point(cfg, y, i).csv_fields() for i, y in zip(indices, points)]


def _map_rows(fn, cfg: SweepConfig, points: np.ndarray) -> Iterable[list[str]]:
    idx = np.arange(points.shape[0])
    if cfg.workers <= 1 or points.shape[0] < 2:
        yield from fn((cfg, idx, points))
        return
    # several chunks per worker keep the pool busy near the end of the grid
    n_chunks = min(points.shape[0], cfg.workers * 4)
    chunks = [(cfg, i, points[i]) for i in np.array_split(idx, n_chunks)]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        for rows in pool.map(fn, chunks):
            yield from rows


@dataclass
class SweepSummary:
    rows: int = 0
    ok: int = 0
    necessary_violated: int = 0
    sufficient_violated: int = 0
    suf1_violated: int = 0
    converges: int = 0
    sampling_exhausted: int = 0

    def footer(self, mode: str) -> str:
        return (
            f"# mode={mode} rows={self.rows} converges={self.converges}\n"
            f"# {OK}={self.ok}\n"
            f"# {NECESSARY_VIOLATED}={self.necessary_violated}\n"
            f"# {SUFFICIENT_VIOLATED}={self.sufficient_violated}\n"
            f"# Suf1Violated={self.suf1_violated}\n"
            f"# SamplingExhausted={self.sampling_exhausted}\n"
        )


def suf1_violation(mixed_fraction: float, slack_suf1: float, tol: float) -> bool:
    """A row where every run settled on a mixed weight although the first sufficient condition fails."""
    return mixed_fraction == 1.0 and slack_suf1 < -tol


def write_sweep(cfg: SweepConfig, out: TextIO) -> SweepSummary:
    """Stream the sweep CSV (header, one row per grid point, comment footer) to ``out``."""
    col = {name: i for i, name in enumerate(SWEEP_COLUMNS)}
    summary = SweepSummary()
    out.write(",".join(SWEEP_COLUMNS) + "\n")
    for row in _map_rows(_chunk_rows, cfg, grid_points(cfg)):
        out.write(",".join(row) + "\n")
        summary.rows += 1
        c = row[col["consistency"]]
        summary.ok += c == OK
        summary.necessary_violated += c == NECESSARY_VIOLATED
        summary.sufficient_violated += c == SUFFICIENT_VIOLATED
        summary.converges += row[col["empirical"]] == CONVERGES
        summary.sampling_exhausted += row[col["note"]] == "SamplingExhausted"
        summary.suf1_violated += suf1_violation(
            float(row[col["mixed_fraction"]]), float(row[col["slack_suf1"]]), cfg.slack_tol
        )
    out.write(summary.footer(cfg.mode))
    return summary


def sweep_to_string(cfg: SweepConfig) -> tuple[str, SweepSummary]:
    buf = io.StringIO()
    summary = write_sweep(cfg, buf)
    return buf.getvalue(), summary


def _region_rows(args) -> list[list[str]]:
    cfg, indices, points = args
    rows = []
    for zset in nested_zeta_sets(cfg.zeta, cfg.zeta_radii, cfg.zeta_samples, cfg.zeta_seed, cfg.zeta_shape):
        union = ZetaRegion(cfg.y_hat, cfg.mu, zset, "union", cfg.slack_tol)
        inter = ZetaRegion(cfg.y_hat, cfg.mu, zset, "intersection", cfg.slack_tol)
        for y in points:
            y2 = fmt_float(y[1]) if y.size > 1 else ""
            rows.append([fmt_float(zset.radius), fmt_float(y[0]), y2, fmt_bool(union(y)), fmt_bool(inter(y))])
    return rows


def write_regions(cfg: SweepConfig, out: TextIO) -> dict:
    """CSV of union/intersection membership for every radius and grid point.

    Rows are grouped by radius (ascending), then by grid index. Sample sets
    are nested across radii, so membership is monotone in the radius.
    """
    points = grid_points(cfg)
    out.write(",".join(REGION_COLUMNS) + "\n")
    counts: dict = {}
    n_radii = len(set(cfg.zeta_radii))
    by_radius: list[list[list[str]]] = [[] for _ in range(n_radii)]
    for chunk_rows in _map_region_chunks(cfg, points):
        # each chunk yields its rows radius by radius
        per = len(chunk_rows) // n_radii
        for j in range(n_radii):
            by_radius[j].extend(chunk_rows[j * per:(j + 1) * per])
    for rows in by_radius:
        for row in rows:
            out.write(",".join(row) + "\n")
            c = counts.setdefault(row[0], [0, 0])
            c[0] += row[3] == "true"
            c[1] += row[4] == "true"
    if cfg.epsilon is not None:
        zsets = nested_zeta_sets(cfg.zeta, cfg.zeta_radii, cfg.zeta_samples, cfg.zeta_seed, cfg.zeta_shape)
        region = ZetaRegion(cfg.y_hat, cfg.mu, zsets[-1], "union", cfg.slack_tol, cfg.epsilon)
        out.write(f"# mismatch_bound_fraction={fmt_float(region.mismatch_bound_ok.mean())} epsilon={fmt_float(cfg.epsilon)}\n")
    for radius, (u, s) in counts.items():
        out.write(f"# radius={radius} union={u} intersection={s}\n")
    return counts


def _map_region_chunks(cfg: SweepConfig, points: np.ndarray) -> Iterable[list[list[str]]]:
    idx = np.arange(points.shape[0])
    if cfg.workers <= 1 or points.shape[0] < 2:
        yield _region_rows((cfg, idx, points))
        return
    n_chunks = min(points.shape[0], cfg.workers * 4)
    chunks = [(cfg, i, points[i]) for i in np.array_split(idx, n_chunks)]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        yield from pool.map(_region_rows, chunks)
