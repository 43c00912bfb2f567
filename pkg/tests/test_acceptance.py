"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are printed in the pytest terminal summary (see conftest.py) and
also when this file is run directly with ``python3 tests/test_acceptance.py``.
"""

import csv
import io
import time
from pathlib import Path

import numpy as np
import pytest

from draws import mismatch_bounded_draws, far_side_mixed_draws
from trustgame.config import load_config
from trustgame.convergence import equal_means_report, projected_mismatch_bound_holds, predicate_report
from trustgame.equilibrium import Equilibrium, EquilibriumKind, analyze_mixed, mixed_equilibria, verify_nash
from trustgame.errors import DegenerateGame, SamplingExhausted
from trustgame.game import GameParams, best_response_attacker, best_response_sensor
from trustgame.ibr import OutcomeKind, ibr_run, sample_initial_conditions
from trustgame.sweep import grid_points, sweep_to_string, write_regions

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
RESULTS: list[str] = []


def record(name: str, ok: bool, detail: str) -> None:
    RESULTS.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    print(RESULTS[-1])
    assert ok, detail


def rows_of(text):
    body = "\n".join(l for l in text.splitlines() if not l.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


@pytest.fixture(scope="module")
def offset_sweep():
    cfg = load_config(CONFIGS / "offset_means_weak.json")
    t0 = time.perf_counter()
    text, summary = sweep_to_string(cfg)
    return cfg, text, summary, time.perf_counter() - t0


def test_offset_means_necessary_soundness(offset_sweep):
    cfg, _, s, elapsed = offset_sweep
    assert (cfg.init_count, cfg.ibr.max_iter, s.rows, cfg.slack_tol) == (20, 100, 41 * 41, 1e-6)
    record("offset-means weak sweep", s.necessary_violated == 0 and elapsed < 60,
           f"{s.rows} rows, {s.converges} converge, NecessaryViolated={s.necessary_violated}, {elapsed:.1f}s")


def test_offset_means_sufficient_soundness():
    cfg = load_config(CONFIGS / "offset_means_strong.json")
    assert cfg.mode == "strong"
    text, s = sweep_to_string(cfg)
    # independent recount of the suf1 clause straight from the CSV columns
    rows = rows_of(text)
    strongly = [r for r in rows if float(r["mixed_fraction"]) == 1.0]
    right_of_line = [r for r in strongly if -float(r["slack_suf1"]) > 1e-6]
    assert len(right_of_line) == s.suf1_violated
    record("offset-means strong sweep", s.sufficient_violated == 0 and not right_of_line,
           f"{s.rows} rows, SufficientViolated={s.sufficient_violated}, "
           f"strongly convergent right of the suf1 line={len(right_of_line)} (of {len(strongly)})")


def test_equal_means_sweep_and_scalar_slice():
    cfg = load_config(CONFIGS / "equal_means_weak.json")
    _, s = sweep_to_string(cfg)
    # slice y_A = (t, 0); hand-derived necessary interval is |t| <= 1
    slice_cfg = cfg.with_overrides(grid_min=(-2.0, 0.0), grid_max=(2.0, 0.0), grid_step=(0.05, 1.0))
    rows = rows_of(sweep_to_string(slice_cfg)[0])
    conv = [float(r["yA_1"]) for r in rows if r["empirical"] == "Converges"]
    pred = [float(r["yA_1"]) for r in rows if r["weak_necessary"] == "true"]
    lo, hi = min(conv), max(conv)
    step = 0.05 + 1e-9
    ok = (s.necessary_violated == 0 and abs(lo + 1.0) <= step and abs(hi - 1.0) <= step
          and abs(lo - min(pred)) <= step and abs(hi - max(pred)) <= step)
    record("equal-means sweep", ok,
           f"NecessaryViolated={s.necessary_violated}; slice boundary empirical [{lo:g}, {hi:g}], "
           f"predicate [{min(pred):g}, {max(pred):g}], analytic [-1, 1]")


def test_nash_fixed_point_property():
    rng = np.random.default_rng(2024)
    passed = draws = 0
    while draws < 1000:
        k = int(rng.choice([1, 2, 3, 5]))
        p = GameParams(*rng.uniform(-1, 1, size=(4, k)))
        try:
            (y0,) = sample_initial_conditions(p, 1, 2.0, int(rng.integers(1 << 31)))
        except SamplingExhausted:
            continue
        out = ibr_run(p, y0).outcome
        if out.kind is OutcomeKind.CONVERGED_ZERO:
            kind = EquilibriumKind.ZERO_ALPHA
        elif out.kind is OutcomeKind.CONVERGED_MIXED:
            kind = EquilibriumKind.MIXED
        else:
            continue
        draws += 1
        eq = Equilibrium(kind, out.alpha_star, out.y_bar_star)
        passed += verify_nash(eq, p, alpha_grid=1001, perturbations=200, seed=draws, tol=1e-8)
    record("nash fixed point", passed == draws, f"{passed}/{draws} converged draws pass the brute-force check")


def test_quadratic_fixed_point_oracle():
    rng = np.random.default_rng(7)
    worst, count = 0.0, 0
    for _ in range(5000):
        k = int(rng.choice([1, 2, 3, 5]))
        p = GameParams(*rng.uniform(-1, 1, size=(4, k)))
        try:
            eqs = mixed_equilibria(p)
        except DegenerateGame:
            continue
        for e in eqs:
            count += 1
            res_s = abs(best_response_sensor(e.y_bar_star, p) - e.alpha_star)
            res_a = float(np.linalg.norm(best_response_attacker(e.alpha_star, p) - e.y_bar_star))
            worst = max(worst, res_s, res_a)
    (w,) = analyze_mixed(GameParams([1.0], [0.0], [0.0], [-0.2])).equilibria
    worked = abs(w.alpha_star - 0.2) <= 1e-9 and abs(w.y_bar_star[0] + 0.25) <= 1e-9
    record("quadratic oracle", worst < 1e-6 and worked and count > 100,
           f"{count} validated equilibria, worst residual {worst:.2e}; worked instance "
           f"({w.alpha_star:.12g}, {w.y_bar_star[0]:.12g})")


def test_projection_bound_suites():
    rng = np.random.default_rng(31)
    fail1 = sum(not projected_mismatch_bound_holds(p, eps, tol=1e-9) for p, eps in mismatch_bounded_draws(rng, 10000))
    fail2 = 0
    for p, m, y_bar in far_side_mixed_draws(rng, 10000):
        g = p.y_hat - m
        d_att, d_bar = p.y_attack - p.y_hat, y_bar - p.y_hat
        lhs = abs(g @ d_att) / np.linalg.norm(d_att)
        rhs = abs(g @ d_bar) / np.linalg.norm(d_bar)
        fail2 += lhs < rhs - 1e-9
    record("projection bounds", fail1 == 0 and fail2 == 0, f"mismatch bound failures {fail1}/10000, far-side projection failures {fail2}/10000")


def _nested(name, column, growing):
    cfg = load_config(CONFIGS / name)
    assert sorted(cfg.zeta_radii) == [0.0, 0.2, 0.4] and cfg.zeta_samples == 100
    buf = io.StringIO()
    counts = write_regions(cfg, buf)
    rows = rows_of(buf.getvalue())
    n = grid_points(cfg).shape[0]
    blocks = [[r[column] == "true" for r in rows[j * n:(j + 1) * n]] for j in range(3)]
    violations = 0
    for smaller, larger in zip(blocks, blocks[1:]):
        inner, outer = (smaller, larger) if growing else (larger, smaller)
        violations += sum(a and not b for a, b in zip(inner, outer))
    sizes = [c[0 if growing else 1] for c in counts.values()]
    return violations, sizes


def test_region_monotonicity():
    v_union, union_sizes = _nested("union_regions.json", "union_necessary", True)
    v_inter, inter_sizes = _nested("intersection_regions.json", "intersection_sufficient", False)
    record("region monotonicity", v_union == 0 and v_inter == 0,
           f"union sizes {union_sizes} ({v_union} subset violations), "
           f"intersection sizes {inter_sizes} ({v_inter} subset violations)")


def test_equal_means_reduction():
    rng = np.random.default_rng(5)
    keys = ("zero_case", "weak_case", "mixed_case", "weak_necessary", "suf1_holds", "strong_sufficient")
    disagree = 0
    for i in range(10000):
        k = int(rng.choice([1, 2, 3, 5]))
        y_hat, mu, y_a = rng.uniform(-1, 1, size=(3, k))
        if i % 10 == 0:
            y_a = mu + rng.uniform(-1, 1) * (y_hat - mu)  # collinear draws
        p = GameParams(y_hat, mu, mu, y_a)
        for tol in (0.0, 1e-6):
            g, s = predicate_report(p, tol), equal_means_report(p, tol)
            disagree += any(getattr(g, key) != getattr(s, key) for key in keys)
    record("equal-means reduction", disagree == 0, f"{disagree} disagreements over 10000 draws at two tolerances")


def test_determinism(offset_sweep):
    cfg, first, _, _ = offset_sweep
    again, _ = sweep_to_string(cfg)
    parallel, _ = sweep_to_string(cfg.with_overrides(workers=3))
    record("determinism", first == again == parallel,
           f"serial rerun identical: {first == again}; 3-worker run identical: {first == parallel}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
