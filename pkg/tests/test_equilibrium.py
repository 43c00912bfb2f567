import numpy as np
import pytest

from oracles import mixed_fixed_points_by_scan
from trustgame.equilibrium import (
    Equilibrium,
    EquilibriumKind,
    analyze_mixed,
    mixed_equilibria,
    quadratic_coefficients,
    solve_quadratic,
    verify_nash,
    zero_equilibrium,
    zero_equilibrium_exists,
)
from trustgame.errors import DegenerateGame
from trustgame.game import GameParams
from trustgame.ibr import IbrConfig, OutcomeKind, ibr_run

WORKED = GameParams([1.0], [0.0], [0.0], [-0.2])


@pytest.mark.parametrize("y_attack, expected", [((0, 0), True), ((0.4, 0), True), ((2, 0), False)])
def test_zero_equilibrium_examples(y_attack, expected):
    assert zero_equilibrium_exists(GameParams([1, 0], [0, 0], [0, 0], y_attack)) is expected


def test_worked_instance():
    a, b, c = quadratic_coefficients(WORKED)
    assert (a, b, c) == pytest.approx((-0.16, -0.6, 1.0), abs=1e-15)
    analysis = analyze_mixed(WORKED)
    assert analysis.roots == pytest.approx([-5.0, 1.25], abs=1e-12)
    (eq,) = analysis.equilibria
    assert eq.kind is EquilibriumKind.MIXED
    assert eq.alpha_star == pytest.approx(0.2, abs=1e-9)
    assert eq.y_bar_star[0] == pytest.approx(-0.25, abs=1e-9)
    assert eq.r == pytest.approx(1.25, abs=1e-12)
    # the other root lands on y_hat, where the sensor trusts the computer
    rejected = [c for c in analysis.candidates if not c.valid]
    assert len(rejected) == 1 and rejected[0].y_bar[0] == pytest.approx(1.0)
    (scan,) = mixed_fixed_points_by_scan([1.0], [0.0], [0.0], [-0.2])
    assert scan[0] == pytest.approx(eq.alpha_star, abs=1e-9)


def test_real_roots_without_valid_equilibrium():
    p = GameParams([1.0], [0.0], [0.0], [0.5])
    analysis = analyze_mixed(p)
    assert analysis.coefficients == pytest.approx((0.75, -2.0, 1.0))
    assert analysis.roots == pytest.approx([2 / 3, 2.0])
    assert analysis.equilibria == []
    assert analysis.spurious
    assert zero_equilibrium_exists(p)
    assert mixed_fixed_points_by_scan([1.0], [0.0], [0.0], [0.5]) == []


def test_scalar_equal_means_discriminant_is_constant():
    # with k=1 and zeta = mu = 0, y_hat = 1 the discriminant is (1+2y)^2 - 4y(1+y) = 1
    for y in np.linspace(-5, 5, 41):
        assert analyze_mixed(GameParams([1.0], [0.0], [0.0], [y])).discriminant == pytest.approx(1.0, abs=1e-9)


def _negative_discriminant_instances():
    found = []
    for zx in np.linspace(-0.6, 0.6, 7):
        for zy in np.linspace(-0.6, 0.6, 7):
            for ax in np.linspace(-1.5, 1.5, 13):
                for ay in np.linspace(-1.5, 1.5, 13):
                    p = GameParams([1.0, 0.0], [0.0, 0.0], [zx, zy], [ax, ay])
                    try:
                        if analyze_mixed(p).discriminant < -1e-6:
                            found.append(p)
                    except DegenerateGame:
                        pass
    return found


def test_negative_discriminant_means_no_mixed_equilibrium():
    found = _negative_discriminant_instances()
    assert len(found) > 20
    for p in found[:: max(1, len(found) // 25)]:
        assert mixed_equilibria(p) == []
        assert mixed_fixed_points_by_scan(p.y_hat, p.mu, p.zeta, p.y_attack, n=6001) == []


def test_mean_mismatch_enters_with_plus_sign():
    # IBR settles on a mixed point here; only the +delta form of the quadratic has it as a root
    p = GameParams([0.8, 0.0], [0.0, 0.0], [0.3, -0.2], [-0.35, 0.0])
    out = ibr_run(p, [0.0, 0.0], IbrConfig(max_iter=5000)).outcome
    assert out.kind is OutcomeKind.CONVERGED_MIXED
    z_a = p.y_attack - p.zeta
    r_ibr = (out.y_bar_star - p.zeta) @ z_a / (z_a @ z_a)
    (eq,) = mixed_equilibria(p)
    assert eq.r == pytest.approx(r_ibr, rel=1e-6)
    z_h, delta = p.y_hat - p.zeta, p.zeta - p.mu
    a_minus = z_a @ (z_h + z_a - delta)
    b_minus = -(z_h @ (z_h + 2 * z_a - delta))
    assert b_minus ** 2 - 4 * a_minus * (z_h @ z_h) < 0


def test_quadratic_matches_fixed_point_scan_on_random_draws():
    rng = np.random.default_rng(8)
    checked = 0
    for _ in range(300):
        k = int(rng.choice([1, 2, 3, 5]))
        p = GameParams(*rng.uniform(-1, 1, size=(4, k)))
        # the scan only covers |r| <= 60
        eqs = sorted((e for e in mixed_equilibria(p) if abs(e.r) < 59), key=lambda e: e.r)
        scan = sorted((s for s in mixed_fixed_points_by_scan(p.y_hat, p.mu, p.zeta, p.y_attack, n=4001)
                       if abs(s[2]) < 59), key=lambda s: s[2])
        # a tangential root can hide between scan points; only compare well-separated cases
        analysis = analyze_mixed(p)
        if analysis.has_real_roots and abs(analysis.discriminant) < 1e-6:
            continue
        assert len(eqs) == len(scan)
        for e, s in zip(eqs, scan):
            assert e.alpha_star == pytest.approx(s[0], abs=1e-7)
            assert e.r == pytest.approx(s[2], rel=1e-7, abs=1e-9)
        checked += len(eqs)
    assert checked > 30


def test_equal_means_coefficients():
    rng = np.random.default_rng(4)
    for _ in range(100):
        y_hat, mu, y_a = rng.normal(size=(3, 3))
        p = GameParams(y_hat, mu, mu, y_a)
        z_a, z_h = y_a - mu, y_hat - mu
        assert quadratic_coefficients(p) == (z_a @ (z_h + z_a), -(z_h @ (z_h + 2 * z_a)), z_h @ z_h)


def test_root_residuals():
    rng = np.random.default_rng(9)
    for _ in range(300):
        p = GameParams(*rng.uniform(-1, 1, size=(4, 2)))
        a, b, c = quadratic_coefficients(p)
        for e in mixed_equilibria(p):
            r = e.r
            assert abs(a * r * r + b * r + c) < 1e-8 * (abs(a) + abs(b) + abs(c)) * max(1.0, abs(r)) ** 2


def test_degenerate_game():
    with pytest.raises(DegenerateGame):
        mixed_equilibria(GameParams([0.3, 0.1], [0, 0], [0.3, 0.1], [1, 1]))


def test_solve_quadratic_stable_and_linear():
    r1, r2 = solve_quadratic(1.0, -1e8, 1.0)
    assert r1 == pytest.approx(1e-8, rel=1e-14)
    assert r2 == pytest.approx(1e8, rel=1e-14)
    assert solve_quadratic(0.0, 2.0, -1.0) == [0.5]
    assert solve_quadratic(1e-20, 2.0, -1.0) == [0.5]
    assert solve_quadratic(1.0, 0.0, 1.0) == []
    assert solve_quadratic(0.0, 0.0, 0.0) == []
    assert solve_quadratic(1.0, -2.0, 1.0) == [1.0]


def test_verify_nash():
    (eq,) = mixed_equilibria(WORKED)
    assert verify_nash(eq, WORKED)
    bad = Equilibrium(EquilibriumKind.MIXED, eq.alpha_star + 0.1, eq.y_bar_star, eq.r)
    assert not verify_nash(bad, WORKED)
    p = GameParams([1, 0], [0, 0], [0, 0], [0.4, 0])
    assert verify_nash(zero_equilibrium(p), p)
    # an attacker output that is not a best response
    shifted = Equilibrium(EquilibriumKind.MIXED, eq.alpha_star, eq.y_bar_star + 0.3, eq.r)
    assert not verify_nash(shifted, WORKED)
