from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import attacker_lstsq, sensor_alpha_exact, sensor_best_cost
from trustgame.errors import AlphaSaturated
from trustgame.game import (
    GameParams,
    Region,
    best_response_attacker,
    best_response_sensor,
    classify_region,
    cost_attacker,
    cost_defender,
    fuse,
)

P2 = GameParams(y_hat=[1, 0], mu=[0, 0], zeta=[0, 0], y_attack=[0, 0])


def test_params_validation():
    with pytest.raises(ValueError):
        GameParams([1, 0], [0], [0, 0], [0, 0])
    with pytest.raises(ValueError):
        GameParams([1], [0], [0], [0], var_y=-1.0)
    assert P2.k == 2


@pytest.mark.parametrize("alpha, expected", [(0, (0, 2)), (1, (1, 0)), (0.5, (0.5, 1))])
def test_fuse(alpha, expected):
    np.testing.assert_allclose(fuse(alpha, (1, 0), (0, 2)), expected)


def test_fuse_rejects_weight_outside_unit_interval():
    with pytest.raises(ValueError):
        fuse(1.5, (1, 0), (0, 2))


def test_cost_defender_examples():
    assert cost_defender(0, P2.mu, P2) == 0.0
    assert cost_defender(1, (7, -3), P2) == 1.0
    assert cost_defender(0.5, (0, 1), P2.with_(var_y=2.0)) == pytest.approx(2.5, abs=1e-15)


def test_cost_attacker_examples():
    p = GameParams([1, 0], [0, 0], [0.3, 0.1], [0.2, 0.4], var_yhat=0.3)
    assert cost_attacker(0, p.y_attack, p) == 0.0
    p2 = p.with_(zeta=p.y_attack)
    assert cost_attacker(1, (9, 9), p2) == pytest.approx(0.3, abs=1e-15)
    p3 = GameParams([1, 0], [0, 0], [0, 0], [2, 0])
    assert cost_attacker(0.5, (4, 0), p3) == 0.0


@pytest.mark.parametrize(
    "y_bar, alpha, region",
    [((0, 0), 0.0, Region.TRUST_COMPUTER), ((2, 0), 1.0, Region.TRUST_SELF), ((0, 1), 0.5, Region.MIXED)],
)
def test_sensor_examples(y_bar, alpha, region):
    assert best_response_sensor(y_bar, P2) == float(sensor_alpha_exact(y_bar, (1, 0), (0, 0)))
    assert best_response_sensor(y_bar, P2) == alpha
    assert classify_region(y_bar, P2) is region


def test_sensor_at_y_hat_trusts_computer():
    assert best_response_sensor((1, 0), P2) == 0.0


def test_attacker_examples():
    p = GameParams([1, 0], [0, 0], [0, 0], [2, 0])
    np.testing.assert_array_equal(best_response_attacker(0, p), p.y_attack)
    np.testing.assert_allclose(best_response_attacker(0.5, p), attacker_lstsq(0.5, (2, 0), (0, 0)))
    np.testing.assert_allclose(best_response_attacker(0.5, p), (4, 0))
    q = GameParams([1, 0], [0, 0], [1, 1], [1, 1])
    np.testing.assert_allclose(best_response_attacker(0.5, q), (1, 1))
    with pytest.raises(AlphaSaturated):
        best_response_attacker(1.0 - 1e-12, p)


def _params(k, data):
    el = st.floats(-2, 2, allow_nan=False)
    vec = arrays(np.float64, k, elements=el)
    return GameParams(*(data.draw(vec) for _ in range(4)))


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 5), st.data())
def test_sensor_response_minimizes_cost_on_grid(k, data):
    p = _params(k, data)
    y_bar = data.draw(arrays(np.float64, k, elements=st.floats(-3, 3, allow_nan=False)))
    a = best_response_sensor(y_bar, p)
    assert 0.0 <= a <= 1.0
    grid = np.linspace(0, 1, 1001)
    best = min(cost_defender(g, y_bar, p) for g in grid)
    assert cost_defender(a, y_bar, p) <= best + 1e-9
    _, dense = sensor_best_cost(y_bar, p.y_hat, p.mu)
    assert cost_defender(a, y_bar, p) <= dense + 1e-9
    assert (classify_region(y_bar, p) is Region.MIXED) == (0.0 < a < 1.0)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 5), st.floats(0, 0.99), st.data())
def test_attacker_response_beats_perturbations(k, alpha, data):
    p = _params(k, data)
    y_star = best_response_attacker(alpha, p)
    np.testing.assert_allclose(y_star, attacker_lstsq(alpha, p.y_attack, p.zeta), atol=1e-9 * (1 + np.abs(y_star).max()))
    rng = np.random.default_rng(k)
    j = cost_attacker(alpha, y_star, p)
    for _ in range(100):
        eta = rng.normal(size=k)
        eta *= rng.uniform() / np.linalg.norm(eta)
        assert j <= cost_attacker(alpha, y_star + eta, p) + 1e-9
    # on the ray from zeta through y_attack, at least as far out
    if np.linalg.norm(p.y_attack - p.zeta) > 1e-9:
        c = (y_star - p.zeta) @ (p.y_attack - p.zeta) / np.sum((p.y_attack - p.zeta) ** 2)
        assert c >= 1 - 1e-12


def test_variance_constants_do_not_move_argmin():
    rng = np.random.default_rng(5)
    for _ in range(200):
        p = GameParams(*rng.normal(size=(4, 3)))
        y_bar = rng.normal(size=3)
        a0 = best_response_sensor(y_bar, p.with_(var_y=0.0))
        a1 = best_response_sensor(y_bar, p.with_(var_y=7.3))
        assert a0 == a1
        grid = np.linspace(0, 1, 101)
        diffs = {round(cost_defender(g, y_bar, p.with_(var_y=7.3)) - cost_defender(g, y_bar, p), 12) for g in grid}
        assert diffs == {7.3}


def test_projected_mean_gives_same_response_in_plane():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        k = int(rng.choice([3, 4, 5]))
        p = GameParams(*rng.normal(size=(4, k)))
        m_hat = p.mu_hat()
        w = rng.normal(size=3)
        w /= w.sum() if abs(w.sum()) > 0.1 else 1.0
        y_bar = w[0] * p.y_hat + w[1] * p.zeta + (1 - w[0] - w[1]) * p.y_attack
        a_mu = best_response_sensor(y_bar, p)
        a_hat = best_response_sensor(y_bar, p, mean=m_hat)
        assert a_mu == pytest.approx(a_hat, abs=1e-9)


def test_exact_scalar_response_matches_float():
    p = GameParams([1], [0], [0], [0])
    for yb in (-0.5, -0.3, Fraction(-13, 50), 0.25, 2.0, -7.0):
        assert best_response_sensor([float(yb)], p) == pytest.approx(float(sensor_alpha_exact([yb], [1], [0])), abs=1e-15)
