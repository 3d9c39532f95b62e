import json
import math

import numpy as np
import pytest

import duelay


def test_sigmoid_and_rho():
    assert duelay.sigmoid(0.0) == 0.5
    d = duelay.DelayModel.geometric(0.3, 3)
    assert d.rho == pytest.approx(1 - 0.7**3)
    assert duelay.ipw_weight(1, 3, 2, 3, d.rho) == pytest.approx(1 / d.rho)
    assert duelay.ipw_weight(1, 2, 2, 3, d.rho) == 0.0


def test_info_matrix_inverse():
    m = duelay.InfoMatrix(3, 2.0)
    rng = np.random.default_rng(0)
    for _ in range(20):
        m.rank_one_update(rng.normal(size=3))
    assert np.allclose(m.inverse, np.linalg.inv(m.matrix), atol=1e-10)
    assert m.logdet == pytest.approx(np.linalg.slogdet(m.matrix)[1])


def test_solve_mle_zero_gradient():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(40, 3))
    y = (rng.uniform(size=40) < 0.5).astype(float)
    lam = 0.5
    theta = duelay.solve_mle(x, y, lam)
    p = 1 / (1 + np.exp(-x @ theta))
    grad = x.T @ (p - y) + lam * theta
    assert np.linalg.norm(grad) < 1e-6
    with pytest.raises(ValueError):
        duelay.solve_mle(x, y[:-1], lam)


def test_environment_and_policy_step():
    env = duelay.Environment(duelay.RewardKind.LINEAR, 4, 5, 0)
    assert np.linalg.norm(env.theta_star) == pytest.approx(1.0)
    cfg = duelay.LinearPolicyConfig()
    cfg.rho = 1.0
    pol = duelay.LinearPolicy(4, cfg)
    arms = env.draw_arms(1)
    assert len(arms) == 5
    first, second = pol.step(arms, env, duelay.DelayModel.none(), 0)
    assert 0 <= first < 5 and 0 <= second < 5
    assert pol.round == 2  # next round to play


def test_config_and_suite():
    cfg = duelay.demo_config("linear")
    cfg.horizon = 30
    cfg.seeds = [0, 1]
    again = duelay.parse_config(cfg.render())
    assert again.horizon == 30
    curve = duelay.run_single(cfg, duelay.Variant.IPW, 0)
    assert len(curve) == 30 and all(b >= a for a, b in zip(curve, curve[1:]))
    out = duelay.run_suite(cfg, 1)
    assert len(out["summaries"]) == 3 and not out["failures"]
    assert out["traces_csv"].count("\n") == 1 + 3 * 2 * 30
    summary = json.loads(out["summary_json"])
    assert summary
    with pytest.raises(ValueError):
        duelay.parse_config("horizon = -1")


def test_invalid_arguments_raise():
    with pytest.raises(ValueError):
        duelay.DelayModel.geometric(1.5, 3)
    with pytest.raises(ValueError):
        duelay.demo_config("quartic")
    assert not math.isnan(duelay.default_kappa_mu())
