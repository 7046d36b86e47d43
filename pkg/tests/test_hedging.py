"""Hedger: gradients against finite differences, training behavior, splits."""
import numpy as np
import pytest

from tsbridge import (Dataset, GbmParams, HedgeConfig, RngStream, TimeGrid,
                      TrainingDiverged, ValidationError, chronological_split,
                      evaluate_hedger, init_policy, loss_and_grad, pnl,
                      pnl_values, policy_forward, sample_gbm, scaled_grid,
                      train_hedger)


def _setup(seed=0, b=6, n=4, hidden=(5, 3)):
    grid = scaled_grid(n, 0.5)
    prices = np.abs(1.0 + 0.1 * RngStream(seed, 0).generator().standard_normal((b, n))) + 0.2
    policy = init_policy(hidden, grid.horizon, 1.0, RngStream(seed, 1))
    return grid, prices, policy


def _zeroed(policy, constant=0.0):
    z = policy.copy()
    for w in z.weights:
        w[:] = 0.0
    z.biases[-1][:] = constant
    return z


def test_gradients_match_central_differences():
    grid, prices, policy = _setup(seed=3)
    premium = 0.05
    loss, g_p, gw, gb = loss_and_grad(policy, premium, grid, prices, 1.0)
    eps = 1e-6

    def loss_at(pol, prem):
        return loss_and_grad(pol, prem, grid, prices, 1.0)[0]

    num = (loss_at(policy, premium + eps) - loss_at(policy, premium - eps)) / (2 * eps)
    assert g_p == pytest.approx(num, rel=1e-6)

    picks = RngStream(3, 2).generator()
    for l in range(len(policy.weights)):
        w = policy.weights[l]
        for _ in range(3):
            r, c = picks.integers(w.shape[0]), picks.integers(w.shape[1])
            bumped = policy.copy()
            bumped.weights[l][r, c] += eps
            dipped = policy.copy()
            dipped.weights[l][r, c] -= eps
            num = (loss_at(bumped, premium) - loss_at(dipped, premium)) / (2 * eps)
            assert gw[l][r, c] == pytest.approx(num, rel=1e-4, abs=1e-10), (l, r, c)
        j = picks.integers(policy.biases[l].shape[0])
        bumped = policy.copy()
        bumped.biases[l][j] += eps
        dipped = policy.copy()
        dipped.biases[l][j] -= eps
        num = (loss_at(bumped, premium) - loss_at(dipped, premium)) / (2 * eps)
        assert gb[l][j] == pytest.approx(num, rel=1e-4, abs=1e-10), (l, j)


def test_loss_is_mean_squared_pnl():
    grid, prices, policy = _setup(seed=4)
    loss = loss_and_grad(policy, 0.1, grid, prices, 1.0)[0]
    per_path = [pnl(policy, 0.1, grid, prices[i], 1.0) for i in range(prices.shape[0])]
    assert loss == pytest.approx(np.mean(np.square(per_path)), rel=1e-14)


def test_constant_policy_pnl_telescopes():
    grid, prices, policy = _setup(seed=5)
    c, premium, s0 = 0.3, 0.07, 1.0
    const = _zeroed(policy, constant=c)
    for i in range(prices.shape[0]):
        terminal = prices[i, -1]
        want = premium + c * (terminal - s0) - max(terminal - s0, 0.0)
        assert pnl(const, premium, grid, prices[i], s0) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_zero_policy_pnl_is_premium_minus_payoff():
    grid, prices, policy = _setup(seed=6)
    zero = _zeroed(policy)
    for i in range(prices.shape[0]):
        want = 0.2 - max(prices[i, -1] - 1.0, 0.0)
        assert pnl(zero, 0.2, grid, prices[i], 1.0) == pytest.approx(want, rel=1e-12)


def test_init_policy_shapes_and_copy_independence():
    policy = init_policy((7, 3), 2.0, 1.5, RngStream(1, 0))
    assert [w.shape for w in policy.weights] == [(2, 7), (7, 3), (3, 1)]
    assert [b.shape for b in policy.biases] == [(7,), (3,), (1,)]
    assert all(np.all(b == 0.0) for b in policy.biases)
    limit = np.sqrt(6.0 / (2 + 7))
    assert np.abs(policy.weights[0]).max() <= limit
    dup = policy.copy()
    dup.weights[0][0, 0] += 1.0
    assert policy.weights[0][0, 0] != dup.weights[0][0, 0]


def test_policy_forward_scalar_and_validation():
    policy = init_policy((4,), 1.0, 1.0, RngStream(2, 0))
    out = policy_forward(policy, 0.3, 1.1)
    assert isinstance(out, float) and np.isfinite(out)
    with pytest.raises(ValueError):
        policy_forward(policy, np.nan, 1.0)
    with pytest.raises(ValueError):
        policy_forward(policy, 0.0, np.inf)


def _gbm_sets(vol, m, seed, n=8):
    grid = scaled_grid(n, 0.25)
    data = sample_gbm(GbmParams(grid, s0=1.0, mu=0.0, vol=vol), m, RngStream(seed, 0))
    return chronological_split(data, int(0.7 * m), int(0.15 * m))


def test_training_learns_riskless_premium():
    # vol = 0: every path is flat at s0, payoff 0, so pnl = premium and
    # the quadratic objective drives the premium to zero
    train, valid, _ = _gbm_sets(0.0, 40, seed=7)
    cfg = HedgeConfig(hidden=(4,), learning_rate=0.05, epochs=60, batch_size=16, seed=0)
    result = train_hedger(train, valid, cfg, 1.0)
    assert abs(result.premium) < 1e-3
    assert result.valid_history[-1] < 1e-6


def test_training_improves_validation_loss():
    train, valid, test = _gbm_sets(0.2, 300, seed=8)
    cfg = HedgeConfig(hidden=(8,), learning_rate=0.02, epochs=30, batch_size=64, seed=1)
    result = train_hedger(train, valid, cfg, 1.0)
    assert len(result.train_history) == 30
    assert len(result.valid_history) == 30
    assert 0 <= result.best_epoch < 30
    assert result.valid_history[result.best_epoch] == min(result.valid_history)
    assert result.valid_history[result.best_epoch] < result.valid_history[0]
    mean, std = evaluate_hedger(result, test)
    values = pnl_values(result, test)
    assert mean == pytest.approx(values.mean())
    assert std == pytest.approx(values.std(ddof=1))
    assert values.shape == (test.n_paths,)


def test_training_is_deterministic():
    train, valid, _ = _gbm_sets(0.2, 60, seed=9)
    cfg = HedgeConfig(hidden=(4,), learning_rate=0.02, epochs=5, batch_size=32, seed=2)
    a = train_hedger(train, valid, cfg, 1.0)
    b = train_hedger(train, valid, cfg, 1.0)
    assert a.premium == b.premium
    assert a.train_history == b.train_history
    assert all(np.array_equal(wa, wb) for wa, wb in zip(a.policy.weights, b.policy.weights))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_training_diverges_at_huge_learning_rate():
    # Adam steps scale with the learning rate, so this overflows the
    # squared loss within a couple of updates
    train, valid, _ = _gbm_sets(0.2, 60, seed=10)
    cfg = HedgeConfig(hidden=(4,), learning_rate=1e200, epochs=50, batch_size=32, seed=0)
    with pytest.raises(TrainingDiverged):
        train_hedger(train, valid, cfg, 1.0)


def test_train_hedger_input_validation():
    train, valid, _ = _gbm_sets(0.2, 40, seed=11)
    cfg = HedgeConfig(epochs=1)
    with pytest.raises(ValidationError):
        train_hedger(train, valid, cfg, 0.0)
    other = Dataset(TimeGrid([1.0]), np.ones((4, 1, 1)))
    with pytest.raises(ValidationError):
        train_hedger(train, other, cfg, 1.0)
    wide = Dataset(train.grid, np.ones((4, train.grid.n, 2)))
    with pytest.raises(ValidationError):
        train_hedger(wide, wide, cfg, 1.0)


@pytest.mark.parametrize("kwargs", [
    {"hidden": ()}, {"hidden": (0,)}, {"learning_rate": 0.0},
    {"learning_rate": -1.0}, {"epochs": 0}, {"batch_size": 0},
])
def test_hedge_config_validation(kwargs):
    with pytest.raises(ValidationError):
        HedgeConfig(**kwargs)


def test_chronological_split_preserves_order():
    grid = scaled_grid(3, 1.0)
    vals = np.arange(30.0).reshape(10, 3, 1)
    data = Dataset(grid, vals)
    train, valid, test = chronological_split(data, 6, 2)
    assert train.n_paths == 6 and valid.n_paths == 2 and test.n_paths == 2
    assert np.array_equal(train.values, vals[:6])
    assert np.array_equal(valid.values, vals[6:8])
    assert np.array_equal(test.values, vals[8:])
    with pytest.raises(ValidationError):
        chronological_split(data, 8, 2)
    with pytest.raises(ValidationError):
        chronological_split(data, 0, 2)
