"""Learning a discrete hedge against generated or reference price paths.

A small dense network maps the standardized state (t / T, s / s0) to a
position Delta(t, s); together with an upfront premium p it defines

    PnL = p + sum_{i=0}^{N-1} Delta(t_i, S_{t_i}) (S_{t_{i+1}} - S_{t_i})
            - g(S_{t_N}),          g(s) = (s - s0)_+,

with t_0 = 0 and S_{t_0} = s0.  Training minimizes the quadratic
replication error E|PnL|^2 over (p, network weights) by minibatch Adam,
with hand-written reverse-mode gradients in float64 (the whole point is
that they check out against central finite differences).

Splits are chronological: paths keep their file order and are cut by
index ranges, never shuffled across the cut.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, RngStream, TimeGrid, ValidationError

__all__ = [
    "TrainingDiverged",
    "MlpPolicy",
    "HedgeConfig",
    "HedgeResult",
    "init_policy",
    "policy_forward",
    "pnl",
    "pnl_values",
    "loss_and_grad",
    "train_hedger",
    "evaluate_hedger",
    "chronological_split",
]

_ADAM_B1 = 0.9
_ADAM_B2 = 0.999
_ADAM_EPS = 1e-8


class TrainingDiverged(RuntimeError):
    """The training loss left the finite range (step too large)."""


@dataclass
class MlpPolicy:
    """Dense tanh network Delta(t, s), output linear, inputs standardized.

    weights[l] has shape (fan_in, fan_out); biases[l] has shape (fan_out,).
    t_scale is the horizon T and s_scale the spot s0 used to normalize
    the inputs, so the policy is self-contained.
    """

    weights: list
    biases: list
    t_scale: float
    s_scale: float

    def copy(self) -> "MlpPolicy":
        return MlpPolicy([w.copy() for w in self.weights],
                         [b.copy() for b in self.biases],
                         self.t_scale, self.s_scale)


@dataclass(frozen=True)
class HedgeConfig:
    """Training controls for the replication objective."""

    hidden: tuple = (16, 16)
    learning_rate: float = 0.01
    epochs: int = 200
    batch_size: int = 256
    seed: int = 0

    def __post_init__(self):
        if len(self.hidden) < 1 or any(int(h) < 1 for h in self.hidden):
            raise ValidationError("hidden layout needs at least one positive width")
        if self.learning_rate <= 0:
            raise ValidationError("learning rate must be positive")
        if int(self.epochs) < 1 or int(self.batch_size) < 1:
            raise ValidationError("epochs and batch size must be >= 1")


@dataclass
class HedgeResult:
    """Trained policy, premium, and the loss trajectory that produced them."""

    policy: MlpPolicy
    premium: float
    train_history: list = field(default_factory=list)
    valid_history: list = field(default_factory=list)
    best_epoch: int = 0


def init_policy(hidden, t_scale: float, s_scale: float, rng: RngStream) -> MlpPolicy:
    """Glorot-uniform weights, zero biases, layer by layer from one stream."""
    g = rng.generator()
    sizes = [2, *[int(h) for h in hidden], 1]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(g.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpPolicy(weights, biases, float(t_scale), float(s_scale))


def _forward(policy: MlpPolicy, x: np.ndarray):
    """Network pass over raw rows (t, s); returns output (n, 1) and caches."""
    a = np.column_stack([x[:, 0] / policy.t_scale, x[:, 1] / policy.s_scale])
    acts = [a]
    last = len(policy.weights) - 1
    for l, (w, b) in enumerate(zip(policy.weights, policy.biases)):
        z = a @ w + b
        a = z if l == last else np.tanh(z)
        acts.append(a)
    return a, acts


def policy_forward(policy: MlpPolicy, t: float, s: float) -> float:
    """Position Delta(t, s) for one state."""
    if not (np.isfinite(t) and np.isfinite(s)):
        raise ValueError("policy inputs must be finite")
    out, _ = _forward(policy, np.array([[float(t), float(s)]]))
    return float(out[0, 0])


def _hedge_arrays(grid: TimeGrid, prices: np.ndarray, s0: float):
    """Rebalance dates t_0..t_{N-1}, prices there, and price increments."""
    dates = grid.with_origin()[:-1]
    padded = np.concatenate([np.full((prices.shape[0], 1), float(s0)), prices], axis=1)
    return dates, padded[:, :-1], np.diff(padded, axis=1)


def _pnl_matrixed(policy: MlpPolicy, premium: float, grid: TimeGrid,
                  prices: np.ndarray, s0: float):
    """PnL per path plus the intermediates needed for the backward pass."""
    B, N = prices.shape
    dates, s_in, ds = _hedge_arrays(grid, prices, s0)
    x = np.column_stack([np.tile(dates, B), s_in.reshape(-1)])
    out, acts = _forward(policy, x)
    delta = out.reshape(B, N)
    payoff = np.maximum(prices[:, -1] - s0, 0.0)
    value = premium + (delta * ds).sum(axis=1) - payoff
    return value, delta, ds, acts


def pnl(policy: MlpPolicy, premium: float, grid: TimeGrid, path, s0: float) -> float:
    """Replication profit and loss of one scalar price path."""
    v = np.asarray(path.values if hasattr(path, "values") else path, dtype=np.float64)
    v = v.reshape(1, -1)
    value, _, _, _ = _pnl_matrixed(policy, premium, grid, v, s0)
    return float(value[0])


def loss_and_grad(policy: MlpPolicy, premium: float, grid: TimeGrid,
                  prices: np.ndarray, s0: float):
    """Mean squared PnL over a batch and its exact gradient.

    prices is (B, N) raw; returns (loss, d/d premium, weight grads,
    bias grads) with grads shaped like the policy parameters.
    """
    B, N = prices.shape
    value, delta, ds, acts = _pnl_matrixed(policy, premium, grid, prices, s0)
    loss = float((value**2).mean())
    g_value = 2.0 * value / B
    g_premium = float(g_value.sum())
    # d loss / d Delta_{b,i} = g_value[b] * ds[b,i], rows align with acts
    g = (g_value[:, None] * ds).reshape(-1, 1)
    gw = [None] * len(policy.weights)
    gb = [None] * len(policy.biases)
    for l in range(len(policy.weights) - 1, -1, -1):
        gw[l] = acts[l].T @ g
        gb[l] = g.sum(axis=0)
        if l > 0:
            g = (g @ policy.weights[l].T) * (1.0 - acts[l] ** 2)
    return loss, g_premium, gw, gb


def _dataset_prices(data: Dataset) -> np.ndarray:
    if data.dim != 1:
        raise ValidationError("hedging expects scalar price paths (d = 1)")
    return data.values[:, :, 0]


def train_hedger(train: Dataset, valid: Dataset, cfg: HedgeConfig, s0: float) -> HedgeResult:
    """Fit (premium, policy) on the training set, keep the best validation epoch.

    The premium starts at the mean training payoff and the policy at
    Glorot noise; each epoch visits a seeded permutation of the training
    paths in minibatches and applies Adam.  A non-finite loss aborts.
    """
    if train.grid != valid.grid:
        raise ValidationError("training and validation sets must share the grid")
    if s0 <= 0:
        raise ValidationError("spot s0 must be positive")
    p_train = _dataset_prices(train)
    p_valid = _dataset_prices(valid)
    grid = train.grid
    policy = init_policy(cfg.hidden, grid.horizon, s0, RngStream(cfg.seed, 0))
    premium = float(np.maximum(p_train[:, -1] - s0, 0.0).mean())
    shuffle = RngStream(cfg.seed, 1).generator()

    params = [np.array([premium]), *policy.weights, *policy.biases]
    m_state = [np.zeros_like(p) for p in params]
    v_state = [np.zeros_like(p) for p in params]
    n_layers = len(policy.weights)
    step = 0
    result = HedgeResult(policy.copy(), premium)
    best_valid = np.inf
    for epoch in range(int(cfg.epochs)):
        order = shuffle.permutation(p_train.shape[0])
        for start in range(0, order.size, int(cfg.batch_size)):
            batch = p_train[order[start:start + int(cfg.batch_size)]]
            loss, g_p, gw, gb = loss_and_grad(policy, premium, grid, batch, s0)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"loss became non-finite at epoch {epoch}, step {step}; "
                    f"lower the learning rate"
                )
            grads = [np.array([g_p]), *gw, *gb]
            step += 1
            for j, gj in enumerate(grads):
                m_state[j] = _ADAM_B1 * m_state[j] + (1.0 - _ADAM_B1) * gj
                v_state[j] = _ADAM_B2 * v_state[j] + (1.0 - _ADAM_B2) * gj**2
                m_hat = m_state[j] / (1.0 - _ADAM_B1**step)
                v_hat = v_state[j] / (1.0 - _ADAM_B2**step)
                params[j] = params[j] - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + _ADAM_EPS)
            premium = float(params[0][0])
            policy.weights = params[1:1 + n_layers]
            policy.biases = params[1 + n_layers:]
        tr_loss = float((_pnl_matrixed(policy, premium, grid, p_train, s0)[0] ** 2).mean())
        va_loss = float((_pnl_matrixed(policy, premium, grid, p_valid, s0)[0] ** 2).mean())
        if not (np.isfinite(tr_loss) and np.isfinite(va_loss)):
            raise TrainingDiverged(f"loss became non-finite at epoch {epoch}")
        result.train_history.append(tr_loss)
        result.valid_history.append(va_loss)
        if va_loss < best_valid:
            best_valid = va_loss
            result.policy = policy.copy()
            result.premium = premium
            result.best_epoch = epoch
    return result


def pnl_values(result: HedgeResult, data: Dataset) -> np.ndarray:
    """Per-path PnL of a trained hedge on a dataset, shape (M,)."""
    prices = _dataset_prices(data)
    return _pnl_matrixed(result.policy, result.premium, data.grid, prices,
                         result.policy.s_scale)[0]


def evaluate_hedger(result: HedgeResult, data: Dataset) -> tuple[float, float]:
    """Mean and sample std (ddof = 1) of the PnL on a dataset."""
    value = pnl_values(result, data)
    std = float(value.std(ddof=1)) if value.size > 1 else 0.0
    return float(value.mean()), std


def chronological_split(data: Dataset, n_train: int, n_valid: int):
    """Cut a dataset into (train, valid, test) by path index, order preserved."""
    n_train, n_valid = int(n_train), int(n_valid)
    if n_train < 1 or n_valid < 1 or n_train + n_valid >= data.n_paths:
        raise ValidationError(
            f"split ({n_train}, {n_valid}) leaves no test paths out of {data.n_paths}"
        )
    v = data.values
    return (Dataset(data.grid, v[:n_train]),
            Dataset(data.grid, v[n_train:n_train + n_valid]),
            Dataset(data.grid, v[n_train + n_valid:]))
