"""Synthesis of new paths from a path-conditional drift.

Each grid interval [t_i, t_{i+1}] is cut into n_sub equal sub-steps
delta = (t_{i+1} - t_i) / n_sub.  The state diffuses by Euler steps

    y_{k+1} = y_k + delta * a(t_i + k delta, y_k; x_1..x_i)
              + sqrt(delta) * eps_k,      eps_k ~ N(0, I_d),

for the first n_sub - 1 sub-steps, starting from y_0 = x_i (x_0 = 0).
The last sub-step is not an Euler step: the grid value x_{i+1} is drawn
from the pinning law at (t_{i+1} - delta, y), selecting a sample target
with the same weights that define the drift there.  The drift has gain
1/(t_{i+1} - t), so a plain Euler endpoint would apply the final pull
and then add sqrt(delta) * eps on top, leaving an N(0, delta) smear on
every grid value that no later step can remove; drawing the endpoint
finishes the interval under the bridge mixture itself.  With a single
sample path this is exact pinning through the sample's values.  The
grid value then joins the conditioning history for the next interval.

Every path owns a counter-based stream keyed by (seed, path index) and
consumes its draws in a fixed order (per interval: n_sub - 1 Gaussian
sub-step vectors, then one uniform for the endpoint), so a batch equals
the same paths simulated one at a time, bit for bit, regardless of
batch size.
"""
from __future__ import annotations

import numpy as np

from .core import Dataset, Path, RngStream, SimConfig

__all__ = ["simulate_path", "simulate_batch"]


def simulate_path(est, cfg: SimConfig, rng: RngStream) -> Path:
    """Grow one path from the origin under the estimated drift.

    `est` is any object with the drift-estimator surface (grid, dim,
    weight_tracker, drift_many, pin_many); `rng` identifies the path's
    private stream.  cfg.batch is ignored here.
    """
    values = _run(est, int(cfg.n_sub), [rng.generator()])
    return Path(values[0])


def simulate_batch(est, cfg: SimConfig) -> Dataset:
    """Grow cfg.batch paths concurrently, path j on stream (seed, j).

    Row j of the result is bit-identical to
    simulate_path(est, cfg, RngStream(cfg.seed, j)).
    """
    gens = [RngStream(cfg.seed, j).generator() for j in range(int(cfg.batch))]
    return Dataset(est.grid, _run(est, int(cfg.n_sub), gens))


def _run(est, n_sub: int, gens) -> np.ndarray:
    """Shared core: evolve len(gens) states through every grid interval."""
    grid = est.grid
    d = est.dim
    bounds = grid.with_origin()
    B = len(gens)
    out = np.empty((B, grid.n, d))
    states = np.zeros((B, d))
    tracker = est.weight_tracker(B)
    for i in range(grid.n):
        lo, hi = bounds[i], bounds[i + 1]
        delta = (hi - lo) / n_sub
        root = np.sqrt(delta)
        # one block per path keeps the draw order stream-local
        eps = np.stack([g.standard_normal((n_sub - 1, d)) for g in gens])
        u = np.array([g.random() for g in gens])
        log_k, log_g = tracker.sums()
        for k in range(n_sub - 1):
            t = lo + k * delta
            a = est.drift_many(i, t, states, log_k, log_g)
            states = states + delta * a + root * eps[:, k, :]
        states = est.pin_many(i, hi - delta, states, log_k, log_g, u)
        out[:, i, :] = states
        if i + 1 < grid.n:
            tracker.observe(i, states)
    return out
