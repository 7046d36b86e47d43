"""Path-conditional drift estimated from sample paths.

Given M sample paths observed on a common grid, the drift that steers a
unit-variance diffusion through the empirical joint law is, for
t in [t_i, t_{i+1}) and a path that has reached x after visiting
x_1, ..., x_i:

    a(t, x; x_1..x_i) =
        1/(t_{i+1} - t) * sum_m (X^m_{t_{i+1}} - x) w_m / sum_m w_m,

    w_m = F_i(t, X^m_{t_i}, x, X^m_{t_{i+1}})
          * prod_j K((x_j - X^m_{t_j}) / h),

    log F_i = -|x_next - x|^2 / (2 (t_{i+1} - t))
              + |x_next - x_i_sample|^2 / (2 (t_{i+1} - t_i)),

where K is a compactly supported radial kernel and the product runs over
the conditioning dates inside the memory window.  Everything is computed
in log space with a max-shift, so the kernel normalization constant (it
cancels in the ratio) is dropped and weight underflow cannot poison the
estimate.

The weights carry more than the drift.  The law they come from is a
mixture of Brownian bridges, one per sample, and conditional on the
state x at time t the mixture pins to sample m's next grid value with
probability w_m / sum_m w_m.  `pin_many` draws from that law; the
simulator uses it to finish each interval instead of taking one more
Euler step into the singular endpoint.
"""
from __future__ import annotations

import numpy as np

from .core import Dataset, TimeGrid

__all__ = [
    "ZeroWeightMass",
    "quartic_kernel",
    "biweight_kernel",
    "log_f_factor",
    "DriftEstimator",
]

# log K(u) = kexp * log(1 - |u|^2) on the open unit ball, -inf outside
_KERNEL_EXPONENT = {"quartic": 1, "biweight": 2}
_FALLBACKS = ("nearest", "error")


class ZeroWeightMass(RuntimeError):
    """Every sample weight vanished and the fallback policy is 'error'."""


def quartic_kernel(u) -> float:
    """Compact bump K(u) = (1 - |u|^2) for |u| <= 1, 0 outside (radial in R^d)."""
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    s = float(u @ u)
    return 1.0 - s if s < 1.0 else 0.0


def biweight_kernel(u) -> float:
    """Smoother variant K(u) = (1 - |u|^2)^2 for |u| <= 1, 0 outside."""
    return quartic_kernel(u) ** 2


def log_f_factor(grid: TimeGrid, i: int, t: float, x_i_sample, x, x_next_sample) -> float:
    """Log of the bridge reweighting factor F_i for one sample.

    F_i compares the squared displacement from the current state x to the
    sample's next grid value against the sample's own displacement over
    the full interval.  Requires t in [t_i, t_{i+1}); the factor blows up
    at the right endpoint.
    """
    lo, hi = grid.interval_bounds(i)
    if not lo <= t < hi:
        raise ValueError(f"time {t} outside interval [{lo}, {hi}) of the grid")
    xn = np.asarray(x_next_sample, dtype=np.float64).reshape(-1)
    xi = np.asarray(x_i_sample, dtype=np.float64).reshape(-1)
    xq = np.asarray(x, dtype=np.float64).reshape(-1)
    d_next = xn - xq
    d_prev = xn - xi
    return float(-(d_next @ d_next) / (2.0 * (hi - t)) + (d_prev @ d_prev) / (2.0 * (hi - lo)))


def _log_bump(u2: np.ndarray, kexp: int) -> np.ndarray:
    """Elementwise log K from squared scaled distances u2 = |delta|^2 / h^2."""
    out = np.full(u2.shape, -np.inf)
    inside = u2 < 1.0
    out[inside] = kexp * np.log1p(-u2[inside])
    return out


def _weighted_target_mean(logw: np.ndarray, targets: np.ndarray):
    """Max-shifted weighted mean of targets, rows of logw independent.

    Returns (mean (B, d), alive (B,)).  Rows whose weights all vanished
    (row max is -inf) come back non-finite and flagged dead; adding any
    constant to a row of logw leaves its mean unchanged up to rounding.
    """
    m = logw.max(axis=1)
    alive = np.isfinite(m)
    shift = np.where(alive, m, 0.0)
    w = np.exp(logw - shift[:, None])
    den = w.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        if targets.ndim == 1:
            mean = ((w * targets[None, :]).sum(axis=1) / den)[:, None]
        else:
            mean = (w[:, :, None] * targets[None, :, :]).sum(axis=1) / den[:, None]
    return mean, alive


class DriftEstimator:
    """Kernel-regression drift over a dataset of sample paths.

    Parameters
    ----------
    data : Dataset
        Sample paths the generator should interpolate.
    bandwidth : float
        Kernel length scale h > 0 shared by all conditioning dates.
    memory : "full" or int
        How many of the most recent grid dates condition the weights.
        "full" keeps the exact product over all past dates; an integer L
        keeps the last min(i, L) dates (L = 1 is the Markov variant).
    fallback : {"nearest", "error"}
        What to do when every kernel weight vanishes: retain the single
        sample ranked best by log F plus a Gaussian surrogate of the
        kernel distance (ties broken by smallest sample index), or raise
        ZeroWeightMass.
    kernel : {"quartic", "biweight"}
        Compact kernel family; both are radial with support |u| <= 1.
    """

    def __init__(self, data: Dataset, bandwidth: float, memory="full",
                 fallback: str = "nearest", kernel: str = "quartic"):
        if not (np.isfinite(bandwidth) and bandwidth > 0.0):
            raise ValueError(f"bandwidth must be a positive finite real, got {bandwidth}")
        if memory != "full":
            memory = int(memory)
            if not 0 <= memory <= data.grid.n:
                raise ValueError(f"memory must be 'full' or an integer in [0, {data.grid.n}]")
        if fallback not in _FALLBACKS:
            raise ValueError(f"fallback must be one of {_FALLBACKS}, got {fallback!r}")
        if kernel not in _KERNEL_EXPONENT:
            raise ValueError(f"kernel must be one of {tuple(_KERNEL_EXPONENT)}, got {kernel!r}")
        self.data = data
        self.bandwidth = float(bandwidth)
        self.memory = memory
        self.fallback = fallback
        self.kernel = kernel
        self._kexp = _KERNEL_EXPONENT[kernel]
        self._vals = data.values            # (M, N, d), read-only
        self._bounds = data.grid.with_origin()

    @property
    def grid(self) -> TimeGrid:
        return self.data.grid

    @property
    def dim(self) -> int:
        return self.data.dim

    def _window_start(self, i: int) -> int:
        """First conditioning column for interval i (columns [start, i) enter)."""
        if self.memory == "full":
            return 0
        return max(0, i - self.memory)

    def _date_terms(self, col: int, xs: np.ndarray):
        """Per-sample terms of one conditioning date for a block of queries.

        xs has shape (B, d); returns (log_k, log_g), both (B, M): the log
        kernel value and the Gaussian surrogate -u2/2 used only to rank
        fallback candidates (finite for any distance).
        """
        vals = self._vals[:, col, :]                       # (M, d)
        h2 = self.bandwidth * self.bandwidth
        if vals.shape[1] == 1:
            diff = xs[:, 0][:, None] - vals[:, 0][None, :]
            u2 = diff * diff / h2
        else:
            diff = xs[:, None, :] - vals[None, :, :]
            u2 = (diff * diff).sum(axis=2) / h2
        return _log_bump(u2, self._kexp), -0.5 * u2

    def log_kernel_weight(self, past, sample_past) -> float:
        """Log product of kernel factors between two conditioning histories.

        Both arguments are sequences of i points; only the last
        min(i, memory) dates enter.  Empty histories give 0 (weight 1).
        """
        p = _as_points(past, self.dim)
        s = _as_points(sample_past, self.dim)
        if p.shape != s.shape:
            raise ValueError(f"histories disagree in shape: {p.shape} vs {s.shape}")
        i = p.shape[0]
        total = 0.0
        h2 = self.bandwidth * self.bandwidth
        for j in range(self._window_start(i), i):
            d = p[j] - s[j]
            u2 = float(d @ d) / h2
            if u2 >= 1.0:
                return -np.inf
            total += self._kexp * np.log1p(-u2)
        return total

    def drift(self, t: float, x, past=()) -> np.ndarray:
        """Drift a(t, x; past) for a path that has visited `past` so far.

        `past` holds the already reached grid values x_1..x_i, so
        i = len(past) selects the interval and t must lie in
        [t_i, t_{i+1}).  Returns a (d,) array.
        """
        p = _as_points(past, self.dim)
        i = p.shape[0]
        if i >= self.grid.n:
            raise ValueError(f"past has {i} points but the grid only has {self.grid.n} dates")
        lo, hi = self.grid.interval_bounds(i)
        if not lo <= t < hi:
            raise ValueError(f"time {t} outside interval [{lo}, {hi}) for a past of length {i}")
        xq = np.asarray(x, dtype=np.float64).reshape(-1)
        if xq.shape != (self.dim,):
            raise ValueError(f"state must have dimension {self.dim}, got shape {xq.shape}")
        if not np.all(np.isfinite(xq)):
            raise ValueError("state must be finite")
        M = self.data.n_paths
        log_k = np.zeros((1, M))
        log_g = np.zeros((1, M))
        for j in range(self._window_start(i), i):
            lk, lg = self._date_terms(j, p[j][None, :])
            log_k = log_k + lk
            log_g = log_g + lg
        return self.drift_many(i, t, xq[None, :], log_k, log_g)[0]

    def drift_many(self, i: int, t: float, xs: np.ndarray,
                   log_kernel: np.ndarray, log_gauss: np.ndarray) -> np.ndarray:
        """Vectorized drift for B concurrent states sharing the interval.

        xs is (B, d); log_kernel / log_gauss are the (B, M) conditioning
        sums from a weight tracker (zeros when i = 0).  t must lie
        strictly below t_{i+1}.
        """
        logw, log_f, targets, tau = self._interval_weights(i, t, xs, log_kernel)
        mean, alive = _weighted_target_mean(logw, targets)
        if not alive.all():
            dead = ~alive
            mean[dead] = targets[self._fallback_indices(log_f, log_gauss, dead, i)]
        return (mean - xs) / tau

    def pin_many(self, i: int, t: float, xs: np.ndarray,
                 log_kernel: np.ndarray, log_gauss: np.ndarray,
                 u: np.ndarray) -> np.ndarray:
        """Draw the grid value x_{i+1} for B states from the pinning law.

        Sample m is selected with probability proportional to the same
        weight w_m that defines the drift at (t, xs), and the row comes
        back as X^m_{t_{i+1}} exactly.  u holds one uniform variate in
        [0, 1) per state.  States whose weights all vanish follow the
        fallback policy.
        """
        logw, log_f, targets, _ = self._interval_weights(i, t, xs, log_kernel)
        m = logw.max(axis=1)
        alive = np.isfinite(m)
        w = np.exp(logw - np.where(alive, m, 0.0)[:, None])
        c = np.cumsum(w, axis=1)
        with np.errstate(invalid="ignore"):
            q = c / c[:, -1][:, None]
        u = np.asarray(u, dtype=np.float64).reshape(-1)
        idx = np.minimum((q < u[:, None]).sum(axis=1), targets.shape[0] - 1)
        if not alive.all():
            dead = ~alive
            idx[dead] = self._fallback_indices(log_f, log_gauss, dead, i)
        return targets[idx]

    def _interval_weights(self, i: int, t: float, xs: np.ndarray,
                          log_kernel: np.ndarray):
        """Log selection weights over samples for B states inside interval i."""
        lo, hi = self.grid.interval_bounds(i)
        tau = hi - t
        targets = self._vals[:, i, :]                                  # (M, d)
        prev = self._vals[:, i - 1, :] if i > 0 else np.zeros_like(targets)
        static = ((targets - prev) ** 2).sum(axis=1) / (2.0 * (hi - lo))   # (M,)
        if targets.shape[1] == 1:
            d2 = (targets[:, 0][None, :] - xs[:, 0][:, None]) ** 2
        else:
            d2 = ((targets[None, :, :] - xs[:, None, :]) ** 2).sum(axis=2)
        log_f = static[None, :] - d2 / (2.0 * tau)
        return log_kernel + log_f, log_f, targets, tau

    def _fallback_indices(self, log_f: np.ndarray, log_gauss: np.ndarray,
                          dead: np.ndarray, i: int) -> np.ndarray:
        """Sample indices for states whose kernel weights all vanished."""
        if self.fallback == "error":
            raise ZeroWeightMass(
                f"all {self.data.n_paths} kernel weights vanished for "
                f"{int(dead.sum())} state(s) in interval {i}; decrease memory "
                f"or increase the bandwidth"
            )
        # nearest sample in past-path space, bridge-factor weighted
        return np.argmax(log_f[dead] + log_gauss[dead], axis=1)

    def weight_tracker(self, n_paths: int) -> "WeightTracker":
        """Conditioning-weight state for a batch of concurrently grown paths."""
        return WeightTracker(self, n_paths)


class WeightTracker:
    """Running conditioning sums for B paths grown date by date.

    After the batch reaches the value at column j, call observe(j, xs);
    sums() then returns the (log kernel, log Gaussian surrogate) pair
    restricted to the estimator's memory window, both shaped (B, M).
    Full memory keeps running sums; a finite window keeps the last L
    per-date terms and re-adds them in date order, so results agree
    bitwise with a fresh accumulation over the same dates.
    """

    def __init__(self, est: DriftEstimator, n_paths: int):
        self._est = est
        self._shape = (n_paths, est.data.n_paths)
        if est.memory == "full":
            self._sum_k = np.zeros(self._shape)
            self._sum_g = np.zeros(self._shape)
            self._hist = None
        else:
            self._sum_k = None
            self._sum_g = None
            self._hist = []

    def observe(self, col: int, xs: np.ndarray) -> None:
        terms = self._est._date_terms(col, xs)
        if self._hist is None:
            self._sum_k = self._sum_k + terms[0]
            self._sum_g = self._sum_g + terms[1]
        else:
            self._hist.append(terms)
            if len(self._hist) > self._est.memory:
                self._hist.pop(0)

    def sums(self):
        if self._hist is None:
            return self._sum_k, self._sum_g
        sk = np.zeros(self._shape)
        sg = np.zeros(self._shape)
        for lk, lg in self._hist:
            sk = sk + lk
            sg = sg + lg
        return sk, sg


def _as_points(points, dim: int) -> np.ndarray:
    """Coerce a sequence of states into an (i, dim) float array."""
    if isinstance(points, np.ndarray) and points.ndim == 2:
        arr = np.asarray(points, dtype=np.float64)
    else:
        rows = [np.asarray(p, dtype=np.float64).reshape(-1) for p in points]
        if not rows:
            return np.empty((0, dim))
        arr = np.array(rows, dtype=np.float64).reshape(len(rows), -1)
    if arr.size == 0:
        return arr.reshape(0, dim)
    if arr.shape[1] != dim:
        raise ValueError(f"points must live in R^{dim}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("conditioning points must be finite")
    return arr
