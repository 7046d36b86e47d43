"""Reference models used to train and benchmark the generator.

Each sampler draws M independent paths on its natural grid, consuming a
single RngStream in a documented order (path-major, date-minor), so a
(seed, stream) pair pins the dataset exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, RngStream, TimeGrid, ValidationError

__all__ = [
    "CholeskyFailure",
    "ArParams",
    "GarchParams",
    "FbmParams",
    "GbmParams",
    "unit_grid",
    "scaled_grid",
    "sample_ar",
    "sample_garch",
    "fbm_covariance",
    "sample_fbm",
    "sample_gbm",
    "sample_gaussian_onestep",
]


class CholeskyFailure(RuntimeError):
    """Covariance factorization failed even after diagonal jitter."""


def unit_grid(n: int) -> TimeGrid:
    """Integer dates 1, 2, ..., n."""
    return TimeGrid(np.arange(1, n + 1, dtype=np.float64))


def scaled_grid(n: int, t_max: float) -> TimeGrid:
    """Equally spaced dates i * t_max / n, i = 1..n."""
    return TimeGrid(np.arange(1, n + 1, dtype=np.float64) * (float(t_max) / n))


@dataclass(frozen=True)
class ArParams:
    """Three-date autoregression with a square-root feedback term:

    X_1 = b + s1 e1,  X_2 = beta1 X_1 + s2 e2,
    X_3 = beta2 X_2 + sqrt(|X_1|) + s3 e3,  e_i iid N(0, 1).
    """

    b: float = 0.7
    beta1: float = -1.0
    beta2: float = -1.0
    sigma1: float = 0.1
    sigma2: float = 0.05
    sigma3: float = 0.05


@dataclass(frozen=True)
class GarchParams:
    """Conditionally heteroskedastic recursion on dates 1..n:

    X_{i+1} = sigma_{i+1} e_{i+1},
    sigma_{i+1}^2 = a0 + a1 X_i^2 + a2 X_{i-1}^2,   X_0 = X_{-1} = 0,

    with e iid centered Gaussian of variance noise_var.
    """

    alpha0: float = 5.0
    alpha1: float = 0.4
    alpha2: float = 0.1
    noise_var: float = 0.1
    n: int = 60

    def __post_init__(self):
        if self.alpha0 < 0 or self.alpha1 < 0 or self.alpha2 < 0:
            raise ValidationError("GARCH coefficients must be nonnegative")
        if self.noise_var < 0:
            raise ValidationError("noise variance must be nonnegative")
        if int(self.n) < 1:
            raise ValidationError("need at least one date")


@dataclass(frozen=True)
class FbmParams:
    """Fractional Brownian motion with Hurst index H on an explicit grid."""

    hurst: float
    grid: TimeGrid

    def __post_init__(self):
        if not 0.0 < self.hurst < 1.0:
            raise ValidationError(f"Hurst index must lie in (0, 1), got {self.hurst}")


@dataclass(frozen=True)
class GbmParams:
    """Geometric Brownian motion S_t = s0 exp((mu - vol^2/2) t + vol W_t)."""

    grid: TimeGrid
    s0: float = 1.0
    mu: float = 0.0
    vol: float = 0.2

    def __post_init__(self):
        if self.s0 <= 0:
            raise ValidationError("spot s0 must be positive")
        if self.vol < 0:
            raise ValidationError("volatility must be nonnegative")


def sample_ar(p: ArParams, m: int, rng: RngStream) -> Dataset:
    """M paths of the three-date autoregression on grid [1, 2, 3]."""
    eps = rng.generator().standard_normal((int(m), 3))
    x1 = p.b + p.sigma1 * eps[:, 0]
    x2 = p.beta1 * x1 + p.sigma2 * eps[:, 1]
    x3 = p.beta2 * x2 + np.sqrt(np.abs(x1)) + p.sigma3 * eps[:, 2]
    return Dataset(unit_grid(3), np.stack([x1, x2, x3], axis=1))


def sample_garch(p: GarchParams, m: int, rng: RngStream) -> Dataset:
    """M paths of the heteroskedastic recursion on grid [1..n]."""
    eps = np.sqrt(p.noise_var) * rng.generator().standard_normal((int(m), p.n))
    x = np.zeros((int(m), p.n))
    prev = np.zeros(int(m))      # X_{i-1}
    prev2 = np.zeros(int(m))     # X_{i-2}
    for i in range(p.n):
        sigma = np.sqrt(p.alpha0 + p.alpha1 * prev**2 + p.alpha2 * prev2**2)
        x[:, i] = sigma * eps[:, i]
        prev2 = prev
        prev = x[:, i]
    return Dataset(unit_grid(p.n), x)


def fbm_covariance(p: FbmParams) -> np.ndarray:
    """Exact covariance C[a, b] = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2 on the grid."""
    t = p.grid.dates
    h2 = 2.0 * p.hurst
    return 0.5 * (t[:, None] ** h2 + t[None, :] ** h2 - np.abs(t[:, None] - t[None, :]) ** h2)


def sample_fbm(p: FbmParams, m: int, rng: RngStream) -> Dataset:
    """M fBM paths via a lower Cholesky factor of the exact covariance.

    A failed factorization gets diagonal jitter 1e-12 * max(diag),
    escalated tenfold up to three retries, before CholeskyFailure.
    """
    cov = fbm_covariance(p)
    jitter = 1e-12 * float(np.max(np.diag(cov)))
    lower = None
    for attempt in range(4):
        bump = 0.0 if attempt == 0 else jitter * 10.0 ** (attempt - 1)
        try:
            lower = np.linalg.cholesky(cov + bump * np.eye(cov.shape[0]))
            break
        except np.linalg.LinAlgError:
            continue
    if lower is None:
        raise CholeskyFailure(
            f"covariance of size {cov.shape[0]} is not positive definite "
            f"even with jitter up to {jitter * 100.0}"
        )
    z = rng.generator().standard_normal((int(m), p.grid.n))
    return Dataset(p.grid, z @ lower.T)


def sample_gbm(p: GbmParams, m: int, rng: RngStream) -> Dataset:
    """M geometric Brownian paths; values start at the first grid date."""
    steps = np.diff(p.grid.with_origin())
    eps = rng.generator().standard_normal((int(m), p.grid.n))
    log_incr = (p.mu - 0.5 * p.vol**2) * steps[None, :] + p.vol * np.sqrt(steps)[None, :] * eps
    return Dataset(p.grid, p.s0 * np.exp(np.cumsum(log_incr, axis=1)))


def sample_gaussian_onestep(mean: float, var: float, t1: float, m: int,
                            rng: RngStream) -> Dataset:
    """M draws of a single Gaussian marginal N(mean, var) observed at t1."""
    if var < 0:
        raise ValidationError("variance must be nonnegative")
    x = mean + np.sqrt(var) * rng.generator().standard_normal((int(m), 1))
    return Dataset(TimeGrid([float(t1)]), x)
