"""Shared data model for the generator.

Conventions used throughout the package:

  * an observation grid is a strictly increasing vector of positive dates
    t_1 < ... < t_N; every process starts from the implicit origin
    X_{t_0} = 0 at t_0 = 0,
  * a path is an (N, d) array of grid values, a dataset is an (M, N, d)
    stack of paths sharing one grid,
  * randomness comes from counter-based Philox streams keyed by
    (seed, stream_id) so that any path or sampler can be reproduced in
    isolation.

Arrays are float64 and frozen after construction; nothing in the package
mutates a dataset in place.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ValidationError",
    "TimeGrid",
    "Path",
    "Dataset",
    "SimConfig",
    "RngStream",
    "validate_dataset",
]

_U64 = (1 << 64) - 1


class ValidationError(ValueError):
    """A grid, path, or dataset violates a structural invariant."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Observation dates t_1 < ... < t_N, all positive and finite."""

    dates: np.ndarray

    def __post_init__(self):
        d = np.array(self.dates, dtype=np.float64, copy=True).reshape(-1)
        if d.size == 0:
            raise ValidationError("grid must contain at least one date")
        if not np.all(np.isfinite(d)):
            raise ValidationError("grid dates must be finite")
        if d[0] <= 0.0:
            raise ValidationError("grid dates must be positive (origin t_0 = 0 is implicit)")
        if d.size > 1 and np.any(np.diff(d) <= 0.0):
            raise ValidationError("grid dates must be strictly increasing")
        object.__setattr__(self, "dates", _frozen(d))

    @property
    def n(self) -> int:
        return int(self.dates.size)

    @property
    def horizon(self) -> float:
        """Final date t_N."""
        return float(self.dates[-1])

    def with_origin(self) -> np.ndarray:
        """Dates padded with the implicit origin: [0, t_1, ..., t_N]."""
        return np.concatenate(([0.0], self.dates))

    def interval_bounds(self, i: int) -> tuple[float, float]:
        """Endpoints (t_i, t_{i+1}) of interval i, 0-based, t_0 = 0."""
        if not 0 <= i < self.n:
            raise ValidationError(f"interval index {i} outside [0, {self.n})")
        lo = 0.0 if i == 0 else float(self.dates[i - 1])
        return lo, float(self.dates[i])

    def __eq__(self, other) -> bool:
        return isinstance(other, TimeGrid) and np.array_equal(self.dates, other.dates)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Path:
    """One realization on a grid: values[i] = X_{t_{i+1}} in R^d, shape (N, d)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise ValidationError(f"path values must be (N,) or (N, d), got shape {v.shape}")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise ValidationError("path must contain at least one date and one dimension")
        if not np.all(np.isfinite(v)):
            raise ValidationError("path values must be finite")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])

    def __eq__(self, other) -> bool:
        return isinstance(other, Path) and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Dataset:
    """M paths on a shared grid; values has shape (M, N, d)."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.ndim != 3:
            raise ValidationError(f"dataset values must be (M, N) or (M, N, d), got shape {v.shape}")
        if v.shape[0] < 1:
            raise ValidationError("dataset must contain at least one path")
        if v.shape[1] != self.grid.n:
            raise ValidationError(
                f"path length {v.shape[1]} does not match grid length {self.grid.n}"
            )
        if v.shape[2] < 1:
            raise ValidationError("dataset must have dimension d >= 1")
        if not np.all(np.isfinite(v)):
            raise ValidationError("dataset values must be finite")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n_paths(self) -> int:
        return int(self.values.shape[0])

    @property
    def dim(self) -> int:
        return int(self.values.shape[2])

    def path(self, m: int) -> Path:
        return Path(self.values[m])

    def marginal(self, i: int) -> np.ndarray:
        """Cross-section at date t_{i+1}: shape (M, d)."""
        return self.values[:, i, :]

    def scalar_marginal(self, i: int) -> np.ndarray:
        """Cross-section at date t_{i+1} for d = 1 datasets: shape (M,)."""
        if self.dim != 1:
            raise ValidationError("scalar marginal requires a d = 1 dataset")
        return self.values[:, i, 0]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dataset)
            and self.grid == other.grid
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def validate_dataset(grid: TimeGrid, rows) -> Dataset:
    """Build a Dataset from a raw numeric table, rejecting invariant violations."""
    try:
        arr = np.asarray(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"dataset rows are not a numeric table: {exc}") from None
    return Dataset(grid, arr)


@dataclass(frozen=True)
class SimConfig:
    """Simulation controls: sub-steps per grid interval, seed, batch size."""

    n_sub: int = 100
    seed: int = 0
    batch: int = 1

    def __post_init__(self):
        if int(self.n_sub) < 1:
            raise ValidationError("n_sub must be >= 1")
        if int(self.batch) < 1:
            raise ValidationError("batch must be >= 1")


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream keyed by (seed, stream).

    Same key gives the same sequence; distinct stream ids give
    statistically independent streams, so per-path generators can be
    created in any order (or in parallel) without coordination.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([int(self.seed) & _U64, int(self.stream) & _U64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))
