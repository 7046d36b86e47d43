"""Distributional diagnostics comparing generated and reference datasets.

All statistics are plain arrays and floats so reports can be serialized
verbatim; nothing here draws figures.  Sample standard deviations use
ddof = 1 throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, Path, ValidationError

__all__ = [
    "marginal_stats",
    "ks_two_sample",
    "quadratic_variation",
    "correlation_diff",
    "hurst_estimate",
    "MetricsReport",
    "build_report",
]


def marginal_stats(x) -> tuple[float, float, float]:
    """Mean and 5%/95% quantiles (linear interpolation, h = (n-1)p)."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise ValueError("cannot summarize an empty sample")
    q5, q95 = np.quantile(x, [0.05, 0.95], method="linear")
    return float(x.mean()), float(q5), float(q95)


def _ks_survival(lam: float) -> float:
    """Kolmogorov survival Q(lam) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lam^2).

    The alternating series is truncated once a term drops below 1e-12;
    near lam = 0 the terms never decay, so tiny arguments short-circuit
    to the limit value 1.
    """
    if lam < 1e-8:
        return 1.0
    total = 0.0
    sign = 1.0
    for k in range(1, 100_000):
        term = 2.0 * np.exp(-2.0 * (k * lam) ** 2)
        total += sign * term
        if term < 1e-12:
            break
        sign = -sign
    return float(min(1.0, max(0.0, total)))


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.

    D is the exact sup-distance between the two empirical CDFs (computed
    on the merged support); the p-value applies the small-sample
    correction lam = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * D with
    ne = na*nb/(na+nb) before the Kolmogorov survival function.
    """
    a = np.sort(np.asarray(a, dtype=np.float64).reshape(-1))
    b = np.sort(np.asarray(b, dtype=np.float64).reshape(-1))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    merged = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, merged, side="right") / a.size
    cdf_b = np.searchsorted(b, merged, side="right") / b.size
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    ne = a.size * b.size / (a.size + b.size)
    lam = (np.sqrt(ne) + 0.12 + 0.11 / np.sqrt(ne)) * d
    return d, _ks_survival(lam)


def quadratic_variation(path, include_origin: bool = True) -> float:
    """Sum of squared grid increments |X_{t_{i+1}} - X_{t_i}|^2.

    The implicit start X_{t_0} = 0 contributes |X_{t_1}|^2 unless
    include_origin is False.  Accepts a Path or an (N,) / (N, d) array;
    increments use the Euclidean norm across dimensions.
    """
    v = path.values if isinstance(path, Path) else np.asarray(path, dtype=np.float64)
    if v.ndim == 1:
        v = v[:, None]
    qv = float((np.diff(v, axis=0) ** 2).sum())
    if include_origin:
        qv += float((v[0] ** 2).sum())
    return qv


def correlation_diff(gen: Dataset, ref: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Difference of per-date Pearson correlation matrices, generated - reference.

    Returns the (N, N) difference and its per-date row sums.  Both
    datasets must share the grid and be scalar (d = 1); a date with zero
    cross-sectional variance makes the correlation undefined and raises.
    """
    if gen.grid != ref.grid:
        raise ValidationError("correlation difference requires a shared grid")
    if gen.dim != 1 or ref.dim != 1:
        raise ValidationError("correlation difference is defined for d = 1 datasets")
    mats = []
    for name, ds in (("generated", gen), ("reference", ref)):
        x = ds.values[:, :, 0]
        stds = x.std(axis=0)
        flat = np.flatnonzero(stds == 0.0)
        if flat.size:
            t_bad = ds.grid.dates[flat[0]]
            raise ValidationError(
                f"{name} dataset has zero variance at date {t_bad}; correlation undefined"
            )
        mats.append(np.corrcoef(x, rowvar=False).reshape(ds.grid.n, ds.grid.n))
    diff = mats[0] - mats[1]
    return diff, diff.sum(axis=1)


def hurst_estimate(path) -> float:
    """Roughness index H_hat = (1/2) [1 - log(QV) / log(N)] (natural logs).

    QV follows the quadratic_variation convention (origin included).
    Meaningful on grids with t_N = 1, where a true fBM has
    QV ~ N^{1-2H}; rescaling the path by c shifts the estimate by
    -log(c^2) / (2 log N).
    """
    v = path.values if isinstance(path, Path) else np.asarray(path, dtype=np.float64)
    n = v.shape[0]
    if n < 2:
        raise ValueError("roughness estimation needs at least two dates")
    qv = quadratic_variation(v)
    if qv <= 0.0:
        raise ValueError("quadratic variation vanished; roughness undefined")
    return float(0.5 * (1.0 - np.log(qv) / np.log(n)))


@dataclass
class MetricsReport:
    """Comparison of a generated dataset against its reference.

    Arrays are kept as lists so the report dumps to JSON unchanged.
    """

    dates: list
    n_ref: int
    n_gen: int
    ref_mean: list
    ref_q5: list
    ref_q95: list
    gen_mean: list
    gen_q5: list
    gen_q95: list
    ks_stat: list
    ks_pvalue: list
    qv_ref: list
    qv_gen: list
    qv_ks_stat: float
    qv_ks_pvalue: float
    qv_includes_origin: bool
    corr_diff: list
    corr_diff_per_date: list
    hurst: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "dates": self.dates,
            "n_ref": self.n_ref,
            "n_gen": self.n_gen,
            "marginals": {
                "ref_mean": self.ref_mean,
                "ref_q5": self.ref_q5,
                "ref_q95": self.ref_q95,
                "gen_mean": self.gen_mean,
                "gen_q5": self.gen_q5,
                "gen_q95": self.gen_q95,
                "ks_stat": self.ks_stat,
                "ks_pvalue": self.ks_pvalue,
            },
            "quadratic_variation": {
                "ref": self.qv_ref,
                "gen": self.qv_gen,
                "ks_stat": self.qv_ks_stat,
                "ks_pvalue": self.qv_ks_pvalue,
                "includes_origin": self.qv_includes_origin,
            },
            "correlation": {
                "diff": self.corr_diff,
                "per_date_sum": self.corr_diff_per_date,
            },
        }
        if self.hurst is not None:
            out["hurst"] = self.hurst
        return out


def build_report(ref: Dataset, gen: Dataset, include_origin: bool = True,
                 with_hurst: bool = False) -> MetricsReport:
    """Assemble the full diagnostic suite for two scalar datasets on one grid."""
    if ref.grid != gen.grid:
        raise ValidationError("reference and generated datasets must share the grid")
    if ref.dim != 1 or gen.dim != 1:
        raise ValidationError("reports are defined for d = 1 datasets")
    n = ref.grid.n
    stats_r = [marginal_stats(ref.scalar_marginal(i)) for i in range(n)]
    stats_g = [marginal_stats(gen.scalar_marginal(i)) for i in range(n)]
    ks = [ks_two_sample(gen.scalar_marginal(i), ref.scalar_marginal(i)) for i in range(n)]
    qv_r = [quadratic_variation(ref.values[m], include_origin) for m in range(ref.n_paths)]
    qv_g = [quadratic_variation(gen.values[m], include_origin) for m in range(gen.n_paths)]
    qv_d, qv_p = ks_two_sample(qv_g, qv_r)
    diff, per_date = correlation_diff(gen, ref)
    hurst = None
    if with_hurst:
        h_r = np.array([hurst_estimate(ref.values[m]) for m in range(ref.n_paths)])
        h_g = np.array([hurst_estimate(gen.values[m]) for m in range(gen.n_paths)])
        hurst = {
            "ref_mean": float(h_r.mean()),
            "ref_std": float(h_r.std(ddof=1)) if h_r.size > 1 else 0.0,
            "gen_mean": float(h_g.mean()),
            "gen_std": float(h_g.std(ddof=1)) if h_g.size > 1 else 0.0,
        }
    return MetricsReport(
        dates=[float(t) for t in ref.grid.dates],
        n_ref=ref.n_paths,
        n_gen=gen.n_paths,
        ref_mean=[s[0] for s in stats_r],
        ref_q5=[s[1] for s in stats_r],
        ref_q95=[s[2] for s in stats_r],
        gen_mean=[s[0] for s in stats_g],
        gen_q5=[s[1] for s in stats_g],
        gen_q95=[s[2] for s in stats_g],
        ks_stat=[k[0] for k in ks],
        ks_pvalue=[k[1] for k in ks],
        qv_ref=qv_r,
        qv_gen=qv_g,
        qv_ks_stat=qv_d,
        qv_ks_pvalue=qv_p,
        qv_includes_origin=bool(include_origin),
        corr_diff=diff.tolist(),
        corr_diff_per_date=per_date.tolist(),
        hurst=hurst,
    )
