"""Metrics: quantiles, KS test, quadratic variation, correlation, roughness."""
import math

import numpy as np
import pytest

from tsbridge import (Dataset, Path, RngStream, ValidationError, build_report,
                      correlation_diff, hurst_estimate, ks_two_sample,
                      marginal_stats, quadratic_variation, unit_grid)

KS_HAND_P = 0.8438198245415606   # D = 0.5 for {1,2} vs {1.5,2.5}, ne = 1


def _brute_ks_stat(a, b):
    """Sup over pooled support of |ECDF_a - ECDF_b|, counted directly."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    best = 0.0
    for x in np.concatenate([a, b]):
        best = max(best, abs((a <= x).mean() - (b <= x).mean()))
    return best


def test_marginal_stats_linear_quantiles():
    mean, q5, q95 = marginal_stats(np.arange(11.0))
    assert mean == 5.0
    assert q5 == pytest.approx(0.5)
    assert q95 == pytest.approx(9.5)


def test_marginal_stats_rejects_empty():
    with pytest.raises(ValueError):
        marginal_stats([])


def test_ks_identical_samples():
    d, p = ks_two_sample([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert d == 0.0
    assert p == 1.0


def test_ks_disjoint_samples():
    d, p = ks_two_sample(np.arange(50.0), np.arange(100.0, 150.0))
    assert d == 1.0
    assert p < 1e-10


def test_ks_hand_computed_case():
    d, p = ks_two_sample([1.0, 2.0], [1.5, 2.5])
    assert d == 0.5
    assert p == pytest.approx(KS_HAND_P, rel=1e-12)


def test_ks_statistic_matches_brute_force():
    rng = RngStream(0, 0).generator()
    for _ in range(25):
        na, nb = rng.integers(1, 12, size=2)
        a = np.round(rng.standard_normal(na), 1)   # force ties
        b = np.round(rng.standard_normal(nb), 1)
        d, _ = ks_two_sample(a, b)
        assert d == pytest.approx(_brute_ks_stat(a, b), abs=1e-12)


def test_ks_symmetry_and_empty_rejection():
    a, b = [0.0, 1.0, 1.0], [0.5, 2.0]
    assert ks_two_sample(a, b) == ks_two_sample(b, a)
    with pytest.raises(ValueError):
        ks_two_sample([], [1.0])
    with pytest.raises(ValueError):
        ks_two_sample([1.0], [])


def test_ks_pvalue_decreases_with_statistic():
    # same sample sizes, growing shift: p must be non-increasing in D
    base = np.linspace(0.0, 1.0, 30)
    prev_d, prev_p = -1.0, 2.0
    for shift in (0.0, 0.1, 0.3, 0.6, 1.0, 2.0):
        d, p = ks_two_sample(base, base + shift)
        assert d >= prev_d
        assert p <= prev_p + 1e-15
        prev_d, prev_p = d, p


def test_quadratic_variation_hand_case():
    path = Path(np.array([1.0, 2.0, 0.0]))
    assert quadratic_variation(path) == 6.0
    assert quadratic_variation(path, include_origin=False) == 5.0


def test_quadratic_variation_multidimensional_and_scaling():
    path = np.array([[1.0, 0.0], [0.0, 2.0]])
    # origin term 1, increment norm 1 + 4
    assert quadratic_variation(path) == 6.0
    x = RngStream(1, 0).generator().standard_normal(9)
    assert quadratic_variation(3.0 * x) == pytest.approx(9.0 * quadratic_variation(x), rel=1e-14)


def test_correlation_diff_identity_is_zero():
    data = Dataset(unit_grid(4), RngStream(2, 0).generator().standard_normal((30, 4, 1)))
    diff, per_date = correlation_diff(data, data)
    assert np.array_equal(diff, np.zeros((4, 4)))
    assert np.array_equal(per_date, np.zeros(4))


def test_correlation_diff_antisymmetric_and_shaped():
    g = Dataset(unit_grid(3), RngStream(3, 0).generator().standard_normal((40, 3, 1)))
    r = Dataset(unit_grid(3), RngStream(3, 1).generator().standard_normal((40, 3, 1)))
    d_gr, rows = correlation_diff(g, r)
    d_rg, _ = correlation_diff(r, g)
    assert d_gr.shape == (3, 3)
    assert np.allclose(d_gr, -d_rg, atol=1e-15)
    assert np.allclose(rows, d_gr.sum(axis=1))
    assert np.allclose(np.diag(d_gr), 0.0)


def test_correlation_diff_rejections():
    g = Dataset(unit_grid(2), RngStream(4, 0).generator().standard_normal((10, 2, 1)))
    r = Dataset(unit_grid(3), RngStream(4, 1).generator().standard_normal((10, 3, 1)))
    with pytest.raises(ValidationError):
        correlation_diff(g, r)
    flat = Dataset(unit_grid(2), np.tile([[1.0], [2.0]], (10, 1, 1)))
    with pytest.raises(ValidationError, match="date 1.0"):
        correlation_diff(flat, g)
    wide = Dataset(unit_grid(2), RngStream(4, 2).generator().standard_normal((10, 2, 2)))
    with pytest.raises(ValidationError):
        correlation_diff(wide, wide)


def test_hurst_unit_quadratic_variation_gives_half():
    # QV = 1 exactly: single date at value 1
    assert hurst_estimate(np.array([1.0, 1.0, 1.0])) == 0.5


def test_hurst_matches_formula():
    x = RngStream(5, 0).generator().standard_normal(16)
    want = 0.5 * (1.0 - math.log(quadratic_variation(x)) / math.log(16))
    assert hurst_estimate(x) == pytest.approx(want, rel=1e-15)


def test_hurst_rescaling_shift():
    x = RngStream(6, 0).generator().standard_normal(25)
    shift = -math.log(4.0) / (2.0 * math.log(25))
    assert hurst_estimate(2.0 * x) == pytest.approx(hurst_estimate(x) + shift, abs=1e-12)


def test_hurst_rejections():
    with pytest.raises(ValueError):
        hurst_estimate(np.array([1.0]))
    with pytest.raises(ValueError):
        hurst_estimate(np.zeros(5))


def test_hurst_recovers_fbm_roughness():
    from tsbridge import FbmParams, sample_fbm, scaled_grid
    p = FbmParams(0.3, scaled_grid(256, 1.0))
    data = sample_fbm(p, 200, RngStream(7, 0))
    est = np.array([hurst_estimate(data.values[m]) for m in range(200)])
    assert est.mean() == pytest.approx(0.3, abs=0.05)


def _two_datasets(seed=8, m=60, n=4):
    g = Dataset(unit_grid(n), RngStream(seed, 0).generator().standard_normal((m, n, 1)))
    r = Dataset(unit_grid(n), RngStream(seed, 1).generator().standard_normal((2 * m, n, 1)))
    return r, g


def test_build_report_structure():
    ref, gen = _two_datasets()
    rep = build_report(ref, gen)
    assert rep.n_ref == 120 and rep.n_gen == 60
    assert rep.dates == [1.0, 2.0, 3.0, 4.0]
    for field in (rep.ref_mean, rep.gen_q5, rep.ks_stat, rep.ks_pvalue):
        assert isinstance(field, list) and len(field) == 4
    assert len(rep.qv_ref) == 120 and len(rep.qv_gen) == 60
    assert rep.qv_includes_origin is True
    assert np.array(rep.corr_diff).shape == (4, 4)
    assert rep.hurst is None
    # spot-check one date against the primitives
    d, p = ks_two_sample(gen.scalar_marginal(2), ref.scalar_marginal(2))
    assert rep.ks_stat[2] == d and rep.ks_pvalue[2] == p
    assert rep.ref_mean[0] == marginal_stats(ref.scalar_marginal(0))[0]


def test_build_report_to_dict_keys():
    ref, gen = _two_datasets(seed=9, m=25, n=3)
    doc = build_report(ref, gen, include_origin=False, with_hurst=True).to_dict()
    assert set(doc) == {"dates", "n_ref", "n_gen", "marginals",
                        "quadratic_variation", "correlation", "hurst"}
    assert set(doc["marginals"]) == {"ref_mean", "ref_q5", "ref_q95", "gen_mean",
                                     "gen_q5", "gen_q95", "ks_stat", "ks_pvalue"}
    assert doc["quadratic_variation"]["includes_origin"] is False
    assert set(doc["hurst"]) == {"ref_mean", "ref_std", "gen_mean", "gen_std"}
    no_hurst = build_report(ref, gen).to_dict()
    assert "hurst" not in no_hurst


def test_build_report_rejections():
    ref, gen = _two_datasets(seed=10, m=20, n=3)
    other = Dataset(unit_grid(2), RngStream(10, 2).generator().standard_normal((20, 2, 1)))
    with pytest.raises(ValidationError):
        build_report(ref, other)
    wide = Dataset(unit_grid(3), RngStream(10, 3).generator().standard_normal((20, 3, 2)))
    with pytest.raises(ValidationError):
        build_report(wide, wide)
