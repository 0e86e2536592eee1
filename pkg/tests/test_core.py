import math

import numpy as np
import pytest

from linexsel import (
    CovarianceSpec,
    InvalidParameterError,
    LinexOverflowError,
    LinexParams,
    MeanVectorPair,
    ThetaStar,
    linex_loss,
    log_sum_exp,
    rng_stream,
    sample_pair,
    std_normal_cdf,
    std_normal_pdf,
)
from linexsel.core import sample_batch


class TestStdNormal:
    def test_pdf_values(self):
        assert std_normal_pdf(0.0) == pytest.approx(0.3989422804, abs=1e-10)
        assert std_normal_pdf(1.0) == std_normal_pdf(-1.0)
        assert std_normal_pdf(2.0) == pytest.approx(0.05399096651, abs=1e-10)

    def test_cdf_values(self):
        assert std_normal_cdf(0.0) == 0.5
        assert std_normal_cdf(0.5) == pytest.approx(0.6914624613, abs=1e-10)
        # 30-digit reference gives 0.42656353585 at this argument
        assert std_normal_cdf(-0.18513) == pytest.approx(0.42656353585, abs=1e-11)
        assert std_normal_cdf(math.inf) == 1.0
        assert std_normal_cdf(-math.inf) == 0.0

    def test_cdf_against_mpmath(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 40
        for u in np.linspace(-8, 8, 81):
            exact = float(mp.ncdf(mp.mpf(float(u))))
            assert std_normal_cdf(float(u)) == pytest.approx(exact, abs=1e-12)

    def test_cdf_symmetry_property(self, rng):
        for u in rng.normal(0, 3, 300):
            assert std_normal_cdf(u) + std_normal_cdf(-u) == pytest.approx(1.0, abs=1e-14)

    def test_cdf_monotone(self):
        grid = np.linspace(-10, 10, 401)
        vals = [std_normal_cdf(u) for u in grid]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


class TestLinexLoss:
    def test_zero_at_truth(self):
        assert linex_loss(3.7, 3.7, LinexParams(2.5)) == 0.0

    def test_asymmetry(self):
        a = LinexParams(1.0)
        assert linex_loss(1.0, 0.0, a) == pytest.approx(math.e - 2, abs=1e-12)
        assert linex_loss(-1.0, 0.0, a) == pytest.approx(math.exp(-1), abs=1e-12)

    def test_positive_off_truth(self, rng):
        for _ in range(500):
            a = LinexParams(rng.uniform(0.1, 4) * rng.choice([-1, 1]))
            delta, theta = rng.normal(0, 5, 2)
            if delta != theta:
                assert linex_loss(delta, theta, a) > 0

    def test_convex_in_estimate(self, rng):
        for _ in range(300):
            a = LinexParams(rng.uniform(0.1, 3) * rng.choice([-1, 1]))
            theta = rng.normal()
            d1, d2 = rng.normal(0, 4, 2)
            mid = linex_loss((d1 + d2) / 2, theta, a)
            avg = (linex_loss(d1, theta, a) + linex_loss(d2, theta, a)) / 2
            assert mid <= avg + 1e-12

    def test_overflow_is_reported(self):
        with pytest.raises(LinexOverflowError) as exc:
            linex_loss(800.0, 0.0, LinexParams(1.0))
        assert exc.value.exponent == pytest.approx(800.0)

    def test_zero_a_rejected(self):
        with pytest.raises(InvalidParameterError):
            LinexParams(0.0)


class TestCovarianceSpec:
    def test_derived_quantities(self):
        cov = CovarianceSpec(sigma_xx=8.0, sigma_yy=2.0, sigma_xy=2.0)
        assert cov.rho == pytest.approx(0.5)
        assert cov.xi == pytest.approx(0.5)
        assert cov.det == pytest.approx(12.0)

    def test_degenerate_allowed(self):
        cov = CovarianceSpec.from_correlation(2.0, 2.0, -1.0)
        assert cov.rho == -1.0
        assert cov.is_singular
        assert cov.det == 0.0

    @pytest.mark.parametrize(
        "sxx,syy,sxy",
        [(0.0, 1.0, 0.0), (1.0, -1.0, 0.0), (1.0, 1.0, 1.5), (1.0, 2.0, -2.0)],
    )
    def test_invalid_rejected(self, sxx, syy, sxy):
        with pytest.raises(InvalidParameterError):
            CovarianceSpec(sigma_xx=sxx, sigma_yy=syy, sigma_xy=sxy)

    def test_theta_star_nonnegative(self):
        means = MeanVectorPair((0.2, 2.0), (2.0, 0.2))
        assert means.theta_star == ThetaStar(1.8, 1.8)
        with pytest.raises(InvalidParameterError):
            ThetaStar(-0.1, 0.0)


def test_log_sum_exp():
    assert log_sum_exp([0.0, 0.0]) == pytest.approx(math.log(2))
    assert log_sum_exp([-math.inf, 3.0]) == pytest.approx(3.0)
    assert log_sum_exp([1000.0, 1000.0]) == pytest.approx(1000.0 + math.log(2))


class TestSampling:
    def test_degenerate_rho_is_exact(self):
        cov = CovarianceSpec.from_correlation(2.0, 2.0, 1.0)
        means = MeanVectorPair((0.0, 0.0), (0.0, 0.0))
        gen = rng_stream(7)
        for _ in range(200):
            obs = sample_pair(means, cov, gen)
            assert obs.z1[1] == obs.z1[0]
            assert obs.z2[1] == obs.z2[0]

    def test_independent_case_correlation(self):
        cov = CovarianceSpec.from_correlation(2.0, 3.0, 0.0)
        means = MeanVectorPair((0.0, 0.0), (1.0, 1.0))
        x1, y1, _, _ = sample_batch(means, cov, rng_stream(11), 100_000)
        corr = np.corrcoef(x1, y1)[0, 1]
        assert abs(corr) < 0.01

    def test_moments_reproduced(self):
        cov = CovarianceSpec(sigma_xx=2.0, sigma_yy=5.0, sigma_xy=-1.5)
        means = MeanVectorPair((0.3, -0.7), (2.0, 1.0))
        n = 100_000
        x1, y1, x2, y2 = sample_batch(means, cov, rng_stream(13), n)
        for sample, mean, var in [
            (x1, 0.3, 2.0), (y1, -0.7, 5.0), (x2, 2.0, 2.0), (y2, 1.0, 5.0),
        ]:
            assert sample.mean() == pytest.approx(mean, abs=4 * math.sqrt(var / n))
        emp = np.cov(np.vstack([x1, y1]), ddof=1)
        assert emp[0, 0] == pytest.approx(2.0, rel=0.05)
        assert emp[1, 1] == pytest.approx(5.0, rel=0.05)
        assert emp[0, 1] == pytest.approx(-1.5, rel=0.05)

    def test_streams_reproducible_and_independent(self):
        cov = CovarianceSpec(sigma_xx=1.0, sigma_yy=1.0, sigma_xy=0.5)
        means = MeanVectorPair((0.0, 0.0), (0.0, 0.0))
        seq1 = [sample_pair(means, cov, rng_stream(42, 1, 2)) for _ in range(5)]
        seq2 = [sample_pair(means, cov, rng_stream(42, 1, 2)) for _ in range(5)]
        assert seq1 == seq2
        other = [sample_pair(means, cov, rng_stream(42, 1, 3)) for _ in range(5)]
        assert other != seq1

    def test_batch_estimates_match_scalar_evaluate(self):
        from linexsel import EstimatorSpec, LinexParams, ObservationPair, PriorSpec, evaluate, select
        from linexsel.risksim import _batch_estimates, _batch_summaries

        cov = CovarianceSpec(sigma_xx=2.0, sigma_yy=3.0, sigma_xy=1.0)
        means = MeanVectorPair((1.0, -1.0), (0.5, 0.5))
        a = LinexParams(-0.9)
        x1, y1, x2, y2 = sample_batch(means, cov, rng_stream(5), 64)
        _, x_max, y_sel, y_other, t1, t2 = _batch_summaries(x1, y1, x2, y2)
        specs = [
            EstimatorSpec.n1(), EstimatorSpec.n2(), EstimatorSpec.n3(),
            EstimatorSpec.n4(0.8), EstimatorSpec.shift(1.1),
            EstimatorSpec.bayes(PriorSpec(0.0, 0.0, 2.0)),
            EstimatorSpec.improved(EstimatorSpec.n3()),
        ]
        for spec in specs:
            batch = _batch_estimates(spec, x_max, y_sel, y_other, t1, t2, a.a, cov)
            for k in range(64):
                s = select(ObservationPair((x1[k], y1[k]), (x2[k], y2[k])))
                scalar = evaluate(spec, s, a, cov)
                assert batch[k] == pytest.approx(scalar, rel=1e-12, abs=1e-12), spec.label
