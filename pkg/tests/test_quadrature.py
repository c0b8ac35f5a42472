import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from fraclab.errors import NonIntegrableSingularity, ZeroDensityRegion
from fraclab.params import sphere_area, unit_ball_volume
from fraclab.quadrature import (Estimate, Importance, McConfig, chunk_generator, combine,
                                gagliardo_mc, integrate_mc, integrate_radial, ratio)


class TestEstimate:
    def test_power_delta_method(self):
        e = Estimate(4.0, 0.4).power(0.5)
        assert e.value == pytest.approx(2.0)
        assert e.uncertainty == pytest.approx(0.1)

    def test_plus_and_scaled(self):
        e = Estimate(1.0, 0.3).plus(Estimate(2.0, 0.4))
        assert e.value == 3.0 and e.uncertainty == pytest.approx(0.5)
        assert Estimate(2.0, 0.2).scaled(-3.0).uncertainty == pytest.approx(0.6)

    def test_combine_averages(self):
        c = combine([Estimate(1.0, 1.0), Estimate(3.0, 1.0)])
        assert c.value == pytest.approx(2.0)
        assert c.uncertainty == pytest.approx(math.sqrt(0.5))
        # RMS of the uncertainties over sqrt(k), not inverse-variance weighting
        c = combine([Estimate(0.0, 3.0), Estimate(4.0, 4.0)])
        assert c.value == pytest.approx(2.0)
        assert c.uncertainty == pytest.approx(math.sqrt(12.5) / math.sqrt(2))

    def test_ratio(self):
        r, se = ratio(Estimate(2.0, 0.02), Estimate(4.0, 0.04))
        assert r == 0.5
        assert se == pytest.approx(0.5 * math.hypot(0.01, 0.01))

    def test_negative_uncertainty_rejected(self):
        with pytest.raises(ValueError):
            Estimate(1.0, -1.0)


class TestConfig:
    @pytest.mark.parametrize("kw", [{"sample_count": 10}, {"truncation_radius": 0.1},
                                    {"inner_fraction": 1.0}, {"method": "sobol"}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            McConfig(**kw)

    def test_streams_are_counter_based(self):
        a = chunk_generator(7, 3, 5).random(4)
        b = chunk_generator(7, 3, 5).random(4)
        c = chunk_generator(7, 3, 6).random(4)
        d = chunk_generator(7, 4, 5).random(4)
        assert_allclose(a, b)
        assert not np.allclose(a, c) and not np.allclose(a, d)


class TestRadial:
    @pytest.mark.parametrize("N", [2, 3, 5])
    def test_gaussian_mass(self, N):
        e = integrate_radial(lambda r: np.exp(-r * r), 0.0, N)
        assert_allclose(e.value, math.pi ** (N / 2), rtol=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 5), st.floats(0.0, 0.9))
    def test_weighted_ball(self, N, frac):
        # int_{B_1} |x|^-beta = |S^{N-1}| / (N - beta)
        beta = frac * N
        e = integrate_radial(lambda r: np.ones_like(r), beta, N, 1.0)
        assert_allclose(e.value, sphere_area(N) / (N - beta), rtol=1e-8)

    def test_nonintegrable_origin(self):
        with pytest.raises(NonIntegrableSingularity):
            integrate_radial(lambda r: np.ones_like(r), 3.0, 3, 1.0)


class TestMonteCarlo:
    def test_ball_volume(self):
        cfg = McConfig(sample_count=50_000)
        e = integrate_mc(lambda x: (np.linalg.norm(x, axis=1) < 1).astype(float), 3, cfg,
                         Importance(radius=1.5))
        assert abs(e.value - unit_ball_volume(3)) < 4 * e.uncertainty

    def test_deterministic_and_worker_independent(self):
        f = lambda x: np.exp(-np.sum(x * x, axis=1))  # noqa: E731
        a = integrate_mc(f, 2, McConfig(sample_count=100_000, chunk_size=4096))
        b = integrate_mc(f, 2, McConfig(sample_count=100_000, chunk_size=4096, workers=4))
        assert a.value == b.value and a.uncertainty == b.uncertainty

    def test_uncertainty_shrinks_like_root_n(self):
        f = lambda x: np.exp(-np.sum(x * x, axis=1))  # noqa: E731
        e1 = integrate_mc(f, 2, McConfig(sample_count=20_000))
        e2 = integrate_mc(f, 2, McConfig(sample_count=320_000))
        assert e1.uncertainty / e2.uncertainty == pytest.approx(4.0, rel=0.15)

    def test_support_outside_ball_detected(self):
        with pytest.raises(ZeroDensityRegion):
            integrate_mc(lambda x: np.ones(len(x)), 2, McConfig(sample_count=2000),
                         Importance(radius=1.0))

    def test_z_score_calibration(self):
        truth = math.pi
        zs = []
        for seed in range(50):
            e = integrate_mc(lambda x: np.exp(-np.sum(x * x, axis=1)), 2,
                             McConfig(seed=seed, sample_count=5000), Importance(power=1.0))
            zs.append((e.value - truth) / e.uncertainty)
        assert -0.5 <= np.mean(zs) <= 0.5
        assert 0.7 <= np.std(zs, ddof=1) <= 1.4


class TestGagliardoMc:
    def test_kernel_tail_guard(self):
        with pytest.raises(NonIntegrableSingularity):
            gagliardo_mc(lambda x, z: np.ones(len(x)), 2.0, McConfig(), N=2, x_radius=1.0,
                         holder_power=2.0)

    def test_near_diagonal_guard(self):
        with pytest.raises(NonIntegrableSingularity):
            gagliardo_mc(lambda x, z: np.ones(len(x)), 3.0, McConfig(), N=2, x_radius=1.0,
                         holder_power=0.5)

    def test_separable_closed_form(self):
        # F = 1{|x|<1} min(|z|, 1)^2 with kernel |z|^-(N+1) in N = 2:
        # |B_1| * 2 pi * (int_0^1 r^2 r^-3 r dr + int_1^inf r^-3 r dr) = pi * 2 pi * 2
        def F(x, z):
            inside = np.linalg.norm(x, axis=1) < 1
            return inside * np.minimum(np.linalg.norm(z, axis=1), 1.0) ** 2

        e = gagliardo_mc(F, 3.0, McConfig(sample_count=200_000, singular_split_radius=1.0),
                         N=2, x_radius=1.0, holder_power=2.0)
        truth = math.pi * 2 * math.pi * 2.0
        assert abs(e.value - truth) < 4 * e.uncertainty
        assert e.relative_uncertainty < 0.01
