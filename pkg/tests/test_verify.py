import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate

from fraclab.errors import ExponentMismatch
from fraclab.functions import catalog
from fraclab.quadrature import McConfig
from fraclab.verify import (HOLDS, VIOLATED, ElementaryConstants,
                            ckn_first_order_check, elementary_bounds_check, fit_loglog,
                            grad_equivalence_check, hardy_check, lorentz_embedding_check,
                            poincare_failure_probe, rellich_check, riesz_potential,
                            scaling_slope, weak_young_check, young_exponent, zero_checks)
from fraclab.quadrature import Estimate

from conftest import CONFIG_N2, STANDARD_N3

CFG = McConfig(sample_count=50_000)


class TestElementary:
    @pytest.mark.parametrize("N", [2, 3, 4, 5])
    @pytest.mark.parametrize("q", [0.3, 0.5, 1.0, 2.0, 3.7])
    def test_no_violations(self, N, q):
        rep = elementary_bounds_check(N, q, trials=2000)
        assert rep.verdict == HOLDS
        assert rep.metadata["upper_violations"] == rep.metadata["lower_violations"] == 0

    @pytest.mark.parametrize("N", [2, 4])
    @pytest.mark.parametrize("q", [1.0, 2.0, 3.7])
    def test_upper_constant_tight_at_equal_entries(self, N, q):
        assert elementary_bounds_check(N, q, trials=100).metadata["upper_tight_at_equal_entries"]

    def test_upper_constant_loose_in_odd_dimensions(self):
        # N = 3: equal entries give 3^(q-1) while A = 4^(q-1)
        meta = elementary_bounds_check(3, 2.0, trials=100).metadata
        assert meta["equal_entry_ratio"] == pytest.approx(3.0)
        assert meta["A"] == pytest.approx(4.0)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 6), st.floats(0.05, 6.0),
           st.lists(st.floats(0.0, 1e3), min_size=6, max_size=6))
    def test_bounds_property(self, N, q, vals):
        a = np.array(vals[:N])
        if a.sum() == 0:
            return
        c = ElementaryConstants(N, q)
        lhs, psum = a.sum() ** q, np.sum(a ** q)
        assert c.B * psum <= lhs * (1 + 1e-12)
        assert lhs <= c.A * psum * (1 + 1e-12)

    def test_invalid(self):
        with pytest.raises(ValueError):
            elementary_bounds_check(1, 2.0)


class TestInequalities:
    @pytest.mark.parametrize("name", ["bump", "gaussian"])
    def test_all_hold_on_standard_configuration(self, name):
        u, P = catalog(name, 3), STANDARD_N3
        reports = [
            hardy_check(u, 3, P.sigma, P.p, P.a, CFG),
            rellich_check(u, P, CFG),
            ckn_first_order_check(u, P, CFG),
            grad_equivalence_check(u, P, CFG),
            lorentz_embedding_check(u, P, CFG),
        ]
        for rep in reports:
            assert rep.verdict == HOLDS, rep.name
            assert math.isfinite(rep.ratio) and rep.ratio > 0
            for rec in rep.metadata.get("orbit", []):
                assert rec["stable"]

    def test_lorentz_embedding_legs(self):
        rep = lorentz_embedding_check(catalog("bump", 3), STANDARD_N3, CFG)
        assert rep.metadata["cross_validation_gap"] < 1e-6
        assert rep.ratio <= rep.metadata["chained_bound"] * 1.02

    def test_lorentz_embedding_nonradial_uses_hardy_littlewood(self):
        rep = lorentz_embedding_check(catalog("poly_bump", 3), STANDARD_N3, CFG)
        assert rep.verdict == HOLDS
        assert rep.metadata["layer_cake_relation"] == "hardy_littlewood"
        assert "chained_bound" not in rep.metadata

    def test_layer_cake_relation_is_strict_off_centre(self):
        # translation keeps the Lorentz norm but lowers the weighted integral
        from fraclab.functions import translate
        from fraclab.rearrange import hardy_layercake_identity
        u = translate(catalog("bump", 3), [0.5, 0.0, 0.0])
        rep = hardy_layercake_identity(u, STANDARD_N3, McConfig(sample_count=100_000))
        assert not rep.holds
        assert rep.lhs.value < 0.7 * rep.rhs.value

    def test_ckn_subreports(self):
        rep = ckn_first_order_check(catalog("poly_bump", 3), STANDARD_N3, CFG)
        assert [s.name for s in rep.subreports] == ["ckn_hardy_type", "ckn_sobolev_type"]
        assert rep.metadata["ckn_admissible"]

    def test_hardy_order_guard(self):
        with pytest.raises(ValueError):
            hardy_check(catalog("bump", 3), 3, 1.2, 1.6, 0.25)

    def test_zero_checks(self):
        for rep in zero_checks(3, STANDARD_N3, CFG):
            assert rep.verdict == HOLDS
            assert rep.lhs.value == rep.rhs.value == 0.0

    def test_report_serialises(self):
        import json
        rep = rellich_check(catalog("bump", 3), STANDARD_N3, CFG)
        json.dumps(rep.to_dict())


class TestSlopes:
    def test_fit_recovers_power_law(self):
        lam = [0.25, 0.5, 1, 2, 4]
        est = [Estimate(3.0 * l ** -1.7, 0.001 * l ** -1.7) for l in lam]
        slope, se, b = fit_loglog(lam, est)
        assert slope == pytest.approx(-1.7, abs=1e-10)
        assert b == pytest.approx(math.log(3.0), abs=1e-10)

    def test_scaling_slope_verdict(self):
        est = {l: Estimate(l ** 2.0, 1e-6) for l in (0.5, 1.0, 2.0)}
        assert scaling_slope(est, 2.0, 0.01, "square").verdict == HOLDS
        assert scaling_slope(est, 3.0, 0.01, "square").verdict == VIOLATED

    def test_poincare_probe(self):
        rep = poincare_failure_probe(catalog("bump", 2), CONFIG_N2, cfg=McConfig(sample_count=20_000))
        P = CONFIG_N2
        assert rep.verdict == HOLDS
        assert rep.expected_slope == pytest.approx(-(P.a + P.s * P.p))
        assert rep.companion.expected_slope == pytest.approx(-(P.a + P.sigma * P.p))
        assert rep.dynamic_ratio >= 10

    def test_poincare_needs_wide_orbit(self):
        with pytest.raises(ValueError):
            poincare_failure_probe(catalog("bump", 2), CONFIG_N2, lambdas=(1, 2, 4))


def newtonian_potential(h, rho):
    """Shell theorem in N = 3 for d = 1 and radial h."""
    g = h.profile
    inner = integrate.quad(lambda r: g(np.array([r]))[0] * r * r, 0, rho)[0] / rho
    outer = integrate.quad(lambda r: g(np.array([r]))[0] * r, rho, np.inf)[0]
    return 4 * math.pi * (inner + outer)


class TestWeakYoung:
    def test_young_exponent(self):
        assert young_exponent(3.0, 1.2) == pytest.approx(6.0)
        with pytest.raises(ExponentMismatch):
            young_exponent(3.0, 1.5)

    def test_riesz_potential_matches_shell_theorem(self):
        h = catalog("gaussian", 3)
        rho = np.array([0.3, 1.0, 2.5])
        mean, se = riesz_potential(1.0, h, rho, McConfig(sample_count=200_000))
        truth = np.array([newtonian_potential(h, r) for r in rho])
        assert np.all(np.abs(mean - truth) <= 4 * se)

    def test_holds_for_gaussian(self):
        rep = weak_young_check(1.0, catalog("gaussian", 3), 3.0, 1.2,
                               McConfig(sample_count=100_000))
        assert rep.verdict == HOLDS
        assert rep.metadata["r"] == pytest.approx(6.0)
        assert rep.metadata["weak_norm_numeric"] == pytest.approx(
            rep.metadata["weak_norm_closed_form"], rel=1e-6)
        assert rep.metadata["tail_fraction"] < 0.05

    def test_exponent_consistency_enforced(self):
        with pytest.raises(ExponentMismatch):
            weak_young_check(1.0, catalog("gaussian", 3), 2.0, 1.2)
