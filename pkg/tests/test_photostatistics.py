"""Detection-statistics kernel: frozen values, brute-force oracles, invariants."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpskrx.photostatistics import (
    BranchMeans,
    DetectorModel,
    branch_means,
    hl_difference_pmf,
    pnr_pmf,
    q_off,
    q_on,
    q_thresh,
    skellam_pmf,
)

IDEAL2 = DetectorModel(2)

# 40-digit references for e^-1 and the PNR(2) tail at mu = 1
EXP_M1 = 0.3678794411714423216
TAIL_1_2 = 0.26424111765711535681


class TestPnrPmf:
    def test_vacuum(self):
        assert pnr_pmf(0.0, 2).tolist() == [1.0, 0.0, 0.0]

    def test_unit_rate_frozen(self):
        probs = pnr_pmf(1.0, 2)
        assert probs[0] == pytest.approx(EXP_M1, abs=1e-15)
        assert probs[1] == pytest.approx(EXP_M1, abs=1e-15)
        assert probs[2] == pytest.approx(TAIL_1_2, abs=1e-15)

    def test_saturation(self):
        probs = pnr_pmf(1e6, 2)
        assert abs(probs[2] - 1.0) <= 1e-12

    @pytest.mark.parametrize("mu,m", [(0.3, 1), (2.5, 4), (7.0, 9)])
    def test_against_direct_formula(self, mu, m):
        probs = pnr_pmf(mu, m)
        for n in range(m):
            direct = math.exp(-mu) * mu**n / math.factorial(n)
            assert probs[n] == pytest.approx(direct, rel=1e-14)
        tail = 1.0 - sum(math.exp(-mu) * mu**j / math.factorial(j) for j in range(m))
        assert probs[m] == pytest.approx(tail, abs=1e-14)

    @pytest.mark.parametrize("bad", [-0.5, math.inf, math.nan])
    def test_domain_errors(self, bad):
        with pytest.raises(ValueError):
            pnr_pmf(bad, 2)

    def test_bad_resolution(self):
        with pytest.raises(ValueError):
            pnr_pmf(1.0, 0)

    @settings(max_examples=80, deadline=None, derandomize=True)
    @given(mu=st.floats(0.0, 100.0), m=st.integers(1, 16))
    def test_normalization(self, mu, m):
        probs = pnr_pmf(mu, m)
        assert abs(probs.sum() - 1.0) <= 1e-12
        assert np.all(probs >= 0.0) and np.all(probs <= 1.0)

    @settings(max_examples=50, deadline=None, derandomize=True)
    @given(
        mu=st.floats(0.0, 20.0),
        nus=st.tuples(st.floats(0.0, 5.0), st.floats(0.0, 5.0)),
        m=st.integers(1, 8),
    )
    def test_saturated_outcome_monotone_in_dark_rate(self, mu, nus, m):
        lo, hi = sorted(nus)
        assert pnr_pmf(mu + hi, m)[m] >= pnr_pmf(mu + lo, m)[m] - 1e-15


class TestBranchMeans:
    def test_no_signal_balanced(self):
        assert branch_means(0.0, 2.0) == BranchMeans(2.0, 2.0)

    def test_unit_case(self):
        mu = branch_means(1.0, 1.0)
        assert mu.mu_plus == pytest.approx(2.0, abs=1e-15)
        assert mu.mu_minus == pytest.approx(0.0, abs=1e-15)

    def test_visibility_case(self):
        mu = branch_means(1.0, 1.0, xi=0.998)
        assert mu.mu_plus == pytest.approx(1.998, abs=1e-12)
        assert mu.mu_minus == pytest.approx(0.002, abs=1e-12)

    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(zeta=st.floats(-5.0, 5.0), z=st.floats(0.0, 5.0))
    def test_ideal_reduces_to_squared_amplitudes(self, zeta, z):
        mu = branch_means(zeta, z, xi=1.0)
        assert mu.mu_plus == pytest.approx(abs(zeta + z) ** 2 / 2, rel=1e-12, abs=1e-14)
        assert mu.mu_minus == pytest.approx(abs(zeta - z) ** 2 / 2, rel=1e-12, abs=1e-14)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            branch_means(1.0, -0.1)
        with pytest.raises(ValueError):
            branch_means(1.0, 1.0, xi=0.0)


class TestHlDifferencePmf:
    def test_vacuum(self):
        pmf = hl_difference_pmf(0.0, 0.0, IDEAL2)
        assert pmf.prob(0) == 1.0
        assert pmf.probs.sum() == pytest.approx(1.0, abs=1e-15)

    def test_brute_force_double_sum(self):
        # Independent nested-loop oracle over all (n, m) pairs.
        pmf = hl_difference_pmf(0.5, 1.0, IDEAL2)
        mu_p = abs(0.5 + 1.0) ** 2 / 2
        mu_m = abs(0.5 - 1.0) ** 2 / 2

        def poisson2(mu, n):
            if n < 2:
                return math.exp(-mu) * mu**n / math.factorial(n)
            return 1.0 - math.exp(-mu) * (1.0 + mu)

        for delta in range(-2, 3):
            expected = sum(
                poisson2(mu_p, n) * poisson2(mu_m, m)
                for n in range(3)
                for m in range(3)
                if n - m == delta
            )
            assert pmf.prob(delta) == pytest.approx(expected, abs=1e-12)

    def test_brute_force_with_imperfections(self):
        model = DetectorModel(2, eta=0.7, nu=1e-3, xi=0.998)
        pmf = hl_difference_pmf(-0.8, 1.3, model)
        base = 0.8 * 0.8 + 1.3 * 1.3
        cross = 2 * 0.998 * 1.3 * (-0.8)
        rate_p = 0.7 * (base + cross) / 2 + 1e-3
        rate_m = 0.7 * (base - cross) / 2 + 1e-3

        def poisson2(mu, n):
            if n < 2:
                return math.exp(-mu) * mu**n / math.factorial(n)
            return 1.0 - math.exp(-mu) * (1.0 + mu)

        for delta in range(-2, 3):
            expected = sum(
                poisson2(rate_p, n) * poisson2(rate_m, m)
                for n in range(3)
                for m in range(3)
                if n - m == delta
            )
            assert pmf.prob(delta) == pytest.approx(expected, abs=1e-12)

    @settings(max_examples=40, deadline=None, derandomize=True)
    @given(zeta=st.floats(-4.0, 4.0), z=st.floats(0.0, 6.0), m=st.integers(1, 8))
    def test_mirror_symmetry(self, zeta, z, m):
        model = DetectorModel(m)
        left = hl_difference_pmf(-zeta, z, model).probs
        right = hl_difference_pmf(zeta, z, model).probs[::-1]
        assert np.max(np.abs(left - right)) <= 1e-15

    @settings(max_examples=40, deadline=None, derandomize=True)
    @given(zeta=st.floats(-4.0, 4.0), z=st.floats(0.0, 10.0), m=st.integers(1, 16))
    def test_normalization(self, zeta, z, m):
        pmf = hl_difference_pmf(zeta, z, DetectorModel(m))
        assert abs(pmf.probs.sum() - 1.0) <= 1e-12

    def test_mass_helpers(self):
        pmf = hl_difference_pmf(0.4, 0.9, IDEAL2)
        assert pmf.mass_negative() == pytest.approx(float(pmf.probs[:2].sum()), abs=1e-15)
        assert pmf.mass_negative() + pmf.mass_nonnegative() == pytest.approx(1.0, abs=1e-12)

    def test_prob_range_error(self):
        with pytest.raises(ValueError):
            hl_difference_pmf(0.0, 0.0, IDEAL2).prob(3)


class TestSkellam:
    def test_degenerate(self):
        assert skellam_pmf(0, 0.0, 0.0) == 1.0
        assert skellam_pmf(1, 0.0, 0.0) == 0.0

    def test_symmetry_equal_rates(self):
        for delta in range(0, 5):
            assert skellam_pmf(delta, 1.7, 1.7) == pytest.approx(
                skellam_pmf(-delta, 1.7, 1.7), rel=1e-13
            )

    def test_series_oracle(self):
        # sum_m Poisson(m+1; 2) Poisson(m; 0.5), summed to m = 200, with an
        # independent Poisson PMF implementation
        from scipy.stats import poisson

        expected = sum(
            float(poisson.pmf(m + 1, 2.0) * poisson.pmf(m, 0.5)) for m in range(0, 201)
        )
        assert skellam_pmf(1, 2.0, 0.5) == pytest.approx(expected, rel=1e-12)
        assert skellam_pmf(1, 2.0, 0.5) == pytest.approx(0.26113484804805572811, rel=1e-13)

    def test_negative_rates_rejected(self):
        with pytest.raises(ValueError):
            skellam_pmf(0, -1.0, 1.0)

    def test_total_mass(self):
        total = sum(skellam_pmf(d, 2.0, 1.3) for d in range(-40, 41))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_hl_convergence_at_high_resolution(self):
        model = DetectorModel(64)
        for zeta, z in [(0.5, 1.5), (1.0, 1.2)]:
            pmf = hl_difference_pmf(zeta, z, model)
            mu = branch_means(zeta, z)
            sup = max(
                abs(pmf.prob(d) - skellam_pmf(d, mu.mu_plus, mu.mu_minus))
                for d in range(-10, 11)
            )
            assert sup <= 1e-8


class TestClickProbabilities:
    def test_trivial_values(self):
        assert q_off(0.0) == 1.0
        assert q_on(0.0) == 0.0
        assert q_off(4.0) == pytest.approx(0.018315638888734180294, abs=1e-15)

    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(x=st.floats(0.0, 50.0))
    def test_complementarity_exact(self, x):
        assert q_off(x) + q_on(x) == 1.0

    def test_threshold_trivials(self):
        for n_th in (1, 2, 3):
            assert q_thresh(0.0, n_th) == (1.0, 0.0)
        assert q_thresh(1.0, 2)[0] == pytest.approx(0.73575888234288464319, abs=1e-15)

    def test_threshold_one_reduces_to_on_off(self):
        for x in (0.0, 1e-9, 0.4, 3.0, 25.0):
            assert q_thresh(x, 1) == (q_off(x), q_on(x))

    @settings(max_examples=50, deadline=None, derandomize=True)
    @given(xs=st.tuples(st.floats(0.0, 30.0), st.floats(0.0, 30.0)), n_th=st.integers(1, 8))
    def test_q0_non_increasing_in_rate(self, xs, n_th):
        lo, hi = sorted(xs)
        assert q_thresh(hi, n_th)[0] <= q_thresh(lo, n_th)[0] + 1e-14

    @settings(max_examples=50, deadline=None, derandomize=True)
    @given(x=st.floats(0.0, 30.0), ns=st.tuples(st.integers(1, 8), st.integers(1, 8)))
    def test_q0_non_decreasing_in_threshold(self, x, ns):
        lo, hi = sorted(ns)
        assert q_thresh(x, hi)[0] >= q_thresh(x, lo)[0] - 1e-14

    def test_threshold_domain_errors(self):
        with pytest.raises(ValueError):
            q_thresh(1.0, 0)
        with pytest.raises(ValueError):
            q_thresh(1.0, 3, resolution=2)
        with pytest.raises(ValueError):
            q_off(-0.1)


class TestDetectorModel:
    def test_ideal_flag(self):
        assert IDEAL2.is_ideal
        assert not DetectorModel(2, eta=0.9).is_ideal

    def test_detection_rate_combination(self):
        model = DetectorModel(2, eta=0.7, nu=1e-3)
        assert model.detection_rate(2.0) == pytest.approx(0.7 * 2.0 + 1e-3, rel=1e-15)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"resolution": 0},
            {"resolution": 2, "eta": 0.0},
            {"resolution": 2, "eta": 1.2},
            {"resolution": 2, "nu": -1e-3},
            {"resolution": 2, "xi": 0.0},
            {"resolution": 2, "xi": 1.1},
        ],
    )
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(ValueError):
            DetectorModel(**kwargs)
