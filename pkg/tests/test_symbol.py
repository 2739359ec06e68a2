"""The symbol Phi, the semigroup, phi-functions and the multiplier-lemma certificates."""

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_real_field, real_fields
from kslab.data import DataCatalogEntry, make_data
from kslab.spectral import Grid, SpectralField, sample, sobolev_norm
from kslab.symbol import (SERIES_RADIUS, SymbolParams, calculus_bound_check, find_M,
                          gaussian_moment, gaussian_moment_check, gaussian_moment_quadrature,
                          lemma21_sup_check, lemma_m1_holds, linear_xnorm_measure, phi,
                          phi_functions, semigroup_apply)

mus = st.floats(min_value=0.0, max_value=20.0)


def mp_phi_functions(z):
    """40-digit reference values of phi_1 and phi_2."""
    # expm1(z) - z cancels ~2 log10(1/|z|) digits, so the working precision grows with it
    extra = 0 if z == 0 else max(0, int(-2 * math.log10(abs(z))))
    with mp.workdps(40 + extra):
        z = mp.mpf(z)
        if z == 0:
            return mp.mpf(1), mp.mpf(1) / 2
        return +(mp.expm1(z) / z), +((mp.expm1(z) - z) / z**2)


class TestPhi:
    @pytest.mark.parametrize("xi, mu, expected", [(0.0, 1.0, 1.0), (2.0, 0.0, -4.0)])
    def test_values(self, xi, mu, expected):
        assert phi(xi, SymbolParams(mu)) == expected

    def test_high_precision_value(self):
        with mp.workdps(30):
            ref = -1 + 1 / mp.sqrt(2)
        assert phi(1.0, SymbolParams(1.0)) == pytest.approx(float(ref), rel=1e-15)
        assert phi(1.0, SymbolParams(1.0)) == pytest.approx(-0.2928932, abs=1e-7)

    def test_rejects_negative_mu(self):
        with pytest.raises(ValueError):
            SymbolParams(-0.1)

    def test_array_input(self):
        out = phi(np.array([0.0, 1.0]), SymbolParams(0.0))
        np.testing.assert_array_equal(out, [0.0, -1.0])

    @settings(max_examples=200)
    @given(st.floats(-1e3, 1e3), mus)
    def test_bounded_by_mu_and_even(self, xi, mu):
        p = SymbolParams(mu)
        assert phi(xi, p) <= mu
        assert phi(xi, p) == phi(-xi, p)

    @settings(max_examples=200)
    @given(st.floats(0, 1e3), st.floats(1e-6, 10), mus)
    def test_strictly_decreasing_in_abs_xi(self, a, gap, mu):
        p = SymbolParams(mu)
        assert phi(a + gap, p) < phi(a, p)


class TestSemigroup:
    def test_identity_at_zero(self):
        f = random_real_field(Grid(3.0, 64), 0)
        np.testing.assert_array_equal(semigroup_apply(0.0, f, SymbolParams(2.0)).coeffs, f.coeffs)

    def test_single_mode_heat(self):
        g = Grid(math.pi, 16)
        c = np.zeros(16, dtype=complex)
        c[1] = c[-1] = 0.5
        f = SpectralField(g, c, hermitian=True)
        out = semigroup_apply(1.0, f, SymbolParams(0.0))
        np.testing.assert_allclose(out.coeffs, math.exp(-1) * f.coeffs, rtol=1e-15)
        assert out.hermitian

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            semigroup_apply(-1e-3, random_real_field(Grid(1.0, 8), 0), SymbolParams())

    @settings(max_examples=50, deadline=None)
    @given(real_fields(), st.floats(0, 2), st.floats(0, 2), mus)
    def test_semigroup_property(self, f, t, s, mu):
        p = SymbolParams(mu)
        a = semigroup_apply(t, semigroup_apply(s, f, p), p).coeffs
        b = semigroup_apply(t + s, f, p).coeffs
        assert np.max(np.abs(a - b)) <= 1e-12 * max(np.max(np.abs(b)), 1e-300)

    @settings(max_examples=50, deadline=None)
    @given(real_fields(), st.floats(0, 3), mus, st.floats(-1, 2))
    def test_amplification_at_most_exp_mu_t(self, f, t, mu, s):
        p = SymbolParams(mu)
        out = semigroup_apply(t, f, p)
        growth = math.exp(mu * t)
        assert np.all(np.abs(out.coeffs) <= growth * np.abs(f.coeffs) * (1 + 1e-14))
        assert sobolev_norm(out, s) <= growth * sobolev_norm(f, s) * (1 + 1e-13)

    @settings(max_examples=50)
    @given(st.floats(0, 3), mus)
    def test_multiplier_monotone_in_abs_k(self, t, mu):
        g = Grid(5.0, 128)
        mult = np.exp(t * phi(g.k, SymbolParams(mu)))
        order = np.argsort(np.abs(g.k), kind="stable")
        assert np.all(np.diff(mult[order]) <= 1e-15)


class TestPhiFunctions:
    def test_zero(self):
        assert phi_functions(0.0) == (1.0, 0.5)

    def test_one(self):
        p1, p2 = phi_functions(1.0)
        assert p1 == pytest.approx(math.e - 1, rel=1e-15)
        assert p2 == pytest.approx(math.e - 2, rel=1e-15)
        assert p1 == pytest.approx(1.7182818, abs=1e-7)
        assert p2 == pytest.approx(0.7182818, abs=1e-7)

    @pytest.mark.parametrize("z", [-1e-6, 1e-6, -3e-5, 9.9e-5, -1e-12])
    def test_series_branch_against_mpmath(self, z):
        r1, r2 = mp_phi_functions(z)
        p1, p2 = phi_functions(z)
        assert abs(p1 - float(r1)) <= 1e-14 * abs(float(r1))
        assert abs(p2 - float(r2)) <= 1e-14 * abs(float(r2))

    @settings(max_examples=300)
    @given(st.floats(-700, 700))
    def test_all_branches_against_mpmath(self, z):
        r1, r2 = (float(v) for v in mp_phi_functions(z))
        p1, p2 = phi_functions(z)
        assert p1 == pytest.approx(r1, rel=1e-13)
        assert p2 == pytest.approx(r2, rel=1e-13)

    @pytest.mark.parametrize("sign", [1.0, -1.0])
    def test_continuous_at_switchover(self, sign):
        inside = sign * np.nextafter(SERIES_RADIUS, 0.0)
        outside = sign * SERIES_RADIUS
        a1, a2 = phi_functions(inside)
        b1, b2 = phi_functions(outside)
        assert abs(a1 - b1) <= 1e-12 * abs(b1)
        assert abs(a2 - b2) <= 1e-12 * abs(b2)

    def test_array_matches_scalar(self):
        z = np.array([-50.0, -1.0, -1e-5, 0.0, 1e-7, 0.5, 3.0])
        p1, p2 = phi_functions(z)
        for i, zi in enumerate(z):
            assert (p1[i], p2[i]) == phi_functions(float(zi))

    def test_stiff_limit(self):
        # z -> -inf: phi1 ~ -1/z, phi2 ~ 1/z^2 - 1/z... both positive and finite
        p1, p2 = phi_functions(-1e8)
        assert p1 == pytest.approx(1e-8, rel=1e-6)
        assert p2 == pytest.approx(1e-8, rel=1e-6)


class TestMultiplierSup:
    @pytest.mark.parametrize("mu", [0.0, 0.5, 1.0, 4.0])
    @pytest.mark.parametrize("t", [0.01, 0.1, 0.5, 1.0])
    @pytest.mark.parametrize("lam", [0.0, 0.25, 0.5, 1.0, 2.0])
    def test_grid(self, lam, t, mu):
        chk = lemma21_sup_check(lam, t, 1.0, SymbolParams(mu))
        assert chk.passed, (chk.measured, chk.bound)

    @pytest.mark.parametrize("t, mu", [(0.3, 0.0), (0.5, 2.0)])
    def test_lambda_zero_gives_exp_t_mu(self, t, mu):
        chk = lemma21_sup_check(0.0, t, 1.0, SymbolParams(mu))
        assert chk.measured == pytest.approx(math.exp(t * mu), rel=1e-12)
        assert chk.bound == pytest.approx(math.exp(mu), rel=1e-15)

    def test_equality_case(self):
        chk = lemma21_sup_check(1.0, 1.0, 1.0, SymbolParams(0.0))
        assert chk.measured == pytest.approx(math.exp(-1), rel=1e-9)
        assert chk.bound == pytest.approx(math.exp(-1), rel=1e-15)
        assert abs(chk.ratio - 1) <= 1e-9
        assert abs(chk.argmax) == pytest.approx(1.0, abs=1e-6)

    def test_strict_case_against_grid_oracle(self):
        chk = lemma21_sup_check(0.5, 0.5, 1.0, SymbolParams(1.0))
        xi = np.linspace(0, 30, 3_000_001)
        oracle = np.max(xi * np.exp(0.5 * (-(xi**2) + 1 / np.sqrt(1 + xi**2))))
        assert chk.measured == pytest.approx(oracle, rel=1e-9)
        assert chk.passed and chk.ratio < 1

    @pytest.mark.parametrize("lam, t, T", [(-0.1, 0.5, 1.0), (1.0, 0.0, 1.0), (1.0, 2.0, 1.0)])
    def test_rejects_bad_inputs(self, lam, t, T):
        with pytest.raises(ValueError):
            lemma21_sup_check(lam, t, T, SymbolParams())


class TestGaussianMoment:
    def test_nu_zero(self):
        assert gaussian_moment(0.0) == pytest.approx((math.pi / 2) ** 0.25, rel=1e-15)

    def test_nu_one(self):
        assert gaussian_moment(1.0) == pytest.approx((math.sqrt(math.pi / 2) / 4) ** 0.5, rel=1e-15)

    @pytest.mark.parametrize("nu", [0.0, 0.3, 1.0, 2.0, -0.25])
    def test_scaling_identity(self, nu):
        for t, ratio in gaussian_moment_check(nu, (0.1, 1.0, 10.0)):
            assert abs(ratio - 1) <= 1e-8, (t, ratio)

    def test_quadrature_against_mpmath(self):
        with mp.workdps(30):
            ref = mp.sqrt(2 * mp.quad(lambda x: x**2.6 * mp.exp(-2 * 0.7 * x * x), [0, 1, mp.inf]))
        assert gaussian_moment_quadrature(1.3, 0.7) == pytest.approx(float(ref), rel=1e-12)

    @pytest.mark.parametrize("nu", [-0.5, -1.0])
    def test_rejects_non_integrable(self, nu):
        with pytest.raises(ValueError):
            gaussian_moment(nu)


def mp_root(f, lo, hi):
    with mp.workdps(40):
        return float(mp.findroot(f, (lo, hi), solver="anderson"))


class TestFindM:
    def test_heat_case(self):
        assert find_M(SymbolParams(0.0)) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("mu", [0.25, 1.0, 3.0, 10.0])
    def test_against_root_oracle(self, mu):
        first = mp_root(lambda x: x * x - mu / mp.sqrt(1 + x * x) - 1, 0, 10)
        second = mp_root(lambda x: x * x * mp.sqrt(1 + x * x) - 2 * mu, 0, 10)
        assert find_M(SymbolParams(mu)) == pytest.approx(max(first, second), abs=1e-9)

    def test_mu_one(self):
        M = find_M(SymbolParams(1.0))
        assert 1.25 <= M <= 1.32
        second = mp_root(lambda x: x * x * mp.sqrt(1 + x * x) - 2, 0, 10)
        assert second == pytest.approx(1.14, abs=0.01)
        assert M > second

    @pytest.mark.parametrize("mu", [0.0, 0.5, 1.0, 4.0])
    def test_inequalities_and_minimality(self, mu):
        p = SymbolParams(mu)
        M = find_M(p)
        samples = M * np.geomspace(1.0, 1e3, 200)
        assert np.all(lemma_m1_holds(samples, p))
        assert np.all(lemma_m1_holds(-samples, p))
        assert not lemma_m1_holds(M * (1 - 1e-3), p)


class TestCalculusBound:
    def test_unit_case(self):
        chk = calculus_bound_check(1.0, -1.0)
        assert chk.measured == pytest.approx(math.exp(-1), rel=1e-12)
        assert chk.argmax == pytest.approx(1.0, abs=1e-6)
        assert chk.passed

    def test_alpha2_beta_minus4(self):
        chk = calculus_bound_check(2.0, -4.0)
        assert chk.bound == pytest.approx(0.25 * math.exp(-2), rel=1e-15)
        assert chk.measured == pytest.approx(chk.bound, rel=1e-9)

    def test_small_alpha(self):
        chk = calculus_bound_check(1e-6, -1.0)
        assert chk.bound == pytest.approx(1.0, abs=1e-4)
        assert chk.measured <= 1.0 and chk.passed

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.01, 5), st.floats(-20, -0.01))
    def test_always_passes(self, alpha, beta):
        chk = calculus_bound_check(alpha, beta, n_points=20001)
        assert chk.passed
        assert chk.argmax == pytest.approx(alpha / -beta, rel=1e-4)

    @pytest.mark.parametrize("alpha, beta", [(0.0, -1.0), (-1.0, -1.0), (1.0, 0.0), (1.0, 2.0)])
    def test_rejects(self, alpha, beta):
        with pytest.raises(ValueError):
            calculus_bound_check(alpha, beta)


class TestLinearXNorm:
    def test_constant_mode_heat(self):
        g = Grid(math.pi, 16)
        f = sample(lambda x: 1.0 + 0 * x, g)
        assert linear_xnorm_measure(f, 0.75, 1.0, SymbolParams(0.0)) == pytest.approx(1.0, rel=1e-15)

    def test_homogeneous(self):
        g = Grid(32.0, 512)
        f = make_data(DataCatalogEntry("gaussian", 0.5), g)
        a = linear_xnorm_measure(f, 0.75, 1.0, SymbolParams(1.0))
        b = linear_xnorm_measure(2.0 * f, 0.75, 1.0, SymbolParams(1.0))
        assert a == pytest.approx(b, rel=1e-13)

    def test_rough_data_stable_under_refinement(self):
        # the weighted derivative term peaks near t ~ 1/k_max^2, which the time grid must resolve
        g = Grid(32.0, 512)
        f = make_data(DataCatalogEntry("random_sobolev", 1.0, s=0.75, seed=3), g)
        ratios = [linear_xnorm_measure(f, 0.75, 1.0, SymbolParams(1.0), nt) for nt in (1024, 2048, 4096)]
        assert all(math.isfinite(r) for r in ratios)
        assert (max(ratios) - min(ratios)) / max(ratios) <= 0.02

    def test_rejects_zero_and_bad_ranges(self):
        g = Grid(1.0, 16)
        with pytest.raises(ValueError):
            linear_xnorm_measure(sample(lambda x: 0 * x, g), 0.75, 1.0, SymbolParams())
        f = random_real_field(g, 0)
        with pytest.raises(ValueError):
            linear_xnorm_measure(f, 1.0, 1.0, SymbolParams())
        with pytest.raises(ValueError):
            linear_xnorm_measure(f, 0.75, 1.5, SymbolParams())
