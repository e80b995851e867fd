import math
import os
import time
import unittest
from unittest import mock

import numpy as np
from numpy.polynomial import hermite_e
from scipy import integrate, special

from commwatch import settings, theory
from commwatch.exceptions import NoRootException, QuadratureException
from commwatch.models import TheoryParams
from commwatch.statistics import LlrParams, soft_threshold_h
from commwatch.theory import TauProfile, TiltedMoments

SLOW = os.environ.get('COMMWATCH_SLOW')

ALPHA = 0.2


def h_dot(g, scale, alpha):
    return scale * special.expit(g + math.log(alpha / (1 - alpha)))


class TestTauProfile(unittest.TestCase):

    def test_single_step(self):
        llr = LlrParams(0.3, 0.8)
        profile = TauProfile.from_params(0.3, 0.8, 1)
        self.assertAlmostEqual(profile.drift, 0.3 * llr.c0 + 0.7 * llr.c1)
        self.assertAlmostEqual(profile.scale, llr.slope * math.sqrt(0.21))
        self.assertLess(profile.drift, 0)

    def test_scales_with_tau(self):
        one = TauProfile.from_params(0.3, 0.8, 1)
        many = TauProfile.from_params(0.3, 0.8, 16)
        self.assertAlmostEqual(many.drift, 16 * one.drift)
        self.assertAlmostEqual(many.scale, 4 * one.scale)

    def test_h_tau_prime_is_derivative(self):
        profile = TauProfile.from_params(0.3, 0.8, 5)
        for x in (-3.0, -0.5, 0.0, 1.2, 4.0):
            eps = 1e-5
            expected = (theory.h_tau(x + eps, profile, ALPHA) - theory.h_tau(x - eps, profile, ALPHA)) / (2 * eps)
            self.assertAlmostEqual(theory.h_tau_prime(x, profile, ALPHA), expected, places=6)


class TestTiltedMoments(unittest.TestCase):

    def setUp(self):
        self.profile = TauProfile.from_params(0.3, 0.8, 5)

    def test_linear_h_closed_form(self):
        profile = TauProfile.from_params(0.3, 0.8, 10)
        for theta in (0.0, 0.2, 0.5):
            moments = theory.tilted_moments(theta, profile, 1.0, quad_tol=1e-10)
            self.assertAlmostEqual(moments.psi, theta * profile.drift + 0.5 * theta ** 2 * profile.scale ** 2, places=7)
            self.assertAlmostEqual(moments.psi_dot, profile.drift + theta * profile.scale ** 2, places=7)
            self.assertAlmostEqual(moments.psi_ddot, profile.scale ** 2, places=6)
            self.assertAlmostEqual(moments.hdot_sq, profile.scale ** 2, places=7)
        gamma = theory.gamma_fn(0.5, profile, 1.0, quad_tol=1e-10)
        self.assertAlmostEqual(gamma, 0.125 * profile.scale ** 2, places=7)

    def test_untilted_moments(self):
        z, w = hermite_e.hermegauss(120)
        w = w / math.sqrt(2 * math.pi)
        g = self.profile.drift + self.profile.scale * z
        h = soft_threshold_h(g, ALPHA)
        mean = np.sum(w * h)

        moments = theory.tilted_moments(0.0, self.profile, ALPHA, quad_tol=1e-12)
        self.assertEqual(moments.psi, 0.0)
        self.assertAlmostEqual(moments.psi_dot, mean, places=8)
        self.assertAlmostEqual(moments.psi_ddot, np.sum(w * (h - mean) ** 2), places=8)
        self.assertAlmostEqual(moments.hdot_sq, np.sum(w * h_dot(g, self.profile.scale, ALPHA) ** 2), places=8)

    def test_dense_grid(self):
        theta = 1.0
        z = np.linspace(-12, 14, 260001)
        g = self.profile.drift + self.profile.scale * z
        weights = np.exp(theta * soft_threshold_h(g, ALPHA) - 0.5 * z * z)
        mass = integrate.trapezoid(weights, z)
        expected_psi = math.log(mass / math.sqrt(2 * math.pi))
        expected_gamma = 0.5 * theta ** 2 * integrate.trapezoid(weights * h_dot(g, self.profile.scale, ALPHA) ** 2, z) / mass

        moments = theory.tilted_moments(theta, self.profile, ALPHA, quad_tol=1e-12)
        self.assertAlmostEqual(moments.psi, expected_psi, places=7)
        self.assertAlmostEqual(theory.gamma_fn(theta, self.profile, ALPHA, moments=moments) / expected_gamma, 1, places=6)

    def test_derivatives_match_finite_differences(self):
        eps = 1e-4
        for theta in (0.3, 1.0, 2.5):
            moments = theory.tilted_moments(theta, self.profile, ALPHA, quad_tol=1e-12)
            up = theory.tilted_moments(theta + eps, self.profile, ALPHA, quad_tol=1e-12)
            down = theory.tilted_moments(theta - eps, self.profile, ALPHA, quad_tol=1e-12)
            self.assertAlmostEqual(moments.psi_dot, (up.psi - down.psi) / (2 * eps), places=5)
            self.assertAlmostEqual(moments.psi_ddot / ((up.psi_dot - down.psi_dot) / (2 * eps)), 1, places=4)

    def test_tilted_mean_matches_quadrature(self):
        for tau, thetas in ((1, (0.0, 1.0, 3.0)), (5, (0.0, 0.5, 2.0)), (200, (0.0, 0.05, 0.2))):
            profile = TauProfile.from_params(0.3, 0.8, tau)
            for theta in thetas:
                expected = theory.tilted_moments(theta, profile, ALPHA, quad_tol=1e-11).psi_dot
                actual = theory.tilted_mean(theta, profile, ALPHA)
                self.assertAlmostEqual(actual, expected, delta=1e-8 * max(1.0, abs(expected)))

    def test_psi_dot_increasing(self):
        values = [theory.psi(theta, self.profile, ALPHA)[1] for theta in (0.0, 0.5, 1.0, 2.0, 4.0)]
        self.assertEqual(values, sorted(values))
        self.assertLess(values[0], 0)

    def test_negative_theta(self):
        with self.assertRaises(ValueError):
            theory.tilted_moments(-0.1, self.profile, ALPHA)
        with self.assertRaises(ValueError):
            theory.gamma_fn(0.0, self.profile, ALPHA)

    def test_unreachable_tolerance(self):
        with self.assertRaises(QuadratureException):
            theory.tilted_moments(1.0, self.profile, ALPHA, quad_tol=1e-300)


class TestSolveTheta(unittest.TestCase):

    def setUp(self):
        self.profile = TauProfile.from_params(0.3, 0.8, 10)

    def test_root(self):
        for b in (4.0, 7.3734):
            theta = theory.solve_theta(self.profile, ALPHA, b, 6, quad_tol=1e-12)
            psi_dot = theory.psi(theta, self.profile, ALPHA, quad_tol=1e-12)[1]
            self.assertGreater(theta, 0)
            self.assertLessEqual(abs(psi_dot - b / 6), 1e-8 * b / 6)

    def test_increasing_in_b(self):
        thetas = [theory.solve_theta(self.profile, ALPHA, b, 6) for b in (4.0, 6.0, 8.0, 10.0)]
        self.assertEqual(thetas, sorted(thetas))

    def test_target_below_untilted_mean(self):
        with self.assertRaises(NoRootException):
            theory.solve_theta(self.profile, ALPHA, -100.0, 6)

    def test_root_beyond_search_range(self):
        with mock.patch.object(settings, 'THETA_MAX', 1e-5):
            with self.assertRaises(NoRootException):
                theory.solve_theta(self.profile, ALPHA, 7.3734, 6)


class TestBigH(unittest.TestCase):

    def test_direct_formula(self):
        moments = TiltedMoments(psi=0.1, psi_dot=0.5, psi_ddot=2.0, hdot_sq=1.0)
        theta, gamma, n = 0.7, 0.3, 6
        expected = (theta * math.sqrt(2 * math.pi * 2.0) / (gamma ** 2 * math.sqrt(n))
                    * math.exp(n * (theta * 0.5 - 0.1)))
        actual = theory.big_h(n, theta, moments, gamma)
        self.assertAlmostEqual(actual.value / expected, 1, places=12)
        self.assertAlmostEqual(actual.log_value, math.log(expected), places=12)

    def test_overflow_kept_in_log(self):
        moments = TiltedMoments(psi=0.1, psi_dot=0.5, psi_ddot=2.0, hdot_sq=1.0)
        actual = theory.big_h(1e4, 0.7, moments, 0.3)
        self.assertEqual(actual.value, math.inf)
        self.assertTrue(math.isfinite(actual.log_value))


class TestNu(unittest.TestCase):

    def test_values(self):
        self.assertEqual(theory.nu_approx(0.0), 1.0)
        self.assertAlmostEqual(theory.nu_approx(1e-8), 1.0, places=6)
        self.assertAlmostEqual(theory.nu_approx(2.0), 0.31509, places=5)

    def test_decreasing(self):
        values = [theory.nu_approx(x) for x in np.linspace(0, 20, 201)]
        self.assertTrue(all(a > b for a, b in zip(values, values[1:])))
        self.assertGreater(values[-1], 0)

    def test_negative_argument(self):
        with self.assertRaises(ValueError):
            theory.nu_approx(-1.0)


class TestArlBounds(unittest.TestCase):

    def params(self, b, **kwargs):
        values = dict(alpha=ALPHA, n_effective=6, m0=1, m1=5)
        values.update(kwargs)
        return TheoryParams(0.3, 0.8, 6, b=b, **values)

    def test_lower_bound_terms(self):
        terms = theory.lower_bound_terms(self.params(7.3734))
        self.assertEqual([term.tau for term in terms], [1, 2, 3, 4, 5])
        for term in terms:
            self.assertGreater(term.theta, 0)
            self.assertGreater(term.gamma, 0)
            self.assertTrue(math.isfinite(term.log_term))
        expected = 1 / sum(term.term for term in terms)
        self.assertAlmostEqual(theory.arl_lower_bound(self.params(7.3734)) / expected, 1, places=9)

    def test_bounds_increase_with_threshold(self):
        low, high = self.params(5.0), self.params(7.0)
        self.assertLess(theory.arl_lower_bound(low), theory.arl_lower_bound(high))
        self.assertLess(theory.arl_upper_bound(low, scan_points=9), theory.arl_upper_bound(high, scan_points=9))

    def test_upper_bound_limits(self):
        lo, hi = theory.upper_bound_limits(self.params(7.0))
        self.assertAlmostEqual(lo, math.sqrt(12 / 5))
        self.assertAlmostEqual(hi, math.sqrt(12))

    def test_upper_bound_profile(self):
        samples = theory.upper_bound_profile(self.params(7.0), n_points=9)
        self.assertEqual(len(samples), 9)
        self.assertAlmostEqual(samples[0].tau, 5)
        self.assertAlmostEqual(samples[-1].tau, 1)
        self.assertTrue(all(sample.integrand > 0 for sample in samples))

    def test_every_term_without_root(self):
        with mock.patch.object(settings, 'THETA_MAX', 1e-5):
            with self.assertRaises(NoRootException):
                theory.arl_lower_bound(self.params(7.0))
            with self.assertRaises(NoRootException):
                theory.arl_upper_bound(self.params(7.0))

    def test_roots_are_reused(self):
        params = self.params(7.3734)
        theory.arl_lower_bound(params)
        before = theory._cached_theta_terms.cache_info().hits
        theory.arl_lower_bound(params)
        self.assertEqual(theory._cached_theta_terms.cache_info().hits - before, 5)

    def test_target_must_exceed_one(self):
        with self.assertRaises(ValueError):
            theory.threshold_for_arl(self.params(None), 1.0)


@unittest.skipUnless(SLOW, 'set COMMWATCH_SLOW to run')
class TestArlBoundsFullWindow(unittest.TestCase):

    def params(self, b=None):
        return TheoryParams(0.3, 0.8, 6, b=b, alpha=ALPHA, n_effective=6, m0=1, m1=200)

    def test_bounds_at_reference_threshold(self):
        params = self.params(7.3734)
        for value in (theory.arl_lower_bound(params, processes=2), theory.arl_upper_bound(params)):
            self.assertTrue(math.isfinite(value))
            self.assertGreater(value, 1)

    def test_parallel_terms(self):
        params = self.params(7.3734)
        serial = [term.log_term for term in theory.lower_bound_terms(params)]
        parallel = [term.log_term for term in theory.lower_bound_terms(params, processes=2)]
        self.assertEqual(serial, parallel)

    def test_threshold_round_trip(self):
        params = self.params()
        for which, bound in (('LB', theory.arl_lower_bound), ('UB', theory.arl_upper_bound)):
            b = theory.threshold_for_arl(params, 5000, which=which, tol=0.005, processes=2)
            self.assertAlmostEqual(bound(params.with_threshold(b)) / 5000, 1, delta=0.005)

    def test_profile_vanishes_towards_long_windows(self):
        samples = theory.upper_bound_profile(self.params(7.3734), n_points=50)
        peak = max(sample.log_integrand for sample in samples)
        self.assertGreater(peak - samples[0].log_integrand, math.log(1e3))

    def test_lower_bound_terms_vanish_towards_long_windows(self):
        terms = theory.lower_bound_terms(self.params(7.3734), processes=2)
        self.assertEqual(terms[-1].tau, 200)
        peak = max(term.log_term for term in terms)
        self.assertGreater(peak - terms[-1].log_term, math.log(1e3))

    def test_upper_bound_exceeds_lower_bound(self):
        params = self.params(7.3734)
        self.assertGreater(theory.arl_upper_bound(params), theory.arl_lower_bound(params, processes=2))

    def test_single_core_runtime(self):
        params = self.params(7.3734)
        for bound in (theory.arl_lower_bound, theory.arl_upper_bound):
            theory._cached_theta_terms.cache_clear()
            start = time.perf_counter()
            bound(params)
            self.assertLess(time.perf_counter() - start, 60)
