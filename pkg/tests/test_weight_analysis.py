# SPDX-License-Identifier: Apache-2.0
# Copyright (C) nexB Inc. and others
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
# See https://github.com/aboutcode-org/pyrkha for support or download.
# See https://aboutcode.org for more information about nexB OSS projects.

import math
import unittest

import numpy as np

from pyrkha import ResourceCapExceeded
from pyrkha import Settings
from pyrkha import UnsupportedOperation
from pyrkha.torus import lattice_box
from pyrkha.weight_analysis import CERTIFIED
from pyrkha.weight_analysis import INCONCLUSIVE
from pyrkha.weight_analysis import convolve_at
from pyrkha.weight_analysis import square_preserves_subconvolutivity
from pyrkha.weight_analysis import subadditivity_report
from pyrkha.weight_analysis import subconvolutivity_report
from pyrkha.weight_analysis import submultiplicativity_report
from pyrkha.weight_analysis import window_bounds
from pyrkha.weights import Custom
from pyrkha.weights import PolynomialDecay
from pyrkha.weights import Subexponential


def factorial_weight(box=10, tail=1e-20):
    table = {(g,): 1 / math.factorial(2 * abs(g) + 2) for g in range(-box, box + 1)}
    return Custom(table, tail=tail)


def delta_weight(epsilon=1e-9, box=3):
    table = {(g,): 1.0 if g == 0 else epsilon for g in range(-box, box + 1)}
    return Custom(table, tail=1e-15)


class TestConvolveAt(unittest.TestCase):
    def test_partial_sum_at_zero(self):
        weight = Subexponential(tau=1, p=0.5)
        radius = 100
        expected = 1 + 2 * math.fsum(math.exp(-2 * math.sqrt(b)) for b in range(1, radius + 1))
        bounds = convolve_at(weight, [0], radius)
        assert math.isclose(bounds.lo, expected, rel_tol=1e-13)

    def test_brackets_a_million_term_sum(self):
        weight = Subexponential(tau=1, p=0.5)
        k = np.arange(1, 500001, dtype=float)
        direct = 1 + 2 * math.fsum(np.exp(-2 * np.sqrt(k)).tolist())
        bounds = convolve_at(weight, [0], 60)
        assert bounds.lo <= direct <= bounds.hi
        assert direct in bounds
        assert 2 * bounds.hi not in bounds

    def test_brackets_a_larger_radius_sum(self):
        for weight in (
            Subexponential(tau=1, p=0.5),
            PolynomialDecay(s=2),
            Subexponential(tau=1, p=0.5, d=2),
        ):
            for gamma in ([0], [3], [-7]):
                gamma = gamma * weight.d
                small = convolve_at(weight, gamma, 20)
                large = convolve_at(weight, gamma, 200)
                assert small.lo <= large.lo <= small.hi
                assert large.lo <= large.hi <= small.hi

    def test_width_vanishes_with_the_radius(self):
        weight = Subexponential(tau=1, p=0.5)
        widths = [convolve_at(weight, [2], r).width for r in (10, 40, 160, 640)]
        assert all(a > b for a, b in zip(widths, widths[1:]))
        assert widths[-1] < 1e-8

    def test_convolution_is_symmetric(self):
        weight = Subexponential(tau=0.7, p=0.5, d=2)
        for gamma in ([1, 2], [0, 5], [-3, 4]):
            plus = convolve_at(weight, gamma, 40).lo
            minus = convolve_at(weight, [-g for g in gamma], 40).lo
            assert math.isclose(plus, minus, rel_tol=1e-12)

    def test_delta_like_weight(self):
        bounds = convolve_at(delta_weight(), [0], 3)
        assert abs(bounds.lo - 1) < 1e-6
        assert abs(bounds.hi - 1) < 1e-6

    def test_window_bounds_match_convolve_at(self):
        weight = PolynomialDecay(s=2.5)
        lo, hi = window_bounds(weight, 4, 50)
        for index, gamma in enumerate(range(-4, 5)):
            bounds = convolve_at(weight, [gamma], 50)
            assert math.isclose(lo[index], bounds.lo, rel_tol=1e-12)
            assert math.isclose(hi[index], bounds.hi, rel_tol=1e-12)

    def test_fft_and_direct_window_bounds_agree(self):
        weight = Subexponential(tau=1, p=0.5, d=2)
        lo, hi = window_bounds(weight, 3, 30)
        fft_settings = Settings(direct_convolution_limit=1)
        fft_lo, fft_hi = window_bounds(weight, 3, 30, fft_settings)
        np.testing.assert_allclose(fft_lo, lo, rtol=1e-8)
        # the rounding allowance widens the bracket on both sides
        assert np.all(fft_lo <= lo)
        assert np.all(fft_hi >= hi)


class TestSubconvolutivityReport(unittest.TestCase):
    def test_subexponential_is_certified(self):
        weight = Subexponential(tau=1, p=0.5)
        report = subconvolutivity_report(weight, 32)
        assert report.verdict == CERTIFIED
        assert report.is_certified
        assert math.isfinite(report.constant)
        zero = convolve_at(weight, [0], report.radius)
        assert report.constant >= zero.lo * (1 - 1e-12)
        assert zero.lo >= weight.evaluate([0])
        assert report.lower_constant <= report.constant
        assert len(report.worst) == 5
        ratios = [r for _, r in report.worst]
        assert ratios == sorted(ratios, reverse=True)
        assert ratios[0] == report.constant

    def test_constant_bounds_direct_sums(self):
        weight = Subexponential(tau=1, p=0.5)
        report = subconvolutivity_report(weight, 16)
        for gamma in range(-16, 17):
            direct = convolve_at(weight, [gamma], 4000).lo
            assert direct / weight.evaluate([gamma]) <= report.constant * (1 + 1e-12)

    def test_history_stabilizes(self):
        report = subconvolutivity_report(Subexponential(tau=1, p=0.5), 8)
        constants = [c for _, c in report.history]
        last, previous = constants[-1], constants[-2]
        assert abs(last - previous) / previous < 1e-6
        radii = [r for r, _ in report.history]
        assert all(b == 2 * a for a, b in zip(radii, radii[1:]))

    def test_polynomial_is_certified(self):
        report = subconvolutivity_report(PolynomialDecay(s=2), 8)
        assert report.verdict == CERTIFIED

    def test_factorial_custom_weight_is_certified_on_its_box(self):
        report = subconvolutivity_report(factorial_weight(), 4)
        assert report.verdict == CERTIFIED
        assert math.isfinite(report.constant)

    def test_constant_is_nondecreasing_in_the_window(self):
        weight = Subexponential(tau=1, p=0.5)
        small = subconvolutivity_report(weight, 4).constant
        large = subconvolutivity_report(weight, 8).constant
        assert small <= large * (1 + 1e-6)

    def test_radius_cap_makes_the_report_inconclusive(self):
        settings = Settings(max_convolution_radius=16)
        report = subconvolutivity_report(PolynomialDecay(s=1.5), 4, settings=settings)
        assert report.verdict == INCONCLUSIVE
        assert not report.is_certified

    def test_first_radius_over_the_cap_fails(self):
        settings = Settings(max_lattice_points=16)
        with self.assertRaises(ResourceCapExceeded):
            subconvolutivity_report(PolynomialDecay(s=2), 4, settings=settings)

    def test_window_beyond_a_custom_table_fails(self):
        with self.assertRaises(UnsupportedOperation):
            subconvolutivity_report(delta_weight(box=3), 4)

    def test_report_serializes(self):
        data = subconvolutivity_report(Subexponential(tau=1, p=1), 4).to_dict()
        assert data["verdict"] == CERTIFIED
        assert data["weight"]["family"] == "subexponential"
        assert len(data["worst"]) == 5


class TestSubadditivity(unittest.TestCase):
    def test_zero_branch_ratio_is_below_one(self):
        weight = Subexponential(tau=1, p=0.5)
        for g in range(-8, 9):
            w = 1 / weight.evaluate([g])
            assert w / (w + 1 / weight.evaluate([0])) < 1

    def test_constant_matches_a_brute_force_max(self):
        weight = PolynomialDecay(s=2)
        report = subadditivity_report(weight, 6)
        inverse = {k: 1 / weight.evaluate([k]) for k in range(-12, 13)}
        best = 0.0
        for g in range(-6, 7):
            for h in range(-6, 7):
                best = max(best, inverse[g + h] / (inverse[g] + inverse[h]))
        assert math.isclose(report.constant, best, rel_tol=1e-12)
        g, h = report.argmax
        assert math.isclose(
            1 / weight.evaluate(g + h),
            best * (1 / weight.evaluate(g) + 1 / weight.evaluate(h)),
            rel_tol=1e-12,
        )

    def test_window_max_is_nondecreasing(self):
        weight = Subexponential(tau=1, p=0.5)
        constants = [subadditivity_report(weight, rho).constant for rho in (4, 8, 16, 32, 64)]
        assert all(math.isfinite(c) for c in constants)
        assert all(a <= b for a, b in zip(constants, constants[1:]))

    def test_two_dimensional_window(self):
        report = subadditivity_report(PolynomialDecay(s=3, d=2), 3, exponent=0.5)
        assert report.constant >= 0.5
        assert report.condition == "subadditivity"

    def test_custom_weight_needs_twice_the_window(self):
        with self.assertRaises(UnsupportedOperation):
            subadditivity_report(factorial_weight(box=10), 6)
        subadditivity_report(factorial_weight(box=10), 5)

    def test_submultiplicativity_of_subexponential_weight(self):
        # exp(|g + h|^p) <= exp(|g|^p) exp(|h|^p) for p <= 1
        report = submultiplicativity_report(Subexponential(tau=1, p=0.5), 16, exponent=1.0)
        assert report.constant <= 1 + 1e-12
        assert report.condition == "submultiplicativity"

    def test_subadditive_inverse_root_implies_certified_subconvolutivity(self):
        weight = PolynomialDecay(s=4)
        additive = subadditivity_report(weight, 16, exponent=0.5)
        assert additive.constant <= 2
        assert subconvolutivity_report(weight, 16).verdict == CERTIFIED


class TestSquareReport(unittest.TestCase):
    def test_subexponential_square(self):
        xi = Subexponential(tau=1, p=0.5)
        report = square_preserves_subconvolutivity(xi, 16)
        assert report.verdict == CERTIFIED
        assert report.holds
        assert report.square_report.weight == Subexponential(tau=2, p=0.5)
        assert report.square_report.constant <= report.xi_report.constant**2 * (1 + 1e-6)

    def test_delta_like_square(self):
        xi = delta_weight(epsilon=1e-6)
        report = square_preserves_subconvolutivity(xi, 2)
        assert report.holds
        # the ratio is 1 at 0 and close to 2 off 0 where two terms dominate
        assert abs(report.xi_report.constant - 2) < 1e-4
        assert abs(report.square_report.constant - 2) < 1e-4

    def test_polynomial_square(self):
        report = square_preserves_subconvolutivity(PolynomialDecay(s=2), 4)
        assert report.holds

    def test_inconclusive_square(self):
        settings = Settings(max_convolution_radius=16)
        report = square_preserves_subconvolutivity(PolynomialDecay(s=1.5), 4, settings=settings)
        assert report.verdict == INCONCLUSIVE
        assert report.holds is None
