# SPDX-License-Identifier: Apache-2.0
# Copyright (C) nexB Inc. and others
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
# See https://github.com/aboutcode-org/pyrkha for support or download.
# See https://aboutcode.org for more information about nexB OSS projects.

import json
import math
import unittest

import numpy as np

from pyrkha import DimensionMismatch
from pyrkha import InvalidWeight
from pyrkha import ResourceCapExceeded
from pyrkha import Settings
from pyrkha import UnsupportedOperation
from pyrkha.torus import lattice_box
from pyrkha.weights import Custom
from pyrkha.weights import PolynomialDecay
from pyrkha.weights import Subexponential
from pyrkha.weights import tail_mass
from pyrkha.weights import total_mass
from pyrkha.weights import truncation_radius
from pyrkha.weights import weight_eval
from pyrkha.weights import weight_from_dict
from pyrkha.weights import xi_eval


def brute_force_tail(weight, radius, outer):
    """
    Return the sum of ``weight`` over radius < |g|_inf <= outer.
    """
    gammas = lattice_box(outer, weight.d)
    outside = np.max(np.abs(gammas), axis=-1) > radius
    return math.fsum(weight.values(gammas[outside]).tolist())


def small_custom(tail=1e-6):
    table = {(0,): 1.0, (1,): 0.1, (-1,): 0.1, (2,): 0.01, (-2,): 0.01}
    return Custom(table, tail=tail)


class TestCatalogWeights(unittest.TestCase):
    def test_weights_are_normalized_at_zero(self):
        for weight in (
            Subexponential(tau=1, p=0.5),
            Subexponential(tau=3, p=1, d=2, norm="l1"),
            PolynomialDecay(s=2),
            PolynomialDecay(s=3, d=2, norm="linf"),
        ):
            assert weight_eval(weight, [0] * weight.d) == 1.0

    def test_subexponential_values(self):
        weight = Subexponential(tau=1, p=0.5, d=2)
        assert math.isclose(weight_eval(weight, [3, 4]), math.exp(-math.sqrt(5)))
        assert math.isclose(xi_eval(weight, [3, 4]), math.exp(-math.sqrt(5) / 2))

    def test_xi_squared_is_the_weight(self):
        for weight in (
            Subexponential(tau=1, p=0.5, d=2),
            Subexponential(tau=2, p=1, norm="l1"),
            PolynomialDecay(s=3, d=2, norm="linf"),
            small_custom(),
        ):
            for gamma in lattice_box(2, weight.d).tolist():
                expected = weight_eval(weight, gamma)
                assert math.isclose(xi_eval(weight, gamma) ** 2, expected, rel_tol=1e-14)

    def test_norms_change_the_weight(self):
        euclidean = Subexponential(tau=1, p=1, d=2)
        l1 = Subexponential(tau=1, p=1, d=2, norm="l1")
        linf = Subexponential(tau=1, p=1, d=2, norm="linf")
        assert math.isclose(euclidean.evaluate([3, 4]), math.exp(-5))
        assert math.isclose(l1.evaluate([3, 4]), math.exp(-7))
        assert math.isclose(linf.evaluate([3, 4]), math.exp(-4))

    def test_polynomial_values(self):
        weight = PolynomialDecay(s=2)
        assert weight_eval(weight, [3]) == 0.0625
        assert weight_eval(weight, [-3]) == 0.0625

    def test_weights_are_symmetric(self):
        gammas = lattice_box(5, 2)
        for weight in (Subexponential(tau=1, p=0.3, d=2), PolynomialDecay(s=2.5, d=2)):
            np.testing.assert_array_equal(weight.values(gammas), weight.values(-gammas))

    def test_square_and_sqrt(self):
        xi = Subexponential(tau=1, p=0.5)
        assert xi.square() == Subexponential(tau=2, p=0.5)
        assert xi.square().sqrt() == xi
        poly = PolynomialDecay(s=4)
        assert poly.sqrt() == PolynomialDecay(s=2)
        for g in range(-5, 6):
            assert math.isclose(poly.sqrt().evaluate([g]), math.sqrt(poly.evaluate([g])))

    def test_invalid_parameters(self):
        with self.assertRaises(InvalidWeight):
            Subexponential(tau=0, p=0.5)
        with self.assertRaises(InvalidWeight):
            Subexponential(tau=1, p=1.5)
        with self.assertRaises(InvalidWeight):
            Subexponential(tau=1, p=0)
        with self.assertRaises(InvalidWeight):
            PolynomialDecay(s=1)
        with self.assertRaises(InvalidWeight):
            PolynomialDecay(s=2, d=2)
        with self.assertRaises(InvalidWeight):
            Subexponential(tau=1, p=1, norm="l7")

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatch):
            Subexponential(tau=1, p=1, d=2).evaluate([1])

    def test_json_round_trip(self):
        for weight in (
            Subexponential(tau=0.5, p=0.25, d=3, norm="l1"),
            PolynomialDecay(s=3.5, d=2),
            small_custom(),
        ):
            text = json.dumps(weight.to_dict())
            assert weight_from_dict(json.loads(text)) == weight

    def test_unknown_family_fails(self):
        with self.assertRaises(InvalidWeight):
            weight_from_dict(dict(family="gaussian", sigma=1))
        with self.assertRaises(InvalidWeight):
            weight_from_dict(dict(family="subexponential", tau=1))


class TestTailMass(unittest.TestCase):
    def test_geometric_tail_in_one_dimension(self):
        weight = Subexponential(tau=1, p=1)
        for radius in (0, 1, 5, 20):
            exact = 2 * math.exp(-(radius + 1)) / (1 - math.exp(-1))
            bound = tail_mass(weight, radius).bound
            assert exact <= bound <= exact * (1 + 1e-9)

    def test_tail_bounds_a_brute_force_sum(self):
        for weight in (
            Subexponential(tau=1, p=0.5),
            Subexponential(tau=0.5, p=0.5, d=2),
            PolynomialDecay(s=2),
            PolynomialDecay(s=3, d=2, norm="l1"),
        ):
            for radius in (0, 3, 10):
                partial = brute_force_tail(weight, radius, 200)
                assert partial <= tail_mass(weight, radius).bound

    def test_polynomial_tail_is_close_to_the_truth(self):
        weight = PolynomialDecay(s=2)
        partial = brute_force_tail(weight, 10, 100000)
        bound = tail_mass(weight, 10).bound
        # the sum beyond 10^5 is about 2e-5
        assert partial <= bound <= partial + 3e-5

    def test_tail_is_nonincreasing(self):
        for weight in (Subexponential(tau=1, p=0.5, d=2), PolynomialDecay(s=2.5)):
            bounds = [tail_mass(weight, r).bound for r in range(0, 60, 3)]
            assert all(a >= b for a, b in zip(bounds, bounds[1:]))

    def test_total_mass_bounds_the_box_sum(self):
        weight = Subexponential(tau=1, p=0.5)
        box_sum = math.fsum(weight.values(lattice_box(500, 1)).tolist())
        assert box_sum <= total_mass(weight)

    def test_truncation_radius_is_minimal(self):
        weight = Subexponential(tau=1, p=0.5)
        for epsilon in (1e-3, 1e-8, 1e-12):
            radius = truncation_radius(weight, epsilon)
            assert tail_mass(weight, radius).bound <= epsilon
            assert tail_mass(weight, radius - 1).bound > epsilon

    def test_truncation_radius_cap(self):
        settings = Settings(max_radius=16)
        with self.assertRaises(ResourceCapExceeded):
            truncation_radius(PolynomialDecay(s=1.1), 1e-12, settings)


class TestCustomWeight(unittest.TestCase):
    def test_values_on_the_box(self):
        weight = small_custom()
        assert weight.d == 1
        assert weight.box == 2
        assert weight.evaluate([-1]) == 0.1

    def test_values_outside_the_box_are_unknown(self):
        with self.assertRaises(UnsupportedOperation):
            small_custom().evaluate([3])

    def test_tail_adds_the_table_outside_of_the_radius(self):
        weight = small_custom(tail=1e-6)
        assert math.isclose(weight.tail_mass(2).bound, 1e-6, rel_tol=1e-9)
        assert math.isclose(weight.tail_mass(1).bound, 0.02 + 1e-6, rel_tol=1e-9)
        assert math.isclose(weight.tail_mass(0).bound, 0.22 + 1e-6, rel_tol=1e-9)

    def test_without_tail(self):
        with self.assertRaises(UnsupportedOperation):
            small_custom(tail=None).tail_mass(1)

    def test_envelope(self):
        weight = small_custom(tail=1e-6)
        envelope = weight.envelope(np.array([0, 1, 2, 3]))
        np.testing.assert_array_equal(envelope, [1.0, 0.1, 0.01, 1e-6])

    def test_table_must_cover_the_box(self):
        with self.assertRaises(InvalidWeight):
            Custom({(0,): 1.0, (2,): 0.1, (-2,): 0.1}, tail=0)

    def test_table_must_be_positive_and_symmetric(self):
        with self.assertRaises(InvalidWeight):
            Custom({(0,): 1.0, (1,): 0.0, (-1,): 0.0}, tail=0)
        with self.assertRaises(InvalidWeight):
            Custom({(0,): 1.0, (1,): 0.2, (-1,): 0.1}, tail=0)

    def test_square(self):
        weight = small_custom(tail=1e-3).square()
        assert weight.evaluate([1]) == 0.1 * 0.1
        assert math.isclose(weight.tail, 1e-6)

    def test_two_dimensional_table(self):
        table = {tuple(g): 2.0 ** -abs(g).sum() for g in lattice_box(1, 2)}
        weight = Custom(table, tail=0.5)
        assert weight.d == 2
        assert weight.evaluate([1, -1]) == 0.25
        assert hash(weight) == hash(Custom(table, tail=0.5))

    def test_dense_table(self):
        weight = small_custom()
        dense = weight.dense()
        assert dense.tolist() == [0.01, 0.1, 1.0, 0.1, 0.01]
        dense[2] = 5.0
        assert weight.evaluate([0]) == 1.0
