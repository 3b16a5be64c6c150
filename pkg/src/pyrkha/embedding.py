# SPDX-License-Identifier: Apache-2.0
# Copyright (C) nexB Inc. and others
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
# See https://github.com/aboutcode-org/pyrkha for support or download.
# See https://aboutcode.org for more information about nexB OSS projects.
#

"""
Kernel mean embeddings of atomic probability measures on the torus, the
maximum mean discrepancy metric and the states they induce on H_lambda and on
its operators.

The embedding of a measure ``nu`` is ``R(nu) = integral of k(x, .) dnu(x)``
and ``E_nu f = <R(nu), f>`` for every ``f`` of H_lambda.

>>> from pyrkha.weights import Subexponential
>>> w = Subexponential(tau=1, p=0.5)
>>> nu = AtomicMeasure.dirac([0.25])
>>> mmd(nu, nu, w, 8)
0.0
"""

import math

import attr
import numpy as np

from pyrkha import DEFAULT_SETTINGS
from pyrkha import RkhaError
from pyrkha import SupportTooLarge
from pyrkha import WeightMismatch
from pyrkha.algebra import FourierPoly
from pyrkha.algebra import evaluate
from pyrkha.algebra import evaluate_many
from pyrkha.algebra import hnorm
from pyrkha.algebra import inner
from pyrkha.algebra import multiply
from pyrkha.kernel import mercer_basis
from pyrkha.kernel import section_as_poly
from pyrkha.kernel import shape_function
from pyrkha.torus import TorusPoint
from pyrkha.torus import as_point
from pyrkha.torus import characters_matrix
from pyrkha.torus import grid_points
from pyrkha.torus import lattice_box

# tolerance on the total mass of a probability measure
MASS_TOLERANCE = 1e-12


class InvalidMeasure(RkhaError, ValueError):
    """
    Raised for atoms with nonpositive masses or a total mass other than 1.
    """


def _atoms_converter(atoms):
    return tuple((as_point(x), float(m)) for x, m in atoms)


@attr.s(frozen=True)
class AtomicMeasure:
    """
    A probability measure with finitely many ``atoms``, a tuple of
    (TorusPoint, mass) pairs.

    >>> left, right = AtomicMeasure.dirac([0.0]), AtomicMeasure.dirac([0.5])
    >>> nu = AtomicMeasure.mixture([(0.5, left), (0.5, right)])
    >>> nu.masses.tolist()
    [0.5, 0.5]
    """

    atoms = attr.ib(converter=_atoms_converter)

    def __attrs_post_init__(self):
        if not self.atoms:
            raise InvalidMeasure("A measure needs at least one atom")
        dims = set(x.d for x, _ in self.atoms)
        if len(dims) != 1:
            raise InvalidMeasure(f"Atoms have mixed dimensions: {sorted(dims)}")
        if not all(m > 0 for _, m in self.atoms):
            raise InvalidMeasure("Atom masses must be positive")
        total = math.fsum(m for _, m in self.atoms)
        if abs(total - 1) > MASS_TOLERANCE:
            raise InvalidMeasure(f"Atom masses must sum to 1: {total!r}")

    @classmethod
    def dirac(cls, x):
        return cls([(as_point(x), 1.0)])

    @classmethod
    def uniform_grid(cls, n, d, settings=DEFAULT_SETTINGS):
        """
        Return the uniform measure on the ``n``-per-dimension grid, which
        integrates every character of frequencies not all multiples of ``n``
        to zero.
        """
        points = grid_points(n, d, settings)
        return cls([(x, 1.0 / len(points)) for x in points])

    @classmethod
    def mixture(cls, components):
        """
        Return the convex combination of the (coefficient, AtomicMeasure)
        ``components``.
        """
        atoms = []
        for coefficient, measure in components:
            atoms.extend((x, coefficient * m) for x, m in measure.atoms)
        return cls(atoms)

    @property
    def d(self):
        return self.atoms[0][0].d

    @property
    def points(self):
        return np.array([x.coords for x, _ in self.atoms])

    @property
    def masses(self):
        return np.array([m for _, m in self.atoms])

    def to_dict(self):
        return dict(atoms=[dict(x=x.to_list(), mass=m) for x, m in self.atoms])

    @classmethod
    def from_dict(cls, mapping):
        try:
            return cls([(TorusPoint(a["x"]), a["mass"]) for a in mapping["atoms"]])
        except (KeyError, TypeError) as e:
            raise InvalidMeasure(f"Invalid measure: {mapping!r}") from e


def mean_embed(measure, weight, radius, settings=DEFAULT_SETTINGS):
    """
    Return the FourierPoly of the kernel mean embedding of ``measure``
    truncated to the box of ``radius``, with coefficients
    ``lambda(g) sum_j m_j exp(-2 pi i g.x_j)``.
    """
    gammas = lattice_box(radius, weight.d, settings)
    characters = characters_matrix(gammas, measure.points)
    transform = np.conj(characters).T @ measure.masses
    return FourierPoly.from_arrays(gammas, weight.values(gammas) * transform, weight)


def _check_support(f, radius):
    if f.bandwidth > radius:
        raise SupportTooLarge(
            f"Function of bandwidth {f.bandwidth} exceeds the embedding box of radius {radius}"
        )


@attr.s(frozen=True, slots=True)
class Expectation:
    """
    ``E_nu f`` computed by summing over the atoms (``direct``) and as an inner
    product with the mean embedding (``embedded``).
    """

    direct = attr.ib()
    embedded = attr.ib()

    @property
    def discrepancy(self):
        return abs(self.direct - self.embedded)


def expect(measure, f, radius=None, settings=DEFAULT_SETTINGS):
    """
    Return an Expectation of ``f`` under ``measure``, embedded in the box of
    ``radius``, by default the bandwidth of ``f``.
    """
    if radius is None:
        radius = f.bandwidth
    _check_support(f, radius)
    direct = complex(evaluate_many(f, measure.points) @ measure.masses)
    embedded = inner(mean_embed(measure, f.weight, radius, settings), f)
    return Expectation(direct=direct, embedded=embedded)


def mmd(first, second, weight, radius, settings=DEFAULT_SETTINGS):
    """
    Return the maximum mean discrepancy of two measures: the H_lambda norm of
    the difference of their truncated mean embeddings.
    """
    difference = mean_embed(first, weight, radius, settings) - mean_embed(
        second, weight, radius, settings
    )
    return hnorm(difference)


def dirac_mmd_closed_form(x, y, weight, radius, settings=DEFAULT_SETTINGS):
    """
    Return ``mmd(delta_x, delta_y)`` from the kernel: the square root of
    ``2 (l(0) - l(x - y))`` for the truncated shape function ``l``.
    """
    x = as_point(x, weight.d)
    y = as_point(y, weight.d)
    at_zero = shape_function(weight, TorusPoint.zero(weight.d), radius, settings).value
    at_offset = shape_function(weight, x - y, radius, settings).value
    return math.sqrt(max(2 * (at_zero - at_offset), 0.0))


@attr.s(frozen=True, slots=True)
class StateValue:
    """
    A state on ``f`` computed exactly from the reproducing identity and as a
    truncated operator trace, with a bound of their difference.
    """

    exact = attr.ib()
    trace = attr.ib()
    bound = attr.ib()

    @property
    def discrepancy(self):
        return abs(self.exact - self.trace)

    def to_dict(self):
        return dict(
            exact=dict(re=self.exact.real, im=self.exact.imag),
            trace=dict(re=self.trace.real, im=self.trace.imag),
            bound=self.bound,
        )


def state_rho(x, f, weight, radius, settings=DEFAULT_SETTINGS):
    """
    Return a StateValue for the vector state ``rho_x`` applied to the
    multiplication operator of ``f``.

    The trace path sums ``<psi_g, P_x(f psi_g)>`` over the Mercer basis of the
    box, where ``P_x`` projects on the normalized truncated kernel section at
    ``x``. Frequencies ``g`` near the box boundary lose the part of ``f psi_g``
    outside of the box: the difference is bounded by the l1 norm of the
    coefficients of ``f`` times the tail beyond ``radius - bandwidth(f)``,
    over ``l(0)``.
    """
    if f.weight != weight:
        raise WeightMismatch(f"Function weight {f.weight!r} is not {weight!r}")
    _check_support(f, radius)
    x = as_point(x, weight.d)
    exact = evaluate(f, x)

    section = section_as_poly(weight, x, radius, settings)
    diagonal = hnorm(section) ** 2
    total = 0j
    for psi in mercer_basis(weight, radius, settings):
        product = multiply(f, psi, settings)
        total += inner(section, product) * inner(psi, section)
    trace = total / diagonal

    inner_radius = max(radius - f.bandwidth, 0)
    l1_norm = math.fsum(np.abs(f.values).tolist())
    boundary_mass = weight.tail_mass(inner_radius, settings=settings).bound
    bound = l1_norm * boundary_mass / diagonal
    return StateValue(exact=exact, trace=trace, bound=bound)


def state_p(measure, f, radius=None, settings=DEFAULT_SETTINGS):
    """
    Return the state ``P(nu) f = <R(nu), f>`` from the mean embedding.
    """
    return expect(measure, f, radius, settings).embedded


def state_q(measure, f, radius, settings=DEFAULT_SETTINGS):
    """
    Return a StateValue for ``Q(nu)`` applied to the multiplication operator
    of ``f``: the average of the vector states of the atoms.
    """
    exact = 0j
    trace = 0j
    bound = 0.0
    for x, mass in measure.atoms:
        value = state_rho(x, f, f.weight, radius, settings)
        exact += mass * value.exact
        trace += mass * value.trace
        bound += mass * value.bound
    return StateValue(exact=exact, trace=trace, bound=bound)
