# SPDX-License-Identifier: Apache-2.0
# Copyright (C) nexB Inc. and others
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
# See https://github.com/aboutcode-org/pyrkha for support or download.
# See https://aboutcode.org for more information about nexB OSS projects.
#

"""
The translation invariant reproducing kernel ``k(x, y) = l(x - y)`` of
H_lambda, where the shape function ``l`` is the inverse Fourier transform of
the weight: ``l(x) = sum lambda(g) exp(2 pi i g.x)``.

Kernel values are truncated to the box ``|g|_inf <= R`` and carry the
certified tail of the weight as error bound.

>>> from pyrkha.weights import Subexponential
>>> value = shape_function(Subexponential(tau=1, p=1), [0.5], 16)
>>> import math
>>> abs(value.value - math.tanh(0.5)) <= value.error
True
"""

import math
import os

import attr
import numpy as np

from pyrkha import DEFAULT_SETTINGS
from pyrkha import InvalidWeight
from pyrkha import get_logger_debug
from pyrkha.algebra import FourierPoly
from pyrkha.algebra import hnorm
from pyrkha.algebra import solver_grid_size
from pyrkha.torus import as_point
from pyrkha.torus import characters_matrix
from pyrkha.torus import lattice_box

TRACE = bool(os.environ.get("PYRKHA_TRACE"))

logger_debug = get_logger_debug(__name__)

# allowed imaginary part of a kernel value relative to the truncated l(0)
SYMMETRY_TOLERANCE = 1e-12


@attr.s(frozen=True, slots=True)
class KernelValue:
    """
    A truncated kernel ``value`` and a certified bound of its truncation
    ``error``.
    """

    value = attr.ib()
    error = attr.ib()

    @property
    def lower(self):
        return self.value - self.error

    @property
    def upper(self):
        return self.value + self.error

    def to_dict(self):
        return dict(value=self.value, error=self.error)


def _box_weights(weight, radius, settings):
    gammas = lattice_box(radius, weight.d, settings)
    return gammas, weight.values(gammas)


def shape_function_many(weight, points, radius, settings=DEFAULT_SETTINGS):
    """
    Return a tuple of (values array, error) of the truncated shape function
    ``l`` at each row of the (n, d) ``points`` array.
    """
    gammas, lam = _box_weights(weight, radius, settings)
    values = characters_matrix(gammas, points) @ lam
    scale = max(1.0, float(np.sum(lam)))
    imaginary = float(np.max(np.abs(values.imag), initial=0.0))
    if imaginary > SYMMETRY_TOLERANCE * scale:
        raise InvalidWeight(f"Kernel shape function is not real: imaginary part {imaginary!r}")
    error = weight.tail_mass(radius, settings=settings).bound
    return values.real, error


def shape_function(weight, x, radius, settings=DEFAULT_SETTINGS):
    """
    Return a KernelValue for ``l(x)`` truncated to the box of ``radius``.
    """
    x = as_point(x, weight.d)
    values, error = shape_function_many(weight, [x.coords], radius, settings)
    return KernelValue(value=float(values[0]), error=error)


def kernel_eval(weight, x, y, radius, settings=DEFAULT_SETTINGS):
    """
    Return a KernelValue for ``k(x, y) = l(x - y)``.

    >>> from pyrkha.weights import PolynomialDecay
    >>> w = PolynomialDecay(s=3)
    >>> forward = kernel_eval(w, [0.1], [0.3], 16)
    >>> backward = kernel_eval(w, [0.3], [0.1], 16)
    >>> abs(forward.value - backward.value) < 1e-14
    True
    """
    x = as_point(x, weight.d)
    y = as_point(y, weight.d)
    return shape_function(weight, x - y, radius, settings)


def poisson_shape(tau, x):
    """
    Return the exact shape function ``l(x)`` of ``lambda(g) = exp(-tau |g|)``
    on the circle: a geometric series summed in closed form.

    >>> abs(poisson_shape(1.0, 0.5) - math.tanh(0.5)) < 1e-14
    True
    """
    q = math.exp(-tau)
    return (1 - q * q) / (1 - 2 * q * math.cos(2 * math.pi * x) + q * q)


@attr.s(frozen=True, slots=True)
class KernelSection:
    """
    The kernel section ``k(x, .)`` at ``point`` truncated to the box of
    ``radius``, with the certified ``tail`` of the weight.
    """

    point = attr.ib()
    weight = attr.ib()
    radius = attr.ib()
    tail = attr.ib()

    def as_poly(self, settings=DEFAULT_SETTINGS):
        return section_as_poly(self.weight, self.point, self.radius, settings)

    def diagonal(self, settings=DEFAULT_SETTINGS):
        """
        Return a KernelValue for ``k(x, x)``.
        """
        gammas, lam = _box_weights(self.weight, self.radius, settings)
        return KernelValue(value=math.fsum(lam.tolist()), error=self.tail)


def kernel_section(weight, x, radius, settings=DEFAULT_SETTINGS):
    x = as_point(x, weight.d)
    tail = weight.tail_mass(radius, settings=settings).bound
    return KernelSection(point=x, weight=weight, radius=radius, tail=tail)


def section_as_poly(weight, x, radius, settings=DEFAULT_SETTINGS):
    """
    Return the FourierPoly of the truncated kernel section ``k(x, .)`` with
    coefficients ``lambda(g) exp(-2 pi i g.x)``.
    """
    x = as_point(x, weight.d)
    gammas, lam = _box_weights(weight, radius, settings)
    characters = characters_matrix(gammas, [x.coords])[0]
    return FourierPoly.from_arrays(gammas, lam * np.conj(characters), weight)


def apply_K(weight, f):
    """
    Return ``K f``: the integral operator of the kernel of ``weight`` is
    diagonal on characters and multiplies the coefficient of ``g`` by
    ``lambda(g)``.
    """
    if not len(f):
        return f
    return FourierPoly.from_arrays(f.gammas, f.values * weight.values(f.gammas), f.weight)


def mercer_basis(weight, radius, settings=DEFAULT_SETTINGS):
    """
    Return a list of the orthonormal basis functions ``psi_g`` for
    ``|g|_inf <= radius`` in lexicographic order.
    """
    return [FourierPoly.basis(g, weight) for g in lattice_box(radius, weight.d, settings)]


def mercer_kernel_eval(weight, x, y, radius, settings=DEFAULT_SETTINGS):
    """
    Return the truncated ``k(x, y)`` as the Mercer sum
    ``sum conj(psi_g(x)) psi_g(y)``.
    """
    x = as_point(x, weight.d)
    y = as_point(y, weight.d)
    gammas, lam = _box_weights(weight, radius, settings)
    xi = np.sqrt(lam)
    at_x = xi * characters_matrix(gammas, [x.coords])[0]
    at_y = xi * characters_matrix(gammas, [y.coords])[0]
    value = np.sum(np.conj(at_x) * at_y)
    return KernelValue(value=float(value.real), error=weight.tail_mass(radius, settings).bound)


def gram_matrix(weight, points, radius, settings=DEFAULT_SETTINGS):
    """
    Return the real (n, n) matrix of the truncated ``k(x_i, x_j)`` for the
    (n, d) ``points`` array.
    """
    gammas, lam = _box_weights(weight, radius, settings)
    characters = characters_matrix(gammas, points)
    gram = (characters * lam) @ np.conj(characters).T
    return gram.real


def gram_min_eigenvalue(weight, points, radius, settings=DEFAULT_SETTINGS):
    return float(np.min(np.linalg.eigvalsh(gram_matrix(weight, points, radius, settings))))


def gram_is_psd(weight, points, radius, settings=DEFAULT_SETTINGS):
    """
    Return True if the smallest eigenvalue of the Gram matrix of ``points`` is
    at least ``-settings.psd_tolerance``.
    """
    return gram_min_eigenvalue(weight, points, radius, settings) >= -settings.psd_tolerance


def continuity_modulus(weight, radius, n, settings=DEFAULT_SETTINGS):
    """
    Return the max of ``|l(x + 1/n) - l(x)|`` over the ``n`` grid along every
    axis, for the truncated shape function.
    """
    samples = section_as_poly(weight, [0.0] * weight.d, radius, settings).sample_on_grid(
        n, settings
    )
    samples = samples.real
    return max(
        float(np.max(np.abs(np.roll(samples, -1, axis=axis) - samples)))
        for axis in range(weight.d)
    )


@attr.s(frozen=True, slots=True)
class GelfandReport:
    """
    The largest measured ratio ``sup |f| / ||f||`` over random functions and
    the normalized kernel section, against the bound ``sqrt(l(0))``.
    """

    # ratio of the normalized section at 0
    section_ratio = attr.ib()
    # max ratio among the random functions
    random_ratio = attr.ib()
    # sqrt of the truncated l(0)
    truncated_bound = attr.ib()
    # sqrt(l(0) + tail)
    certified_bound = attr.ib()
    trials = attr.ib()

    @property
    def ratio(self):
        return max(self.section_ratio, self.random_ratio)

    @property
    def holds(self):
        return self.ratio <= self.certified_bound * (1 + 1e-9)

    def to_dict(self):
        return dict(
            ratio=self.ratio,
            section_ratio=self.section_ratio,
            random_ratio=self.random_ratio,
            truncated_bound=self.truncated_bound,
            certified_bound=self.certified_bound,
            trials=self.trials,
            holds=self.holds,
        )


def gelfand_norm_check(weight, radius, trials, rng, settings=DEFAULT_SETTINGS):
    """
    Return a GelfandReport of the ratio of the grid sup norm to the H_lambda
    norm for ``trials`` random functions of the box of ``radius`` drawn from
    the ``rng`` numpy Generator and for the normalized section at 0.
    """
    n = solver_grid_size(radius, radius, settings)
    section = section_as_poly(weight, [0.0] * weight.d, radius, settings)
    section_ratio = section.sup_norm(n, settings) / hnorm(section)
    random_ratio = 0.0
    for _ in range(trials):
        f = FourierPoly.random(weight, radius, rng)
        random_ratio = max(random_ratio, f.sup_norm(n, settings) / hnorm(f))
    l_zero = math.fsum(section.values.real.tolist())
    tail = weight.tail_mass(radius, settings=settings).bound
    if TRACE:
        logger_debug("gelfand_norm_check: section:", section_ratio, "random:", random_ratio)
    return GelfandReport(
        section_ratio=section_ratio,
        random_ratio=random_ratio,
        truncated_bound=math.sqrt(l_zero),
        certified_bound=math.sqrt(l_zero + tail),
        trials=trials,
    )
