# SPDX-License-Identifier: Apache-2.0
# Copyright (C) nexB Inc. and others
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
# See https://github.com/aboutcode-org/pyrkha for support or download.
# See https://aboutcode.org for more information about nexB OSS projects.
#

"""
Points, frequencies and grids of the d-torus T^d = (R/Z)^d.

The torus has period 1 and its characters are ``x -> exp(2 pi i gamma.x)``
for integer frequency vectors ``gamma``. Haar measure is the normalized
Lebesgue measure and a ``n``-per-dimension grid gives each point the weight
``1/n^d``.

>>> from pyrkha.torus import FreqVector, TorusPoint, character_eval
>>> character_eval(FreqVector([0]), TorusPoint([0.3]))
(1+0j)
>>> TorusPoint([1.25, -0.25]).coords
(0.25, 0.75)
>>> -FreqVector([1, -2])
FreqVector((-1, 2))
"""

import cmath
import itertools
import math

import numpy as np

from pyrkha import DEFAULT_SETTINGS
from pyrkha import DimensionMismatch
from pyrkha import ResourceCapExceeded


def reduce_mod1(value):
    """
    Return ``value`` reduced to [0, 1).

    >>> reduce_mod1(-0.25)
    0.75
    >>> reduce_mod1(3.0)
    0.0
    """
    reduced = float(value) % 1.0
    # a tiny negative value reduces to 1.0 in floating point
    if reduced >= 1.0:
        reduced = 0.0
    return reduced


class TorusPoint:
    """
    A point of the d-torus with coordinates kept in [0, 1).

    Equality is tolerance based on the circular distance of each coordinate
    since the torus is continuous. Points are immutable and not hashable.
    """

    __slots__ = ("coords",)

    def __init__(self, coords):
        coords = tuple(reduce_mod1(c) for c in coords)
        if not coords:
            raise DimensionMismatch("A TorusPoint needs at least one coordinate")
        object.__setattr__(self, "coords", coords)

    def __setattr__(self, name, value):
        raise AttributeError("TorusPoint is immutable")

    @classmethod
    def zero(cls, d):
        return cls([0.0] * d)

    @property
    def d(self):
        return len(self.coords)

    def _check_dim(self, other):
        if other.d != self.d:
            raise DimensionMismatch(f"Dimension mismatch: {self.d} != {other.d}")

    def __add__(self, other):
        self._check_dim(other)
        return TorusPoint(a + b for a, b in zip(self.coords, other.coords))

    def __neg__(self):
        return TorusPoint(-c for c in self.coords)

    def __sub__(self, other):
        self._check_dim(other)
        return TorusPoint(a - b for a, b in zip(self.coords, other.coords))

    def distance(self, other):
        """
        Return the largest circular distance between the coordinates of this
        point and ``other``.
        """
        self._check_dim(other)
        return max(min(abs(a - b), 1.0 - abs(a - b)) for a, b in zip(self.coords, other.coords))

    def is_close(self, other, tolerance=DEFAULT_SETTINGS.point_tolerance):
        return self.distance(other) <= tolerance

    def __eq__(self, other):
        if not isinstance(other, TorusPoint) or other.d != self.d:
            return False
        return self.is_close(other)

    __hash__ = None

    def as_array(self):
        return np.array(self.coords, dtype=float)

    def to_list(self):
        return list(self.coords)

    def __repr__(self):
        return f"TorusPoint({self.coords!r})"


class FreqVector(tuple):
    """
    A frequency ``gamma`` of the dual lattice Z^d, i.e. a character of T^d.

    This is a tuple of ints with vector addition, subtraction and negation so
    that it can be used directly as a dictionary key for Fourier coefficients.

    >>> FreqVector([1, 2]) + FreqVector([3, -2])
    FreqVector((4, 0))
    >>> FreqVector([1, 2]) == (1, 2)
    True
    """

    def __new__(cls, components):
        components = tuple(int(c) for c in components)
        if not components:
            raise DimensionMismatch("A FreqVector needs at least one component")
        return tuple.__new__(cls, components)

    @classmethod
    def zero(cls, d):
        return cls([0] * d)

    @property
    def d(self):
        return len(self)

    def _check_dim(self, other):
        if len(other) != len(self):
            raise DimensionMismatch(f"Dimension mismatch: {len(self)} != {len(other)}")

    def __add__(self, other):
        self._check_dim(other)
        return FreqVector(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        self._check_dim(other)
        return FreqVector(a - b for a, b in zip(self, other))

    def __neg__(self):
        return FreqVector(-a for a in self)

    def is_zero(self):
        return not any(self)

    def norm(self, kind="euclidean"):
        """
        Return the ``kind`` lattice norm of this frequency, one of "euclidean",
        "l1" or "linf".

        >>> FreqVector([3, -4]).norm(), FreqVector([3, -4]).norm("l1")
        (5.0, 7.0)
        """
        return float(lattice_norms(np.array([self]), kind)[0])

    def __repr__(self):
        return f"FreqVector({tuple(self)!r})"


def as_freq(gamma, d=None):
    """
    Return a FreqVector from a ``gamma`` sequence of ints, checking that it has
    ``d`` components if ``d`` is provided.
    """
    if not isinstance(gamma, FreqVector):
        gamma = FreqVector(gamma)
    if d is not None and gamma.d != d:
        raise DimensionMismatch(f"Expected a frequency of dimension {d}: {gamma!r}")
    return gamma


def as_point(x, d=None):
    """
    Return a TorusPoint from ``x``, a TorusPoint or a sequence of floats,
    checking that it has ``d`` coordinates if ``d`` is provided.
    """
    if not isinstance(x, TorusPoint):
        x = TorusPoint(x)
    if d is not None and x.d != d:
        raise DimensionMismatch(f"Expected a point of dimension {d}: {x!r}")
    return x


NORMS = ("euclidean", "l1", "linf")


def lattice_norms(gammas, kind="euclidean"):
    """
    Return an array of the ``kind`` norms of the rows of the ``gammas`` integer
    array of shape (m, d).
    """
    gammas = np.asarray(gammas, dtype=float)
    if kind == "euclidean":
        return np.sqrt(np.sum(gammas * gammas, axis=-1))
    if kind == "l1":
        return np.sum(np.abs(gammas), axis=-1)
    if kind == "linf":
        return np.max(np.abs(gammas), axis=-1)
    raise ValueError(f"Unknown lattice norm: {kind!r}")


def character_eval(gamma, x):
    """
    Return the value ``exp(2 pi i gamma.x)`` of the ``gamma`` character at the
    ``x`` point.

    >>> character_eval(FreqVector([1]), TorusPoint([0.5])).real
    -1.0
    """
    gamma = as_freq(gamma)
    x = as_point(x, gamma.d)
    phase = math.fsum(g * c for g, c in zip(gamma, x.coords))
    return cmath.exp(2j * math.pi * phase)


def characters_matrix(gammas, points):
    """
    Return the (n, m) complex matrix of characters ``exp(2 pi i gamma_k.x_j)``
    for the ``points`` array of shape (n, d) and ``gammas`` array of shape
    (m, d).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    gammas = np.atleast_2d(np.asarray(gammas, dtype=float))
    phases = points @ gammas.T
    # reduce the phase first: exp of a large argument loses precision
    phases = phases - np.floor(phases)
    return np.exp(2j * np.pi * phases)


def check_grid_size(n, d, settings=DEFAULT_SETTINGS):
    if n < 1 or d < 1:
        raise ValueError(f"Grid resolution and dimension must be positive: n={n}, d={d}")
    if n**d > settings.max_grid_points:
        raise ResourceCapExceeded(
            f"Grid of {n}^{d} points exceeds the cap of {settings.max_grid_points} points"
        )


def grid_points(n, d, settings=DEFAULT_SETTINGS):
    """
    Return a list of the ``n**d`` TorusPoint of the ``n``-per-dimension grid in
    lexicographic order. Each point carries the Haar quadrature weight 1/n^d.

    >>> grid_points(2, 1)
    [TorusPoint((0.0,)), TorusPoint((0.5,))]
    >>> len(grid_points(2, 2)), grid_points(2, 2)[0]
    (4, TorusPoint((0.0, 0.0)))
    """
    check_grid_size(n, d, settings)
    return [TorusPoint([j / n for j in idx]) for idx in itertools.product(range(n), repeat=d)]


def grid_array(n, d, settings=DEFAULT_SETTINGS):
    """
    Return the ``n``-per-dimension grid as a float array of shape (n^d, d) in
    the same lexicographic order as ``grid_points``.
    """
    check_grid_size(n, d, settings)
    axes = np.meshgrid(*([np.arange(n) / n] * d), indexing="ij")
    return np.stack([a.ravel() for a in axes], axis=-1)


def grid_mean(gamma, n):
    """
    Return the Haar quadrature mean of the ``gamma`` character over the ``n``
    grid. This is exactly 1 if gamma is 0 modulo n in every coordinate and 0
    otherwise, up to rounding.

    >>> grid_mean(FreqVector([4]), 4)
    1.0
    >>> abs(grid_mean(FreqVector([1, 0]), 4)) < 1e-12
    True
    """
    gamma = as_freq(gamma)
    values = characters_matrix([gamma], grid_array(n, gamma.d))
    mean = complex(np.mean(values))
    if abs(mean.imag) < 1e-15:
        return mean.real
    return mean


def check_box_size(radius, d, settings=DEFAULT_SETTINGS):
    if radius < 0:
        raise ValueError(f"Box radius must be nonnegative: {radius}")
    if (2 * radius + 1) ** d > settings.max_lattice_points:
        raise ResourceCapExceeded(
            f"Lattice box of radius {radius} in dimension {d} exceeds the cap of "
            f"{settings.max_lattice_points} points"
        )


def lattice_box(radius, d, settings=DEFAULT_SETTINGS):
    """
    Return an int array of shape ((2R+1)^d, d) of all the frequencies ``gamma``
    with ``|gamma|_inf <= radius`` in lexicographic order.

    >>> lattice_box(1, 1).ravel().tolist()
    [-1, 0, 1]
    >>> lattice_box(1, 2).shape
    (9, 2)
    """
    check_box_size(radius, d, settings)
    axis = np.arange(-radius, radius + 1, dtype=np.int64)
    axes = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([a.ravel() for a in axes], axis=-1)
