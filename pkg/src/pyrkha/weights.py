# SPDX-License-Identifier: Apache-2.0
# Copyright (C) nexB Inc. and others
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
# See https://github.com/aboutcode-org/pyrkha for support or download.
# See https://aboutcode.org for more information about nexB OSS projects.
#

"""
Weight functions on the dual lattice Z^d.

A weight ``lambda`` is strictly positive, symmetric (``lambda(g) ==
lambda(-g)``) and summable. It defines the Hilbert space of functions ``f`` on
the torus with ``sum |f_g|^2 / lambda(g) < oo``. The square root ``xi =
lambda^(1/2)`` and the inverse square root ``w = lambda^(-1/2)`` are derived
from it.

The catalog has three families:

- ``Subexponential``: ``lambda(g) = exp(-tau |g|^p)`` with ``tau > 0`` and
  ``0 < p <= 1``, for a selectable lattice norm ``|.|``.
- ``PolynomialDecay``: ``lambda(g) = (1 + |g|)^(-s)`` with ``s > d``.
- ``Custom``: a table on a finite box plus a declared bound on the mass outside
  of the box.

Every weight certifies its truncation error: ``tail_mass(w, R)`` is a rigorous
upper bound of the sum of ``lambda(g)`` over the frequencies outside of the box
``|g|_inf <= R``.

>>> from pyrkha.weights import Subexponential, PolynomialDecay, weight_eval
>>> weight_eval(Subexponential(tau=1, p=0.5), [0])
1.0
>>> weight_eval(PolynomialDecay(s=2), [3])
0.0625
"""

import math

import attr
import numpy as np
from scipy import special

from pyrkha import DEFAULT_SETTINGS
from pyrkha import DimensionMismatch
from pyrkha import InvalidWeight
from pyrkha import ResourceCapExceeded
from pyrkha import UnsupportedOperation
from pyrkha.torus import NORMS
from pyrkha.torus import as_freq
from pyrkha.torus import lattice_box
from pyrkha.torus import lattice_norms

# relative slack added to certified sums to absorb floating point rounding
ROUNDING_SLACK = 1e-12


@attr.s(frozen=True, slots=True)
class TailBound:
    """
    A certified upper ``bound`` on the sum of a weight outside of the box of
    ``radius`` R.
    """

    radius = attr.ib()
    bound = attr.ib()

    def to_dict(self):
        return dict(radius=self.radius, bound=self.bound)


class Weight:
    """
    Base class for weights. Subclasses provide ``log_values``, ``envelope``
    and ``tail_mass``.
    """

    family = None
    # radius of the box where the weight is known, None when known everywhere
    known_radius = None

    def _check_gammas(self, gammas):
        gammas = np.asarray(gammas)
        if gammas.ndim == 1:
            gammas = gammas.reshape(1, -1)
        if gammas.shape[-1] != self.d:
            raise DimensionMismatch(
                f"Expected frequencies of dimension {self.d}, got {gammas.shape[-1]}"
            )
        return gammas

    def log_values(self, gammas):
        """
        Return an array of ``log(lambda(g))`` for each row of ``gammas``.
        """
        raise NotImplementedError

    def values(self, gammas):
        """
        Return an array of ``lambda(g)`` for each row of the (m, d) ``gammas``
        integer array.
        """
        return np.exp(self.log_values(gammas))

    def evaluate(self, gamma):
        gamma = as_freq(gamma, self.d)
        return float(self.values(np.array([gamma]))[0])

    def xi(self, gamma):
        return math.sqrt(self.evaluate(gamma))

    def envelope(self, k):
        """
        Return an upper bound of ``lambda(g)`` over all ``g`` with
        ``|g|_inf >= k`` for each value of the ``k`` int array.
        """
        raise NotImplementedError

    def max_value(self):
        return float(self.envelope(np.array([0]))[0])

    def tail_mass(self, radius, settings=DEFAULT_SETTINGS):
        raise NotImplementedError

    def square(self):
        """
        Return the weight ``lambda^2``.
        """
        raise NotImplementedError

    def sqrt(self):
        """
        Return the weight ``xi = lambda^(1/2)``.
        """
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


def _shell_sizes(k, d):
    """
    Return the number of lattice points g with |g|_inf == k for each value of
    the ``k`` array.

    >>> _shell_sizes(np.array([0, 1, 2]), 2).tolist()
    [1.0, 8.0, 16.0]
    """
    k = np.asarray(k, dtype=float)
    sizes = (2 * k + 1) ** d - (2 * k - 1) ** d
    return np.where(k == 0, 1.0, sizes)


class _CatalogWeight(Weight):
    """
    Weights with a closed form ``phi`` decreasing in the lattice norm. Tails
    are certified by summing ``tail_explicit_shells`` shells exactly and
    bounding the rest with an integral comparison.
    """

    def _phi(self, r):
        raise NotImplementedError

    def _log_phi(self, r):
        raise NotImplementedError

    def _tail_integral(self, start):
        """
        Return an upper bound of the integral of ``t^(d-1) phi(t)`` from
        ``start`` to infinity.
        """
        raise NotImplementedError

    def log_values(self, gammas):
        gammas = self._check_gammas(gammas)
        return self._log_phi(lattice_norms(gammas, self.norm))

    def values(self, gammas):
        gammas = self._check_gammas(gammas)
        return self._phi(lattice_norms(gammas, self.norm))

    def envelope(self, k):
        # every supported norm is larger than the linf norm
        k = np.maximum(np.asarray(k, dtype=float), 0.0)
        return self._phi(k)

    def tail_mass(self, radius, settings=DEFAULT_SETTINGS):
        """
        Return a TailBound for the sum of this weight over ``|g|_inf > radius``.

        Shells ``R < k <= K`` are summed exactly with the shell sizes and the
        envelope. Beyond ``K``, each shell is dominated by the integral of
        ``2d (2t+3)^(d-1) phi(t)`` over the preceding unit interval, and
        ``2t+3 <= 5t`` for ``t >= 1``.
        """
        radius = int(radius)
        if radius < 0:
            raise ValueError(f"Tail radius must be nonnegative: {radius}")
        shells = settings.tail_explicit_shells
        k = np.arange(radius + 1, radius + shells + 1, dtype=float)
        terms = _shell_sizes(k, self.d) * self.envelope(k)
        explicit = math.fsum(terms.tolist())
        start = float(radius + shells)
        remainder = 2 * self.d * 5 ** (self.d - 1) * self._tail_integral(start)
        bound = (explicit + remainder) * (1 + ROUNDING_SLACK)
        return TailBound(radius=radius, bound=bound)


def _check_norm(instance, attribute, value):
    if value not in NORMS:
        raise InvalidWeight(f"Unknown lattice norm: {value!r}. Use one of {NORMS}")


def _check_dimension(instance, attribute, value):
    if not isinstance(value, int) or value < 1:
        raise InvalidWeight(f"Weight dimension must be a positive int: {value!r}")


@attr.s(frozen=True, slots=True)
class Subexponential(_CatalogWeight):
    """
    The subexponential weight ``lambda(g) = exp(-tau |g|^p)``.

    >>> w = Subexponential(tau=2, p=0.5)
    >>> w.sqrt() == Subexponential(tau=1, p=0.5)
    True
    """

    family = "subexponential"

    tau = attr.ib(converter=float)
    p = attr.ib(converter=float)
    d = attr.ib(default=1, validator=_check_dimension)
    norm = attr.ib(default="euclidean", validator=_check_norm)

    def __attrs_post_init__(self):
        if not self.tau > 0:
            raise InvalidWeight(f"Subexponential tau must be positive: {self.tau}")
        if not 0 < self.p <= 1:
            raise InvalidWeight(f"Subexponential p must be in (0, 1]: {self.p}")

    def _phi(self, r):
        return np.exp(-self.tau * np.power(r, self.p))

    def _log_phi(self, r):
        return -self.tau * np.power(r, self.p)

    def _tail_integral(self, start):
        # substitute u = tau t^p: the integral is an upper incomplete gamma
        a = self.d / self.p
        x = self.tau * start**self.p
        log_scale = special.gammaln(a) - a * math.log(self.tau) - math.log(self.p)
        return math.exp(log_scale) * float(special.gammaincc(a, x))

    def square(self):
        return attr.evolve(self, tau=2 * self.tau)

    def sqrt(self):
        return attr.evolve(self, tau=self.tau / 2)

    def to_dict(self):
        return dict(family=self.family, tau=self.tau, p=self.p, d=self.d, norm=self.norm)


@attr.s(frozen=True, slots=True)
class PolynomialDecay(_CatalogWeight):
    """
    The polynomial weight ``lambda(g) = (1 + |g|)^(-s)``, summable for
    ``s > d``.
    """

    family = "polynomial"

    s = attr.ib(converter=float)
    d = attr.ib(default=1, validator=_check_dimension)
    norm = attr.ib(default="euclidean", validator=_check_norm)

    def __attrs_post_init__(self):
        if not self.s > self.d:
            raise InvalidWeight(
                f"PolynomialDecay is summable only for s > d: s={self.s}, d={self.d}"
            )

    def _phi(self, r):
        return np.power(1.0 + np.asarray(r, dtype=float), -self.s)

    def _log_phi(self, r):
        return -self.s * np.log1p(r)

    def _tail_integral(self, start):
        # t^(d-1) <= (1+t)^(d-1)
        return (1 + start) ** (self.d - self.s) / (self.s - self.d)

    def square(self):
        return attr.evolve(self, s=2 * self.s)

    def sqrt(self):
        return PolynomialDecay(s=self.s / 2, d=self.d, norm=self.norm)

    def to_dict(self):
        return dict(family=self.family, s=self.s, d=self.d, norm=self.norm)


def _table_converter(table):
    """
    Return a sorted tuple of ((gamma...), value) pairs from a ``table``
    mapping or iterable of pairs.
    """
    if hasattr(table, "items"):
        table = table.items()
    pairs = ((tuple(int(g) for g in np.atleast_1d(gamma)), float(v)) for gamma, v in table)
    return tuple(sorted(pairs))


@attr.s(frozen=True)
class Custom(Weight):
    """
    A weight known by its ``table`` of values on the full box
    ``|g|_inf <= box`` and a declared ``tail``: an upper bound of the sum of
    the weight outside of the box. Positivity and symmetry are verified on the
    table; the tail is trusted.

    >>> w = Custom({(-1,): 0.25, (0,): 1.0, (1,): 0.25}, tail=1e-3)
    >>> w.box, w.evaluate([1])
    (1, 0.25)
    >>> round(w.tail_mass(0).bound, 9)
    0.501
    """

    family = "custom"
    norm = "linf"

    table = attr.ib(converter=_table_converter)
    tail = attr.ib(default=None)
    _dense = attr.ib(init=False, eq=False, repr=False)

    def __attrs_post_init__(self):
        if not self.table:
            raise InvalidWeight("Custom weight table is empty")
        d = len(self.table[0][0])
        if any(len(g) != d for g, _ in self.table):
            raise InvalidWeight("Custom weight table has frequencies of mixed dimensions")
        gammas = np.array([g for g, _ in self.table], dtype=np.int64)
        values = np.array([v for _, v in self.table], dtype=float)
        box = int(np.max(np.abs(gammas)))
        expected = (2 * box + 1) ** d
        if len(self.table) != expected or len(set(g for g, _ in self.table)) != expected:
            raise InvalidWeight(
                f"Custom weight table must cover the full box of radius {box}: "
                f"{len(self.table)} entries for {expected} frequencies"
            )
        if not np.all(values > 0):
            raise InvalidWeight("Custom weight must be strictly positive")
        if self.tail is not None and not self.tail >= 0:
            raise InvalidWeight(f"Custom weight tail must be nonnegative: {self.tail}")

        dense = np.zeros((2 * box + 1,) * d)
        dense[tuple((gammas + box).T)] = values
        flipped = np.flip(dense)
        if not np.allclose(dense, flipped, rtol=1e-12, atol=0):
            raise InvalidWeight("Custom weight must be symmetric: lambda(g) == lambda(-g)")
        object.__setattr__(self, "_dense", dense)

    @property
    def d(self):
        return len(self.table[0][0])

    @property
    def box(self):
        return (self._dense.shape[0] - 1) // 2

    @property
    def known_radius(self):
        return self.box

    def log_values(self, gammas):
        return np.log(self.values(gammas))

    def values(self, gammas):
        gammas = self._check_gammas(gammas).astype(np.int64)
        box = self.box
        if gammas.size and np.max(np.abs(gammas)) > box:
            raise UnsupportedOperation(
                f"Custom weight is only known on the box of radius {box}"
            )
        return self._dense[tuple((gammas + box).T)]

    def dense(self):
        """
        Return a copy of the table as a dense array indexed by ``g + box``.
        """
        return self._dense.copy()

    def envelope(self, k):
        k = np.asarray(k, dtype=np.int64)
        box = self.box
        outside = self.tail or 0.0
        # largest table value on the shells |g|_inf >= k
        linf = np.max(np.abs(lattice_box(box, self.d)), axis=-1)
        flat = self._dense.ravel()
        shell_max = np.array([flat[linf == r].max() for r in range(box + 1)])
        suffix_max = np.maximum.accumulate(shell_max[::-1])[::-1]
        inside = suffix_max[np.clip(k, 0, box)]
        return np.where(k > box, outside, np.maximum(inside, outside))

    def tail_mass(self, radius, settings=DEFAULT_SETTINGS):
        if self.tail is None:
            raise UnsupportedOperation("Custom weight has no declared tail")
        radius = int(radius)
        if radius < 0:
            raise ValueError(f"Tail radius must be nonnegative: {radius}")
        box = self.box
        linf = np.max(np.abs(lattice_box(box, self.d)), axis=-1)
        outside_values = self._dense.ravel()[linf > radius]
        explicit = math.fsum(outside_values.tolist())
        bound = (explicit + self.tail) * (1 + ROUNDING_SLACK)
        return TailBound(radius=radius, bound=bound)

    def square(self):
        # every value outside of the box is at most the tail
        tail = None if self.tail is None else self.tail**2
        return Custom([(g, v * v) for g, v in self.table], tail=tail)

    def sqrt(self):
        raise UnsupportedOperation("The square root of a Custom weight has no certified tail")

    def to_dict(self):
        table = [dict(gamma=list(g), value=v) for g, v in self.table]
        return dict(family=self.family, d=self.d, norm=self.norm, table=table, tail=self.tail)


def weight_from_dict(mapping):
    """
    Return a Weight built from a ``mapping`` JSON-like object as returned by
    ``Weight.to_dict()``.

    >>> weight_from_dict(dict(family="subexponential", tau=1, p=0.5))
    Subexponential(tau=1.0, p=0.5, d=1, norm='euclidean')
    >>> weight_from_dict(dict(family="polynomial", s=3, d=2, norm="l1"))
    PolynomialDecay(s=3.0, d=2, norm='l1')
    """
    mapping = dict(mapping)
    family = mapping.get("family")
    d = int(mapping.get("d", 1))
    norm = mapping.get("norm") or "euclidean"
    try:
        if family == "subexponential":
            return Subexponential(tau=mapping["tau"], p=mapping["p"], d=d, norm=norm)
        if family == "polynomial":
            return PolynomialDecay(s=mapping["s"], d=d, norm=norm)
        if family == "custom":
            table = [(entry["gamma"], entry["value"]) for entry in mapping["table"]]
            weight = Custom(table, tail=mapping.get("tail"))
            if weight.d != d:
                raise InvalidWeight(f"Custom table dimension {weight.d} is not d={d}")
            return weight
    except KeyError as e:
        raise InvalidWeight(f"Missing weight field {e} in: {mapping!r}") from e
    raise InvalidWeight(f"Unknown weight family: {family!r}")


def weight_eval(weight, gamma):
    """
    Return ``lambda(gamma)``.

    >>> import math
    >>> math.isclose(weight_eval(Subexponential(tau=1, p=0.5), [4]), math.exp(-2))
    True
    """
    return weight.evaluate(gamma)


def xi_eval(weight, gamma):
    """
    Return ``xi(gamma) = lambda(gamma)^(1/2)``.

    >>> xi_eval(PolynomialDecay(s=2), [3])
    0.25
    """
    return weight.xi(gamma)


def tail_mass(weight, radius, settings=DEFAULT_SETTINGS):
    """
    Return a TailBound certifying the sum of ``weight`` over the frequencies
    with ``|g|_inf > radius``.
    """
    return weight.tail_mass(radius, settings=settings)


def total_mass(weight, settings=DEFAULT_SETTINGS):
    """
    Return a certified upper bound of the sum of ``weight`` over all of Z^d.
    """
    return weight.max_value() + weight.tail_mass(0, settings=settings).bound


def truncation_radius(weight, epsilon, settings=DEFAULT_SETTINGS):
    """
    Return the smallest radius R such that ``tail_mass(weight, R)`` is at most
    ``epsilon``. The radius is bracketed by doubling then found by bisection.
    Raise ResourceCapExceeded if no radius up to ``settings.max_radius`` works.

    >>> truncation_radius(Subexponential(tau=1, p=1), 10.0)
    0
    """
    if not epsilon > 0:
        raise ValueError(f"Truncation epsilon must be positive: {epsilon}")

    def fits(radius):
        return weight.tail_mass(radius, settings=settings).bound <= epsilon

    if fits(0):
        return 0
    high = 1
    while not fits(high):
        if high >= settings.max_radius:
            raise ResourceCapExceeded(
                f"No truncation radius up to {settings.max_radius} reaches tail {epsilon}"
            )
        high = min(2 * high, settings.max_radius)
    low = high // 2
    # invariant: fits(high) and not fits(low)
    while high - low > 1:
        mid = (low + high) // 2
        if fits(mid):
            high = mid
        else:
            low = mid
    return high
