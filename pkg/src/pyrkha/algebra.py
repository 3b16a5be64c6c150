# SPDX-License-Identifier: Apache-2.0
# Copyright (C) nexB Inc. and others
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
# See https://github.com/aboutcode-org/pyrkha for support or download.
# See https://aboutcode.org for more information about nexB OSS projects.
#

"""
Band-limited elements of the reproducing kernel Hilbert algebra H_lambda.

A FourierPoly is a function ``f = sum f_g exp(2 pi i g.x)`` on the torus with
finitely many nonzero coefficients ``f_g`` and an associated weight. Its norm
is ``||f||^2 = sum |f_g|^2 / lambda(g)``. The pointwise product of two
FourierPoly is the exact convolution of their coefficients.

>>> from pyrkha.weights import Subexponential
>>> w = Subexponential(tau=1, p=0.5)
>>> one = FourierPoly.one(w)
>>> hnorm(one)
1.0
>>> e1 = FourierPoly.character([1], w)
>>> multiply(e1, involution(e1)) == one
True
"""

import math
import os

import attr
import numpy as np
from scipy import signal

from pyrkha import DEFAULT_SETTINGS
from pyrkha import DomainError
from pyrkha import InconclusiveReport
from pyrkha import NotInvertible
from pyrkha import ResourceCapExceeded
from pyrkha import WeightMismatch
from pyrkha import get_logger_debug
from pyrkha.torus import FreqVector
from pyrkha.torus import as_freq
from pyrkha.torus import as_point
from pyrkha.torus import characters_matrix
from pyrkha.torus import check_grid_size
from pyrkha.weights import weight_from_dict

TRACE = bool(os.environ.get("PYRKHA_TRACE"))

logger_debug = get_logger_debug(__name__)


def _sorted_rows(gammas, values):
    order = np.lexsort(gammas.T[::-1])
    return gammas[order], values[order]


class FourierPoly:
    """
    An immutable finitely supported map of frequencies to complex Fourier
    coefficients, with an associated weight.

    >>> from pyrkha.weights import PolynomialDecay
    >>> f = FourierPoly({(1,): 2.0, (-1,): 2.0, (3,): 0}, PolynomialDecay(s=2))
    >>> f.coeffs
    {FreqVector((-1,)): (2+0j), FreqVector((1,)): (2+0j)}
    >>> f.bandwidth, f.is_real()
    (1, True)
    """

    __slots__ = ("weight", "gammas", "values")

    def __init__(self, coeffs, weight):
        if hasattr(coeffs, "items"):
            coeffs = coeffs.items()
        d = weight.d
        pairs = [(as_freq(g, d), complex(v)) for g, v in coeffs]
        gammas = np.array([g for g, _ in pairs], dtype=np.int64).reshape(-1, d)
        values = np.array([v for _, v in pairs], dtype=complex)
        self._set(*_merged(gammas, values), weight)

    def _set(self, gammas, values, weight):
        keep = values != 0
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "gammas", gammas[keep])
        object.__setattr__(self, "values", values[keep])
        self.gammas.setflags(write=False)
        self.values.setflags(write=False)

    def __setattr__(self, name, value):
        raise AttributeError("FourierPoly is immutable")

    @classmethod
    def from_arrays(cls, gammas, values, weight):
        """
        Return a FourierPoly from an (m, d) int array of unique ``gammas`` and
        the matching complex ``values`` array.
        """
        gammas = np.asarray(gammas, dtype=np.int64).reshape(-1, weight.d)
        values = np.asarray(values, dtype=complex).reshape(-1)
        poly = cls.__new__(cls)
        poly._set(*_sorted_rows(gammas, values), weight)
        return poly

    @classmethod
    def from_dense(cls, array, origin, weight):
        """
        Return a FourierPoly from a dense ``array`` of coefficients where the
        index ``i`` holds the coefficient of the frequency ``origin + i``.
        """
        index = np.nonzero(array)
        gammas = np.stack(index, axis=-1).astype(np.int64) + np.asarray(origin, dtype=np.int64)
        return cls.from_arrays(gammas, array[index], weight)

    @classmethod
    def zero(cls, weight):
        return cls({}, weight)

    @classmethod
    def constant(cls, value, weight):
        return cls({(0,) * weight.d: value}, weight)

    @classmethod
    def one(cls, weight):
        """
        Return the unit ``1_G`` of the algebra.
        """
        return cls.constant(1.0, weight)

    @classmethod
    def character(cls, gamma, weight):
        return cls({as_freq(gamma, weight.d): 1.0}, weight)

    @classmethod
    def basis(cls, gamma, weight):
        """
        Return the unit vector ``psi_g = xi(g) exp(2 pi i g.x)`` of the
        orthonormal basis of H_lambda.
        """
        gamma = as_freq(gamma, weight.d)
        return cls({gamma: weight.xi(gamma)}, weight)

    @classmethod
    def random(cls, weight, radius, rng, real=False):
        """
        Return a FourierPoly with standard complex normal coefficients on the
        box of ``radius``, drawn from the ``rng`` numpy Generator. Return a
        real-valued function if ``real`` is True.
        """
        d = weight.d
        shape = (2 * radius + 1,) * d
        dense = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        if real:
            dense = (dense + np.conj(np.flip(dense))) / 2
        return cls.from_dense(dense, (-radius,) * d, weight)

    @property
    def d(self):
        return self.weight.d

    def __len__(self):
        return len(self.values)

    @property
    def coeffs(self):
        """
        Return a dict of {FreqVector: complex coefficient}.
        """
        return {FreqVector(g): complex(v) for g, v in zip(self.gammas.tolist(), self.values)}

    def coefficient(self, gamma):
        gamma = np.array(as_freq(gamma, self.d))
        found = np.nonzero(np.all(self.gammas == gamma, axis=-1))[0]
        if len(found):
            return complex(self.values[found[0]])
        return 0j

    @property
    def bandwidth(self):
        """
        Return the largest ``|g|_inf`` of the support, 0 for the zero function.
        """
        if not len(self):
            return 0
        return int(np.max(np.abs(self.gammas)))

    def truncate(self, radius):
        """
        Return the restriction of this function to the frequencies with
        ``|g|_inf <= radius``.
        """
        keep = np.max(np.abs(self.gammas), axis=-1, initial=0) <= radius
        return FourierPoly.from_arrays(self.gammas[keep], self.values[keep], self.weight)

    def is_real(self, tolerance=1e-12):
        """
        Return True if this function is real-valued: ``f_(-g) == conj(f_g)``
        within ``tolerance``.
        """
        return _max_abs_difference(self, involution(self)) <= tolerance

    def hermitian_part(self):
        """
        Return the real part of this function, ``(f + f*) / 2``.
        """
        return (self + involution(self)) * 0.5

    def sample_on_grid(self, n, settings=DEFAULT_SETTINGS):
        """
        Return the exact values of this function on the ``n``-per-dimension
        grid as a complex array of shape (n,) * d indexed by ``j`` for the
        point ``j / n``.
        """
        check_grid_size(n, self.d, settings)
        folded = np.zeros((n,) * self.d, dtype=complex)
        np.add.at(folded, tuple((self.gammas % n).T), self.values)
        return np.fft.ifftn(folded) * n**self.d

    def sup_norm(self, n, settings=DEFAULT_SETTINGS):
        """
        Return the max of ``|f|`` on the ``n`` grid: a lower bound of the sup
        norm.
        """
        return float(np.max(np.abs(self.sample_on_grid(n, settings))))

    def pointwise_grid_min(self, n, settings=DEFAULT_SETTINGS):
        """
        Return the min of the real part of this function on the ``n`` grid.
        """
        return float(np.min(self.sample_on_grid(n, settings).real))

    def __eq__(self, other):
        if not isinstance(other, FourierPoly):
            return NotImplemented
        return (
            self.weight == other.weight
            and np.array_equal(self.gammas, other.gammas)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def is_close(self, other, tolerance=1e-12):
        _check_same_weight(self, other)
        return _max_abs_difference(self, other) <= tolerance

    def __add__(self, other):
        if not isinstance(other, FourierPoly):
            other = FourierPoly.constant(other, self.weight)
        _check_same_weight(self, other)
        gammas = np.concatenate([self.gammas, other.gammas])
        values = np.concatenate([self.values, other.values])
        poly = FourierPoly.__new__(FourierPoly)
        poly._set(*_merged(gammas, values), self.weight)
        return poly

    __radd__ = __add__

    def __neg__(self):
        return FourierPoly.from_arrays(self.gammas, -self.values, self.weight)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, FourierPoly):
            return multiply(self, other)
        return FourierPoly.from_arrays(self.gammas, self.values * complex(other), self.weight)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1 / complex(other))

    def __repr__(self):
        return f"FourierPoly({self.coeffs!r}, {self.weight!r})"

    def to_dict(self):
        coeffs = [
            dict(gamma=g, re=float(v.real), im=float(v.imag))
            for g, v in zip(self.gammas.tolist(), self.values)
        ]
        return dict(d=self.d, weight=self.weight.to_dict(), coeffs=coeffs)

    @classmethod
    def from_dict(cls, mapping):
        weight = weight_from_dict(mapping["weight"])
        coeffs = [(c["gamma"], complex(c["re"], c.get("im", 0.0))) for c in mapping["coeffs"]]
        return cls(coeffs, weight)


def _merged(gammas, values):
    """
    Return a tuple of (gammas, values) with duplicated frequencies summed, in
    lexicographic order.
    """
    if not len(gammas):
        return gammas, values
    unique, inverse = np.unique(gammas, axis=0, return_inverse=True)
    summed = np.zeros(len(unique), dtype=complex)
    np.add.at(summed, inverse.reshape(-1), values)
    return unique, summed


def _max_abs_difference(f, g):
    difference = f + (-g)
    if not len(difference):
        return 0.0
    return float(np.max(np.abs(difference.values)))


def _check_same_weight(f, g):
    if f.weight != g.weight:
        raise WeightMismatch(f"Functions have different weights: {f.weight!r} and {g.weight!r}")


def _bounding_box(f):
    """
    Return a tuple of (origin, dense array) of the coefficients of ``f`` on
    the bounding box of its support.
    """
    origin = f.gammas.min(axis=0)
    shape = tuple(f.gammas.max(axis=0) - origin + 1)
    dense = np.zeros(shape, dtype=complex)
    dense[tuple((f.gammas - origin).T)] = f.values
    return origin, dense


def hnorm(f):
    """
    Return the H_lambda norm ``(sum |f_g|^2 / lambda(g))^(1/2)`` of ``f``.
    """
    if not len(f):
        return 0.0
    squares = np.abs(f.values) ** 2 / f.weight.values(f.gammas)
    return math.sqrt(math.fsum(squares.tolist()))


def inner(f, g):
    """
    Return the H_lambda inner product ``sum conj(f_g) g_g / lambda(g)``,
    antilinear in ``f``.
    """
    _check_same_weight(f, g)
    if not len(f) or not len(g):
        return 0j
    origin = np.minimum(f.gammas.min(axis=0), g.gammas.min(axis=0))
    shape = tuple(np.maximum(f.gammas.max(axis=0), g.gammas.max(axis=0)) - origin + 1)
    f_index = np.ravel_multi_index(tuple((f.gammas - origin).T), shape)
    g_index = np.ravel_multi_index(tuple((g.gammas - origin).T), shape)
    _, f_pos, g_pos = np.intersect1d(f_index, g_index, assume_unique=True, return_indices=True)
    if not len(f_pos):
        return 0j
    gammas = f.gammas[f_pos]
    terms = np.conj(f.values[f_pos]) * g.values[g_pos] / f.weight.values(gammas)
    return complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))


def multiply(f, g, settings=DEFAULT_SETTINGS):
    """
    Return the pointwise product ``f g`` whose coefficients are the exact
    convolution of the coefficients of ``f`` and ``g``.
    """
    _check_same_weight(f, g)
    if not len(f) or not len(g):
        return FourierPoly.zero(f.weight)
    f_origin, f_dense = _bounding_box(f)
    g_origin, g_dense = _bounding_box(g)
    out_size = math.prod(a + b - 1 for a, b in zip(f_dense.shape, g_dense.shape))
    if out_size > settings.max_support_size:
        raise ResourceCapExceeded(
            f"Product support box of {out_size} frequencies exceeds the cap of "
            f"{settings.max_support_size}"
        )
    if f_dense.size * g_dense.size <= settings.direct_convolution_limit:
        product = signal.convolve(f_dense, g_dense, mode="full", method="direct")
    else:
        product = signal.convolve(f_dense, g_dense, mode="full", method="fft")
        # clear the rounding noise outside of the sum of the supports
        reached = signal.fftconvolve((f_dense != 0) * 1.0, (g_dense != 0) * 1.0) > 0.5
        product[~reached] = 0
    return FourierPoly.from_dense(product, f_origin + g_origin, f.weight)


def involution(f):
    """
    Return ``f*`` with coefficients ``conj(f_(-g))``: the complex conjugate
    function.
    """
    return FourierPoly.from_arrays(-f.gammas, np.conj(f.values), f.weight)


def evaluate(f, x):
    """
    Return the complex value of ``f`` at the ``x`` TorusPoint.
    """
    x = as_point(x, f.d)
    return complex(evaluate_many(f, [x.coords])[0])


def evaluate_many(f, points):
    """
    Return an array of the values of ``f`` at each row of the (n, d)
    ``points`` array.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if not len(f):
        return np.zeros(len(points), dtype=complex)
    return characters_matrix(f.gammas, points) @ f.values


def banach_constant(weight, report):
    """
    Return ``sqrt(C)`` for the constant ``C`` of a certified subconvolutivity
    ``report``: on the window, ``||f g|| <= sqrt(C) ||f|| ||g||``.
    Raise InconclusiveReport if the report is not certified.
    """
    if report.weight != weight:
        raise WeightMismatch(f"Report is for {report.weight!r}, not for {weight!r}")
    if not report.is_certified:
        raise InconclusiveReport(
            f"No Banach constant from an inconclusive report on window {report.window}"
        )
    return math.sqrt(report.constant)


@attr.s(frozen=True, slots=True)
class AlgebraResult:
    """
    The outcome of an iterative solver. ``residual`` is the measured
    H_lambda norm of the defect of ``value``.
    """

    value = attr.ib()
    residual = attr.ib()
    iterations = attr.ib()
    converged = attr.ib()

    def to_dict(self):
        return dict(
            value=self.value.to_dict(),
            residual=self.residual,
            iterations=self.iterations,
            converged=self.converged,
        )


def solver_grid_size(bandwidth, f_bandwidth, settings=DEFAULT_SETTINGS):
    """
    Return the power of 2 grid resolution used to sample a function of
    ``f_bandwidth`` for a solution of ``bandwidth``.

    >>> solver_grid_size(5, 1)
    32
    """
    target = settings.oversample * max(bandwidth, f_bandwidth, 1)
    return 1 << (target - 1).bit_length()


def _grid_to_poly(samples, bandwidth, weight):
    """
    Return the FourierPoly of the discrete Fourier coefficients of the
    ``samples`` grid values, restricted to the box of ``bandwidth``.
    """
    n = samples.shape[0]
    d = samples.ndim
    coefficients = np.fft.fftn(samples) / n**d
    folded = np.roll(coefficients, bandwidth, axis=tuple(range(d)))
    dense = folded[(slice(0, 2 * bandwidth + 1),) * d]
    return FourierPoly.from_dense(dense, (-bandwidth,) * d, weight)


def _grid_samples(f, bandwidth, settings):
    n = solver_grid_size(bandwidth, f.bandwidth, settings)
    check_grid_size(n, f.d, settings)
    return n, f.sample_on_grid(n, settings)


def invert(f, bandwidth, tol=1e-10, settings=DEFAULT_SETTINGS, trace=TRACE):
    """
    Return an AlgebraResult with an approximate inverse ``g`` of ``f``
    supported in the box of ``bandwidth`` and the residual
    ``||f g - 1||``.

    Start from the sampled ``1/f`` truncated to the box, then refine with the
    damped Newton step ``g + t g (1 - f g)``. Raise NotInvertible if ``|f|``
    is below ``settings.vanishing_threshold`` on the oversampled grid.

    >>> from pyrkha.weights import Subexponential
    >>> f = FourierPoly.constant(4, Subexponential(tau=1, p=1))
    >>> result = invert(f, 2)
    >>> result.converged, round(result.value.coefficient([0]).real, 12)
    (True, 0.25)
    """
    bandwidth = int(bandwidth)
    if bandwidth < 0:
        raise ValueError(f"Bandwidth must be nonnegative: {bandwidth}")
    n, samples = _grid_samples(f, bandwidth, settings)
    smallest = float(np.min(np.abs(samples)))
    if smallest < settings.vanishing_threshold:
        raise NotInvertible(
            f"Function nearly vanishes on the {n}-grid: min |f| = {smallest!r}"
        )
    real = f.is_real()
    one = FourierPoly.one(f.weight)

    def defect(candidate):
        return one - multiply(f, candidate, settings)

    def symmetric(candidate):
        return candidate.hermitian_part() if real else candidate

    g = symmetric(_grid_to_poly(1 / samples, bandwidth, f.weight))
    error = defect(g)
    residual = hnorm(error)
    iterations = 0

    while residual > tol and iterations < settings.newton_max_iterations:
        step = multiply(g, error, settings).truncate(bandwidth)
        t = 1.0
        accepted = False
        while t >= settings.newton_min_step:
            candidate = symmetric(g + step * t)
            candidate_error = defect(candidate)
            candidate_residual = hnorm(candidate_error)
            if candidate_residual < residual:
                accepted = True
                break
            t /= 2
        if not accepted:
            break
        g, error, residual = candidate, candidate_error, candidate_residual
        iterations += 1
        if trace:
            logger_debug("invert: iteration:", iterations, "step:", t, "residual:", residual)

    return AlgebraResult(value=g, residual=residual, iterations=iterations, converged=residual <= tol)


def sqrt_positive(f, bandwidth, tol=1e-10, settings=DEFAULT_SETTINGS, trace=TRACE):
    """
    Return an AlgebraResult with a real, strictly positive ``g`` supported in
    the box of ``bandwidth`` such that ``g^2`` approximates ``f`` and the
    residual ``||g g - f||``.

    Start from the sampled ``sqrt(f)`` and refine with the damped Newton step
    ``g + t (f - g^2) / (2 g)`` computed on the grid. Raise DomainError if
    ``f`` is not real or not strictly positive on the oversampled grid.

    >>> from pyrkha.weights import Subexponential
    >>> f = FourierPoly.constant(4, Subexponential(tau=1, p=1))
    >>> round(sqrt_positive(f, 1).value.coefficient([0]).real, 12)
    2.0
    """
    bandwidth = int(bandwidth)
    if bandwidth < 0:
        raise ValueError(f"Bandwidth must be nonnegative: {bandwidth}")
    if not f.is_real():
        raise DomainError("Square root of a function that is not real-valued")
    n, samples = _grid_samples(f, bandwidth, settings)
    samples = samples.real
    smallest = float(np.min(samples))
    if smallest <= settings.vanishing_threshold:
        raise DomainError(f"Function is not strictly positive on the {n}-grid: min = {smallest!r}")

    def defect(candidate):
        return multiply(candidate, candidate, settings) - f

    def is_positive(candidate):
        return candidate.pointwise_grid_min(n, settings) > 0

    g = _grid_to_poly(np.sqrt(samples), bandwidth, f.weight).hermitian_part()
    residual = hnorm(defect(g))
    iterations = 0

    while residual > tol and iterations < settings.newton_max_iterations:
        g_samples = g.sample_on_grid(n, settings).real
        correction = (samples - g_samples**2) / (2 * g_samples)
        step = _grid_to_poly(correction, bandwidth, f.weight).hermitian_part()
        t = 1.0
        accepted = False
        while t >= settings.newton_min_step:
            candidate = g + step * t
            candidate_residual = hnorm(defect(candidate))
            if candidate_residual < residual and is_positive(candidate):
                accepted = True
                break
            t /= 2
        if not accepted:
            break
        g, residual = candidate, candidate_residual
        iterations += 1
        if trace:
            logger_debug("sqrt_positive: iteration:", iterations, "residual:", residual)

    return AlgebraResult(value=g, residual=residual, iterations=iterations, converged=residual <= tol)


@attr.s(frozen=True, slots=True)
class SpectrumProbe:
    """
    The outcome of probing whether ``z`` is in the spectrum of a function.
    ``distance`` is the min of ``|f - z|`` on the sampling grid. ``residual``
    is None when no inversion was attempted.
    """

    z = attr.ib()
    invertible = attr.ib()
    residual = attr.ib()
    distance = attr.ib()

    def to_dict(self):
        return dict(
            z=dict(re=self.z.real, im=self.z.imag),
            invertible=self.invertible,
            residual=self.residual,
            distance=self.distance,
        )


def spectrum_probe(f, z, bandwidth, tol=1e-8, settings=DEFAULT_SETTINGS):
    """
    Return a SpectrumProbe attempting to invert ``f - z``. A ``z`` within
    ``settings.spectrum_distance`` of a sampled value of ``f`` is in the
    range of ``f``, hence not invertible.

    >>> from pyrkha.weights import Subexponential
    >>> e1 = FourierPoly.character([1], Subexponential(tau=1, p=1))
    >>> spectrum_probe(e1, 0, 4).invertible, spectrum_probe(e1, 1, 4).invertible
    (True, False)
    """
    z = complex(z)
    _, samples = _grid_samples(f, bandwidth, settings)
    distance = float(np.min(np.abs(samples - z)))
    if distance <= settings.spectrum_distance:
        return SpectrumProbe(z=z, invertible=False, residual=None, distance=distance)
    shifted = f - FourierPoly.constant(z, f.weight)
    try:
        result = invert(shifted, bandwidth, tol=tol, settings=settings)
    except NotInvertible:
        return SpectrumProbe(z=z, invertible=False, residual=None, distance=distance)
    return SpectrumProbe(
        z=z, invertible=result.converged, residual=result.residual, distance=distance
    )
