# SPDX-License-Identifier: Apache-2.0
# Copyright (C) nexB Inc. and others
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
# See https://github.com/aboutcode-org/pyrkha for support or download.
# See https://aboutcode.org for more information about nexB OSS projects.
#

"""
Checkers for the conditions that make a weight define a Banach algebra:

- subconvolutivity: ``(lambda * lambda)(g) <= C lambda(g)``
- subadditivity of ``w = lambda^(-e)``: ``w(g + h) <= C (w(g) + w(h))``
- submultiplicativity of ``w``: ``w(g + h) <= C w(g) w(h)``

No finite computation proves a statement for all frequencies. A report carries
a constant measured on a window ``|g|_inf <= rho`` from certified convolution
values and an honest verdict: ``certified-bounded`` when the window maximum
stabilized under doubling of the truncation radius, ``inconclusive``
otherwise.

>>> from pyrkha.weights import Subexponential
>>> bounds = convolve_at(Subexponential(tau=1, p=1), [0], 40)
>>> bounds.lo <= bounds.hi
True
"""

import math
import os

import attr
import numpy as np
from scipy import signal

from pyrkha import DEFAULT_SETTINGS
from pyrkha import ResourceCapExceeded
from pyrkha import UnsupportedOperation
from pyrkha import get_logger_debug
from pyrkha.torus import FreqVector
from pyrkha.torus import as_freq
from pyrkha.torus import check_box_size
from pyrkha.torus import lattice_box

TRACE = bool(os.environ.get("PYRKHA_TRACE"))

logger_debug = get_logger_debug(__name__)

CERTIFIED = "certified-bounded"
INCONCLUSIVE = "inconclusive"


@attr.s(frozen=True, slots=True)
class Interval:
    lo = attr.ib()
    hi = attr.ib()

    @property
    def width(self):
        return self.hi - self.lo

    def __contains__(self, value):
        return self.lo <= value <= self.hi


@attr.s(frozen=True, slots=True)
class ConvolutionReport:
    """
    The outcome of a subconvolutivity check on the window of radius
    ``window``.
    """

    weight = attr.ib()
    window = attr.ib()
    # truncation radius of the last convolution
    radius = attr.ib()
    # max over the window of hi(g) / lambda(g)
    constant = attr.ib()
    # max over the window of lo(g) / lambda(g)
    lower_constant = attr.ib()
    # max over the window of hi(g) - lo(g)
    tail_correction = attr.ib()
    verdict = attr.ib()
    # tuple of (FreqVector, ratio) for the largest ratios
    worst = attr.ib(default=())
    # tuple of (radius, constant) for each doubling
    history = attr.ib(default=())

    @property
    def is_certified(self):
        return self.verdict == CERTIFIED

    def to_dict(self):
        return dict(
            weight=self.weight.to_dict(),
            window=self.window,
            radius=self.radius,
            constant=self.constant,
            lower_constant=self.lower_constant,
            tail_correction=self.tail_correction,
            verdict=self.verdict,
            worst=[dict(gamma=list(g), ratio=r) for g, r in self.worst],
            history=[dict(radius=r, constant=c) for r, c in self.history],
        )


@attr.s(frozen=True, slots=True)
class WindowConstantReport:
    """
    A constant measured by brute force over all pairs of the window. A max
    over a finite set is a lower bound of the true constant.
    """

    weight = attr.ib()
    condition = attr.ib()
    # w = lambda^(-exponent)
    exponent = attr.ib()
    window = attr.ib()
    constant = attr.ib()
    # the pair of frequencies reaching the constant
    argmax = attr.ib()
    lower_bound = attr.ib(default=True)

    def to_dict(self):
        return dict(
            weight=self.weight.to_dict(),
            condition=self.condition,
            exponent=self.exponent,
            window=self.window,
            constant=self.constant,
            argmax=[list(g) for g in self.argmax],
            lower_bound=self.lower_bound,
        )


@attr.s(frozen=True, slots=True)
class SquareReport:
    """
    The two subconvolutivity reports for ``xi`` and ``xi^2`` and whether the
    squared constant bound ``C(xi^2) <= C(xi)^2`` holds. ``holds`` is None
    when either report is inconclusive.
    """

    xi_report = attr.ib()
    square_report = attr.ib()
    holds = attr.ib()
    verdict = attr.ib()

    def to_dict(self):
        return dict(
            xi=self.xi_report.to_dict(),
            square=self.square_report.to_dict(),
            holds=self.holds,
            verdict=self.verdict,
        )


def _inner_radius(weight, radius):
    known = weight.known_radius
    return radius if known is None else min(radius, known)


def _dense_values(weight, radius, settings=DEFAULT_SETTINGS):
    """
    Return the values of ``weight`` on the box of ``radius`` as a dense array
    indexed by ``g + radius``, with zeros where the weight is unknown.
    """
    d = weight.d
    gammas = lattice_box(radius, d, settings)
    known = weight.known_radius
    if known is None or known >= radius:
        values = weight.values(gammas)
    else:
        values = np.zeros(len(gammas))
        inside = np.max(np.abs(gammas), axis=-1) <= known
        values[inside] = weight.values(gammas[inside])
    return values.reshape((2 * radius + 1,) * d)


def _remainder(weight, inner, linf, settings=DEFAULT_SETTINGS):
    """
    Return the certified remainder of the truncated convolution at
    frequencies of ``linf`` norms, for a sum over ``|b|_inf <= inner``.

    Terms with ``|b|_inf > inner`` have ``|g - b|_inf >= inner + 1 - |g|_inf``
    and sum to at most the envelope there times the tail. Unknown values of a
    partially known weight add at most ``max(lambda)`` times its declared tail.
    """
    linf = np.asarray(linf)
    tail = weight.tail_mass(inner, settings=settings).bound
    envelope = weight.envelope(np.maximum(inner + 1 - linf, 0))
    remainder = envelope * tail
    known = weight.known_radius
    if known is not None:
        remainder = remainder + weight.max_value() * weight.tail_mass(known, settings).bound
    return remainder


def convolve_at(weight, gamma, radius, settings=DEFAULT_SETTINGS):
    """
    Return an Interval bracketing ``(lambda * lambda)(gamma)``. ``lo`` is the
    sum of ``lambda(b) lambda(gamma - b)`` over ``|b|_inf <= radius`` and
    ``hi`` adds a certified bound of the rest.

    >>> from pyrkha.weights import Custom
    >>> table = {(-1,): 1e-9, (0,): 1.0, (1,): 1e-9}
    >>> bounds = convolve_at(Custom(table, tail=1e-12), [0], 1)
    >>> round(bounds.lo, 9), round(bounds.hi, 9)
    (1.0, 1.0)
    """
    if radius < 0:
        raise ValueError(f"Convolution radius must be nonnegative: {radius}")
    d = weight.d
    gamma = np.array(as_freq(gamma, d), dtype=np.int64)
    inner = _inner_radius(weight, int(radius))
    betas = lattice_box(inner, d, settings)
    shifted = gamma - betas
    known = weight.known_radius
    if known is None:
        mask = np.ones(len(betas), dtype=bool)
    else:
        mask = np.max(np.abs(shifted), axis=-1) <= known
    terms = weight.values(betas[mask]) * weight.values(shifted[mask])
    lo = math.fsum(terms.tolist())
    linf = int(np.max(np.abs(gamma)))
    hi = lo + float(_remainder(weight, inner, [linf], settings)[0])
    return Interval(lo=lo, hi=hi)


def window_bounds(weight, rho, radius, settings=DEFAULT_SETTINGS):
    """
    Return a tuple of (lo, hi) dense arrays bracketing ``(lambda * lambda)(g)``
    for every ``|g|_inf <= rho``, indexed by ``g + rho``, for a truncation
    ``radius``.
    """
    d = weight.d
    inner = _inner_radius(weight, int(radius))
    check_box_size(inner + rho, d, settings)
    near = _dense_values(weight, inner, settings)
    far = _dense_values(weight, inner + rho, settings)
    window_size = (2 * rho + 1) ** d
    if near.size * window_size <= settings.direct_convolution_limit:
        method = "direct"
    else:
        method = "fft"
    lo = signal.convolve(near, far, mode="valid", method=method)
    window = lattice_box(rho, d, settings)
    linf = np.max(np.abs(window), axis=-1).reshape(lo.shape)
    hi = lo + _remainder(weight, inner, linf, settings)
    if method == "fft":
        rounding = np.finfo(float).eps * near.sum() * far.sum() * 4 * math.log2(far.size + 1)
        lo = np.maximum(lo - rounding, 0.0)
        hi = hi + rounding
    if TRACE:
        logger_debug("window_bounds: radius:", radius, "method:", method)
    return lo, hi


def subconvolutivity_report(weight, rho, tol=None, settings=DEFAULT_SETTINGS, trace=TRACE):
    """
    Return a ConvolutionReport for ``weight`` on the window ``|g|_inf <= rho``.

    The truncation radius doubles until the window max of ``hi / lambda``
    changes by less than ``tol`` relative, ``settings.stabilization_repeats``
    times in a row. The verdict is inconclusive if the radius cap is reached
    first.

    >>> from pyrkha.weights import Subexponential
    >>> report = subconvolutivity_report(Subexponential(tau=1, p=1), 4)
    >>> report.verdict
    'certified-bounded'
    """
    if rho < 1:
        raise ValueError(f"Window radius must be at least 1: {rho}")
    if tol is None:
        tol = settings.stabilization_tol
    known = weight.known_radius
    if known is not None and rho > known:
        raise UnsupportedOperation(
            f"Window radius {rho} exceeds the known box of radius {known} of the weight"
        )

    window = lattice_box(rho, weight.d, settings)
    lam = weight.values(window)
    radius = max(rho, 8)
    history = []
    last = None
    stable = 0
    verdict = INCONCLUSIVE

    while True:
        try:
            lo, hi = window_bounds(weight, rho, radius, settings)
        except ResourceCapExceeded:
            if not history:
                raise
            break

        lo = lo.ravel()
        hi = hi.ravel()
        constant = float(np.max(hi / lam))
        if history:
            previous = history[-1][1]
            change = abs(constant - previous) / previous
            stable = stable + 1 if change < tol else 0
            if trace:
                logger_debug("subconvolutivity_report: radius:", radius, "change:", change)
        history.append((radius, constant))
        last = radius, lo, hi

        if stable >= settings.stabilization_repeats:
            verdict = CERTIFIED
            break
        radius *= 2
        if radius > settings.max_convolution_radius:
            break

    radius, lo, hi = last
    ratios = hi / lam
    order = np.argsort(-ratios, kind="stable")[:5]
    worst = tuple((FreqVector(window[i]), float(ratios[i])) for i in order)
    return ConvolutionReport(
        weight=weight,
        window=rho,
        radius=radius,
        constant=float(ratios.max()),
        lower_constant=float(np.max(lo / lam)),
        tail_correction=float(np.max(hi - lo)),
        verdict=verdict,
        worst=worst,
        history=tuple(history),
    )


def _pairs_report(weight, rho, exponent, condition, settings=DEFAULT_SETTINGS):
    """
    Return a WindowConstantReport for the max over all pairs ``g, h`` of the
    window of a log-domain ratio of ``w = lambda^(-exponent)``.
    """
    if rho < 0:
        raise ValueError(f"Window radius must be nonnegative: {rho}")
    d = weight.d
    known = weight.known_radius
    if known is not None and 2 * rho > known:
        raise UnsupportedOperation(
            f"Window radius {rho} needs the weight on the box of radius {2 * rho}, "
            f"but it is only known up to {known}"
        )
    window = lattice_box(rho, d, settings)
    size = len(window)
    if size * size > settings.max_lattice_points:
        raise ResourceCapExceeded(f"Too many pairs on the window of radius {rho}: {size}^2")

    span = 2 * rho
    log_w = (-exponent * weight.log_values(lattice_box(span, d, settings))).reshape(
        (2 * span + 1,) * d
    )
    flat_w = log_w.ravel()
    own = flat_w[np.ravel_multi_index(tuple((window + span).T), log_w.shape)]

    best = -np.inf
    best_pair = (0, 0)
    # rows in chunks to bound the memory of the pair arrays
    chunk = max(1, (1 << 20) // size)
    for start in range(0, size, chunk):
        rows = window[start : start + chunk]
        sums = rows[:, None, :] + window[None, :, :]
        index = np.ravel_multi_index(tuple(np.moveaxis(sums + span, -1, 0)), log_w.shape)
        combined = flat_w[index]
        left = own[start : start + chunk, None]
        right = own[None, :]
        if condition == "subadditivity":
            ratios = combined - np.logaddexp(left, right)
        else:
            ratios = combined - left - right
        position = np.unravel_index(np.argmax(ratios), ratios.shape)
        if ratios[position] > best:
            best = float(ratios[position])
            best_pair = (start + position[0], position[1])

    argmax = (FreqVector(window[best_pair[0]]), FreqVector(window[best_pair[1]]))
    return WindowConstantReport(
        weight=weight,
        condition=condition,
        exponent=exponent,
        window=rho,
        constant=math.exp(best),
        argmax=argmax,
    )


def subadditivity_report(weight, rho, exponent=1.0, settings=DEFAULT_SETTINGS):
    """
    Return a WindowConstantReport with the max over ``|g|_inf, |h|_inf <= rho``
    of ``w(g + h) / (w(g) + w(h))`` for ``w = lambda^(-exponent)``.

    >>> from pyrkha.weights import PolynomialDecay
    >>> report = subadditivity_report(PolynomialDecay(s=2), 8)
    >>> 0 < report.constant < 4
    True
    """
    return _pairs_report(weight, rho, exponent, "subadditivity", settings)


def submultiplicativity_report(weight, rho, exponent=0.5, settings=DEFAULT_SETTINGS):
    """
    Return a WindowConstantReport with the max over ``|g|_inf, |h|_inf <= rho``
    of ``w(g + h) / (w(g) w(h))`` for ``w = lambda^(-exponent)``.
    """
    return _pairs_report(weight, rho, exponent, "submultiplicativity", settings)


def square_preserves_subconvolutivity(xi, rho, tol=None, settings=DEFAULT_SETTINGS):
    """
    Return a SquareReport checking on the window that the weight ``xi^2`` is
    subconvolutive with a constant at most the square of the constant of
    ``xi``, within ``1 + tol``.
    """
    if tol is None:
        tol = settings.stabilization_tol
    xi_report = subconvolutivity_report(xi, rho, tol=tol, settings=settings)
    square_report = subconvolutivity_report(xi.square(), rho, tol=tol, settings=settings)
    if not (xi_report.is_certified and square_report.is_certified):
        return SquareReport(xi_report, square_report, holds=None, verdict=INCONCLUSIVE)
    holds = square_report.constant <= xi_report.constant**2 * (1 + tol)
    return SquareReport(xi_report, square_report, holds=holds, verdict=CERTIFIED)
