# SPDX-License-Identifier: Apache-2.0
# Copyright (C) nexB Inc. and others
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
# See https://github.com/aboutcode-org/pyrkha for support or download.
# See https://aboutcode.org for more information about nexB OSS projects.
#

"""
Markov families of weights ``lambda_t(g) = exp(-t eta(g))``.

The generator symbol ``eta`` vanishes only at 0 and is symmetric. Then
``lambda_t(0) = 1``, ``lambda_t lambda_s = lambda_(t+s)`` and the kernels
``k_t(x, .)`` are transition densities of a Markov semigroup on the torus
whose generator acts on characters by ``D g = eta(g) g``. With
``eta(g) = |g|^p`` this is the fractional diffusion of order ``p``.

>>> family = MarkovFamily(p=1)
>>> family.weight_at(2.0)
Subexponential(tau=2.0, p=1.0, d=1, norm='euclidean')
"""

import math
import os

import attr
import numpy as np

from pyrkha import DEFAULT_SETTINGS
from pyrkha import InvalidWeight
from pyrkha import UnsupportedOperation
from pyrkha import get_logger_debug
from pyrkha.algebra import FourierPoly
from pyrkha.kernel import apply_K
from pyrkha.kernel import section_as_poly
from pyrkha.torus import FreqVector
from pyrkha.torus import NORMS
from pyrkha.torus import lattice_box
from pyrkha.torus import lattice_norms
from pyrkha.weight_analysis import CERTIFIED
from pyrkha.weight_analysis import INCONCLUSIVE
from pyrkha.weight_analysis import subconvolutivity_report
from pyrkha.weights import Custom
from pyrkha.weights import Subexponential

TRACE = bool(os.environ.get("PYRKHA_TRACE"))

logger_debug = get_logger_debug(__name__)

CERTIFIED_POSITIVE = "certified-positive"
POSITIVE_WITHIN_TRUNCATION = "positive-within-truncation"
NEGATIVE = "negative"

# slack on the grid min of a truncated kernel below minus its tail
POSITIVITY_TOLERANCE = 1e-9


def _check_tau(tau):
    if not tau > 0:
        raise InvalidWeight(f"Markov time must be positive: {tau!r}")
    return float(tau)


@attr.s(frozen=True, slots=True)
class MarkovFamily:
    """
    The catalog family with ``eta(g) = |g|^p`` for ``0 < p <= 1``.
    """

    p = attr.ib(converter=float)
    d = attr.ib(default=1)
    norm = attr.ib(default="euclidean")

    def __attrs_post_init__(self):
        if not 0 < self.p <= 1:
            raise InvalidWeight(f"Markov exponent p must be in (0, 1]: {self.p}")
        if self.norm not in NORMS:
            raise InvalidWeight(f"Unknown lattice norm: {self.norm!r}")

    def eta(self, gammas):
        """
        Return an array of ``eta(g)`` for each row of ``gammas``.
        """
        return np.power(lattice_norms(gammas, self.norm), self.p)

    def weight_at(self, tau):
        """
        Return the weight ``lambda_tau``.
        """
        return Subexponential(tau=_check_tau(tau), p=self.p, d=self.d, norm=self.norm)

    def to_dict(self):
        return dict(family="markov", p=self.p, d=self.d, norm=self.norm)


@attr.s(frozen=True)
class CustomMarkovFamily:
    """
    A family from an ``eta`` table on the full box ``|g|_inf <= box`` and a
    ``tail`` callable returning, for a time ``tau``, a certified bound of the
    sum of ``lambda_tau`` outside of the box.

    >>> family = CustomMarkovFamily({(-1,): 1.0, (0,): 0.0, (1,): 1.0}, lambda tau: 0.0)
    >>> family.weight_at(1.0).evaluate([1]) == math.exp(-1)
    True
    """

    table = attr.ib(converter=lambda t: dict(t.items() if hasattr(t, "items") else t))
    tail = attr.ib(eq=False)

    def __attrs_post_init__(self):
        table = {FreqVector(np.atleast_1d(g)): float(v) for g, v in self.table.items()}
        zero = FreqVector.zero(len(next(iter(table))))
        if table.get(zero) != 0:
            raise InvalidWeight("Generator symbol must vanish at 0")
        for gamma, value in table.items():
            if gamma != zero and not value > 0:
                raise InvalidWeight(f"Generator symbol must be positive off 0: {gamma!r}")
            if table.get(-gamma) != value:
                raise InvalidWeight(f"Generator symbol must be symmetric: {gamma!r}")
        object.__setattr__(self, "table", table)

    @property
    def d(self):
        return len(next(iter(self.table)))

    def eta(self, gammas):
        try:
            return np.array([self.table[FreqVector(g)] for g in np.atleast_2d(gammas)])
        except KeyError as e:
            raise UnsupportedOperation(f"Generator symbol is unknown at {e}") from e

    def weight_at(self, tau):
        tau = _check_tau(tau)
        table = [(g, math.exp(-tau * v)) for g, v in self.table.items()]
        return Custom(table, tail=self.tail(tau))

    def to_dict(self):
        return dict(family="custom-markov", d=self.d, box=max(max(map(abs, g)) for g in self.table))


@attr.s(frozen=True, slots=True)
class MarkovReport:
    tau = attr.ib()
    tau_prime = attr.ib()
    radius = attr.ib()
    # min over the grid of the truncated k_tau(0, .)
    grid_min = attr.ib()
    # certified tail of lambda_tau outside of the box
    tail = attr.ib()
    # |lambda_tau(0) - 1|: the integral of k_tau(x, .) minus 1
    mass_defect = attr.ib()
    # max of |lambda_tau lambda_tau' - lambda_(tau+tau')| on the box
    semigroup_defect = attr.ib()
    positivity = attr.ib()

    def to_dict(self):
        return attr.asdict(self)


def markov_checks(family, tau, n, radius, tau_prime=None, settings=DEFAULT_SETTINGS):
    """
    Return a MarkovReport checking that ``k_tau(x, .)`` is a transition
    density: nonnegative on the ``n`` grid and of mass 1, and that the
    weights compose as a semigroup on the box of ``radius``.

    >>> report = markov_checks(MarkovFamily(p=1), 1.0, 64, 32)
    >>> report.mass_defect, report.positivity
    (0.0, 'certified-positive')
    """
    tau = _check_tau(tau)
    tau_prime = tau if tau_prime is None else _check_tau(tau_prime)
    weight = family.weight_at(tau)
    d = weight.d
    known = weight.known_radius
    box = radius if known is None else min(radius, known)

    kernel = section_as_poly(weight, [0.0] * d, box, settings)
    grid_min = kernel.pointwise_grid_min(n, settings)
    tail = weight.tail_mass(box, settings=settings).bound
    mass_defect = abs(weight.evaluate([0] * d) - 1.0)

    gammas = lattice_box(box, d, settings)
    composed = weight.values(gammas) * family.weight_at(tau_prime).values(gammas)
    direct = family.weight_at(tau + tau_prime).values(gammas)
    semigroup_defect = float(np.max(np.abs(composed - direct)))

    if grid_min > tail:
        positivity = CERTIFIED_POSITIVE
    elif grid_min >= -tail - POSITIVITY_TOLERANCE:
        positivity = POSITIVE_WITHIN_TRUNCATION
    else:
        positivity = NEGATIVE

    return MarkovReport(
        tau=tau,
        tau_prime=tau_prime,
        radius=box,
        grid_min=grid_min,
        tail=tail,
        mass_defect=mass_defect,
        semigroup_defect=semigroup_defect,
        positivity=positivity,
    )


@attr.s(frozen=True, slots=True)
class MarkovSweep:
    """
    Subconvolutivity reports of ``lambda_tau`` for each time of a sweep and
    the max error of the identity ``lambda_tau^(1/2) = lambda_(tau/2)`` on the
    window.
    """

    taus = attr.ib()
    reports = attr.ib()
    xi_identity_error = attr.ib()

    @property
    def verdict(self):
        if all(r.is_certified for r in self.reports):
            return CERTIFIED
        return INCONCLUSIVE

    def to_dict(self):
        return dict(
            taus=list(self.taus),
            reports=[r.to_dict() for r in self.reports],
            xi_identity_error=self.xi_identity_error,
            verdict=self.verdict,
        )


def markov_subconvolutivity_sweep(family, taus, rho, tol=None, settings=DEFAULT_SETTINGS):
    """
    Return a MarkovSweep with a subconvolutivity report of ``lambda_tau`` on
    the window of radius ``rho`` for each time in ``taus``, in order.
    """
    reports = []
    xi_error = 0.0
    window = lattice_box(rho, family.d, settings)
    for tau in taus:
        weight = family.weight_at(tau)
        report = subconvolutivity_report(weight, rho, tol=tol, settings=settings)
        if TRACE:
            logger_debug("markov_subconvolutivity_sweep: tau:", tau, "verdict:", report.verdict)
        reports.append(report)
        xi = np.sqrt(weight.values(window))
        half = family.weight_at(tau / 2).values(window)
        xi_error = max(xi_error, float(np.max(np.abs(xi - half))))
    return MarkovSweep(taus=tuple(taus), reports=tuple(reports), xi_identity_error=xi_error)


@attr.s(frozen=True, slots=True)
class GeneratorSpectrum:
    """
    The eigenvalues ``eta(g)`` of the generator on a box.
    """

    # tuple of (FreqVector, eta) in lexicographic order
    eigenvalues = attr.ib()
    # max over the box of |-log(lambda_1) - (-log(lambda_2) / 2)|
    tau_independence_error = attr.ib()
    # True if 0 is the only frequency of the box with eta == 0
    simple_zero = attr.ib()

    def to_dict(self):
        return dict(
            eigenvalues=[dict(gamma=list(g), eta=e) for g, e in self.eigenvalues],
            tau_independence_error=self.tau_independence_error,
            simple_zero=self.simple_zero,
        )


def generator_eigs(family, radius, settings=DEFAULT_SETTINGS):
    """
    Return a GeneratorSpectrum with ``eta(g) = -log(lambda_t(g)) / t`` on the
    box of ``radius``.

    >>> spectrum = generator_eigs(MarkovFamily(p=1), 2)
    >>> [e for _, e in spectrum.eigenvalues]
    [2.0, 1.0, 0.0, 1.0, 2.0]
    >>> spectrum.simple_zero
    True
    """
    gammas = lattice_box(radius, family.d, settings)
    eta = family.eta(gammas)
    from_one = -family.weight_at(1.0).log_values(gammas)
    from_two = -family.weight_at(2.0).log_values(gammas) / 2
    independence = float(np.max(np.abs(from_one - from_two)))
    simple_zero = int(np.count_nonzero(eta == 0)) == 1
    eigenvalues = tuple((FreqVector(g), float(e)) for g, e in zip(gammas, eta))
    return GeneratorSpectrum(
        eigenvalues=eigenvalues,
        tau_independence_error=independence,
        simple_zero=simple_zero,
    )


def apply_generator(family, f):
    """
    Return ``D f``: the coefficient of ``g`` multiplied by ``eta(g)``.
    """
    if not len(f):
        return f
    return FourierPoly.from_arrays(f.gammas, f.values * family.eta(f.gammas), f.weight)


def heat_flow(family, tau, f):
    """
    Return ``K_tau f = exp(-tau D) f``.
    """
    return apply_K(family.weight_at(tau), f)
