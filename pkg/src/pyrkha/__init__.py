# SPDX-License-Identifier: Apache-2.0
# Copyright (C) nexB Inc. and others
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
# See https://github.com/aboutcode-org/pyrkha for support or download.
# See https://aboutcode.org for more information about nexB OSS projects.
#

"""
pyrkha: reproducing kernel Hilbert algebras on the d-torus built from
subconvolutive weights on the integer lattice.

This top level module holds what every other module shares: the exception
hierarchy, the numeric ``Settings`` and a tracing helper.

>>> from pyrkha import DEFAULT_SETTINGS
>>> DEFAULT_SETTINGS.oversample
4
>>> DEFAULT_SETTINGS.evolve(oversample=8).oversample
8
"""

import logging
import os
import sys

import attr


class RkhaError(Exception):
    """
    Base class for all pyrkha errors.
    """


class DimensionMismatch(RkhaError, ValueError):
    """
    Raise when a frequency, point or element does not have the expected
    dimension.
    """


class WeightMismatch(RkhaError, ValueError):
    """
    Raise when two elements living in different spaces are combined.
    """


class InvalidWeight(RkhaError, ValueError):
    """
    Raise when a weight is not strictly positive, not symmetric, not summable
    or has parameters out of range.
    """


class UnsupportedOperation(RkhaError):
    """
    Raise when an operation is not available for a weight or an element, such
    as the tail of a Custom weight without a declared tail.
    """


class ResourceCapExceeded(RkhaError):
    """
    Raise when a computation would exceed one of the configured size caps.
    """


class NotInvertible(RkhaError):
    """
    Raise when an element (nearly) vanishes somewhere on the torus.
    """


class DomainError(RkhaError, ValueError):
    """
    Raise when a square root is requested for an element that is not real and
    strictly positive.
    """


class InconclusiveReport(RkhaError):
    """
    Raise when a certified constant is requested from an inconclusive report.
    """


class SupportTooLarge(RkhaError, ValueError):
    """
    Raise when an element has Fourier support outside of the box used by a
    kernel section or a mean embedding.
    """


def _positive(instance, attribute, value):
    if not value > 0:
        raise ValueError(f"Settings.{attribute.name} must be positive: {value!r}")


@attr.s(frozen=True, slots=True)
class Settings:
    """
    Numeric policy knobs: size caps, thresholds and iteration limits.
    """

    max_lattice_points = attr.ib(
        default=2**24,
        validator=_positive,
        metadata=dict(help="Cap on the number of lattice points of a (2R+1)^d box."),
    )
    max_grid_points = attr.ib(
        default=2**22,
        validator=_positive,
        metadata=dict(help="Cap on the number of points of a n^d torus grid."),
    )
    max_support_size = attr.ib(
        default=2**22,
        validator=_positive,
        metadata=dict(help="Cap on the Fourier support size of a product."),
    )
    max_radius = attr.ib(
        default=2**20,
        validator=_positive,
        metadata=dict(help="Largest radius tried when searching a truncation radius."),
    )
    max_convolution_radius = attr.ib(
        default=2**15,
        validator=_positive,
        metadata=dict(help="Largest radius tried when certifying convolutions."),
    )
    tail_explicit_shells = attr.ib(
        default=2048,
        validator=_positive,
        metadata=dict(help="Shells summed exactly before an integral tail comparison."),
    )
    oversample = attr.ib(
        default=4,
        validator=_positive,
        metadata=dict(help="Grid resolution factor relative to a bandwidth."),
    )
    vanishing_threshold = attr.ib(
        default=1e-8,
        validator=_positive,
        metadata=dict(help="Grid minimum of |f| below which f is not invertible."),
    )
    spectrum_distance = attr.ib(
        default=1e-6,
        validator=_positive,
        metadata=dict(help="Distance to a sampled value below which z is in the range."),
    )
    newton_max_iterations = attr.ib(
        default=100,
        validator=_positive,
        metadata=dict(help="Maximum number of Newton iterations."),
    )
    newton_min_step = attr.ib(
        default=2**-20,
        validator=_positive,
        metadata=dict(help="Smallest damping factor tried before a Newton run stops."),
    )
    stabilization_tol = attr.ib(
        default=1e-6,
        validator=_positive,
        metadata=dict(help="Relative change of a window maximum considered stable."),
    )
    stabilization_repeats = attr.ib(
        default=2,
        validator=_positive,
        metadata=dict(help="Consecutive stable doublings required for a certificate."),
    )
    point_tolerance = attr.ib(
        default=1e-12,
        validator=_positive,
        metadata=dict(help="Tolerance for torus point equality and imaginary parts."),
    )
    psd_tolerance = attr.ib(
        default=1e-9,
        validator=_positive,
        metadata=dict(help="Absolute floor for Gram matrix eigenvalues."),
    )
    direct_convolution_limit = attr.ib(
        default=2**24,
        validator=_positive,
        metadata=dict(help="Above this product of sizes, convolutions use FFT."),
    )

    def evolve(self, **changes):
        """
        Return a new Settings with ``changes`` applied.
        """
        return attr.evolve(self, **changes)

    def to_dict(self):
        return attr.asdict(self)

    @classmethod
    def from_dict(cls, mapping):
        """
        Return Settings built from a ``mapping`` of field names to values.
        Unknown field names raise a ValueError.
        """
        known = {a.name for a in attr.fields(cls)}
        unknown = sorted(set(mapping) - known)
        if unknown:
            raise ValueError(f"Unknown settings: {', '.join(unknown)}")
        return cls(**mapping)


DEFAULT_SETTINGS = Settings()


def get_logger_debug(name):
    """
    Return a ``logger_debug(*args)`` callable for the module ``name``. It does
    nothing unless the PYRKHA_TRACE environment variable is set.
    """
    if not os.environ.get("PYRKHA_TRACE"):

        def logger_debug(*args):
            pass

        return logger_debug

    logger = logging.getLogger(name)
    logging.basicConfig(stream=sys.stdout)
    logger.setLevel(logging.DEBUG)

    def logger_debug(*args):
        return logger.debug(" ".join(isinstance(a, str) and a or repr(a) for a in args))

    return logger_debug
