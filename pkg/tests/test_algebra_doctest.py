# SPDX-License-Identifier: Apache-2.0
# Copyright (C) nexB Inc. and others
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
# See https://github.com/aboutcode-org/pyrkha for support or download.
# See https://aboutcode.org for more information about nexB OSS projects.
"""
=====================
 Band-limited algebra
=====================

    >>> from pyrkha.algebra import FourierPoly
    >>> from pyrkha.algebra import evaluate
    >>> from pyrkha.algebra import hnorm
    >>> from pyrkha.algebra import involution
    >>> from pyrkha.algebra import invert
    >>> from pyrkha.algebra import multiply
    >>> from pyrkha.algebra import spectrum_probe
    >>> from pyrkha.algebra import sqrt_positive
    >>> from pyrkha.weights import PolynomialDecay

Elements are finitely supported Fourier coefficients with a weight. The
function ``2 cos(2 pi x)`` has two coefficients:

    >>> weight = PolynomialDecay(s=2)
    >>> cosine = FourierPoly({(1,): 1, (-1,): 1}, weight)
    >>> cosine.bandwidth, cosine.is_real()
    (1, True)
    >>> evaluate(cosine, [0.0])
    (2+0j)
    >>> abs(evaluate(cosine, [0.25])) < 1e-12
    True

The norm divides each squared coefficient by the weight, here ``(1 + 1)^-2``:

    >>> round(hnorm(cosine) ** 2, 12)
    8.0

Products convolve the coefficients:

    >>> square = multiply(cosine, cosine)
    >>> [(tuple(g), v.real) for g, v in sorted(square.coeffs.items())]
    [((-2,), 1.0), ((0,), 2.0), ((2,), 1.0)]
    >>> square == cosine * cosine
    True

The involution is the complex conjugate function:

    >>> involution(FourierPoly.character([1], weight)).coeffs
    {FreqVector((-1,)): (1+0j)}
    >>> involution(cosine) == cosine
    True


Inverses and square roots
=========================

``3 + 2 cos(2 pi x)`` never vanishes so it has an inverse with geometrically
decaying coefficients:

    >>> shifted = cosine + FourierPoly.constant(3, weight)
    >>> result = invert(shifted, 32)
    >>> result.converged
    True
    >>> hnorm(multiply(shifted, result.value) - FourierPoly.one(weight)) < 1e-10
    True

It is also strictly positive so it has a positive square root:

    >>> root = sqrt_positive(shifted, 32)
    >>> root.converged
    True
    >>> hnorm(multiply(root.value, root.value) - shifted) < 1e-10
    True
    >>> root.value.is_real()
    True


Spectrum
========

The spectrum of a real function is its range, ``[-2, 2]`` for the cosine:

    >>> spectrum_probe(cosine, 0, 32).invertible
    False
    >>> spectrum_probe(cosine, 3, 32).invertible
    True
    >>> spectrum_probe(cosine, 3j, 32).invertible
    True

"""
