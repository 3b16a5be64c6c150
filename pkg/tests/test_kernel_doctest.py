# SPDX-License-Identifier: Apache-2.0
# Copyright (C) nexB Inc. and others
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
# See https://github.com/aboutcode-org/pyrkha for support or download.
# See https://aboutcode.org for more information about nexB OSS projects.
"""
==================================
 Kernels and mean embeddings
==================================

    >>> import numpy as np
    >>> from pyrkha.algebra import FourierPoly
    >>> from pyrkha.algebra import evaluate
    >>> from pyrkha.algebra import inner
    >>> from pyrkha.embedding import AtomicMeasure
    >>> from pyrkha.embedding import expect
    >>> from pyrkha.embedding import mmd
    >>> from pyrkha.kernel import kernel_eval
    >>> from pyrkha.kernel import section_as_poly
    >>> from pyrkha.weights import Subexponential

Kernel values come with a certified truncation error bound from the tail of
the weight outside of the box:

    >>> weight = Subexponential(tau=1, p=0.5)
    >>> value = kernel_eval(weight, [0.2], [0.7], 64)
    >>> value.error == weight.tail_mass(64).bound
    True
    >>> value.lower < value.value < value.upper
    True

Kernel sections reproduce point values:

    >>> f = FourierPoly.random(weight, 4, np.random.default_rng(42))
    >>> section = section_as_poly(weight, [0.3], 8)
    >>> abs(inner(section, f) - evaluate(f, [0.3])) < 1e-12
    True

Expectations under an atomic measure agree when computed directly or through
the mean embedding:

    >>> nu = AtomicMeasure([([0.1], 0.25), ([0.6], 0.75)])
    >>> expect(nu, f).discrepancy < 1e-12
    True

The maximum mean discrepancy separates distinct measures:

    >>> mmd(nu, nu, weight, 16)
    0.0
    >>> mmd(nu, AtomicMeasure.dirac([0.1]), weight, 16) > 0
    True

"""
