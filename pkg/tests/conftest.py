"""Shared builders for the test suite."""

import numpy as np

from polytoep import LaurentSymbol


def scalar_symbol(n, terms):
    """1x1 symbol from a {exponent: complex} map."""
    return LaurentSymbol(n, 1, 1, {k: np.array([[v]]) for k, v in terms.items()})


def nilpotent_shift():
    """The 2x2 analytic symbol [[0, z], [0, 0]] on the disc."""
    return LaurentSymbol(1, 2, 2, {(1,): np.array([[0.0, 1.0], [0.0, 0.0]])})


def boundary_partial_isometry():
    """[[z/2, sqrt(3)/2], [0, 0]]: pointwise partial isometry on the circle."""
    return LaurentSymbol(1, 2, 2, {
        (0,): np.array([[0.0, np.sqrt(3.0) / 2.0], [0.0, 0.0]]),
        (1,): np.array([[0.5, 0.0], [0.0, 0.0]]),
    })


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_laurent(rng, n, dim_out, dim_in, degree, nterms=4):
    """Random symbol with exponents anywhere in [-degree, degree]^n."""
    terms = {}
    for _ in range(20 * nterms):
        if len(terms) >= nterms:
            break
        k = tuple(int(c) for c in rng.integers(-degree, degree + 1, size=n))
        terms[k] = crandn(rng, dim_out, dim_in)
    return LaurentSymbol(n, dim_out, dim_in, terms)


def random_analytic(rng, n, dim_out, dim_in, degree, nterms=4):
    terms = {(0,) * n: crandn(rng, dim_out, dim_in)}
    for _ in range(20 * nterms):
        if len(terms) >= nterms:
            break
        k = tuple(int(c) for c in rng.integers(0, degree + 1, size=n))
        terms[k] = crandn(rng, dim_out, dim_in)
    return LaurentSymbol(n, dim_out, dim_in, terms)
