"""Independent oracles for the test suite.

Everything here is deliberately computed by routes the library does not
use: direct per-term products instead of the cached recursion, plain
Python complex arithmetic instead of matrix operations, and
evaluation-interpolation instead of eigendecompositions. Tests compare
the library against these, never the other way round.
"""

import math

import numpy as np


def scalar_poch(w, j):
    """Rising factorial by direct product."""
    out = complex(1.0)
    for i in range(j):
        out *= complex(w) + i
    return out


def scalar_symbol(a_list, b_list, j, shift=0.0):
    """Scalar symbol term: products of shifted rising factorials."""
    num = complex(1.0)
    for a in a_list:
        num *= scalar_poch(complex(a) + complex(shift), j)
    den = complex(1.0)
    for b in b_list:
        den *= scalar_poch(complex(b) + complex(shift), j)
    return num / den


def scalar_nfm(a_list, b_list, z, max_terms=5000):
    """Direct summation of the scalar series, fresh products per term."""
    z = complex(z)
    total = complex(0.0)
    tiny_run = 0
    for j in range(max_terms):
        term = scalar_symbol(a_list, b_list, j) * z**j / math.factorial(j)
        total += term
        if abs(term) <= 1e-17 * max(1.0, abs(total)):
            tiny_run += 1
            if tiny_run >= 5:
                return total
        else:
            tiny_run = 0
    return total


def scalar_shifted_nfm(a_list, b_list, p, z, max_terms=5000):
    """Direct summation of the shifted scalar series."""
    z = complex(z)
    p = complex(p)
    total = complex(0.0)
    tiny_run = 0
    for j in range(max_terms):
        term = scalar_symbol(a_list, b_list, j, shift=p) * z**j / scalar_poch(p + 1, j)
        total += term
        if abs(term) <= 1e-17 * max(1.0, abs(total)):
            tiny_run += 1
            if tiny_run >= 5:
                return total
        else:
            tiny_run = 0
    return total


def random_unitary(rng, r):
    q, _ = np.linalg.qr(rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r)))
    return q


def random_admissible_denominator_value(rng):
    """A complex number safely clear of the nonpositive integers."""
    return complex(rng.uniform(0.3, 2.5), rng.uniform(-1.0, 1.0))


def random_scalar_family(rng, n, m):
    a_list = [
        complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.0, 1.0)) for _ in range(n)
    ]
    b_list = [random_admissible_denominator_value(rng) for _ in range(m)]
    return a_list, b_list


def interpolated_polynomial(values_fn, degree, radius):
    """Monic-degree polynomial coefficients from samples on a circle.

    Samples values_fn at degree+1 points radius * exp(2 pi i k / N) and
    recovers ascending coefficients with one FFT.
    """
    npts = degree + 1
    omega = radius * np.exp(2j * np.pi * np.arange(npts) / npts)
    values = np.array([values_fn(w) for w in omega])
    coeffs = np.fft.fft(values) / npts
    return coeffs / radius ** np.arange(npts)


def match_multisets(xs, ys, tol):
    """Greedy nearest matching of two equal-size complex multisets.

    Returns the largest pairing distance; raises if sizes differ.
    """
    xs = list(xs)
    ys = list(ys)
    if len(xs) != len(ys):
        raise AssertionError(f"multiset sizes differ: {len(xs)} vs {len(ys)}")
    worst = 0.0
    remaining = ys[:]
    for x in xs:
        dists = [abs(x - y) for y in remaining]
        idx = int(np.argmin(dists))
        worst = max(worst, dists[idx])
        remaining.pop(idx)
    if worst > tol:
        raise AssertionError(f"multisets differ by {worst:.3e} > {tol:.3e}")
    return worst
