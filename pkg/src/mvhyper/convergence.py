"""Radius-of-convergence classification and the unit-circle certificate.

The series built from n numerator and m denominator matrices behaves like
its scalar counterpart: entire for n <= m, radius 1 for n = m + 1, and
divergent away from the origin for n > m + 1. On the unit circle itself a
sufficient condition for absolute convergence is that every denominator
matrix is Hermitian with spectrum clear of the nonpositive integers and
that the denominator spectra dominate the numerator norms.
"""

import enum
import io
from dataclasses import dataclass

import numpy as np

from .matcore import DEFAULT_TOL, rho_delta, spectral_norm


class RadiusClass(enum.Enum):
    ENTIRE = "entire"
    UNIT_DISK = "unit_disk"
    DIVERGENT_OUTSIDE_ZERO = "divergent_outside_zero"


def classify_radius(n, m):
    """Convergence region of the series as a function of (n, m) alone."""
    if n < 0 or m < 0:
        raise ValueError("n and m must be nonnegative")
    if n <= m:
        return RadiusClass.ENTIRE
    if n == m + 1:
        return RadiusClass.UNIT_DISK
    return RadiusClass.DIVERGENT_OUTSIDE_ZERO


@dataclass(frozen=True)
class ConvergenceCertificate:
    """Outcome of the unit-circle absolute-convergence test.

    ``gap`` is half the margin by which the summed minimal real parts of
    the denominator spectra exceed the summed numerator norms. The
    certificate is only granted for a strictly positive margin; an exact
    tie (within tolerance) is reported through ``boundary`` instead,
    because the decay estimate behind the certificate degenerates there.
    """

    satisfied: bool
    boundary: bool
    gap: float
    delta_sum: float
    norm_sum: float
    hermitian_check: tuple
    pole_free: bool


def unit_circle_certificate(params, tol=DEFAULT_TOL):
    """Test absolute convergence of the series on |z| = 1.

    Checks, for a family with n = m + 1:
      1. every denominator matrix is Hermitian (so it is unitarily
         diagonalizable with real eigenvalues),
      2. no denominator eigenvalue sits in {0, -1, -2, ...},
      3. sum of delta(B_k) strictly exceeds sum of ||A_i||.
    Failure is a data outcome, never an exception.
    """
    if params.n != params.m + 1:
        raise ValueError(
            f"certificate applies to n = m + 1 families only, "
            f"got n={params.n}, m={params.m}"
        )
    hermitian = tuple(
        bool(spectral_norm(b - b.conj().T) <= tol * max(spectral_norm(b), 1e-300))
        for b in params.denominator
    )
    pole_free = not params.denominator_poles
    delta_sum = float(sum(rho_delta(b).delta for b in params.denominator))
    norm_sum = float(sum(spectral_norm(a) for a in params.numerator))
    margin = delta_sum - norm_sum
    scale = max(1.0, abs(delta_sum) + abs(norm_sum))
    clean = all(hermitian) and pole_free
    boundary = clean and abs(margin) <= tol * scale
    satisfied = clean and margin > tol * scale
    return ConvergenceCertificate(
        satisfied=satisfied,
        boundary=boundary,
        gap=margin / 2.0,
        delta_sum=delta_sum,
        norm_sum=norm_sum,
        hermitian_check=hermitian,
        pole_free=pole_free,
    )


MAX_PROBE_TERMS = 10**6


@dataclass(frozen=True)
class ProbeTrace:
    """Partial-sum and term-norm history of a boundary evaluation.

    ``weighted_term_norms[J]`` is ``term_norms[J] * J**(1 + lambda_weight)``,
    a diagnostic for the power-law decay the certificate predicts.
    """

    term_norms: np.ndarray
    partial_sum_norms: np.ndarray
    weighted_term_norms: np.ndarray
    lambda_weight: float

    def to_csv(self):
        """Render as a comma-separated table (J, partial-sum norm, term norm,
        weighted term norm)."""
        out = io.StringIO()
        out.write("J,partial_sum_norm,term_norm,weighted_term_norm\n")
        for j in range(len(self.term_norms)):
            out.write(
                f"{j},{self.partial_sum_norms[j]:.17g},"
                f"{self.term_norms[j]:.17g},{self.weighted_term_norms[j]:.17g}\n"
            )
        return out.getvalue()


def boundary_probe(params, z_on_circle, max_terms, lambda_weight=0.0):
    """Empirically trace the series on the unit circle.

    Sums ``max_terms`` terms at the given point (which must satisfy
    |z| = 1 up to 1e-9) and records the norm of every term and every
    partial sum. No convergence acceleration or extrapolation is done;
    if the trace has not settled the numbers say so. ``max_terms`` is
    capped at one million.
    """
    from .hyperfn import PoleInParameters, SymbolSequence

    if params.n != params.m + 1:
        raise ValueError("boundary probe applies to n = m + 1 families only")
    z = complex(z_on_circle)
    if abs(abs(z) - 1.0) > 1e-9:
        raise ValueError(f"|z| must be 1, got {abs(z)!r}")
    if params.denominator_poles:
        raise PoleInParameters(params.denominator_poles[0])
    max_terms = min(int(max_terms), MAX_PROBE_TERMS)

    seq = SymbolSequence(params)
    r = params.dim
    acc = np.zeros((r, r), dtype=complex)
    zpow = complex(1.0)
    term_norms = np.empty(max_terms)
    partial_norms = np.empty(max_terms)
    weighted = np.empty(max_terms)
    stream = seq.iter_weighted()
    for j in range(max_terms):
        term = next(stream) * zpow
        acc = acc + term
        tn = _norm(term)
        term_norms[j] = tn
        partial_norms[j] = _norm(acc)
        weighted[j] = 0.0 if j == 0 else tn * j ** (1.0 + lambda_weight)
        zpow *= z
    return ProbeTrace(
        term_norms=term_norms,
        partial_sum_norms=partial_norms,
        weighted_term_norms=weighted,
        lambda_weight=float(lambda_weight),
    )


def _norm(a):
    # spectral norm, with the 1x1 case short-circuited for probe speed
    if a.shape == (1, 1):
        return abs(a[0, 0])
    return float(np.linalg.svd(a, compute_uv=False)[0])
