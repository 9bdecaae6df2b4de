"""Matrix symbol recursion and series evaluation.

A parameter family (A_1..A_n; B_1..B_m) of r x r complex matrices defines
a sequence of matrix coefficients, the symbol, by

    S_0 = I,
    S_{j+1} = (B_m + j)^-1 ... (B_1 + j)^-1 (A_1 + j) ... (A_n + j) S_j,

where each parameter may additionally carry a common complex shift p. The
written factor order is normative: matrices do not commute. The series

    sum_j  z^j / j!        * S_j          (unshifted)
    sum_j  z^j / (p+1)_j   * S_j(p)       (shifted by p)

generalizes the scalar hypergeometric series, whose classical term ratios
and radii it inherits.
"""

from dataclasses import dataclass

import numpy as np

from .convergence import RadiusClass, classify_radius
from .matcore import (
    DEFAULT_TOL,
    as_complex_matrix,
    eigenvalues,
    identity,
    inverse,
)

POLE_TOL = 1e-9


class PoleInParameters(Exception):
    """A denominator matrix has an eigenvalue at a nonpositive integer
    (relative to the active shift), so some recursion step is singular."""

    def __init__(self, record):
        self.denominator_index = record.denominator_index
        self.eigenvalue = record.eigenvalue
        self.step = record.step
        super().__init__(
            f"denominator[{record.denominator_index}] has eigenvalue "
            f"{record.eigenvalue} making step j={record.step} of the "
            f"recursion singular"
        )


class ShiftPoleViolation(Exception):
    """The requested shift p collides with the forbidden set
    (spectrum of a denominator matrix + {0,1,2,...}) or with {1,2,...}."""

    def __init__(self, clause, message):
        self.clause = clause
        super().__init__(message)


class RadiusViolation(Exception):
    """z lies outside the region where the series is guaranteed to
    converge for this (n, m)."""

    def __init__(self, verdict, z):
        self.verdict = verdict
        self.z = z
        super().__init__(
            f"|z| = {abs(z)!r} is outside the guaranteed region for "
            f"verdict {verdict.value}"
        )


class NoConvergence(Exception):
    """The truncation policy did not trigger within max_terms.

    The partial result accumulated so far is attached as ``result``
    with ``converged=False``.
    """

    def __init__(self, result):
        self.result = result
        super().__init__(
            f"series did not meet tolerance within {result.terms_used} terms "
            f"(last truncation bound {result.truncation_bound:.3e})"
        )


@dataclass(frozen=True)
class PoleRecord:
    """One denominator eigenvalue that hits a nonpositive integer: the
    recursion factor (B_k + shift + step) is singular."""

    denominator_index: int
    eigenvalue: complex
    step: int


class HypergeometricParams:
    """The parameter tuple (A_1..A_n; B_1..B_m) of one function family.

    All matrices must share one dimension r; pass ``dim`` explicitly when
    both lists are empty. Denominator eigenvalues near {0, -1, -2, ...}
    are detected at construction and recorded in ``denominator_poles``
    rather than silently ignored; evaluation refuses such families.

    Instances are immutable (the stored arrays are read-only) and safe to
    share across threads.
    """

    def __init__(self, numerator=(), denominator=(), dim=None):
        num = tuple(
            as_complex_matrix(a, f"numerator[{i}]") for i, a in enumerate(numerator)
        )
        den = tuple(
            as_complex_matrix(b, f"denominator[{k}]")
            for k, b in enumerate(denominator)
        )
        dims = {a.shape[0] for a in num} | {b.shape[0] for b in den}
        if len(dims) > 1:
            raise ValueError(f"parameter matrices disagree on dimension: {sorted(dims)}")
        if dims:
            inferred = dims.pop()
            if dim is not None and dim != inferred:
                raise ValueError(f"dim={dim} contradicts matrices of dimension {inferred}")
            dim = inferred
        elif dim is None:
            raise ValueError("dim is required when there are no parameter matrices")
        for a in num + den:
            a.setflags(write=False)
        self.numerator = num
        self.denominator = den
        self.dim = int(dim)
        self.denominator_spectra = tuple(
            eigenvalues(b).eigenvalues for b in den
        )
        for spec in self.denominator_spectra:
            spec.setflags(write=False)
        self.denominator_poles = self.pole_records(0.0)

    @property
    def n(self):
        return len(self.numerator)

    @property
    def m(self):
        return len(self.denominator)

    @property
    def admissible(self):
        """True when no denominator eigenvalue is a nonpositive integer."""
        return not self.denominator_poles

    @classmethod
    def from_scalars(cls, numerator=(), denominator=()):
        """Build an r=1 family from plain complex numbers."""
        return cls(
            numerator=[np.array([[complex(a)]]) for a in numerator],
            denominator=[np.array([[complex(b)]]) for b in denominator],
            dim=1,
        )

    def pole_records(self, shift):
        """Denominator eigenvalues mu with mu + shift at a nonpositive
        integer -step, i.e. recursion factor (B_k + shift + step) singular."""
        records = []
        shift = complex(shift)
        for k, spec in enumerate(self.denominator_spectra):
            for mu in spec:
                v = mu + shift
                step = round(-v.real)
                if step >= 0 and abs(v + step) <= POLE_TOL:
                    records.append(
                        PoleRecord(denominator_index=k, eigenvalue=complex(mu), step=step)
                    )
        return tuple(records)

    def shift_violations(self, p):
        """Clauses of the shifted-series precondition violated by p.

        Returns (clause, message) pairs: -p must avoid every set
        sigma(B_k) + {0,1,2,...} and the positive integers.
        """
        p = complex(p)
        violations = []
        for rec in self.pole_records(p):
            violations.append(
                (
                    "denominator_spectrum",
                    f"-p = {-p} hits sigma(denominator[{rec.denominator_index}]) "
                    f"+ {rec.step} (eigenvalue {rec.eigenvalue})",
                )
            )
        v = -p
        nearest = round(v.real)
        if nearest >= 1 and abs(v - nearest) <= POLE_TOL:
            violations.append(
                ("positive_integers", f"-p = {-p} is the positive integer {nearest}")
            )
        return violations


class SymbolSequence:
    """Lazily extended sequence of symbol terms for one family and shift.

    Terms are computed on demand and cached, so one sequence can back
    evaluations at many points. Extension is not thread safe; reading
    already computed terms is.

    ``term(j)`` is the raw symbol. In an n = m + 1 family its norm grows
    like j!, which overflows double precision near j = 170 even though
    the series terms stay bounded; long summations therefore work with
    ``weighted_term(j)``, the symbol divided by the rising factorial
    (shift+1)_j, whose recursion never forms the raw symbol.
    """

    def __init__(self, params, shift=0.0):
        self.params = params
        self.shift = complex(shift)
        first = identity(params.dim)
        first.setflags(write=False)
        self._terms = [first]
        self._weighted = [first]
        self._eye = identity(params.dim)
        self._pole_by_step = {}
        for rec in reversed(params.pole_records(self.shift)):
            self._pole_by_step[rec.step] = rec

    @property
    def terms(self):
        """Snapshot of the raw terms computed so far."""
        return list(self._terms)

    def __len__(self):
        return len(self._terms)

    def term(self, j):
        """The j-th raw symbol term, extending the recursion as needed."""
        if j < 0:
            raise ValueError("term index must be nonnegative")
        while len(self._terms) <= j:
            step = len(self._terms) - 1
            nxt = self._apply_step(self._terms[-1], step)
            nxt.setflags(write=False)
            self._terms.append(nxt)
        return self._terms[j]

    def weighted_term(self, j):
        """The j-th symbol divided by (shift+1)_j, cached like term()."""
        if j < 0:
            raise ValueError("term index must be nonnegative")
        while len(self._weighted) <= j:
            step = len(self._weighted) - 1
            nxt = self._apply_step(self._weighted[-1], step) / self._rising(step)
            nxt.setflags(write=False)
            self._weighted.append(nxt)
        return self._weighted[j]

    def iter_weighted(self):
        """Stream weighted terms without caching (for very long walks)."""
        current = identity(self.params.dim)
        step = 0
        while True:
            yield current
            current = self._apply_step(current, step) / self._rising(step)
            step += 1

    def _rising(self, step):
        factor = self.shift + 1 + step
        if abs(factor) < 1e-300:
            raise ShiftPoleViolation(
                "positive_integers",
                f"-shift = {-self.shift} is the positive integer {step + 1}, "
                f"so the series weight vanishes",
            )
        return factor

    def _apply_step(self, mat, step):
        if step in self._pole_by_step:
            raise PoleInParameters(self._pole_by_step[step])
        c = self.shift + step
        acc = mat
        for a in reversed(self.params.numerator):
            acc = (a + c * self._eye) @ acc
        for b in self.params.denominator:
            acc = inverse(b + c * self._eye) @ acc
        return acc


def symbol_sequence(params, shift=0.0, count=1):
    """Materialize ``count`` symbol terms; term 0 is the identity.

    Raises PoleInParameters when a shifted denominator eigenvalue makes a
    recursion step within range singular.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    seq = SymbolSequence(params, shift)
    seq.term(count - 1)
    return seq


@dataclass(frozen=True)
class EvaluationResult:
    """A summed series value.

    ``value`` is the matrix sum; right-multiply by a vector F_0 to get a
    vector solution. ``truncation_bound`` is the norm of the first
    neglected term; ``converged`` means the truncation policy triggered,
    in which case the bound is at most tol * max(1, ||value||).
    """

    value: np.ndarray
    terms_used: int
    truncation_bound: float
    converged: bool


def eval_nfm(params, z, tol=DEFAULT_TOL, max_terms=10000, allow_boundary=False,
             symbols=None):
    """Evaluate the matrix hypergeometric series at z.

    ``symbols`` may carry a SymbolSequence from a previous call (with
    shift 0) to reuse the recursion across evaluation points. For
    n = m + 1 the point must satisfy |z| < 1 unless ``allow_boundary``
    is set; for n > m + 1 only z = 0 is accepted.
    """
    if params.denominator_poles:
        raise PoleInParameters(params.denominator_poles[0])
    _check_radius(params, z, allow_boundary)
    seq = _resolve_sequence(params, 0.0, symbols)
    return _sum_series(seq, complex(z), tol, max_terms)


def eval_shifted_nfm(params, p, z, tol=DEFAULT_TOL, max_terms=10000,
                     allow_boundary=False, symbols=None):
    """Evaluate the shifted series: terms z^j / (p+1)_j times the symbol
    of the family with every parameter shifted by p.

    With p = 0 this reproduces eval_nfm exactly, bit for bit.
    """
    p = complex(p)
    violations = params.shift_violations(p)
    if violations:
        clause, message = violations[0]
        raise ShiftPoleViolation(clause, message)
    _check_radius(params, z, allow_boundary)
    seq = _resolve_sequence(params, p, symbols)
    return _sum_series(seq, complex(z), tol, max_terms)


def _resolve_sequence(params, shift, symbols):
    if symbols is None:
        return SymbolSequence(params, shift)
    if symbols.params is not params or symbols.shift != complex(shift):
        raise ValueError("symbols sequence does not match these parameters/shift")
    return symbols


def _check_radius(params, z, allow_boundary):
    verdict = classify_radius(params.n, params.m)
    az = abs(complex(z))
    if verdict is RadiusClass.ENTIRE:
        return verdict
    if verdict is RadiusClass.UNIT_DISK:
        limit_ok = az < 1.0 or (allow_boundary and az <= 1.0 + 1e-12)
        if not limit_ok:
            raise RadiusViolation(verdict, z)
        return verdict
    if az != 0.0:
        raise RadiusViolation(verdict, z)
    return verdict


def _sum_series(seq, z, tol, max_terms):
    """Shared series summation over weighted symbol terms.

    Terms are weighted_term(j) * z^j, the weight (shift+1)_j being folded
    into the recursion itself so nothing overflows over long walks. Stops
    after three consecutive terms fall below tol * max(1, ||partial
    sum||); matrix term norms need not decrease monotonically, so a
    single small term is not trusted.
    """
    r = seq.params.dim
    if z == 0:
        return EvaluationResult(
            value=identity(r), terms_used=1, truncation_bound=0.0, converged=True
        )
    if max_terms < 1:
        raise ValueError("max_terms must be at least 1")
    acc = np.zeros((r, r), dtype=complex)
    zpow = complex(1.0)
    small_run = 0
    j = 0
    while True:
        term = seq.weighted_term(j) * zpow
        acc = acc + term
        zpow *= z
        acc_norm = _norm(acc)
        if _norm(term) <= tol * max(1.0, acc_norm):
            small_run += 1
        else:
            small_run = 0
        j += 1
        if small_run >= 3:
            bound = _norm(seq.weighted_term(j)) * abs(zpow)
            return EvaluationResult(
                value=acc, terms_used=j, truncation_bound=bound, converged=True
            )
        if j >= max_terms:
            bound = _norm(seq.weighted_term(j)) * abs(zpow)
            raise NoConvergence(
                EvaluationResult(
                    value=acc, terms_used=j, truncation_bound=bound, converged=False
                )
            )


def _norm(a):
    if a.shape == (1, 1):
        return abs(a[0, 0])
    return float(np.linalg.svd(a, compute_uv=False)[0])
