"""Frobenius series solutions of the generalized matrix hypergeometric ODE.

In terms of the Euler operator D = z d/dz the equation reads

    D (D + B_1 - 1) ... (D + B_m - 1) F(z)
        = z (D + A_1) ... (D + A_n) F(z),

an equation of order max(n, m) for a C^r valued function. Substituting
F(z) = z^p sum_j F_j z^j turns it into the coefficient recursion

    (p + j + 1)(B_1 + p + j) ... (B_m + p + j) F_{j+1}
        = (A_1 + p + j) ... (A_n + p + j) F_j,

whose j = -1 row is the indicial condition
p (B_1 + p - 1) ... (B_m + p - 1) F_0 = 0. All verification here happens
in coefficient space, where the Euler operator acts exactly (it multiplies
F_j by p + j); no numerical differentiation is ever used.
"""

from dataclasses import dataclass

import numpy as np

from .hyperfn import POLE_TOL, PoleInParameters, SymbolSequence
from .matcore import DEFAULT_TOL, identity, kernel_basis

EIGENVALUE_MATCH_TOL = 1e-6


class ResonantExponent(Exception):
    """The requested eigenvalue beta hits the excluded set (beta = 1, a
    positive integer, or another denominator eigenvalue plus a positive
    integer), where the plain series construction breaks down."""

    def __init__(self, beta, clause):
        self.beta = beta
        self.clause = clause
        super().__init__(f"beta = {beta} rejected: {clause}")


class EmptyKernel(Exception):
    """The indicial matrix at the requested exponent has a numerically
    trivial kernel, so no series can be seeded."""


class HypothesisViolation(Exception):
    """The fundamental-set hypotheses fail; ``failures`` lists every
    violated condition."""

    def __init__(self, failures):
        self.failures = tuple(failures)
        super().__init__(
            "fundamental set hypotheses violated: " + "; ".join(self.failures)
        )


class HypergeometricEquation:
    """The ODE attached to one parameter family."""

    def __init__(self, params):
        if params.n == 0 and params.m == 0:
            raise ValueError("equation needs at least one parameter matrix")
        self.params = params

    @property
    def order(self):
        return max(self.params.n, self.params.m)

    @property
    def dim(self):
        return self.params.dim


@dataclass(frozen=True)
class SeriesSolution:
    """One Frobenius solution z^p sum_j F_j z^j.

    ``coefficients`` has shape (truncation, r); row j is F_j. Analytic
    solutions have exponent 0; non-analytic ones store the denominator
    eigenvalue beta they came from (exponent p = 1 - beta).
    """

    exponent: complex
    coefficients: np.ndarray
    kind: str
    beta: complex | None = None

    def __post_init__(self):
        if self.kind not in ("analytic", "nonanalytic"):
            raise ValueError(f"unknown solution kind {self.kind!r}")
        coeffs = np.array(self.coefficients, dtype=complex)
        if coeffs.ndim != 2:
            raise ValueError("coefficients must be a (terms, dim) array")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "exponent", complex(self.exponent))

    @property
    def truncation(self):
        return self.coefficients.shape[0]

    @property
    def dim(self):
        return self.coefficients.shape[1]

    def evaluate(self, z):
        """Value of the truncated series at z.

        Powers z^p use the principal branch; a non-analytic solution is
        only evaluated off the closed negative real axis (and at z = 0
        when the exponent has positive real part, where it vanishes).
        """
        z = complex(z)
        front = _principal_power(z, self.exponent)
        acc = np.zeros(self.dim, dtype=complex)
        zpow = complex(1.0)
        for j in range(self.truncation):
            acc = acc + self.coefficients[j] * zpow
            zpow *= z
        return front * acc


def _principal_power(z, p):
    if p == 0:
        return complex(1.0)
    if z == 0:
        if p.real > 0:
            return complex(0.0)
        raise ValueError("z^p undefined at z = 0 for Re(p) <= 0")
    if z.imag == 0 and z.real < 0:
        raise ValueError(
            "non-analytic solutions are evaluated away from the branch cut "
            "(-inf, 0]"
        )
    return z**p


@dataclass(frozen=True)
class IndicialRoots:
    """Multiset of admissible exponents at z = 0: zero with multiplicity r
    plus 1 - beta for every denominator eigenvalue beta."""

    roots: tuple
    total: int


def indicial_roots(eq):
    """Roots of p^r det(B_1 + p - 1) ... det(B_m + p - 1) = 0."""
    params = eq.params
    roots = [complex(0.0)] * params.dim
    for spec in params.denominator_spectra:
        block = sorted((1.0 - mu for mu in spec), key=lambda v: (v.real, v.imag))
        roots.extend(complex(v) for v in block)
    return IndicialRoots(roots=tuple(roots), total=len(roots))


def analytic_basis(eq, truncation):
    """The r solutions analytic at z = 0, one per standard basis vector.

    Solution i has F_0 = e_i and F_j = symbol_j e_i / j!, so its value at
    z = 0 is exactly e_i.
    """
    params = eq.params
    if truncation < 1:
        raise ValueError("truncation must be at least 1")
    if params.denominator_poles:
        raise PoleInParameters(params.denominator_poles[0])
    seq = SymbolSequence(params, 0.0)
    r = params.dim
    stack = np.empty((truncation, r, r), dtype=complex)
    for j in range(truncation):
        stack[j] = seq.weighted_term(j)
    return [
        SeriesSolution(
            exponent=complex(0.0),
            coefficients=stack[:, :, i].copy(),
            kind="analytic",
        )
        for i in range(r)
    ]


def nonanalytic_solution(eq, beta, truncation, tol=POLE_TOL):
    """Series solutions with exponent p = 1 - beta for a denominator
    eigenvalue beta.

    beta is snapped to the nearest computed denominator eigenvalue (it
    must match one to about 1e-6). One solution is returned per basis
    vector of the kernel of p (B_1 + p - 1) ... (B_m + p - 1); under the
    usual distinctness hypotheses that kernel is one-dimensional.
    """
    params = eq.params
    if truncation < 1:
        raise ValueError("truncation must be at least 1")
    beta = _snap_to_denominator_eigenvalue(params, complex(beta))
    for clause in _excluded_beta_clauses(params, beta, tol):
        raise ResonantExponent(beta, clause)
    p = 1.0 - beta
    indicial = _indicial_matrix(params, p)
    kernel = kernel_basis(
        indicial,
        tol=max(tol, DEFAULT_TOL),
        scale=_indicial_scale(params, p),
    )
    if not kernel:
        raise EmptyKernel(
            f"indicial matrix at p = {p} has no numerical kernel"
        )
    seq = SymbolSequence(params, shift=p)
    solutions = []
    for vec in kernel:
        coeffs = np.empty((truncation, params.dim), dtype=complex)
        weight = complex(1.0)
        for j in range(truncation):
            coeffs[j] = (seq.term(j) @ vec) / weight
            weight *= p + 1 + j
        solutions.append(
            SeriesSolution(
                exponent=complex(p), coefficients=coeffs, kind="nonanalytic",
                beta=complex(beta),
            )
        )
    return solutions


def _snap_to_denominator_eigenvalue(params, beta):
    best = None
    best_dist = np.inf
    for spec in params.denominator_spectra:
        for mu in spec:
            d = abs(mu - beta)
            if d < best_dist:
                best, best_dist = complex(mu), d
    if best is None or best_dist > EIGENVALUE_MATCH_TOL:
        raise ValueError(
            f"beta = {beta} is not an eigenvalue of any denominator matrix "
            f"(closest distance {best_dist:.3e})"
        )
    return best


def _excluded_beta_clauses(params, beta, tol=POLE_TOL):
    """Clauses of the non-analytic construction violated by beta."""
    clauses = []
    if abs(beta - 1.0) <= tol:
        clauses.append("beta = 1 is excluded (it gives the analytic exponent)")
        return clauses
    nearest = round(beta.real)
    if nearest >= 1 and abs(beta - nearest) <= tol:
        clauses.append(f"beta is the positive integer {nearest}")
    for k, spec in enumerate(params.denominator_spectra):
        for mu in spec:
            d = beta - mu
            j = round(d.real)
            if j >= 1 and abs(d - j) <= tol:
                clauses.append(
                    f"beta - {j} coincides with eigenvalue {mu} of "
                    f"denominator[{k}]"
                )
    return clauses


def _indicial_matrix(params, p):
    acc = p * identity(params.dim)
    for b in params.denominator:
        acc = acc @ (b + (p - 1) * identity(params.dim))
    return acc


def _indicial_scale(params, p):
    # norm scale of the indicial product; the product itself is near zero
    # at an indicial root, so it cannot serve as its own yardstick
    eye = identity(params.dim)
    scale = abs(p)
    for b in params.denominator:
        scale *= float(np.linalg.norm(b + (p - 1) * eye, 2))
    return max(1.0, scale)


def fundamental_set(eq, truncation):
    """The full solution basis near z = 0 for an n = m + 1 family.

    Requires every denominator eigenvalue to be simple, distinct across
    matrices, outside {0, -1, -2, ...}, different from 1, and free of the
    resonances that break the non-analytic construction. Violations are
    all collected and raised together; silently returning an incomplete
    set would be worse than refusing.
    """
    params = eq.params
    failures = []
    if params.n != params.m + 1:
        failures.append(
            f"family must have n = m + 1, got n={params.n}, m={params.m}"
        )
    for rec in params.denominator_poles:
        failures.append(
            f"denominator[{rec.denominator_index}] eigenvalue "
            f"{rec.eigenvalue} lies in {{0, -1, -2, ...}}"
        )
    labeled = [
        (k, complex(mu))
        for k, spec in enumerate(params.denominator_spectra)
        for mu in spec
    ]
    for a in range(len(labeled)):
        for b in range(a + 1, len(labeled)):
            if abs(labeled[a][1] - labeled[b][1]) <= POLE_TOL:
                where = (
                    f"within denominator[{labeled[a][0]}]"
                    if labeled[a][0] == labeled[b][0]
                    else f"between denominator[{labeled[a][0]}] and "
                    f"denominator[{labeled[b][0]}]"
                )
                failures.append(f"eigenvalue {labeled[a][1]} repeats {where}")
    for k, mu in labeled:
        if abs(mu - 1.0) <= POLE_TOL:
            failures.append(f"denominator[{k}] eigenvalue {mu} equals 1")
        else:
            for clause in _excluded_beta_clauses(params, mu):
                failures.append(f"denominator[{k}] eigenvalue {mu}: {clause}")
    if failures:
        raise HypothesisViolation(failures)

    solutions = analytic_basis(eq, truncation)
    for k, spec in enumerate(params.denominator_spectra):
        for mu in sorted((complex(v) for v in spec), key=lambda v: (v.real, v.imag)):
            solutions.extend(nonanalytic_solution(eq, mu, truncation))
    return solutions


def residual_coefficients(eq, sol):
    """Recursion residuals of a solution, one vector per row.

    Row index i corresponds to recursion step j = i - 1, running from the
    indicial row j = -1 (where F_{-1} = 0) up to j = truncation - 2. A
    true solution gives all-zero vectors up to rounding.
    """
    if sol.truncation < 2:
        raise ValueError("need at least two coefficients to form residuals")
    return [res for res, _, _ in _recursion_rows(eq, sol)]


def check_recursion(eq, sol, rel_tol=DEFAULT_TOL):
    """True when every recursion residual is small relative to the two
    sides it compares: ||residual|| <= rel_tol * (1 + ||lhs|| + ||rhs||)."""
    for res, lhs_norm, rhs_norm in _recursion_rows(eq, sol):
        if np.linalg.norm(res) > rel_tol * (1.0 + lhs_norm + rhs_norm):
            return False
    return True


def _recursion_rows(eq, sol):
    params = eq.params
    p = sol.exponent
    coeffs = sol.coefficients
    eye = identity(params.dim)
    rows = []
    for j in range(-1, sol.truncation - 1):
        lhs = coeffs[j + 1]
        for b in reversed(params.denominator):
            lhs = (b + (p + j) * eye) @ lhs
        lhs = (p + j + 1) * lhs
        if j >= 0:
            rhs = coeffs[j]
            for a in reversed(params.numerator):
                rhs = (a + (p + j) * eye) @ rhs
        else:
            rhs = np.zeros(params.dim, dtype=complex)
        rows.append(
            (lhs - rhs, float(np.linalg.norm(lhs)), float(np.linalg.norm(rhs)))
        )
    return rows


def ode_residual(eq, sol, z):
    """Difference of the two sides of the ODE at z, evaluated from the
    truncated series.

    The Euler operator acts exactly in coefficient space, so the only
    sources of residual are rounding and the truncation edge; both sides
    are truncated consistently (the right side stops one term earlier,
    matching powers of z), which makes the residual of a true solution
    vanish up to rounding.
    """
    params = eq.params
    z = complex(z)
    p = sol.exponent
    coeffs = sol.coefficients
    eye = identity(params.dim)
    top = sol.truncation - 1
    front = _principal_power(z, p) if sol.kind == "nonanalytic" else complex(1.0)

    lhs = np.zeros(params.dim, dtype=complex)
    rhs = np.zeros(params.dim, dtype=complex)
    zpow = complex(1.0)
    for j in range(top + 1):
        v = coeffs[j]
        for b in reversed(params.denominator):
            v = (b + (p + j - 1) * eye) @ v
        lhs = lhs + (p + j) * zpow * v
        if j <= top - 1:
            w = coeffs[j]
            for a in reversed(params.numerator):
                w = (a + (p + j) * eye) @ w
            rhs = rhs + zpow * z * w
        zpow *= z
    return front * (lhs - rhs)


def solution_to_obj(sol):
    """Serialize a solution to the shared text format."""
    obj = {
        "exponent": [float(sol.exponent.real), float(sol.exponent.imag)],
        "kind": sol.kind,
        "coefficients": [
            [[float(c.real), float(c.imag)] for c in row] for row in sol.coefficients
        ],
    }
    if sol.beta is not None:
        obj["beta"] = [float(sol.beta.real), float(sol.beta.imag)]
    return obj


def solution_from_obj(obj, name="solution"):
    """Parse the shared solution format back into a SeriesSolution."""
    if not isinstance(obj, dict):
        raise ValueError(f"{name}: expected an object")
    try:
        re, im = obj["exponent"]
        exponent = complex(float(re), float(im))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{name}.exponent: expected [re, im]") from exc
    kind = obj.get("kind")
    if kind not in ("analytic", "nonanalytic"):
        raise ValueError(f"{name}.kind: expected 'analytic' or 'nonanalytic'")
    rows = obj.get("coefficients")
    if not isinstance(rows, list) or not rows:
        raise ValueError(f"{name}.coefficients: expected a nonempty list")
    parsed = []
    width = None
    for j, row in enumerate(rows):
        if width is None:
            width = len(row)
        if not isinstance(row, list) or len(row) != width or width == 0:
            raise ValueError(f"{name}.coefficients[{j}]: inconsistent vector length")
        try:
            parsed.append([complex(float(c[0]), float(c[1])) for c in row])
        except (TypeError, ValueError, IndexError) as exc:
            raise ValueError(
                f"{name}.coefficients[{j}]: expected [re, im] pairs"
            ) from exc
    beta = None
    if obj.get("beta") is not None:
        try:
            re, im = obj["beta"]
            beta = complex(float(re), float(im))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{name}.beta: expected [re, im]") from exc
    return SeriesSolution(
        exponent=exponent,
        coefficients=np.array(parsed, dtype=complex),
        kind=kind,
        beta=beta,
    )
