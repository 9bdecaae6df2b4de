"""Reduction of u(1-u)F'' + (C - uU)F' - VF = 0 to hypergeometric form.

The reduction needs matrices A, B with U = A + B + 1 and V = AB, which is
the same as asking for a solvent of the quadratic matrix equation
B^2 + (I - U)B + V = 0. Candidate solvents come from the pencil
Q(lam) = lam^2 I + lam (I - U) + V: pick r roots of det Q and one kernel
vector of Q at each; whenever the chosen vectors are independent,
B = X Lam X^-1 solves the quadratic. Not every equation is reducible (a
quadratic matrix equation can have no solvent at all), so exhaustion of
the root selections is reported as a structured outcome, not an error.
"""

import cmath
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .matcore import as_complex_matrix, identity, kernel_basis, matrix_from_obj, matrix_to_obj

COND_LIMIT = 1e10
CLUSTER_TOL = 1e-8
KERNEL_TOL = 1e-8
RANK_TOL = 1e-6
MAX_SELECTIONS = 20000


class RootFailure(RuntimeError):
    """Polynomial root extraction failed or returned the wrong count."""


class InvalidExampleParameters(ValueError):
    """Example generator parameters outside their admissible domain."""


class CollidingEigenvalues(Exception):
    """Two diagonal indices of the triangular example selected the same
    pencil root, so the per-index construction cannot proceed."""

    def __init__(self, i, j, root):
        self.i = i
        self.j = j
        self.root = root
        super().__init__(
            f"indices {i} and {j} both selected root {root}; "
            f"choose a different branch per index"
        )


@dataclass(frozen=True)
class SecondOrderEquation:
    """Coefficients (C, U, V) of u(1-u)F'' + (C - uU)F' - VF = 0."""

    C: np.ndarray
    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        c = as_complex_matrix(self.C, "C")
        u = as_complex_matrix(self.U, "U")
        v = as_complex_matrix(self.V, "V")
        if not (c.shape == u.shape == v.shape):
            raise ValueError(
                f"C, U, V must share one dimension, got "
                f"{c.shape[0]}, {u.shape[0]}, {v.shape[0]}"
            )
        for arr in (c, u, v):
            arr.setflags(write=False)
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "U", u)
        object.__setattr__(self, "V", v)

    @property
    def dim(self):
        return self.C.shape[0]


@dataclass(frozen=True)
class QPolynomial:
    """det Q(lam) as a polynomial in lam, coefficients in ascending order.

    The degree is exactly 2r and the leading coefficient is 1, because the
    lam^2 block of the pencil carries the identity.
    """

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        if len(coeffs) < 3 or len(coeffs) % 2 == 0:
            raise ValueError(
                f"expected 2r+1 coefficients for some r >= 1, got {len(coeffs)}"
            )
        scale = max(1.0, max(abs(c) for c in coeffs))
        if abs(coeffs[-1] - 1.0) > 1e-6 * scale:
            raise ValueError(
                f"leading coefficient must be 1, got {coeffs[-1]}"
            )
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self):
        return len(self.coefficients) - 1


@dataclass(frozen=True)
class ReductionResult:
    """Outcome of a reduction attempt.

    On success ``A`` and ``B`` satisfy U = A + B + 1 and V = AB;
    ``lambda_selection`` holds the r pencil roots used and
    ``kernel_vectors`` their kernel vectors as the columns of X.
    ``diagnostics`` always carries the residual norms (or, on failure,
    the best rank and residual seen during the search).
    """

    status: str
    A: np.ndarray | None
    B: np.ndarray | None
    lambda_selection: tuple
    kernel_vectors: np.ndarray | None
    diagnostics: dict

    @property
    def reduced(self):
        return self.status == "reduced"


def q_matrix(U, V, lam):
    """The pencil value Q(lam) = lam^2 I + lam (I - U) + V."""
    U = as_complex_matrix(U, "U")
    V = as_complex_matrix(V, "V")
    lam = complex(lam)
    eye = identity(U.shape[0])
    return lam * lam * eye + lam * (eye - U) + V


def det_q_polynomial(U, V):
    """Coefficients of det Q(lam), recovered by evaluation-interpolation.

    The determinant is sampled at the 2r+1 roots of unity and the
    coefficients come back through one FFT; this is stable for any r and
    avoids symbolic expansion entirely.
    """
    U = as_complex_matrix(U, "U")
    V = as_complex_matrix(V, "V")
    if U.shape != V.shape:
        raise ValueError("U and V must share one dimension")
    r = U.shape[0]
    npts = 2 * r + 1
    omega = np.exp(2j * np.pi * np.arange(npts) / npts)
    values = np.array([np.linalg.det(q_matrix(U, V, w)) for w in omega])
    coeffs = np.fft.fft(values) / npts
    return QPolynomial(coefficients=tuple(coeffs))


def q_roots(poly):
    """All 2r roots of det Q, with multiplicity, sorted by (Re, Im)."""
    coeffs_desc = np.array(poly.coefficients[::-1], dtype=complex)
    try:
        roots = np.roots(coeffs_desc)
    except np.linalg.LinAlgError as exc:
        raise RootFailure(f"companion eigenvalue iteration failed: {exc}") from exc
    if len(roots) != poly.degree:
        raise RootFailure(
            f"expected {poly.degree} roots, got {len(roots)}"
        )
    return sorted((complex(z) for z in roots), key=lambda z: (z.real, z.imag))


def reduce_to_hypergeometric(eq, tol=1e-10):
    """Search for a solvent B (and A = U - B - 1) of the equation.

    Root selections are tried in a deterministic order, all-distinct root
    values first, then selections reusing a root with several independent
    kernel vectors. A selection counts as a success only when the solvent
    residual itself verifies below tol * (1 + ||U|| + ||V||); rank and
    conditioning checks merely prune. Exhaustion returns a not_reducible
    result with the best rank achieved.
    """
    U, V = eq.U, eq.V
    r = eq.dim
    roots = q_roots(det_q_polynomial(U, V))
    clusters = _cluster_roots(roots)
    candidates = []
    for ci, (root, _mult) in enumerate(clusters):
        kernel = kernel_basis(
            q_matrix(U, V, root),
            tol=KERNEL_TOL,
            scale=_pencil_scale(U, V, root),
        )
        for vec in kernel:
            candidates.append((ci, root, vec))

    eye = identity(r)
    scale = 1.0 + _snorm(U) + _snorm(V)
    best_rank = 0
    best_residual = None
    tried = 0
    cluster_ids = [ci for ci, _, _ in candidates]
    for combo in _selection_order(cluster_ids, r):
        chosen = [candidates[i] for i in combo]
        tried += 1
        X = np.column_stack([vec for _, _, vec in chosen])
        s = np.linalg.svd(X, compute_uv=False)
        rank = int(np.count_nonzero(s > RANK_TOL * s[0])) if s[0] > 0 else 0
        best_rank = max(best_rank, rank)
        # the independence requirement is the real gate: nearly parallel
        # kernel vectors (clustered pencil roots) otherwise manufacture
        # huge-norm B with deceptively small residual
        if rank < r:
            continue
        if s[-1] <= s[0] / COND_LIMIT:
            continue
        lam = np.array([root for _, root, _ in chosen])
        B = (X * lam) @ np.linalg.inv(X)
        A = U - B - eye
        resid_solvent = _snorm(B @ B + (eye - U) @ B + V)
        resid_sum = _snorm(U - (A + B + eye))
        resid_prod = _snorm(V - A @ B)
        if best_residual is None or resid_solvent < best_residual:
            best_residual = resid_solvent
        if resid_solvent <= tol * scale and resid_prod <= tol * scale:
            return ReductionResult(
                status="reduced",
                A=A,
                B=B,
                lambda_selection=tuple(complex(v) for v in lam),
                kernel_vectors=X,
                diagnostics={
                    "solvent_residual": resid_solvent,
                    "sum_residual": resid_sum,
                    "product_residual": resid_prod,
                },
            )
    return ReductionResult(
        status="not_reducible",
        A=None,
        B=None,
        lambda_selection=(),
        kernel_vectors=None,
        diagnostics={
            "best_rank": best_rank,
            "best_residual": best_residual,
            "selections_tried": tried,
        },
    )


def _cluster_roots(roots):
    """Group near-identical roots; returns (representative, count) pairs."""
    ctol = CLUSTER_TOL * (1.0 + max(abs(z) for z in roots))
    clusters = []
    for z in roots:
        for idx, (rep, members) in enumerate(clusters):
            if abs(z - rep) <= ctol:
                members.append(z)
                clusters[idx] = (sum(members) / len(members), members)
                break
        else:
            clusters.append((z, [z]))
    return [(rep, len(members)) for rep, members in clusters]


def _selection_order(cluster_ids, r):
    """Deterministic candidate-index combinations, distinct clusters first.

    Exhaustive while the combination count stays workable (always the
    case for r <= 8, where there are at most 2r candidates); beyond that
    a seeded random sample keeps the search bounded and reproducible.
    """
    num_candidates = len(cluster_ids)
    if num_candidates < r:
        return []
    total = math.comb(num_candidates, r)
    if total <= MAX_SELECTIONS:
        combos = list(itertools.combinations(range(num_candidates), r))
    else:
        rng = np.random.default_rng(0)
        seen = set()
        while len(seen) < MAX_SELECTIONS:
            pick = rng.choice(num_candidates, size=r, replace=False)
            seen.add(tuple(int(i) for i in sorted(pick)))
        combos = sorted(seen)
    combos.sort(key=lambda combo: (r - len({cluster_ids[i] for i in combo}), combo))
    return combos


def _snorm(a):
    return float(np.linalg.svd(a, compute_uv=False)[0])


def _pencil_scale(U, V, lam):
    # norm scale of Q(lam) as built, the right yardstick for "Q(root) = 0"
    a = abs(lam)
    eye = identity(U.shape[0])
    return 1.0 + a * a + a * _snorm(eye - U) + _snorm(V)


def spherical_example(ell, alpha, beta, k):
    """The (ell+1)-dimensional second-order family from representation
    theory: C lower bidiagonal, U diagonal, V upper bidiagonal.

    Requires alpha > -1, beta > -1, 0 < k < beta + 1 and integer ell >= 1.
    """
    if int(ell) != ell or ell < 1:
        raise InvalidExampleParameters(f"ell must be a positive integer, got {ell}")
    if not alpha > -1:
        raise InvalidExampleParameters(f"alpha must exceed -1, got {alpha}")
    if not beta > -1:
        raise InvalidExampleParameters(f"beta must exceed -1, got {beta}")
    if not 0 < k < beta + 1:
        raise InvalidExampleParameters(
            f"k must lie in (0, beta + 1) = (0, {beta + 1}), got {k}"
        )
    ell = int(ell)
    dim = ell + 1
    C = np.zeros((dim, dim), dtype=complex)
    U = np.zeros((dim, dim), dtype=complex)
    V = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        C[i, i] = beta + 1 + 2 * i
        U[i, i] = alpha + beta + ell + i + 2
        V[i, i] = i * (alpha + beta + i - k + 1)
    for i in range(1, dim):
        C[i, i - 1] = i
    for i in range(ell):
        V[i, i + 1] = -(ell - i) * (i + beta - k + 1)
    return SecondOrderEquation(C=C, U=U, V=V)


def reduce_spherical_example(ell, alpha, beta, k, tol=1e-10, root_choice="lower"):
    """Reduce the triangular example directly, one pencil root per
    diagonal index.

    Q(lam) is upper triangular here, so its determinant factors into the
    per-index quadratics lam^2 - lam (alpha+beta+ell+i+1)
    + i (alpha+beta+i-k+1). ``root_choice`` picks the branch per index:
    'lower', 'upper', or a sequence of such strings of length ell + 1.
    The selected roots must be pairwise distinct; a clash raises
    CollidingEigenvalues naming the offending index pair.
    """
    eq = spherical_example(ell, alpha, beta, k)
    dim = eq.dim
    choices = _normalize_root_choice(root_choice, dim)
    roots = []
    for i in range(dim):
        s = alpha + beta + ell + i + 1
        t = i * (alpha + beta + i - k + 1)
        sq = cmath.sqrt(complex(s * s - 4 * t))
        pair = sorted([(s - sq) / 2, (s + sq) / 2], key=lambda z: (z.real, z.imag))
        roots.append(pair[0] if choices[i] == "lower" else pair[1])
    for i in range(dim):
        for j in range(i + 1, dim):
            if abs(roots[i] - roots[j]) <= 1e-8:
                raise CollidingEigenvalues(i, j, roots[i])

    columns = []
    for i in range(dim):
        qm = q_matrix(eq.U, eq.V, roots[i])
        vec = _upper_triangular_kernel_vector(qm, i)
        if vec is None:
            basis = kernel_basis(
                qm, tol=KERNEL_TOL, scale=_pencil_scale(eq.U, eq.V, roots[i])
            )
            if not basis:
                raise RootFailure(
                    f"no kernel vector found for root {roots[i]} at index {i}"
                )
            vec = basis[0]
        columns.append(vec)
    X = np.column_stack(columns)
    lam = np.array(roots)
    eye = identity(dim)
    B = (X * lam) @ np.linalg.inv(X)
    A = eq.U - B - eye
    resid_solvent = _snorm(B @ B + (eye - eq.U) @ B + eq.V)
    resid_sum = _snorm(eq.U - (A + B + eye))
    resid_prod = _snorm(eq.V - A @ B)
    scale = 1.0 + _snorm(eq.U) + _snorm(eq.V)
    diagnostics = {
        "solvent_residual": resid_solvent,
        "sum_residual": resid_sum,
        "product_residual": resid_prod,
    }
    if resid_solvent <= tol * scale and resid_prod <= tol * scale:
        return ReductionResult(
            status="reduced",
            A=A,
            B=B,
            lambda_selection=tuple(roots),
            kernel_vectors=X,
            diagnostics=diagnostics,
        )
    return ReductionResult(
        status="not_reducible",
        A=None,
        B=None,
        lambda_selection=tuple(roots),
        kernel_vectors=X,
        diagnostics=diagnostics,
    )


def _normalize_root_choice(root_choice, dim):
    if isinstance(root_choice, str):
        choices = [root_choice] * dim
    else:
        choices = list(root_choice)
        if len(choices) != dim:
            raise ValueError(f"root_choice needs {dim} entries, got {len(choices)}")
    for c in choices:
        if c not in ("lower", "upper"):
            raise ValueError(f"root_choice entries must be 'lower' or 'upper', got {c!r}")
    return choices


def _upper_triangular_kernel_vector(qm, i):
    """Kernel vector of an upper-triangular pencil value whose i-th
    diagonal entry vanishes; None when an upstream pivot is too small."""
    dim = qm.shape[0]
    pivot_floor = 1e-8 * (1.0 + float(np.abs(qm).max()))
    v = np.zeros(dim, dtype=complex)
    v[i] = 1.0
    for j in range(i - 1, -1, -1):
        pivot = qm[j, j]
        if abs(pivot) <= pivot_floor:
            return None
        v[j] = -(qm[j, j + 1 : i + 1] @ v[j + 1 : i + 1]) / pivot
    norm = np.linalg.norm(v)
    return v / norm


def equation_to_obj(eq):
    """Serialize to the shared text format."""
    return {
        "C": matrix_to_obj(eq.C),
        "U": matrix_to_obj(eq.U),
        "V": matrix_to_obj(eq.V),
    }


def equation_from_obj(obj, name="equation"):
    if not isinstance(obj, dict):
        raise ValueError(f"{name}: expected an object with C, U, V")
    missing = [key for key in ("C", "U", "V") if key not in obj]
    if missing:
        raise ValueError(f"{name}.{missing[0]}: missing")
    return SecondOrderEquation(
        C=matrix_from_obj(obj["C"], name=f"{name}.C"),
        U=matrix_from_obj(obj["U"], name=f"{name}.U"),
        V=matrix_from_obj(obj["V"], name=f"{name}.V"),
    )


def result_to_obj(res):
    """Serialize a reduction result, diagnostics included verbatim."""
    return {
        "status": res.status,
        "A": None if res.A is None else matrix_to_obj(res.A),
        "B": None if res.B is None else matrix_to_obj(res.B),
        "lambda_selection": [
            [float(z.real), float(z.imag)] for z in res.lambda_selection
        ],
        "kernel_vectors": None
        if res.kernel_vectors is None
        else matrix_to_obj(res.kernel_vectors),
        "diagnostics": dict(res.diagnostics),
    }
