"""Dense complex linear algebra primitives shared by the whole package.

Everything operates on square complex numpy arrays in double precision.
Rank and kernel decisions are always made from singular values, never from
row reduction, so every tolerance has the meaning ``tol * ||A||``.
"""

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-12
SINGULAR_TOL = 1e-10


class InvalidMatrix(ValueError):
    """Input is not a finite square complex matrix."""


class EigenFailure(RuntimeError):
    """The underlying eigenvalue iteration did not converge."""


class SingularMatrix(ValueError):
    """Matrix is numerically singular.

    Carries the offending smallest singular value in
    ``smallest_singular_value``.
    """

    def __init__(self, message, smallest_singular_value):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


def as_complex_matrix(a, name="matrix"):
    """Validate and return ``a`` as a square complex128 array.

    Accepts anything ``np.asarray`` accepts, including scalars, which are
    promoted to 1x1 matrices. Raises InvalidMatrix for non-square shapes
    or non-finite entries.
    """
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidMatrix(f"{name} must be square, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise InvalidMatrix(f"{name} must have positive dimension")
    if not np.all(np.isfinite(arr.view(float))):
        raise InvalidMatrix(f"{name} has non-finite entries")
    return arr


def identity(dim):
    return np.eye(dim, dtype=complex)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a matrix, with multiplicity."""

    eigenvalues: np.ndarray
    source_dim: int


@dataclass(frozen=True)
class RhoDelta:
    """Extreme real parts of a spectrum: rho is the max, delta the min."""

    rho: float
    delta: float


def spectral_norm(a):
    """Largest singular value of ``a`` (the operator 2-norm)."""
    arr = as_complex_matrix(a)
    return float(np.linalg.svd(arr, compute_uv=False)[0])


def eigenvalues(a):
    """Eigenvalues of a general complex matrix, as a Spectrum.

    No structure is assumed; the QR iteration of LAPACK is used as is.
    """
    arr = as_complex_matrix(a)
    try:
        vals = np.linalg.eigvals(arr)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigenvalue iteration failed: {exc}") from exc
    return Spectrum(eigenvalues=vals, source_dim=arr.shape[0])


def rho_delta(a):
    """Max and min real part over the spectrum of ``a``."""
    vals = eigenvalues(a).eigenvalues
    re = vals.real
    return RhoDelta(rho=float(re.max()), delta=float(re.min()))


def kernel_basis(a, tol=DEFAULT_TOL, scale=None):
    """Orthonormal basis of the numerical null space of ``a``.

    A right singular vector belongs to the kernel when its singular value
    is at most ``tol * ||a||``. When ``a`` is itself the near-zero value
    of some larger construction (a pencil evaluated at a root, say),
    relative-to-||a|| is meaningless; pass the construction's own norm as
    ``scale`` to threshold against ``tol * scale`` instead. Returns a
    (possibly empty) list of 1-D arrays.
    """
    arr = as_complex_matrix(a)
    if tol <= 0:
        raise ValueError("tol must be positive")
    _, s, vh = np.linalg.svd(arr)
    threshold = tol * (s[0] if scale is None else scale)
    null_mask = s <= threshold
    return [vh[i].conj() for i in np.nonzero(null_mask)[0]]


def inverse(a, tol=SINGULAR_TOL):
    """Inverse of ``a``, guarded against near-singularity.

    Raises SingularMatrix when the smallest singular value is at most
    ``tol * ||a||``. The guard matters because downstream recursions
    multiply inverses across hundreds of steps, so a single nearly
    singular factor poisons everything after it.
    """
    arr = as_complex_matrix(a)
    s = np.linalg.svd(arr, compute_uv=False)
    if s[-1] <= tol * s[0]:
        raise SingularMatrix(
            f"matrix is numerically singular (smallest singular value "
            f"{s[-1]:.3e}, norm {s[0]:.3e})",
            smallest_singular_value=float(s[-1]),
        )
    return np.linalg.inv(arr)


def pochhammer(w, j):
    """Rising factorial w (w+1) ... (w+j-1), with the empty product equal to 1.

    Factors are multiplied in ascending order; callers that build the same
    product incrementally get bit-identical values.
    """
    if j < 0 or j != int(j):
        raise ValueError("pochhammer order must be a nonnegative integer")
    result = complex(1.0)
    w = complex(w)
    for i in range(int(j)):
        result *= w + i
    return result


def matrix_to_obj(a):
    """Serialize a matrix to the shared literal format.

    The format is a plain dict with ``dim`` and ``entries``, the latter a
    row-major list of [re, im] pairs, suitable for JSON.
    """
    arr = as_complex_matrix(a)
    flat = arr.reshape(-1)
    return {
        "dim": int(arr.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_obj(obj, name="matrix"):
    """Parse the shared matrix literal format back into an array."""
    if not isinstance(obj, dict):
        raise InvalidMatrix(f"{name}: expected an object with dim/entries")
    if "dim" not in obj:
        raise InvalidMatrix(f"{name}.dim: missing")
    dim = obj["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise InvalidMatrix(f"{name}.dim: must be a positive integer")
    entries = obj.get("entries")
    if entries is None:
        raise InvalidMatrix(f"{name}.entries: missing")
    if len(entries) != dim * dim:
        raise InvalidMatrix(
            f"{name}.entries: expected {dim * dim} pairs, got {len(entries)}"
        )
    values = []
    for k, pair in enumerate(entries):
        try:
            re, im = pair
            values.append(complex(float(re), float(im)))
        except (TypeError, ValueError) as exc:
            raise InvalidMatrix(f"{name}.entries[{k}]: expected [re, im]") from exc
    arr = np.array(values, dtype=complex).reshape(dim, dim)
    return as_complex_matrix(arr, name=name)
