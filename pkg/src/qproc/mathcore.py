"""Finite-dimensional linear algebra, entropies and positivity checks.

Conventions used throughout the package:

* entropies are in nats (natural logarithm);
* subsystem 0 is the leftmost tensor factor, multi-indices are flattened
  row-major, so ``kron(a, b)`` is ordered ``(a, b)``;
* eigenvalues in ``[-EIG_CLIP, 0)`` are treated as rounding noise and set to
  zero before taking logarithms; anything more negative is an error.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidDistributionError, ShapeError

HERMITIAN_TOL = 1e-12
EIG_CLIP = 1e-10
PROB_TOL = 1e-12

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class PsdResult(NamedTuple):
    ok: bool
    min_eig: float


def as_square(mat, name="matrix") -> np.ndarray:
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ShapeError(f"{name} must be a square matrix, got shape {mat.shape}")
    return mat


def hermitian_residual(mat) -> float:
    mat = as_square(mat)
    if mat.size == 0:
        return 0.0
    return float(np.max(np.abs(mat - mat.conj().T)))


def check_hermitian(mat, tol=HERMITIAN_TOL, name="matrix") -> np.ndarray:
    """Return ``mat`` as an array, raising ShapeError if it is not Hermitian.

    The tolerance is applied relative to ``max(1, max|entry|)`` so that large
    but correctly symmetric matrices are not rejected for rounding noise.
    """
    mat = as_square(mat, name)
    scale = max(1.0, float(np.max(np.abs(mat)))) if mat.size else 1.0
    res = hermitian_residual(mat)
    if res > tol * scale:
        raise ShapeError(f"{name} is not Hermitian (residual {res:.3e})")
    return mat


def hermitian_part(mat) -> np.ndarray:
    mat = np.asarray(mat)
    return 0.5 * (mat + mat.conj().T)


def _clipped(vals, lo=0.0, hi=None, tol=EIG_CLIP, what="eigenvalue"):
    vals = np.asarray(vals, dtype=float)
    if vals.size and vals.min() < lo - tol:
        raise InvalidDistributionError(f"{what} {vals.min():.3e} below {lo} beyond tolerance {tol:g}")
    if hi is not None and vals.size and vals.max() > hi + tol:
        raise InvalidDistributionError(f"{what} {vals.max():.3e} above {hi} beyond tolerance {tol:g}")
    return np.clip(vals, lo, hi)


def _xlogx(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = p[nz] * np.log(p[nz])
    return out


def shannon_entropy(p, tol=PROB_TOL) -> float:
    """Shannon entropy ``-sum p log p`` in nats, with ``0 log 0 = 0``.

    Raises InvalidDistributionError if an entry is negative beyond ``tol`` or
    the entries do not sum to one within ``tol`` (scaled by the length).
    """
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0:
        raise InvalidDistributionError("empty probability vector")
    if p.min() < -tol:
        raise InvalidDistributionError(f"negative probability {p.min():.3e}")
    total = p.sum()
    if abs(total - 1.0) > tol * max(1, p.size):
        raise InvalidDistributionError(f"probabilities sum to {total!r}, not 1")
    return float(-_xlogx(np.clip(p, 0.0, None)).sum())


def entropy_of_spectrum(vals, tol=EIG_CLIP) -> float:
    """Entropy of a list of eigenvalues of a density matrix."""
    vals = _clipped(vals, 0.0, 1.0, tol)
    return float(-_xlogx(vals).sum())


def von_neumann_entropy(rho, tol=EIG_CLIP) -> float:
    """``-tr rho log rho`` in nats via a Hermitian eigendecomposition.

    >>> round(von_neumann_entropy(np.eye(2) / 2), 6)
    0.693147
    """
    rho = check_hermitian(rho, name="density matrix")
    return entropy_of_spectrum(np.linalg.eigvalsh(rho), tol)


def check_density_matrix(rho, tol=EIG_CLIP) -> np.ndarray:
    rho = check_hermitian(rho, name="density matrix")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise InvalidDistributionError(f"density matrix has trace {tr!r}")
    _clipped(np.linalg.eigvalsh(rho), 0.0, None, tol)
    return rho


def check_prob_vector(p, tol=PROB_TOL, name="probability vector") -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise ShapeError(f"{name} must be one-dimensional")
    if p.size == 0 or p.min() < -tol or abs(p.sum() - 1.0) > tol * max(1, p.size):
        raise InvalidDistributionError(f"{name} is not a probability vector: {p}")
    return p


def partial_trace(rho, dims: Sequence[int], keep) -> np.ndarray:
    """Reduced density matrix on the factors listed in ``keep``.

    ``dims`` gives the subsystem dimensions, leftmost factor first.  The kept
    factors appear in increasing index order in the output.
    """
    rho = np.asarray(rho)
    dims = [int(d) for d in dims]
    n = len(dims)
    total = int(np.prod(dims)) if dims else 1
    if rho.ndim != 2 or rho.shape != (total, total):
        raise ShapeError(f"dims {dims} do not match matrix of shape {rho.shape}")
    keep = sorted(set(int(k) for k in np.atleast_1d(keep)))
    if any(k < 0 or k >= n for k in keep):
        raise ShapeError(f"keep indices {keep} out of range for {n} subsystems")
    tensor = rho.reshape(dims + dims)
    # einsum subscripts: row index i_k, column index j_k; traced factors share a letter
    letters = iter("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
    rows, cols = [], []
    for k in range(n):
        r = next(letters)
        rows.append(r)
        cols.append(next(letters) if k in keep else r)
    out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out, tensor)
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    return reduced.reshape(dk, dk)


def partial_transpose(rho, dims: Sequence[int], sys) -> np.ndarray:
    """Transpose the factors in ``sys`` of an operator on ``prod(dims)``."""
    rho = np.asarray(rho)
    dims = [int(d) for d in dims]
    n = len(dims)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ShapeError(f"dims {dims} do not match matrix of shape {rho.shape}")
    axes = list(range(2 * n))
    for k in np.atleast_1d(sys):
        axes[k], axes[n + k] = axes[n + k], axes[k]
    return rho.reshape(dims + dims).transpose(axes).reshape(total, total)


def psd_check(mat, tol=1e-10) -> PsdResult:
    """Positive semi-definiteness test of a Hermitian matrix.

    Returns ``(ok, min_eig)`` with ``ok`` true iff the smallest eigenvalue is
    at least ``-tol``.
    """
    mat = check_hermitian(mat)
    lam = float(np.linalg.eigvalsh(mat)[0]) if mat.size else 0.0
    return PsdResult(lam >= -tol, lam)


def kron_all(mats) -> np.ndarray:
    out = np.ones((1, 1))
    for m in mats:
        out = np.kron(out, m)
    return out


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def haar_su2(rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of SU(2) from a uniform unit quaternion."""
    a, b, c, d = rng.standard_normal(4)
    norm = np.sqrt(a * a + b * b + c * c + d * d)
    a, b, c, d = a / norm, b / norm, c / norm, d / norm
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


def random_density_matrix(d: int, rng: np.random.Generator, rank=None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def pure_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def bloch_state(x) -> np.ndarray:
    """Qubit density matrix ``(1 + x.sigma) / 2``."""
    x = np.asarray(x, dtype=float)
    return 0.5 * (PAULI[0] + x[0] * PAULI[1] + x[1] * PAULI[2] + x[2] * PAULI[3])


def singlet_projector() -> np.ndarray:
    """Projector onto ``(|10> - |01>) / sqrt(2)``."""
    v = np.array([0.0, -1.0, 1.0, 0.0]) / np.sqrt(2)
    return np.outer(v, v).astype(complex)


def swap_operator(d: int) -> np.ndarray:
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[i * d + j, j * d + i] = 1.0
    return s
