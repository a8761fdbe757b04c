"""Dense complex linear algebra for small matrices.

Everything in the package lives in dimension <= 16, so the kernel is a thin
wrapper around LAPACK via numpy with the error surface and ordering
conventions the rest of the code relies on: spectra sorted by descending
eigenvalue modulus, matched left/right eigenvectors, and Hermitian matrix
exponentials computed by eigendecomposition (exact for these sizes, no
series truncation).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, NonSquare, NotHermitian, TooLarge

MAX_DIM = 16


@dataclass
class Spectrum:
    """Eigendecomposition sorted by descending |eigenvalue|.

    right_vectors[i] is a column vector (1-D array), left_vectors[i] a row
    vector (1-D array) with left_vectors[i] @ M = eigenvalues[i] * left_vectors[i].
    Both are normalized to unit 2-norm.
    """

    eigenvalues: np.ndarray
    right_vectors: list
    left_vectors: list


def _check_square(M):
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] > MAX_DIM:
        raise TooLarge(f"dimension {M.shape[0]} exceeds {MAX_DIM}")
    if not np.all(np.isfinite(M.view(float))):
        raise ValueError("matrix contains NaN or Inf")
    return M


def eig_dense(M):
    """Full spectrum of a small dense matrix with matched left eigenvectors.

    Left eigenvectors come from the inverse of the right eigenvector matrix,
    which pairs them with the right ones by construction. A residual check
    guards against defective input.
    """
    M = _check_square(M)
    w, vr = np.linalg.eig(M)
    try:
        vl = np.linalg.inv(vr)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure("eigenvector matrix is singular") from exc
    scale = max(np.linalg.norm(M), 1.0)
    order = np.argsort(-np.abs(w))
    eigenvalues = w[order]
    rights, lefts = [], []
    for i in order:
        r = vr[:, i]
        resid = np.linalg.norm(M @ r - w[i] * r)
        if resid > 1e-10 * scale:
            raise ConvergenceFailure(
                f"eigenpair residual {resid:.2e} exceeds bound (defective input?)"
            )
        rights.append(r / np.linalg.norm(r))
        l = vl[i, :]
        lefts.append(l / np.linalg.norm(l))
    return Spectrum(eigenvalues=eigenvalues, right_vectors=rights, left_vectors=lefts)


def unitary_exp(H, t):
    """e^{iHt} for Hermitian H, via eigendecomposition."""
    H = _check_square(H)
    if np.max(np.abs(H - H.conj().T)) > 1e-12:
        raise NotHermitian("generator is not Hermitian to 1e-12")
    w, v = np.linalg.eigh(H)
    return (v * np.exp(1j * w * t)) @ v.conj().T


def assert_unitary(M, tol):
    """True iff max |M^dag M - I| <= tol."""
    M = _check_square(M)
    d = M.shape[0]
    return bool(np.max(np.abs(M.conj().T @ M - np.eye(d))) <= tol)
