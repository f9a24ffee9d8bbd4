"""Symmetric eigendecomposition and Frobenius-eigenpair extraction.

The eigensolver is a classical cyclic Jacobi iteration written from first
principles: row-cyclic sweeps of plane rotations, each annihilating one
off-diagonal entry. For the small dense symmetric matrices arising here it
is essentially exact (off-diagonals are driven below 1e-14 * scale) and,
unlike LAPACK drivers, bit-deterministic across runs for identical input,
which the CSV reproducibility contract relies on.

For an irreducible Metzler matrix (our L + A), the top eigenvalue lambda_0
is simple and its eigenvector can be chosen strictly positive; that pair is
what :func:`frobenius_pair` extracts and certifies. Eigenvectors of the
remaining eigenvalues are never strictly positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AssumptionError, NumericError, ValidationError

MAX_SWEEPS = 100
_OFFDIAG_FACTOR = 1e-14   # rotate while |a_pq| > 1e-14 * scale of the input


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues sorted descending; eigenvectors[:, m] belongs to eigenvalues[m]."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)

    @property
    def n(self) -> int:
        return self.eigenvalues.size


def eig_symmetric(M) -> SpectralDecomposition:
    """Full eigendecomposition of a symmetric matrix via cyclic Jacobi sweeps.

    Eigenvalues are returned in descending order (ties broken by ascending
    pre-sort index); each eigenvector is sign-fixed so its largest-magnitude
    component (first such, on ties) is positive. Output is deterministic.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    n = M.shape[0]
    if M.ndim != 2 or M.shape[1] != n:
        raise ValidationError(f"matrix must be square, got {M.shape}")
    scale = float(np.abs(M).max())
    if not np.allclose(M, M.T, rtol=0.0, atol=1e-12 * max(1.0, scale)):
        raise ValidationError("matrix is not symmetric within 1e-12 relative")

    A = 0.5 * (M + M.T)           # symmetrize roundoff before iterating
    V = np.eye(n)
    if n == 1 or scale == 0.0:
        return _sorted_decomposition(np.diag(A).copy(), V)

    thresh = _OFFDIAG_FACTOR * scale
    for _ in range(MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= thresh:
                    continue
                rotated = True
                # t = tan(theta) of the rotation that zeroes A[p,q]; the
                # smaller root keeps |theta| <= pi/4 for stability.
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                if tau >= 0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c

                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                A[p, q] = A[q, p] = 0.0

                vcol_p, vcol_q = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vcol_p - s * vcol_q
                V[:, q] = s * vcol_p + c * vcol_q
        if not rotated:
            return _sorted_decomposition(np.diag(A).copy(), V)
    raise NumericError(f"Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")


def _sorted_decomposition(evals: np.ndarray, V: np.ndarray) -> SpectralDecomposition:
    order = np.argsort(-evals, kind="stable")
    evals = evals[order]
    V = V[:, order]
    for m in range(V.shape[1]):
        col = V[:, m]
        lead = int(np.argmax(np.abs(col)))
        if col[lead] < 0:
            V[:, m] = -col
    return SpectralDecomposition(eigenvalues=evals, eigenvectors=V)


def frobenius_pair(dec: SpectralDecomposition, technology=None):
    """Top eigenpair (lambda_0, b0) with b0 unit-norm and strictly positive.

    Certifies what the Metzler/irreducibility theory promises: lambda_0 is
    simple (gap to lambda_1 above 1e-12) and the eigenvector is strictly
    positive; if the technology vector is supplied, also checks the bracket
    min_i A_i <= lambda_0 <= max_i A_i.
    """
    lam0 = float(dec.eigenvalues[0])
    b0 = dec.eigenvectors[:, 0].copy()
    if dec.n > 1 and not (lam0 - float(dec.eigenvalues[1]) > 1e-12):
        raise NumericError(
            "top eigenvalue is not simple (gap <= 1e-12); Frobenius theory "
            "requires a simple lambda_0")
    if b0.sum() < 0:
        b0 = -b0
    if (b0 <= 1e-10).any():
        raise NumericError(
            "candidate Frobenius eigenvector has a component <= 1e-10; "
            "matrix is likely reducible")
    b0 = b0 / np.linalg.norm(b0)
    if technology is not None:
        A = np.asarray(technology, dtype=float)
        tol = 1e-10 * max(1.0, float(np.abs(A).max()))
        if not (A.min() - tol <= lam0 <= A.max() + tol):
            raise AssumptionError(
                f"lambda_0 = {lam0} violates the bound "
                f"min A_i = {A.min()} <= lambda_0 <= max A_i = {A.max()}")
    return lam0, b0


def two_node_closed_form(A1: float, A2: float, w: float):
    """Closed-form (lambda_0, b0_2/b0_1) for the two-node system matrix
    [[A1 - w, w], [w, A2 - w]].

    For equal technologies lambda_0 = A and the ratio is 1 for every w;
    otherwise lambda_0 = -w + (A1+A2)/2 + sqrt(w^2 + (A2-A1)^2/4) and the
    component ratio is (A2-A1)/(A2-lambda_0) - 1, evaluated in the
    algebraically identical cancellation-free form ((A2-A1)/2 + s)/w with
    s = sqrt(w^2 + (A2-A1)^2/4), which stays accurate as A2 - A1 -> 0.
    For w > 0 and A1 <= A2 the eigenvalue satisfies
    (A1+A2)/2 < lambda_0(w) <= A2.
    """
    if w < 0:
        raise ValidationError(f"weight must be nonnegative, got {w}")
    if A1 == A2:
        return float(A1), 1.0
    s = math.hypot(w, 0.5 * (A2 - A1))
    lam0 = -w + 0.5 * (A1 + A2) + s
    ratio = (0.5 * (A2 - A1) + s) / w
    return float(lam0), float(ratio)
