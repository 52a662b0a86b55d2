"""Second fundamental form and pseudohermitian torsion of the adapted frame.

With frame vectors Z_alpha = rho_w d/dz_alpha - rho_alpha d/dw, the pure
second-order action on a function phi is the contraction

    D_{alpha beta}(phi) = Z_alpha^j Z_beta^k phi_{jk},

and the torsion coefficient matrix comes from

    c_{alpha beta} = h_{alpha beta} - sum_k rho^{kbar} D_{alpha beta}(rho_kbar),
    A_{alpha beta} = -i c_{alpha beta} |H|^2,

where rho^{kbar} raises the gradient through the inverse ambient metric and
is normalised so that rho^{kbar} rho_{kbar} = 1.  The normalised torsion in
direction zeta is A(Z) = i A_{alpha beta} zeta^alpha zeta^beta / |zeta|_h^2.
Its supremum over h-unit directions is the largest Takagi value of

    B = conj(L^-1) A conj(L^-1)^T,   h = L L^H.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .surface import SurfaceFrame


def d_operator(frame: SurfaceFrame, phi2: np.ndarray) -> np.ndarray:
    """Contract an N x N matrix of second holomorphic partials into the frame."""
    return frame.Z @ phi2 @ frame.Z.T


def raised_gradient(frame: SurfaceFrame) -> np.ndarray:
    """rho^{kbar} = a^{kbar j} rho_j / |d rho|^2 in chart coordinates."""
    return (frame.jet.d1 @ frame.metric.inverse) / frame.dp2


def second_form(frame: SurfaceFrame) -> np.ndarray:
    """Coefficient matrix c_{alpha beta} (complex symmetric, n x n)."""
    # D_{alpha beta}(rho_kbar) = Z^j Z^l (d/dz_j d/dz_l rho_kbar)
    #                          = Z^j Z^l rho_{j l kbar}
    t = np.einsum("aj,bl,jlk->abk", frame.Z, frame.Z, frame.jet.d21)
    c = frame.hol - t @ raised_gradient(frame)
    return 0.5 * (c + c.T)


def torsion_matrix(frame: SurfaceFrame, c: np.ndarray | None = None) -> np.ndarray:
    """A_{alpha beta} = -i c_{alpha beta} |H|^2."""
    if c is None:
        c = second_form(frame)
    return -1j * frame.H2 * c


def torsion_of(frame: SurfaceFrame, zeta, A: np.ndarray | None = None) -> complex:
    """Normalised torsion A(Z) = i A_{ab} zeta^a zeta^b / |zeta|_h^2."""
    if A is None:
        A = torsion_matrix(frame)
    zeta = np.asarray(zeta, dtype=np.complex128)
    h2 = np.real(np.conj(zeta) @ frame.h @ zeta)
    return complex(1j * (zeta @ A @ zeta) / h2)


def takagi(A: np.ndarray):
    """Takagi factorisation of a complex symmetric matrix: A = U diag(s) U^T
    with U unitary and s >= 0 descending. Returns (s, U)."""
    A = np.asarray(A, dtype=np.complex128)
    n = A.shape[0]
    sym_gap = np.linalg.norm(A - A.T)
    if sym_gap > 1e-10 * max(1.0, np.linalg.norm(A)):
        raise ValueError("matrix is not complex symmetric")
    A = 0.5 * (A + A.T)
    W, s, _ = np.linalg.svd(A)
    # B = W^H A conj(W) is symmetric and block diagonal over groups of equal
    # singular values; each block is s * (unitary symmetric) whose principal
    # square root completes the factor.
    B = W.conj().T @ A @ W.conj()
    P = np.eye(n, dtype=np.complex128)
    tol = 1e-8 * max(1.0, s[0] if n else 1.0)
    i = 0
    while i < n:
        j = i + 1
        while j < n and abs(s[j] - s[i]) <= tol:
            j += 1
        if s[i] > tol:
            Q = B[i:j, i:j] / s[i]
            P[i:j, i:j] = scipy.linalg.sqrtm(Q)
        i = j
    U = W @ P
    res = np.linalg.norm(U @ np.diag(s) @ U.T - A)
    if res > 1e-8 * max(1.0, np.linalg.norm(A)):
        raise ArithmeticError(f"takagi residual {res:.3e}")
    return s, U


def torsion_sup(frame: SurfaceFrame, A: np.ndarray | None = None):
    """sup of |A(Z)| over h-unit directions and an attaining direction.

    Returns (sup, zeta_star) with zeta_star h-unit."""
    if A is None:
        A = torsion_matrix(frame)
    L = np.linalg.cholesky(frame.h)
    Linv = np.linalg.inv(L)
    B = np.conj(Linv) @ A @ np.conj(Linv).T
    s, U = takagi(B)
    xi = np.conj(U[:, 0])
    zeta = np.linalg.solve(L.conj().T, xi)
    return float(s[0]), zeta
