"""Curvature of Brieskorn-Pham links M(r) = {sum z_j^(a_j) = 0, |z|^2 = r}.

Weights w_j = d/a_j with d = lcm(a_j) make p weighted homogeneous of degree
d.  The canonical pseudohermitian structure of the link is torsion free, and
with xi the weighted gradient field,

    ||xi||^2 = d sum_j a_j |z_j|^(2 a_j - 2),
    Ktilde(W) = -|sum_jk (d^2 p / dz_j dz_k) W^j W^k|^2 / ||xi||^2,
    K(W) = (1/2) Ktilde(W) + |H|^2,    |H|^2 = sum_j w_j |z_j|^2,

for W tangent (dp(W) = 0, <W, z> = 0) and unit in the weighted metric
diag(1/w_j).  Ktilde is never positive, so K <= |H|^2 on every link.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .surface import stream


def weights(exponents):
    """(d, w) with d = lcm of the exponents and w_j = d / a_j, exact."""
    exps = tuple(int(a) for a in exponents)
    if any(a < 2 for a in exps):
        raise ValueError("all exponents must be >= 2")
    d = math.lcm(*exps)
    return d, tuple(d // a for a in exps)


@dataclass(frozen=True)
class BrieskornLink:
    exponents: tuple
    radius: float  # the r in |z|^2 = r
    d: int
    w: tuple

    @classmethod
    def create(cls, exponents, radius: float = 1.0) -> "BrieskornLink":
        radius = float(radius)
        if radius <= 0:
            raise ValueError("radius must be positive")
        d, w = weights(exponents)
        return cls(tuple(int(a) for a in exponents), radius, d, w)

    @property
    def m(self) -> int:
        return len(self.exponents)

    def poly(self, z) -> complex:
        z = np.asarray(z, dtype=np.complex128)
        return complex(np.sum(z ** np.array(self.exponents)))

    def grad(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        a = np.array(self.exponents)
        return a * z ** (a - 1)

    def hess_diag(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        a = np.array(self.exponents)
        return a * (a - 1) * z ** (a - 2)

    def xi_norm_sq(self, z) -> float:
        z = np.asarray(z, dtype=np.complex128)
        a = np.array(self.exponents)
        return float(self.d * np.sum(a * np.abs(z) ** (2 * a - 2)))

    def mean_curvature_sq(self, z) -> float:
        z = np.asarray(z, dtype=np.complex128)
        return float(np.sum(np.array(self.w) * np.abs(z) ** 2))


def sample_link(link: BrieskornLink, count: int, seed: int, max_tries: int = 20):
    """Deterministic Gauss-Newton samples of {p = 0, |z|^2 = r}; every
    returned point satisfies both constraints to 1e-10."""
    m = link.m
    out = []
    for index in range(count):
        rng = stream(seed, 40_000_000 + index)
        z = None
        for _ in range(max_tries):
            z0 = rng.standard_normal(m) + 1j * rng.standard_normal(m)
            z0 *= math.sqrt(link.radius) / np.linalg.norm(z0)
            z = _newton_link(link, z0)
            if z is not None:
                break
        if z is None:
            raise ArithmeticError(f"link sampling failed at point {index}")
        out.append(z)
    return out


def _newton_link(link: BrieskornLink, z0, iters: int = 80):
    z = np.array(z0, dtype=np.complex128)
    for _ in range(iters):
        p = link.poly(z)
        s = float(np.sum(np.abs(z) ** 2)) - link.radius
        if abs(p) < 1e-13 and abs(s) < 1e-13:
            return z
        g = link.grad(z)
        # rows: Re p, Im p, |z|^2 - r over real coordinates (x, y pairs)
        J = np.zeros((3, 2 * link.m))
        J[0, 0::2], J[0, 1::2] = g.real, -g.imag
        J[1, 0::2], J[1, 1::2] = g.imag, g.real
        J[2, 0::2], J[2, 1::2] = 2 * z.real, 2 * z.imag
        F = np.array([p.real, p.imag, s])
        JJt = J @ J.T
        if np.linalg.cond(JJt) > 1e12:
            return None
        delta = -J.T @ np.linalg.solve(JJt, F)
        z = z + delta[0::2] + 1j * delta[1::2]
        if not np.all(np.isfinite(z)):
            return None
    p = link.poly(z)
    s = float(np.sum(np.abs(z) ** 2)) - link.radius
    if abs(p) < 1e-10 and abs(s) < 1e-10:
        return z
    return None


def tangent_frame(link: BrieskornLink, z) -> np.ndarray:
    """Columns: a basis of T^(1,0)M(r) at z (dp(W) = 0 and <W, z> = 0),
    orthonormal in the weighted metric diag(1/w_j)."""
    z = np.asarray(z, dtype=np.complex128)
    g = link.grad(z)
    if np.linalg.norm(g) < 1e-14:
        raise ArithmeticError("singular point of the variety")
    C = np.vstack([g, np.conj(z)])
    B = scipy.linalg.null_space(C)
    D = np.diag(1.0 / np.array(link.w, dtype=np.float64))
    G = B.conj().T @ D @ B
    L = np.linalg.cholesky(G)
    return B @ np.linalg.inv(L).conj().T


def ambient_sectional(link: BrieskornLink, z, W) -> float:
    """Vitter's ambient holomorphic sectional curvature along W, by the
    diagonal Brieskorn-Pham specialization; always <= 0."""
    W = np.asarray(W, dtype=np.complex128)
    s = complex(np.sum(link.hess_diag(z) * W * W))
    return -abs(s) ** 2 / link.xi_norm_sq(z)


def ambient_sectional_general(link: BrieskornLink, z, W) -> float:
    """Same quantity through the general double-sum form with the full
    Hessian matrix; oracle for the diagonal specialization."""
    W = np.asarray(W, dtype=np.complex128)
    H = np.diag(link.hess_diag(z))
    s = complex(np.einsum("j,jk,k->", W, H, W))
    return -abs(s) ** 2 / link.xi_norm_sq(z)


def link_sectional(link: BrieskornLink, z, W) -> float:
    """Tanaka-Webster holomorphic sectional curvature of the link along W."""
    W = np.asarray(W, dtype=np.complex128)
    s = complex(np.sum(link.hess_diag(z) * W * W))
    return link.mean_curvature_sq(z) - 0.5 * abs(s) ** 2 / link.xi_norm_sq(z)


def scan(link: BrieskornLink, n_points: int, seed: int) -> dict:
    """Sample the link and tabulate K, Ktilde, |H|^2 and identity residuals
    for every tangent-frame direction at every sample."""
    pts = sample_link(link, n_points, seed)
    rows = []
    worst_constraint = 0.0
    worst_identity = 0.0
    worst_frame = 0.0
    max_ktilde = -np.inf
    k_min, k_max = np.inf, -np.inf
    for idx, z in enumerate(pts):
        V = tangent_frame(link, z)
        D = np.diag(1.0 / np.array(link.w, dtype=np.float64))
        gram_dev = float(np.max(np.abs(V.conj().T @ D @ V - np.eye(V.shape[1]))))
        cons = max(
            float(np.max(np.abs(link.grad(z) @ V))),
            float(np.max(np.abs(np.conj(z) @ V))),
        )
        worst_frame = max(worst_frame, gram_dev, cons)
        worst_constraint = max(
            worst_constraint,
            abs(link.poly(z)),
            abs(float(np.sum(np.abs(z) ** 2)) - link.radius),
        )
        h2 = link.mean_curvature_sq(z)
        rng = stream(seed, 41_000_000 + idx)
        dirs = [V[:, j] for j in range(V.shape[1])]
        mix = V @ (rng.standard_normal(V.shape[1]) + 1j * rng.standard_normal(V.shape[1]))
        nrm = np.sqrt(np.real(np.conj(mix) @ D @ mix))
        if nrm > 1e-12:
            dirs.append(mix / nrm)
        for Wv in dirs:
            kt = ambient_sectional(link, z, Wv)
            kg = ambient_sectional_general(link, z, Wv)
            k = link_sectional(link, z, Wv)
            worst_identity = max(worst_identity, abs(k - 0.5 * kt - h2), abs(kt - kg))
            max_ktilde = max(max_ktilde, kt)
            k_min, k_max = min(k_min, k), max(k_max, k)
            rows.append(
                {
                    "point": [[float(c.real), float(c.imag)] for c in z],
                    "W": [[float(c.real), float(c.imag)] for c in Wv],
                    "K": float(k),
                    "Ktilde": float(kt),
                    "H2": float(h2),
                }
            )
    return {
        "rows": rows,
        "summary": {
            "n_points": n_points,
            "d": link.d,
            "w": list(link.w),
            "max_constraint_residual": worst_constraint,
            "max_frame_residual": worst_frame,
            "max_identity_residual": worst_identity,
            "max_Ktilde": float(max_ktilde),
            "min_K": float(k_min),
            "max_K": float(k_max),
        },
    }
