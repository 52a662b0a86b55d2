"""Points, frames and convexity forms on the hypersurface M = {rho = 0}.

The adapted frame at p (after a chart permutation putting the largest
gradient component last, coordinates (z_1..z_n, w)) is

    Z_alpha = rho_w d/dz_alpha - rho_alpha d/dw,   alpha = 1..n,

with Levi matrix h_{alpha betabar} = rho_{j kbar} Z_alpha^j conj(Z_beta^k)
and bilinear second-order matrix h_{alpha beta} = rho_{jk} Z_alpha^j Z_beta^k.
|d rho|^2 is paired through the inverse ambient metric and |H|^2 is its
reciprocal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .catalog import AmbientMetric
from .jets import Jet3, jet1, jet3


class ProjectionError(RuntimeError):
    pass


class NotStrictlyPseudoconvexError(RuntimeError):
    pass


def stream(seed: int, index: int) -> np.random.Generator:
    """Counter-based per-sample RNG stream; independent of evaluation order."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, index))))


def project_to_surface(fn, x0, tol: float = 1e-13, max_iter: int = 50):
    """Newton iteration along the real gradient of rho onto {rho = 0}."""
    x = np.array(x0, dtype=np.complex128)
    for _ in range(max_iter):
        val, grad = jet1(fn, x)
        if abs(val) <= tol:
            return x
        g2 = float(np.sum(np.abs(grad) ** 2))
        if g2 < 1e-30:
            raise ProjectionError("vanishing gradient during projection")
        x = x - (val / (2.0 * g2)) * np.conj(grad)
    val, _ = jet1(fn, x)
    if abs(val) <= 1e-12:
        return x
    raise ProjectionError(f"projection did not converge (|rho| = {abs(val):.3e})")


@dataclass
class SurfaceFrame:
    """Frame data at a surface point, in chart-permuted coordinates."""

    point: np.ndarray  # original coordinates
    perm: tuple  # original index of each permuted slot
    jet: Jet3  # permuted partial arrays
    metric: AmbientMetric  # permuted ambient metric
    Z: np.ndarray  # (n, N) frame coefficients, permuted coords
    h: np.ndarray  # (n, n) Hermitian Levi matrix
    hol: np.ndarray  # (n, n) bilinear rho_ZZ matrix
    dp2: float  # |d rho|^2
    H2: float  # |H|^2 = 1 / |d rho|^2
    cond_h: float

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    def norm_h(self, zeta) -> float:
        zeta = np.asarray(zeta, dtype=np.complex128)
        return float(np.sqrt(np.real(np.conj(zeta) @ self.h @ zeta)))


def _permute_jet(jet: Jet3, perm) -> Jet3:
    p = list(perm)
    return Jet3(
        point=jet.point[p],
        dim=jet.dim,
        value=jet.value,
        d1=jet.d1[p],
        d20=jet.d20[np.ix_(p, p)],
        d11=jet.d11[np.ix_(p, p)],
        d30=jet.d30[np.ix_(p, p, p)],
        d21=jet.d21[np.ix_(p, p, p)],
    )


def frame_at(fn, metric: AmbientMetric, point, jet: Jet3 | None = None) -> SurfaceFrame:
    """Adapted frame, Levi data and transverse-curvature norm at a point."""
    point = np.asarray(point, dtype=np.complex128)
    if jet is None:
        jet = jet3(fn, point)
    N = fn.dimension
    n = N - 1
    if n < 1:
        raise ValueError("need at least 2 complex variables")
    grad = jet.d1
    gnorm = float(np.linalg.norm(grad))
    if gnorm < 1e-30:
        raise NotStrictlyPseudoconvexError("vanishing gradient")

    perm = tuple(range(N))
    if abs(grad[N - 1]) < 1e-8 * gnorm:
        w = int(np.argmax(np.abs(grad)))
        perm = tuple([j for j in range(N) if j != w] + [w])
    jp = _permute_jet(jet, perm) if perm != tuple(range(N)) else jet
    mp = metric if perm == tuple(range(N)) else AmbientMetric(metric.matrix[np.ix_(list(perm), list(perm))])

    d1 = jp.d1
    Z = np.zeros((n, N), dtype=np.complex128)
    for a in range(n):
        Z[a, a] = d1[N - 1]
        Z[a, N - 1] = -d1[a]

    h = Z @ jp.d11 @ Z.conj().T
    hol = Z @ jp.d20 @ Z.T
    ev = np.linalg.eigvalsh(h)
    if ev[0] <= 0:
        raise NotStrictlyPseudoconvexError(f"Levi matrix not positive definite (min eig {ev[0]:.3e})")
    dp2 = metric.pairing(grad)
    if dp2 <= 0:
        raise NotStrictlyPseudoconvexError("degenerate |d rho|^2")
    return SurfaceFrame(
        point=point,
        perm=perm,
        jet=jp,
        metric=mp,
        Z=Z,
        h=h,
        hol=hol,
        dp2=dp2,
        H2=1.0 / dp2,
        cond_h=float(ev[-1] / ev[0]),
    )


def behnke_peschl(fn, point, jet: Jet3 | None = None) -> float:
    """Min eigenvalue of Re(rho_{jk} eta_j eta_k) + rho_{j kbar} eta_j etabar_k
    restricted to the complex tangent plane, as a real form on R^{2N}."""
    point = np.asarray(point, dtype=np.complex128)
    if jet is None:
        jet = jet3(fn, point)
    N = jet.dim
    P20, P11, grad = jet.d20, jet.d11, jet.d1

    def q(eta):
        return float(np.real(eta @ P20 @ eta) + np.real(eta @ P11 @ np.conj(eta)))

    basis = [np.eye(N, dtype=np.complex128)[j] for j in range(N)]
    basis += [1j * b for b in basis[:N]]
    m = 2 * N
    qs = [q(b) for b in basis]
    M = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            v = 0.5 * (q(basis[i] + basis[j]) - qs[i] - qs[j])
            M[i, j] = M[j, i] = v

    # complex tangent plane: Re and Im of sum rho_j eta_j both vanish
    a, b = grad.real, grad.imag
    C = np.zeros((2, m))
    C[0, :N], C[0, N:] = a, -b
    C[1, :N], C[1, N:] = b, a
    B = scipy.linalg.null_space(C)
    return float(np.linalg.eigvalsh(B.T @ M @ B).min())


def sample_surface(
    fn,
    metric: AmbientMetric,
    n_points: int,
    seed: int,
    scale: float = 1.0,
    start_map=None,
    max_tries: int = 50,
):
    """Deterministic surface samples: per-index Philox streams drive Gaussian
    starts projected onto M; frames failing strict pseudoconvexity are
    redrawn. Returns a list of SurfaceFrame."""
    frames = []
    N = fn.dimension
    for index in range(n_points):
        rng = stream(seed, index)
        frame = None
        for _ in range(max_tries):
            x0 = scale * (rng.standard_normal(N) + 1j * rng.standard_normal(N))
            if start_map is not None:
                x0 = start_map(x0)
            try:
                p = project_to_surface(fn, x0)
                frame = frame_at(fn, metric, p)
                break
            except (ProjectionError, NotStrictlyPseudoconvexError, ArithmeticError):
                continue
        if frame is None:
            raise ProjectionError(f"could not sample point {index} after {max_tries} tries")
        frames.append(frame)
    return frames


def sample_directions(frame: SurfaceFrame, n_dirs: int, seed: int, index: int):
    """h-unit complex Gaussian directions in the frame, one stream per sample."""
    rng = stream(seed, (index + 1) * 1_000_003)
    n = frame.n
    out = []
    for _ in range(n_dirs):
        zeta = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        nrm = frame.norm_h(zeta)
        if nrm < 1e-12:
            continue
        out.append(zeta / nrm)
    return out
