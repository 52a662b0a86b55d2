"""Wirtinger jets of defining functions through third order.

A Jet3 packs the point value together with the holomorphic-representative
partial arrays

    d1[j]      = rho_j            d20[j,k]    = rho_{jk}
    d11[j,k]   = rho_{j kbar}     d30[j,k,l]  = rho_{jkl}
    d21[j,k,l] = rho_{jk lbar}

All conjugate blocks (rho_{jbar}, rho_{jbar kbar}, rho_{j kbar lbar}, ...)
are derived by conjugation symmetry of a real-valued rho, never stored.

``fd_check`` is an independent oracle: nested central differences in the
underlying real coordinates with one Richardson level, evaluated through the
plain (order-0) expression path only.
"""

from __future__ import annotations

import numpy as np

from .series import eval_series, eval_values, get_context, tape_for


class Jet3:
    __slots__ = ("point", "dim", "value", "d1", "d20", "d11", "d30", "d21")

    def __init__(self, point, dim, value, d1, d20, d11, d30, d21):
        self.point = point
        self.dim = dim
        self.value = value
        self.d1 = d1
        self.d20 = d20
        self.d11 = d11
        self.d30 = d30
        self.d21 = d21

    @property
    def d1c(self):
        """rho_{jbar}."""
        return np.conj(self.d1)

    @property
    def d02(self):
        """rho_{jbar kbar}."""
        return np.conj(self.d20)

    @property
    def d12(self):
        """rho_{j kbar lbar} = conj(rho_{k l jbar})."""
        return np.conj(np.transpose(self.d21, (2, 0, 1)))


class _Extractor:
    """Gather tables mapping series coefficients to partial tensors."""

    def __init__(self, dim: int):
        ctx = get_context(dim, 3)
        pos = ctx.pos
        N = dim

        def at(*pairs):
            e = [0] * (2 * N)
            for var, bar in pairs:
                e[var + (N if bar else 0)] += 1
            return pos[tuple(e)]

        self.ctx = ctx
        self.i_d1 = np.array([at((j, 0)) for j in range(N)])
        self.i_d20 = np.array([[at((j, 0), (k, 0)) for k in range(N)] for j in range(N)])
        self.i_d11 = np.array([[at((j, 0), (k, 1)) for k in range(N)] for j in range(N)])
        self.i_d30 = np.array(
            [[[at((j, 0), (k, 0), (l, 0)) for l in range(N)] for k in range(N)] for j in range(N)]
        )
        self.i_d21 = np.array(
            [[[at((j, 0), (k, 0), (l, 1)) for l in range(N)] for k in range(N)] for j in range(N)]
        )


_extractors: dict[int, _Extractor] = {}


def _extractor(dim: int) -> _Extractor:
    if dim not in _extractors:
        _extractors[dim] = _Extractor(dim)
    return _extractors[dim]


def jet3(fn, z) -> Jet3:
    """Third-order Wirtinger jet of a DefiningFunction at a point."""
    z = np.asarray(z, dtype=np.complex128)
    ex = _extractor(fn.dimension)
    coeff = eval_series(tape_for(fn), z, 3)
    partials = coeff * ex.ctx.factorials
    return Jet3(
        point=z,
        dim=fn.dimension,
        value=float(partials[0].real),
        d1=partials[ex.i_d1],
        d20=partials[ex.i_d20],
        d11=partials[ex.i_d11],
        d30=partials[ex.i_d30],
        d21=partials[ex.i_d21],
    )


def jet1(fn, z):
    """(value, rho_j) via a first-order pass; cheap path for projections."""
    z = np.asarray(z, dtype=np.complex128)
    coeff = eval_series(tape_for(fn), z, 1)
    pos = get_context(fn.dimension, 1).var_lin[: fn.dimension]
    return float(coeff[0].real), coeff[pos].copy()


# ---------------------------------------------------------------------------
# Finite-difference oracle

# steps per derivative order; larger steps at higher order keep the
# eps/h^order roundoff amplification at or below the truncation error
_FD_STEPS = {1: 1e-5, 2: 1e-3, 3: 5e-3}


def _expand_probes(z, ops, h):
    """Points and weights of the nested central-difference stencil."""
    pts = [np.array(z, dtype=np.complex128)]
    wts = [1.0 + 0.0j]
    for var, bar in ops:
        new_p, new_w = [], []
        for p, w in zip(pts, wts):
            for step, factor in (
                (h, 1.0 / (4 * h)),
                (-h, -1.0 / (4 * h)),
                (1j * h, (1j if bar else -1j) / (4 * h)),
                (-1j * h, (-1j if bar else 1j) / (4 * h)),
            ):
                q = p.copy()
                q[var] += step
                new_p.append(q)
                new_w.append(w * factor)
        pts, wts = new_p, new_w
    return pts, wts


def _rep_list(N: int):
    """Canonical representatives of every stored partial through order 3."""
    reps = []
    for j in range(N):
        reps.append((("d1", (j,)), ((j, 0),)))
    for j in range(N):
        for k in range(j, N):
            reps.append((("d20", (j, k)), ((j, 0), (k, 0))))
    for j in range(N):
        for k in range(N):
            reps.append((("d11", (j, k)), ((j, 0), (k, 1))))
    for j in range(N):
        for k in range(j, N):
            for l in range(k, N):
                reps.append((("d30", (j, k, l)), ((j, 0), (k, 0), (l, 0))))
    for j in range(N):
        for k in range(j, N):
            for l in range(N):
                reps.append((("d21", (j, k, l)), ((j, 0), (k, 0), (l, 1))))
    return reps


def fd_check(fn, z) -> float:
    """Max relative gap between jet3 partials and the FD estimates at z."""
    z = np.asarray(z, dtype=np.complex128)
    jet = jet3(fn, z)
    reps = _rep_list(fn.dimension)

    all_pts, all_wts, seg = [], [], []
    estimates = []  # (field, index, slot_h, slot_h2)
    s = 0
    for (field, index), ops in reps:
        h = _FD_STEPS[len(ops)]
        slots = []
        for step in (h, h / 2):
            pts, wts = _expand_probes(z, ops, step)
            all_pts.extend(pts)
            all_wts.extend(wts)
            seg.extend([s] * len(pts))
            slots.append(s)
            s += 1
        estimates.append((field, index, slots[0], slots[1]))

    values = eval_values(tape_for(fn), np.array(all_pts))
    sums = np.zeros(s, dtype=np.complex128)
    np.add.at(sums, np.array(seg), values * np.array(all_wts))

    worst = 0.0
    for field, index, s1, s2 in estimates:
        fd = (4.0 * sums[s2] - sums[s1]) / 3.0  # one Richardson level
        ref = getattr(jet, field)[index]
        gap = abs(ref - fd) / max(1.0, abs(ref), abs(fd))
        worst = max(worst, gap)
    return worst
