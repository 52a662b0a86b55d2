"""Direct Tanaka-Webster invariants for 3-dimensional M in C^2.

Everything is computed in truncated power-series arithmetic around the base
point (series in the offsets (dz, dw, dzbar, dwbar) to total order 4), so
exterior derivatives of coframe coefficients are exact through the orders
used and the curvature value at the point carries no finite-difference error.

Conventions, with theta = i dbar(rho) restricted to M and Z_1 = s(rho_w d/dz
- rho_z d/dw) for a gauge scale s:

    theta^1 = dz/(s rho_w) - (T^z/(s rho_w)) theta_amb,    theta^1(Z_1) = 1,
    T solved from  rho_j T^j = i,  Hess(T, Z_1bar) = 0     (Reeb field),
    dtheta^1 = theta^1 ^ omega + A^1_{1bar} theta ^ theta^1bar,
    d h_{11bar} = (omega + conj omega) h_{11bar},
    R = (Z_1(q) - Z_1bar(p) - omega([Z_1, Z_1bar])) / h_{11bar},

where omega on the frame is (p, q, r) = (omega(Z_1), omega(Z_1bar),
omega(T)).  Re(r) is overdetermined (it appears in both structural
equations); the two values are averaged and their gap is reported in the
residual.  A_{11} = h_{11bar} conj(A^1_{1bar})."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import eval_series, get_context, tape_for

_ORDER = 4


class _S:
    """Truncated series with operator sugar; value = coefficient of 1."""

    __slots__ = ("ctx", "c")

    def __init__(self, ctx, c):
        self.ctx = ctx
        self.c = c

    @property
    def val(self) -> complex:
        return complex(self.c[0])

    def __add__(self, o):
        if isinstance(o, _S):
            return _S(self.ctx, self.c + o.c)
        z = self.c.copy()
        z[0] += o
        return _S(self.ctx, z)

    __radd__ = __add__

    def __neg__(self):
        return _S(self.ctx, -self.c)

    def __sub__(self, o):
        return self + (-o if isinstance(o, _S) else -complex(o))

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, _S):
            return _S(self.ctx, self.ctx.mul(self.c, o.c))
        return _S(self.ctx, self.c * complex(o))

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, _S):
            return _S(self.ctx, self.ctx.mul(self.c, self.ctx.recip(o.c)))
        return _S(self.ctx, self.c / complex(o))

    def __rtruediv__(self, o):
        return _S(self.ctx, complex(o) * self.ctx.recip(self.c))

    def conj(self):
        return _S(self.ctx, self.ctx.conj(self.c))

    def d(self, v: int):
        return _S(self.ctx, self.ctx.diff(self.c, v))


def _apply(U: dict, f: _S) -> _S:
    """Directional derivative of a scalar series along a vector field."""
    out = None
    for v, comp in U.items():
        term = comp * f.d(v)
        out = term if out is None else out + term
    return out


def _form_on(form: dict, U: dict) -> _S:
    out = None
    for v, coef in form.items():
        if v in U:
            term = coef * U[v]
            out = term if out is None else out + term
    if out is None:
        raise ValueError("empty contraction")
    return out


def _d_form_on(form: dict, U: dict, V: dict) -> _S:
    """(d form)(U, V) for a 1-form with series coefficients."""
    out = None
    for nu, coef in form.items():
        for mu in range(4):
            da = coef.d(mu)
            term = None
            if mu in U and nu in V:
                term = da * U[mu] * V[nu]
            if mu in V and nu in U:
                t2 = da * V[mu] * U[nu]
                term = -t2 if term is None else term - t2
            if term is not None:
                out = term if out is None else out + term
    return out


class StructuralResidualError(ArithmeticError):
    pass


@dataclass
class TW3State:
    """Solved pseudohermitian data at one point of a 3-dimensional M."""

    point: np.ndarray
    chart_swap: bool
    frame_scale: complex
    h11: float  # Levi scalar of the (scaled) frame
    grad_norm_sq: float  # |d rho|^2, Euclidean
    p_conn: complex  # omega(Z_1)
    q_conn: complex  # omega(Z_1bar)
    r_conn: complex  # omega(T)
    A11: complex
    scalar_curvature: float
    curvature_imag: float
    residual: float
    residual_parts: dict

    @property
    def A_ratio(self) -> float:
        """|A_11| / h_11bar, gauge-invariant torsion size."""
        return abs(self.A11) / self.h11


def tw_direct(fn, point, frame_scale: complex = 1.0, tol: float = 1e-7) -> TW3State:
    """Solve the structural equations at one surface point (N = 2 only)."""
    if fn.dimension != 2:
        raise ValueError("direct solver handles 2 complex variables only")
    point = np.asarray(point, dtype=np.complex128)
    ctx = get_context(2, _ORDER)
    rho = _S(ctx, eval_series(tape_for(fn), point, _ORDER))

    g = np.array([rho.d(0).val, rho.d(1).val])
    gnorm = float(np.linalg.norm(g))
    if gnorm < 1e-30:
        raise ArithmeticError("vanishing gradient")
    swap = abs(g[1]) < 1e-8 * gnorm
    iz, iw = (1, 0) if swap else (0, 1)
    izb, iwb = iz + 2, iw + 2

    s = complex(frame_scale)
    rz, rw = rho.d(iz), rho.d(iw)
    rzb, rwb = rho.d(izb), rho.d(iwb)

    Z1 = {iz: s * rw, iw: -s * rz}
    Z1b = {izb: (s * rw).conj(), iwb: (-s * rz).conj()}

    hzz, hzw = rz.d(izb), rz.d(iwb)
    hwz, hww = rw.d(izb), rw.d(iwb)
    # Levi scalar of the scaled frame
    h = (
        hzz * Z1[iz] * Z1b[izb]
        + hzw * Z1[iz] * Z1b[iwb]
        + hwz * Z1[iw] * Z1b[izb]
        + hww * Z1[iw] * Z1b[iwb]
    )
    if not (h.val.real > 0) or abs(h.val.imag) > 1e-10 * abs(h.val.real):
        raise ArithmeticError(f"Levi form not positive at point (h = {h.val})")

    # Reeb field: rho_j T^j = i and Hess(T, Z_1bar) = 0
    cz = (hzz * Z1[iz] + hwz * Z1[iw]).conj()
    cw = (hzw * Z1[iz] + hww * Z1[iw]).conj()
    det = rz * cw - rw * cz
    Tz = (1j * cw) / det
    Tw = (-1j * cz) / det
    T = {iz: Tz, iw: Tw, izb: Tz.conj(), iwb: Tw.conj()}

    # contact form and admissible coframe
    theta = {izb: 1j * rzb, iwb: 1j * rwb}
    inv_srw = 1.0 / (s * rw)
    ccoef = -(Tz * inv_srw)
    theta1 = {iz: inv_srw, izb: ccoef * (1j * rzb), iwb: ccoef * (1j * rwb)}
    theta1b = {v: c for v, c in ((izb, theta1[iz].conj()), (iz, theta1[izb].conj()), (iw, theta1[iwb].conj()))}

    X = _d_form_on(theta1, Z1, Z1b)  # = q
    Y = _d_form_on(theta1, T, Z1)  # = -r
    W = _d_form_on(theta1, T, Z1b)  # = A^1_{1bar}

    q = X
    p = _apply(Z1, h) / h - q.conj()

    Th = _apply(T, h)
    re_r_metric = (Th.val / (2.0 * h.val)).real
    re_r_form = (-Y.val).real
    r_val = complex(0.5 * (re_r_metric + re_r_form), (-Y.val).imag)
    ls_gap = abs(re_r_metric - re_r_form)

    # connection on the bracket via the frame decomposition
    br = {}
    for v in range(4):
        a = _apply(Z1, Z1b[v]) if v in Z1b else None
        b = _apply(Z1b, Z1[v]) if v in Z1 else None
        if a is not None or b is not None:
            zero = _S(ctx, ctx.zero())
            br[v] = (a if a is not None else zero) - (b if b is not None else zero)
    lam = _form_on(theta1, br).val
    mu = _form_on(theta1b, br).val
    nu = _form_on(theta, br).val
    omega_br = lam * p.val + mu * q.val + nu * r_val

    curv = (_apply(Z1, q).val - _apply(Z1b, p).val - omega_br) / h.val
    A_up = W.val
    h_val = h.val.real
    A11 = h_val * np.conj(A_up)

    # independent residuals: both structural equations on all frame pairs
    res = {
        "dtheta_admissible": abs(_d_form_on(theta, Z1, Z1b).val - 1j * h.val),
        "eq1_Z1_Z1b": abs(X.val - q.val),
        "eq1_T_Z1": abs(Y.val + r_val),
        "eq1_T_Z1b": abs(W.val - A_up),
        "eq2_Z1": abs(_apply(Z1, h).val - h.val * (p.val + np.conj(q.val))),
        "eq2_T": abs(Th.val - h.val * 2.0 * r_val.real),
        "curvature_imag": abs(curv.imag),
        "ls_gap": ls_gap,
    }
    residual = max(res.values())
    state = TW3State(
        point=point,
        chart_swap=bool(swap),
        frame_scale=s,
        h11=h_val,
        grad_norm_sq=float(np.sum(np.abs(g) ** 2)),
        p_conn=p.val,
        q_conn=q.val,
        r_conn=r_val,
        A11=complex(A11),
        scalar_curvature=float(curv.real),
        curvature_imag=float(abs(curv.imag)),
        residual=float(residual),
        residual_parts={k: float(v) for k, v in res.items()},
    )
    if residual > tol:
        raise StructuralResidualError(f"structural residual {residual:.3e} above {tol:.1e}")
    return state


def structural_residual(state: TW3State) -> float:
    """Max deviation of both structural equations over all frame pairs."""
    return state.residual


def c0_form(state: TW3State, zeta: complex, c0: float) -> float:
    """R |Z|_h^2 + C0 Tor(Z, Z) for Z = zeta Z_1."""
    if zeta == 0:
        raise ValueError("zero direction")
    z2 = abs(zeta) ** 2 * state.h11
    tor = 2.0 * np.real(1j * state.A11 * zeta * zeta)
    return float(state.scalar_curvature * z2 + c0 * tor)


def c0_min(state: TW3State, c0: float) -> float:
    """Min of c0_form over h-unit directions: R - 2 C0 |A11|/h11."""
    return float(state.scalar_curvature - 2.0 * c0 * state.A_ratio)


def cross_validate(fn, metric, n_points: int, seed: int) -> float:
    """Max |R_direct - 2 K_gauss| over sampled points; requires the
    constant-Hessian hypothesis."""
    from .curvature import HESSIAN_TOL, _unpermuted_d11
    from .secondform import torsion_sup
    from .surface import sample_surface

    frames = sample_surface(fn, metric, n_points, seed)
    d11s = [_unpermuted_d11(f) for f in frames]
    dev = max(float(np.max(np.abs(d - metric.matrix))) for d in d11s)
    if dev > HESSIAN_TOL:
        raise ValueError(f"constant-Hessian hypothesis violated (dev {dev:.3e})")
    worst = 0.0
    for fr in frames:
        sup_a, _ = torsion_sup(fr)
        k_gauss = fr.H2 - 0.5 * sup_a * sup_a / fr.H2
        st = tw_direct(fn, fr.point)
        worst = max(worst, abs(st.scalar_curvature - 2.0 * k_gauss))
    return worst
