"""Truncated multivariate power series over the Wirtinger seed variables.

A series in 2N seed variables (z_1..z_N, zb_1..zb_N) truncated at total
order K is stored as a flat complex coefficient vector indexed by the
multi-indices of a SeriesContext.  Evaluating an expression tape with the
variables seeded as ``z_j + eps_j`` produces, in one pass, every partial
derivative of the expression through order K (Taylor coefficients times
multi-index factorials).

The inner loops (series product, tape execution) run as numba kernels when
numba is importable and the environment variable PHERM_DISABLE_NUMBA is not
set; a pure-numpy fallback implements the identical semantics.  Both paths
are deterministic and agree to the last bit on the operation order within a
product.
"""

from __future__ import annotations

import itertools
import math
import os
import weakref

import numpy as np

from .expr import BinOp, Call, EvalDomainError, Neg, Num, Param, Pow, Var

_DISABLE = os.environ.get("PHERM_DISABLE_NUMBA", "").strip() not in ("", "0")

if not _DISABLE:
    try:
        from numba import njit

        HAS_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        HAS_NUMBA = False
else:
    HAS_NUMBA = False

if not HAS_NUMBA:

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


# opcodes
OP_VAR = 0
OP_CONST = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_NEG = 6
OP_CONJ = 7
OP_RE = 8
OP_IM = 9
OP_ABS2 = 10
OP_LOG = 11
OP_POW = 12

# status codes from kernels
OK = 0
ERR_DIV = 1
ERR_LOG = 2


class SeriesContext:
    """Index bookkeeping for truncated series in ``2*dim`` seed variables."""

    def __init__(self, dim: int, order: int):
        self.dim = dim
        self.n_vars = 2 * dim
        self.order = order
        m, K = self.n_vars, order

        exps = []
        for total in range(K + 1):
            for c in itertools.combinations_with_replacement(range(m), total):
                e = [0] * m
                for v in c:
                    e[v] += 1
                exps.append(tuple(e))
        # degree-major, then lexicographic within a degree
        exps = sorted(set(exps), key=lambda e: (sum(e), e))
        self.exps = np.array(exps, dtype=np.int64)
        self.n_idx = len(exps)
        self.pos = {e: i for i, e in enumerate(exps)}

        # product table grouped so that deg_i + deg_j <= K
        by_deg: dict[int, list[int]] = {}
        for i, e in enumerate(exps):
            by_deg.setdefault(sum(e), []).append(i)
        mi, mj, mk = [], [], []
        for d1, idx1 in by_deg.items():
            for d2, idx2 in by_deg.items():
                if d1 + d2 > K:
                    continue
                for i in idx1:
                    ei = exps[i]
                    for j in idx2:
                        ej = exps[j]
                        k = self.pos[tuple(a + b for a, b in zip(ei, ej))]
                        mi.append(i)
                        mj.append(j)
                        mk.append(k)
        order_key = np.lexsort((np.array(mj), np.array(mi), np.array(mk)))
        self.mul_i = np.array(mi, dtype=np.int64)[order_key]
        self.mul_j = np.array(mj, dtype=np.int64)[order_key]
        self.mul_k = np.array(mk, dtype=np.int64)[order_key]

        # conjugation swaps the z block with the zb block
        self.conj_perm = np.array(
            [self.pos[tuple(list(e[dim:]) + list(e[:dim]))] for e in exps],
            dtype=np.int64,
        )
        # position of the degree-1 index of each seed variable
        lin = []
        for v in range(m):
            e = [0] * m
            e[v] = 1
            lin.append(self.pos[tuple(e)])
        self.var_lin = np.array(lin, dtype=np.int64)

        self.factorials = np.array(
            [math.prod(math.factorial(int(a)) for a in e) for e in exps], dtype=np.float64
        )
        self.n_newton = max(1, math.ceil(math.log2(K + 1))) if K > 0 else 1

        # differentiation maps: coeff of mu in d_v f = (mu_v+1) * coeff(mu+e_v)
        self._diff = []
        for v in range(m):
            src, dst, fac = [], [], []
            for i, e in enumerate(exps):
                if e[v] > 0:
                    tgt = list(e)
                    tgt[v] -= 1
                    src.append(i)
                    dst.append(self.pos[tuple(tgt)])
                    fac.append(e[v])
            self._diff.append(
                (
                    np.array(src, dtype=np.int64),
                    np.array(dst, dtype=np.int64),
                    np.array(fac, dtype=np.float64),
                )
            )

    # ---- numpy-level series operations (used by the direct solver) ----

    def zero(self):
        return np.zeros(self.n_idx, dtype=np.complex128)

    def const(self, v):
        c = self.zero()
        c[0] = v
        return c

    def seed(self, var: int, value: complex):
        """Series of the seed variable itself: value + eps_var."""
        c = self.zero()
        c[0] = value
        c[self.var_lin[var]] = 1.0
        return c

    def mul(self, a, b):
        out = self.zero()
        np.add.at(out, self.mul_k, a[self.mul_i] * b[self.mul_j])
        return out

    def conj(self, a):
        return np.conj(a[self.conj_perm])

    def recip(self, a):
        if a[0] == 0:
            raise EvalDomainError("series reciprocal at zero")
        r = self.const(1.0 / a[0])
        for _ in range(self.n_newton):
            ar = self.mul(a, r)
            t = -ar
            t[0] += 2.0
            r = self.mul(r, t)
        return r

    def div(self, a, b):
        return self.mul(a, self.recip(b))

    def log(self, a):
        if a[0] == 0:
            raise EvalDomainError("series log at zero")
        u = a / a[0]
        u[0] -= 1.0
        acc = u.copy()
        upow = u
        for k in range(2, self.order + 1):
            upow = self.mul(upow, u)
            acc += ((-1.0) ** (k + 1) / k) * upow
        acc[0] += np.log(complex(a[0]))
        return acc

    def pow_int(self, a, k: int):
        if k == 0:
            return self.const(1.0)
        if k < 0:
            return self.pow_int(self.recip(a), -k)
        r = a.copy()
        for _ in range(k - 1):
            r = self.mul(r, a)
        return r

    def diff(self, a, v: int):
        """Series of the v-th seed-variable derivative (top order truncated)."""
        src, dst, fac = self._diff[v]
        out = self.zero()
        out[dst] = a[src] * fac
        return out


_contexts: dict[tuple[int, int], SeriesContext] = {}


def get_context(dim: int, order: int) -> SeriesContext:
    key = (dim, order)
    if key not in _contexts:
        _contexts[key] = SeriesContext(dim, order)
    return _contexts[key]


# ---------------------------------------------------------------------------
# Expression tapes


class Tape:
    def __init__(self, ops, a1, a2, consts, n_slots, root, dim):
        self.ops = np.array(ops, dtype=np.int64)
        self.a1 = np.array(a1, dtype=np.int64)
        self.a2 = np.array(a2, dtype=np.int64)
        self.consts = np.array(consts, dtype=np.complex128)
        self.n_slots = n_slots
        self.root = root
        self.dim = dim


def compile_tape(tree, dim: int) -> Tape:
    """Flatten a fully bound expression tree into an instruction tape."""
    ops, a1, a2, consts = [], [], [], []

    def emit(op, x=0, y=0):
        ops.append(op)
        a1.append(x)
        a2.append(y)
        return len(ops) - 1  # dst slot == instruction index

    def walk(n) -> int:
        if isinstance(n, Num):
            consts.append(complex(n.value))
            return emit(OP_CONST, len(consts) - 1)
        if isinstance(n, Var):
            if n.index >= dim:
                raise ValueError(f"z{n.index + 1} out of range for dimension {dim}")
            return emit(OP_VAR, n.index)
        if isinstance(n, Param):
            raise ValueError(f"unbound parameter {n.name!r}")
        if isinstance(n, Neg):
            return emit(OP_NEG, walk(n.a))
        if isinstance(n, Pow):
            return emit(OP_POW, walk(n.base), n.exponent)
        if isinstance(n, BinOp):
            x = walk(n.a)
            y = walk(n.b)
            code = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV}[n.op]
            return emit(code, x, y)
        if isinstance(n, Call):
            x = walk(n.arg)
            code = {
                "re": OP_RE,
                "im": OP_IM,
                "abs2": OP_ABS2,
                "conj": OP_CONJ,
                "log": OP_LOG,
            }[n.fn]
            return emit(code, x)
        raise TypeError(f"unknown node {n!r}")

    root = walk(tree)
    return Tape(ops, a1, a2, consts, len(ops), root, dim)


_tapes: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def tape_for(fn) -> Tape:
    """Tape of a DefiningFunction's bound tree, cached per function object."""
    tape = _tapes.get(fn)
    if tape is None:
        tape = compile_tape(fn.bound_tree, fn.dimension)
        _tapes[fn] = tape
    return tape


# ---------------------------------------------------------------------------
# Numba kernels


@njit(cache=True)
def _nb_mul(a, b, out, mi, mj, mk):
    out[:] = 0.0
    for t in range(mi.shape[0]):
        out[mk[t]] += a[mi[t]] * b[mj[t]]


@njit(cache=True)
def _nb_recip(a, out, t1, t2, mi, mj, mk, n_newton):
    out[:] = 0.0
    out[0] = 1.0 / a[0]
    for _ in range(n_newton):
        _nb_mul(a, out, t1, mi, mj, mk)
        for i in range(t1.shape[0]):
            t1[i] = -t1[i]
        t1[0] += 2.0
        _nb_mul(out, t1, t2, mi, mj, mk)
        out[:] = t2
    return 0


@njit(cache=True)
def _nb_run_tape(
    ops, a1, a2, consts, point, slots, mi, mj, mk, conj_perm, var_lin, order, n_newton, dim
):
    """Execute a tape over series slots. Returns (status, failing instruction)."""
    n_idx = slots.shape[1]
    t1 = np.zeros(n_idx, np.complex128)
    t2 = np.zeros(n_idx, np.complex128)
    t3 = np.zeros(n_idx, np.complex128)
    for s in range(ops.shape[0]):
        op = ops[s]
        x = a1[s]
        y = a2[s]
        if op == OP_VAR:
            slots[s, :] = 0.0
            slots[s, 0] = point[x]
            if n_idx > 1:
                slots[s, var_lin[x]] = 1.0
        elif op == OP_CONST:
            slots[s, :] = 0.0
            slots[s, 0] = consts[x]
        elif op == OP_ADD:
            for i in range(n_idx):
                slots[s, i] = slots[x, i] + slots[y, i]
        elif op == OP_SUB:
            for i in range(n_idx):
                slots[s, i] = slots[x, i] - slots[y, i]
        elif op == OP_NEG:
            for i in range(n_idx):
                slots[s, i] = -slots[x, i]
        elif op == OP_MUL:
            _nb_mul(slots[x], slots[y], slots[s], mi, mj, mk)
        elif op == OP_DIV:
            if slots[y, 0] == 0:
                return ERR_DIV, s
            _nb_recip(slots[y], t1, t2, t3, mi, mj, mk, n_newton)
            _nb_mul(slots[x], t1, slots[s], mi, mj, mk)
        elif op == OP_CONJ:
            for i in range(n_idx):
                slots[s, i] = np.conj(slots[x, conj_perm[i]])
        elif op == OP_RE:
            for i in range(n_idx):
                slots[s, i] = 0.5 * (slots[x, i] + np.conj(slots[x, conj_perm[i]]))
        elif op == OP_IM:
            for i in range(n_idx):
                slots[s, i] = -0.5j * (slots[x, i] - np.conj(slots[x, conj_perm[i]]))
        elif op == OP_ABS2:
            for i in range(n_idx):
                t1[i] = np.conj(slots[x, conj_perm[i]])
            _nb_mul(slots[x], t1, slots[s], mi, mj, mk)
        elif op == OP_LOG:
            if slots[x, 0] == 0:
                return ERR_LOG, s
            c0 = slots[x, 0]
            for i in range(n_idx):
                t1[i] = slots[x, i] / c0  # u + 1
            t1[0] -= 1.0
            slots[s, :] = t1  # k = 1 term
            t2[:] = t1
            for k in range(2, order + 1):
                _nb_mul(t2, t1, t3, mi, mj, mk)
                t2[:] = t3
                coef = ((-1.0) ** (k + 1)) / k
                for i in range(n_idx):
                    slots[s, i] += coef * t2[i]
            slots[s, 0] += np.log(c0)
        elif op == OP_POW:
            k = y
            if k == 0:
                slots[s, :] = 0.0
                slots[s, 0] = 1.0
            else:
                if k < 0:
                    if slots[x, 0] == 0:
                        return ERR_DIV, s
                    _nb_recip(slots[x], t1, t2, t3, mi, mj, mk, n_newton)
                    k = -k
                else:
                    t1[:] = slots[x]
                slots[s, :] = t1
                for _ in range(k - 1):
                    _nb_mul(slots[s], t1, t2, mi, mj, mk)
                    slots[s, :] = t2
    return OK, -1


@njit(cache=True)
def _nb_jet_batch(
    ops, a1, a2, consts, points, out, mi, mj, mk, conj_perm, var_lin, order, n_newton, dim, root
):
    n_pts = points.shape[0]
    n_idx = out.shape[1]
    slots = np.zeros((ops.shape[0], n_idx), np.complex128)
    for p in range(n_pts):
        status, where = _nb_run_tape(
            ops, a1, a2, consts, points[p], slots, mi, mj, mk, conj_perm, var_lin,
            order, n_newton, dim,
        )
        if status != OK:
            return status, p, where
        out[p, :] = slots[root]
    return OK, -1, -1


@njit(cache=True)
def _nb_values(ops, a1, a2, consts, points, out, root):
    """Plain (order-0) evaluation of a tape at many points."""
    n_pts = points.shape[0]
    slots = np.zeros(ops.shape[0], np.complex128)
    for p in range(n_pts):
        for s in range(ops.shape[0]):
            op = ops[s]
            x = a1[s]
            y = a2[s]
            if op == OP_VAR:
                slots[s] = points[p, x]
            elif op == OP_CONST:
                slots[s] = consts[x]
            elif op == OP_ADD:
                slots[s] = slots[x] + slots[y]
            elif op == OP_SUB:
                slots[s] = slots[x] - slots[y]
            elif op == OP_NEG:
                slots[s] = -slots[x]
            elif op == OP_MUL:
                slots[s] = slots[x] * slots[y]
            elif op == OP_DIV:
                if slots[y] == 0:
                    return ERR_DIV, p, s
                slots[s] = slots[x] / slots[y]
            elif op == OP_CONJ:
                slots[s] = np.conj(slots[x])
            elif op == OP_RE:
                slots[s] = complex(slots[x].real, 0.0)
            elif op == OP_IM:
                slots[s] = complex(slots[x].imag, 0.0)
            elif op == OP_ABS2:
                v = slots[x]
                slots[s] = complex(v.real * v.real + v.imag * v.imag, 0.0)
            elif op == OP_LOG:
                if slots[x] == 0:
                    return ERR_LOG, p, s
                slots[s] = np.log(slots[x])
            elif op == OP_POW:
                k = y
                b = slots[x]
                if k < 0:
                    if b == 0:
                        return ERR_DIV, p, s
                    b = 1.0 / b
                    k = -k
                acc = complex(1.0, 0.0)
                for _ in range(k):
                    acc = acc * b
                slots[s] = acc
        out[p] = slots[root]
    return OK, -1, -1


# ---------------------------------------------------------------------------
# Numpy fallback mirrors


def _np_run_tape(tape: Tape, ctx: SeriesContext, point):
    slots = np.zeros((tape.n_slots, ctx.n_idx), dtype=np.complex128)
    for s in range(tape.n_slots):
        op = int(tape.ops[s])
        x = int(tape.a1[s])
        y = int(tape.a2[s])
        if op == OP_VAR:
            slots[s] = ctx.seed(x, point[x])
        elif op == OP_CONST:
            slots[s] = ctx.const(tape.consts[x])
        elif op == OP_ADD:
            slots[s] = slots[x] + slots[y]
        elif op == OP_SUB:
            slots[s] = slots[x] - slots[y]
        elif op == OP_NEG:
            slots[s] = -slots[x]
        elif op == OP_MUL:
            slots[s] = ctx.mul(slots[x], slots[y])
        elif op == OP_DIV:
            slots[s] = ctx.div(slots[x], slots[y])
        elif op == OP_CONJ:
            slots[s] = ctx.conj(slots[x])
        elif op == OP_RE:
            slots[s] = 0.5 * (slots[x] + ctx.conj(slots[x]))
        elif op == OP_IM:
            slots[s] = -0.5j * (slots[x] - ctx.conj(slots[x]))
        elif op == OP_ABS2:
            slots[s] = ctx.mul(slots[x], ctx.conj(slots[x]))
        elif op == OP_LOG:
            slots[s] = ctx.log(slots[x])
        elif op == OP_POW:
            slots[s] = ctx.pow_int(slots[x], y)
    return slots[tape.root]


def _np_values(tape: Tape, points):
    n_pts = points.shape[0]
    slots = np.empty((tape.n_slots, n_pts), dtype=np.complex128)
    for s in range(tape.n_slots):
        op = int(tape.ops[s])
        x = int(tape.a1[s])
        y = int(tape.a2[s])
        if op == OP_VAR:
            slots[s] = points[:, x]
        elif op == OP_CONST:
            slots[s] = tape.consts[x]
        elif op == OP_ADD:
            slots[s] = slots[x] + slots[y]
        elif op == OP_SUB:
            slots[s] = slots[x] - slots[y]
        elif op == OP_NEG:
            slots[s] = -slots[x]
        elif op == OP_MUL:
            slots[s] = slots[x] * slots[y]
        elif op == OP_DIV:
            if np.any(slots[y] == 0):
                raise EvalDomainError("division by zero")
            slots[s] = slots[x] / slots[y]
        elif op == OP_CONJ:
            slots[s] = np.conj(slots[x])
        elif op == OP_RE:
            slots[s] = slots[x].real.astype(np.complex128)
        elif op == OP_IM:
            slots[s] = slots[x].imag.astype(np.complex128)
        elif op == OP_ABS2:
            slots[s] = (slots[x].real ** 2 + slots[x].imag ** 2).astype(np.complex128)
        elif op == OP_LOG:
            if np.any(slots[x] == 0):
                raise EvalDomainError("log of zero")
            slots[s] = np.log(slots[x])
        elif op == OP_POW:
            if y < 0 and np.any(slots[x] == 0):
                raise EvalDomainError("zero raised to a negative power")
            slots[s] = slots[x] ** y
    return slots[tape.root]


# ---------------------------------------------------------------------------
# Public evaluation entry points

_ERRMSG = {ERR_DIV: "division by zero", ERR_LOG: "log of zero"}


def eval_series(tape: Tape, point, order: int):
    """Series coefficients (n_idx,) of the tape at one point."""
    ctx = get_context(tape.dim, order)
    if HAS_NUMBA:
        out = np.empty((1, ctx.n_idx), dtype=np.complex128)
        pts = np.asarray(point, dtype=np.complex128).reshape(1, -1)
        status, _, _ = _nb_jet_batch(
            tape.ops, tape.a1, tape.a2, tape.consts, pts, out,
            ctx.mul_i, ctx.mul_j, ctx.mul_k, ctx.conj_perm, ctx.var_lin,
            ctx.order, ctx.n_newton, ctx.dim, tape.root,
        )
        if status != OK:
            raise EvalDomainError(_ERRMSG[status])
        return out[0]
    return _np_run_tape(tape, ctx, np.asarray(point, dtype=np.complex128))


def eval_series_many(tape: Tape, points, order: int):
    """Series coefficients (n_pts, n_idx) at several points."""
    pts = np.ascontiguousarray(points, dtype=np.complex128)
    ctx = get_context(tape.dim, order)
    if HAS_NUMBA:
        out = np.empty((pts.shape[0], ctx.n_idx), dtype=np.complex128)
        status, _, _ = _nb_jet_batch(
            tape.ops, tape.a1, tape.a2, tape.consts, pts, out,
            ctx.mul_i, ctx.mul_j, ctx.mul_k, ctx.conj_perm, ctx.var_lin,
            ctx.order, ctx.n_newton, ctx.dim, tape.root,
        )
        if status != OK:
            raise EvalDomainError(_ERRMSG[status])
        return out
    return np.array([_np_run_tape(tape, ctx, p) for p in pts])


def eval_values(tape: Tape, points):
    """Plain complex values of the tape at points (n_pts, dim)."""
    pts = np.ascontiguousarray(points, dtype=np.complex128)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if HAS_NUMBA:
        out = np.empty(pts.shape[0], dtype=np.complex128)
        status, _, _ = _nb_values(tape.ops, tape.a1, tape.a2, tape.consts, pts, out, tape.root)
        if status != OK:
            raise EvalDomainError(_ERRMSG[status])
        return out
    # chunk to bound the slots working set
    outs = []
    for lo in range(0, pts.shape[0], 16384):
        outs.append(_np_values(tape, pts[lo : lo + 16384]))
    return np.concatenate(outs) if outs else np.empty(0, dtype=np.complex128)
