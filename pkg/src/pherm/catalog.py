"""Built-in defining functions and the ambient Hermitian metric type."""

from __future__ import annotations

import json

import numpy as np

from .expr import DefiningFunction, defining_function


class AmbientMetric:
    """Constant Hermitian positive-definite metric a_{j kbar} on C^N.

    ``matrix[j, k]`` holds a_{j kbar}.  The inverse is stored transposed the
    usual way: inverse_t[k, j] = a^{j kbar}, so that contractions like
    |d rho|^2 = a^{j kbar} rho_j rho_kbar become conj(r)^T @ inv @ r.
    """

    def __init__(self, matrix):
        m = np.array(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("metric must be a square matrix")
        scale = max(1.0, float(np.abs(m).max()))
        if np.abs(m - m.conj().T).max() > 1e-12 * scale:
            raise ValueError("metric must be Hermitian")
        if np.linalg.eigvalsh(m).min() <= 0:
            raise ValueError("metric must be positive definite")
        m.flags.writeable = False
        self.matrix = m
        self.dim = m.shape[0]
        inv = np.linalg.inv(m)
        inv.flags.writeable = False
        self.inverse = inv
        self.is_identity = bool(np.array_equal(m, np.eye(self.dim)))

    @classmethod
    def identity(cls, dim: int) -> "AmbientMetric":
        return cls(np.eye(dim))

    @classmethod
    def diagonal(cls, values) -> "AmbientMetric":
        return cls(np.diag(np.asarray(values, dtype=np.complex128)))

    def pairing(self, r):
        """|d rho|^2 = a^{j kbar} rho_j rho_kbar for a gradient vector r."""
        r = np.asarray(r, dtype=np.complex128)
        return float(np.real(np.conj(r) @ self.inverse.T @ r))

    def describe(self):
        if self.is_identity:
            return "identity"
        d = np.diag(self.matrix)
        if np.array_equal(self.matrix, np.diag(d)) and np.all(d.imag == 0):
            return "diag:" + ",".join(repr(float(x.real)) for x in d)
        return json.dumps([[[v.real, v.imag] for v in row] for row in self.matrix])


def parse_metric(text: str, dim: int) -> AmbientMetric:
    """CLI metric syntax: 'identity', 'diag:a,b,...', or a JSON matrix."""
    text = text.strip()
    if text == "identity":
        return AmbientMetric.identity(dim)
    if text.startswith("diag:"):
        vals = [float(x) for x in text[5:].split(",")]
        if len(vals) != dim:
            raise ValueError(f"diag metric needs {dim} entries, got {len(vals)}")
        return AmbientMetric.diagonal(vals)
    data = json.loads(text)
    m = np.array(
        [[complex(v[0], v[1]) if isinstance(v, list) else complex(v) for v in row] for row in data]
    )
    if m.shape != (dim, dim):
        raise ValueError(f"metric shape {m.shape} does not match dimension {dim}")
    return AmbientMetric(m)


# ---------------------------------------------------------------------------
# Families


def _sum(terms):
    return "+".join(terms)


def _sphere(n: int = 1):
    N = n + 1
    expr = _sum(f"abs2(z{j})" for j in range(1, N + 1)) + "-1"
    return defining_function(expr, N), AmbientMetric.identity(N)


def _perturbed_sphere(n: int = 1):
    N = n + 1
    expr = (
        _sum(f"abs2(z{j})" for j in range(1, N + 1))
        + "+"
        + _sum(f"re(z{j}^2)" for j in range(1, N + 1))
        + "-1"
    )
    return defining_function(expr, N), AmbientMetric.identity(N)


def _ellipsoid(alpha=None, beta=None, gamma=None, sigma=None, axes=None):
    if axes is not None:
        if any(v is not None for v in (alpha, beta, gamma, sigma)):
            raise ValueError("pass either axes=(a,b,c,d) or (alpha,beta,gamma,sigma)")
        a, b, c, d = (float(x) for x in axes)
        alpha, gamma = (a + b) / 2.0, (a - b) / 2.0
        beta, sigma = (c + d) / 2.0, (c - d) / 2.0
    alpha, beta = float(alpha), float(beta)
    gamma = 0.0 if gamma is None else float(gamma)
    sigma = 0.0 if sigma is None else float(sigma)
    if not (alpha > abs(gamma) and beta > abs(sigma)):
        raise ValueError(
            "ellipsoid requires alpha > |gamma| and beta > |sigma| "
            f"(got alpha={alpha}, gamma={gamma}, beta={beta}, sigma={sigma})"
        )
    fn = defining_function(
        "alpha*abs2(z1)+beta*abs2(z2)+re(gamma*z1^2+sigma*z2^2)-1",
        2,
        params={"alpha": alpha, "beta": beta, "gamma": gamma, "sigma": sigma},
    )
    return fn, AmbientMetric.diagonal([alpha, beta])


def _hartogs(t: float = 0.0):
    t = float(t)
    if t < 0:
        raise ValueError("hartogs requires t >= 0")
    fn = defining_function("-1+abs2(z1)+abs2(z2)+t*re(z1^2)^2", 2, params={"t": t})
    return fn, AmbientMetric.identity(2)


def _reinhardt(eps: float = 1.0):
    eps = float(eps)
    if eps <= 0:
        raise ValueError("reinhardt requires eps > 0")
    # scale normalised so theta = i dbar(rho) is the structure locally
    # isomorphic to the standard perturbed sphere for every eps
    fn = defining_function(
        "(log(abs2(z1))^2+log(abs2(z2))^2)/(4*eps^2)-1", 2, params={"eps": eps}
    )
    return fn, AmbientMetric.identity(2)


FAMILIES = {
    "sphere": {
        "build": _sphere,
        "defaults": {"n": 1},
        "description": "unit sphere |z|^2 = 1 in C^(n+1)",
    },
    "ellipsoid": {
        "build": _ellipsoid,
        "defaults": {"alpha": 1.5, "beta": 2.0, "gamma": 0.3, "sigma": 0.4},
        "description": "real ellipsoid alpha|z|^2+beta|w|^2+Re(gamma z^2+sigma w^2)=1 in C^2",
    },
    "perturbed_sphere_E": {
        "build": _perturbed_sphere,
        "defaults": {"n": 1},
        "description": "sphere perturbed by Re sum z_j^2; the sharp example for the curvature bound",
    },
    "hartogs": {
        "build": _hartogs,
        "defaults": {"t": 0.5},
        "description": "Hartogs-type surface -1+|z|^2+|w|^2+t(Re z^2)^2 = 0 in C^2",
    },
    "reinhardt": {
        "build": _reinhardt,
        "defaults": {"eps": 1.0},
        "description": "log-torus (log|z|)^2+(log|w|)^2 = eps^2 in C^2 (axes excluded)",
    },
}


def builtin_family(name: str, params: dict | None = None):
    """Return (DefiningFunction, AmbientMetric) for a catalog family."""
    if name not in FAMILIES:
        raise KeyError(f"unknown family {name!r}; known: {sorted(FAMILIES)}")
    spec = FAMILIES[name]
    kwargs = dict(spec["defaults"])
    if params:
        unknown = set(params) - set(kwargs) - {"axes"}
        if unknown or ("axes" in params and name != "ellipsoid"):
            raise ValueError(f"unknown parameters for {name}: {sorted(set(params) - set(kwargs))}")
        if "axes" in params:
            kwargs = {"axes": params["axes"]}
        else:
            kwargs.update(params)
    return spec["build"](**kwargs)


def start_map_for(name: str):
    """Newton starting transform for families whose surface avoids the origin chart.

    The log-torus needs starts bounded away from the coordinate axes.
    """
    if name == "reinhardt":
        return lambda x: np.exp(0.8 * x)
    return None
