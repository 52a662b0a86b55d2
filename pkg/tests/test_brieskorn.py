"""Brieskorn-Pham link curvature scans."""

import numpy as np
import pytest

from pherm.brieskorn import (
    BrieskornLink,
    ambient_sectional,
    ambient_sectional_general,
    link_sectional,
    sample_link,
    scan,
    tangent_frame,
    weights,
)


def test_weights():
    assert weights((2, 2, 2)) == (2, (1, 1, 1))
    assert weights((2, 3, 5)) == (30, (15, 10, 6))
    assert weights((2, 3, 7)) == (42, (21, 14, 6))
    with pytest.raises(ValueError):
        weights((1, 2, 3))


def test_hand_value():
    link = BrieskornLink.create((2, 2, 2), 1.0)
    z = np.array([1 / np.sqrt(2), 1j / np.sqrt(2), 0.0])
    W = np.array([0.0, 0.0, 1.0], dtype=complex)
    assert abs(link.poly(z)) < 1e-15
    assert link.xi_norm_sq(z) == pytest.approx(4.0, abs=1e-14)
    assert ambient_sectional(link, z, W) == pytest.approx(-1.0, abs=1e-13)
    assert ambient_sectional_general(link, z, W) == pytest.approx(-1.0, abs=1e-13)
    assert link.mean_curvature_sq(z) == pytest.approx(1.0, abs=1e-14)
    assert link_sectional(link, z, W) == pytest.approx(0.5, abs=1e-13)


def test_quadric_scaling():
    # for all-quadratic exponents the cone is scale invariant and the ambient
    # sectional curvature scales like 1/lambda^2
    link1 = BrieskornLink.create((2, 2, 2), 1.0)
    lam = 1.7
    z = np.array([1 / np.sqrt(2), 1j / np.sqrt(2), 0.0])
    W = np.array([0.0, 0.0, 1.0], dtype=complex)
    k1 = ambient_sectional(link1, z, W)
    k2 = ambient_sectional(link1, lam * z, W)
    assert k2 == pytest.approx(k1 / lam**2, rel=1e-12)


def test_sample_link_constraints_and_determinism():
    link = BrieskornLink.create((2, 3, 5), 1.0)
    pts1 = sample_link(link, 8, seed=5)
    pts2 = sample_link(link, 8, seed=5)
    assert all(np.array_equal(a, b) for a, b in zip(pts1, pts2))
    for z in pts1:
        assert abs(link.poly(z)) < 1e-10
        assert abs(np.sum(np.abs(z) ** 2) - 1.0) < 1e-10


def test_tangent_frame_orthonormality():
    link = BrieskornLink.create((2, 3, 7), 1.0)
    for z in sample_link(link, 5, seed=9):
        V = tangent_frame(link, z)
        m = link.m
        assert V.shape == (m, m - 2)
        # weighted-orthonormal: V^H diag(1/w) V = I
        G = V.conj().T @ np.diag(1.0 / np.array(link.w)) @ V
        assert np.allclose(G, np.eye(m - 2), atol=1e-12)
        # tangent to the cone and to the sphere normal direction
        assert np.max(np.abs(link.grad(z) @ V)) < 1e-12
        assert np.max(np.abs(np.conj(z) @ V)) < 1e-12


@pytest.mark.parametrize("exps,r", [((2, 3, 5), 1.0), ((2, 2, 2, 2), 2.0)])
def test_scan_invariants(exps, r):
    link = BrieskornLink.create(exps, r)
    out = scan(link, 20, seed=0)
    s = out["summary"]
    assert s["max_constraint_residual"] < 1e-10
    assert s["max_frame_residual"] < 1e-12
    assert s["max_identity_residual"] < 1e-10
    assert s["max_Ktilde"] <= 1e-12
    for row in out["rows"]:
        # H^2 = sum w_j |z_j|^2; for all-quadratic exponents it equals r
        if all(a == 2 for a in exps):
            assert row["H2"] == pytest.approx(r, abs=1e-12)
        assert row["K"] == pytest.approx(0.5 * row["Ktilde"] + row["H2"], abs=1e-12)


def test_diagonal_and_general_hessian_agree():
    link = BrieskornLink.create((2, 3, 7), 1.0)
    rng = np.random.Generator(np.random.Philox(123))
    for z in sample_link(link, 5, seed=14):
        V = tangent_frame(link, z)
        for _ in range(3):
            c = rng.standard_normal(V.shape[1]) + 1j * rng.standard_normal(V.shape[1])
            W = V @ c
            a = ambient_sectional(link, z, W)
            b = ambient_sectional_general(link, z, W)
            assert a == pytest.approx(b, abs=1e-12 * max(1.0, abs(a)))
