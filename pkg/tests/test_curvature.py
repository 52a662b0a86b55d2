"""Sectional curvature, the sharp lower bound, the reference tensor, and
eigenvalue bounds."""

import numpy as np
import pytest

from pherm.catalog import builtin_family, start_map_for
from pherm.curvature import (
    analyze,
    bound_residual,
    lambda1_report,
    ref_ricci,
    ref_scalar,
    ref_sectional,
    reference_tensor,
    sectional_curvature,
    theta_average,
)
from pherm.secondform import torsion_matrix
from pherm.surface import frame_at, sample_surface, stream


def _report(name, params=None, n_points=20, n_dirs=8, seed=0):
    fn, metric = builtin_family(name, params)
    return analyze(
        fn, metric, n_points, n_dirs, seed,
        family=name, params=params, start_map=start_map_for(name),
    )


# ---------------------------------------------------------------------------
# reference tensor


@pytest.mark.parametrize("n", [1, 2, 3])
def test_reference_tensor_contractions(n):
    rng = stream(31, n)
    M = rng.standard_normal((n, n))
    h = M @ M.T + n * np.eye(n)  # real SPD, so the bilinear form coincides
    R = reference_tensor(h)
    ric = ref_ricci(R, h)
    assert np.allclose(ric, 0.5 * n * h, atol=1e-12)
    assert ref_scalar(R, h) == pytest.approx(n * n / 2.0, abs=1e-12)
    # exact symmetries: first/third and second/fourth slots interchange
    assert np.array_equal(R, np.transpose(R, (2, 1, 0, 3)))
    assert np.array_equal(R, np.transpose(R, (0, 3, 2, 1)))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_reference_sectional_range(n):
    h = 2.0 * np.eye(n)
    R = reference_tensor(h)
    rng = stream(32, n)
    lo, hi = np.inf, -np.inf
    for _ in range(200):
        zeta = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        k = ref_sectional(R, h, zeta)
        lo, hi = min(lo, k), max(hi, k)
    assert lo >= 0.25 - 1e-12
    assert hi <= 0.5 + 1e-12
    # real directions are extremal and attain exactly 1/4
    assert ref_sectional(R, h, np.ones(n)) == pytest.approx(0.25, abs=1e-12)
    if n == 1:
        # three-dimensional case: every direction gives 1/4
        assert hi == pytest.approx(0.25, abs=1e-12)


def test_gauss_path_matches_reference_tensor():
    fn, metric = builtin_family("perturbed_sphere_E", {"n": 2})
    fr = sample_surface(fn, metric, 1, seed=6)[0]
    R = reference_tensor(fr.h, fr.hol)
    A = torsion_matrix(fr)
    rng = stream(33, 0)
    for _ in range(40):
        zeta = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        k_gauss = sectional_curvature(fr, zeta, A)
        k_ref = ref_sectional(R, fr.h, zeta)
        assert k_gauss == pytest.approx(k_ref, abs=1e-12)


def test_sectional_curvature_scale_invariant():
    fn, metric = builtin_family("ellipsoid")
    fr = sample_surface(fn, metric, 1, seed=5)[0]
    zeta = np.array([0.7 - 0.2j])
    k0 = sectional_curvature(fr, zeta)
    for c in (2.0, -0.3, 1.4j, 0.6 - 2.2j):
        assert sectional_curvature(fr, c * zeta) == pytest.approx(k0, abs=1e-12)
    with pytest.raises(ValueError):
        sectional_curvature(fr, np.zeros(1))


# ---------------------------------------------------------------------------
# analyze reports


@pytest.mark.parametrize("n", [1, 2])
def test_analyze_sphere(n):
    s = _report("sphere", {"n": n})["summary"]
    assert s["gauss_valid"] and s["convex"]
    assert s["min_K"] == pytest.approx(1.0, abs=1e-9)
    assert s["max_K"] == pytest.approx(1.0, abs=1e-9)
    assert s["min_torsion_margin"] == pytest.approx(1.0, abs=1e-9)
    assert s["bound_verified"] is True


def test_analyze_perturbed_sphere_n1():
    rep = _report("perturbed_sphere_E", {"n": 1}, n_points=30, n_dirs=10)
    s = rep["summary"]
    assert abs(s["bp_min"]) < 1e-9
    assert s["min_K"] == pytest.approx(0.25, abs=1e-9)
    assert s["max_K"] == pytest.approx(0.25, abs=1e-9)
    assert s["min_bound_residual"] == pytest.approx(0.0, abs=1e-9)
    assert s["min_torsion_margin"] == pytest.approx(0.0, abs=1e-9)
    assert s["bound_verified"] is True
    for sample in rep["samples"]:
        assert sample["H2"] == pytest.approx(0.5, abs=1e-12)
        assert sample["torsion_sup"] == pytest.approx(0.5, abs=1e-9)


def test_analyze_perturbed_sphere_n2_direction_dependence():
    s = _report("perturbed_sphere_E", {"n": 2}, n_points=15, n_dirs=12)["summary"]
    # the extremal direction is always appended, so the minimum 1/4 is attained
    assert s["min_K"] == pytest.approx(0.25, abs=1e-9)
    assert s["max_K"] > 0.3
    assert s["max_K"] <= 0.5 + 1e-12
    assert s["min_bound_residual"] == pytest.approx(0.0, abs=1e-9)
    assert s["bound_verified"] is True


def test_analyze_ellipsoid():
    s = _report("ellipsoid", n_points=40, n_dirs=8)["summary"]
    assert s["gauss_valid"] is True  # Hessian constant and equal to the ambient metric
    assert s["convex"] is True
    assert s["min_torsion_margin"] >= -1e-8
    assert s["min_bound_residual"] >= -1e-9
    assert s["bound_verified"] is True


def test_analyze_hartogs_gate():
    s = _report("hartogs", {"t": 0.5}, n_points=15, n_dirs=4)["summary"]
    assert s["const_hessian"] is False
    assert s["gauss_valid"] is False
    assert s["min_K"] is None and s["max_K"] is None
    assert s["bound_verified"] is None
    assert "constant-Hessian hypothesis violated" in s["note"]
    # convexity and the torsion bound are still measured
    assert s["convex"] is True
    assert s["torsion_bound_holds"] is True


def test_analyze_is_deterministic():
    r1 = _report("ellipsoid", n_points=5, n_dirs=3, seed=42)
    r2 = _report("ellipsoid", n_points=5, n_dirs=3, seed=42)
    assert r1 == r2


# ---------------------------------------------------------------------------
# surface averages and eigenvalue bounds


def test_theta_average_constant_field_is_exact():
    fn, _ = builtin_family("sphere", {"n": 1})
    avg, hits = theta_average(fn, lambda p: 1.0, n_rays=500, seed=0)
    assert hits == 500
    assert avg == pytest.approx(1.0, abs=1e-12)


def test_theta_average_symmetric_moment():
    fn, _ = builtin_family("sphere", {"n": 1})
    avg, hits = theta_average(fn, lambda p: abs(p[0]) ** 2, n_rays=4000, seed=0)
    # on the unit 3-sphere the average of |z1|^2 under theta wedge dtheta is 1/2
    assert hits == 4000
    assert avg == pytest.approx(0.5, abs=0.03)


def _lambda1(name, params, n_points=20, n_dirs=4, n_rays=300, seed=0):
    fn, metric = builtin_family(name, params)
    rep = analyze(
        fn, metric, n_points, n_dirs, seed,
        family=name, params=params, start_map=start_map_for(name),
    )
    return lambda1_report(fn, metric, rep, n_rays=n_rays, seed=seed)


def test_lambda1_perturbed_sphere_n1():
    out = _lambda1("perturbed_sphere_E", {"n": 1})
    routes = {b["route"]: b for b in out["lower_bounds"]}
    a = routes["half_min_webster_scalar"]
    b = routes["half_min_inv_grad_sq"]
    assert a["applicable"] and b["applicable"]
    assert a["value"] == pytest.approx(0.25, abs=1e-9)
    assert b["value"] == pytest.approx(0.25, abs=1e-9)
    assert abs(a["value"] - b["value"]) < 1e-9
    assert out["upper_bound"]["applicable"]
    assert out["upper_bound"]["value"] == pytest.approx(0.5, abs=1e-9)
    assert out["consistent"] is True


def test_lambda1_sphere():
    out = _lambda1("sphere", {"n": 1})
    routes = {b["route"]: b for b in out["lower_bounds"]}
    assert routes["half_min_webster_scalar"]["value"] == pytest.approx(1.0, abs=1e-9)
    assert routes["half_min_inv_grad_sq"]["value"] == pytest.approx(0.5, abs=1e-9)
    assert out["upper_bound"]["value"] == pytest.approx(1.0, abs=1e-9)
    assert out["best_lower"] == pytest.approx(1.0, abs=1e-9)
    assert out["consistent"] is True


def test_lambda1_perturbed_sphere_n2():
    out = _lambda1("perturbed_sphere_E", {"n": 2}, n_points=10)
    routes = {b["route"]: b for b in out["lower_bounds"]}
    assert not routes["half_min_webster_scalar"]["applicable"]
    assert routes["ricci"]["value"] == pytest.approx(2.0 / 3.0, abs=1e-12)
    # the averaged upper bound is a statement about 3-dimensional surfaces
    assert out["upper_bound"]["applicable"] is False
    assert out["consistent"] is None


def test_lambda1_nonidentity_metric_has_no_upper_bound():
    out = _lambda1("ellipsoid", None, n_points=10)
    assert out["upper_bound"]["applicable"] is False
    routes = {b["route"]: b for b in out["lower_bounds"]}
    assert routes["half_min_inv_grad_sq"]["applicable"] is True
    assert routes["half_min_webster_scalar"]["applicable"] is True


def test_bound_residual_is_half_torsion_term():
    fn, metric = builtin_family("perturbed_sphere_E", {"n": 1})
    fr = sample_surface(fn, metric, 1, seed=13)[0]
    A = torsion_matrix(fr)
    zeta = np.array([1.0 + 0j])
    res = bound_residual(fr, zeta, A)
    k = sectional_curvature(fr, zeta, A)
    assert res == pytest.approx(k - 0.5 * fr.H2, abs=1e-14)
