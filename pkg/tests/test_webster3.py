"""Direct structural-equation solver on 3-dimensional hypersurfaces."""

import numpy as np
import pytest

from pherm.catalog import builtin_family, start_map_for
from pherm.expr import defining_function
from pherm.surface import project_to_surface, sample_surface, stream
from pherm.webster3 import (
    StructuralResidualError,
    c0_form,
    c0_min,
    cross_validate,
    structural_residual,
    tw_direct,
)


def _surface_points(name, params, count, seed):
    fn, metric = builtin_family(name, params)
    frames = sample_surface(fn, metric, count, seed, start_map=start_map_for(name))
    return fn, [f.point for f in frames]


def test_sphere_curvature_and_torsion():
    fn, _ = builtin_family("sphere", {"n": 1})
    st = tw_direct(fn, np.array([0.0, 1.0], dtype=complex))
    assert st.scalar_curvature == pytest.approx(2.0, abs=1e-12)
    assert abs(st.A11) < 1e-12
    assert st.residual < 1e-10
    assert abs(st.curvature_imag) < 1e-12
    # away from coordinate axes as well
    p = project_to_surface(fn, np.array([0.4 + 0.3j, 0.6 - 0.5j]))
    st2 = tw_direct(fn, p)
    assert st2.scalar_curvature == pytest.approx(2.0, abs=1e-10)


def test_sphere_chart_swap():
    fn, _ = builtin_family("sphere", {"n": 1})
    st = tw_direct(fn, np.array([1.0, 0.0], dtype=complex))
    assert st.chart_swap is True
    assert st.scalar_curvature == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("t", [0.0, 0.25, 0.5, 0.75, 1.0])
@pytest.mark.parametrize("tau", [0.0, np.pi / 3, 1.1])
def test_hartogs_circle_values(t, tau):
    fn, _ = builtin_family("hartogs", {"t": t})
    p = np.array([0.0, np.exp(1j * tau)])
    st = tw_direct(fn, p)
    assert st.scalar_curvature == pytest.approx(2.0 * (1.0 - t), abs=1e-6)
    assert st.residual < 1e-7


def test_perturbed_sphere_constants():
    fn, pts = _surface_points("perturbed_sphere_E", {"n": 1}, 5, seed=2)
    for p in pts:
        st = tw_direct(fn, p)
        assert st.scalar_curvature == pytest.approx(0.5, abs=1e-9)
        assert st.A_ratio == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("eps", [0.5, 1.0])
def test_reinhardt_constants(eps):
    fn, pts = _surface_points("reinhardt", {"eps": eps}, 5, seed=3)
    for p in pts:
        st = tw_direct(fn, p)
        assert st.scalar_curvature == pytest.approx(0.5, abs=1e-6)
        assert st.A_ratio == pytest.approx(0.5, abs=1e-6)


def test_reinhardt_c0_form():
    fn, pts = _surface_points("reinhardt", {"eps": 0.5}, 3, seed=4)
    for p in pts:
        st = tw_direct(fn, p)
        # R - 2 C0 |A|/h is positive below the critical constant and
        # vanishes at C0 = 1/2
        assert c0_min(st, 0.49) > 0.0
        assert abs(c0_min(st, 0.5)) < 1e-6
        assert c0_min(st, 0.5) == pytest.approx(
            st.scalar_curvature - 2 * 0.5 * st.A_ratio, abs=1e-14
        )
        # the quadratic form at a real direction agrees with the closed form
        zeta = 1.0 + 0.0j
        form = c0_form(st, zeta, 0.5)
        assert np.isfinite(form)


def test_gauge_invariance_under_frame_scale():
    fn, pts = _surface_points("perturbed_sphere_E", {"n": 1}, 1, seed=5)
    p = pts[0]
    base = tw_direct(fn, p)
    s = 0.7 - 1.3j
    scaled = tw_direct(fn, p, frame_scale=s)
    assert scaled.scalar_curvature == pytest.approx(base.scalar_curvature, abs=1e-10)
    assert scaled.A_ratio == pytest.approx(base.A_ratio, abs=1e-10)
    assert scaled.h11 == pytest.approx(abs(s) ** 2 * base.h11, abs=1e-10)
    assert scaled.A11 == pytest.approx(s * s * base.A11, abs=1e-10)


def test_contact_form_scaling():
    # rho -> c rho rescales theta; R |d rho| and (|A|/h) |d rho| are unchanged
    from pherm.jets import jet1

    fn, _ = builtin_family("ellipsoid")
    src = "alpha*abs2(z1)+beta*abs2(z2)+re(gamma*z1^2+sigma*z2^2)-1"
    params = {"alpha": 1.5, "beta": 2.0, "gamma": 0.3, "sigma": 0.4}
    scaled = defining_function(f"3*({src})", 2, params=params)
    p = project_to_surface(fn, np.array([0.3 + 0.2j, 0.4 - 0.1j]))
    a, b = tw_direct(fn, p), tw_direct(scaled, p)
    ga = np.linalg.norm(jet1(fn, p)[1])
    gb = np.linalg.norm(jet1(scaled, p)[1])
    assert a.scalar_curvature * ga == pytest.approx(b.scalar_curvature * gb, abs=1e-10)
    assert a.A_ratio * ga == pytest.approx(b.A_ratio * gb, abs=1e-10)


def test_residual_parts_reported():
    fn, pts = _surface_points("ellipsoid", None, 1, seed=6)
    st = tw_direct(fn, pts[0])
    assert set(st.residual_parts) >= {
        "dtheta_admissible",
        "eq1_Z1_Z1b",
        "eq1_T_Z1",
        "eq1_T_Z1b",
        "eq2_Z1",
        "eq2_T",
        "curvature_imag",
        "ls_gap",
    }
    assert st.residual == pytest.approx(max(st.residual_parts.values()), abs=0)
    assert structural_residual(st) == st.residual
    assert st.residual < 1e-7


def test_structural_residual_error_at_tight_tolerance():
    fn, pts = _surface_points("reinhardt", {"eps": 0.02}, 1, seed=1)
    with pytest.raises(StructuralResidualError):
        tw_direct(fn, pts[0], tol=1e-9)


def test_requires_two_variables():
    fn, _ = builtin_family("sphere", {"n": 2})
    with pytest.raises(ValueError):
        tw_direct(fn, np.array([0.0, 0.0, 1.0], dtype=complex))


@pytest.mark.parametrize(
    "name,params,tol",
    [
        ("sphere", {"n": 1}, 1e-12),
        ("perturbed_sphere_E", {"n": 1}, 1e-10),
        ("ellipsoid", {"axes": (2.0, 3.0, 4.0, 5.0)}, 1e-10),
    ],
)
def test_cross_validate_agrees_with_gauss_path(name, params, tol):
    fn, metric = builtin_family(name, params)
    gap = cross_validate(fn, metric, 6, seed=7)
    assert gap < tol


def test_cross_validate_refuses_nonconstant_hessian():
    fn, metric = builtin_family("hartogs", {"t": 0.5})
    with pytest.raises(ValueError, match="constant-Hessian hypothesis violated"):
        cross_validate(fn, metric, 4, seed=0)
