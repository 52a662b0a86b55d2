"""Surface sampling, adapted frames, and the convexity certificate."""

import numpy as np
import pytest

from pherm.catalog import AmbientMetric, builtin_family
from pherm.expr import defining_function
from pherm.surface import (
    NotStrictlyPseudoconvexError,
    SurfaceFrame,
    behnke_peschl,
    frame_at,
    project_to_surface,
    sample_directions,
    sample_surface,
    stream,
)


def test_projection_lands_on_known_point():
    fn, _ = builtin_family("perturbed_sphere_E", {"n": 1})
    p = project_to_surface(fn, np.array([0.0 + 0j, 0.9 + 0j]))
    # on the z = 0 slice the surface is 2 w^2 = 1 for real w
    assert p[0] == pytest.approx(0.0, abs=1e-12)
    assert p[1] == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert abs(fn(p)) < 1e-12


def test_sphere_frame_values():
    fn, metric = builtin_family("sphere", {"n": 2})
    p = np.array([0.0, 0.0, 1.0], dtype=complex)
    fr = frame_at(fn, metric, p)
    assert fr.n == 2
    assert np.allclose(fr.h, np.eye(2), atol=1e-14)
    assert fr.H2 == pytest.approx(1.0, abs=1e-14)
    assert fr.dp2 == pytest.approx(1.0, abs=1e-14)
    # frame vectors are tangent: Z . grad = 0
    assert np.max(np.abs(fr.Z @ fr.jet.d1)) < 1e-14


def test_chart_permutation_when_last_gradient_vanishes():
    fn, metric = builtin_family("sphere", {"n": 1})
    p = np.array([1.0, 0.0], dtype=complex)  # rho_w = conj(w) = 0 here
    fr = frame_at(fn, metric, p)
    assert fr.perm[-1] != len(p) - 1
    assert np.allclose(fr.h, [[1.0]], atol=1e-14)
    assert np.max(np.abs(fr.Z @ fr.jet.d1)) < 1e-14


def test_perturbed_sphere_constants():
    fn, metric = builtin_family("perturbed_sphere_E", {"n": 2})
    for fr in sample_surface(fn, metric, 10, seed=3):
        # |d rho|^2 = 2 on the whole surface, so |H|^2 = 1/2
        assert fr.dp2 == pytest.approx(2.0, abs=1e-12)
        assert fr.H2 == pytest.approx(0.5, abs=1e-12)


def test_behnke_peschl_values():
    sph, _ = builtin_family("sphere", {"n": 1})
    p = project_to_surface(sph, np.array([0.3 + 0.1j, 0.8 - 0.2j]))
    assert behnke_peschl(sph, p) == pytest.approx(1.0, abs=1e-12)

    e, _ = builtin_family("perturbed_sphere_E", {"n": 1})
    q = project_to_surface(e, np.array([0.2 + 0.4j, 0.7 + 0.1j]))
    assert behnke_peschl(e, q) == pytest.approx(0.0, abs=1e-10)


def test_indefinite_levi_is_rejected():
    fn = defining_function("abs2(z1)-abs2(z2)-1", 2)
    p = np.array([np.sqrt(2.0), 1.0], dtype=complex)
    assert abs(fn(p)) < 1e-14
    with pytest.raises(NotStrictlyPseudoconvexError):
        frame_at(fn, AmbientMetric.identity(2), p)


def test_stream_determinism():
    a = stream(5, 7).standard_normal(8)
    b = stream(5, 7).standard_normal(8)
    c = stream(5, 8).standard_normal(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sample_surface_determinism_and_validity():
    fn, metric = builtin_family("ellipsoid")
    f1 = sample_surface(fn, metric, 6, seed=9)
    f2 = sample_surface(fn, metric, 6, seed=9)
    f3 = sample_surface(fn, metric, 6, seed=10)
    assert all(np.array_equal(a.point, b.point) for a, b in zip(f1, f2))
    assert not all(np.array_equal(a.point, b.point) for a, b in zip(f1, f3))
    for fr in f1:
        assert abs(fn(fr.point)) < 1e-10
        assert isinstance(fr, SurfaceFrame)


def test_sample_directions_normalized_and_deterministic():
    fn, metric = builtin_family("sphere", {"n": 2})
    fr = frame_at(fn, metric, np.array([0.0, 0.0, 1.0], dtype=complex))
    d1 = sample_directions(fr, 5, seed=2, index=4)
    d2 = sample_directions(fr, 5, seed=2, index=4)
    d3 = sample_directions(fr, 5, seed=2, index=5)
    assert all(np.array_equal(a, b) for a, b in zip(d1, d2))
    assert not np.array_equal(d1[0], d3[0])
    for zeta in d1:
        assert fr.norm_h(zeta) == pytest.approx(1.0, abs=1e-12)
