import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linefield.errors import InvalidCurveError, TubeOverlapError
from linefield.geometry import (DomainSpec, FourierCurve, SplineCurve, arclength_reparam, class_A_test,
                                curve_eval, normal_ray_trace, offset_polyline, signed_distance,
                                stadium_curve, trace_normals, validate_tubular_spec)

from oracles import brute_nearest, ellipse_curvature, segments_cross


def test_circle_length_and_curvature():
    c = FourierCurve.circle(2.0)
    assert c.length == pytest.approx(4 * np.pi, rel=1e-13)
    _, _, _, _, k = c.sample(64)
    assert np.allclose(k, 0.5, atol=1e-13)
    assert c.max_curvature == pytest.approx(0.5, rel=1e-12)


def test_ellipse_curvature_matches_closed_form():
    c = FourierCurve.ellipse(1.2, 1.0)
    t = np.linspace(0, 2 * np.pi, 37)
    _, _, _, kappa = c.frame_raw(t)
    assert np.allclose(kappa, ellipse_curvature(1.2, 1.0, t), rtol=1e-12)
    assert c.max_curvature == pytest.approx(1.2 / 1.0**2, rel=1e-9)


def test_orientation_is_normalized_counterclockwise():
    cw = FourierCurve([0, 1], [0, 0], [0, 0], [0, -1])
    assert cw.signed_area > 0
    pts = np.array([[0, 0], [0, 1], [1, 1], [1, 0]], float)  # clockwise
    assert SplineCurve(pts).signed_area > 0


def test_curve_eval_frame():
    c = FourierCurve.circle(1.0)
    s = np.linspace(0, c.length, 9)
    p, t, n, k = curve_eval(c, s)
    assert np.allclose(np.linalg.norm(t, axis=1), 1)
    assert np.allclose(np.einsum("ij,ij->i", t, n), 0, atol=1e-14)
    # outward normal of a centred circle is the position itself
    assert np.allclose(n, p, atol=1e-12)
    # periodic wrap
    assert np.allclose(curve_eval(c, s[:1] + c.length)[0], p[:1])


def test_arclength_reparam_has_unit_speed():
    c = arclength_reparam(FourierCurve.ellipse(2.0, 1.0))
    s = np.linspace(0, c.period, 50, endpoint=False)
    assert np.allclose(c.speed(s), 1.0, atol=1e-9)
    assert arclength_reparam(c) is c


def test_u_of_s_inverts_s_of_u():
    c = FourierCurve.ellipse(1.5, 0.7)
    u = np.linspace(0, 2 * np.pi, 101, endpoint=False)
    assert np.allclose(c.u_of_s(c.s_of_u(u)), u, atol=1e-12)


def test_spline_through_circle_samples():
    a = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    c = SplineCurve(np.stack([np.cos(a), np.sin(a)], 1))
    assert c.length == pytest.approx(2 * np.pi, rel=1e-5)
    _, _, _, _, k = c.sample(50)
    assert np.allclose(k, 1.0, atol=1e-3)


def test_invalid_curves():
    with pytest.raises(InvalidCurveError):
        FourierCurve([0.0], [0.0], [0.0], [0.0])
    with pytest.raises(InvalidCurveError):
        SplineCurve([[0, 0], [1, 0], [1, 1]])
    with pytest.raises(InvalidCurveError):
        SplineCurve([[0, 0], [1, 0], [1, 0], [0, 1]])
    with pytest.raises(InvalidCurveError):
        DomainSpec(FourierCurve.circle(1.0), 0.0)


def test_project_matches_brute_force(rng):
    c = FourierCurve.ellipse(1.3, 0.8)
    q = rng.uniform(-1.0, 1.0, size=(300, 2)) * [0.6, 0.3]
    _, dist, ok = c.project(q)
    _, p, _, _, _ = c.sample(50_000)
    ref, _ = brute_nearest(q, p)
    assert ok.all()
    # sample spacing 1.3e-4 at distance >= 0.2 bounds the oracle error by about 5e-8
    assert np.all(dist <= ref + 1e-12)
    assert np.allclose(dist, ref, atol=1e-7)


def test_validate_tubular():
    rep = validate_tubular_spec(DomainSpec(FourierCurve.circle(1.0), 0.4))
    assert rep["passed"] and rep["delta_times_kappa"] == pytest.approx(0.4)
    with pytest.raises(TubeOverlapError):
        validate_tubular_spec(DomainSpec(FourierCurve.circle(1.0), 1.0))
    with pytest.raises(TubeOverlapError):
        validate_tubular_spec(DomainSpec(FourierCurve.ellipse(1.2, 1.0), 0.9))


def test_signed_distance_annulus_closed_form(annulus, rng):
    p = rng.uniform(-1.6, 1.6, size=(500, 2))
    r = np.hypot(p[:, 0], p[:, 1])
    assert np.allclose(signed_distance(annulus, p), np.abs(r - 1) - 0.4, atol=1e-12)


def test_signed_distance_raw_with_hole(rng):
    spec = DomainSpec(FourierCurve.circle(1.4), mode="raw", holes=(FourierCurve.circle(0.6),))
    p = rng.uniform(-1.6, 1.6, size=(400, 2))
    r = np.hypot(p[:, 0], p[:, 1])
    ref = np.maximum(r - 1.4, 0.6 - r)
    assert np.allclose(signed_distance(spec, p), ref, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_signed_distance_is_1_lipschitz(x1, y1, x2, y2):
    spec = DomainSpec(FourierCurve.ellipse(1.2, 1.0), 0.3)
    d = signed_distance(spec, np.array([[x1, y1], [x2, y2]]))
    assert abs(d[0] - d[1]) <= np.hypot(x1 - x2, y1 - y2) + 1e-9


def test_boundary_components_of_tube(annulus):
    outer, inner = annulus.boundary(n=64)
    assert outer.outermost and not inner.outermost
    assert np.allclose(np.hypot(*outer.points.T), 1.4)
    assert np.allclose(np.hypot(*inner.points.T), 0.6)
    # outward normals point away from the domain
    assert np.all(signed_distance(annulus, outer.points + 0.01 * outer.normals) > 0)
    assert np.all(signed_distance(annulus, inner.points + 0.01 * inner.normals) > 0)


def test_normal_rays_on_annulus(annulus):
    outer, inner = annulus.boundary(n=32)
    T, hits = trace_normals(annulus, outer.points, -outer.normals, 1 / 128)
    assert np.allclose(T, 0.8, atol=1e-8)
    assert np.allclose(np.hypot(*hits.T), 0.6, atol=1e-8)
    ray = normal_ray_trace(annulus, inner.points[3], -inner.normals[3])
    assert ray.T == pytest.approx(0.8, abs=1e-8)


def test_class_a_annulus_none(annulus):
    assert not class_A_test(annulus, 64, 1 / 128)


def test_class_a_disk_witness_is_a_real_crossing(disk):
    res = class_A_test(disk, 64, 1 / 128)
    assert res.found and res.n_pairs > 0
    a, b = res.witness
    ra = next(r for r in res.rays if np.allclose(r.origin, a))
    rb = next(r for r in res.rays if np.allclose(r.origin, b))
    assert segments_cross(ra.origin, ra.hit, rb.origin, rb.hit)


def test_class_a_stadium():
    spec = DomainSpec(stadium_curve(0.5, 1.0), mode="raw")
    assert class_A_test(spec, 128, 1 / 128).found


def test_offset_polyline_constant_offset():
    c = FourierCurve.circle(1.0)
    off = offset_polyline(c, 0.3, n=256)
    assert np.allclose(np.hypot(*off.points.T), 1.3)
    var = offset_polyline(c, lambda t: 0.1 * np.cos(2 * np.pi * t), n=256)
    r = np.hypot(*var.points.T)
    assert r.max() == pytest.approx(1.1) and r.min() == pytest.approx(0.9, abs=1e-4)


def test_transformed_domain_rotates_points():
    spec = DomainSpec(FourierCurve.ellipse(1.2, 1.0), 0.3)
    rot = spec.transformed(np.pi / 2, (0.5, 0.0))
    p = np.array([[0.5, 1.2 + 0.3]])  # image of (1.2+0.3, 0)
    assert signed_distance(rot, p)[0] == pytest.approx(0.0, abs=1e-9)


def test_to_dict_roundtrip_keys(annulus):
    d = annulus.to_dict()
    assert d["mode"] == "tubular" and d["delta"] == 0.4 and d["curve"]["type"] == "fourier"
