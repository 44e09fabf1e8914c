import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qreduce.errors import (
    DegenerateMetricError,
    DegenerateParametrizationError,
    DomainError,
    LayerBreakdownError,
    SingularPointError,
)
from qreduce.geometry import (
    CurveJet,
    CurveSpec,
    Forms,
    SurfaceSpec,
    arc_length_reparam,
    curvature_at_arclength,
    curvatures,
    curve_jet,
    fundamental_forms,
    layer_metric_curve,
    layer_metric_numeric,
    layer_metric_surface,
    plane_curvature,
    surface_curvatures,
    surface_jet,
)

SURFACES = [
    SurfaceSpec.plane(),
    SurfaceSpec.sphere(2.0),
    SurfaceSpec.cylinder(1.0),
    SurfaceSpec.torus(3.0, 1.0),
]


def _random_uv(surface, rng):
    if surface.kind == "sphere":
        return rng.uniform(0.2, math.pi - 0.2), rng.uniform(0, 2 * math.pi)
    return rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi)


# --- curve jets -------------------------------------------------------------


def test_unit_circle_jet_at_zero():
    jet = curve_jet(CurveSpec.circle(1.0), 0.0)
    np.testing.assert_allclose(jet.position, [1, 0], atol=1e-15)
    np.testing.assert_allclose(jet.d1, [0, 1], atol=1e-15)
    np.testing.assert_allclose(jet.d2, [-1, 0], atol=1e-15)


def test_line_has_vanishing_higher_jets():
    jet = curve_jet(CurveSpec.line(0.0, 5.0), 2.0)
    assert np.all(jet.d2 == 0) and np.all(jet.d3 == 0)


def test_ellipse_jet_at_quarter_turn():
    jet = curve_jet(CurveSpec.ellipse(2.0, 1.0), math.pi / 2)
    np.testing.assert_allclose(jet.position, [0, 1], atol=1e-15)
    np.testing.assert_allclose(jet.d1, [-2, 0], atol=1e-15)


def test_open_curve_rejects_parameter_outside_domain():
    with pytest.raises(DomainError):
        curve_jet(CurveSpec.line(0.0, 1.0), 1.5)


def test_closed_curve_wraps_parameter():
    c = CurveSpec.ellipse(1.5, 1.0)
    np.testing.assert_allclose(curve_jet(c, 0.3).position, curve_jet(c, 0.3 + 2 * math.pi).position)


# --- plane curvature --------------------------------------------------------


def test_circle_curvature_is_inverse_radius():
    assert plane_curvature(curve_jet(CurveSpec.circle(2.0), 1.234)) == pytest.approx(0.5, abs=1e-15)


def test_circle_curvature_matches_tangent_angle_rate():
    c = CurveSpec.circle(2.0)
    t, dt = 0.7, 1e-5
    angle = lambda t: math.atan2(*curve_jet(c, t).d1[::-1])  # noqa: E731
    rate = (angle(t + dt) - angle(t - dt)) / (2 * dt) / 2.0  # speed is R
    assert rate == pytest.approx(plane_curvature(curve_jet(c, t)), rel=1e-8)


def test_line_curvature_zero():
    assert plane_curvature(curve_jet(CurveSpec.line(0, 3), 1.0)) == 0.0


def test_ellipse_curvature_at_vertex():
    a, b = 2.0, 1.0
    assert plane_curvature(curve_jet(CurveSpec.ellipse(a, b), 0.0)) == pytest.approx(a / b**2, rel=1e-14)


def test_ellipse_curvature_standard_formula():
    a, b = 1.5, 1.0
    c = CurveSpec.ellipse(a, b)
    for t in np.linspace(0, 2 * math.pi, 17):
        expect = a * b / (a**2 * math.sin(t) ** 2 + b**2 * math.cos(t) ** 2) ** 1.5
        assert plane_curvature(curve_jet(c, t)) == pytest.approx(expect, rel=1e-13)


def test_singular_jet_raises():
    jet = CurveJet(np.zeros(2), np.zeros(2), np.array([1.0, 0.0]), np.zeros(2))
    with pytest.raises(SingularPointError):
        plane_curvature(jet)


def test_circle_curvature_at_random_parameters():
    rng = np.random.default_rng(1)
    for R in (0.5, 1.0, 2.0):
        c = CurveSpec.circle(R)
        for t in rng.uniform(0, 2 * math.pi, 50):
            assert abs(plane_curvature(curve_jet(c, t)) - 1 / R) <= 1e-12


# --- arc length -------------------------------------------------------------


def test_circle_length():
    assert arc_length_reparam(CurveSpec.circle(1.0)).length == pytest.approx(2 * math.pi, abs=1e-10)


def test_unit_speed_line_length_and_map():
    amap = arc_length_reparam(CurveSpec.line(0.0, 3.0))
    assert amap.length == pytest.approx(3.0, abs=1e-12)
    assert amap.s_of_t(1.7) == pytest.approx(1.7, abs=1e-12)


def test_ellipse_length_against_trapezoid_oracle():
    a, b = 1.5, 1.0
    # periodic trapezoid converges spectrally for smooth periodic integrands
    t = np.linspace(0, 2 * math.pi, 4000, endpoint=False)
    oracle = np.sum(np.hypot(a * np.sin(t), b * np.cos(t))) * (2 * math.pi / len(t))
    got = arc_length_reparam(CurveSpec.ellipse(a, b)).length
    assert abs(got - oracle) / oracle <= 1e-8
    assert got == pytest.approx(7.932719794645293, rel=1e-12)


@pytest.mark.parametrize(
    "curve",
    [CurveSpec.ellipse(1.5, 1.0), CurveSpec.parabola(0.5), CurveSpec.circle(2.0)],
    ids=lambda c: c.kind,
)
def test_arc_length_round_trip(curve):
    amap = arc_length_reparam(curve)
    ts = np.linspace(curve.t0, curve.t1, 101)[:-1] if curve.closed else np.linspace(curve.t0, curve.t1, 101)
    back = np.array([amap.t_of_s(amap.s_of_t(t)) for t in ts])
    assert np.max(np.abs(back - ts)) <= 1e-8


def test_curvature_at_arclength_ellipse_vertex():
    c = CurveSpec.ellipse(1.5, 1.0)
    assert float(curvature_at_arclength(c, 0.0)) == pytest.approx(1.5, rel=1e-10)


# --- fundamental forms and curvatures ---------------------------------------


def test_sphere_first_form_on_equator():
    f = fundamental_forms(surface_jet(SurfaceSpec.sphere(2.0), math.pi / 2, 0.0))
    assert (f.E, f.F, f.G1) == pytest.approx((4.0, 0.0, 4.0), abs=1e-14)


def test_plane_second_form_vanishes():
    f = fundamental_forms(surface_jet(SurfaceSpec.plane(), 0.3, -0.2))
    assert f.L == f.M == f.N == 0.0


def test_cylinder_second_form_is_parabolic():
    f = fundamental_forms(surface_jet(SurfaceSpec.cylinder(1.0), 0.4, 1.1))
    assert f.L * f.N - f.M**2 == pytest.approx(0.0, abs=1e-15)


def test_sphere_curvatures_everywhere():
    rng = np.random.default_rng(2)
    s = SurfaceSpec.sphere(2.0)
    for _ in range(10):
        c = surface_curvatures(s, *_random_uv(s, rng))
        assert abs(c.H) == pytest.approx(0.5, rel=1e-12)
        assert c.K == pytest.approx(0.25, rel=1e-12)


def test_plane_curvatures_zero():
    c = surface_curvatures(SurfaceSpec.plane(), 1.0, 2.0)
    assert c.H == 0.0 and c.K == 0.0


def test_torus_outer_equator():
    c = surface_curvatures(SurfaceSpec.torus(3.0, 1.0), 0.0, 0.0)
    assert (c.k1, c.k2, c.H, c.K) == pytest.approx((1.0, 0.25, 0.625, 0.25), abs=1e-14)


def test_sphere_pole_is_degenerate():
    with pytest.raises(DegenerateParametrizationError):
        fundamental_forms(surface_jet(SurfaceSpec.sphere(1.0), 0.0, 0.3))


def test_curvatures_reject_degenerate_metric():
    bad = Forms(E=1.0, F=1.0, G1=1.0, L=0.0, M=0.0, N=0.0, normal=np.array([0.0, 0.0, 1.0]))
    with pytest.raises(DegenerateMetricError):
        curvatures(bad)


def test_torus_rejects_self_intersection():
    with pytest.raises(ValueError):
        SurfaceSpec.torus(1.0, 2.0)


@pytest.mark.parametrize("surface", SURFACES, ids=lambda s: s.kind)
def test_form_and_curvature_invariants(surface):
    rng = np.random.default_rng(3)
    for _ in range(20):
        u, v = _random_uv(surface, rng)
        f = fundamental_forms(surface_jet(surface, u, v))
        assert f.E > 0 and f.G1 > 0 and f.E * f.G1 - f.F**2 > 0
        assert abs(np.linalg.norm(f.normal) - 1) <= 1e-12
        c = curvatures(f)
        scale = max(abs(c.K), abs(c.H), 1e-300)
        assert c.k1 >= c.k2
        assert abs(c.k1 * c.k2 - c.K) <= 1e-10 * max(abs(c.K), scale**2)
        assert abs(c.k1 + c.k2 - 2 * c.H) <= 1e-10 * scale
        assert c.H**2 - c.K >= -1e-12


def _total_curvature(surface, n=96):
    xu, wu = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (surface.u1 - surface.u0) * (xu + 1) + surface.u0
    wu = wu * 0.5 * (surface.u1 - surface.u0)
    v = 0.5 * (surface.v1 - surface.v0) * (xu + 1) + surface.v0
    wv = wu * (surface.v1 - surface.v0) / (surface.u1 - surface.u0)
    total = 0.0
    for ui, wi in zip(u, wu):
        for vj, wj in zip(v, wv):
            f = fundamental_forms(surface_jet(surface, ui, vj))
            total += wi * wj * curvatures(f).K * math.sqrt(f.E * f.G1 - f.F**2)
    return total


def test_gauss_bonnet_sphere():
    assert _total_curvature(SurfaceSpec.sphere(2.0)) == pytest.approx(4 * math.pi, rel=1e-6)


def test_gauss_bonnet_torus():
    assert abs(_total_curvature(SurfaceSpec.torus(3.0, 1.0))) / (4 * math.pi) <= 1e-6


# --- layer metrics ----------------------------------------------------------


def test_layer_metric_curve_examples():
    assert layer_metric_curve(CurveSpec.circle(1.0), 0.3, 0.1) == pytest.approx(0.81, abs=1e-15)
    assert layer_metric_curve(CurveSpec.ellipse(1.5, 1.0), 1.1, 0.0) == 1.0
    assert layer_metric_curve(CurveSpec.line(0, 4), 1.0, 0.37) == 1.0


def test_layer_metric_curve_breakdown():
    with pytest.raises(LayerBreakdownError):
        layer_metric_curve(CurveSpec.circle(1.0), 0.0, 1.0)


def test_layer_metric_surface_examples():
    assert layer_metric_surface(SurfaceSpec.sphere(1.0), 1.0, 0.5, 0.1) == pytest.approx(0.81, abs=1e-15)
    assert layer_metric_surface(SurfaceSpec.plane(), 0.0, 0.0, 5.0) == 1.0
    assert layer_metric_surface(SurfaceSpec.cylinder(2.0), 0.1, 0.0, 0.2) == pytest.approx(0.9, abs=1e-15)


def test_layer_metric_surface_breakdown():
    with pytest.raises(LayerBreakdownError):
        layer_metric_surface(SurfaceSpec.sphere(1.0), 1.0, 0.5, 1.2)


def test_layer_metric_numeric_examples():
    assert layer_metric_numeric(CurveSpec.circle(1.0), 0.4, 0.1, h=1e-4) == pytest.approx(0.81, abs=1e-6)
    assert layer_metric_numeric(SurfaceSpec.plane(), (0.3, 0.7), 2.0) == pytest.approx(1.0, abs=1e-8)
    u, v = 1.1, 0.4
    numeric = layer_metric_numeric(SurfaceSpec.sphere(1.0), (u, v), 0.05)
    assert numeric == pytest.approx(0.95**4 * math.sin(u) ** 2, rel=1e-6)


@pytest.mark.parametrize(
    "spec",
    [CurveSpec.circle(0.5), CurveSpec.ellipse(1.5, 1.0), CurveSpec.parabola(0.5), *SURFACES],
    ids=lambda s: s.kind,
)
def test_layer_metric_numeric_matches_closed_forms(spec):
    rng = np.random.default_rng(4)
    for _ in range(10):
        if isinstance(spec, CurveSpec):
            length = arc_length_reparam(spec).length
            s = rng.uniform(0, length)
            k = abs(float(curvature_at_arclength(spec, s)))
            q = rng.uniform(-0.4, 0.4) / max(k, 1.0)
            expect = layer_metric_curve(spec, s, q)
            got = layer_metric_numeric(spec, s, q)
        else:
            u, v = _random_uv(spec, rng)
            c = surface_curvatures(spec, u, v)
            q = rng.uniform(-0.4, 0.4) / max(abs(c.k1), abs(c.k2), 1.0)
            f = fundamental_forms(surface_jet(spec, u, v))
            expect = (f.E * f.G1 - f.F**2) * layer_metric_surface(spec, u, v, q) ** 2
            got = layer_metric_numeric(spec, (u, v), q)
        assert abs(got - expect) / expect <= 1e-5


@settings(max_examples=40, deadline=None)
@given(R=st.floats(0.1, 10.0), t=st.floats(0.0, 2 * math.pi))
def test_circle_curvature_property(R, t):
    assert abs(plane_curvature(curve_jet(CurveSpec.circle(R), t)) - 1 / R) <= 1e-12 / R
