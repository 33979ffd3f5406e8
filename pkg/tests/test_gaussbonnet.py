import json
import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from killing_transport.curves import param_curve
from killing_transport.errors import ConfigError, DegenerateVertexAngle, InconsistentOrientation, NotClosed
from killing_transport.gaussbonnet import (
    Triangulation,
    curvature_integral,
    edge_formula,
    edge_jet,
    great_circle_edge,
    grid_triangulation,
    sphere_coordinates,
    straight_edge,
    surface_sum,
    triangle_sum,
)
from killing_transport.manifold import sphere, torus
from killing_transport.transport import killing_transport

AXIS = (1.0, 1.0, -1.0)


def octant_edges(chart, samples=200):
    P = np.eye(3)
    return [great_circle_edge(chart, P[k], P[(k + 1) % 3], math.pi / 2, AXIS, samples) for k in range(3)]


# --- edge jets -------------------------------------------------------------------------


def test_edge_jet_plane_segment(flat_plane):
    e = straight_edge(flat_plane, [0.0, 0.0], [2.0, 0.0])
    ej = edge_jet(flat_plane, e)
    np.testing.assert_allclose(ej.jet.as_array(), [1.0, 0.0, 0.0], atol=1e-12)
    assert not ej.ambiguous
    assert ej.cosines[1] < 1 - 1e-3
    # the pure rotation jet picks up normal component -L
    path, _ = killing_transport(flat_plane, e, [0.0, 0.0, 1.0])
    np.testing.assert_allclose(path[-1], [0.0, -2.0, 1.0], atol=1e-10)


def test_edge_jet_sphere_arcs(unit_sphere, rng):
    for _ in range(5):
        p = rng.standard_normal(3)
        p /= np.linalg.norm(p)
        e = great_circle_edge(unit_sphere, p, rng.standard_normal(3), rng.uniform(0.2, 1.2), AXIS, 200)
        ej = edge_jet(unit_sphere, e)
        assert ej.normal_start <= 1e-7 and ej.normal_end <= 1e-7


def test_edge_jet_half_great_circle_ambiguous(unit_sphere):
    p = np.array([1.0, 0.0, 0.0])
    e = great_circle_edge(unit_sphere, p, [0.0, 1.0, 0.0], math.pi, AXIS, 400)
    ej = edge_jet(unit_sphere, e)
    assert ej.ambiguous


# --- edge formula ---------------------------------------------------------------------


def test_edge_formula_translation(flat_plane):
    e = straight_edge(flat_plane, [0.0, 0.0], [1.0, 0.0])
    r = edge_formula(flat_plane, e, [1.0, 0.0, 0.0])
    assert r.m == 0
    for v in (r.integral_omega, r.correction, r.tau_change):
        assert abs(v) < 1e-12


def test_edge_formula_interior_zero(flat_plane):
    e = straight_edge(flat_plane, [0.0, 0.0], [1.0, 0.0], samples=64)
    # rotation about (1/2, 0): X = (-v, u - 1/2), xi12 = -1
    r = edge_formula(flat_plane, e, [0.0, -0.5, -1.0])
    assert r.m == 0
    assert r.zeros == [pytest.approx(0.5)]
    assert r.replaced_samples == 1
    assert not r.zero_at_start and not r.zero_at_end
    assert math.isfinite(r.correction) and abs(r.correction) < 1e-12
    assert abs(r.theta_change) < 1e-12


def _semicircle(chart, samples):
    # from (0, 0) to (2, 0) through (1, 1)
    return param_curve(chart, ["1 - cos(t)", "sin(t)"], samples, (0.0, math.pi))


def test_edge_parity_one_endpoint_zero(flat_plane):
    e = _semicircle(flat_plane, 400)
    # rotation about the start (0, 0) is zero there and tangent at (2, 0)
    r = edge_formula(flat_plane, e, [0.0, 0.0, -1.0])
    assert r.zero_at_start and not r.zero_at_end
    assert r.m % 2 == 1
    assert abs(r.residual) <= 1e-6


def test_edge_parity_two_endpoint_zeros(unit_sphere):
    p = np.array([0.0, 1.0, 0.0])
    e = great_circle_edge(unit_sphere, p, [1.0, 0.0, 0.0], math.pi, AXIS, 400)
    r = edge_formula(unit_sphere, e, [0.0, 0.0, 1.0])
    assert r.zero_at_start and r.zero_at_end
    assert r.m % 2 == 0
    assert abs(r.residual) <= 1e-6


def test_edge_parity_no_zero(unit_sphere):
    e = great_circle_edge(unit_sphere, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 1.0, AXIS, 200)
    ej = edge_jet(unit_sphere, e)
    r = edge_formula(unit_sphere, e, ej.jet)
    assert not r.zero_at_start and not r.zero_at_end and r.zeros == []
    assert r.m % 2 == 0


def test_edge_formula_correction_converges(flat_plane):
    # curved edge through an interior zero of a rotation field
    center = np.array([0.5, 0.25 * math.sin(0.5 * math.pi)])
    vals = []
    for M in (200, 400):
        e = param_curve(flat_plane, ["t", "0.25*sin(pi*t)"], M, (0.0, 1.0))
        x0 = e.points[0]
        jet = [-(x0[1] - center[1]), x0[0] - center[0], -1.0]
        r = edge_formula(flat_plane, e, jet)
        assert len(r.zeros) == 1
        vals.append(r.integral_omega - r.correction)
    assert abs(vals[0] - vals[1]) < 1e-5


@pytest.mark.parametrize("seed", range(10))
def test_random_edges_integer(seed, unit_sphere, torus21):
    rng = np.random.default_rng(seed)
    if seed % 2:
        p = rng.standard_normal(3)
        p /= np.linalg.norm(p)
        e = great_circle_edge(unit_sphere, p, rng.standard_normal(3), rng.uniform(0.3, 1.5), AXIS, 300)
        ch = unit_sphere
    else:
        a = rng.uniform(0, 2 * math.pi, 2)
        b = a + rng.uniform(-1.0, 1.0, 2)
        mid = 0.5 * (a + b) + rng.uniform(-0.3, 0.3, 2)
        from killing_transport.gaussbonnet import polyline_edge

        e = polyline_edge(torus21, [a, mid, b], 300)
        ch = torus21
    ej = edge_jet(ch, e)
    r = edge_formula(ch, e, ej.jet)
    assert abs(r.residual) <= 1e-6
    assert r.m == round(r.m_real)


# --- triangles -------------------------------------------------------------------------


def test_flat_right_triangle(flat_plane):
    a, b, c = [0.0, 0.0], [4.0, 0.0], [0.0, 3.0]
    edges = [straight_edge(flat_plane, a, b), straight_edge(flat_plane, b, c), straight_edge(flat_plane, c, a)]
    t = triangle_sum(flat_plane, edges, curvature=0.0)
    np.testing.assert_allclose(sorted(t.interior), sorted([math.pi / 2, math.atan(3 / 4), math.atan(4 / 3)]), atol=1e-12)
    assert abs(t.excess) < 1e-12
    assert abs(t.total) < 1e-9
    assert t.angle_identity_residual < 1e-9


def test_sphere_octant_excess(unit_sphere):
    edges = octant_edges(unit_sphere)
    t = triangle_sum(unit_sphere, edges)
    assert t.excess == pytest.approx(math.pi / 2, abs=1e-5)
    assert t.total == pytest.approx(math.pi / 2, abs=1e-5)
    assert t.edge_residual <= 1e-6


def test_degenerate_vertex(flat_plane):
    edges = [
        straight_edge(flat_plane, [0.0, 0.0], [1.0, 0.0]),
        straight_edge(flat_plane, [1.0, 0.0], [0.5, 0.0]),
        straight_edge(flat_plane, [0.5, 0.0], [0.0, 0.0]),
    ]
    with pytest.raises(DegenerateVertexAngle):
        triangle_sum(flat_plane, edges)


def test_curvature_integral_orientation(unit_sphere):
    a, b, c = np.array([1.0, 0.0]), np.array([1.2, 0.0]), np.array([1.0, 0.3])
    pos = curvature_integral(unit_sphere, a, b, c)
    neg = curvature_integral(unit_sphere, a, c, b)
    assert pos > 0 and neg == pytest.approx(-pos)
    # area of the coordinate triangle under sin(u) du dv, by a fine 1-D quadrature
    u = np.linspace(1.0, 1.2, 20001)
    width = 0.3 * (1.2 - u) / 0.2
    assert pos == pytest.approx(trapezoid(np.sin(u) * width, u), rel=1e-7)


# --- surfaces ----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def torus_report():
    ch = torus()
    return surface_sum(ch, grid_triangulation(ch, 10, 10, 32))


def test_torus_surface_sum(torus_report):
    r = torus_report
    assert r.counts == {"v": 100, "e": 300, "f": 200, "chi": 0}
    assert abs(r.total) <= 1e-4
    assert r.max_stokes_residual <= 1e-5
    assert r.max_cancellation <= 1e-7
    assert r.m_cancellation_ok
    assert abs(r.quadrature_total) <= 1e-6
    assert abs(r.angle_total) <= 1e-9


def test_flat_torus_exact(square_torus):
    r = surface_sum(square_torus, grid_triangulation(square_torus, 10, 10, 16))
    assert abs(r.total) <= 1e-10
    assert r.two_pi_chi == 0.0


def test_grid_refinement(torus_report):
    ch = torus()
    fine = surface_sum(ch, grid_triangulation(ch, 20, 20, 32), quadrature=False)
    floor = 1e-8
    assert abs(torus_report.total - fine.total) <= 2 * max(fine.residual, floor)


def test_validate_errors(square_torus):
    tri = grid_triangulation(square_torus, 3, 3, 8)
    bad = Triangulation(square_torus, tri.vertices, tri.edges, tri.triangles[:-1])
    with pytest.raises(NotClosed):
        bad.validate()
    flipped = tri.triangles.copy()
    flipped[0] = -flipped[0][::-1]
    with pytest.raises(InconsistentOrientation):
        Triangulation(square_torus, tri.vertices, tri.edges, flipped).validate()
    broken = tri.triangles.copy()
    broken[0, 0] = 999
    with pytest.raises(ConfigError):
        Triangulation(square_torus, tri.vertices, tri.edges, broken).validate()


def test_json_round_trip(square_torus):
    tri = grid_triangulation(square_torus, 3, 3, 8)
    data = json.loads(tri.to_json())
    assert min(min(e["from"], e["to"]) for e in data["edges"]) == 0
    back = Triangulation.from_json(square_torus, tri.to_json(), samples=8)
    assert back.counts() == tri.counts()
    np.testing.assert_array_equal(back.triangles, tri.triangles)
    back.validate()


def test_grid_needs_periodic_chart(unit_sphere):
    with pytest.raises(ConfigError):
        grid_triangulation(unit_sphere, 4, 4)


def test_sphere_coordinates_right_handed():
    # a small loop counter-clockwise seen from outside must be positive in (u, v)
    s = np.linspace(0, 2 * math.pi, 200, endpoint=False)
    for axis in [(0, 0, 1), AXIS, (0.3, -2.0, 0.5)]:
        x = np.array([0.48, -0.6, 0.64])
        b = np.cross(x, [0.0, 0.0, 1.0])
        b /= np.linalg.norm(b)
        c = np.cross(x, b)
        loop = x + 0.01 * (np.cos(s)[:, None] * b + np.sin(s)[:, None] * c)
        loop /= np.linalg.norm(loop, axis=1)[:, None]
        uv = sphere_coordinates(loop, axis)
        uv[:, 1] = np.unwrap(uv[:, 1])
        area = 0.5 * np.sum(uv[:, 0] * np.roll(uv[:, 1], -1) - np.roll(uv[:, 0], -1) * uv[:, 1])
        assert area > 0
