import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frenetgeo.errors import (ConvergenceError, DegenerateMetricError, StencilClippingError,
                              UnsupportedOrderError)
from frenetgeo.geometry import (MetricChart, VectorField, christoffel, exp_map, gaussian_curvature,
                                geodesic, killing_residual, lie_derivative_metric, log_map,
                                normal_coordinates, riemann, curvature_operator)

from conftest import preset

# Gamma^i_jk of g_{kappa,tau} (kappa=1, tau=1/2), frozen from
# tests/oracles/christoffel_sympy.py
GKT_GAMMA_ORIGIN = np.array(
    [[[0.0, 0.0, 0.0], [0.0, 0.0, 0.5], [0.0, 0.5, 0.0]],
     [[0.0, 0.0, -0.5], [0.0, 0.0, 0.0], [-0.5, 0.0, 0.0]],
     [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]])
GKT_POINT = np.array([0.3, -0.2, 0.1])
GKT_GAMMA_POINT = np.array(
    [[[-0.14527845036319612, 0.048426150121065374, 0.0],
      [0.048426150121065374, 0.0, 0.5], [0.0, 0.5, 0.0]],
     [[0.0, -0.07263922518159806, -0.5],
      [-0.07263922518159806, 0.09685230024213075, 0.0], [-0.5, 0.0, 0.0]],
     [[0.0, 0.0, -0.07263922518159806], [0.0, 0.0, 0.048426150121065374],
      [-0.07263922518159806, 0.048426150121065374, 0.0]]])

ALL_PRESETS = [
    ("euclidean", {"m": 3}), ("sphere", {"k": 1.0, "m": 2}), ("sphere", {"k": 1.0, "m": 3}),
    ("hyperbolic", {"k": -1.0, "m": 3}), ("torus_example1", {}), ("g_kappa_tau", {}),
    ("g_kappa_tau", {"kappa": 1.0, "tau": 0.5}), ("solvable_group", {}),
    ("bump_example2", {"m": 2}), ("perturbed_plane", {"seed": 1}),
]


def conformal_gamma(k, x):
    # g = lam^2 delta, lam = 2 / (1 + k|x|^2): Gamma^i_jk = d_j f delta_ik + d_k f delta_ij
    # - d_i f delta_jk with f = log lam
    m = x.size
    df = -2 * k * x / (1 + k * x @ x)
    eye = np.eye(m)
    return (np.einsum("j,ik->ijk", df, eye) + np.einsum("k,ij->ijk", df, eye)
            - np.einsum("i,jk->ijk", df, eye))


def test_christoffel_euclidean_is_zero():
    ch = preset("euclidean", m=3).chart
    assert np.abs(christoffel(ch, [0.3, -1.0, 2.0]).gamma).max() == 0.0


@pytest.mark.parametrize("x, expected", [(np.zeros(3), GKT_GAMMA_ORIGIN),
                                         (GKT_POINT, GKT_GAMMA_POINT)])
def test_christoffel_gkt_matches_symbolic(x, expected):
    ch = preset("g_kappa_tau", kappa=1.0, tau=0.5).chart
    np.testing.assert_allclose(christoffel(ch, x).gamma, expected, atol=1e-13)


def test_christoffel_gkt_without_analytic_partials():
    ch = preset("g_kappa_tau", kappa=1.0, tau=0.5).chart
    fd = MetricChart(dim=3, metric=ch.metric, lower=ch.lower, upper=ch.upper)
    np.testing.assert_allclose(christoffel(fd, GKT_POINT).gamma, GKT_GAMMA_POINT, atol=1e-9)


def test_christoffel_sphere_conformal_closed_form(rng):
    ch = preset("sphere", k=1.0, m=3).chart
    for _ in range(5):
        x = rng.uniform(-0.8, 0.8, 3)
        np.testing.assert_allclose(christoffel(ch, x).gamma, conformal_gamma(1.0, x),
                                   atol=1e-13)


@pytest.mark.parametrize("name, params", ALL_PRESETS)
def test_christoffel_symmetric_and_metric_compatible(name, params, rng):
    desc = preset(name, **params)
    x = desc.random_point(rng)
    gam = christoffel(desc.chart, x).gamma
    assert np.array_equal(gam, np.swapaxes(gam, 1, 2))
    g, dg = desc.chart.g(x), desc.chart.dg(x)
    # d_k g_ij = Gamma^l_ki g_lj + Gamma^l_kj g_il
    comp = np.einsum("lki,lj->kij", gam, g) + np.einsum("lkj,il->kij", gam, g)
    assert np.abs(dg - comp).max() < 1e-10


def test_christoffel_errors():
    ch = preset("euclidean", m=2).chart
    with pytest.raises(StencilClippingError):
        christoffel(ch, [10.0, 0.0])
    bad = MetricChart(dim=2, metric=lambda x: np.broadcast_to(np.diag([1.0, -1.0]),
                                                              np.shape(x)[:-1] + (2, 2)),
                      lower=[-1, -1], upper=[1, 1])
    with pytest.raises(DegenerateMetricError):
        christoffel(bad, [0.0, 0.0])


@pytest.mark.parametrize("name, params", ALL_PRESETS)
def test_curvature_symmetries(name, params, rng):
    desc = preset(name, **params)
    cv = riemann(desc.chart, desc.random_point(rng), j_max=1)
    r4 = cv.r4
    scale = max(1.0, np.abs(r4).max())
    assert np.abs(r4 + np.swapaxes(r4, 0, 1)).max() < 1e-10 * scale
    assert np.abs(r4 + np.swapaxes(r4, 2, 3)).max() < 1e-10 * scale
    assert np.abs(r4 - np.transpose(r4, (2, 3, 0, 1))).max() < 1e-9 * scale
    bianchi = r4 + np.einsum("acdb->abcd", r4) + np.einsum("adbc->abcd", r4)
    assert np.abs(bianchi).max() < 1e-10 * scale
    # second Bianchi: cyclic sum over (e, c, d) of nabla_e R(d_c, d_d)
    n1 = cv.nabla_r[1]
    b2 = (n1 + np.transpose(n1, (1, 2, 0, 3, 4)) + np.transpose(n1, (2, 0, 1, 3, 4)))
    assert np.abs(b2).max() < 1e-7 * max(1.0, np.abs(n1).max())


def test_riemann_flat_and_order_limits():
    ch = preset("euclidean", m=3).chart
    cv = riemann(ch, np.zeros(3), j_max=2)
    assert all(np.abs(s).max() == 0.0 for s in cv.nabla_r)
    with pytest.raises(UnsupportedOrderError):
        riemann(ch, np.zeros(3), j_max=3)
    assert len(riemann(ch, np.zeros(3), j_max=3, allow_higher=True).nabla_r) == 4


@pytest.mark.parametrize("name, params, k", [("sphere", {"k": 1.0, "m": 3}, 1.0),
                                             ("sphere", {"k": 2.0, "m": 2}, 2.0),
                                             ("hyperbolic", {"k": -1.0, "m": 3}, -1.0)])
def test_constant_curvature_operator(name, params, k, rng):
    desc = preset(name, **params)
    for _ in range(5):
        x = desc.random_point(rng)
        cv = riemann(desc.chart, x, j_max=2)
        g = desc.chart.g(x)
        X, Y, Z = rng.normal(size=(3, desc.dim))
        lhs = curvature_operator(cv.r, X, Y, Z)
        rhs = k * ((Y @ g @ Z) * X - (X @ g @ Z) * Y)
        assert np.abs(lhs - rhs).max() < 1e-9 * (1 + np.abs(rhs).max())
        assert np.abs(cv.nabla_r[1]).max() < 1e-7
        assert np.abs(cv.nabla_r[2]).max() < 1e-6


def test_torus_curvature_on_top_circle():
    ch = preset("torus_example1").chart
    th = np.linspace(-2.0, 2.0, 9)
    K = gaussian_curvature(ch, np.stack([th, 0.4 + 0 * th], -1))
    np.testing.assert_allclose(K, np.cos(th) / (2 + np.cos(th)), atol=1e-10)
    cv = riemann(ch, np.array([np.pi / 2, 0.0]), j_max=1)
    assert abs(cv.r4[0, 1, 0, 1]) < 1e-10
    # dK/dtheta at pi/2 = -2 sin / (2 + cos)^2 = -1/2; nabla R4 = dK (g wedge g)
    g = ch.g(np.array([np.pi / 2, 0.0]))
    n4 = np.einsum("al,ecdbl->eabcd", g, cv.nabla_r[1])
    assert n4[0, 0, 1, 0, 1] / np.linalg.det(g) == pytest.approx(-0.5, abs=1e-9)


def test_killing_residuals_and_probe():
    desc = preset("g_kappa_tau", kappa=1.0, tau=0.5)
    ax = np.linspace(-0.5, 0.5, 5)
    grid = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), -1).reshape(-1, 3)
    for f in desc.killing:
        assert killing_residual(desc.chart, f, grid) < 1e-7
    assert killing_residual(desc.chart, desc.probe, grid) > 1e-5
    e = preset("euclidean", m=3)
    rot = VectorField(lambda x: np.stack([x[..., 1], -x[..., 0], 0 * x[..., 2]], -1))
    assert killing_residual(e.chart, rot, grid) < 1e-10
    lx = lie_derivative_metric(e.chart, e.probe)(np.array([0.1, 0.2, 0.3]))
    np.testing.assert_allclose(lx, 2 * np.diag([1.0, 2.0, 3.0]), atol=1e-9)


def test_geodesic_flat_and_sphere():
    e = preset("euclidean", m=2).chart
    res = geodesic(e, [0.1, 0.2], [1.0, -0.5], (0, 2), 0.01)
    np.testing.assert_allclose(res.x[-1], [2.1, -0.8], atol=1e-14)
    s = preset("sphere", k=1.0, m=2).chart
    x0 = np.array([0.5, 0.0])
    v0 = np.array([0.0, 1.0]) / np.sqrt(s.g(x0)[1, 1])
    res = geodesic(s, x0, v0, (0, 2 * np.pi), 1e-3)
    assert not res.exited
    assert np.linalg.norm(res.x[-1] - x0) < 1e-5
    assert np.linalg.norm(res.x[len(res.x) // 2] - x0) > 0.5
    assert res.energy_drift < 1e-8


@pytest.mark.parametrize("name, params", ALL_PRESETS)
def test_geodesic_energy_conservation(name, params, rng):
    desc = preset(name, **params)
    x0 = desc.random_point(rng) * 0.5
    v = rng.normal(size=desc.dim)
    v /= np.sqrt(v @ desc.chart.g(x0) @ v)
    res = geodesic(desc.chart, x0, 0.5 * v, (0, 1), 1e-3)
    back = geodesic(desc.chart, x0, 0.5 * v, (0, -1), 1e-3)
    assert res.energy_drift < 1e-8 and back.energy_drift < 1e-8


def test_geodesic_exit_flag():
    # a great circle through the origin leaves the stereographic box |x| <= 2
    s = preset("sphere", k=1.0, m=2).chart
    res = geodesic(s, [0.0, 0.0], [0.5, 0.0], (0, 2 * np.pi), 0.01)
    assert res.exited and res.t[-1] < 2 * np.pi
    assert np.all(np.abs(res.x) <= 2.0)


def test_exp_log_flat_exact():
    e = preset("euclidean", m=3).chart
    x0 = np.array([0.1, 0.2, 0.3])
    v = np.array([0.4, -0.1, 0.2])
    np.testing.assert_allclose(exp_map(e, x0, v), x0 + v, atol=1e-15)
    np.testing.assert_allclose(log_map(e, x0, x0 + v), v, atol=1e-15)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([("sphere", {"k": 1.0, "m": 2}), ("sphere", {"k": 1.0, "m": 3}),
                        ("g_kappa_tau", {"kappa": 1.0, "tau": 0.5})]),
       st.lists(st.floats(-1, 1), min_size=3, max_size=3),
       st.floats(0.01, 0.3))
def test_exp_log_round_trip(case, direction, length):
    name, params = case
    desc = preset(name, **params)
    m = desc.dim
    x0 = np.full(m, 0.2)
    d = np.asarray(direction[:m])
    if np.linalg.norm(d) < 1e-3:
        d = np.ones(m)
    g = desc.chart.g(x0)
    v = length * d / np.sqrt(d @ g @ d)
    np.testing.assert_allclose(log_map(desc.chart, x0, exp_map(desc.chart, x0, v)), v,
                               atol=1e-7)


def test_log_map_non_convergence():
    s = preset("sphere", k=1.0, m=2).chart
    with pytest.raises(ConvergenceError):
        log_map(s, [0.0, 0.0], [1.9, 0.0], max_iter=2)


def test_normal_coordinates_defining_properties():
    for name, params in [("sphere", {"k": 1.0, "m": 2}), ("g_kappa_tau", {})]:
        desc = preset(name, **params)
        x0 = np.full(desc.dim, 0.1)
        nc = normal_coordinates(desc.chart, x0)
        nchart = nc.as_chart()
        zero = np.zeros(desc.dim)
        np.testing.assert_allclose(nchart.g(zero), np.eye(desc.dim), atol=1e-10)
        assert np.abs(christoffel(nchart, zero).gamma).max() < 1e-6
        y = np.full(desc.dim, 0.05)
        np.testing.assert_allclose(nc.to_normal(nc.from_normal(y)), y, atol=1e-10)
