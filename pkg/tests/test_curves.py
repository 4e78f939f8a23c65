import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frenetgeo import _numerics as nm
from frenetgeo.curves import (CurveJet, CurveProvider, covariant_chain, curvatures, f_table_from_kappas,
                              frenet, gram_determinants, is_frenet_jet, is_normal_position_jet,
                              normal_vectors, numerical_rank)
from frenetgeo.errors import InsufficientJetError, NotFrenetError
from frenetgeo.geometry import curvature_operator, riemann
from frenetgeo.presets import load_curve

from conftest import preset


def helix_kappas(a, b):
    c = a * a + b * b
    return np.array([np.sqrt(c), a / c, b / c])


def test_circle_radius_two_gram_and_kappas():
    e = preset("euclidean", m=2).chart
    circ = load_curve("circle", {"r": 2.0, "speed": 2.0})
    jet = circ.jet(0.0, 2)
    chain = covariant_chain(e, jet, 2)
    np.testing.assert_allclose(gram_determinants(e, chain, jet.point), [4.0, 16.0], atol=1e-12)
    res = frenet(e, jet)
    np.testing.assert_allclose(res.kappas, [2.0, 0.5], atol=1e-12)
    assert res.epsilon == 1


@pytest.mark.parametrize("a, b", [(1.0, 1.0), (2.0, 0.5), (1.0, -1.0)])
def test_helix_kappas(a, b):
    e = preset("euclidean", m=3).chart
    res = frenet(e, load_curve("helix", {"a": a, "b": b}).jet(0.7, 3))
    np.testing.assert_allclose(res.kappas, helix_kappas(a, b), atol=1e-12)
    assert res.epsilon == int(np.sign(b))


def test_frame_orthonormal_and_coframe(rng):
    desc = preset("g_kappa_tau", kappa=1.0, tau=0.5)
    coords = np.vstack([desc.random_point(rng) * 0.5, rng.normal(size=(3, 3))])
    res = frenet(desc.chart, CurveJet(0.0, coords))
    g = desc.chart.g(res.point)
    np.testing.assert_allclose(res.frame.T @ g @ res.frame, np.eye(3), atol=1e-10)
    np.testing.assert_allclose(res.coframe @ res.frame, np.eye(3), atol=1e-10)
    # X_1 = T / |T| and the chain is triangular in the frame
    np.testing.assert_allclose(res.frame[:, 0], res.chain[0] / res.kappas[0], atol=1e-10)
    np.testing.assert_allclose(res.f[0, 0], res.kappas[0], atol=1e-12)
    assert np.all(np.diag(res.f)[:-1] > 0)


def test_f_table_low_entries():
    # f11 = kappa0, f12 = kappa0', f22 = kappa0^2 kappa1
    k = np.array([[2.0, 0.3, 0.1], [0.5, -0.2, 0.0], [0.7, 0.0, 0.0]])
    f = f_table_from_kappas(k)
    assert f[0, 0] == pytest.approx(2.0)
    assert f[0, 1] == pytest.approx(0.3)
    assert f[1, 1] == pytest.approx(4.0 * 0.5)
    assert np.all(np.tril(f, -1) == 0)
    with pytest.raises(InsufficientJetError):
        f_table_from_kappas(k[:, :2])


def test_f_table_matches_frenet_on_generic_curve():
    # a sphere curve with exact derivatives; kappa jets by Cauchy differentiation
    desc = preset("sphere", k=1.0, m=3)
    rng = np.random.default_rng(7)
    coef = np.vstack([rng.uniform(-0.3, 0.3, 3), rng.normal(size=(5, 3)) * 0.6])
    poly = nm.jet_polynomial(coef, 0.0)
    prov = CurveProvider(poly, holomorphic=True, radius=0.05)

    def kappas(ts):
        return np.array([frenet(desc.chart, prov.jet(float(t), 4)).kappas for t in ts])

    kj = nm.univariate_derivatives(kappas, 0.0, 3, step=2e-2, accuracy=6).T
    ref = frenet(desc.chart, prov.jet(0.0, 4)).f
    got = f_table_from_kappas(kj)
    np.testing.assert_allclose(got, ref, atol=1e-5 * np.abs(ref).max())


def test_reparametrisation_covariance():
    # kappa_0 scales with the speed, kappa_i (i >= 1) are unchanged
    e = preset("euclidean", m=3).chart
    hel = load_curve("helix", {"a": 1.0, "b": 0.5})
    phi = lambda t: t + 0.3 * t**2
    rep = CurveProvider(lambda t: hel.eval(phi(np.asarray(t))), holomorphic=True)
    t = 0.5
    k_rep = frenet(e, rep.jet(t, 3)).kappas
    k_ref = frenet(e, hel.jet(phi(t), 3)).kappas
    speed = 1 + 0.6 * t
    assert k_rep[0] == pytest.approx(speed * k_ref[0], rel=1e-10)
    np.testing.assert_allclose(k_rep[1:], k_ref[1:], rtol=1e-9)


@pytest.mark.parametrize("route", ["analytic", "cauchy", "fd"])
def test_provider_routes_agree(route):
    hel = load_curve("helix", {"a": 1.5, "b": 0.5})
    exact = hel.jet(0.4, 5).coords
    if route == "analytic":
        prov = hel
    else:
        prov = CurveProvider(hel.eval, holomorphic=(route == "cauchy"))
    tol = {"analytic": 0, "cauchy": 1e-11, "fd": 1e-5}[route]
    np.testing.assert_allclose(prov.jet(0.4, 5).coords, exact, atol=tol)
    assert prov.is_analytic() == (route != "fd")


def test_curvatures_errors_and_orientation():
    with pytest.raises(NotFrenetError):
        curvatures([1.0, 0.0, 1.0], orientation_sign=1)
    k = curvatures([1.0, 0.25, 0.0], orientation_sign=0)
    assert k[-1] == 0.0
    np.testing.assert_allclose(curvatures([4.0, 16.0], orientation_sign=-1), [2.0, -0.5])


def test_frenet_rejects_line_and_short_jets():
    e = preset("euclidean", m=3).chart
    line = load_curve("line", {"m": 3}).jet(0.0, 3)
    with pytest.raises(NotFrenetError):
        frenet(e, line)
    assert not is_frenet_jet(e, line)
    with pytest.raises(InsufficientJetError):
        frenet(e, line.truncate(2))
    with pytest.raises(InsufficientJetError):
        line.truncate(5)
    e2 = preset("euclidean", m=2).chart
    assert is_frenet_jet(e2, load_curve("line").jet(0.0, 1))


def test_degenerate_last_curvature():
    # a plane circle inside R^3 has kappa_2 = 0 and is still Frenet
    e = preset("euclidean", m=3).chart
    res = frenet(e, load_curve("circle", {"m": 3}).jet(0.0, 3))
    assert res.degenerate and res.epsilon == 0
    np.testing.assert_allclose(res.kappas, [1.0, 1.0, 0.0], atol=1e-12)


def test_numerical_rank():
    assert numerical_rank(np.zeros((0, 3))) == 0
    assert numerical_rank(np.diag([1.0, 1e-3, 1e-12])) == 2
    assert numerical_rank(np.diag([1.0, 1e-3, 1e-12]), tol=1e-2) == 1


def test_normal_position_class():
    s = preset("sphere", k=1.0, m=3)
    assert not is_normal_position_jet(s.chart, load_curve("great_circle", {"m": 3}).jet(0.0, 3))
    rng = np.random.default_rng(1)
    jet = CurveJet(0.0, np.vstack([rng.uniform(-0.3, 0.3, 3), rng.normal(size=(3, 3))]))
    assert is_normal_position_jet(s.chart, jet)


def test_third_order_normal_coordinate_identity():
    # nabla^3 T - U^4 = R(T, nabla T) T on the unit sphere; the symbolic oracle in
    # tests/oracles/normal_identity_sympy.py gives ratio exactly 1
    ch = preset("sphere", k=1.0, m=2).chart
    rng = np.random.default_rng(0)
    for _ in range(3):
        coords = np.vstack([rng.uniform(-0.5, 0.5, 2), rng.normal(size=(4, 2)) * 0.7])
        jet = CurveJet(0.0, coords)
        _, u = normal_vectors(ch, jet, 4)
        chain = covariant_chain(ch, jet, 4)
        R = curvature_operator(riemann(ch, jet.point, j_max=0).r, chain[0], chain[1], chain[0])
        lhs = chain[3] - u[3]
        scale = np.abs(R).max()
        assert np.abs(lhs - R).max() < 1e-4 * scale
        assert np.abs(lhs - R / 3).max() > 0.3 * scale


def test_low_order_normal_coordinate_identities():
    # U^1 = T, U^2 = nabla T, U^3 = nabla^2 T at the base point
    ch = preset("g_kappa_tau", kappa=1.0, tau=0.5).chart
    rng = np.random.default_rng(4)
    jet = CurveJet(0.0, np.vstack([rng.uniform(-0.3, 0.3, 3), rng.normal(size=(3, 3))]))
    _, u = normal_vectors(ch, jet, 3)
    np.testing.assert_allclose(u, covariant_chain(ch, jet, 3), atol=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-2.0, 2.0), st.floats(0.3, 3.0))
def test_helix_kappas_property(a, b, speed_t):
    e = preset("euclidean", m=3).chart
    if abs(b) < 1e-3:
        b = 0.5
    res = frenet(e, load_curve("helix", {"a": a, "b": b}).jet(speed_t, 3))
    np.testing.assert_allclose(res.kappas, helix_kappas(a, b), rtol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6), st.floats(0.3, 3.0))
def test_isometry_invariance_of_kappas(vals, c):
    # rigid motions of the plane preserve all kappas; rotation by angle c
    e = preset("euclidean", m=2).chart
    coords = np.array(vals).reshape(3, 2) + np.array([[0, 0], [1.0, 0.3], [0, 1.0]])
    rot = np.array([[np.cos(c), -np.sin(c)], [np.sin(c), np.cos(c)]])
    moved = coords @ rot.T
    moved[0] += 0.7
    k1 = frenet(e, CurveJet(0.0, coords)).kappas
    k2 = frenet(e, CurveJet(0.0, moved)).kappas
    np.testing.assert_allclose(k1, k2, atol=1e-10)
