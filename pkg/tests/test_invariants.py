import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frenetgeo.curves import CurveJet
from frenetgeo.errors import GeometryError, InsufficientJetError
from frenetgeo.geometry import VectorField
from frenetgeo.invariants import (JetFunction, coordinate_function, distribution_matrix,
                                  distribution_rank, euclidean_rank, homogeneous3_functions,
                                  homogeneous3_invariants, invariance_check, jet_jacobian,
                                  k_from_n, kappa_function, maurer_cartan_invariants, n_r,
                                  prolong, random_jet, shifted_jet, stability_and_counts,
                                  surface_invariant_functions, surface_invariants, time_function,
                                  total_derivative, total_derivatives)

from conftest import preset

JET = CurveJet(0.0, [[0.3, -0.2, 0.1], [0.5, 0.8, -0.4], [0.2, -0.6, 0.3], [-0.1, 0.4, 0.2]])


def gkt(kappa=1.0, tau=0.5):
    return preset("g_kappa_tau", kappa=kappa, tau=tau)


def test_prolongation_rotation_first_order():
    X3 = gkt().killing[2]
    x, y, _ = JET.coords[0]
    xd, yd, _ = JET.coords[1]
    np.testing.assert_allclose(prolong(X3, 1)(JET), [[-y, x, 0], [-yd, xd, 0]], atol=1e-13)


@pytest.mark.parametrize("holomorphic", [True, False])
def test_prolongation_second_order_closed_form(holomorphic):
    kap, tau = 1.0, 0.5
    X1 = gkt(kap, tau).killing[0]
    field = VectorField(X1.func, "X1", holomorphic=holomorphic)
    (x, y, _), (xd, yd, _), (xdd, ydd, _) = JET.coords[:3]
    expected = [
        [-2 * kap * x * y, kap * (x * x - y * y) - 4, 4 * tau * x],
        [-2 * kap * (xd * y + x * yd), 2 * kap * (x * xd - y * yd), 4 * tau * xd],
        [-2 * kap * (xdd * y + 2 * xd * yd + x * ydd),
         2 * kap * (xd * xd + x * xdd - yd * yd - y * ydd), 4 * tau * xdd],
    ]
    tol = 1e-12 if holomorphic else 1e-8
    np.testing.assert_allclose(prolong(field, 2)(JET.truncate(2)), expected, atol=tol)
    assert prolong(field, 2).vector(JET)[0] == 0.0


def _jet_field_bracket(V, W, jet, r, h=1e-4):
    # [V, W] on jet coordinates (x_0..x_r): DW V - DV W
    flat = jet.coords[: r + 1].ravel()

    def at(F, p):
        return F(CurveJet(jet.t0, p.reshape(r + 1, -1))).ravel()

    def jac(F):
        cols = []
        for c in range(flat.size):
            e = np.zeros_like(flat)
            e[c] = h
            cols.append((at(F, flat + e) - at(F, flat - e)) / (2 * h))
        return np.array(cols).T

    return jac(W) @ at(V, flat) - jac(V) @ at(W, flat)


def _base_bracket(X, Y, h=1e-5):
    def f(x):
        x = np.asarray(x)
        m = x.shape[-1]
        out = np.zeros(x.shape, dtype=np.result_type(x, float))
        eye = np.eye(m)
        for c in range(m):
            dY = (Y(x + h * eye[c]) - Y(x - h * eye[c])) / (2 * h)
            dX = (X(x + h * eye[c]) - X(x - h * eye[c])) / (2 * h)
            out = out + X(x)[..., c:c + 1] * dY - Y(x)[..., c:c + 1] * dX
        return out

    return VectorField(f, "bracket", holomorphic=False)


@pytest.mark.parametrize("i, j", [(0, 1), (0, 2), (1, 3)])
def test_prolongation_respects_brackets(i, j):
    fields = gkt().killing
    r = 2
    lhs = _jet_field_bracket(prolong(fields[i], r), prolong(fields[j], r), JET, r)
    rhs = prolong(_base_bracket(fields[i], fields[j]), r)(JET).ravel()
    np.testing.assert_allclose(lhs, rhs, atol=1e-5)


def test_total_derivatives():
    assert total_derivatives(time_function(), JET, 2) == pytest.approx([0.0, 1.0, 0.0], abs=1e-9)
    x1 = coordinate_function(0)
    np.testing.assert_allclose(total_derivatives(x1, JET, 3), JET.coords[:, 0], atol=1e-8)
    speed2 = JetFunction(1, lambda j: j.coords[1] @ j.coords[1], "v2")
    d = total_derivative(speed2)
    assert d.order == 2 and d.label == "D_t(v2)"
    assert d(JET) == pytest.approx(2 * JET.coords[1] @ JET.coords[2], abs=1e-9)
    with pytest.raises(InsufficientJetError):
        total_derivatives(speed2, JET.truncate(2), 2)
    with pytest.raises(InsufficientJetError):
        speed2(JET.truncate(0))


def test_shifted_jet_exact_for_polynomials():
    poly = JET.polynomial()
    sh = shifted_jet(JET, 0.3, 3)
    assert sh.t0 == pytest.approx(0.3)
    np.testing.assert_allclose(sh.coords[0], poly(np.array([0.3]))[0])
    np.testing.assert_allclose(sh.coords[3], JET.coords[3])


def test_euclidean_closed_form_and_counts():
    assert [euclidean_rank(3, r) for r in range(5)] == [3, 5, 6, 6, 6]
    assert [euclidean_rank(2, r) for r in range(4)] == [2, 3, 3, 3]
    assert k_from_n([1, 2, 4, 7, 10]) == [0, 1, 1, 1, 0]
    assert k_from_n([1, 3, 6, 9, 12]) == [0, 2, 1, 0, 0]


@pytest.mark.parametrize("m", [2, 3, 4])
def test_sampled_euclidean_ranks(m):
    desc = preset("euclidean", m=m)
    for r in range(m + 1):
        est = n_r(desc, r, samples=8, seed=1)
        assert est.rank == euclidean_rank(m, r) and est.stability == 1.0


def test_euclidean_three_space_counts():
    tab = stability_and_counts(preset("euclidean", m=3), 4, samples=12)
    assert [row["N_r"] for row in tab.rows] == [1, 2, 4, 7, 10]
    assert [row["k_r"] for row in tab.rows] == [0, 1, 1, 1, 0]
    assert tab.k_sum == 3
    assert tab.stable_bound_ok


def test_gkt_counts():
    tab = stability_and_counts(gkt(1.0, 1.0), 4, samples=12)
    assert [row["N_r"] for row in tab.rows] == [1, 3, 6, 9, 12]
    assert [row["k_r"] for row in tab.rows] == [0, 2, 1, 0, 0]
    assert tab.stable_bound_ok and tab.k_sum == 3
    assert not any(row["flagged"] for row in tab.rows)
    # the space-form member does not claim a complete Killing basis
    assert stability_and_counts(gkt(1.0, 0.5), 2, samples=4).stable_bound_ok is None


def test_distribution_matrix_shapes():
    e = preset("euclidean", m=2)
    assert distribution_matrix([], CurveJet(0, [[0, 0], [1, 0]]), 1).shape == (0, 4)
    jet = CurveJet(0.0, [[0.1, 0.2], [1.0, 0.5]])
    assert distribution_matrix(e.killing, jet, 1).shape == (3, 4)
    assert distribution_rank(e.killing, jet, 1) == 3


def test_random_jet_rejection():
    rng = np.random.default_rng(0)
    desc = preset("sphere", k=1.0, m=3)
    for _ in range(5):
        jet = random_jet(desc, 3, rng, frenet_order=2)
        assert jet.r == 3 and np.linalg.norm(jet.coords[1]) >= 1e-3
    with pytest.raises(GeometryError):
        random_jet(desc, 2, rng, scale=1e-9)


def test_invariance_of_gkt_functions_and_probe():
    desc = gkt(1.0, 0.5)
    rng = np.random.default_rng(2)
    jets = [random_jet(desc, 2, rng) for _ in range(3)]
    k0t, i1 = homogeneous3_functions(desc)
    assert invariance_check(k0t, desc.killing, jets) < 1e-9
    assert invariance_check(i1, desc.killing, jets) < 1e-9
    assert invariance_check(kappa_function(desc.chart, 1), desc.killing, jets) < 1e-6
    assert invariance_check(k0t, [desc.probe], jets) > 1e-2
    assert invariance_check(coordinate_function(0), desc.killing, jets) > 0.1


def test_kappa0_tilde_identity():
    desc = gkt(1.0, 0.5)
    t, k0t, i1, k1 = homogeneous3_invariants(desc, JET)
    k0 = kappa_function(desc.chart, 0)(JET)
    assert k0t == pytest.approx(k0**2 - i1**2, abs=1e-12)
    assert k1 == pytest.approx(kappa_function(desc.chart, 1)(JET))
    assert np.isnan(homogeneous3_invariants(desc, JET.truncate(1))[3])
    with pytest.raises(GeometryError):
        homogeneous3_invariants(preset("euclidean", m=3), JET)


def test_maurer_cartan_invariance():
    desc = preset("solvable_group")
    rng = np.random.default_rng(3)
    jets = [random_jet(desc, 1, rng) for _ in range(3)]
    for n in range(3):
        f = JetFunction(1, lambda j, n=n: maurer_cartan_invariants(desc, j)[n], f"w{n}")
        assert invariance_check(f, desc.killing, jets) < 1e-9


def test_surface_invariants_sphere_and_torus():
    s = preset("sphere", k=1.0, m=2)
    jet = CurveJet(0.0, [[0.2, 0.1], [1.0, 0.3]])
    i1, i2, i3, i4 = surface_invariants(s.chart, jet)
    assert i1 == pytest.approx(jet.coords[1] @ s.chart.g(jet.point) @ jet.coords[1])
    assert max(abs(i2), abs(i3), abs(i4)) < 1e-6
    # torus top circle: K = cos / (2 + cos), X_1 = d_phi / 2, X_2 = -+ d_theta
    t = preset("torus_example1")
    jet = CurveJet(0.0, [[np.pi / 2, 0.0], [0.0, -0.5]])
    i1, i2, i3, i4 = surface_invariants(t.chart, jet)
    assert i1 == pytest.approx(1.0)
    assert abs(i2) < 1e-7
    assert abs(i3) == pytest.approx(0.5, abs=1e-7)
    assert i4 == pytest.approx(0.25, abs=1e-6)


def test_surface_invariant_functions_barred_scaling():
    t = preset("torus_example1")
    jet = CurveJet(0.0, [[1.0, 0.2], [0.3, -0.4]])
    plain = [f(jet) for f in surface_invariant_functions(t.chart, barred=False)]
    barred = [f(jet) for f in surface_invariant_functions(t.chart)]
    s = np.sqrt(plain[0])
    np.testing.assert_allclose(barred, [plain[0], plain[1] * s, plain[2] * s, plain[3] * s * s])
    # tripling the speed: plain I_2..I_4 are unchanged, barred ones scale by 3, 3, 9
    fast = CurveJet(0.0, [[1.0, 0.2], [0.9, -1.2]])
    plain_fast = [f(fast) for f in surface_invariant_functions(t.chart, barred=False)]
    barred_fast = [f(fast) for f in surface_invariant_functions(t.chart)]
    np.testing.assert_allclose(plain_fast[1:], plain[1:], atol=1e-8)
    np.testing.assert_allclose(barred_fast[1:], np.array(barred[1:]) * [3, 3, 9], atol=1e-7)


def test_jet_jacobian_coordinates():
    fs = [time_function(), coordinate_function(0), coordinate_function(2)]
    J = jet_jacobian(fs, JET.truncate(1), include_t=True)
    expected = np.zeros((3, 7))
    expected[0, 0] = expected[1, 1] = expected[2, 3] = 1.0
    np.testing.assert_allclose(J, expected, atol=1e-10)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_gkt_invariants_property(seed):
    desc = gkt(1.0, 0.5)
    jet = random_jet(desc, 1, np.random.default_rng(seed))
    k0t, i1 = homogeneous3_functions(desc)
    assert invariance_check(k0t, desc.killing, [jet]) < 1e-8 * max(1.0, k0t(jet))
    assert invariance_check(i1, desc.killing, [jet]) < 1e-8
