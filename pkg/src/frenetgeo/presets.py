"""Ready-made metric charts with Killing bases and reference constants.

Every preset returns a :class:`PresetDescriptor`.  Metrics and their first
partials are closed forms; all shipped Killing fields are validated on a
small grid when a preset is loaded.

Also provided are the analytic test curves used throughout the package
(circle, helix, great circle, the torus top circle, ...).
"""

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np

from .curves import CurveProvider
from .errors import UnknownPresetError
from .geometry import MetricChart, VectorField, killing_residual

__all__ = [
    "PresetDescriptor",
    "load_preset",
    "preset_names",
    "preset_schema",
    "load_curve",
    "curve_names",
    "bump_gamma_closed_form",
    "preset_selfcheck",
    "SelfcheckReport",
    "KILLING_TOL",
]

KILLING_TOL = 1e-7


@dataclass(frozen=True)
class PresetDescriptor:
    """A named manifold with its chart and infinitesimal isometries.

    Attributes
    ----------
    name : str
    params : dict
    chart : MetricChart
    killing : tuple of VectorField
        Basis of the Killing algebra (as far as known).
    probe : VectorField
        A canonical field that is *not* Killing.
    sample_lower, sample_upper : ndarray
        Box used for random base points.
    constants : dict
        Documented constants, e.g. ``curvature`` (constant sectional
        curvature), ``isometry_dim``, ``transitive``.
    """

    name: str
    params: dict
    chart: MetricChart
    killing: tuple
    probe: VectorField
    sample_lower: np.ndarray
    sample_upper: np.ndarray
    constants: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.chart.dim

    def random_point(self, rng):
        return rng.uniform(self.sample_lower, self.sample_upper)


def _translation(a, m):
    e = np.zeros(m)
    e[a] = 1.0
    return VectorField(lambda x, e=e: np.broadcast_to(e, np.shape(x)) + 0 * x, f"T{a + 1}")


def _rotation(a, b, m):
    def f(x):
        out = np.zeros_like(x)
        out[..., a] = x[..., b]
        out[..., b] = -x[..., a]
        return out
    return VectorField(f, f"R{a + 1}{b + 1}")


def _linear_field(A, label):
    A = np.asarray(A, dtype=float)
    return VectorField(lambda x: x @ A.T, label)


def _dilation_probe(m):
    return _linear_field(np.diag(np.arange(1, m + 1, dtype=float)), "probe")


# --- euclidean -------------------------------------------------------------------

def _euclidean(m=3):
    m = int(m)
    if m < 2:
        raise UnknownPresetError("euclidean needs m >= 2")
    chart = MetricChart(
        dim=m,
        metric=lambda x: np.broadcast_to(np.eye(m), np.shape(x)[:-1] + (m, m)) + 0 * x[..., None],
        metric_partials=lambda x: np.zeros(np.shape(x)[:-1] + (m, m, m), dtype=np.result_type(x, float)),
        lower=-10 * np.ones(m), upper=10 * np.ones(m), label=f"euclidean({m})",
        holomorphic=True)
    killing = [_translation(a, m) for a in range(m)]
    killing += [_rotation(a, b, m) for a, b in combinations(range(m), 2)]
    return dict(chart=chart, killing=killing, probe=_dilation_probe(m),
                sample=(-1.0, 1.0),
                constants=dict(curvature=0.0, isometry_dim=m + comb(m, 2), transitive=True,
                               killing_complete=True))


# --- sphere and hyperbolic space (stereographic / Poincare charts) -------------

def _conformal(k, m, name):
    k = float(k)
    m = int(m)

    def lam(x):
        return 2.0 / (1.0 + k * np.sum(x * x, axis=-1))

    def metric(x):
        l2 = lam(x) ** 2
        return l2[..., None, None] * np.eye(m)

    def partials(x):
        la = lam(x)
        # d_c (lam^2) = -2 k lam^3 x_c
        d = -2.0 * k * (la**3)[..., None] * x
        return d[..., :, None, None] * np.eye(m)

    if k > 0:
        half = 2.0 / np.sqrt(k)
        lower, upper, ball = -half * np.ones(m), half * np.ones(m), None
        s = 0.8 / np.sqrt(k)
    else:
        ball = 1.0 / np.sqrt(-k)
        lower, upper = -ball * np.ones(m), ball * np.ones(m)
        s = 0.5 * ball / np.sqrt(m)
    chart = MetricChart(dim=m, metric=metric, metric_partials=partials,
                        lower=lower, upper=upper, label=f"{name}({k:g},{m})",
                        holomorphic=True, ball_radius=ball)

    def translation_like(a):
        def f(x):
            r2 = np.sum(x * x, axis=-1)[..., None]
            e = np.zeros(m)
            e[a] = 1.0
            return (1.0 - k * r2) * e + 2.0 * k * x[..., a:a + 1] * x
        return VectorField(f, f"V{a + 1}")

    killing = [translation_like(a) for a in range(m)]
    killing += [_rotation(a, b, m) for a, b in combinations(range(m), 2)]
    return dict(chart=chart, killing=killing, probe=_dilation_probe(m),
                sample=(-s, s),
                constants=dict(curvature=k, isometry_dim=m + comb(m, 2), transitive=True,
                               killing_complete=True))


def _sphere(k=1.0, m=2):
    if float(k) <= 0:
        raise UnknownPresetError("sphere needs k > 0")
    if int(m) not in (2, 3):
        raise UnknownPresetError("sphere ships m = 2 or 3")
    return _conformal(k, m, "sphere")


def _hyperbolic(k=-1.0, m=2):
    if float(k) >= 0:
        raise UnknownPresetError("hyperbolic needs k < 0")
    if int(m) not in (2, 3):
        raise UnknownPresetError("hyperbolic ships m = 2 or 3")
    return _conformal(k, m, "hyperbolic")


# --- torus of revolution -------------------------------------------------------

def _torus():
    # (x^2+y^2+z^2+3)^2 = 16(x^2+y^2): tube radius 1 around the circle of radius 2
    def metric(x):
        th = x[..., 0]
        out = np.zeros(np.shape(x)[:-1] + (2, 2), dtype=np.result_type(x, float))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = (2.0 + np.cos(th)) ** 2
        return out

    def partials(x):
        th = x[..., 0]
        out = np.zeros(np.shape(x)[:-1] + (2, 2, 2), dtype=np.result_type(x, float))
        out[..., 0, 1, 1] = -2.0 * (2.0 + np.cos(th)) * np.sin(th)
        return out

    chart = MetricChart(dim=2, metric=metric, metric_partials=partials,
                        lower=[-3.0, -10.0], upper=[3.0, 10.0],
                        label="torus_example1", holomorphic=True)
    axial = VectorField(lambda x: np.stack([0 * x[..., 0], 1 + 0 * x[..., 1]], -1), "dphi")
    probe = VectorField(lambda x: np.stack([1 + 0 * x[..., 0], 0 * x[..., 1]], -1), "dtheta")
    return dict(chart=chart, killing=[axial], probe=probe,
                sample=([-2.5, -3.0], [2.5, 3.0]),
                constants=dict(isometry_dim=1, transitive=False, killing_complete=True,
                               gaussian_curvature="cos(theta)/(2+cos(theta))"))


# --- the homogeneous metrics g_{kappa,tau} ---------------------------------------

def _g_kappa_tau(kappa=1.0, tau=1.0):
    kap, tau = float(kappa), float(tau)
    # kappa = 4 tau^2 is a space form of curvature kappa / 4: the four shipped
    # fields then span only a subalgebra of the 6-dim isometry algebra
    space_form = bool(np.isclose(kap, 4 * tau * tau))

    def parts(x):
        X, Y = x[..., 0], x[..., 1]
        lam = 1.0 + 0.25 * kap * (X * X + Y * Y)
        return X, Y, lam

    def metric(x):
        X, Y, lam = parts(x)
        a, b = tau * Y / lam, -tau * X / lam
        out = np.zeros(np.shape(x)[:-1] + (3, 3), dtype=np.result_type(x, float))
        out[..., 0, 0] = 1 / lam**2 + a * a
        out[..., 1, 1] = 1 / lam**2 + b * b
        out[..., 0, 1] = out[..., 1, 0] = a * b
        out[..., 0, 2] = out[..., 2, 0] = a
        out[..., 1, 2] = out[..., 2, 1] = b
        out[..., 2, 2] = 1.0
        return out

    def partials(x):
        X, Y, lam = parts(x)
        lx, ly = 0.5 * kap * X, 0.5 * kap * Y
        a, b = tau * Y / lam, -tau * X / lam
        da = (-tau * Y * lx / lam**2, tau / lam - tau * Y * ly / lam**2)
        db = (-tau / lam + tau * X * lx / lam**2, tau * X * ly / lam**2)
        dinv = (-2 * lx / lam**3, -2 * ly / lam**3)
        out = np.zeros(np.shape(x)[:-1] + (3, 3, 3), dtype=np.result_type(x, float))
        for c in range(2):
            out[..., c, 0, 0] = dinv[c] + 2 * a * da[c]
            out[..., c, 1, 1] = dinv[c] + 2 * b * db[c]
            out[..., c, 0, 1] = out[..., c, 1, 0] = da[c] * b + a * db[c]
            out[..., c, 0, 2] = out[..., c, 2, 0] = da[c]
            out[..., c, 1, 2] = out[..., c, 2, 1] = db[c]
        return out

    if kap >= 0:
        hw = 3.0
    else:
        hw = min(3.0, 1.3 / np.sqrt(-kap))
    chart = MetricChart(dim=3, metric=metric, metric_partials=partials,
                        lower=[-hw, -hw, -10.0], upper=[hw, hw, 10.0],
                        label=f"g_kappa_tau({kap:g},{tau:g})", holomorphic=True)

    def X1(x):
        X, Y = x[..., 0], x[..., 1]
        return np.stack([-2 * kap * X * Y, kap * (X * X - Y * Y) - 4, 4 * tau * X], -1)

    def X2(x):
        X, Y = x[..., 0], x[..., 1]
        return np.stack([kap * (X * X - Y * Y) + 4, 2 * kap * X * Y, 4 * tau * Y], -1)

    def X3(x):
        return np.stack([-x[..., 1], x[..., 0], 0 * x[..., 2]], -1)

    def Z(x):
        return np.stack([0 * x[..., 0], 0 * x[..., 1], 1 + 0 * x[..., 2]], -1)

    killing = [VectorField(X1, "X1"), VectorField(X2, "X2"),
               VectorField(X3, "X3"), VectorField(Z, "Z")]
    probe = _linear_field(np.diag([1.0, 0.0, 0.0]), "x d/dx")
    s = min(0.8, 0.6 * hw)
    return dict(chart=chart, killing=killing, probe=probe,
                sample=([-s, -s, -1.0], [s, s, 1.0]),
                constants=dict(isometry_dim=6 if space_form else 4, transitive=True,
                               killing_complete=not space_form,
                               curvature=kap / 4 if space_form else None,
                               N_r={0: 1, 1: 3, 2: 6, 3: 9, 4: 12}, k_r=(0, 2, 1, 0)))


# --- solvable group R^2 x| R -------------------------------------------------------

def _solvable_group(mu=None, nu=1.0):
    nu = float(nu)
    if nu <= 0:
        raise UnknownPresetError("solvable_group needs nu > 0")
    if mu is not None and float(mu) <= 1:
        raise UnknownPresetError("solvable_group off-diagonal family needs mu > 1")
    off = mu is not None
    mu = 1.0 if mu is None else float(mu)

    def metric(x):
        z = x[..., 2]
        out = np.zeros(np.shape(x)[:-1] + (3, 3), dtype=np.result_type(x, float))
        out[..., 0, 0] = np.exp(-2 * z)
        out[..., 1, 1] = mu * np.exp(2 * z)
        out[..., 2, 2] = nu
        if off:
            out[..., 0, 1] = out[..., 1, 0] = 1.0
        return out

    def partials(x):
        z = x[..., 2]
        out = np.zeros(np.shape(x)[:-1] + (3, 3, 3), dtype=np.result_type(x, float))
        out[..., 2, 0, 0] = -2 * np.exp(-2 * z)
        out[..., 2, 1, 1] = 2 * mu * np.exp(2 * z)
        return out

    chart = MetricChart(dim=3, metric=metric, metric_partials=partials,
                        lower=[-5.0] * 3, upper=[5.0] * 3,
                        label=f"solvable_group({'%g' % mu if off else '-'},{nu:g})",
                        holomorphic=True)
    killing = [_translation(0, 3), _translation(1, 3),
               VectorField(lambda x: np.stack([x[..., 0], -x[..., 1], 1 + 0 * x[..., 2]], -1),
                           "x dx - y dy + dz")]
    probe = _linear_field(np.diag([1.0, 0.0, 0.0]), "x d/dx")
    return dict(chart=chart, killing=killing, probe=probe,
                sample=([-1.0] * 3, [1.0] * 3),
                constants=dict(isometry_dim=3, transitive=True, killing_complete=True,
                               coframe="omega1=exp(-z)dx, omega2=exp(z)dy, omega3=dz"))


# --- the non-analytic bump metric ------------------------------------------------

def _bump_h(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    nz = s > 0
    out[nz] = np.exp(-1.0 / s[nz] ** 2)
    return out


def _bump_example2(m=2):
    m = int(m)
    if m < 2:
        raise UnknownPresetError("bump_example2 needs m >= 2")
    ones = np.ones((m, m))

    def metric(x):
        s = np.sqrt(np.sum(np.asarray(x) ** 2, axis=-1))
        return np.eye(m) + _bump_h(s)[..., None, None] * ones

    def partials(x):
        x = np.asarray(x, dtype=float)
        s2 = np.sum(x * x, axis=-1)
        coef = np.zeros_like(s2)
        nz = s2 > 0
        # d_c h(|x|) = 2 exp(-1/s^2) x_c / s^4
        coef[nz] = 2.0 * np.exp(-1.0 / s2[nz]) / s2[nz] ** 2
        return (coef[..., None] * x)[..., :, None, None] * ones

    chart = MetricChart(dim=m, metric=metric, metric_partials=partials,
                        lower=-2 * np.ones(m), upper=2 * np.ones(m),
                        label=f"bump_example2({m})", holomorphic=False)
    # rotations fixing the diagonal direction (1, ..., 1)
    basis = np.linalg.qr(np.column_stack([np.ones(m), np.eye(m)[:, : m - 1]]))[0][:, 1:]
    killing = []
    for a, b in combinations(range(m - 1), 2):
        u, v = basis[:, a], basis[:, b]
        killing.append(_linear_field(np.outer(u, v) - np.outer(v, u), f"Rot{a + 1}{b + 1}"))
    probe = _linear_field(np.diag(np.arange(1, m + 1, dtype=float)), "probe")
    return dict(chart=chart, killing=killing, probe=probe,
                sample=(-1.0, 1.0),
                constants=dict(isometry_dim=comb(m - 1, 2), transitive=False,
                               killing_complete=False))


def bump_gamma_closed_form(x):
    """Christoffel symbols of the bump metric, derived by hand.

    With ``h(s) = exp(-1/s^2)`` and ``s = |x|``::

        Gamma^l_ij = (h'/(2s)) [x_i + x_j - x_l
                                + h/(1 + m h) (sum_a x_a - m (x_i + x_j))]
    """
    x = np.asarray(x, dtype=float)
    m = x.size
    s = np.linalg.norm(x)
    if s == 0:
        return np.zeros((m, m, m))
    h = np.exp(-1 / s**2)
    hp = 2 * h / s**3
    c = 0.5 * hp / s
    xs = x.sum()
    xi = x[None, :, None] + x[None, None, :]
    base = xi - x[:, None, None]
    return c * (base + h / (1 + m * h) * (xs - m * xi))


# --- a randomly perturbed analytic surface ------------------------------------------

def _perturbed_plane(seed=0, amplitude=0.2):
    rng = np.random.default_rng(int(seed))
    amp = float(amplitude)
    if not 0 < amp < 0.45:
        raise UnknownPresetError("perturbed_plane needs 0 < amplitude < 0.45")
    P = rng.normal(size=(3, 2))
    c = rng.uniform(0, 2 * np.pi, size=3)

    def waves(x):
        return [x @ P[i] + c[i] for i in range(3)]

    def metric(x):
        w = waves(x)
        out = np.zeros(np.shape(x)[:-1] + (2, 2), dtype=np.result_type(x, float))
        out[..., 0, 0] = 1 + amp * np.sin(w[0])
        out[..., 1, 1] = 1 + amp * np.cos(w[1])
        out[..., 0, 1] = out[..., 1, 0] = amp * np.sin(w[2])
        return out

    def partials(x):
        w = waves(x)
        out = np.zeros(np.shape(x)[:-1] + (2, 2, 2), dtype=np.result_type(x, float))
        for k in range(2):
            out[..., k, 0, 0] = amp * P[0, k] * np.cos(w[0])
            out[..., k, 1, 1] = -amp * P[1, k] * np.sin(w[1])
            out[..., k, 0, 1] = out[..., k, 1, 0] = amp * P[2, k] * np.cos(w[2])
        return out

    chart = MetricChart(dim=2, metric=metric, metric_partials=partials,
                        lower=[-5.0, -5.0], upper=[5.0, 5.0],
                        label=f"perturbed_plane({seed},{amp:g})", holomorphic=True)
    return dict(chart=chart, killing=[], probe=_dilation_probe(2),
                sample=([-2.0, -2.0], [2.0, 2.0]),
                constants=dict(transitive=False, killing_complete=False))


_REGISTRY = {
    "euclidean": (_euclidean, {"m": "int >= 2 (default 3)"}),
    "sphere": (_sphere, {"k": "float > 0 (default 1)", "m": "2 or 3 (default 2)"}),
    "hyperbolic": (_hyperbolic, {"k": "float < 0 (default -1)", "m": "2 or 3 (default 2)"}),
    "torus_example1": (_torus, {}),
    "g_kappa_tau": (_g_kappa_tau, {"kappa": "float (default 1)",
                                   "tau": "float (default 1); kappa = 4 tau^2 is a space form, "
                                          "flagged killing_complete=false"}),
    "solvable_group": (_solvable_group, {"mu": "float > 1 or null (default null: diagonal)",
                                         "nu": "float > 0 (default 1)"}),
    "bump_example2": (_bump_example2, {"m": "int >= 2 (default 2)"}),
    "perturbed_plane": (_perturbed_plane, {"seed": "int (default 0)",
                                           "amplitude": "0 < float < 0.45 (default 0.2)"}),
}


def preset_names():
    """Names accepted by :func:`load_preset`."""
    return list(_REGISTRY)


def preset_schema(name):
    """Parameter descriptions of a preset."""
    if name not in _REGISTRY:
        raise UnknownPresetError(f"unknown preset '{name}'")
    return dict(_REGISTRY[name][1])


def _validation_points(desc, n=3):
    lo, hi = desc.sample_lower, desc.sample_upper
    axes = [np.linspace(a, b, n) for a, b in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(lo))
    return grid


def load_preset(name, params=None, validate=True):
    """Build a preset chart with its Killing basis.

    Parameters
    ----------
    name : str
        One of :func:`preset_names`.
    params : dict or sequence, optional
        Keyword parameters, or positional values in schema order.
    validate : bool
        Check every Killing field on a small grid (residual < 1e-7).

    Returns
    -------
    PresetDescriptor

    Raises
    ------
    UnknownPresetError
        Unknown name, unknown parameter or out-of-range value.
    """
    if name not in _REGISTRY:
        raise UnknownPresetError(f"unknown preset '{name}'; known: {', '.join(_REGISTRY)}")
    builder, schema = _REGISTRY[name]
    if params is None:
        params = {}
    if not isinstance(params, dict):
        keys = list(schema)
        if len(params) > len(keys):
            raise UnknownPresetError(f"too many parameters for '{name}'")
        params = dict(zip(keys, params))
    unknown = set(params) - set(schema)
    if unknown:
        raise UnknownPresetError(f"unknown parameters {sorted(unknown)} for '{name}'")
    try:
        parts = builder(**params)
    except (TypeError, ValueError) as exc:
        raise UnknownPresetError(f"bad parameters for '{name}': {exc}") from exc
    lo, hi = parts["sample"]
    m = parts["chart"].dim
    desc = PresetDescriptor(
        name=name, params=dict(params), chart=parts["chart"],
        killing=tuple(parts["killing"]), probe=parts["probe"],
        sample_lower=np.broadcast_to(np.asarray(lo, float), (m,)).copy(),
        sample_upper=np.broadcast_to(np.asarray(hi, float), (m,)).copy(),
        constants=parts["constants"])
    if validate:
        pts = _validation_points(desc)
        for f in desc.killing:
            res = killing_residual(desc.chart, f, pts)
            if res > KILLING_TOL:
                raise UnknownPresetError(
                    f"Killing field {f.label} of '{name}' fails validation ({res:.3g})")
    return desc


# --- analytic curves ------------------------------------------------------------------

def _poly_like(func_list, m):
    """Curve from a list of per-order callables ``t -> (m,)``."""

    def derivatives(t, order):
        out = np.zeros((order + 1, m))
        for k in range(order + 1):
            out[k] = func_list(k, t)
        return out

    return derivatives


def _circle(r=1.0, m=2, speed=1.0, center=None):
    """Circle ``r (cos(w t), sin(w t))`` with ``w = speed / r`` in the first plane."""
    r, m, w = float(r), int(m), float(speed) / float(r)
    c = np.zeros(m) if center is None else np.asarray(center, float)

    def ev(t):
        t = np.asarray(t)
        out = np.zeros(np.shape(t) + (m,), dtype=np.result_type(t, float)) + c
        out[..., 0] += r * np.cos(w * t)
        out[..., 1] += r * np.sin(w * t)
        return out

    def kth(k, t):
        v = np.zeros(m)
        ph = w * t + k * np.pi / 2
        v[0] = r * w**k * np.cos(ph)
        v[1] = r * w**k * np.sin(ph)
        return v + (c if k == 0 else 0)

    return CurveProvider(ev, _poly_like(kth, m), holomorphic=True, label=f"circle(r={r:g})")


def _helix(a=1.0, b=1.0):
    """Helix ``(a cos t, a sin t, b t)``: curvature a/(a^2+b^2), torsion b/(a^2+b^2)."""
    a, b = float(a), float(b)

    def ev(t):
        t = np.asarray(t)
        return np.stack([a * np.cos(t), a * np.sin(t), b * t], -1)

    def kth(k, t):
        ph = t + k * np.pi / 2
        z = b * t if k == 0 else (b if k == 1 else 0.0)
        return np.array([a * np.cos(ph), a * np.sin(ph), z])

    return CurveProvider(ev, _poly_like(kth, 3), holomorphic=True, label=f"helix({a:g},{b:g})")


def _line(m=2, direction=None, point=None):
    m = int(m)
    d = np.eye(m)[0] if direction is None else np.asarray(direction, float)
    p = np.zeros(m) if point is None else np.asarray(point, float)

    def ev(t):
        t = np.asarray(t)
        return p + t[..., None] * d

    def kth(k, t):
        return p + t * d if k == 0 else (d if k == 1 else np.zeros(m))

    return CurveProvider(ev, _poly_like(kth, m), holomorphic=True, label="line")


def _great_circle(k=1.0, m=2):
    """Unit-speed great circle through the origin of the stereographic chart."""
    k, m = float(k), int(m)
    sk = np.sqrt(k)

    def ev(t):
        t = np.asarray(t)
        out = np.zeros(np.shape(t) + (m,), dtype=np.result_type(t, float))
        out[..., 0] = np.tan(sk * t / 2) / sk
        return out

    return CurveProvider(ev, holomorphic=True, radius=0.3, label="great_circle")


def _torus_top_circle():
    """The unit-speed circle z = 1 of the torus (theta = pi/2), kappa_1 = 1/2."""

    def ev(t):
        t = np.asarray(t)
        return np.stack([np.pi / 2 + 0 * t, -0.5 * t], -1)

    def kth(k, t):
        if k == 0:
            return np.array([np.pi / 2, -0.5 * t])
        return np.array([0.0, -0.5 if k == 1 else 0.0])

    return CurveProvider(ev, _poly_like(kth, 2), holomorphic=True, label="torus_top_circle")


def _plane_circle(k=0.5):
    """Counterclockwise unit-speed plane circle of curvature ``k``."""
    if k == "matched":
        k = 0.5
    return _circle(r=1.0 / float(k), m=2)


_CURVES = {
    "circle": (_circle, {"r": "radius (default 1)", "m": "ambient dim (default 2)",
                         "speed": "default 1"}),
    "helix": (_helix, {"a": "radius (default 1)", "b": "pitch (default 1)"}),
    "line": (_line, {"m": "ambient dim (default 2)"}),
    "great_circle": (_great_circle, {"k": "sphere curvature (default 1)", "m": "default 2"}),
    "torus_top_circle": (_torus_top_circle, {}),
    "plane_circle": (_plane_circle, {"k": "curvature or 'matched' (= 1/2)"}),
}


def curve_names():
    return list(_CURVES)


def load_curve(name, params=None):
    """Analytic test curve by name; see ``curve_names()``."""
    if name not in _CURVES:
        raise UnknownPresetError(f"unknown curve '{name}'; known: {', '.join(_CURVES)}")
    builder, schema = _CURVES[name]
    params = {} if params is None else params
    if not isinstance(params, dict):
        params = dict(zip(list(schema), params))
    unknown = set(params) - set(schema)
    if unknown:
        raise UnknownPresetError(f"unknown parameters {sorted(unknown)} for curve '{name}'")
    try:
        return builder(**params)
    except (TypeError, ValueError) as exc:
        raise UnknownPresetError(f"bad parameters for curve '{name}': {exc}") from exc


# --- self checks ---------------------------------------------------------------------

@dataclass
class SelfcheckReport:
    """Named pass/fail items with the measured value behind each."""

    name: str
    params: dict
    items: list = field(default_factory=list)

    def add(self, item, passed, value):
        self.items.append({"item": item, "pass": bool(passed), "value": float(value)})

    @property
    def passed(self):
        return all(it["pass"] for it in self.items)

    def as_dict(self):
        return {"preset": self.name, "params": self.params, "pass": self.passed,
                "items": list(self.items)}


def preset_selfcheck(name, params=None, seed=0, rank_samples=20):
    """Run the documented checks of a preset.

    Items: Killing residuals of the basis (and of the non-Killing probe),
    analytic against finite-difference metric partials, curvature symmetries
    at a random point, the constant-curvature identity where a constant is
    documented, documented rank tables, and the signatures of the torus and
    bump examples.  Failures are report entries, not exceptions.
    """
    from .congruence import constant_curvature_residual
    from .geometry import gaussian_curvature, riemann
    from .invariants import stability_and_counts
    from . import _numerics as nm

    desc = load_preset(name, params, validate=False)
    rep = SelfcheckReport(name, dict(desc.params))
    chart = desc.chart
    rng = np.random.default_rng(seed)
    pts = _validation_points(desc)
    for f in desc.killing:
        res = killing_residual(chart, f, pts)
        rep.add(f"killing {f.label}", res < KILLING_TOL, res)
    res = killing_residual(chart, desc.probe, pts)
    rep.add(f"probe {desc.probe.label} is not Killing", res > 100 * KILLING_TOL, res)
    x = desc.random_point(rng)
    if chart.metric_partials is not None:
        fd = nm.partial_stack(chart.g, x, 1)[1]
        err = np.abs(fd - chart.dg(x)).max()
        rep.add("analytic partials match finite differences", err < 1e-6, err)
    cv = riemann(chart, x, j_max=0)
    r4 = cv.r4
    scale = max(1.0, np.abs(r4).max())
    anti = np.abs(r4 + np.swapaxes(r4, 0, 1)).max() / scale
    bianchi = np.abs(np.einsum("abcd->abcd", r4) + np.einsum("acdb->abcd", r4)
                     + np.einsum("adbc->abcd", r4)).max() / scale
    rep.add("curvature antisymmetry", anti < 1e-8, anti)
    rep.add("first Bianchi identity", bianchi < 1e-8, bianchi)
    k = desc.constants.get("curvature")
    if k is not None:
        res = max(constant_curvature_residual(chart, desc.random_point(rng), k)[0]
                  for _ in range(5))
        rep.add("constant-curvature identity", res < 1e-7, res)
    if "N_r" in desc.constants:
        doc = desc.constants["N_r"]
        tab = stability_and_counts(desc, max(doc), samples=rank_samples, seed=seed)
        worst = max(abs(row["N_r"] - doc[row["r"]]) for row in tab.rows)
        rep.add("documented N_r table", worst == 0, worst)
        if 1 in doc:
            rank1 = tab.rows[1]["rank"]
            rep.add("rank of D^1", rank1 == desc.dim * 2 + 1 - doc[1], rank1)
    if desc.constants.get("killing_complete") and desc.killing:
        tab = stability_and_counts(desc, desc.dim + 1, samples=rank_samples, seed=seed)
        ok = tab.stable_bound_ok and tab.k_sum == desc.dim
        rep.add("stable N_r bound and sum of k_r", ok, tab.k_sum)
    if name == "torus_example1":
        kval = float(gaussian_curvature(chart, np.array([np.pi / 2, 0.3])))
        rep.add("K = 0 on the top circle", abs(kval) < 1e-8, kval)
        dk = riemann(chart, np.array([np.pi / 2, 0.3]), j_max=1).nabla_r[1]
        rep.add("dK != 0 on the top circle", np.abs(dk).max() > 1e-2, np.abs(dk).max())
    if name == "bump_example2":
        at0 = riemann(chart, np.zeros(desc.dim), j_max=2)
        for j, st in enumerate(at0.nabla_r):
            v = np.abs(st).max()
            rep.add(f"|nabla^{j} R(0)| vanishes", v < 1e-6, v)
        xt = np.full(desc.dim, 0.3)
        v = abs(riemann(chart, xt, j_max=0).r[0, 1, 0, 1])
        rep.add("R_iji^j(x_t) != 0 at t = 0.3", v > 1e-3, v)
    return rep
