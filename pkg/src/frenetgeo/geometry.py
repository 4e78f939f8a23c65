"""Metric charts and pointwise tensor calculus.

Index conventions
-----------------
* ``gamma[i, j, k]`` is the Christoffel symbol with upper index ``i``.
* The curvature operator is ``R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z
  - nabla_[X,Y] Z``.  The (1,3) array ``r[i, j, k, l]`` is the ``l``-th
  component of ``R(d_i, d_j) d_k``.
* The lowered tensor is ``r4[a, b, c, d] = g(R(d_c, d_d) d_b, d_a)``, so that
  ``r4(X, Y, X, Y)`` is the sectional curvature of an orthonormal pair.
* Covariant derivatives put the new (differentiation) slot first:
  ``nabla_r[1][a, i, j, k, l] = (nabla_a R)(d_i, d_j, d_k)^l`` and
  ``nabla_r[2][b, a, ...] = (nabla_b nabla R)(d_a, ...)``.

Derivatives of the Christoffel symbols are taken by nested high-order
central differences once; curvature and its covariant derivatives are then
assembled exactly from that Taylor data by the Leibniz rule ("field jets").
"""

from dataclasses import dataclass, field
from math import comb
from typing import Callable, Optional

import numpy as np

from . import _numerics as nm
from .errors import (ConvergenceError, DegenerateMetricError,
                     StencilClippingError, UnsupportedOrderError)

__all__ = [
    "MetricChart",
    "VectorField",
    "ChristoffelValue",
    "CurvatureValue",
    "christoffel",
    "riemann",
    "gaussian_curvature",
    "lie_derivative_metric",
    "killing_residual",
    "geodesic",
    "exp_map",
    "log_map",
    "normal_coordinates",
    "orthonormal_frame",
    "curvature_operator",
]

# first partials of g when no analytic partials are supplied
METRIC_FD_STEP = 1e-3
METRIC_FD_ACCURACY = 6
SUPPORTED_J_MAX = 2
HIGHER_J_MAX = 3


@dataclass(frozen=True)
class MetricChart:
    """A coordinate chart carrying a Riemannian metric.

    Parameters
    ----------
    dim : int
        Dimension ``m``.
    metric : callable
        Points of shape ``(..., m)`` to symmetric matrices ``(..., m, m)``.
    lower, upper : array_like
        Corners of the axis-aligned domain box.
    metric_partials : callable, optional
        Points to ``dg[..., k, i, j] = d_k g_ij``.  Central differences of
        ``metric`` are used when absent.
    orientation : int
        +1 or -1; fixes the volume form ``orientation * sqrt(det g) dx``.
    label : str
        Preset name or ``"custom"``.
    holomorphic : bool
        True when ``metric`` (and ``metric_partials``) accept complex points
        and are analytic there; enables contour-integral derivatives along
        curves.
    """

    dim: int
    metric: Callable
    lower: np.ndarray
    upper: np.ndarray
    metric_partials: Optional[Callable] = None
    orientation: int = 1
    label: str = "custom"
    holomorphic: bool = False
    ball_radius: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")

    def g(self, x):
        """Metric components at one or many points."""
        return np.asarray(self.metric(np.asarray(x)))

    def dg(self, x):
        """Partials ``d_k g_ij`` with the derivative index first."""
        x = np.asarray(x)
        if self.metric_partials is not None:
            return np.asarray(self.metric_partials(x))
        off, w = nm.fd_weights(1, METRIC_FD_ACCURACY)
        keep = w != 0
        off, w = off[keep], w[keep] / METRIC_FD_STEP
        m = self.dim
        eye = np.eye(m)
        disp = off[:, None, None] * eye[None] * METRIC_FD_STEP  # (K, m, m)
        pts = x[..., None, None, :] + disp
        vals = self.g(pts)  # (..., K, m, m, m)
        return np.tensordot(w, np.moveaxis(vals, -4, 0), axes=(0, 0))

    def gamma(self, x):
        """Christoffel array at one or many points, without checks."""
        x = np.asarray(x)
        g = self.g(x)
        dg = self.dg(x)
        lower = 0.5 * (np.swapaxes(dg, -3, -2)
                       + np.moveaxis(dg, -3, -1)
                       - dg)
        # lower[..., l, j, k] = (d_j g_lk + d_k g_lj - d_l g_jk) / 2
        gam = np.einsum("...il,...ljk->...ijk", np.linalg.inv(g), lower)
        return 0.5 * (gam + np.swapaxes(gam, -1, -2))

    def contains(self, x, margin=0.0):
        """True if ``x`` lies inside the domain with the given margin."""
        x = np.asarray(x, dtype=float)
        inside = np.all((x - margin > self.lower) & (x + margin < self.upper),
                        axis=-1)
        if self.ball_radius is not None:
            inside &= np.linalg.norm(x, axis=-1) + margin < self.ball_radius
        return inside

    def require_inside(self, x, margin):
        if not np.all(self.contains(x, margin)):
            raise StencilClippingError(
                f"point {np.asarray(x).tolist()} is closer than {margin:.3g} "
                f"to the boundary of the '{self.label}' chart")


@dataclass(frozen=True)
class VectorField:
    """A vector field given by its chart components.

    Parameters
    ----------
    func : callable
        Points ``(..., m)`` to components ``(..., m)``.
    label : str
    holomorphic : bool
        True if ``func`` accepts complex points (analytic components).
    """

    func: Callable
    label: str = "X"
    holomorphic: bool = True

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x)))


@dataclass
class ChristoffelValue:
    """Christoffel symbols ``gamma[i, j, k]`` at ``point``."""

    point: np.ndarray
    gamma: np.ndarray


@dataclass
class CurvatureValue:
    """Curvature data at a point.

    Attributes
    ----------
    point : ndarray
    r : ndarray, shape (m, m, m, m)
        ``r[i, j, k, l]``: component ``l`` of ``R(d_i, d_j) d_k``.
    r4 : ndarray, shape (m, m, m, m)
        ``r4[a, b, c, d] = g(R(d_c, d_d) d_b, d_a)``.
    nabla_r : list of ndarray
        ``nabla_r[j]`` holds the components of ``nabla^j R`` (new slots first,
        upper index last); ``nabla_r[0] is r``.
    """

    point: np.ndarray
    r: np.ndarray
    r4: np.ndarray
    nabla_r: list = field(default_factory=list)


def _check_metric(chart, x):
    g = chart.g(x)
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetricError(
            f"metric of '{chart.label}' is not positive definite at "
            f"{np.asarray(x).tolist()}") from exc
    return g


def _gamma_margin(chart):
    if chart.metric_partials is not None:
        return 0.0
    return nm.stencil_reach(1, METRIC_FD_ACCURACY) * METRIC_FD_STEP


def _stack_margin(order):
    reach = nm.stencil_reach(1, nm.PARTIAL_ACCURACY)
    return max([0.0] + [n * reach * nm.PARTIAL_STEPS[n] for n in range(1, order + 1)])


def christoffel(chart, x):
    """Levi-Civita connection symbols at a point.

    Parameters
    ----------
    chart : MetricChart
    x : array_like, shape (m,)

    Returns
    -------
    ChristoffelValue

    Raises
    ------
    StencilClippingError
        ``x`` too close to the domain boundary.
    DegenerateMetricError
        ``g(x)`` not positive definite.
    """
    x = np.asarray(x, dtype=float)
    chart.require_inside(x, _gamma_margin(chart))
    _check_metric(chart, x)
    return ChristoffelValue(point=x, gamma=chart.gamma(x))


# --- field jets -------------------------------------------------------------
# A field jet is a list [T, dT, d2T, ...]; entry n has n leading symmetric
# derivative axes followed by the tensor axes of T.

_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def jet_linear(spec, jet):
    """Apply a linear einsum map to the tensor part of every level."""
    lhs, rhs = spec.split("->")
    return [np.einsum("..." + lhs + "->..." + rhs, level) for level in jet]


def jet_bilinear(spec, jet_a, jet_b):
    """Leibniz rule for a bilinear einsum product of two field jets."""
    lhs, rhs = spec.split("->")
    ta, tb = lhs.split(",")
    pool = [c for c in _LETTERS if c not in spec]
    order = min(len(jet_a), len(jet_b)) - 1
    out = []
    for n in range(order + 1):
        total = 0.0
        for k in range(n + 1):
            da = "".join(pool[:k])
            db = "".join(pool[k:n])
            term = np.einsum(f"{da}{ta},{db}{tb}->{da}{db}{rhs}",
                             jet_a[k], jet_b[n - k])
            total = total + comb(n, k) * term
        out.append(nm.symmetrize_leading(np.asarray(total), n))
    return out


def jet_field_derivative(jet):
    """Field jet of the partial derivative, new index first in the tensor part."""
    # the last derivative axis of level n + 1 already sits where the new
    # tensor index belongs
    return [jet[n + 1] for n in range(len(jet) - 1)]


def covariant_derivative_jet(tjet, gjet, n_lower):
    """Covariant derivative of a tensor field jet.

    Parameters
    ----------
    tjet : list of ndarray
        Field jet of a tensor with ``n_lower`` covariant slots followed by
        one contravariant slot (or none if the tensor part has exactly
        ``n_lower`` axes).
    gjet : list of ndarray
        Field jet of the Christoffel array.
    n_lower : int

    Returns
    -------
    list of ndarray
        Field jet of ``nabla T``; the new covariant slot is first.
    """
    ndim = tjet[0].ndim
    has_upper = ndim == n_lower + 1
    letters = _LETTERS[:ndim]
    out = jet_field_derivative(tjet)
    out = [np.asarray(x, dtype=float) for x in out]
    a, c = "Z", "Y"
    for s in range(n_lower):
        t_in = letters[:s] + c + letters[s + 1:]
        spec = f"{c}{a}{letters[s]},{t_in}->{a}{letters}"
        term = jet_bilinear(spec, gjet, tjet)
        out = [o - t for o, t in zip(out, term)]
    if has_upper:
        u = letters[-1]
        t_in = letters[:-1] + c
        spec = f"{u}{a}{c},{t_in}->{a}{letters}"
        term = jet_bilinear(spec, gjet, tjet)
        out = [o + t for o, t in zip(out, term)]
    n = min(len(out), len(gjet))
    return out[:n]


def _curvature_jet(gjet):
    dg = jet_field_derivative(gjet)  # [a, l, j, k] = d_a Gamma^l_jk
    lin1 = jet_linear("iljk->ijkl", dg)
    lin2 = jet_linear("jlik->ijkl", dg)
    q1 = jet_bilinear("lip,pjk->ijkl", gjet, gjet)
    q2 = jet_bilinear("ljp,pik->ijkl", gjet, gjet)
    n = len(dg)
    return [lin1[k] - lin2[k] + q1[k] - q2[k] for k in range(n)]


def christoffel_jet(chart, x, order):
    """Field jet of the Christoffel symbols up to ``order`` partials."""
    return nm.partial_stack(chart.gamma, x, order)


def riemann(chart, x, j_max=2, allow_higher=False):
    """Curvature tensor and its covariant derivatives at a point.

    Parameters
    ----------
    chart : MetricChart
    x : array_like, shape (m,)
    j_max : int
        Highest covariant derivative of ``R`` to return (default 2).
    allow_higher : bool
        Opt in to ``j_max = 3``.

    Returns
    -------
    CurvatureValue
    """
    limit = HIGHER_J_MAX if allow_higher else SUPPORTED_J_MAX
    if j_max < 0 or j_max > limit:
        raise UnsupportedOrderError(f"j_max={j_max} outside 0..{limit}")
    x = np.asarray(x, dtype=float)
    chart.require_inside(x, _gamma_margin(chart) + _stack_margin(j_max + 1))
    g = _check_metric(chart, x)
    gjet = christoffel_jet(chart, x, j_max + 1)
    rjet = _curvature_jet(gjet)
    stacks = [rjet[0]]
    cur = rjet
    for j in range(1, j_max + 1):
        cur = covariant_derivative_jet(cur, gjet, n_lower=2 + j)
        stacks.append(cur[0])
    r = rjet[0]
    r4 = np.einsum("al,cdbl->abcd", g, r)
    return CurvatureValue(point=x, r=r, r4=r4, nabla_r=stacks)


def curvature_operator(r, X, Y, Z):
    """``R(X, Y)Z`` from the (1,3) array."""
    return np.einsum("ijkl,i,j,k->l", r, X, Y, Z)


def gaussian_curvature(chart, x):
    """Gaussian curvature of a 2-dimensional chart (vectorised over points)."""
    if chart.dim != 2:
        raise ValueError("Gaussian curvature needs a 2-dimensional chart")
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1, 2)
    out = np.empty(flat.shape[0])
    for n, p in enumerate(flat):
        jet = christoffel_jet(chart, p, 1)
        r = _curvature_jet(jet)[0]
        g = chart.g(p)
        r4 = np.einsum("al,cdbl->abcd", g, r)
        out[n] = r4[0, 1, 0, 1] / np.linalg.det(g)
    return out.reshape(x.shape[:-1])


# --- Killing fields -----------------------------------------------------------

def _field_jacobian(X, x, step=1e-3, accuracy=6):
    off, w = nm.fd_weights(1, accuracy)
    keep = w != 0
    off, w = off[keep], w[keep] / step
    m = x.shape[-1]
    eye = np.eye(m)
    pts = x[..., None, None, :] + off[:, None, None] * eye[None] * step
    vals = X(pts)  # (..., K, m, m)  [.., K, deriv dir, comp]
    return np.tensordot(w, np.moveaxis(vals, -3, 0), axes=(0, 0))  # [..., c, i] = d_c X^i


def lie_derivative_metric(chart, X):
    """Evaluator of ``(L_X g)_ij``.

    Parameters
    ----------
    chart : MetricChart
    X : VectorField or callable

    Returns
    -------
    callable
        Points ``(..., m)`` to symmetric arrays ``(..., m, m)``.
    """

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        margin = _gamma_margin(chart) + 3 * 1e-3
        chart.require_inside(x, margin)
        vec = np.asarray(X(x))
        dx = _field_jacobian(X, x)
        g = chart.g(x)
        dg = chart.dg(x)
        term = np.einsum("...c,...cij->...ij", vec, dg)
        term2 = np.einsum("...cj,...ic->...ij", g, dx)
        return term + term2 + np.swapaxes(term2, -1, -2)

    return evaluate


def killing_residual(chart, X, points):
    """Largest absolute entry of ``L_X g`` over the sample points."""
    return float(np.max(np.abs(lie_derivative_metric(chart, X)(points))))


# --- geodesics ------------------------------------------------------------------

def _geodesic_rhs(chart, x, v):
    gam = chart.gamma(x)
    return v, -np.einsum("...ijk,...j,...k->...i", gam, v, v)


def _rk4_geodesic_step(chart, x, v, h):
    k1x, k1v = _geodesic_rhs(chart, x, v)
    k2x, k2v = _geodesic_rhs(chart, x + 0.5 * h * k1x, v + 0.5 * h * k1v)
    k3x, k3v = _geodesic_rhs(chart, x + 0.5 * h * k2x, v + 0.5 * h * k2v)
    k4x, k4v = _geodesic_rhs(chart, x + h * k3x, v + h * k3v)
    x = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
    v = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return x, v


@dataclass
class GeodesicResult:
    """Sampled geodesic.

    Attributes
    ----------
    t, x, v : ndarray
        Times, positions and velocities.
    energy_drift : float
        ``max |g(v, v)(t) - g(v0, v0)|``.
    exited : bool
        True if integration stopped at the domain boundary.
    """

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    energy_drift: float
    exited: bool


def geodesic(chart, x0, v0, t_span, step):
    """Integrate the geodesic equation with fixed-step RK4.

    Parameters
    ----------
    chart : MetricChart
    x0, v0 : array_like, shape (m,)
        Initial position and velocity at ``t_span[0]``.
    t_span : (float, float)
        Start and end time; the end may precede the start.
    step : float
        Positive step size; the last step is shortened to land on the end.

    Returns
    -------
    GeodesicResult
    """
    if step <= 0:
        raise ValueError("step must be positive")
    t0, t1 = float(t_span[0]), float(t_span[1])
    x = np.asarray(x0, dtype=float)
    v = np.asarray(v0, dtype=float)
    chart.require_inside(x, 0.0)
    n = max(int(np.ceil(abs(t1 - t0) / step - 1e-12)), 1)
    h = (t1 - t0) / n
    ts, xs, vs = [t0], [x], [v]
    e0 = float(v @ chart.g(x) @ v)
    drift = 0.0
    exited = False
    for k in range(n):
        xn, vn = _rk4_geodesic_step(chart, x, v, h)
        if not chart.contains(xn):
            exited = True
            break
        x, v = xn, vn
        ts.append(t0 + (k + 1) * h)
        xs.append(x)
        vs.append(v)
        drift = max(drift, abs(float(v @ chart.g(x) @ v) - e0))
    return GeodesicResult(np.array(ts), np.array(xs), np.array(vs), drift, exited)


EXP_STEPS = 64


def exp_map(chart, x0, v, n_steps=EXP_STEPS):
    """Riemannian exponential map, vectorised over the leading axes of ``v``.

    Parameters
    ----------
    chart : MetricChart
    x0 : array_like, shape (m,) or broadcastable to ``v``
    v : array_like, shape (..., m)
    n_steps : int
        Fixed RK4 steps on ``[0, 1]``.  Keeping this fixed makes the map a
        smooth function of ``v``.

    Returns
    -------
    ndarray, shape (..., m)
    """
    v = np.asarray(v, dtype=float)
    x = np.broadcast_to(np.asarray(x0, dtype=float), v.shape).copy()
    h = 1.0 / n_steps
    for _ in range(n_steps):
        x, v = _rk4_geodesic_step(chart, x, v, h)
    return x


def log_map(chart, x0, y, tol=1e-10, max_iter=50, n_steps=EXP_STEPS, fd_step=1e-6):
    """Inverse of :func:`exp_map` by damped Newton shooting.

    Parameters
    ----------
    chart : MetricChart
    x0 : array_like, shape (m,) or broadcastable to ``y``
    y : array_like, shape (..., m)
    tol : float
        Residual tolerance on ``|exp(x0, v) - y|``, relative to ``1 + |y|``.
    max_iter : int
    n_steps : int
        Steps of the inner exponential map.
    fd_step : float
        Central-difference step for the shooting Jacobian.

    Returns
    -------
    ndarray, shape (..., m)

    Raises
    ------
    ConvergenceError
        Some sample did not reach the tolerance.
    """
    y = np.asarray(y, dtype=float)
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), y.shape)
    shape = y.shape
    m = shape[-1]
    yf = y.reshape(-1, m)
    xf = x0.reshape(-1, m)
    v = yf - xf
    eye = np.eye(m)
    scale = 1.0 + np.linalg.norm(yf, axis=-1)

    def residual(vv):
        return exp_map(chart, xf, vv, n_steps) - yf

    res = residual(v)
    nres = np.linalg.norm(res, axis=-1)
    for _ in range(max_iter):
        active = nres > tol * scale
        if not np.any(active):
            break
        pert = v[:, None, :] + fd_step * np.concatenate([eye, -eye])[None]
        xp = exp_map(chart, np.repeat(xf[:, None, :], 2 * m, axis=1), pert, n_steps)
        jac = (xp[:, :m] - xp[:, m:]).transpose(0, 2, 1) / (2 * fd_step)
        delta = -np.linalg.solve(jac, res[..., None])[..., 0]
        delta[~active] = 0.0
        lam = np.ones(v.shape[0])
        for _ in range(12):
            trial = v + lam[:, None] * delta
            rt = residual(trial)
            nt = np.linalg.norm(rt, axis=-1)
            worse = (nt > nres) & active
            if not np.any(worse):
                break
            lam[worse] *= 0.5
        v, res, nres = trial, rt, nt
    if np.any(nres > tol * scale):
        worst = float(np.max(nres / scale))
        raise ConvergenceError(f"log map did not converge (relative residual {worst:.3g})")
    return v.reshape(shape)


def orthonormal_frame(g, orientation=1):
    """A g-orthonormal, positively oriented basis (columns) from Cholesky."""
    L = np.linalg.cholesky(g)
    E = np.linalg.inv(L).T
    if np.linalg.det(E) * orientation < 0:
        E[:, -1] = -E[:, -1]
    return E


@dataclass
class NormalCoordinates:
    """Riemannian normal coordinates centred at ``x0``.

    Attributes
    ----------
    chart : MetricChart
    x0 : ndarray
    frame : ndarray
        Columns form a g-orthonormal basis at ``x0``.
    coframe : ndarray
        Inverse of ``frame`` (rows are the dual covectors).
    """

    chart: MetricChart
    x0: np.ndarray
    frame: np.ndarray
    coframe: np.ndarray
    tol: float = 1e-12

    def to_normal(self, x):
        """Chart points to normal coordinates."""
        v = log_map(self.chart, self.x0, x, tol=self.tol)
        return v @ self.coframe.T

    def from_normal(self, y):
        """Normal coordinates to chart points."""
        y = np.asarray(y, dtype=float)
        return exp_map(self.chart, self.x0, y @ self.frame.T)

    def pullback_metric(self, y, step=1e-3):
        """Metric components in normal coordinates (finite-difference Jacobian)."""
        y = np.asarray(y, dtype=float)
        m = y.shape[-1]
        off, w = nm.fd_weights(1, 6)
        keep = w != 0
        off, w = off[keep], w[keep] / step
        eye = np.eye(m)
        pts = y[..., None, None, :] + off[:, None, None] * eye[None] * step
        xs = self.from_normal(pts)  # (..., K, m, m): [.., K, dir, comp]
        jac = np.tensordot(w, np.moveaxis(xs, -3, 0), axes=(0, 0))  # [..., dir, comp]
        g = self.chart.g(self.from_normal(y))
        return np.einsum("...ai,...ij,...bj->...ab", jac, g, jac)

    def as_chart(self, radius=0.3):
        """The normal coordinate system as a (finite-difference) MetricChart."""
        m = self.chart.dim
        return MetricChart(dim=m, metric=self.pullback_metric,
                           lower=-radius * np.ones(m), upper=radius * np.ones(m),
                           orientation=self.chart.orientation,
                           label=f"normal({self.chart.label})")


def normal_coordinates(chart, x0, frame=None, tol=1e-12):
    """Normal coordinates attached to an orthonormal frame at ``x0``.

    Parameters
    ----------
    chart : MetricChart
    x0 : array_like, shape (m,)
    frame : ndarray, optional
        g-orthonormal columns; a Cholesky-based oriented frame by default.
    tol : float
        Tolerance handed to :func:`log_map`.

    Returns
    -------
    NormalCoordinates
    """
    x0 = np.asarray(x0, dtype=float)
    g = _check_metric(chart, x0)
    E = orthonormal_frame(g, chart.orientation) if frame is None else np.asarray(frame, float)
    return NormalCoordinates(chart, x0, E, np.linalg.inv(E), tol)
