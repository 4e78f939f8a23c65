"""Curves from prescribed curvatures.

The Frenet equations are integrated as a first-order system for the point
``x`` and the frame matrix ``Y`` (columns ``X_1..X_m``)::

    x'    = kappa_0 X_1
    X_1'  = kappa_0 kappa_1 X_2 - kappa_0 Gamma(X_1, X_1)
    X_i'  = kappa_0 (kappa_i X_{i+1} - kappa_{i-1} X_{i-1}) - kappa_0 Gamma(X_1, X_i)
    X_m'  = -kappa_0 kappa_{m-1} X_{m-1} - kappa_0 Gamma(X_1, X_m)

with a fixed-step classical Runge-Kutta scheme.  Orthonormality of the frame
is a first integral of the exact flow; its numerical drift is reported.
"""

from dataclasses import dataclass
from math import factorial

import numpy as np

from . import _numerics as nm
from .curves import CurveJet, f_table_from_kappas, frenet, frenet_frame, numerical_rank
from .errors import (CurvaturePositivityError, DomainExitError, IncompatibleDataError,
                     InvalidFrameError, NotFrenetError)

__all__ = [
    "CurvatureSpec",
    "ReconstructionState",
    "ReconstructionResult",
    "frenet_rhs",
    "reconstruct",
    "measure_kappas",
    "initial_data_from_vectors",
]

FRAME_TOL = 1e-8
GRAM_TOL = 1e-6


@dataclass
class CurvatureSpec:
    """Prescribed curvature functions.

    Parameters
    ----------
    kappas : list of callable
        ``kappa_j(t)`` for ``j = 0..m-1``.
    t0 : float
    derivatives : list of callable, optional
        ``d_j(t, n)`` returning the n-th derivative of ``kappa_j``; finite
        differences of ``kappas`` are used when absent.
    interval : (float, float), optional
        Interval on which positivity of ``kappa_0..kappa_{m-2}`` is claimed.
    """

    kappas: list
    t0: float = 0.0
    derivatives: list = None
    interval: tuple = None

    @property
    def m(self):
        return len(self.kappas)

    @classmethod
    def constant(cls, values, t0=0.0):
        """Constant curvatures."""
        vals = [float(v) for v in values]
        kap = [lambda t, v=v: v + 0.0 * np.asarray(t) for v in vals]
        der = [lambda t, n, v=v: v if n == 0 else 0.0 for v in vals]
        return cls(kap, t0, der)

    @classmethod
    def polynomial(cls, coefficients, t0=0.0):
        """Polynomials in ``t - t0``; ``coefficients[j]`` ascending powers."""
        polys = [np.polynomial.Polynomial(np.asarray(c, dtype=float)) for c in coefficients]
        kap = [lambda t, p=p: p(np.asarray(t) - t0) for p in polys]
        der = [lambda t, n, p=p: float(p.deriv(n)(t - t0)) if n else float(p(t - t0))
               for p in polys]
        return cls(kap, t0, der)

    def values(self, t):
        """``kappa_j(t)`` as an array of length m."""
        return np.array([float(k(t)) for k in self.kappas])

    def jets(self, t, order):
        """Array ``(m, order + 1)`` of derivatives ``kappa_j^(n)(t)``."""
        out = np.zeros((self.m, order + 1))
        for j in range(self.m):
            if self.derivatives is not None:
                out[j] = [self.derivatives[j](t, n) for n in range(order + 1)]
            else:
                f = self.kappas[j]
                out[j] = nm.univariate_derivatives(
                    lambda s: np.array([float(f(v)) for v in s]), t, order,
                    step=1e-2, accuracy=8)
        return out

    def check_positivity(self, ts):
        """Raise if some ``kappa_j``, ``j <= m - 2``, is not positive at ``ts``."""
        for t in np.atleast_1d(ts):
            vals = self.values(t)
            bad = np.nonzero(vals[: self.m - 1] <= 0)[0]
            if bad.size:
                raise CurvaturePositivityError(
                    f"kappa_{bad[0]} = {vals[bad[0]]:.3g} <= 0 at t = {t:.6g}")


@dataclass
class ReconstructionState:
    """Point and frame at time ``t``; ``Y[:, i]`` is ``X_{i+1}``."""

    t: float
    x: np.ndarray
    Y: np.ndarray


def _rhs(chart, x, Y, kap):
    m = x.size
    k0 = kap[0]
    gam = chart.gamma(x)
    corr = np.einsum("ijk,j,kc->ic", gam, Y[:, 0], Y)  # Gamma(X_1, X_c)
    dY = -k0 * corr
    for c in range(m):
        if c + 1 < m:
            dY[:, c] += k0 * kap[c + 1] * Y[:, c + 1]
        if c >= 1:
            dY[:, c] -= k0 * kap[c] * Y[:, c - 1]
    return k0 * Y[:, 0], dY


def frenet_rhs(chart, state, spec):
    """Time derivative of a :class:`ReconstructionState` under the Frenet system.

    Returns
    -------
    dx : ndarray, shape (m,)
    dY : ndarray, shape (m, m)
    """
    if not chart.contains(state.x):
        raise DomainExitError(f"x = {state.x.tolist()} outside the chart")
    return _rhs(chart, np.asarray(state.x, float), np.asarray(state.Y, float),
                spec.values(state.t))


def _check_frame(chart, x0, Y):
    g = chart.g(x0)
    err = np.abs(Y.T @ g @ Y - np.eye(Y.shape[0])).max()
    if err > FRAME_TOL:
        raise InvalidFrameError(f"frame0 is not g-orthonormal (error {err:.3g})")
    if chart.orientation * np.linalg.det(Y) <= 0:
        raise InvalidFrameError("frame0 is not positively oriented")


def _integrate(chart, x, Y, spec, t0, t1, step, reorthonormalize):
    n = max(int(np.ceil(abs(t1 - t0) / step - 1e-9)), 1)
    h = (t1 - t0) / n
    ts, xs, Ys = [t0], [x], [Y]
    t = t0
    for k in range(n):
        ka = spec.values(t)
        kb = spec.values(t + 0.5 * h)
        kc = spec.values(t + h)
        for vals, tt in ((ka, t), (kb, t + 0.5 * h), (kc, t + h)):
            if np.any(vals[: spec.m - 1] <= 0):
                raise CurvaturePositivityError(f"curvature not positive at t = {tt:.6g}")
        x1, Y1 = _rhs(chart, x, Y, ka)
        xm, Ym = x + 0.5 * h * x1, Y + 0.5 * h * Y1
        if not chart.contains(xm):
            raise DomainExitError(f"trajectory left the chart near t = {t:.6g}")
        x2, Y2 = _rhs(chart, xm, Ym, kb)
        xm, Ym = x + 0.5 * h * x2, Y + 0.5 * h * Y2
        x3, Y3 = _rhs(chart, xm, Ym, kb)
        xe, Ye = x + h * x3, Y + h * Y3
        if not chart.contains(xe):
            raise DomainExitError(f"trajectory left the chart near t = {t:.6g}")
        x4, Y4 = _rhs(chart, xe, Ye, kc)
        x = x + h / 6 * (x1 + 2 * x2 + 2 * x3 + x4)
        Y = Y + h / 6 * (Y1 + 2 * Y2 + 2 * Y3 + Y4)
        t = t0 + (k + 1) * h
        if not chart.contains(x):
            raise DomainExitError(f"trajectory left the chart at t = {t:.6g}")
        if reorthonormalize:
            Y, _ = frenet_frame(chart, Y.T, x)
        ts.append(t)
        xs.append(x)
        Ys.append(Y)
    return np.array(ts), np.array(xs), np.array(Ys)


@dataclass
class ReconstructionResult:
    """Output of :func:`reconstruct`.

    Attributes
    ----------
    t : ndarray, shape (N,)
    x : ndarray, shape (N, m)
    frames : ndarray, shape (N, m, m)
    drift : float
        ``max |Y^T g Y - I|`` over all samples.
    drift_rate : float
        ``drift`` divided by the integrated time length.
    measured_t : ndarray
        Times where curvatures were re-measured.
    measured_kappas : ndarray
        Curvatures of the output curve at ``measured_t``.
    kappa_error : float
        Sup-norm difference between measured and prescribed curvatures.
    """

    t: np.ndarray
    x: np.ndarray
    frames: np.ndarray
    drift: float
    drift_rate: float
    measured_t: np.ndarray = None
    measured_kappas: np.ndarray = None
    kappa_error: float = None


def measure_kappas(chart, t, x, spacing=1e-2, accuracy=8, every=1):
    """Re-measure curvatures of a sampled curve.

    Derivatives come from central differences on the uniform samples with a
    step close to ``spacing`` (a multiple of the sampling step).

    Returns
    -------
    times : ndarray
    kappas : ndarray, shape (len(times), m)
    """
    t = np.asarray(t)
    x = np.asarray(x)
    m = x.shape[1]
    dt = t[1] - t[0]
    stride = max(1, int(round(spacing / abs(dt))))
    h = stride * dt
    plans = []
    reach = 0
    for k in range(1, m + 1):
        off, w = nm.fd_weights(k, accuracy)
        plans.append((off.astype(int) * stride, w / h**k))
        reach = max(reach, int(np.max(np.abs(off))) * stride)
    idx = np.arange(reach, len(t) - reach, every)
    out = np.zeros((idx.size, m))
    for n, i in enumerate(idx):
        coords = np.zeros((m + 1, m))
        coords[0] = x[i]
        for k, (off, w) in enumerate(plans, start=1):
            coords[k] = w @ x[i + off]
        out[n] = frenet(chart, CurveJet(t[i], coords)).kappas
    return t[idx], out


def reconstruct(chart, x0, frame0, spec, t_span, step=1e-3, reorthonormalize=False,
                measure=True, measure_every=None):
    """Integrate the Frenet system from ``(x0, frame0)`` at ``spec.t0``.

    Parameters
    ----------
    chart : MetricChart
    x0 : array_like, shape (m,)
    frame0 : array_like, shape (m, m)
        Columns ``X_1..X_m``: g-orthonormal and positively oriented.
    spec : CurvatureSpec
    t_span : (float, float)
        Interval containing ``spec.t0``.
    step : float
    reorthonormalize : bool
        Re-orthonormalise the frame after every step (off by default so that
        the drift stays observable).
    measure : bool
        Re-measure the curvatures of the output curve.
    measure_every : int, optional
        Sub-sampling of the re-measurement points (default: about 50 points).

    Returns
    -------
    ReconstructionResult
    """
    x0 = np.asarray(x0, dtype=float)
    Y0 = np.asarray(frame0, dtype=float)
    a, b = float(t_span[0]), float(t_span[1])
    t0 = spec.t0
    if not a <= t0 <= b:
        raise ValueError("t_span must contain spec.t0")
    chart.require_inside(x0, 0.0)
    _check_frame(chart, x0, Y0)
    parts_t, parts_x, parts_Y = [], [], []
    if a < t0:
        tb, xb, Yb = _integrate(chart, x0, Y0, spec, t0, a, step, reorthonormalize)
        parts_t.append(tb[::-1][:-1])
        parts_x.append(xb[::-1][:-1])
        parts_Y.append(Yb[::-1][:-1])
    tf, xf, Yf = _integrate(chart, x0, Y0, spec, t0, b, step, reorthonormalize) \
        if b > t0 else (np.array([t0]), x0[None], Y0[None])
    parts_t.append(tf)
    parts_x.append(xf)
    parts_Y.append(Yf)
    t = np.concatenate(parts_t)
    x = np.concatenate(parts_x)
    Y = np.concatenate(parts_Y)
    g = chart.g(x)
    gram = np.einsum("nai,nab,nbj->nij", Y, g, Y)
    drift = float(np.abs(gram - np.eye(x.shape[1])).max())
    length = max(b - a, 1e-300)
    res = ReconstructionResult(t, x, Y, drift, drift / length)
    if measure and len(t) > 40:
        every = measure_every or max(1, len(t) // 50)
        mt, mk = measure_kappas(chart, t, x, every=every)
        target = np.array([spec.values(s) for s in mt])
        res.measured_t, res.measured_kappas = mt, mk
        res.kappa_error = float(np.abs(mk - target).max()) if mt.size else None
    return res


def initial_data_from_vectors(chart, x0, vectors, spec, tol=GRAM_TOL):
    """Frame realising prescribed values of ``nabla^{j-1} T`` at ``t0``.

    Parameters
    ----------
    chart : MetricChart
    x0 : array_like, shape (m,)
    vectors : array_like, shape (m, m)
        Rows ``w_1..w_m`` (chart components).
    spec : CurvatureSpec
    tol : float
        Relative tolerance of the Gram condition, scaled by the largest
        ``|g(w_i, w_j)|``.

    Returns
    -------
    ndarray, shape (m, m)
        Frame (columns) for :func:`reconstruct`.

    Raises
    ------
    NotFrenetError
        ``w_1..w_{m-1}`` are dependent.
    IncompatibleDataError
        The Gram condition, or the orientation of ``w_m``, is violated.
    """
    x0 = np.asarray(x0, dtype=float)
    W = np.atleast_2d(np.asarray(vectors, dtype=float))
    m = chart.dim
    g = chart.g(x0)
    L = np.linalg.cholesky(g)
    if numerical_rank(W[: m - 1] @ L) < m - 1:
        raise NotFrenetError("w_1..w_{m-1} are linearly dependent")
    f = f_table_from_kappas(spec.jets(spec.t0, m - 1))
    gram_w = W @ g @ W.T
    gram_f = f.T @ f
    scale = max(np.abs(gram_w).max(), 1e-300)
    resid = np.abs(gram_w - gram_f) / scale
    i, j = np.unravel_index(np.argmax(resid), resid.shape)
    if resid[i, j] > tol:
        raise IncompatibleDataError(
            f"g(w_{i + 1}, w_{j + 1}) differs from the curvature data by "
            f"{resid[i, j] * scale:.3g}", worst=(i + 1, j + 1), residual=float(resid[i, j] * scale))
    frame, coframe = frenet_frame(chart, W, x0)
    comps = coframe @ W.T  # comps[h, j] = omega^h(w_j)
    cres = np.abs(comps - f) / np.sqrt(scale)
    if cres.max() > np.sqrt(tol):
        i, j = np.unravel_index(np.argmax(cres), cres.shape)
        raise IncompatibleDataError(
            "w_m has the wrong orientation for the sign of kappa_{m-1}",
            worst=(int(i) + 1, int(j) + 1), residual=float(np.abs(comps - f).max()))
    return frame
