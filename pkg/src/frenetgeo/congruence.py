"""Congruence of Frenet curves under orientation-preserving isometries.

Two curves are compared through their curvature functions on a window around
``t0`` and through the components of ``nabla^j R`` in their Frenet frames at
``t0``.  The conditions are infinite in both directions, so every verdict is a
semi-decision at the chosen truncation: ``congruent`` means that all computed
residuals are below tolerance.
"""

from dataclasses import dataclass, field

import numpy as np

from .curves import CurveJet, frenet, gram_determinants, covariant_chain
from .errors import ClassMismatchError, GeometryError
from .geometry import exp_map, log_map, riemann

__all__ = [
    "InvariantTuple",
    "frame_invariants",
    "KappaResiduals",
    "kappa_jet_residuals",
    "CongruenceReport",
    "congruence_test",
    "constant_curvature_residual",
    "PolarMap",
    "polar_isometry",
    "GramMap",
    "gram_map",
    "KAPPA_TOL",
    "TENSOR_TOL",
]

KAPPA_TOL = 1e-6
TENSOR_TOL = 1e-5
DECISION_MARGIN = 10.0
WINDOW = 0.25
WINDOW_SAMPLES = 51
CRITERIA = ("general", "symmetric", "constant_curvature")


@dataclass
class InvariantTuple:
    """Frame components of ``nabla^j R``.

    Attributes
    ----------
    j : int
    values : ndarray, shape (m,) * (j + 4)
        ``values[i_1, ..., i_{j+3}, i] = (nabla^j R)(X_{i_1}, ..., X_{i_{j+3}}, omega^i)``
        with the derivative slots first and ``R(X_a, X_b) X_c`` in the next
        three.
    """

    j: int
    values: np.ndarray


def _frame_components(stack, frame, coframe):
    n_lower = stack.ndim - 1
    out = stack
    for _ in range(n_lower):
        # contract the first axis with the frame; it moves to the end
        out = np.tensordot(out, frame, axes=([0], [0]))
    # axes now: upper, i_1..i_n; move upper last and contract with coframe
    out = np.moveaxis(out, 0, -1)
    return np.tensordot(out, coframe, axes=([-1], [1]))


def frame_invariants(chart, jet, j_max=2, frenet_result=None):
    """Components of ``nabla^j R``, ``j = 0..j_max``, in the Frenet frame.

    Parameters
    ----------
    chart : MetricChart
    jet : CurveJet
        Order at least ``m``.
    j_max : int
    frenet_result : FrenetResult, optional
        Reused if already available.

    Returns
    -------
    list of InvariantTuple
    """
    fr = frenet(chart, jet) if frenet_result is None else frenet_result
    cv = riemann(chart, jet.point, j_max=j_max)
    return [InvariantTuple(j, _frame_components(cv.nabla_r[j], fr.frame, fr.coframe))
            for j in range(j_max + 1)]


@dataclass
class KappaResiduals:
    """Curvatures of two curves on a common window.

    Attributes
    ----------
    t : ndarray
    kappas_a, kappas_b : ndarray, shape (len(t), m)
    sup : ndarray, shape (m,)
        ``max_t |kappa_i^a - kappa_i^b|``.
    """

    t: np.ndarray
    kappas_a: np.ndarray
    kappas_b: np.ndarray
    sup: np.ndarray


def _kappas_on(chart, curve, ts):
    m = chart.dim
    return np.array([frenet(chart, curve.jet(t, m)).kappas for t in ts])


def kappa_jet_residuals(chart_a, curve_a, chart_b, curve_b, t0, window=WINDOW,
                        samples=WINDOW_SAMPLES):
    """Sup differences of ``kappa_i`` on ``|t - t0| <= window``.

    Parameters
    ----------
    chart_a, chart_b : MetricChart
    curve_a, curve_b : CurveProvider
    t0 : float
    window : float
    samples : int

    Returns
    -------
    KappaResiduals
    """
    if chart_a.dim != chart_b.dim:
        raise GeometryError("curves live in manifolds of different dimension")
    ts = np.linspace(t0 - window, t0 + window, samples) if samples > 1 else np.array([t0])
    ka = _kappas_on(chart_a, curve_a, ts)
    kb = _kappas_on(chart_b, curve_b, ts)
    return KappaResiduals(ts, ka, kb, np.abs(ka - kb).max(axis=0))


def constant_curvature_residual(chart, x, k=None):
    """Residual of ``R(X,Y)Z = k (g(Y,Z) X - g(X,Z) Y)`` at ``x``.

    ``k`` defaults to the sectional curvature of the first coordinate plane.

    Returns
    -------
    residual : float
        Max-abs entry of ``R - k (g \\wedge g)`` in lowered form.
    k : float
    """
    cv = riemann(chart, x, j_max=0)
    g = chart.g(np.asarray(x, float))
    # r4[a,b,c,d] = g(R(d_c, d_d) d_b, d_a) = k (g_ac g_bd - g_ad g_bc)
    model = np.einsum("ac,bd->abcd", g, g) - np.einsum("ad,bc->abcd", g, g)
    if k is None:
        k = cv.r4[0, 1, 0, 1] / model[0, 1, 0, 1]
    return float(np.abs(cv.r4 - k * model).max()), float(k)


def _class_check(criterion, charts_points, tol):
    if criterion == "symmetric":
        for chart, x in charts_points:
            cv = riemann(chart, x, j_max=1)
            scale = max(1.0, float(np.abs(cv.r).max()))
            if np.abs(cv.nabla_r[1]).max() > tol * scale:
                raise ClassMismatchError(
                    f"'{chart.label}' is not locally symmetric at {np.round(x, 6).tolist()} "
                    f"(|nabla R| = {np.abs(cv.nabla_r[1]).max():.3g})")
    elif criterion == "constant_curvature":
        ks = []
        for chart, x in charts_points:
            res, k = constant_curvature_residual(chart, x)
            if res > tol * max(1.0, abs(k)):
                raise ClassMismatchError(
                    f"'{chart.label}' does not have constant curvature (residual {res:.3g})")
            ks.append(k)
        if abs(ks[0] - ks[1]) > tol * max(1.0, abs(ks[0])):
            raise ClassMismatchError(
                f"constant curvatures differ: {ks[0]:.6g} vs {ks[1]:.6g}")


@dataclass
class CongruenceReport:
    """Outcome of :func:`congruence_test`.

    Attributes
    ----------
    verdict : str
        ``congruent``, ``not_congruent`` or ``inconclusive``.
    criterion : str
    j_max : int
    kappa_residuals : list of float
        Sup difference of ``kappa_i`` on the window, per ``i``.
    tensor_residuals : dict
        ``j -> {"max": float, "index": list}`` for the frame components of
        ``nabla^j R``.
    isometry_check : float or None
        Polar-map transport error on the window, if requested.
    analyticity_caveat : bool
        True when the inputs are not known to be analytic (the criteria then
        lose their theoretical backing).
    tolerances : dict
    """

    verdict: str
    criterion: str
    j_max: int
    kappa_residuals: list
    tensor_residuals: dict
    isometry_check: object = None
    analyticity_caveat: bool = False
    tolerances: dict = field(default_factory=dict)
    window: float = WINDOW

    def as_dict(self):
        return {
            "verdict": self.verdict,
            "criterion": self.criterion,
            "j_max": self.j_max,
            "window": self.window,
            "tolerances": dict(self.tolerances),
            "kappa_residuals": [float(v) for v in self.kappa_residuals],
            "tensor_residuals": {str(j): v for j, v in self.tensor_residuals.items()},
            "isometry_check": self.isometry_check,
            "analyticity_caveat": self.analyticity_caveat,
        }


def _verdict(pairs):
    if all(v <= tol for v, tol in pairs):
        return "congruent"
    if any(v > DECISION_MARGIN * tol for v, tol in pairs):
        return "not_congruent"
    return "inconclusive"


def _is_analytic(chart, curve):
    return bool(chart.holomorphic and curve.is_analytic())


def congruence_test(chart_a, curve_a, chart_b, curve_b, t0=0.0, criterion="general",
                    j_max=2, kappa_tol=KAPPA_TOL, tensor_tol=TENSOR_TOL, window=WINDOW,
                    samples=WINDOW_SAMPLES, transport=False, t0_b=None):
    """Decide congruence of two Frenet curves near ``t0``.

    Parameters
    ----------
    chart_a, chart_b : MetricChart
    curve_a, curve_b : CurveProvider
    t0 : float
        Matching parameter value (``t0_b`` for the second curve if given).
    criterion : {"general", "symmetric", "constant_curvature"}
        ``constant_curvature`` compares curvatures only; ``symmetric`` adds
        the frame components of ``R``; ``general`` adds those of
        ``nabla^j R`` for ``j <= j_max``.  The class claimed by the first two
        is spot-checked at the base points.
    j_max : int
    kappa_tol, tensor_tol : float
    window, samples
        Curvature comparison window ``|t - t0| <= window``.
    transport : bool
        Also evaluate the polar-map transport error on the window.

    Returns
    -------
    CongruenceReport

    Raises
    ------
    ClassMismatchError
        The asserted class fails its spot check.
    NotFrenetError
        A curve is not Frenet at a sample.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}")
    t0_b = t0 if t0_b is None else t0_b
    m = chart_a.dim
    jet_a = curve_a.jet(t0, m)
    jet_b = curve_b.jet(t0_b, m)
    if criterion != "general":
        _class_check(criterion, [(chart_a, jet_a.point), (chart_b, jet_b.point)], tensor_tol)
    ts = np.linspace(-window, window, samples) if samples > 1 else np.zeros(1)
    ka = _kappas_on(chart_a, curve_a, t0 + ts)
    kb = _kappas_on(chart_b, curve_b, t0_b + ts)
    kres = np.abs(ka - kb).max(axis=0)
    pairs = [(float(v), kappa_tol) for v in kres]
    tensors = {}
    jt = {"general": j_max, "symmetric": 0}.get(criterion)
    fa = fb = None
    if jt is not None:
        fa = frenet(chart_a, jet_a)
        fb = frenet(chart_b, jet_b)
        ia = frame_invariants(chart_a, jet_a, jt, fa)
        ib = frame_invariants(chart_b, jet_b, jt, fb)
        for a, b in zip(ia, ib):
            diff = np.abs(a.values - b.values)
            idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
            tensors[a.j] = {"max": float(diff.max()), "index": [int(i) for i in idx]}
            pairs.append((float(diff.max()), tensor_tol))
    iso = None
    if transport:
        fa = fa or frenet(chart_a, jet_a)
        fb = fb or frenet(chart_b, jet_b)
        pm = polar_isometry(chart_a, jet_a.point, fa.frame, chart_b, jet_b.point, fb.frame)
        iso = pm.verify(curve_a, curve_b, t0, window, t0_b=t0_b)
    caveat = not (_is_analytic(chart_a, curve_a) and _is_analytic(chart_b, curve_b))
    return CongruenceReport(
        verdict=_verdict(pairs), criterion=criterion,
        j_max=jt if jt is not None else -1,
        kappa_residuals=[float(v) for v in kres], tensor_residuals=tensors,
        isometry_check=iso, analyticity_caveat=caveat,
        tolerances={"kappa": kappa_tol, "tensor": tensor_tol,
                    "margin": DECISION_MARGIN}, window=window)


@dataclass
class PolarMap:
    """The map ``exp_{x_b} o A o exp_{x_a}^{-1}``.

    Attributes
    ----------
    A : ndarray
        Linear isometry ``T_{x_a} M -> T_{x_b} M`` with ``A X_i^a = X_i^b``.
    """

    chart_a: object
    x_a: np.ndarray
    chart_b: object
    x_b: np.ndarray
    A: np.ndarray

    def __call__(self, y):
        v = log_map(self.chart_a, self.x_a, np.asarray(y, dtype=float))
        return exp_map(self.chart_b, self.x_b, v @ self.A.T)

    def verify(self, curve_a, curve_b, t0, window, samples=11, t0_b=None):
        """``max_t |phi(sigma_a(t)) - sigma_b(t)|`` (chart distance)."""
        t0_b = t0 if t0_b is None else t0_b
        ts = np.linspace(-window, window, samples)
        ya = curve_a(t0 + ts)
        yb = curve_b(t0_b + ts)
        return float(np.linalg.norm(self(ya) - yb, axis=-1).max())


def polar_isometry(chart_a, x_a, frame_a, chart_b, x_b, frame_b):
    """Polar map carrying ``frame_a`` at ``x_a`` to ``frame_b`` at ``x_b``."""
    frame_a = np.asarray(frame_a, dtype=float)
    frame_b = np.asarray(frame_b, dtype=float)
    A = frame_b @ np.linalg.inv(frame_a)
    return PolarMap(chart_a, np.asarray(x_a, float), chart_b, np.asarray(x_b, float), A)


@dataclass
class GramMap:
    """Gram matrix of ``T, ..., nabla^{r-1} T`` and its place in ``Q^r``.

    Attributes
    ----------
    matrix : ndarray, shape (r, r)
    classification : str
        ``interior`` (positive definite), ``boundary`` (positive semidefinite
        and singular) or ``outside`` (a clearly negative direction).
    eigenvalues : ndarray
    minors : ndarray
        Leading principal minors (the Gram determinants).
    """

    matrix: np.ndarray
    classification: str
    eigenvalues: np.ndarray
    minors: np.ndarray


def gram_map(chart, jet, r, tol=1e-10):
    """Gram matrix of the covariant chain and its ``Q^r`` classification.

    ``tol`` is relative to the largest eigenvalue.
    """
    if r > chart.dim:
        raise GeometryError("gram_map needs r <= m")
    if jet.r < r:
        jet = CurveJet(jet.t0, np.vstack([jet.coords, np.zeros((r - jet.r, jet.m))]),
                       jet.chart_label)
    chain = covariant_chain(chart, jet, r)
    G = chain @ chart.g(jet.point) @ chain.T
    G = 0.5 * (G + G.T)
    ev = np.linalg.eigvalsh(G)
    scale = max(float(np.abs(ev).max()), 1e-300)
    if ev[0] > tol * scale:
        cls = "interior"
    elif ev[0] >= -tol * scale:
        cls = "boundary"
    else:
        cls = "outside"
    return GramMap(G, cls, ev, gram_determinants(chart, chain, jet.point))
