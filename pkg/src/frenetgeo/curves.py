"""Quantities evaluated along a curve or at a jet.

A jet ``j^r_{t0} sigma`` is stored as the array ``coords[k, i]`` of k-th
t-derivatives of the chart coordinates.  The covariant chain ``nabla^k T`` is
computed from the truncated Taylor expansion of the Christoffel symbols along
the jet's Taylor polynomial, which realises the total derivative exactly on
polynomial data.
"""

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from . import _numerics as nm
from .errors import InsufficientJetError, NotFrenetError
from .geometry import log_map, orthonormal_frame

__all__ = [
    "CurveJet",
    "CurveProvider",
    "FrenetResult",
    "covariant_chain",
    "gram_determinants",
    "curvatures",
    "frenet_frame",
    "frenet",
    "f_table_from_kappas",
    "is_frenet_jet",
    "is_normal_position_jet",
    "normal_vectors",
    "numerical_rank",
    "RANK_TOL",
]

RANK_TOL = 1e-8


@dataclass
class CurveJet:
    """A point of the jet space ``J^r(R, M)``.

    Attributes
    ----------
    t0 : float
    coords : ndarray, shape (r + 1, m)
        ``coords[k]`` is the k-th derivative of the chart coordinates.
    chart_label : str
    """

    t0: float
    coords: np.ndarray
    chart_label: str = "custom"

    def __post_init__(self):
        self.coords = np.atleast_2d(np.asarray(self.coords, dtype=float))
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("jet coordinates must be finite")

    @property
    def r(self):
        return self.coords.shape[0] - 1

    @property
    def m(self):
        return self.coords.shape[1]

    @property
    def point(self):
        return self.coords[0]

    def truncate(self, r):
        """Projection to the order-``r`` jet."""
        if r > self.r:
            raise InsufficientJetError(f"jet of order {self.r} cannot give order {r}")
        return CurveJet(self.t0, self.coords[: r + 1].copy(), self.chart_label)

    def polynomial(self):
        """Taylor polynomial ``t -> points`` (accepts complex times)."""
        return nm.jet_polynomial(self.coords, self.t0)

    def time_scale(self):
        """Characteristic inverse time ``max_k |x_k|^(1/k)``, at least 1."""
        s = 1.0
        for k in range(1, self.r + 1):
            s = max(s, float(np.max(np.abs(self.coords[k]))) ** (1.0 / k))
        return s


def _eval_many(func, ts):
    ts = np.asarray(ts)
    try:
        out = np.asarray(func(ts))
        if out.shape[:1] == ts.shape[:1] and out.ndim == 2:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([np.asarray(func(t)) for t in ts])


@dataclass
class CurveProvider:
    """A parametrised curve in chart coordinates.

    Parameters
    ----------
    eval : callable
        ``t -> point``; vectorised calls ``(N,) -> (N, m)`` are used when
        supported.
    derivatives : callable, optional
        ``(t, order) -> ndarray (order + 1, m)`` of exact derivatives.
    h_c : float
        Step of the finite-difference fallback (8th-order central stencils,
        widened by a factor 1.75 per derivative order).
    holomorphic : bool
        ``eval`` accepts complex times; derivatives then come from a contour
        integral instead of finite differences.
    radius : float
        Contour radius for the holomorphic route.
    label : str
    analytic : bool, optional
        Whether the curve is known to be real analytic; inferred from
        ``derivatives`` or ``holomorphic`` when None.
    """

    eval: callable
    derivatives: callable = None
    h_c: float = 1e-2
    holomorphic: bool = False
    radius: float = 0.2
    label: str = "curve"
    analytic: bool = None

    def is_analytic(self):
        if self.analytic is not None:
            return bool(self.analytic)
        return self.derivatives is not None or self.holomorphic

    def __call__(self, t):
        return _eval_many(self.eval, np.atleast_1d(t))

    def jet(self, t, order, chart_label="custom"):
        """Order-``order`` jet at ``t``."""
        if self.derivatives is not None:
            coords = np.asarray(self.derivatives(t, order), dtype=float)
        else:
            coords = nm.univariate_derivatives(
                lambda s: _eval_many(self.eval, s), t, order,
                holomorphic=self.holomorphic, radius=self.radius, step=self.h_c)
        return CurveJet(float(t), coords[: order + 1], chart_label)


def _christoffel_along(chart, jet, order):
    """Derivatives of Gamma(sigma(t)) at t0, shape (order + 1, m, m, m)."""
    poly = jet.polynomial()
    scale = jet.time_scale()
    return nm.univariate_derivatives(
        lambda t: chart.gamma(poly(t)), jet.t0, order,
        holomorphic=chart.holomorphic, radius=0.1 / scale, step=2e-2 / scale)


def covariant_chain(chart, jet, n=None):
    """Iterated covariant derivatives ``nabla^k T`` at ``sigma(t0)``.

    Parameters
    ----------
    chart : MetricChart
    jet : CurveJet
    n : int, optional
        Chain length (``k = 0..n-1``); defaults to ``jet.r``.

    Returns
    -------
    ndarray, shape (n, m)
        Row ``k`` holds the chart components of ``nabla^k T``.
    """
    n = jet.r if n is None else n
    if n < 1 or jet.r < n:
        raise InsufficientJetError(f"chain of length {n} needs a jet of order >= {n}")
    chart.require_inside(jet.point, 0.0)
    m = jet.m
    fact = np.array([factorial(k) for k in range(n)], dtype=float)
    xdot = (jet.coords[1: n + 1] / fact[:, None]).T  # (m, n) series of x'
    out = np.zeros((n, m))
    out[0] = xdot[:, 0]
    if n == 1:
        return out
    gam = nm.series_from_derivatives(_christoffel_along(chart, jet, n - 2))
    V = xdot
    for k in range(1, n):
        dv = nm.series_derivative(V)
        V = dv + nm.series_product("ijk,j,k->i", gam, xdot, V)[:, : dv.shape[1]]
        out[k] = V[:, 0]
    return out


def gram_determinants(chart, chain, point):
    """Gram determinants ``Delta_k`` of the chain, ``k = 1..len(chain)``.

    Parameters
    ----------
    chart : MetricChart
    chain : ndarray, shape (n, m)
    point : array_like
        Base point ``sigma(t0)``.

    Returns
    -------
    ndarray, shape (n,)
    """
    chain = np.atleast_2d(chain)
    gram = chain @ chart.g(np.asarray(point, float)) @ chain.T
    return np.array([np.linalg.det(gram[:k, :k]) for k in range(1, chain.shape[0] + 1)])


def curvatures(deltas, orientation_sign=None):
    """Curvatures from Gram determinants.

    Parameters
    ----------
    deltas : array_like
        ``Delta_1..Delta_n``.
    orientation_sign : {+1, -1, 0, None}
        ``None`` for a partial chain (all ``Delta_k`` must be positive).
        Otherwise ``n = m`` and the last curvature carries this sign; its
        determinant may vanish.

    Returns
    -------
    ndarray
        ``kappa_0..kappa_{n-1}``.

    Raises
    ------
    NotFrenetError
        Some ``Delta_k <= 0`` with ``k <= m - 1``.
    """
    d = np.asarray(deltas, dtype=float)
    n = d.size
    strict = n if orientation_sign is None else n - 1
    for k in range(strict):
        if not d[k] > 0:
            raise NotFrenetError(f"Delta_{k + 1} = {d[k]:.3g} is not positive", index=k)
    d = d.copy()
    d[-1] = max(d[-1], 0.0)
    full = np.concatenate([[1.0], d])  # full[k] = Delta_k, Delta_0 = 1
    kap = np.empty(n)
    kap[0] = np.sqrt(d[0])
    for i in range(1, n):
        kap[i] = np.sqrt(full[i - 1] * full[i + 1]) / (np.sqrt(full[1]) * full[i])
    if orientation_sign is not None:
        kap[-1] *= orientation_sign
    return kap


def numerical_rank(matrix, tol=RANK_TOL):
    """Rank by the singular-value ratio test ``sigma_i > tol * sigma_max``."""
    matrix = np.atleast_2d(matrix)
    if matrix.size == 0:
        return 0
    s = np.linalg.svd(matrix, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def _orthonormal_components(g, vectors):
    L = np.linalg.cholesky(g)
    return np.atleast_2d(vectors) @ L


def _first_dependent(g, vectors, tol=RANK_TOL):
    comps = _orthonormal_components(g, vectors)
    for k in range(1, comps.shape[0] + 1):
        if numerical_rank(comps[:k], tol) < k:
            return k - 1
    return None


def frenet_frame(chart, chain, point, orientation=None):
    """Positively oriented orthonormal frame adapted to the chain.

    Parameters
    ----------
    chart : MetricChart
    chain : ndarray, shape (n, m)
        At least ``m - 1`` leading chain vectors.
    point : array_like
    orientation : int, optional
        Defaults to the chart orientation.

    Returns
    -------
    frame : ndarray, shape (m, m)
        Columns ``X_1..X_m``.
    coframe : ndarray, shape (m, m)
        Rows ``omega^1..omega^m`` with ``omega^i(X_j) = delta_ij``.
    """
    g = chart.g(np.asarray(point, float))
    m = g.shape[0]
    orientation = chart.orientation if orientation is None else orientation
    chain = np.atleast_2d(chain)[: m - 1]
    if chain.shape[0] < m - 1:
        raise InsufficientJetError("frame needs m - 1 chain vectors")
    bad = _first_dependent(g, chain)
    if bad is not None:
        raise NotFrenetError(f"nabla^{bad} T depends on the lower chain", index=bad)
    X = np.zeros((m, m))
    for k in range(m - 1):
        v = chain[k].copy()
        for _ in range(2):  # re-orthogonalise once for stability
            for j in range(k):
                v -= (X[:, j] @ g @ v) * X[:, j]
        X[:, k] = v / np.sqrt(v @ g @ v)
    # last vector: g-orthogonal complement of the first m - 1
    _, _, vt = np.linalg.svd((g @ X[:, : m - 1]).T)
    v = vt[-1]
    v /= np.sqrt(v @ g @ v)
    if orientation * np.linalg.det(np.column_stack([X[:, : m - 1], v])) < 0:
        v = -v
    X[:, m - 1] = v
    return X, np.linalg.inv(X)


@dataclass
class FrenetResult:
    """Frenet apparatus of a curve at one parameter value.

    Attributes
    ----------
    point : ndarray
    chain : ndarray, shape (m, m)
        Rows ``nabla^k T``, ``k = 0..m-1``.
    deltas : ndarray
        ``Delta_1..Delta_m``.
    kappas : ndarray
        ``kappa_0..kappa_{m-1}``; the last carries the orientation sign.
    frame, coframe : ndarray
        Columns ``X_i`` and rows ``omega^i``.
    f : ndarray
        Upper-triangular ``f[i-1, j-1] = g(nabla^{j-1} T, X_i)``.
    epsilon : int
        Sign of the oriented volume of the chain (0 if degenerate).
    degenerate : bool
        True when ``Delta_m`` vanishes numerically (``kappa_{m-1} = 0``).
    """

    point: np.ndarray
    chain: np.ndarray
    deltas: np.ndarray
    kappas: np.ndarray
    frame: np.ndarray
    coframe: np.ndarray
    f: np.ndarray
    epsilon: int
    degenerate: bool = False
    metric: np.ndarray = field(default=None, repr=False)


def frenet(chart, jet):
    """Full Frenet apparatus from an order-``m`` (or higher) jet."""
    m = jet.m
    if jet.r < m:
        raise InsufficientJetError(f"Frenet apparatus needs a jet of order >= {m}")
    chain = covariant_chain(chart, jet, m)
    g = chart.g(jet.point)
    deltas = gram_determinants(chart, chain, jet.point)
    comps = _orthonormal_components(g, chain)
    degenerate = numerical_rank(comps) < m
    eps = 0 if degenerate else int(np.sign(chart.orientation * np.linalg.det(chain)))
    bad = _first_dependent(g, chain[: m - 1])
    if bad is not None:
        raise NotFrenetError(f"nabla^{bad} T depends on the lower chain", index=bad)
    kappas = curvatures(deltas, eps)
    frame, coframe = frenet_frame(chart, chain, jet.point)
    f = np.triu(frame.T @ g @ chain.T)
    return FrenetResult(jet.point.copy(), chain, deltas, kappas, frame, coframe,
                        f, eps, degenerate, g)


def _smul(a, b):
    n = min(len(a), len(b))
    return np.convolve(a[:n], b[:n])[:n]


def f_table_from_kappas(kappa_jets):
    """The table ``f_ij`` determined by curvature jets alone.

    Parameters
    ----------
    kappa_jets : array_like, shape (m, L)
        ``kappa_jets[j, n]`` is the n-th t-derivative of ``kappa_j`` at t0;
        ``L >= m`` derivatives (orders ``0..m-1``) are required.

    Returns
    -------
    ndarray, shape (m, m)
        Upper triangular; ``out[i-1, j-1] = f_ij``.
    """
    kj = np.atleast_2d(np.asarray(kappa_jets, dtype=float))
    m, L = kj.shape
    if L < m:
        raise InsufficientJetError(f"need {m} derivative orders of each kappa, got {L}")
    ks = [nm.series_from_derivatives(kj[j]) for j in range(m)]
    F = {(1, 1): ks[0]}
    for j in range(2, m + 1):
        for i in range(1, j + 1):
            term = None
            if i <= j - 1:
                term = nm.series_derivative(F[i, j - 1])
            if i + 1 <= j - 1:
                t2 = -_smul(_smul(F[i + 1, j - 1], ks[0]), ks[i])
                term = t2 if term is None else _smul_add(term, t2)
            if i - 1 >= 1:
                t3 = _smul(_smul(F[i - 1, j - 1], ks[0]), ks[i - 1])
                term = t3 if term is None else _smul_add(term, t3)
            F[i, j] = term
    out = np.zeros((m, m))
    for (i, j), ser in F.items():
        out[i - 1, j - 1] = ser[0]
    return out


def _smul_add(a, b):
    n = min(len(a), len(b))
    return a[:n] + b[:n]


def is_frenet_jet(chart, jet, tol=RANK_TOL):
    """True if ``T, nabla T, ..., nabla^{m-2} T`` are linearly independent."""
    m = jet.m
    if jet.r < m - 1:
        raise InsufficientJetError(f"needs a jet of order >= {m - 1}")
    chain = covariant_chain(chart, jet, m - 1)
    comps = _orthonormal_components(chart.g(jet.point), chain)
    return numerical_rank(comps, tol) == m - 1


NORMAL_STEP = 0.025
NORMAL_ACCURACY = 8


def normal_vectors(chart, jets, k_max, step=NORMAL_STEP, accuracy=NORMAL_ACCURACY,
                   tol=1e-14):
    """Derivatives ``U^{sigma,k}`` in normal coordinates centred at each jet.

    Each jet's Taylor polynomial is mapped into the normal coordinates
    attached to a Cholesky orthonormal frame at its base point, and
    differentiated in t by central differences.  All jets are processed as a
    single batch of log-map problems.

    Parameters
    ----------
    chart : MetricChart
    jets : CurveJet or list of CurveJet
    k_max : int
        Highest order ``k``; jets need order ``>= k_max``.
    step, accuracy : float, int
        Base step (divided by the jet's time scale) and stencil accuracy.
    tol : float
        Log-map tolerance.

    Returns
    -------
    normal : ndarray, shape (N, k_max, m)
        Components of ``U^{sigma,k}`` in the orthonormal frame.
    chart_comps : ndarray, shape (N, k_max, m)
        The same vectors in chart components.
    """
    single = isinstance(jets, CurveJet)
    jets = [jets] if single else list(jets)
    m = jets[0].m
    for jet in jets:
        if jet.r < k_max:
            raise InsufficientJetError(f"U^k up to k={k_max} needs jets of order >= {k_max}")
    plans = []
    for k in range(1, k_max + 1):
        off, w = nm.fd_weights(k, accuracy)
        keep = w != 0
        plans.append((k, off[keep], w[keep]))
    pts, x0s, frames, meta = [], [], [], []
    for n, jet in enumerate(jets):
        h = step / jet.time_scale()
        poly = jet.polynomial()
        E = orthonormal_frame(chart.g(jet.point), chart.orientation)
        frames.append(E)
        for k, off, w in plans:
            ts = jet.t0 + off * h
            meta.append((n, k, len(pts), off.size, w / h**k))
            pts.extend(poly(ts))
            x0s.extend([jet.point] * off.size)
    pts = np.asarray(pts)
    x0s = np.asarray(x0s)
    v = log_map(chart, x0s, pts, tol=tol)
    normal = np.zeros((len(jets), k_max, m))
    chart_comps = np.zeros_like(normal)
    for n, k, start, cnt, wk in meta:
        vk = wk @ v[start:start + cnt]
        E = frames[n]
        chart_comps[n, k - 1] = vk
        normal[n, k - 1] = np.linalg.solve(E, vk)
    if single:
        return normal[0], chart_comps[0]
    return normal, chart_comps


def is_normal_position_jet(chart, jet, tol=RANK_TOL):
    """True if ``U^{sigma,1..m-1}`` are linearly independent (class N)."""
    m = jet.m
    normal, _ = normal_vectors(chart, jet, m - 1)
    return numerical_rank(normal, tol) == m - 1
