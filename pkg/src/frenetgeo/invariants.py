"""Differential invariants of curves: total derivative, prolongation, ranks.

Jet functions are evaluated on :class:`CurveJet` objects.  The total
derivative ``D_t`` and its powers are realised as t-derivatives of the
function along the Taylor polynomial of the jet: if ``p`` is that polynomial
then ``(D_t^j f)(j^{r+j} p) = d^j/ds^j f(j^r_{t0+s} p)`` at ``s = 0``, which
is the formal operator ``d/dt + sum x_{k+1} d/dx_k`` applied ``j`` times.
"""

from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from . import _numerics as nm
from .curves import (CurveJet, RANK_TOL, covariant_chain, curvatures, frenet,
                     frenet_frame, gram_determinants, is_frenet_jet, numerical_rank)
from .errors import GeometryError, InsufficientJetError, NotFrenetError
from .geometry import riemann

__all__ = [
    "JetFunction",
    "ProlongedField",
    "shifted_jet",
    "total_derivative",
    "total_derivatives",
    "prolong",
    "distribution_matrix",
    "distribution_rank",
    "random_jet",
    "RankEstimate",
    "n_r",
    "CountsTable",
    "stability_and_counts",
    "k_from_n",
    "invariance_check",
    "jet_jacobian",
    "kappa_function",
    "time_function",
    "coordinate_function",
    "surface_invariants",
    "surface_invariant_functions",
    "homogeneous3_invariants",
    "homogeneous3_functions",
    "maurer_cartan_invariants",
    "euclidean_rank",
]

DT_STEP = 2e-2
DT_ACCURACY = 8


@dataclass(frozen=True)
class JetFunction:
    """A real function on ``J^r(R, M)``.

    Parameters
    ----------
    order : int
        Highest jet order read by ``func``.
    func : callable
        ``CurveJet -> float``; receives a jet truncated to ``order``.
    label : str
    """

    order: int
    func: callable
    label: str = "f"

    def __call__(self, jet):
        if jet.r < self.order:
            raise InsufficientJetError(f"{self.label} needs a jet of order {self.order}")
        return float(self.func(jet.truncate(self.order)))


def shifted_jet(jet, s, order):
    """Order-``order`` jet of the Taylor polynomial of ``jet`` at ``t0 + s``."""
    return CurveJet(jet.t0 + s, _taylor_shift(jet.coords, s, order), jet.chart_label)


def _taylor_shift(c, s, order):
    # coords of p at t0 + s: sum_l c[l] s^(l-k) / (l-k)!
    r = c.shape[0] - 1
    out = np.zeros((order + 1, c.shape[1]))
    for k in range(min(order, r) + 1):
        for l in range(k, r + 1):
            out[k] += c[l] * s ** (l - k) / factorial(l - k)
    return out


def total_derivatives(f, jet, n, step=DT_STEP, accuracy=DT_ACCURACY):
    """``(D_t^j f)(jet)`` for ``j = 0..n``.

    Parameters
    ----------
    f : JetFunction
    jet : CurveJet
        Order at least ``f.order + n``.
    n : int
    step, accuracy
        Finite-difference parameters of the s-derivatives (the step is
        divided by the jet's time scale).

    Returns
    -------
    ndarray, shape (n + 1,)
    """
    need = f.order + n
    if jet.r < need:
        raise InsufficientJetError(f"D_t^{n} {f.label} needs a jet of order {need}")
    c = jet.coords[: need + 1]

    def along(ss):
        return np.array([f.func(CurveJet(jet.t0 + s, _taylor_shift(c, s, f.order),
                                         jet.chart_label)) for s in ss])

    h = step / jet.time_scale()
    return nm.univariate_derivatives(along, 0.0, n, step=h, accuracy=accuracy)


def total_derivative(f, times=1):
    """The jet function ``D_t^times f`` (order raised by ``times``)."""

    def func(jet):
        return total_derivatives(f, jet, times)[times]

    return JetFunction(f.order + times, func, f"D_t^{times}({f.label})" if times > 1
                       else f"D_t({f.label})")


@dataclass
class ProlongedField:
    """Prolongation ``X^(r)`` of a vector field to ``J^r(R, M)``.

    Attributes
    ----------
    base : VectorField
    order : int
    """

    base: object
    order: int
    radius: float = 0.1

    def __call__(self, jet):
        """Components ``(D_t)^j f^i`` as an array ``(order + 1, m)``."""
        r = self.order
        if jet.r < r:
            raise InsufficientJetError(f"prolongation of order {r} needs an order-{r} jet")
        coords = jet.coords[: r + 1]
        poly = nm.jet_polynomial(coords, 0.0)
        ts = max(jet.time_scale(), 1.0)
        if self.base.holomorphic:
            vals = nm.univariate_derivatives(lambda s: self.base(poly(s)), 0.0, r,
                                             holomorphic=True, radius=self.radius / ts)
        else:
            vals = nm.univariate_derivatives(lambda s: self.base(poly(s)), 0.0, r,
                                             step=DT_STEP / ts, accuracy=DT_ACCURACY)
        return np.real(vals)

    def vector(self, jet):
        """Flattened components in the jet coordinates ``(t, x_0, ..., x_r)``."""
        return np.concatenate([[0.0], self(jet).ravel()])


def prolong(field_, r, radius=0.1):
    """Prolongation of order ``r`` of a vector field."""
    return ProlongedField(field_, int(r), radius)


def distribution_matrix(fields, jet, r):
    """Rows: prolonged fields at ``jet`` in coordinates ``(x_0, ..., x_r)``."""
    rows = [prolong(X, r)(jet).ravel() for X in fields]
    return np.array(rows) if rows else np.zeros((0, jet.m * (r + 1)))


def distribution_rank(fields, jet, r, tol=RANK_TOL):
    """Numerical rank of the prolonged distribution at a jet."""
    return numerical_rank(distribution_matrix(fields, jet, r), tol)


def _chain_independent(chart, jet, k, tol=RANK_TOL):
    # T, ..., nabla^{k-1} T independent (needs order k)
    chain = covariant_chain(chart, jet.truncate(k), k)
    L = np.linalg.cholesky(chart.g(jet.point))
    return numerical_rank(chain @ L, tol) == k


def random_jet(desc, r, rng, scale=1.0, max_tries=100, frenet_order=None):
    """Random jet for rank sampling.

    The base point is uniform in the preset's sample box and every derivative
    uniform in ``[-scale, scale]^m``.  Jets that are not immersive, or not
    Frenet up to ``frenet_order`` (default ``min(r, m - 1)``), are rejected.
    """
    m = desc.dim
    k = min(r, m - 1) if frenet_order is None else frenet_order
    for _ in range(max_tries):
        coords = np.vstack([desc.random_point(rng)[None],
                            rng.uniform(-scale, scale, size=(r, m))])
        jet = CurveJet(0.0, coords, desc.name)
        if r == 0:
            return jet
        if np.linalg.norm(coords[1]) < 1e-3:
            continue
        if k >= 1 and not _chain_independent(desc.chart, jet, k):
            continue
        return jet
    raise GeometryError("all sampled jets were degenerate")


@dataclass
class RankEstimate:
    """Modal rank of a prolonged distribution over random jets.

    Attributes
    ----------
    r : int
    rank : int
        Modal rank.
    n : int
        ``N_r = m (r + 1) + 1 - rank``.
    stability : float
        Fraction of samples attaining the modal rank.
    ranks : list of int
    """

    r: int
    rank: int
    n: int
    stability: float
    ranks: list = field(default_factory=list)


def _modal(ranks):
    vals, counts = np.unique(ranks, return_counts=True)
    i = int(np.argmax(counts))
    return int(vals[i]), float(counts[i] / len(ranks))


def n_r(desc, r, samples=100, seed=0, tol=RANK_TOL, fields=None):
    """Estimate ``rk D^r`` and ``N_r`` on a preset."""
    rng = np.random.default_rng(seed)
    fields = desc.killing if fields is None else fields
    ranks = [distribution_rank(fields, random_jet(desc, r, rng), r, tol)
             for _ in range(samples)]
    rank, stab = _modal(ranks)
    return RankEstimate(r, rank, desc.dim * (r + 1) + 1 - rank, stab, ranks)


def k_from_n(n_table):
    """``k_r = N_r - 1 - sum_{i<r} (r + 1 - i) k_i`` from a list ``N_0, N_1, ...``."""
    ks = []
    for r, n in enumerate(n_table):
        ks.append(int(n - 1 - sum((r + 1 - i) * ks[i] for i in range(r))))
    return ks


@dataclass
class CountsTable:
    """Output of :func:`stability_and_counts`.

    Attributes
    ----------
    rows : list of dict
        Keys ``r, rank, N_r, k_r, stability, flagged``.
    stable_bound_ok : bool or None
        ``N_r = (r + 1) m + 1 - dim i`` for all ``r >= m - 1`` in the table
        (None when the isometry dimension is unknown).
    k_sum : int or None
        ``sum_{i <= m} k_i`` when ``r_max >= m``.
    """

    rows: list
    stable_bound_ok: object
    k_sum: object
    isometry_dim: object = None

    def as_dict(self):
        return {"rows": self.rows, "stable_bound_ok": self.stable_bound_ok,
                "k_sum": self.k_sum, "isometry_dim": self.isometry_dim}


def stability_and_counts(desc, r_max, samples=100, seed=0, tol=RANK_TOL,
                         min_stability=0.95):
    """Table of ``rk D^r``, ``N_r`` and ``k_r`` for ``r = 0..r_max``.

    One random jet of order ``r_max`` per sample is drawn and projected to
    every lower order, so that all rows share the sample.  Rows whose modal
    rank is attained by fewer than ``min_stability`` of the samples are
    flagged.
    """
    rng = np.random.default_rng(seed)
    m = desc.dim
    jets = [random_jet(desc, r_max, rng) for _ in range(samples)]
    mats = [distribution_matrix(desc.killing, jet, r_max) for jet in jets]
    rows, n_tab = [], []
    for r in range(r_max + 1):
        ranks = [numerical_rank(M[:, : m * (r + 1)], tol) for M in mats]
        rank, stab = _modal(ranks)
        n = m * (r + 1) + 1 - rank
        n_tab.append(n)
        rows.append({"r": r, "rank": rank, "N_r": n, "stability": stab,
                     "flagged": stab < min_stability})
    for row, k in zip(rows, k_from_n(n_tab)):
        row["k_r"] = k
    dim_i = desc.constants.get("isometry_dim") if desc.constants.get(
        "killing_complete", False) else None
    ok = None
    if dim_i is not None and r_max >= m - 1:
        ok = all(rows[r]["N_r"] == (r + 1) * m + 1 - dim_i for r in range(m - 1, r_max + 1))
    k_sum = sum(row["k_r"] for row in rows[: m + 1]) if r_max >= m else None
    return CountsTable(rows, ok, k_sum, dim_i)


def euclidean_rank(m, r):
    """Closed-form ``rk D^r`` on Euclidean m-space."""
    if r >= m:
        return m + comb(m, 2)
    return m + (2 * m - r - 1) * r // 2


def invariance_check(f, fields, jets, step=1e-3, accuracy=8):
    """``max |X^(r)(f)|`` over fields and jets.

    The directional derivative of ``f`` along each prolonged field is taken by
    central differences along the straight line ``jet + e X^(r)(jet)`` in jet
    coordinates (first order agreement with the flow suffices for a
    derivative).
    """
    off, w = nm.fd_weights(1, accuracy)
    worst = 0.0
    for jet in jets:
        base = jet.truncate(f.order)
        for X in fields:
            v = prolong(X, f.order)(base)
            vals = [f(CurveJet(base.t0, base.coords + o * step * v, base.chart_label))
                    for o in off]
            worst = max(worst, abs(float(np.dot(w, vals)) / step))
    return worst


def jet_jacobian(functions, jet, step=1e-4, accuracy=6, include_t=False):
    """Jacobian of jet functions in the jet coordinates.

    Columns are ``(t, x_0, ..., x_r)`` if ``include_t`` else ``(x_0, ..., x_r)``
    with ``r = jet.r``; rows follow ``functions``.
    """
    off, w = nm.fd_weights(1, accuracy)
    flat = jet.coords.ravel()
    ncol = flat.size + (1 if include_t else 0)
    out = np.zeros((len(functions), ncol))
    for c in range(ncol):
        vals = []
        for o in off:
            if include_t and c == 0:
                j = CurveJet(jet.t0 + o * step, jet.coords, jet.chart_label)
            else:
                p = flat.copy()
                p[c - (1 if include_t else 0)] += o * step
                j = CurveJet(jet.t0, p.reshape(jet.coords.shape), jet.chart_label)
            vals.append([f(j) for f in functions])
        out[:, c] = np.dot(w, np.array(vals)) / step
    return out


# --- concrete jet functions ----------------------------------------------------

def time_function():
    """The invariant ``t``."""
    return JetFunction(0, lambda jet: jet.t0, "t")


def coordinate_function(i):
    """The (non-invariant) coordinate ``x^i`` (0-based)."""
    return JetFunction(0, lambda jet: jet.coords[0, i], f"x{i + 1}")


def kappa_function(chart, i):
    """``kappa_i`` as a jet function of order ``i + 1``."""
    m = chart.dim

    def func(jet):
        chain = covariant_chain(chart, jet, i + 1)
        d = gram_determinants(chart, chain, jet.point)
        if i < m - 1:
            return curvatures(d)[i]
        g = chart.g(jet.point)
        L = np.linalg.cholesky(g)
        eps = np.sign(chart.orientation * np.linalg.det(chain @ L))
        return curvatures(d, eps)[i]

    return JetFunction(i + 1, func, f"kappa{i}")


def _surface_frame(chart, jet):
    if chart.dim != 2:
        raise GeometryError("surface invariants need a 2-dimensional chart")
    T = jet.coords[1]
    if np.linalg.norm(T) < 1e-12:
        raise NotFrenetError("jet is not immersive", index=0)
    X, _ = frenet_frame(chart, T[None], jet.point)
    return X


def _lower_stack(g, stack):
    # stack[..., i, j, k, l] (upper l) -> R4-style [..., a, b, c, d] = g_al R[.., c, d, b, l]
    return np.einsum("al,...cdbl->...abcd", g, stack)


def surface_invariants(chart, jet):
    """``(I_1, I_2, I_3, I_4)`` of a 2-dimensional chart at an order-1 jet.

    ``I_1 = g(T, T)``, ``I_2 = dK(X_1)``, ``I_3 = dK(X_2)`` and
    ``I_4 = (nabla dK)(X_1, X_1)``, obtained by contracting ``nabla R_4`` and
    ``nabla^2 R_4`` with the Frenet frame.
    """
    x = jet.point
    T = jet.coords[1]
    X = _surface_frame(chart, jet)
    cv = riemann(chart, x, j_max=2)
    g = chart.g(x)
    n1 = _lower_stack(g, cv.nabla_r[1])
    n2 = _lower_stack(g, cv.nabla_r[2])
    X1, X2 = X[:, 0], X[:, 1]
    quad = (X1, X2, X1, X2)
    i1 = float(T @ g @ T)
    i2 = float(np.einsum("eabcd,e,a,b,c,d->", n1, X1, *quad))
    i3 = float(np.einsum("eabcd,e,a,b,c,d->", n1, X2, *quad))
    i4 = float(np.einsum("feabcd,f,e,a,b,c,d->", n2, X1, X1, *quad))
    return i1, i2, i3, i4


def surface_invariant_functions(chart, barred=True):
    """``I_1, I_2..I_4`` as jet functions; ``barred`` rescales by powers of
    ``sqrt(I_1)`` (``I_2 sqrt(I_1)``, ``I_3 sqrt(I_1)``, ``I_4 I_1``)."""

    def make(n):
        def func(jet):
            vals = surface_invariants(chart, jet)
            if not barred or n == 0:
                return vals[n]
            s = np.sqrt(vals[0])
            return vals[n] * (s if n < 3 else s * s)
        return JetFunction(1, func, ("Ibar" if barred and n else "I") + str(n + 1))

    return [make(n) for n in range(4)]


def _gkt_params(desc):
    if desc.name != "g_kappa_tau":
        raise GeometryError("homogeneous3 invariants need the g_kappa_tau preset")
    return float(desc.params.get("kappa", 1.0)), float(desc.params.get("tau", 1.0))


def homogeneous3_invariants(desc, jet):
    """``(t, kappa0_tilde, I_1, kappa_1)`` on the ``g_kappa_tau`` preset.

    ``I_1 = g(Z, T)`` with the unit Killing field ``Z = d/dz`` and
    ``kappa0_tilde = kappa_0^2 - I_1^2 = (x_1^2 + y_1^2) / lambda^2`` with
    ``lambda = 1 + kappa (x^2 + y^2) / 4``.  ``kappa_1`` needs an order-2 jet
    and is ``nan`` otherwise.
    """
    kap, tau = _gkt_params(desc)
    x, y, _ = jet.coords[0]
    xd, yd, zd = jet.coords[1]
    if np.linalg.norm(jet.coords[1]) < 1e-12:
        raise NotFrenetError("jet is not immersive", index=0)
    lam = 1.0 + 0.25 * kap * (x * x + y * y)
    i1 = zd + tau * (y * xd - x * yd) / lam
    k0t = (xd * xd + yd * yd) / lam**2
    k1 = kappa_function(desc.chart, 1)(jet) if jet.r >= 2 else float("nan")
    return jet.t0, k0t, i1, k1


def homogeneous3_functions(desc):
    """``kappa0_tilde`` and ``I_1`` as order-1 jet functions."""
    _gkt_params(desc)
    return (JetFunction(1, lambda j: homogeneous3_invariants(desc, j)[1], "kappa0_tilde"),
            JetFunction(1, lambda j: homogeneous3_invariants(desc, j)[2], "I1"))


def maurer_cartan_invariants(desc, jet):
    """``(omega_1(T), omega_2(T), omega_3(T))`` on the solvable-group preset.

    ``omega_1 = exp(-z) dx``, ``omega_2 = exp(z) dy``, ``omega_3 = dz``.
    """
    if desc.name != "solvable_group":
        raise GeometryError("Maurer-Cartan invariants need the solvable_group preset")
    z = jet.coords[0, 2]
    xd, yd, zd = jet.coords[1]
    return float(np.exp(-z) * xd), float(np.exp(z) * yd), float(zd)
