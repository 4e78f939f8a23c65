"""Finite-difference stencils, Taylor coefficients and truncated series.

Everything downstream needs derivatives of smooth maps at modest order
(up to about six).  Two routes are provided:

* central finite differences with high-order stencils, for any real
  callable;
* the Cauchy integral on a small circle in the complex plane, for callables
  that accept complex input (analytic data).  This keeps round-off flat in
  the derivative order, which matters for jets of order four and above.

Series are stored with the coefficient index on the *last* axis and use the
normalised convention ``c[n] = f^(n)(t0) / n!``.
"""

from functools import lru_cache
from itertools import permutations
from math import factorial

import numpy as np

__all__ = [
    "fd_weights",
    "partial_stack",
    "univariate_derivatives",
    "series_from_derivatives",
    "derivatives_from_series",
    "series_derivative",
    "series_product",
    "jet_polynomial",
    "symmetrize_leading",
]


@lru_cache(maxsize=None)
def _fd_weights_cached(order, accuracy):
    p = (order + accuracy - 1) // 2
    offsets = np.arange(-p, p + 1, dtype=float)
    n = offsets.size
    vander = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = factorial(order)
    weights = np.linalg.solve(vander, rhs)
    # exact zeros help the point count of nested stencils
    weights[np.abs(weights) < 1e-13 * np.abs(weights).max()] = 0.0
    return offsets, weights


def fd_weights(order, accuracy=6):
    """Central finite-difference stencil.

    Parameters
    ----------
    order : int
        Derivative order.
    accuracy : int
        Formal order of accuracy (even).

    Returns
    -------
    offsets, weights : ndarray
        Integer offsets and weights for unit step; divide by ``h**order``.
    """
    offsets, weights = _fd_weights_cached(int(order), int(accuracy))
    return offsets.copy(), weights.copy()


def stencil_reach(order, accuracy):
    """Largest offset (in steps) used by :func:`fd_weights`."""
    return (order + accuracy - 1) // 2


# default steps for the nested multivariate stencils, indexed by level
PARTIAL_STEPS = {1: 2e-3, 2: 4e-3, 3: 8e-3, 4: 1.5e-2}
PARTIAL_ACCURACY = 6


def partial_stack(func, x, order, steps=None, accuracy=PARTIAL_ACCURACY):
    """All partial derivatives of a field up to a given order.

    Parameters
    ----------
    func : callable
        Maps points of shape ``(..., m)`` to values of shape ``(..., *s)``.
    x : array_like, shape (m,)
        Base point.
    order : int
        Highest derivative order.
    steps : dict, optional
        Step per derivative level; defaults to ``PARTIAL_STEPS``.
    accuracy : int
        Accuracy of the one-dimensional stencil used in every direction.

    Returns
    -------
    list of ndarray
        Entry ``n`` has shape ``(m,)*n + s``; the leading ``n`` axes are the
        differentiation directions (symmetric).
    """
    x = np.asarray(x, dtype=float)
    m = x.size
    steps = dict(PARTIAL_STEPS if steps is None else steps)
    off, w = fd_weights(1, accuracy)
    keep = w != 0
    off, w = off[keep], w[keep]
    K = off.size
    out = [np.asarray(func(x))]
    eye = np.eye(m)
    for n in range(1, order + 1):
        h = steps[n]
        disp = (off[None, :, None] * eye[:, None, :]).reshape(m * K, m) * h
        pts = np.zeros((1, m))
        for _ in range(n):
            pts = (pts[:, None, :] + disp[None, :, :]).reshape(-1, m)
        vals = np.asarray(func(x + pts))
        shape = vals.shape[1:]
        vals = vals.reshape((m, K) * n + shape)
        wk = w / h
        for lvl in range(n):
            # after each contraction the next stencil axis sits at lvl + 1
            vals = np.tensordot(vals, wk, axes=([lvl + 1], [0]))
        out.append(vals)
    return out


def _default_taylor_steps(order, base=2e-2):
    return base * 1.75 ** max(order - 1, 0)


def univariate_derivatives(func, t0, order, *, holomorphic=False, radius=0.1,
                           n_nodes=64, step=2e-2, accuracy=8):
    """Derivatives ``f^(n)(t0)`` for ``n = 0..order``.

    Parameters
    ----------
    func : callable
        Vectorised in its argument: maps times of shape ``(N,)`` to values of
        shape ``(N, *s)``.
    t0 : float
    order : int
    holomorphic : bool
        Use the Cauchy integral on a circle of the given radius.  ``func``
        must then accept complex times.
    radius : float
        Radius of the contour for the Cauchy route.
    n_nodes : int
        Number of trapezoid nodes on the contour.
    step, accuracy : float, int
        Base step and accuracy of the finite-difference route.  The step is
        widened by a factor 1.75 per derivative order to balance round-off.

    Returns
    -------
    ndarray, shape (order + 1, *s)
    """
    if holomorphic:
        theta = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
        z = radius * np.exp(1j * theta)
        vals = np.asarray(func(t0 + z))
        coeffs = np.fft.fft(vals, axis=0)[: order + 1] / n_nodes
        scale = np.array([factorial(k) / radius**k for k in range(order + 1)])
        der = coeffs.real * scale.reshape((-1,) + (1,) * (vals.ndim - 1))
        return der
    ts, pieces = [], []
    for k in range(order + 1):
        if k == 0:
            off, w, h = np.zeros(1), np.ones(1), 1.0
        else:
            h = _default_taylor_steps(k, step)
            off, w = fd_weights(k, accuracy)
            keep = w != 0
            off, w = off[keep], w[keep]
        pieces.append((len(ts), off.size, w / h**k))
        ts.extend(t0 + off * h)
    vals = np.asarray(func(np.asarray(ts)))
    out = []
    for start, cnt, wk in pieces:
        out.append(np.tensordot(wk, vals[start:start + cnt], axes=(0, 0)))
    return np.stack(out)


def series_from_derivatives(der, axis=0):
    """Normalised Taylor coefficients (last axis) from a derivative stack."""
    der = np.moveaxis(np.asarray(der), axis, -1)
    fact = np.array([factorial(k) for k in range(der.shape[-1])], dtype=float)
    return der / fact


def derivatives_from_series(coef):
    """Inverse of :func:`series_from_derivatives`, keeping the last axis."""
    coef = np.asarray(coef)
    fact = np.array([factorial(k) for k in range(coef.shape[-1])], dtype=float)
    return coef * fact


def series_derivative(coef):
    """Series of the t-derivative; one coefficient shorter."""
    coef = np.asarray(coef)
    n = coef.shape[-1]
    return coef[..., 1:] * np.arange(1, n, dtype=float)


@lru_cache(maxsize=None)
def _conv_tensor(length, nfac):
    idx = np.indices((length,) * nfac).sum(axis=0)
    out = np.zeros((length,) * nfac + (length,))
    for n in range(length):
        out[..., n] = idx == n
    return out


def series_product(subscripts, *operands):
    """Truncated product of series under an einsum contraction.

    ``subscripts`` describes the contraction of the *tensor* axes only, for
    example ``"ijk,j,k->i"``.  Every operand carries a trailing series axis;
    all series are truncated to the shortest one.
    """
    lhs, rhs = subscripts.split("->")
    terms = lhs.split(",")
    length = min(op.shape[-1] for op in operands)
    used = set(subscripts)
    free = [c for c in "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
            if c not in used]
    ser = free[: len(operands)]
    out_ser = free[len(operands)]
    ops = [op[..., :length] for op in operands]
    conv = _conv_tensor(length, len(operands))
    spec = ",".join(t + s for t, s in zip(terms, ser))
    spec += "," + "".join(ser) + out_ser + "->" + rhs + out_ser
    return np.einsum(spec, *ops, conv)


def jet_polynomial(coords, t0):
    """Taylor polynomial of a jet, vectorised over complex or real times.

    Parameters
    ----------
    coords : ndarray, shape (r + 1, m)
        ``coords[k]`` is the k-th derivative at ``t0``.
    t0 : float

    Returns
    -------
    callable
        ``t -> points`` of shape ``t.shape + (m,)``.
    """
    coords = np.asarray(coords, dtype=float)
    coef = coords / np.array([factorial(k) for k in range(coords.shape[0])])[:, None]

    def poly(t):
        s = np.asarray(t) - t0
        acc = np.zeros(s.shape + coef.shape[1:], dtype=np.result_type(s, float))
        for c in coef[::-1]:
            acc = acc * s[..., None] + c
        return acc

    return poly


def symmetrize_leading(arr, n):
    """Average over permutations of the first ``n`` axes."""
    if n < 2:
        return arr
    rest = tuple(range(n, arr.ndim))
    acc = np.zeros_like(arr)
    perms = list(permutations(range(n)))
    for p in perms:
        acc = acc + np.transpose(arr, p + rest)
    return acc / len(perms)
