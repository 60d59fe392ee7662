"""Closed forms for the l1 / l-infinity pair."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Decomposition, InputError, NormPair, as_vec, check_x2, solve_lp
from .pareto import ParetoCurve, SlopeDecomposition


def project_l1_ball(c: np.ndarray, radii) -> np.ndarray:
    """Euclidean projections of ``c`` onto l1 balls, one row per radius.

    Uses the sort-and-threshold rule: the shrinkage level is
    ``max(0, max_j (s_j - x) / j)`` where ``s_j`` are partial sums of the
    sorted magnitudes.
    """
    c = np.asarray(c, dtype=float)
    flat = c.ravel()
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    mags = np.abs(flat)
    u = np.sort(mags)[::-1]
    s = np.cumsum(u)
    j = np.arange(1, u.size + 1)
    theta = ((s[None, :] - radii[:, None]) / j[None, :]).max(axis=1)
    theta = np.maximum(theta, 0.0)
    out = np.sign(flat)[None, :] * np.maximum(mags[None, :] - theta[:, None], 0.0)
    out[radii <= 0] = 0.0
    out[radii >= s[-1]] = flat
    return out.reshape((radii.size,) + c.shape)


class L1Pair(NormPair):
    piecewise_linear = True

    def __init__(self, n: int | None = None) -> None:
        self.n = n
        self.name = "l1"

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if self.n is not None and v.size != self.n:
            raise InputError(f"expected {self.n} entries, got {v.size}")
        return v

    def norm_x(self, v):
        return float(np.abs(self._check(v)).sum())

    def norm_y(self, v):
        v = self._check(v)
        return float(np.abs(v).max()) if v.size else 0.0

    def dual_argmax(self, g):
        g = self._check(g)
        flat = g.ravel()
        mags = np.abs(flat)
        top = mags == mags.max()
        w = np.zeros_like(flat)
        neg = np.flatnonzero(top & (flat < 0))
        if mags.max() == 0:
            w[0] = -1.0
        elif neg.size:
            # a vertex -e_i with the smallest i is lexicographically smallest
            w[neg[0]] = -1.0
        else:
            w[np.flatnonzero(top)[-1]] = 1.0
        return w.reshape(g.shape)

    def primal_argmax(self, g):
        """``w`` with ``|w|_inf = 1`` and ``<g, w> = |g|_1``."""
        g = self._check(g)
        return np.where(g < 0, -1.0, 1.0)

    def proj_x(self, c, x):
        return project_l1_ball(self._check(c), [x])[0]

    def proj_x_many(self, c, radii):
        return project_l1_ball(self._check(c), radii)

    def residual_y_many(self, c, radii):
        c = self._check(c)
        P = project_l1_ball(c, radii).reshape(len(np.atleast_1d(radii)), -1)
        return np.abs(c.ravel()[None, :] - P).max(axis=1)

    def proj_y(self, c, y):
        c = self._check(c)
        return np.sign(c) * np.minimum(np.abs(c), max(y, 0.0))

    def proj_y_many(self, c, levels):
        c = self._check(c)
        levels = np.maximum(np.asarray(levels, dtype=float), 0.0)
        shape = (levels.size,) + (1,) * c.ndim
        return np.sign(c) * np.minimum(np.abs(c), levels.reshape(shape))

    def frontier_point(self, c, x):
        # variables p, q >= 0 (a = p - q) and t; minimize t
        shape = np.shape(c)
        c = np.asarray(c, dtype=float).ravel()
        n = c.size
        eye = np.eye(n)
        ones = np.ones((n, 1))
        A = np.block([[-eye, eye, -ones], [eye, -eye, -ones],
                      [np.ones((1, n)), np.ones((1, n)), np.zeros((1, 1))]])
        b = np.concatenate([-c, c, [x]])
        cost = np.concatenate([np.zeros(2 * n), [1.0]])
        res = solve_lp(cost, A_ub=A, b_ub=b, bounds=[(0, None)] * (2 * n + 1))
        return (res.x[:n] - res.x[n:2 * n]).reshape(shape)


def l1_pair(n: int | None = None) -> L1Pair:
    if n is not None and n < 1:
        raise InputError("n must be positive")
    return L1Pair(n)


@dataclass(frozen=True)
class L1SlopeLevels:
    lambdas: tuple[float, ...]
    mults: tuple[int, ...]


def l1_levels(c) -> L1SlopeLevels:
    """Distinct nonzero magnitudes (decreasing) with their multiplicities."""
    mags = np.abs(as_vec(c).ravel())
    vals, counts = np.unique(mags[mags > 0], return_counts=True)
    return L1SlopeLevels(tuple(float(v) for v in vals[::-1]),
                         tuple(int(k) for k in counts[::-1]))


def soft_threshold(c, y: float) -> Decomposition:
    """Split with ``b_i = sgn(c_i) min(|c_i|, y)`` and ``a = c - b``."""
    if y < 0:
        raise InputError("level must be nonnegative")
    c = as_vec(c)
    b = np.sign(c) * np.minimum(np.abs(c), y)
    return check_x2(L1Pair(), c - b, b)


def l1_frontier(c) -> ParetoCurve:
    """Exact curve ``x(y) = sum max(0, |c_i| - y)`` through its vertices."""
    c = as_vec(c)
    lv = l1_levels(c)
    if not lv.lambdas:
        return ParetoCurve("frontier", "x_of_y", np.zeros((1, 2)))
    mags = np.abs(c.ravel())
    ys = list(lv.lambdas) + [0.0]
    pts = [(float(np.maximum(mags - y, 0.0).sum()), y) for y in ys]
    return ParetoCurve("frontier", "x_of_y", np.array(pts),
                       breakpoints=tuple(range(1, len(pts) - 1)))


def l1_slope_decomposition(c) -> SlopeDecomposition:
    """Components ``sgn(c_j) (lambda_i - lambda_{i+1})`` on ``|c_j| >= lambda_i``."""
    c = as_vec(c)
    lv = l1_levels(c)
    if not lv.lambdas:
        raise InputError("zero vector has no slope decomposition")
    lam = list(lv.lambdas) + [0.0]
    mags = np.abs(c)
    comps, xs, ys, slopes = [], [], [], []
    k = 0
    for i in range(len(lv.lambdas)):
        step = lam[i] - lam[i + 1]
        comp = np.where(mags >= lam[i], np.sign(c) * step, 0.0)
        k += lv.mults[i]
        comps.append(comp)
        xs.append(float(np.abs(comp).sum()))
        ys.append(float(np.abs(comp).max()))
        slopes.append(1.0 / k)
    return SlopeDecomposition(comps, xs, ys, slopes)
