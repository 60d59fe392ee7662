"""One-dimensional total variation pair and the taut string solver.

The pair lives on ``R^n``, the space of increments of signals with ``n + 1``
samples.  For ``a`` in ``R^n``:

* ``|a|_X = |D* a|_1``, the total variation of ``a`` padded with zeros;
* ``|a|_Y = (max e - min e) / 2`` where ``e`` is any preimage, ``D e = a``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np

from .core import InputError, NormPair, as_vec, solve_lp
from .pareto import ParetoCurve


def diff(b) -> np.ndarray:
    """``D b = (b_2 - b_1, ..., b_{n+1} - b_n)``."""
    b = as_vec(b)
    if b.ndim != 1 or b.size < 2:
        raise InputError("diff needs a 1D vector with at least two entries")
    return b[1:] - b[:-1]


def diff_adjoint(a) -> np.ndarray:
    """``D* a = (-a_1, a_1 - a_2, ..., a_{n-1} - a_n, a_n)``."""
    a = as_vec(a)
    if a.ndim != 1:
        raise InputError("diff_adjoint needs a 1D vector")
    out = np.zeros(a.size + 1)
    out[:-1] -= a
    out[1:] += a
    return out


def center(v) -> np.ndarray:
    """Remove the mean (projection onto the zero-sum subspace)."""
    v = as_vec(v)
    return v - v.mean()


def integrate(a) -> np.ndarray:
    """The preimage ``(0, a_1, a_1 + a_2, ...)`` of ``a`` under ``D``."""
    a = np.asarray(a, dtype=float)
    return np.concatenate([[0.0], np.cumsum(a)])


def bending(a) -> float:
    """``|D* D a|_1`` for a signal ``a``."""
    return float(np.abs(diff_adjoint(diff(a))).sum())


# ---------------------------------------------------------------------------
# taut string


@dataclass(frozen=True)
class TautStringResult:
    a: np.ndarray
    b: np.ndarray
    knots: tuple[int, ...]
    tv_value: float


def _side(A, q, p) -> float:
    # > 0 when p lies above the line from A through q; A = None is the
    # horizontal direction coming from the left
    if A is None:
        return p[1] - q[1]
    return (q[0] - A[0]) * (p[1] - A[1]) - (q[1] - A[1]) * (p[0] - A[0])


def _sweep(cols, apex):
    """Funnel sweep through tube columns ``(x, low, high)``; returns the forced vertices."""
    side = _side
    out = []
    U: deque = deque()
    L: deque = deque()
    for x, l, h in cols:
        q = (x, h)
        if L and side(apex, L[0], q) < 0:
            while L and side(apex, L[0], q) < 0:
                apex = L.popleft()
                out.append(apex)
            U.clear()
        else:
            while U:
                B = U[-2] if len(U) > 1 else apex
                u = U[-1]
                # inline of side(B, u, q) <= 0
                if B is None:
                    if q[1] - u[1] > 0:
                        break
                elif (u[0] - B[0]) * (q[1] - B[1]) - (u[1] - B[1]) * (q[0] - B[0]) > 0:
                    break
                U.pop()
        U.append(q)
        p = (x, l)
        if U and side(apex, U[0], p) > 0:
            while U and side(apex, U[0], p) > 0:
                apex = U.popleft()
                out.append(apex)
            L.clear()
        else:
            while L:
                B = L[-2] if len(L) > 1 else apex
                v = L[-1]
                if B is None:
                    if p[1] - v[1] < 0:
                        break
                elif (v[0] - B[0]) * (p[1] - B[1]) - (v[1] - B[1]) * (p[0] - B[0]) < 0:
                    break
                L.pop()
        L.append(p)
    return out


def _free_string(c: list, eps: float) -> list:
    n = len(c)
    # columns are generated on the fly to keep the working set small
    fwd = _sweep(((i, v - eps, v + eps) for i, v in enumerate(c)), None)
    if not fwd:
        return [(0, 0.5 * (max(c) + min(c)))]
    end = fwd[-1]
    k = end[0]
    cols = itertools.chain(((-i, c[i] - eps, c[i] + eps) for i in range(n - 1, k, -1)),
                           [(-k, end[1], end[1])])
    back = _sweep(cols, None)
    tail = [(-x, y) for x, y in reversed(back) if -x != k]
    return fwd + tail


def _fixed_string(c: list, eps: float) -> list:
    n = len(c)
    if n <= 2:
        return [(i, c[i]) for i in range(n)]
    cols = itertools.chain(((i, c[i] - eps, c[i] + eps) for i in range(1, n - 1)),
                           [(n - 1, c[-1], c[-1])])
    mid = _sweep(cols, (0, c[0]))
    return [(0, c[0])] + [v for v in mid if v[0] != n - 1] + [(n - 1, c[-1])]


def taut_string(c, eps: float, ends: str = "free") -> TautStringResult:
    """Taut string through the tube ``[c - eps, c + eps]``.

    With ``ends="free"`` the string leaves both ends horizontally and the
    result minimizes ``|D* D a|_1`` subject to ``|c - a|_inf <= eps``.  With
    ``ends="fixed"`` the string is pinned to ``c`` at both ends (the classic
    formulation on cumulative sums).  Runs in linear time.
    """
    c = as_vec(c)
    if c.ndim != 1:
        raise InputError("taut_string needs a 1D signal")
    if eps < 0:
        raise InputError("eps must be nonnegative")
    if ends not in ("free", "fixed"):
        raise InputError(f"unknown end condition {ends!r}")
    vals = c.tolist()
    if eps == 0 or c.size == 1 and ends == "fixed":
        verts = [(i, v) for i, v in enumerate(vals)]
    elif ends == "free":
        verts = _free_string(vals, float(eps))
    else:
        verts = _fixed_string(vals, float(eps))
    kx = np.array([v[0] for v in verts], dtype=float)
    ky = np.array([v[1] for v in verts], dtype=float)
    a = np.interp(np.arange(c.size, dtype=float), kx, ky)
    # keep the string inside the tube despite rounding in the interpolation
    a = np.clip(a, c - eps, c + eps)
    if ends == "fixed":
        a[0], a[-1] = c[0], c[-1]
    tv = bending(a) if c.size > 1 else 0.0
    return TautStringResult(a, c - a, tuple(int(v[0]) for v in verts), tv)


def tv_denoise(y, lam: float) -> np.ndarray:
    """Minimizer of ``|y - x|^2 / 2 + lam * sum |x_{i+1} - x_i|``.

    Computed as the increments of the fixed-end taut string through the
    tube of half-width ``lam`` around the cumulative sums of ``y``.
    """
    y = as_vec(y)
    return np.diff(taut_string(integrate(y), lam, ends="fixed").a)


# ---------------------------------------------------------------------------
# the norm pair


class TVPair(NormPair):
    piecewise_linear = True

    def __init__(self, n: int | None = None) -> None:
        self.n = n
        self.name = "tv"

    def _check(self, a):
        a = np.asarray(a, dtype=float)
        if a.ndim != 1 or (self.n is not None and a.size != self.n):
            raise InputError(f"expected a vector of length {self.n}")
        return a

    def norm_x(self, a):
        return float(np.abs(diff_adjoint(self._check(a))).sum())

    def norm_y(self, a):
        e = integrate(self._check(a))
        return 0.5 * float(e.max() - e.min())

    def dual_argmax(self, g):
        # D* w = (delta_i - delta_j) / 2 with e_i = max e and e_j = min e;
        # the first maximizer and the last minimizer give the
        # lexicographically smallest vertex
        g = self._check(g)
        e = integrate(g)
        i = int(np.flatnonzero(e == e.max())[0])
        j = int(np.flatnonzero(e == e.min())[-1])
        if i == j:
            i, j = 0, e.size - 1
        w = np.zeros(g.size)
        if i < j:
            w[i:j] = -0.5
        else:
            w[j:i] = 0.5
        return w

    def primal_argmax(self, g):
        """``D sgn(D* g)``: Y-norm 1 and ``<g, w> = |g|_X``."""
        return diff(np.sign(diff_adjoint(self._check(g))))

    def proj_y(self, a, y):
        a = self._check(a)
        res = taut_string(integrate(a), max(y, 0.0))
        return diff(res.b)

    def proj_y_many(self, a, levels):
        # one taut string per level, without the per-call validation
        a = self._check(a)
        s = integrate(a)
        vals = s.tolist()
        idx = np.arange(s.size, dtype=float)
        out = np.zeros((len(levels), a.size))
        for k, y in enumerate(levels):
            y = float(y)
            if y <= 0:
                continue
            kx, ky = zip(*_free_string(vals, y))
            string = np.clip(np.interp(idx, kx, ky), s - y, s + y)
            out[k] = np.diff(s - string)
        return out

    def proj_x(self, a, x):
        a = self._check(a)
        nx = self.norm_x(a)
        if x >= nx:
            return a.copy()
        if x <= 0:
            return np.zeros_like(a)
        s = integrate(a)
        lo, hi = 0.0, self.norm_y(a)
        u_lo, x_lo = a.copy(), nx
        u_hi, x_hi = np.zeros_like(a), 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            u = diff(taut_string(s, mid).a)
            xm = self.norm_x(u)
            if xm > x:
                lo, u_lo, x_lo = mid, u, xm
            else:
                hi, u_hi, x_hi = mid, u, xm
            if x_lo - x_hi <= 1e-13 * nx or hi - lo <= 1e-15 * (1.0 + hi):
                break
        if x_lo == x_hi:
            return u_hi
        w = (x - x_hi) / (x_lo - x_hi)
        return u_hi + w * (u_lo - u_hi)

    def frontier_point(self, a, x):
        # min t s.t. |P(a - u) - s| <= t, |D* u|_1 <= x, P the cumulative map
        a = self._check(a)
        n = a.size
        P = np.tril(np.ones((n + 1, n)), -1)
        Dt = np.zeros((n + 1, n))
        Dt[np.arange(n), np.arange(n)] = -1.0
        Dt[np.arange(1, n + 1), np.arange(n)] = 1.0
        m = n + 1
        # variables: u (n), s, t, p (m), q (m)
        nv = n + 2 + 2 * m
        Pa = P @ a
        A_ub = np.zeros((2 * m + 1, nv))
        A_ub[:m, :n] = -P
        A_ub[:m, n] = -1.0
        A_ub[:m, n + 1] = -1.0
        A_ub[m:2 * m, :n] = P
        A_ub[m:2 * m, n] = 1.0
        A_ub[m:2 * m, n + 1] = -1.0
        A_ub[2 * m, n + 2:] = 1.0
        b_ub = np.concatenate([-Pa, Pa, [x]])
        A_eq = np.zeros((m, nv))
        A_eq[:, :n] = Dt
        A_eq[:, n + 2:n + 2 + m] = -np.eye(m)
        A_eq[:, n + 2 + m:] = np.eye(m)
        cost = np.zeros(nv)
        cost[n + 1] = 1.0
        bounds = [(None, None)] * (n + 1) + [(0, None)] * (1 + 2 * m)
        res = solve_lp(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=np.zeros(m), bounds=bounds)
        return res.x[:n]


def tv_pair(n: int | None = None) -> TVPair:
    if n is not None and n < 1:
        raise InputError("n must be positive")
    return TVPair(n)


def signal_norms(c) -> tuple[float, float]:
    """``(|c|_X, |c|_Y)`` for a signal, through its increments."""
    u = diff(c)
    p = TVPair()
    return p.norm_x(u), p.norm_y(u)


def tv_frontier(c, grid=None) -> ParetoCurve:
    """Frontier of a signal by sweeping the tube half-width.

    The pair is tight so this is both the frontier and the sub-frontier;
    points are ``(|D* D a|_1, eps)``.
    """
    c = as_vec(c)
    if c.ndim != 1 or c.size < 2:
        raise InputError("signal needs at least two samples")
    ny = 0.5 * float(c.max() - c.min())
    if ny == 0:
        return ParetoCurve("frontier", "x_of_y", np.zeros((1, 2)))
    if grid is None or np.isscalar(grid):
        n = 256 if grid is None else int(grid)
        grid = np.linspace(0.0, ny, max(n, 2))
    eps = np.clip(np.asarray(grid, dtype=float), 0.0, ny)
    xs = np.array([taut_string(c, e).tv_value for e in eps])
    xs[eps >= ny] = 0.0
    pts = np.column_stack([xs, eps])
    return ParetoCurve("frontier", "x_of_y", pts[np.argsort(-eps, kind="stable")])


# ---------------------------------------------------------------------------
# faces of the Y unit ball


def _check_signature(s) -> tuple[int, ...]:
    s = tuple(int(v) for v in s)
    if any(v not in (-1, 0, 1) for v in s) or 1 not in s or -1 not in s:
        raise InputError(f"not a signature sequence: {s}")
    return s


def signature_faces(n: int) -> list[tuple[tuple[int, ...], int]]:
    """All signature sequences of length ``n + 1`` with their face dimension."""
    if n < 1 or n > 12:
        raise InputError("n must be between 1 and 12")
    out = []
    for s in itertools.product((-1, 0, 1), repeat=n + 1):
        if 1 in s and -1 in s:
            out.append((s, s.count(0)))
    return out


def face_counts(n: int) -> list[int]:
    """Number of faces of each dimension ``0..n`` of the Y unit ball."""
    counts = [0] * (n + 1)
    for _, dim in signature_faces(n):
        counts[dim] += 1
    counts[n] += 1
    return counts


def face_polynomial(n: int) -> list[int]:
    """Coefficients of ``(2+t)^{n+1} - 2(1+t)^{n+1} + t^{n+1} + t^n``."""
    P = np.polynomial.Polynomial
    H = P([2, 1]) ** (n + 1) - 2 * P([1, 1]) ** (n + 1) + P([0, 1]) ** (n + 1) + P([0, 1]) ** n
    coef = [int(round(v)) for v in H.coef]
    coef += [0] * (n + 2 - len(coef))
    return coef[: n + 1]


def signature_interpolant(s) -> np.ndarray:
    """``v`` equal to ``s`` at nonzero entries, linear in between, constant at the ends."""
    s = _check_signature(s)
    idx = [i for i, v in enumerate(s) if v != 0]
    return np.interp(np.arange(len(s), dtype=float), idx, [s[i] for i in idx])


def unitangent_from_signature(s) -> np.ndarray:
    """Unitangent vector ``D v`` in the face of the signature sequence ``s``."""
    return diff(signature_interpolant(s))
