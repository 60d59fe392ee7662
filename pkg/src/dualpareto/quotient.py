"""Norm pairs pushed through linear maps, and their denoising problems.

A surjective ``D: R^m -> R^n`` and a base pair ``(Xb, Yb)`` on ``R^m`` give

    |c|_X = min |v|_Xb over D v = c,        |c|_Y = |D* c|_Yb.

Basis pursuit denoising, LASSO and the Dantzig selector use the l1 base.
Two dimensional total variation and trend filtering use the mirror image:
``|c|_X = |F c|_1`` and ``|c|_Y = min |w|_inf over F* w = c``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.optimize import lsq_linear

from .core import (Decomposition, InputError, NormPair, PreconditionError,
                   SolverError, as_vec, check_x2, solve_lp)
from .l1 import L1Pair


def seed() -> int:
    return int(os.environ.get("PARETO_SEED", "0"))


class LinearMap:
    """Dense linear map ``v -> M v`` with its adjoint."""

    def __init__(self, M, check: bool = True) -> None:
        M = as_vec(M, "matrix")
        if M.ndim != 2:
            raise InputError("a linear map needs a 2D matrix")
        self.M = M
        self.out_dim, self.in_dim = M.shape
        if check and np.linalg.matrix_rank(M) < self.out_dim:
            raise PreconditionError("linear map is not surjective")

    def apply(self, v):
        return self.M @ v

    def adjoint(self, w):
        return self.M.T @ w

    def op_norm_estimate(self, iters: int = 20) -> float:
        """Power iteration on ``M^T M`` from a seeded random start."""
        v = np.random.default_rng(seed()).standard_normal(self.in_dim)
        v /= np.linalg.norm(v)
        est = 0.0
        for _ in range(iters):
            w = self.adjoint(self.apply(v))
            nw = np.linalg.norm(w)
            if nw == 0:
                return 0.0
            est = np.sqrt(nw)
            v = w / nw
        return float(est)

    def scaled(self, s: float) -> "LinearMap":
        return LinearMap(s * self.M, check=False)


def as_map(D) -> LinearMap:
    return D if isinstance(D, LinearMap) else LinearMap(D)


# ---------------------------------------------------------------------------
# ISTA projection


@dataclass(frozen=True)
class IstaResult:
    a: np.ndarray
    e: np.ndarray
    iterations: int
    lhs: float
    rhs: float

    @property
    def certified(self) -> bool:
        """The stopping inequality ``<De, c-De> > delta |e| |D*(c-De)|``."""
        return self.lhs > self.rhs


def ista_solve(D, base: NormPair, c, x: float, delta: float = 0.999,
               max_iter: int = 100_000) -> IstaResult:
    """Euclidean projection of ``c`` onto the quotient X-ball of radius ``x``.

    Iterates ``e <- proj_Xb(2 D*(c - D e) + e, x)`` until
    ``<De, c - De> > delta |e|_Xb |D*(c - De)|_Yb``.  ``D`` is rescaled
    first so that its singular values lie in ``[0, 1/sqrt 2]``; the stopping
    rule does not depend on the scale.
    """
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    D = as_map(D)
    c = as_vec(c)
    if c.shape != (D.out_dim,):
        raise InputError(f"expected a vector of length {D.out_dim}")
    if x < 0:
        raise InputError("radius must be nonnegative")
    zero = np.zeros(D.in_dim)
    if x == 0 or not np.any(c):
        return IstaResult(np.zeros_like(c), zero, 0, 0.0, 0.0)
    sigma = D.op_norm_estimate()
    s = 1.0 / (np.sqrt(2.0) * sigma)
    Ds = D.scaled(s)
    xs = x / s
    cnorm = np.linalg.norm(c)
    e = zero
    for it in range(1, max_iter + 1):
        De = Ds.apply(e)
        r = c - De
        if np.linalg.norm(r) <= 1e-13 * cnorm:
            return IstaResult(c.copy(), e * s, it - 1, 0.0, 0.0)
        g = Ds.adjoint(r)
        lhs = float(De @ r)
        ex = base.norm_x(e)
        rhs = delta * ex * base.norm_y(g)
        # the inequality alone certifies a split at radius |e|; also require
        # that the iterate has reached the target radius
        if lhs > rhs and ex >= delta * xs:
            return IstaResult(De, e * s, it - 1, lhs, rhs)
        e = base.proj_x(2.0 * g + e, xs)
    raise SolverError(f"ISTA did not certify within {max_iter} iterations")


def ista_proj(D, base: NormPair, c, x: float, delta: float = 0.999,
              max_iter: int = 100_000) -> np.ndarray:
    return ista_solve(D, base, c, x, delta, max_iter).a


# ---------------------------------------------------------------------------
# quotient pairs


class QuotientPair(NormPair):
    """``|c|_X = min |v|_Xb over D v = c`` with dual ``|D* c|_Yb``."""

    def __init__(self, D, base: NormPair, delta: float = 0.999) -> None:
        self.D = as_map(D)
        self.base = base
        self.delta = delta
        self.name = f"quotient-{base.name}"
        self.piecewise_linear = isinstance(base, L1Pair)

    def _check(self, c):
        c = np.asarray(c, dtype=float)
        if c.shape != (self.D.out_dim,):
            raise InputError(f"expected a vector of length {self.D.out_dim}")
        return c

    def preimage(self, c) -> np.ndarray:
        """A minimizer ``v`` of ``|v|_Xb`` over ``D v = c`` (l1 base: exact LP)."""
        c = self._check(c)
        if isinstance(self.base, L1Pair):
            M = self.D.M
            m = self.D.in_dim
            res = solve_lp(np.ones(2 * m), A_eq=np.hstack([M, -M]), b_eq=c,
                           bounds=[(0, None)] * (2 * m))
            return res.x[:m] - res.x[m:]
        return self._preimage_ista(c)

    def _preimage_ista(self, c):
        # smallest radius whose projection reproduces c, by bisection
        scale = np.linalg.norm(c)
        if scale == 0:
            return np.zeros(self.D.in_dim)

        def inside(x):
            r = ista_solve(self.D, self.base, c, x, self.delta)
            return np.linalg.norm(c - r.a) <= 1e-9 * scale, r

        hi = self.base.norm_x(np.linalg.pinv(self.D.M) @ c)
        lo = 0.0
        best = np.linalg.pinv(self.D.M) @ c
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            ok, r = inside(mid)
            if ok:
                hi, best = mid, r.e
            else:
                lo = mid
            if hi - lo <= 1e-9 * hi:
                break
        return best

    def norm_x(self, c):
        c = self._check(c)
        if not np.any(c):
            return 0.0
        return self.base.norm_x(self.preimage(c))

    def norm_y(self, c):
        return self.base.norm_y(self.D.adjoint(self._check(c)))

    def dual_argmax(self, g):
        return self.D.apply(self.base.dual_argmax(self.D.adjoint(self._check(g))))

    def proj_x(self, c, x):
        c = self._check(c)
        if x <= 0:
            return np.zeros_like(c)
        if self.norm_x(c) <= x:
            return c.copy()
        return ista_proj(self.D, self.base, c, x, self.delta)

    def frontier_point(self, c, x):
        if not isinstance(self.base, L1Pair):
            return None
        # min t s.t. |M^T (c - M v)| <= t, |v|_1 <= x, with v = p - q
        c = self._check(c)
        M = self.D.M
        m = self.D.in_dim
        G = M.T @ M
        h = M.T @ c
        ones = np.ones((m, 1))
        A = np.block([[G, -G, -ones], [-G, G, -ones],
                      [np.ones((1, m)), np.ones((1, m)), np.zeros((1, 1))]])
        b = np.concatenate([h, -h, [x]])
        cost = np.concatenate([np.zeros(2 * m), [1.0]])
        res = solve_lp(cost, A_ub=A, b_ub=b, bounds=[(0, None)] * (2 * m + 1))
        return M @ (res.x[:m] - res.x[m:2 * m])


def quotient_pair(D, base: NormPair, delta: float = 0.999) -> QuotientPair:
    return QuotientPair(D, base, delta)


def bpdn_pair(A, delta: float = 0.999) -> QuotientPair:
    A = as_vec(A, "matrix")
    return QuotientPair(A, L1Pair(), delta)


def lasso(A, c, x: float, delta: float = 0.999) -> Decomposition:
    """Minimize ``|c - A v|_2`` over ``|v|_1 <= x`` through the quotient pair.

    The result is certified up to the ISTA accuracy ``1 - delta``;
    ``meta["v"]`` holds the coefficient vector.
    """
    pair = bpdn_pair(A, delta)
    c = pair._check(as_vec(c))
    if x < 0:
        raise InputError("radius must be nonnegative")
    v = pair.preimage(c)
    if np.abs(v).sum() <= x:
        a = c.copy()
    elif x == 0:
        a, v = np.zeros_like(c), np.zeros_like(v)
    else:
        r = ista_solve(pair.D, pair.base, c, x, delta)
        a, v = r.a, r.e
    d = check_x2(pair, a, c - a, tol=1.0 - delta)
    return Decomposition(d.a, d.b, d.x, d.y, d.gap, d.certified, {"v": v, "radius": x})


def bpdn(A, c, y: float, delta: float = 0.999, iters: int = 50) -> Decomposition:
    """Minimize ``|v|_1`` subject to ``|A v - c|_2 <= y``.

    Bisects on the LASSO radius until the residual norm equals ``y``.
    """
    c = as_vec(c)
    cn = float(np.linalg.norm(c))
    if y < 0 or y > cn * (1 + 1e-12):
        raise InputError(f"residual level {y} outside [0, {cn}]")
    pair = bpdn_pair(A, delta)
    hi = pair.norm_x(c)
    lo = 0.0
    best = lasso(A, c, hi, delta)
    if y == 0:
        return best
    if y >= cn:
        return lasso(A, c, 0.0, delta)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        d = lasso(A, c, mid, delta)
        if np.linalg.norm(d.b) > y:
            lo = mid
        else:
            hi, best = mid, d
        if hi - lo <= 1e-10 * max(hi, 1e-300):
            break
    return best


def dantzig(A, c, y: float) -> np.ndarray:
    """Minimize ``|v|_1`` subject to ``|A^T (A v - c)|_inf <= y`` by LP."""
    A = as_vec(A, "matrix")
    c = as_vec(c)
    if A.ndim != 2 or A.shape[0] != c.size:
        raise InputError("dimension mismatch between A and c")
    if y < 0:
        raise InputError("level must be nonnegative")
    n, m = A.shape
    if n * m > 400:
        raise InputError("Dantzig selector is limited to m*n <= 400")
    G = A.T @ A
    h = A.T @ c
    rows = np.block([[G, -G], [-G, G]])
    rhs = np.concatenate([y + h, y - h])
    res = solve_lp(np.ones(2 * m), A_ub=rows, b_ub=rhs, bounds=[(0, None)] * (2 * m))
    return res.x[:m] - res.x[m:]


# ---------------------------------------------------------------------------
# l1 through a difference operator: 2D total variation and trend filtering


class MinPreimagePair(NormPair):
    """``|c|_X = |F c|_1`` and ``|c|_Y = min |w|_inf over F^T w = c``.

    Both are norms on the range of ``F^T``; vectors outside it are rejected
    (use :meth:`project` first).
    """

    def __init__(self, F, name: str, shape=None) -> None:
        self.F = np.asarray(F, dtype=float)
        self.name = name
        self.shape = shape
        E, N = self.F.shape
        self.N = N
        # orthonormal basis of ker F: vectors outside the domain
        _, s, vt = np.linalg.svd(self.F)
        rank = int((s > max(self.F.shape) * np.finfo(float).eps * (s[0] if s.size else 0)).sum())
        self.kernel = vt[rank:].T

    def _flat(self, c):
        c = np.asarray(c, dtype=float)
        if self.shape is not None and c.shape == self.shape:
            return c.ravel()
        if c.shape != (self.N,):
            raise InputError(f"expected shape {self.shape or (self.N,)}, got {c.shape}")
        return c

    def _shape(self, v):
        return v.reshape(self.shape) if self.shape is not None else v

    def project(self, c) -> np.ndarray:
        """Orthogonal projection onto the domain (removes ``ker F``)."""
        v = self._flat(as_vec(c))
        v = v - self.kernel @ (self.kernel.T @ v)
        return self._shape(v)

    def _check(self, c):
        v = self._flat(c)
        off = self.kernel.T @ v
        if np.linalg.norm(off) > 1e-8 * max(1.0, np.linalg.norm(v)):
            raise InputError("vector is outside the domain; project it first")
        return v

    def norm_x(self, c):
        return float(np.abs(self.F @ self._check(c)).sum())

    def min_preimage(self, c) -> np.ndarray:
        c = self._check(c)
        E = self.F.shape[0]
        if not np.any(c):
            return np.zeros(E)
        # min t s.t. F^T w = c, -t <= w <= t
        A_ub = np.block([[np.eye(E), -np.ones((E, 1))], [-np.eye(E), -np.ones((E, 1))]])
        A_eq = np.hstack([self.F.T, np.zeros((self.N, 1))])
        res = solve_lp(np.r_[np.zeros(E), 1.0], A_ub=A_ub, b_ub=np.zeros(2 * E),
                       A_eq=A_eq, b_eq=c, bounds=[(None, None)] * E + [(0, None)])
        return res.x[:E]

    def norm_y(self, c):
        return float(np.abs(self.min_preimage(c)).max()) if np.any(self._check(c)) else 0.0

    def dual_argmax(self, g):
        # max <g, w> s.t. |F w|_1 <= 1, w orthogonal to ker F
        g = self._check(g)
        E = self.F.shape[0]
        N = self.N
        K = self.kernel.shape[1]
        A_ub = np.block([[self.F, -np.eye(E)], [-self.F, -np.eye(E)],
                         [np.zeros((1, N)), np.ones((1, E))]])
        b_ub = np.r_[np.zeros(2 * E), 1.0]
        A_eq = np.hstack([self.kernel.T, np.zeros((K, E))]) if K else None
        b_eq = np.zeros(K) if K else None
        res = solve_lp(np.r_[-g, np.zeros(E)], A_ub=A_ub, b_ub=b_ub, A_eq=A_eq,
                       b_eq=b_eq, bounds=[(None, None)] * N + [(0, None)] * E)
        return self._shape(res.x[:N])

    def proj_y(self, c, y):
        # b = F^T w with |w|_inf <= y closest to c: a box least squares problem
        v = self._check(c)
        if y <= 0:
            return self._shape(np.zeros_like(v))
        res = lsq_linear(self.F.T, v, bounds=(-y, y), method="bvls", tol=1e-13)
        return self._shape(self.F.T @ res.x)

    def proj_x(self, c, x):
        # the X2 and 2Y splits coincide: bisect on the Y level
        v = self._check(c)
        nx = self.norm_x(v)
        if x >= nx:
            return self._shape(v.copy())
        if x <= 0:
            return self._shape(np.zeros_like(v))
        lo, hi = 0.0, float(np.abs(self.F @ v).max())
        a_lo, a_hi = v.copy(), np.zeros_like(v)
        x_lo, x_hi = nx, 0.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            a = v - self.proj_y(v, mid).ravel()
            xm = float(np.abs(self.F @ a).sum())
            if xm > x:
                lo, a_lo, x_lo = mid, a, xm
            else:
                hi, a_hi, x_hi = mid, a, xm
            if x_lo - x_hi <= 1e-12 * nx or hi - lo <= 1e-15 * (1 + hi):
                break
        w = 0.0 if x_lo == x_hi else (x - x_hi) / (x_lo - x_hi)
        return self._shape(a_hi + w * (a_lo - a_hi))


def grad2d_matrix(rows: int, cols: int) -> np.ndarray:
    """Matrix of ``F``: horizontal then vertical forward differences ``c_ij - c_i,j+1``, ``c_ij - c_i+1,j``."""
    if rows < 1 or cols < 1:
        raise InputError("image must be nonempty")
    idx = np.arange(rows * cols).reshape(rows, cols)
    out = []
    for i in range(rows):
        for j in range(cols - 1):
            r = np.zeros(rows * cols)
            r[idx[i, j]], r[idx[i, j + 1]] = 1.0, -1.0
            out.append(r)
    for i in range(rows - 1):
        for j in range(cols):
            r = np.zeros(rows * cols)
            r[idx[i, j]], r[idx[i + 1, j]] = 1.0, -1.0
            out.append(r)
    return np.array(out).reshape(-1, rows * cols)


def grad2d(c) -> tuple[np.ndarray, np.ndarray]:
    """``F c = (d, e)`` with ``d_ij = c_ij - c_i,j+1`` and ``e_ij = c_ij - c_i+1,j``."""
    c = as_vec(c, "image")
    if c.ndim != 2:
        raise InputError("expected a 2D image")
    return c[:, :-1] - c[:, 1:], c[:-1, :] - c[1:, :]


def grad2d_adjoint(d, e) -> np.ndarray:
    """``F*(d, e)_ij = d_ij - d_i,j-1 + e_ij - e_i-1,j`` with zero boundary terms."""
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    rows, cols = d.shape[0], d.shape[1] + 1
    if e.shape != (rows - 1, cols):
        raise InputError("inconsistent difference shapes")
    out = np.zeros((rows, cols))
    out[:, :-1] += d
    out[:, 1:] -= d
    out[:-1, :] += e
    out[1:, :] -= e
    return out


def tv2d_pair(rows: int, cols: int) -> MinPreimagePair:
    if rows * cols > 400:
        raise InputError("2D total variation pair is limited to 400 pixels")
    return MinPreimagePair(grad2d_matrix(rows, cols), "tv2d", (rows, cols))


def gsparse_2d(image) -> int:
    """Number of 4-connected constant regions minus one."""
    c = as_vec(image, "image")
    if c.ndim != 2:
        raise InputError("expected a 2D image")
    if np.all(c == c.flat[0]):
        raise InputError("gsparse is undefined for a constant image")
    regions = 0
    for v in np.unique(c):
        _, k = ndimage.label(c == v)
        regions += k
    return regions - 1


def difference_matrix(n: int, k: int = 1) -> np.ndarray:
    """Matrix of ``D^(k)``, the k-fold forward difference on ``R^n``."""
    if k < 1 or n <= k:
        raise InputError("need n > k >= 1")
    return np.diff(np.eye(n), n=k, axis=0)


def trend_filter_pair(n: int, k: int) -> MinPreimagePair:
    """``|c|_X = |D^(k) c|_1`` on vectors orthogonal to polynomials of degree < k."""
    if n > 400:
        raise InputError("trend filter pair is limited to n <= 400")
    return MinPreimagePair(difference_matrix(n, k), f"trend{k}")


def trend_denoise(c, k: int, lam: float) -> np.ndarray:
    """Minimizer of ``|c - a|^2 / 2 + lam |D^(k) a|_1``.

    Solved through the dual box least squares problem
    ``min |c - D^T w|`` over ``|w|_inf <= lam``; then ``a = c - D^T w``.
    """
    c = as_vec(c)
    if lam < 0:
        raise InputError("lam must be nonnegative")
    Dk = difference_matrix(c.size, k)
    if lam == 0:
        return c.copy()
    res = lsq_linear(Dk.T, c, bounds=(-lam, lam), method="bvls", tol=1e-13)
    return c - Dk.T @ res.x


# ---------------------------------------------------------------------------
# matrix completion


def mask_map(mask) -> LinearMap:
    """Map from matrices (flattened) onto their observed entries."""
    mask = np.asarray(mask, dtype=bool)
    rows = np.flatnonzero(mask.ravel())
    M = np.zeros((rows.size, mask.size))
    M[np.arange(rows.size), rows] = 1.0
    return LinearMap(M, check=False)


@dataclass(frozen=True)
class CompletionResult:
    X: np.ndarray
    iterations: int
    objective: float


def matrix_completion(C, mask, lam: float, max_iter: int = 10_000,
                      tol: float = 1e-10) -> CompletionResult:
    """Minimize ``|P(C - X)|^2 / 2 + lam |X|_*`` with ``P`` the mask projector.

    Proximal gradient with unit step (the projector has norm one): each step
    shrinks the singular values of ``X + P(C - X)`` by ``lam``.
    """
    C = as_vec(C, "matrix")
    mask = np.asarray(mask, dtype=bool)
    if C.ndim != 2 or mask.shape != C.shape:
        raise InputError("C and mask must be matrices of the same shape")
    if lam < 0:
        raise InputError("lam must be nonnegative")
    Cm = np.where(mask, C, 0.0)
    X = np.zeros_like(C)
    for it in range(1, max_iter + 1):
        Z = X + np.where(mask, Cm - X, 0.0)
        W, s, U = np.linalg.svd(Z, full_matrices=False)
        Xn = (W * np.maximum(s - lam, 0.0)) @ U
        step = np.linalg.norm(Xn - X)
        X = Xn
        if step <= tol * max(1.0, np.linalg.norm(X)):
            break
    obj = 0.5 * np.sum(np.where(mask, C - X, 0.0) ** 2) + lam * np.linalg.svd(X, compute_uv=False).sum()
    return CompletionResult(X, it, float(obj))
