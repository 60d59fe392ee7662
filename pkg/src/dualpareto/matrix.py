"""Nuclear / spectral norm pair built on a one-sided Jacobi SVD."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import Decomposition, InputError, NormPair, as_vec, check_x2
from .l1 import project_l1_ball
from .pareto import ParetoCurve, SlopeDecomposition, SVRegion

EPS = np.finfo(float).eps


def jacobi_svd(A: np.ndarray, max_sweeps: int = 100):
    """One-sided (Hestenes) Jacobi SVD.

    Returns ``(W, s, U)`` with ``A = W @ diag(s) @ U.T``, ``s`` sorted
    decreasingly and ``W``, ``U`` with orthonormal columns.  Column pairs are
    swept in a fixed cyclic order until every pair is orthogonal to machine
    precision.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2:
        raise InputError("expected a matrix")
    m, n = A.shape
    if m < n:
        W, s, U = jacobi_svd(A.T, max_sweeps)
        return U, s, W
    G = A.copy()
    V = np.eye(n)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                gp, gq = G[:, p], G[:, q]
                alpha = gp @ gp
                beta = gq @ gq
                gamma = gp @ gq
                if abs(gamma) <= EPS * np.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                if abs(beta - alpha) > 1e150 * abs(gamma):
                    # tiny rotation: t ~ 1 / (2 zeta)
                    t = gamma / (beta - alpha)
                else:
                    zeta = (beta - alpha) / (2.0 * gamma)
                    t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                cs = 1.0 / np.sqrt(1.0 + t * t)
                sn = cs * t
                gp, gq = gp.copy(), gq.copy()
                G[:, p] = cs * gp - sn * gq
                G[:, q] = sn * gp + cs * gq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = cs * vp - sn * vq
                V[:, q] = sn * vp + cs * vq
        if not rotated:
            break
    s = np.sqrt((G * G).sum(axis=0))
    order = np.argsort(-s, kind="stable")
    s, G, V = s[order], G[:, order], V[:, order]
    W = np.zeros_like(G)
    nz = s > 0
    W[:, nz] = G[:, nz] / s[nz]
    # complete W on zero singular values so that its columns stay orthonormal
    if not np.all(nz):
        basis = W[:, nz]
        for k in np.flatnonzero(~nz):
            for e in np.eye(m):
                v = e - basis @ (basis.T @ e)
                nv = np.linalg.norm(v)
                if nv > 1e-8:
                    W[:, k] = v / nv
                    basis = np.column_stack([basis, W[:, k]])
                    break
    return W, s, V


@lru_cache(maxsize=128)
def _cached_svd(shape, raw):
    W, s, U = jacobi_svd(np.frombuffer(raw).reshape(shape))
    for arr in (W, s, U):
        arr.setflags(write=False)
    return W, s, U


def thin_svd(A) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    A = np.ascontiguousarray(A, dtype=float)
    return _cached_svd(A.shape, A.tobytes())


@dataclass(frozen=True)
class SvGroups:
    """Distinct positive singular values with multiplicities and factor blocks."""

    lambdas: tuple[float, ...]
    mults: tuple[int, ...]
    W: np.ndarray
    U: np.ndarray

    def block(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo = sum(self.mults[:i])
        hi = lo + self.mults[i]
        return self.W[:, lo:hi], self.U[:, lo:hi]


def svd(A, tol: float = 1e-8) -> SvGroups:
    """Grouped SVD: values within relative gap ``tol`` share one class."""
    A = as_vec(A, "matrix")
    if A.ndim != 2:
        raise InputError("expected a matrix")
    W, s, U = thin_svd(A)
    if s.size == 0 or s[0] == 0:
        return SvGroups((), (), W[:, :0], U[:, :0])
    keep = s > max(A.shape) * EPS * s[0]
    s = s[keep]
    groups = [[s[0]]]
    for v in s[1:]:
        if groups[-1][-1] - v <= tol * groups[-1][0]:
            groups[-1].append(v)
        else:
            groups.append([v])
    lambdas = tuple(float(np.mean(g)) for g in groups)
    mults = tuple(len(g) for g in groups)
    k = int(keep.sum())
    return SvGroups(lambdas, mults, W[:, :k], U[:, :k])


class NuclearSpectralPair(NormPair):
    """``X`` = nuclear norm, ``Y`` = spectral norm on m x n matrices."""

    piecewise_linear = True

    def __init__(self, m: int | None = None, n: int | None = None) -> None:
        self.shape = (m, n)
        self.name = "matrix"

    def _check(self, A):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2:
            raise InputError("expected a matrix")
        for want, got in zip(self.shape, A.shape):
            if want is not None and want != got:
                raise InputError(f"expected shape {self.shape}, got {A.shape}")
        return A

    def norm_x(self, A):
        return float(thin_svd(self._check(A))[1].sum())

    def norm_y(self, A):
        s = thin_svd(self._check(A))[1]
        return float(s[0]) if s.size else 0.0

    def dual_argmax(self, G):
        # W E U^T with E selecting the top singular pair
        W, s, U = thin_svd(self._check(G))
        return np.outer(W[:, 0], U[:, 0])

    def primal_argmax(self, G):
        """``W U^T`` on the support: spectral norm 1 and ``<G, .> = |G|_*``."""
        W, s, U = thin_svd(self._check(G))
        k = int((s > max(np.shape(G)) * EPS * (s[0] if s.size else 0)).sum())
        return W[:, :k] @ U[:, :k].T

    def proj_x_many(self, C, radii):
        W, s, U = thin_svd(self._check(C))
        S = project_l1_ball(s, radii)
        return np.einsum("ik,rk,jk->rij", W, S, U)

    def proj_x(self, C, x):
        return self.proj_x_many(C, [x])[0]

    def residual_y_many(self, C, radii):
        # C - proj_x(C, r) has singular values s - S(r)
        s = thin_svd(self._check(C))[1]
        if s.size == 0:
            return np.zeros(len(np.atleast_1d(radii)))
        return (s[None, :] - project_l1_ball(s, radii)).max(axis=1)

    def proj_y(self, C, y):
        W, s, U = thin_svd(self._check(C))
        return (W * np.minimum(s, max(y, 0.0))) @ U.T

    def proj_y_many(self, C, levels):
        W, s, U = thin_svd(self._check(C))
        S = np.minimum(s[None, :], np.maximum(np.asarray(levels, dtype=float), 0.0)[:, None])
        return np.einsum("ik,rk,jk->rij", W, S, U)

    def frontier_point(self, C, x):
        # tight pair: the soft-thresholded matrix is optimal for M_YX
        return self.proj_x(C, x)


def nuclear_spectral_pair(m: int | None = None, n: int | None = None) -> NuclearSpectralPair:
    return NuclearSpectralPair(m, n)


def sv_soft_threshold(C, y: float) -> Decomposition:
    """Shift singular values above ``y`` down by ``y``."""
    if y < 0:
        raise InputError("level must be nonnegative")
    C = as_vec(C, "matrix")
    W, s, U = thin_svd(C)
    A = (W * np.maximum(s - y, 0.0)) @ U.T
    return check_x2(NuclearSpectralPair(), A, C - A)


def sv_hard_threshold(C, y: float) -> np.ndarray:
    """Truncated SVD keeping singular values strictly above ``y``."""
    if y < 0:
        raise InputError("level must be nonnegative")
    C = as_vec(C, "matrix")
    W, s, U = thin_svd(C)
    return (W * np.where(s > y, s, 0.0)) @ U.T


def matrix_slope_decomposition(C, tol: float = 1e-8) -> SlopeDecomposition:
    """``C^(j) = (l_j - l_{j+1}) W_{k_j} U_{k_j}^T`` with ``k_j = m_1 + .. + m_j``."""
    g = svd(C, tol)
    if not g.lambdas:
        raise InputError("zero matrix has no slope decomposition")
    lam = list(g.lambdas) + [0.0]
    comps, xs, ys, slopes = [], [], [], []
    k = 0
    for j, m in enumerate(g.mults):
        k += m
        step = lam[j] - lam[j + 1]
        comps.append(step * g.W[:, :k] @ g.U[:, :k].T)
        xs.append(step * k)
        ys.append(step)
        slopes.append(1.0 / k)
    return SlopeDecomposition(comps, xs, ys, slopes)


def matrix_frontier(C, tol: float = 1e-8) -> ParetoCurve:
    """Exact curve ``x(y) = sum m_i max(l_i - y, 0)``."""
    g = svd(C, tol)
    if not g.lambdas:
        return ParetoCurve("frontier", "x_of_y", np.zeros((1, 2)))
    lam = np.array(g.lambdas)
    m = np.array(g.mults)
    ys = list(g.lambdas) + [0.0]
    pts = [(float((m * np.maximum(lam - y, 0.0)).sum()), y) for y in ys]
    return ParetoCurve("frontier", "x_of_y", np.array(pts),
                       breakpoints=tuple(range(1, len(pts) - 1)))


def matrix_sv_region(C, tol: float = 1e-8) -> SVRegion:
    g = svd(C, tol)
    return SVRegion(bars=[(lam, float(m)) for lam, m in zip(g.lambdas, g.mults)])
