"""Dual norm pairs, decomposition certificates and the 2D gallery pairs.

A norm pair bundles a norm ``X`` with its dual ``Y`` on a finite dimensional
Euclidean space.  Vectors are plain numpy arrays of any shape; the inner
product is the entrywise dot product, so matrices and tensors need no special
treatment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.optimize import linprog


class ParetoError(Exception):
    """Base class for all library errors."""


class InputError(ParetoError, ValueError):
    """Malformed or out-of-range input."""


class PreconditionError(ParetoError, ValueError):
    """A mathematical precondition of an operation does not hold."""


class NotTightError(PreconditionError):
    """The vector has no slope decomposition."""


class SolverError(ParetoError, RuntimeError):
    """An iterative or LP solver failed to reach its target."""


def as_vec(v: Any, name: str = "vector") -> np.ndarray:
    arr = np.array(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.size == 0:
        raise InputError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    return arr


def inner(u: Any, v: Any) -> float:
    """Standard dot product of two arrays of equal shape."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise InputError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(np.vdot(u, v))


def lex_smallest(candidates: Sequence[np.ndarray]) -> np.ndarray:
    """Lexicographically smallest array (row-major order)."""
    return min(candidates, key=lambda w: tuple(np.ravel(w)))


def solve_lp(cost, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None):
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method="highs")
    if res.status != 0:
        raise SolverError(f"linear program failed: {res.message}")
    return res


class NormPair:
    """A norm ``X`` together with its dual norm ``Y``.

    Subclasses implement ``norm_x``, ``norm_y``, ``proj_x`` (Euclidean
    projection onto the X-ball of a given radius) and ``dual_argmax``, which
    returns ``w`` with ``norm_x(w) == 1`` and ``<g, w> == norm_y(g)``.

    Optional hooks:

    * ``proj_y`` projects onto the Y-ball.  The default bisects on the X
      radius, which is slow but only needs ``proj_x``.
    * ``frontier_point(c, x)`` returns an exact minimizer of ``|c - a|_Y``
      over ``|a|_X <= x``, or ``None`` to fall back to Frank-Wolfe.
    """

    name = "pair"
    #: the sub-frontier is piecewise linear (polyhedral or spectral norms)
    piecewise_linear = False

    def norm_x(self, v: np.ndarray) -> float:
        raise NotImplementedError

    def norm_y(self, v: np.ndarray) -> float:
        raise NotImplementedError

    def proj_x(self, c: np.ndarray, x: float) -> np.ndarray:
        raise NotImplementedError

    def dual_argmax(self, g: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def proj_y(self, c: np.ndarray, y: float) -> np.ndarray:
        return c - bisect_radius(self, c, y)[1]

    def proj_x_many(self, c: np.ndarray, radii: Sequence[float]) -> np.ndarray:
        return np.stack([self.proj_x(c, r) for r in radii])

    def proj_y_many(self, c: np.ndarray, levels: Sequence[float]) -> np.ndarray:
        return np.stack([self.proj_y(c, y) for y in levels])

    def residual_y_many(self, c: np.ndarray, radii: Sequence[float]) -> np.ndarray:
        """``|c - proj_x(c, r)|_Y`` for each radius ``r``."""
        return np.array([self.norm_y(c - a) for a in self.proj_x_many(c, radii)])

    def frontier_point(self, c: np.ndarray, x: float) -> np.ndarray | None:
        return None

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return inner(u, v)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


def bisect_radius(pair: NormPair, c: np.ndarray, y: float,
                  tol: float = 0.0, iters: int = 60) -> tuple[float, np.ndarray]:
    """Find ``x`` with ``|c - proj_x(c, x)|_Y = y``; return ``(x, proj_x(c, x))``.

    The map ``x -> |c - proj_x(c, x)|_Y`` is continuous and strictly
    decreasing on ``[0, |c|_X]`` so plain bisection always brackets.
    """
    c = as_vec(c)
    cy = pair.norm_y(c)
    if y >= cy:
        return 0.0, np.zeros_like(c)
    if y <= 0:
        return pair.norm_x(c), c.copy()
    lo, hi = 0.0, pair.norm_x(c)
    a_lo, a_hi = np.zeros_like(c), c.copy()
    h_lo, h_hi = cy, 0.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        a_mid = pair.proj_x(c, mid)
        h_mid = pair.norm_y(c - a_mid)
        if h_mid > y:
            lo, a_lo, h_lo = mid, a_mid, h_mid
        else:
            hi, a_hi, h_hi = mid, a_mid, h_mid
        if tol and abs(h_mid - y) <= tol:
            return mid, a_mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    if h_lo < h_hi or h_lo == h_hi:
        return hi, a_hi
    # linear interpolation inside the final bracket
    w = (h_lo - y) / (h_lo - h_hi)
    return lo + w * (hi - lo), a_lo + w * (a_hi - a_lo)


@dataclass(frozen=True)
class Decomposition:
    """A split ``c = a + b`` with its norms and duality gap."""

    a: np.ndarray
    b: np.ndarray
    x: float
    y: float
    gap: float
    certified: bool
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def c(self) -> np.ndarray:
        return self.a + self.b


@dataclass(frozen=True)
class SparsenessReport:
    gsparse_x: int
    gsparse_y: int
    bound: int

    @property
    def holds(self) -> bool:
        return self.gsparse_x + self.gsparse_y <= self.bound


def check_x2(pair: NormPair, a: Any, b: Any, tol: float = 1e-9) -> Decomposition:
    """Evaluate the X2 certificate ``<a, b> = |a|_X |b|_Y`` for ``c = a + b``."""
    a = as_vec(a, "a")
    b = as_vec(b, "b")
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    x = pair.norm_x(a)
    y = pair.norm_y(b)
    gap = x * y - pair.inner(a, b)
    return Decomposition(a, b, x, y, gap, bool(gap <= tol * (1.0 + x * y)))


def slope_mu(pair: NormPair, v: Any) -> float:
    """The slope ``|v|_Y / |v|_X``."""
    v = as_vec(v)
    nx = pair.norm_x(v)
    if nx == 0:
        raise InputError("slope of the zero vector is undefined")
    return pair.norm_y(v) / nx


def is_unitangent(pair: NormPair, v: Any, tol: float = 1e-9) -> bool:
    """True when ``|v|_2^2 = |v|_X |v|_Y`` up to ``tol`` relative."""
    v = as_vec(v)
    n2 = pair.inner(v, v)
    if n2 == 0:
        raise InputError("zero vector")
    return abs(n2 - pair.norm_x(v) * pair.norm_y(v)) <= tol * n2


def gsparse(pair_tag: str, v: Any) -> int:
    """Geometric sparseness for the closed-form cases.

    ``l1_X`` counts nonzeros, ``l1_Y`` is one plus the number of entries whose
    magnitude is not maximal, ``tv_Y`` is one plus the number of jumps.
    """
    v = as_vec(v).ravel()
    if not np.any(v):
        return 0
    if pair_tag == "l1_X":
        return int(np.count_nonzero(v))
    if pair_tag == "l1_Y":
        mags = np.abs(v)
        return 1 + int(np.count_nonzero(mags != mags.max()))
    if pair_tag == "tv_Y":
        return 1 + int(np.count_nonzero(v[1:] != v[:-1]))
    raise InputError(f"unsupported gsparse tag {pair_tag!r}")


def sparseness_report(a: Any, b: Any) -> SparsenessReport:
    """gsparse of an l1/linf split; the bound is ``n + 1``."""
    a = as_vec(a).ravel()
    b = as_vec(b).ravel()
    return SparsenessReport(gsparse("l1_X", a), gsparse("l1_Y", b), a.size + 1)


# ---------------------------------------------------------------------------
# gallery pairs on R^2


class EllipsePair(NormPair):
    """``|z|_X = sqrt(z1^2/2 + 2 z2^2)`` with dual ``sqrt(2 z1^2 + z2^2/2)``."""

    name = "gallery-ellipse"

    def __init__(self) -> None:
        self.m = np.array([0.5, 2.0])

    def norm_x(self, v):
        v = np.asarray(v, dtype=float)
        return float(np.sqrt(np.dot(self.m * v, v)))

    def norm_y(self, v):
        v = np.asarray(v, dtype=float)
        return float(np.sqrt(np.dot(v / self.m, v)))

    def dual_argmax(self, g):
        g = np.asarray(g, dtype=float)
        ny = self.norm_y(g)
        if ny == 0:
            return np.array([-np.sqrt(2.0), 0.0])
        return g / self.m / ny

    def _multipliers(self, c, radii):
        # z = c / (1 + mu m) with |z|_X = x; psi(mu) = 1/|z(mu)|_X - 1/x is
        # increasing in mu, solved by safeguarded Newton on a bracket.
        radii = np.asarray(radii, dtype=float)
        cm = self.m * c * c
        lo = np.zeros_like(radii)
        hi = np.full_like(radii, self.norm_y(c)) / radii
        mu = lo.copy()
        for _ in range(200):
            den = 1.0 + np.outer(mu, self.m)
            q = (cm / den**2).sum(axis=1)
            dq = (-2.0 * cm * self.m / den**3).sum(axis=1)
            psi = q**-0.5 - 1.0 / radii
            lo = np.where(psi < 0, mu, lo)
            hi = np.where(psi > 0, mu, hi)
            dpsi = -0.5 * q**-1.5 * dq
            step = mu - psi / dpsi
            bad = ~((step > lo) & (step < hi))
            new = np.where(bad, 0.5 * (lo + hi), step)
            if np.all(np.abs(new - mu) <= 1e-15 * (1.0 + mu)):
                mu = new
                break
            mu = new
        return mu

    def proj_x_many(self, c, radii):
        c = np.asarray(c, dtype=float)
        radii = np.asarray(radii, dtype=float)
        out = np.empty((radii.size, 2))
        nx = self.norm_x(c)
        inside = radii >= nx
        zero = radii <= 0
        out[inside] = c
        out[zero & ~inside] = 0.0
        rest = ~inside & ~zero
        if np.any(rest):
            # work with a unit-norm copy of c to keep the iteration in range
            mu = self._multipliers(c / nx, radii[rest] / nx)
            out[rest] = c / (1.0 + np.outer(mu, self.m))
        return out

    def proj_x(self, c, x):
        return self.proj_x_many(c, [x])[0]


class PolygonPair(NormPair):
    """Polyhedral pair on R^2 given by the vertices of the X unit ball.

    The vertices are listed counter-clockwise and the ball is centrally
    symmetric.  ``Y`` is the support function of the ball.
    """

    piecewise_linear = True

    def __init__(self, vertices, x_rows, name: str = "polygon") -> None:
        self.vertices = np.asarray(vertices, dtype=float)
        # |z|_X = max_k |<x_rows[k], z>|
        self.x_rows = np.asarray(x_rows, dtype=float)
        self.name = name

    def norm_x(self, v):
        return float(np.max(np.abs(self.x_rows @ np.asarray(v, dtype=float))))

    def norm_y(self, v):
        return float(np.max(self.vertices @ np.asarray(v, dtype=float)))

    def dual_argmax(self, g):
        vals = self.vertices @ np.asarray(g, dtype=float)
        best = vals.max()
        return lex_smallest([w for w, s in zip(self.vertices, vals) if s == best]).copy()

    def proj_x_many(self, c, radii):
        c = np.asarray(c, dtype=float)
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        out = np.zeros((radii.size, 2))
        inside = radii >= self.norm_x(c)
        out[inside] = c
        rest = ~inside & (radii > 0)
        if np.any(rest):
            # project c / r onto each edge of the unit ball and scale back
            r = radii[rest]
            q = c[None, :] / r[:, None]
            P = self.vertices
            E = np.roll(P, -1, axis=0) - P
            t = np.einsum("kmd,md->km", q[:, None, :] - P[None], E) / (E * E).sum(axis=1)
            Z = P[None] + np.clip(t, 0.0, 1.0)[..., None] * E[None]
            k = ((q[:, None, :] - Z) ** 2).sum(axis=2).argmin(axis=1)
            out[rest] = r[:, None] * Z[np.arange(r.size), k]
        return out

    def proj_x(self, c, x):
        return self.proj_x_many(c, [x])[0]

    def frontier_point(self, c, x):
        # min t  s.t. |<v_k, c - a>| <= t for Y-rows, |<r, a>| <= x for X-rows
        c = np.asarray(c, dtype=float)
        V, R = self.vertices, self.x_rows
        rows, rhs = [], []
        for v in V:
            rows.append([-v[0], -v[1], -1.0])
            rhs.append(-float(v @ c))
        for r in R:
            rows.append([r[0], r[1], 0.0])
            rhs.append(x)
            rows.append([-r[0], -r[1], 0.0])
            rhs.append(x)
        res = solve_lp([0.0, 0.0, 1.0], A_ub=np.array(rows), b_ub=np.array(rhs),
                       bounds=[(None, None), (None, None), (0, None)])
        return res.x[:2]


def gallery_ellipse_pair() -> EllipsePair:
    return EllipsePair()


def gallery_skew_pair() -> PolygonPair:
    """``|c|_X = max(|c2|, |2 c2 - c1|)`` with dual ``max(|c1+c2|, |3 c1+c2|)``."""
    vertices = [(3.0, 1.0), (1.0, 1.0), (-3.0, -1.0), (-1.0, -1.0)]
    return PolygonPair(vertices, [(0.0, 1.0), (-1.0, 2.0)], name="gallery-skew")
