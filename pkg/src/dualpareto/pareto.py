"""Generic Pareto engines that only rely on the :class:`NormPair` contract.

The sub-frontier ``h(x) = |c - proj_x(c, x)|_Y`` is read off from Euclidean
projections.  The frontier ``f(x) = min |c - a|_Y over |a|_X <= x`` needs its
own solver: a pair may supply an exact ``frontier_point`` hook, otherwise
Frank-Wolfe with the ``dual_argmax`` oracle is used.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .core import (Decomposition, InputError, NormPair, NotTightError,
                   PreconditionError, SolverError, as_vec, bisect_radius,
                   check_x2)

DEFAULT_GRID = 256


@dataclass(frozen=True)
class ParetoCurve:
    """Monotone curve stored as ``(x, y)`` points sorted by increasing x."""

    kind: str
    orientation: str
    points: np.ndarray
    breakpoints: tuple[int, ...] | None = None
    flags: tuple[int, ...] = ()

    @property
    def xs(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def ys(self) -> np.ndarray:
        return self.points[:, 1]

    def area(self) -> float:
        """Trapezoid area between the curve and the axes."""
        if len(self.points) < 2:
            return 0.0
        return float(np.trapezoid(self.ys, self.xs))

    def y_at(self, x) -> np.ndarray:
        return np.interp(x, self.xs, self.ys)

    def x_at(self, y) -> np.ndarray:
        # ys decrease along the curve
        return np.interp(y, self.ys[::-1], self.xs[::-1])

    def is_convex(self, tol: float = 1e-9) -> bool:
        x, y = self.xs, self.ys
        if len(x) < 3:
            return True
        s = np.diff(y) / np.maximum(np.diff(x), 1e-300)
        return bool(np.all(np.diff(s) >= -tol))


@dataclass(frozen=True)
class SlopeDecomposition:
    components: list
    xs: list
    ys: list
    slopes: list

    def pareto_points(self) -> list[tuple[float, float]]:
        """Vertices ``(x_1+..+x_i, y_{i+1}+..+y_r)`` of the frontier."""
        r = len(self.xs)
        return [(float(sum(self.xs[:i])), float(sum(self.ys[i:]))) for i in range(r + 1)]

    def gram_residual(self, pair: NormPair) -> float:
        worst = 0.0
        for i, ci in enumerate(self.components):
            for j in range(i, len(self.components)):
                lhs = pair.inner(ci, self.components[j])
                worst = max(worst, abs(lhs - self.xs[i] * self.ys[j]))
        return worst


@dataclass(frozen=True)
class SVRegion:
    """Region left of ``x = -d h_XY / dy``: exact bars or sampled ``(y, x)``."""

    bars: list | None = None
    sampled: np.ndarray | None = None

    @property
    def kind(self) -> str:
        return "bars" if self.bars is not None else "sampled"

    @property
    def total_area(self) -> float:
        if self.bars is not None:
            return float(sum(h * w for h, w in self.bars))
        y, w = self.sampled[:, 0], self.sampled[:, 1]
        return float(abs(np.trapezoid(w, y)))

    @property
    def height(self) -> float:
        if self.bars is not None:
            return float(self.bars[0][0]) if self.bars else 0.0
        return float(self.sampled[:, 0].max())

    def integral_2y(self) -> float:
        """Integral of ``2y`` over the region; equals ``|c|_2^2``."""
        if self.bars is not None:
            return float(sum(w * h * h for h, w in self.bars))
        y, w = self.sampled[:, 0], self.sampled[:, 1]
        return float(abs(np.trapezoid(2.0 * y * w, y)))


@dataclass(frozen=True)
class TightnessReport:
    sup_gap: float
    area_h: float
    area_f: float
    tight: bool
    area_error: float = 0.0
    h: ParetoCurve | None = field(default=None, compare=False)
    f: ParetoCurve | None = field(default=None, compare=False)


@dataclass(frozen=True)
class AreaReport:
    total: float
    right: float
    above: float
    rectangle: float
    expected_total: float
    expected_right: float
    expected_above: float
    expected_rectangle: float

    def max_rel_error(self) -> float:
        scale = max(self.expected_total, 1e-300)
        return max(abs(self.total - self.expected_total),
                   abs(self.right - self.expected_right),
                   abs(self.above - self.expected_above),
                   abs(self.rectangle - self.expected_rectangle)) / scale


# ---------------------------------------------------------------------------
# single decompositions


def shrink(pair: NormPair, c: Any, x: float) -> np.ndarray:
    """``c - proj_x(c, x)``: the noise part after removing X-radius ``x``."""
    c = as_vec(c)
    return c - pair.proj_x(c, x)


def solve_m2x(pair: NormPair, c: Any, x: float, tol: float = 1e-9) -> Decomposition:
    """X2-decomposition at radius ``x``: ``a = proj_x(c, x)``, ``b = c - a``."""
    c = as_vec(c)
    nx = pair.norm_x(c)
    if x < 0 or x > nx * (1 + 1e-12) + 1e-300:
        raise InputError(f"radius {x} outside [0, {nx}]")
    a = pair.proj_x(c, x) if x < nx else c.copy()
    return check_x2(pair, a, c - a, tol)


def proj_y_radius(pair: NormPair, c: Any, y: float, tol: float = 1e-9) -> Decomposition:
    """2Y-decomposition with ``|b|_Y = y`` found by bisection on the X radius."""
    c = as_vec(c)
    ny = pair.norm_y(c)
    if y < 0 or y > ny * (1 + 1e-12) + 1e-300:
        raise InputError(f"level {y} outside [0, {ny}]")
    x, a = bisect_radius(pair, c, y, tol=tol)
    d = check_x2(pair, a, c - a, max(tol, 1e-9))
    if abs(d.y - y) > max(tol, 1e-7) * max(1.0, ny):
        raise SolverError("bisection did not bracket the requested level")
    return Decomposition(d.a, d.b, d.x, d.y, d.gap, d.certified, {"radius": x})


# ---------------------------------------------------------------------------
# curves


def _x_grid(nx: float, grid) -> np.ndarray:
    if grid is None or np.isscalar(grid):
        n = DEFAULT_GRID if grid is None else int(grid)
        return np.linspace(0.0, nx, max(n, 2))
    g = np.asarray(grid, dtype=float)
    if np.any(np.diff(g) < 0):
        raise InputError("grid must be sorted")
    if g[0] < -1e-12 * max(nx, 1) or g[-1] > nx * (1 + 1e-9) + 1e-12:
        raise InputError("grid leaves [0, |c|_X]")
    return np.clip(g, 0.0, nx)


def subfrontier(pair: NormPair, c: Any, grid=None) -> ParetoCurve:
    """Sample ``h(x) = |c - proj_x(c, x)|_Y`` on a grid of radii."""
    c = as_vec(c)
    nx = pair.norm_x(c)
    if nx == 0:
        return ParetoCurve("subfrontier", "y_of_x", np.zeros((1, 2)))
    xs = _x_grid(nx, grid)
    ys = pair.residual_y_many(c, xs)
    ys[xs >= nx] = 0.0
    return ParetoCurve("subfrontier", "y_of_x", np.column_stack([xs, ys]))


def subfrontier_by_y(pair: NormPair, c: Any, levels=None) -> ParetoCurve:
    """Sample the sub-frontier through ``proj_y`` on a grid of Y-levels."""
    c = as_vec(c)
    ny = pair.norm_y(c)
    if ny == 0:
        return ParetoCurve("subfrontier", "x_of_y", np.zeros((1, 2)))
    if levels is None or np.isscalar(levels):
        n = DEFAULT_GRID if levels is None else int(levels)
        levels = np.linspace(0.0, ny, max(n, 2))
    levels = np.clip(np.asarray(levels, dtype=float), 0.0, ny)
    B = pair.proj_y_many(c, levels)
    xs = np.array([pair.norm_x(c - b) for b in B])
    xs[levels >= ny] = 0.0
    pts = np.column_stack([xs, levels])[::-1]
    return ParetoCurve("subfrontier", "x_of_y", pts)


def _frank_wolfe(pair: NormPair, c, x, a, max_iter, gap_tol):
    scale = max(pair.norm_y(c), 1e-300)
    gap = np.inf
    for _ in range(max_iter):
        r = c - a
        if pair.norm_y(r) == 0:
            return a, 0.0, True
        g = pair.dual_argmax(r)
        s = x * pair.dual_argmax(g)
        d = s - a
        gap = pair.inner(g, d)
        if gap <= gap_tol * scale:
            return a, gap, True
        res = minimize_scalar(lambda t: pair.norm_y(r - t * d), bounds=(0.0, 1.0),
                              method="bounded", options={"xatol": 1e-13})
        t = float(res.x)
        if pair.norm_y(r - d) <= res.fun:
            t = 1.0
        a = a + t * d
    return a, gap, False


def _projected_subgradient(pair: NormPair, c, x, a, iters=2000):
    best, best_val = a, pair.norm_y(c - a)
    step0 = max(x, 1e-12)
    for k in range(1, iters + 1):
        g = pair.dual_argmax(c - a)
        a = pair.proj_x(a + step0 / np.sqrt(k) * g, x)
        val = pair.norm_y(c - a)
        if val < best_val:
            best, best_val = a, val
    return best


def frontier_point(pair: NormPair, c: np.ndarray, x: float, max_iter: int = 500,
                   gap_tol: float = 1e-7) -> tuple[np.ndarray, bool]:
    """Solve ``min |c - a|_Y`` over ``|a|_X <= x``; returns ``(a, converged)``."""
    nx = pair.norm_x(c)
    if x >= nx:
        return c.copy(), True
    if x <= 0:
        return np.zeros_like(c), True
    a = pair.frontier_point(c, x)
    if a is not None:
        return a, True
    a0 = pair.proj_x(c, x)
    a, _, ok = _frank_wolfe(pair, c, x, a0, max_iter, gap_tol)
    if not ok:
        b = _projected_subgradient(pair, c, x, a)
        if pair.norm_y(c - b) < pair.norm_y(c - a):
            a = b
    return a, ok


def frontier(pair: NormPair, c: Any, grid=None, max_iter: int = 500,
             gap_tol: float = 1e-7) -> ParetoCurve:
    """Sample ``f(x) = min |c - a|_Y`` over ``|a|_X <= x``.

    Points where Frank-Wolfe did not reach the gap tolerance are listed in
    ``flags``; their value comes from the better of Frank-Wolfe and a
    projected subgradient run.
    """
    c = as_vec(c)
    nx = pair.norm_x(c)
    if nx == 0:
        return ParetoCurve("frontier", "y_of_x", np.zeros((1, 2)))
    xs = _x_grid(nx, grid)
    ys, flags = [], []
    for i, x in enumerate(xs):
        a, ok = frontier_point(pair, c, x, max_iter, gap_tol)
        ys.append(pair.norm_y(c - a))
        if not ok:
            flags.append(i)
    return ParetoCurve("frontier", "y_of_x", np.column_stack([xs, ys]), flags=tuple(flags))


def tightness_test(pair: NormPair, c: Any, grid=None, tol: float = 1e-6) -> TightnessReport:
    """Compare frontier and sub-frontier on a common grid."""
    c = as_vec(c)
    h = subfrontier(pair, c, grid)
    f = frontier(pair, c, h.xs if len(h.points) > 1 else None)
    gap = h.ys - f.ys
    sup_gap = float(gap.max()) if gap.size else 0.0
    area_h = h.area()
    half = 0.5 * pair.inner(c, c)
    scale = max(pair.norm_y(c), 1e-300)
    return TightnessReport(sup_gap, area_h, f.area(), sup_gap <= tol * scale,
                           abs(area_h - half) / max(half, 1e-300), h, f)


def concat_curves(u: ParetoCurve, v: ParetoCurve) -> ParetoCurve:
    """The concatenation ``u * v``: u lifted by ``v(0)``, then v shifted right."""
    for curve in (u, v):
        p = curve.points
        if p.ndim != 2 or p.shape[1] != 2 or len(p) == 0:
            raise InputError("malformed curve")
        if np.any(np.diff(p[:, 0]) < 0) or np.any(np.diff(p[:, 1]) > 1e-12 * max(1.0, p[0, 1])):
            raise InputError("curves must be decreasing")
        if abs(p[-1, 1]) > 1e-9 * max(1.0, abs(p[0, 1])):
            raise InputError("curves must end at height 0")
    t = u.points[-1, 0]
    top = u.points + np.array([0.0, v.points[0, 1]])
    tail = v.points[1:] + np.array([t, 0.0])
    return ParetoCurve(u.kind, u.orientation, np.vstack([top, tail]))


# ---------------------------------------------------------------------------
# piecewise-linear structure of the sub-frontier


def _runs(xs, ys, slope_tol):
    s = np.diff(ys) / np.diff(xs)
    out, j = [], 0
    while j < len(s):
        k = j
        while k + 1 < len(s) and abs(s[k + 1] - s[j]) <= slope_tol:
            k += 1
        out.append((j, k))
        j = k + 1
    return out


def _pieces(h, lo, hi, n, slope_tol, depth, max_depth):
    # (x0, y0, x1, y1, isolated): isolated pieces are single cells that
    # still straddle a kink after the last refinement
    xs = np.linspace(lo, hi, n + 1)
    ys = h(xs)
    pieces = []
    for j, k in _runs(xs, ys, slope_tol):
        if j == k and depth < max_depth:
            pieces.extend(_pieces(h, xs[j], xs[j + 1], 10, slope_tol, depth + 1, max_depth))
        else:
            pieces.append((xs[j], ys[j], xs[k + 1], ys[k + 1], j == k))
    return pieces


def _slope(q):
    return (q[3] - q[1]) / (q[2] - q[0])


def linear_breakpoints(h, lo: float, hi: float, slope_tol: float,
                       n: int = DEFAULT_GRID, max_depth: int = 3) -> np.ndarray:
    """Vertices of a piecewise-linear function sampled through ``h``.

    Cells whose slope matches a neighbour are grouped into lines; isolated
    cells are refined tenfold (recursively) and kinks are recovered as
    intersections of adjacent lines.  Returns an ``(r+1, 2)`` array of
    vertices including both endpoints.
    """
    raw = _pieces(h, lo, hi, n, slope_tol, 0, max_depth)
    lines = [p for p in raw if not p[4]] or raw
    merged = [list(lines[0][:4])]
    for p in lines[1:]:
        q = merged[-1]
        if abs(_slope(p) - _slope(q)) <= slope_tol:
            q[2], q[3] = p[2], p[3]
        else:
            merged.append(list(p[:4]))
    verts = [(lo, float(h(np.array([lo]))[0]))]
    for q, p in zip(merged[:-1], merged[1:]):
        s_q, s_p = _slope(q), _slope(p)
        xk = (p[1] - q[1] + s_q * q[0] - s_p * p[0]) / (s_q - s_p)
        xk = min(max(xk, q[0]), p[2])
        verts.append((xk, q[1] + s_q * (xk - q[0])))
    verts.append((hi, float(h(np.array([hi]))[0])))
    return np.array(verts)


def subfrontier_vertices(pair: NormPair, c: Any, n: int = DEFAULT_GRID) -> np.ndarray:
    """Vertices ``(x_k, y_k)`` of a piecewise-linear sub-frontier."""
    c = as_vec(c)
    nx, ny = pair.norm_x(c), pair.norm_y(c)

    def h(xs):
        A = pair.proj_x_many(c, xs)
        return np.array([pair.norm_y(c - a) for a in A])

    verts = linear_breakpoints(h, 0.0, nx, 1e-5 * ny / nx, n)
    verts[0] = (0.0, ny)
    verts[-1] = (nx, 0.0)
    return verts


def slope_decomposition(pair: NormPair, c: Any, tol: float = 1e-6,
                        n: int = DEFAULT_GRID, check_tight: bool = True) -> SlopeDecomposition:
    """Slope decomposition from the breakpoints of the sub-frontier.

    Components are ``proj_x(c, z_i) - proj_x(c, z_{i-1})`` at consecutive
    breakpoints ``z_i``.  Raises :class:`NotTightError` when frontier and
    sub-frontier differ.
    """
    c = as_vec(c)
    if not np.any(c):
        raise PreconditionError("zero vector has no slope decomposition")
    if check_tight:
        rep = tightness_test(pair, c, 65, tol)
        if not rep.tight:
            raise NotTightError(f"not tight: sup gap {rep.sup_gap:.3g}")
    verts = subfrontier_vertices(pair, c, n)
    zs = verts[1:, 0]
    nx = pair.norm_x(c)
    points = [np.zeros_like(c)] + [pair.proj_x(c, z) for z in zs[:-1]] + [c]
    comps = [points[i + 1] - points[i] for i in range(len(zs))]
    xs = [pair.norm_x(v) for v in comps]
    ys = [pair.norm_y(v) for v in comps]
    slopes = [y / x for x, y in zip(xs, ys)]
    dec = SlopeDecomposition(comps, xs, ys, slopes)
    scale = nx * pair.norm_y(c)
    if dec.gram_residual(pair) > tol * scale or np.any(np.diff(slopes) >= 0):
        raise SolverError("breakpoint detection unstable")
    return dec


def bars_from_vertices(verts: np.ndarray) -> list[tuple[float, float]]:
    """Bars ``(height, width)`` of the region left of ``x = -d h_XY/dy``.

    On the segment from vertex k-1 to k the step value is
    ``(x_k - x_{k-1}) / (y_{k-1} - y_k)``; bar widths are its increments and
    bar heights are the upper ends ``y_{k-1}``.
    """
    bars, prev = [], 0.0
    for (x0, y0), (x1, y1) in zip(verts[:-1], verts[1:]):
        w = (x1 - x0) / (y0 - y1)
        bars.append((float(y0), float(w - prev)))
        prev = w
    return bars


def sv_region(pair: NormPair, c: Any, grid=None) -> SVRegion:
    """Singular value region of ``c``.

    Pairs with a piecewise-linear sub-frontier give exact bars (widths may be
    negative when ``c`` is not tight); other pairs give central differences
    of the sampled sub-frontier.
    """
    c = as_vec(c)
    if not np.any(c):
        return SVRegion(bars=[])
    if pair.piecewise_linear:
        n = DEFAULT_GRID if grid is None or not np.isscalar(grid) else int(grid)
        return SVRegion(bars=bars_from_vertices(subfrontier_vertices(pair, c, n)))
    h = subfrontier(pair, c, grid)
    return SVRegion(sampled=sampled_region(h.xs, h.ys))


def sampled_region(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """``(y, -dx/dy)`` pairs from curve samples, by central differences."""
    order = np.argsort(ys)
    y, x = ys[order], xs[order]
    keep = np.concatenate([[True], np.diff(y) > 0])
    y, x = y[keep], x[keep]
    return np.column_stack([y, -np.gradient(x, y)])


def area_checks(pair: NormPair, c: Any, x0: float, grid=1024) -> AreaReport:
    """Trapezoid areas cut out of the sub-frontier by the point over ``x0``."""
    c = as_vec(c)
    nx = pair.norm_x(c)
    if x0 < 0 or x0 > nx * (1 + 1e-12):
        raise InputError(f"x0 {x0} outside [0, {nx}]")
    x0 = min(x0, nx)
    xs = np.union1d(_x_grid(nx, grid), [x0])
    curve = subfrontier(pair, c, xs)
    a = pair.proj_x(c, x0) if x0 < nx else c.copy()
    b = c - a
    y0 = float(curve.y_at(x0))
    left = xs <= x0
    right = xs >= x0
    above = float(np.trapezoid(curve.ys[left] - y0, xs[left])) if left.sum() > 1 else 0.0
    rightarea = float(np.trapezoid(curve.ys[right], xs[right])) if right.sum() > 1 else 0.0
    return AreaReport(curve.area(), rightarea, above, x0 * y0,
                      0.5 * pair.inner(c, c), 0.5 * pair.inner(b, b),
                      0.5 * pair.inner(a, a), pair.inner(a, b))
