"""Spectral norms of small tensors and closed-form tensor families."""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .core import InputError, PreconditionError, SolverError, as_vec
from .matrix import thin_svd
from .pareto import ParetoCurve, SlopeDecomposition, SVRegion, sampled_region

MAX_SIZE = 10_000


def _seed() -> int:
    return int(os.environ.get("PARETO_SEED", "0"))


def _check_tensor(T) -> np.ndarray:
    T = as_vec(T, "tensor")
    if T.size > MAX_SIZE:
        raise InputError(f"tensor has {T.size} entries, limit is {MAX_SIZE}")
    return T


def outer(*vs) -> np.ndarray:
    """Simple tensor ``v_1 x v_2 x ... x v_d``."""
    out = np.asarray(vs[0], dtype=float)
    for v in vs[1:]:
        out = np.multiply.outer(out, np.asarray(v, dtype=float))
    return out


def contract_except(T: np.ndarray, factors, skip: int) -> np.ndarray:
    """Contract ``T`` with every factor except the one in mode ``skip``."""
    out = T
    # contract from the last mode down so the remaining axes keep their order
    for k in range(T.ndim - 1, -1, -1):
        if k != skip:
            out = np.tensordot(out, factors[k], axes=([k], [0]))
    return out


def contract_all(T: np.ndarray, factors) -> float:
    out = T
    for k in range(T.ndim - 1, -1, -1):
        out = np.tensordot(out, factors[k], axes=([k], [0]))
    return float(out)


@dataclass(frozen=True)
class SpectralResult:
    value: float
    factors: tuple
    start: int

    @property
    def witness(self) -> np.ndarray:
        return outer(*self.factors)


def _hopm(T, factors, iters, tol):
    val = contract_all(T, factors)
    for _ in range(iters):
        for k in range(T.ndim):
            g = contract_except(T, factors, k)
            ng = np.linalg.norm(g)
            if ng == 0:
                return factors, 0.0
            factors[k] = g / ng
        new = contract_all(T, factors)
        if abs(new - val) <= tol * max(1.0, abs(new)):
            val = new
            break
        val = new
    return factors, val


def _unfolding_starts(T):
    # leading left singular vector of each unfolding
    out = []
    for k in range(T.ndim):
        M = np.moveaxis(T, k, 0).reshape(T.shape[k], -1)
        W, s, U = thin_svd(M)
        out.append(W[:, 0].copy())
    return out


def spectral_norm(T, starts: int = 64, iters: int = 200, tol: float = 1e-12) -> SpectralResult:
    """``max <T, v_1 x ... x v_d>`` over unit vectors, by multi-start HOPM.

    Alternating rank-1 power iteration from one unfolding-based start plus
    ``starts`` seeded random starts.  The value is a certified lower bound:
    it is attained by the returned unit simple tensor.  Symmetric 2x2x2
    inputs are also maximized over the symmetric slice ``v x v x v``.
    """
    T = _check_tensor(T)
    if T.ndim < 2:
        raise InputError("spectral norm needs at least two modes")
    if not np.any(T):
        return SpectralResult(0.0, tuple(np.eye(n)[0] for n in T.shape), -1)
    rng = np.random.default_rng(_seed())
    inits = [_unfolding_starts(T)]
    for _ in range(starts):
        inits.append([rng.standard_normal(n) for n in T.shape])
    best = None
    for i, f in enumerate(inits):
        f = [v / np.linalg.norm(v) for v in f]
        f, val = _hopm(T, f, iters, tol)
        if val < 0:
            f[0] = -f[0]
            val = -val
        if best is None or val > best.value + 1e-15:
            best = SpectralResult(float(val), tuple(f), i)
    if T.shape == (2, 2, 2) and is_symmetric(T):
        v, val = symmetric_slice_max(T)
        if val > best.value:
            best = SpectralResult(val, (v, v, v), -1)
    return best


def is_symmetric(T, tol: float = 1e-12) -> bool:
    T = np.asarray(T, dtype=float)
    if len(set(T.shape)) != 1:
        return False
    return all(np.allclose(T, np.transpose(T, p), atol=tol, rtol=0)
               for p in itertools.permutations(range(T.ndim)))


def symmetric_slice_max(T) -> tuple[np.ndarray, float]:
    """Maximize ``|<T, v x v x v>|`` over unit ``v`` in ``R^2`` by an angle scan."""
    T = np.asarray(T, dtype=float)

    def g(theta):
        v = np.array([np.cos(theta), np.sin(theta)])
        return contract_all(T, [v] * T.ndim)

    thetas = np.linspace(0.0, np.pi, 721)
    vals = np.abs([g(t) for t in thetas])
    k = int(np.argmax(vals))
    res = minimize_scalar(lambda t: -abs(g(t)), bounds=(thetas[max(k - 1, 0)], thetas[min(k + 1, 720)]),
                          method="bounded", options={"xatol": 1e-14})
    theta = float(res.x) if -res.fun >= vals[k] else float(thetas[k])
    v = np.array([np.cos(theta), np.sin(theta)])
    val = g(theta)
    if val < 0:
        v = -v if T.ndim % 2 else v
        val = abs(val)
    return v, float(val)


# ---------------------------------------------------------------------------
# the family f_t in R^2 x R^2 x R^2


def f_t(t: float) -> np.ndarray:
    """``e2 e1 e1 + e1 e2 e1 + e1 e1 e2 + t e2 e2 e2``."""
    T = np.zeros((2, 2, 2))
    T[1, 0, 0] = T[0, 1, 0] = T[0, 0, 1] = 1.0
    T[1, 1, 1] = t
    return T


def ft_sigma(t: float) -> float:
    if t >= 2 or t <= -1:
        return abs(t)
    return 2.0 / math.sqrt(3.0 - t)


def ft_nuclear(t: float) -> float:
    if t <= 1.0 / 3.0:
        return 3.0 - t
    return (1.0 + t) ** 1.5 / math.sqrt(t)


def ft_norms(t: float) -> tuple[float, float, float]:
    """``(spectral, nuclear, euclidean)`` norms of ``f_t``."""
    return ft_sigma(t), ft_nuclear(t), float(np.linalg.norm(f_t(t)))


@dataclass(frozen=True)
class NuclearSandwich:
    t: float
    s: float
    upper: float
    lower: float
    pairing: float
    upper_terms: tuple


def ft_nuclear_sandwich(t: float) -> NuclearSandwich:
    """Upper and lower bounds on the nuclear norm of ``f_t`` for ``t >= 1/3``.

    The upper bound sums the lengths of an explicit two-term decomposition
    along ``e1 +- sqrt(t) e2``; the lower bound is ``<f_t, f_s> / |f_s|_sigma``
    with ``s = 2 - 1/t``.
    """
    if t < 1.0 / 3.0:
        raise InputError("the two-term certificate needs t >= 1/3")
    r = math.sqrt(t)
    u = np.array([1.0, r])
    w = np.array([1.0, -r])
    terms = ((1.0 / (2.0 * r), u), (-1.0 / (2.0 * r), w))
    recon = sum(k * outer(v, v, v) for k, v in terms)
    if not np.allclose(recon, f_t(t), atol=1e-12):
        raise SolverError("two-term decomposition does not reproduce f_t")
    upper = sum(abs(k) * np.linalg.norm(v) ** 3 for k, v in terms)
    s = 2.0 - 1.0 / t
    pairing = float(np.vdot(f_t(t), f_t(s)))
    return NuclearSandwich(t, s, float(upper), pairing / ft_sigma(s), pairing,
                           tuple((float(k), tuple(v)) for k, v in terms))


def ft_subfrontier(n: int = 512) -> ParetoCurve:
    """Sub-frontier of ``f_0`` for the nuclear / spectral pair.

    A line from ``(3, 0)`` to ``(2, 1/4)`` for ``t`` in ``[0, 1/3]`` and a
    curved piece up to ``(0, 2/sqrt 3)`` for ``t`` in ``[1/3, 1/2]``.
    """
    t1 = np.linspace(0.0, 1.0 / 3.0, max(n // 2, 2))
    p1 = np.column_stack([(3 - t1) / (t1 + 1), t1 / (1 + t1)])
    t2 = np.linspace(1.0 / 3.0, 0.5, max(n - n // 2, 2))
    x2 = (1 - 2 * t2) * (1 + t2) ** 1.5 / ((1 - t2) ** 2 * np.sqrt(t2))
    y2 = 2 * t2 ** 2.5 / ((1 - t2) ** 2 * np.sqrt(1 + t2))
    p2 = np.column_stack([x2, y2])
    pts = np.vstack([p1, p2[1:]])
    pts = pts[np.argsort(pts[:, 0], kind="stable")]
    return ParetoCurve("subfrontier", "y_of_x", pts, breakpoints=(int(np.argmin(np.abs(pts[:, 0] - 2.0))),))


def ft_sv_region(n: int = 4096) -> SVRegion:
    h = ft_subfrontier(n)
    return SVRegion(sampled=sampled_region(h.xs, h.ys))


# ---------------------------------------------------------------------------
# known unitangent tensors


@dataclass(frozen=True)
class KnownTensor:
    name: str
    T: np.ndarray
    sigma: float
    nuclear: float
    euclid_sq: float


def T_pqr(p: int, q: int, r: int) -> KnownTensor:
    """``sum e_ij x e_jk x e_ki`` in ``R^pq x R^qr x R^rp``."""
    if min(p, q, r) < 1 or (p * q) * (q * r) * (r * p) > MAX_SIZE:
        raise InputError("T_pqr size out of range")
    T = np.zeros((p * q, q * r, r * p))
    for i, j, k in itertools.product(range(p), range(q), range(r)):
        T[i * q + j, j * r + k, k * p + i] = 1.0
    n = p * q * r
    return KnownTensor(f"T_{p},{q},{r}", T, 1.0, float(n), float(n))


def _perm_tensor(n: int, signed: bool) -> np.ndarray:
    if n < 1 or n ** n > MAX_SIZE:
        raise InputError("order out of range")
    T = np.zeros((n,) * n)
    for tau in itertools.permutations(range(n)):
        sgn = 1.0
        if signed:
            inv = sum(1 for a, b in itertools.combinations(tau, 2) if a > b)
            sgn = -1.0 if inv % 2 else 1.0
        T[tau] = sgn
    return T


def det_n(n: int) -> KnownTensor:
    f = math.factorial(n)
    return KnownTensor(f"det_{n}", _perm_tensor(n, True), 1.0, float(f), float(f))


def perm_n(n: int) -> KnownTensor:
    f = math.factorial(n)
    return KnownTensor(f"perm_{n}", _perm_tensor(n, False), f / n ** (n / 2),
                       float(n ** (n / 2)), float(f))


def known_tensors() -> dict:
    """Constructors for the tensors with stored reference norms."""
    return {"T_pqr": T_pqr, "det": det_n, "perm": perm_n}


# ---------------------------------------------------------------------------
# diagonal SVD


def is_simple(v, tol: float = 1e-10) -> bool:
    """Every unfolding has rank one."""
    v = np.asarray(v, dtype=float)
    for k in range(v.ndim):
        M = np.moveaxis(v, k, 0).reshape(v.shape[k], -1)
        s = thin_svd(M)[1]
        if s.size > 1 and s[1] > tol * max(s[0], 1e-300):
            return False
    return True


@dataclass(frozen=True)
class DSVD:
    lambdas: tuple
    vectors: tuple
    t_orthogonality_level: float = 2.0

    def tensor(self) -> np.ndarray:
        return sum(lam * np.asarray(v, dtype=float) for lam, v in zip(self.lambdas, self.vectors))


def dsvd_to_slope(dsvd: DSVD, tol: float = 1e-9) -> SlopeDecomposition:
    """``u_i = (l_i - l_{i+1}) (w_1 + ... + w_i)`` with ``w_i`` the sum of the unit
    tensors of the i-th distinct singular value."""
    lam = [float(v) for v in dsvd.lambdas]
    vs = [np.asarray(v, dtype=float) for v in dsvd.vectors]
    if not lam or len(lam) != len(vs):
        raise InputError("DSVD needs one unit tensor per singular value")
    if any(b > a for a, b in zip(lam, lam[1:])) or lam[-1] <= 0:
        raise InputError("singular values must be positive and sorted decreasingly")
    for v in vs:
        if abs(np.linalg.norm(v) - 1.0) > tol or not is_simple(v):
            raise PreconditionError("DSVD terms must be simple unit tensors")
    for i, j in itertools.combinations(range(len(vs)), 2):
        if abs(np.vdot(vs[i], vs[j])) > tol:
            raise PreconditionError("DSVD terms must be orthogonal")
    levels, groups = [], []
    for l, v in zip(lam, vs):
        if levels and levels[-1] - l <= tol * levels[0]:
            groups[-1].append(v)
        else:
            levels.append(l)
            groups.append([v])
    levels.append(0.0)
    comps, xs, ys, slopes = [], [], [], []
    acc = np.zeros_like(vs[0])
    k = 0
    for i, g in enumerate(groups):
        acc = acc + sum(g)
        k += len(g)
        step = levels[i] - levels[i + 1]
        comps.append(step * acc)
        xs.append(step * k)
        ys.append(step)
        slopes.append(1.0 / k)
    dec = SlopeDecomposition(comps, xs, ys, slopes)
    for i, j in itertools.combinations_with_replacement(range(len(comps)), 2):
        if abs(np.vdot(comps[i], comps[j]) - xs[i] * ys[j]) > 1e-9 * max(1.0, xs[i] * ys[j]):
            raise PreconditionError("Gram condition fails; terms are not 2-orthogonal")
    return dec


@dataclass(frozen=True)
class OrthogonalityCheck:
    max_found: float
    passed: bool
    witness: tuple


def t_orthogonality_check(vs, t: float, starts: int = 64, iters: int = 300) -> OrthogonalityCheck:
    """Search for a simple unit ``w`` with ``sum |<v_i, w>|^(2/t) > 1``.

    Multi-start ascent with normalized gradient steps in each mode; starts
    include the factors of every ``v_i``.  Passing is a necessary condition
    only.
    """
    if t < 1:
        raise InputError("t must be at least 1")
    vs = [np.asarray(v, dtype=float) for v in vs]
    if not vs or any(v.shape != vs[0].shape for v in vs):
        raise InputError("need simple tensors of one common shape")
    for v in vs:
        if abs(np.linalg.norm(v) - 1.0) > 1e-9 or not is_simple(v):
            raise PreconditionError("inputs must be simple unit tensors")
    p = 2.0 / t
    shape = vs[0].shape

    def value(f):
        s = np.array([contract_all(v, f) for v in vs])
        return float((np.abs(s) ** p).sum()), s

    rng = np.random.default_rng(_seed())
    inits = [_unfolding_starts(v) for v in vs]
    for i, j in itertools.combinations(range(len(vs)), 2):
        inits.append(_unfolding_starts(vs[i] + vs[j]))
    inits += [[rng.standard_normal(n) for n in shape] for _ in range(starts)]
    best, best_f = -np.inf, None
    for f in inits:
        f = [v / np.linalg.norm(v) for v in f]
        val, s = value(f)
        for _ in range(iters):
            for k in range(len(shape)):
                wts = p * np.abs(s) ** (p - 1) * np.sign(s)
                g = sum(c * contract_except(v, f, k) for c, v in zip(wts, vs))
                ng = np.linalg.norm(g)
                if ng == 0:
                    break
                f[k] = g / ng
                val_k, s = value(f)
            new = val_k
            if abs(new - val) <= 1e-14:
                val = new
                break
            val = new
        if val > best:
            best, best_f = val, tuple(f)
    return OrthogonalityCheck(float(best), bool(best <= 1 + 1e-6), best_f)


# ---------------------------------------------------------------------------
# group algebra tensors


def _group_levels(dim_mults, order):
    pairs = [(int(d), int(m)) for d, m in dim_mults]
    if not pairs or any(d < 1 or m < 1 for d, m in pairs):
        raise InputError("dimensions and multiplicities must be positive")
    n = sum(m * d * d for d, m in pairs)
    if order is not None and n != order:
        raise InputError(f"sum of m_d d^2 is {n}, not the group order {order}")
    lam: dict = {}
    for d, m in pairs:
        v = math.sqrt(n / d)
        lam[v] = lam.get(v, 0) + m * d ** 3
    return lam


def group_algebra_frontier(dim_mults, order: int | None = None) -> ParetoCurve:
    """Exact frontier of the group algebra tensor from representation data.

    ``dim_mults`` lists ``(d, m_d)``: ``m_d`` irreducible representations of
    dimension ``d``.  Singular value ``sqrt(n/d)`` has multiplicity
    ``m_d d^3`` and ``x(y) = sum m_d d^3 max(sqrt(n/d) - y, 0)``.
    """
    lam = _group_levels(dim_mults, order)
    levels = sorted(lam, reverse=True)
    pts = [(float(sum(w * max(v - y, 0.0) for v, w in lam.items())), y)
           for y in levels + [0.0]]
    return ParetoCurve("frontier", "x_of_y", np.array(pts),
                       breakpoints=tuple(range(1, len(pts) - 1)))


def group_algebra_bars(dim_mults, order: int | None = None) -> SVRegion:
    lam = _group_levels(dim_mults, order)
    return SVRegion(bars=[(v, float(lam[v])) for v in sorted(lam, reverse=True)])


def group_tensor(mult_table) -> np.ndarray:
    """``T_G = sum e_g x e_h x e_(gh)^-1`` from a multiplication table ``gh``."""
    tab = np.asarray(mult_table, dtype=int)
    n = tab.shape[0]
    if tab.shape != (n, n) or n ** 3 > MAX_SIZE:
        raise InputError("bad multiplication table")
    ident = [e for e in range(n) if np.all(tab[e] == np.arange(n))]
    if not ident:
        raise InputError("table has no identity")
    inv = np.array([int(np.flatnonzero(tab[g] == ident[0])[0]) for g in range(n)])
    T = np.zeros((n, n, n))
    for g in range(n):
        for h in range(n):
            T[g, h, inv[tab[g, h]]] = 1.0
    return T
