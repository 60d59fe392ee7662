import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linprog, lsq_linear
from scipy.spatial import ConvexHull

from dualpareto import tv1d
from dualpareto.core import InputError, is_unitangent
from dualpareto.pareto import slope_decomposition, subfrontier_vertices

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False, allow_subnormal=False)


def test_operators():
    np.testing.assert_array_equal(tv1d.diff([1, 4, 2]), [3, -2])
    np.testing.assert_array_equal(tv1d.diff_adjoint([3, -2]), [-3, 5, -2])
    np.testing.assert_array_equal(tv1d.integrate([3, -2]), [0, 3, 1])
    assert tv1d.bending([0, 1, 0]) == 4
    with pytest.raises(InputError):
        tv1d.diff([1.0])


@given(a=arrays(float, 5, elements=finite), b=arrays(float, 6, elements=finite))
def test_adjoint_identity(a, b):
    assert tv1d.diff(b) @ a == pytest.approx(b @ tv1d.diff_adjoint(a), abs=1e-9)


def test_norms_example():
    p = tv1d.tv_pair()
    a = np.array([5.0, -2.0, 3.0])
    assert p.norm_x(a) == 5 + 7 + 5 + 3
    assert p.norm_y(a) == 3.0


def _lp_string(c, eps):
    # min sum |D* D a|  s.t. |a - c| <= eps, as an LP in (a, t)
    n = c.size
    M = np.array([tv1d.diff_adjoint(tv1d.diff(e)) for e in np.eye(n)]).T
    m = M.shape[0]
    cost = np.concatenate([np.zeros(n), np.ones(m)])
    A = np.block([[M, -np.eye(m)], [-M, -np.eye(m)]])
    bounds = [(ci - eps, ci + eps) for ci in c] + [(0, None)] * m
    res = linprog(cost, A_ub=A, b_ub=np.zeros(2 * m), bounds=bounds, method="highs")
    return res.fun


def test_taut_string_matches_lp(rng):
    for _ in range(200):
        n = int(rng.integers(2, 9))
        c = np.round(rng.normal(size=n) * 3, 1)
        eps = float(rng.uniform(0, 0.6 * (c.max() - c.min()) + 0.1))
        res = tv1d.taut_string(c, eps)
        assert np.abs(res.b).max() <= eps + 1e-12
        assert res.tv_value == pytest.approx(_lp_string(c, eps), abs=1e-7)


def test_taut_string_flat_when_wide():
    res = tv1d.taut_string([0.0, 3.0, 1.0], 1.5)
    assert res.tv_value == 0
    np.testing.assert_allclose(res.a, 1.5)


def test_taut_string_input_checks():
    with pytest.raises(InputError):
        tv1d.taut_string([1.0, 2.0], -1)
    with pytest.raises(InputError):
        tv1d.taut_string([1.0, 2.0], 1, ends="loose")


def _rof_oracle(y, lam):
    # dual: min |y - D* z|^2 with |z|_inf <= lam, then x = y - D* z
    n = y.size
    Dt = np.array([tv1d.diff_adjoint(e) for e in np.eye(n - 1)]).T
    z = lsq_linear(Dt, y, bounds=(-lam, lam), method="bvls", tol=1e-14).x
    return y - Dt @ z


def test_tv_denoise_matches_dual_oracle(rng):
    for _ in range(100):
        n = int(rng.integers(2, 12))
        y = rng.normal(size=n) * 2
        lam = float(rng.uniform(0, 3))
        np.testing.assert_allclose(tv1d.tv_denoise(y, lam), _rof_oracle(y, lam), atol=1e-8)


def test_tv_denoise_large_is_mean(rng):
    y = rng.normal(size=50)
    np.testing.assert_allclose(tv1d.tv_denoise(y, 1e6), y.mean())


@given(a=arrays(float, 4, elements=finite))
def test_dual_argmax(a):
    p = tv1d.tv_pair()
    w = p.dual_argmax(a)
    assert p.norm_x(w) == pytest.approx(1)
    assert a @ w == pytest.approx(p.norm_y(a), abs=1e-9)


@given(a=arrays(float, 4, elements=finite))
def test_primal_argmax(a):
    p = tv1d.tv_pair()
    if not np.any(tv1d.diff_adjoint(a)):
        return
    w = p.primal_argmax(a)
    assert p.norm_y(w) == pytest.approx(1)
    assert a @ w == pytest.approx(p.norm_x(a), abs=1e-9)


@given(a=arrays(float, 4, elements=finite), t=st.floats(0.05, 0.95))
def test_projection_is_frontier_point(a, t):
    # tight pair: the X projection solves the constrained Y problem
    p = tv1d.tv_pair()
    nx = p.norm_x(a)
    if nx < 1e-6:
        return
    x = t * nx
    u = p.proj_x(a, x)
    v = p.frontier_point(a, x)
    assert p.norm_x(u) <= x * (1 + 1e-9)
    assert p.norm_y(a - u) == pytest.approx(p.norm_y(a - v), abs=1e-7 * (1 + nx))


@given(a=arrays(float, 4, elements=finite), y=st.floats(0, 5))
def test_proj_y_lands_in_ball(a, y):
    p = tv1d.tv_pair()
    b = p.proj_y(a, y)
    assert p.norm_y(b) <= y + 1e-9


def test_slope_decomposition_table_example():
    dec = slope_decomposition(tv1d.tv_pair(), [5.0, -2.0, 3.0])
    ref = [[0.5, 0.5, 0.5], [2, 0, 0], [2.5, -2.5, 2.5]]
    for comp, r in zip(dec.components, ref):
        np.testing.assert_allclose(comp, r, atol=1e-8)
    for comp in dec.components:
        assert is_unitangent(tv1d.tv_pair(), comp, 1e-8)


def test_frontier_sweep_matches_vertices():
    c = np.array([0.0, 5.0, 3.0, 6.0])
    u = tv1d.diff(c)
    verts = subfrontier_vertices(tv1d.tv_pair(), u)
    f = tv1d.tv_frontier(c, verts[:, 1][::-1])
    np.testing.assert_allclose(f.points, verts, atol=1e-6)


def _hull_face_counts(n):
    # vertices of the Y ball: e in {0, +-2}^{n+1} with e_0 = 0, nonconstant
    verts = []
    for s in (2.0, -2.0):
        for bits in itertools.product((0.0, s), repeat=n):
            e = np.array((0.0,) + bits)
            if np.any(e):
                verts.append(np.diff(e))
    V = np.array(verts)
    hull = ConvexHull(V)
    facets = {}
    for eq in np.round(hull.equations, 9):
        key = tuple(eq)
        if key not in facets:
            facets[key] = frozenset(np.flatnonzero(np.abs(V @ eq[:-1] + eq[-1]) < 1e-9))
    faces = set(facets.values())
    frontier = set(faces)
    while frontier:
        new = set()
        for f in frontier:
            for g in facets.values():
                h = f & g
                if h and h not in faces:
                    new.add(h)
        faces |= new
        frontier = new
    counts = [0] * (n + 1)
    for f in faces:
        P = V[list(f)]
        counts[np.linalg.matrix_rank(P[1:] - P[0], tol=1e-9) if len(P) > 1 else 0] += 1
    counts[n] += 1
    return counts


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_face_counts_match_hull(n):
    assert tv1d.face_counts(n) == _hull_face_counts(n)


@pytest.mark.parametrize("n", range(1, 9))
def test_face_counts_match_polynomial(n):
    assert tv1d.face_counts(n) == tv1d.face_polynomial(n)


def test_face_counts_small():
    assert tv1d.face_counts(1) == [2, 1]
    assert tv1d.face_counts(3) == [14, 24, 12, 1]
    with pytest.raises(InputError):
        tv1d.face_counts(13)


@pytest.mark.parametrize("s,u", [
    ((1, 1, 1, -1), (0, 0, -2)),
    ((1, 0, 0, -1), (-2 / 3, -2 / 3, -2 / 3)),
    ((-1, 1, 0, -1), (2, -1, -1)),
    ((-1, 0, 1, 1), (1, 1, 0)),
])
def test_unitangent_from_signature(s, u):
    np.testing.assert_allclose(tv1d.unitangent_from_signature(s), u, atol=1e-12)


def test_signature_rejects_single_sign():
    with pytest.raises(InputError):
        tv1d.unitangent_from_signature((1, 0, 1))


@given(s=st.lists(st.sampled_from([-1, 0, 1]), min_size=2, max_size=8))
def test_signature_vectors_are_unitangent(s):
    if 1 not in s or -1 not in s:
        return
    u = tv1d.unitangent_from_signature(s)
    assert is_unitangent(tv1d.tv_pair(), u, 1e-9)
    # the face vector attains the Y norm 1
    assert tv1d.tv_pair().norm_y(u) == pytest.approx(1)


@given(s=st.lists(st.sampled_from([-1, 0, 1]), min_size=2, max_size=8))
def test_signature_vector_lies_on_its_face(s):
    if 1 not in s or -1 not in s:
        return
    e = tv1d.integrate(tv1d.unitangent_from_signature(s))
    e += 1 - e.max()
    s = np.array(s)
    np.testing.assert_allclose(e[s != 0], s[s != 0], atol=1e-12)
    assert np.all(np.abs(e) <= 1 + 1e-12)
