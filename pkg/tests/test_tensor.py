import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dualpareto import tensor as tz
from dualpareto.core import InputError, PreconditionError

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False, allow_subnormal=False)


def brute_222(T, n=2001):
    # grid of unit vectors in the first two modes; the best third factor
    # is the normalized contraction, so its value is a Euclidean norm
    th = np.linspace(0, np.pi, n)
    U = np.stack([np.cos(th), np.sin(th)], axis=1)
    vals = np.einsum("ijk,ai,bj->abk", T, U, U)
    return float(np.sqrt((vals ** 2).sum(axis=2)).max())


def test_outer_and_contractions():
    T = tz.outer([1.0, 2.0], [0.0, 1.0], [3.0, 1.0])
    assert T.shape == (2, 2, 2) and T[1, 1, 0] == 6
    assert tz.contract_all(T, [[1, 0], [0, 1], [1, 0]]) == 3
    np.testing.assert_allclose(tz.contract_except(T, [[1, 0], [0, 1], None], 2), [3, 1])


def test_spectral_norm_of_matrix_is_svd(rng):
    for _ in range(5):
        A = rng.normal(size=(4, 3))
        assert tz.spectral_norm(A).value == pytest.approx(np.linalg.norm(A, 2), abs=1e-10)


@pytest.mark.parametrize("t", [-2.0, -1.0, 0.0, 1 / 3, 1.0, 2.0, 3.0])
def test_ft_sigma_closed_form(t):
    res = tz.spectral_norm(tz.f_t(t))
    assert res.value == pytest.approx(tz.ft_sigma(t), abs=1e-6)
    assert tz.contract_all(tz.f_t(t), res.factors) == pytest.approx(res.value, abs=1e-9)


@pytest.mark.parametrize("t", [-0.5, 0.0, 0.7, 1.5])
def test_ft_sigma_brute_force(t):
    # grid lower bound, accurate to the grid spacing squared
    assert brute_222(tz.f_t(t)) == pytest.approx(tz.ft_sigma(t), abs=2e-5)


@settings(max_examples=15)
@given(T=arrays(float, (2, 2, 2), elements=finite))
def test_spectral_norm_vs_grid(T):
    v = tz.spectral_norm(T, starts=16).value
    b = brute_222(T, 721)
    assert v >= b - 1e-9
    assert v <= b + 1e-3 * (1 + np.abs(T).sum())


@given(T=arrays(float, (2, 3, 2), elements=finite))
def test_spectral_below_euclid(T):
    v = tz.spectral_norm(T, starts=8).value
    assert v <= np.linalg.norm(T) + 1e-9
    # the unfolding spectral norm is an upper bound too
    assert v <= np.linalg.norm(T.reshape(2, -1), 2) + 1e-9


@pytest.mark.parametrize("t", [1 / 3, 0.5, 1.0, 2.0])
def test_nuclear_sandwich_closes(t):
    s = tz.ft_nuclear_sandwich(t)
    assert s.upper == pytest.approx(s.lower, abs=1e-9)
    assert s.upper == pytest.approx(tz.ft_nuclear(t), abs=1e-9)
    assert s.pairing == pytest.approx(2 + 2 * t, abs=1e-12)
    # the lower bound with the numerically computed spectral norm
    sig = tz.spectral_norm(tz.f_t(s.s)).value
    assert s.pairing / sig == pytest.approx(s.upper, abs=1e-6)


def test_nuclear_sandwich_range():
    with pytest.raises(InputError):
        tz.ft_nuclear_sandwich(0.2)


def test_ft_subfrontier_endpoints():
    h = tz.ft_subfrontier(1024)
    assert h.xs[0] == pytest.approx(0) and h.ys[0] == pytest.approx(2 / math.sqrt(3))
    assert h.xs[-1] == pytest.approx(3) and h.ys[-1] == pytest.approx(0)
    assert h.y_at(2.0) == pytest.approx(0.25)
    assert h.is_convex(1e-9)
    # area under the sub-frontier is half the squared norm
    assert h.area() == pytest.approx(1.5, abs=1e-4)


def test_ft_sv_region():
    r = tz.ft_sv_region(8192)
    assert r.height == pytest.approx(2 / math.sqrt(3), abs=2e-2)
    assert r.total_area == pytest.approx(3, abs=2e-2)
    assert r.integral_2y() == pytest.approx(3, abs=2e-2)


@pytest.mark.parametrize("build,args", [
    (tz.T_pqr, (2, 2, 2)), (tz.T_pqr, (2, 2, 3)),
    (tz.det_n, (2,)), (tz.det_n, (3,)), (tz.perm_n, (2,)), (tz.perm_n, (3,)),
])
def test_known_tensors_unitangent(build, args):
    k = build(*args)
    assert np.sum(k.T ** 2) == pytest.approx(k.euclid_sq, abs=1e-12)
    assert k.sigma * k.nuclear == pytest.approx(k.euclid_sq, abs=1e-9)
    assert tz.spectral_norm(k.T, starts=16).value == pytest.approx(k.sigma, abs=1e-6)


def test_known_tensor_size_guard():
    with pytest.raises(InputError):
        tz.T_pqr(5, 5, 5)
    with pytest.raises(InputError):
        tz.det_n(7)


def test_is_simple():
    assert tz.is_simple(tz.outer([1, 2], [3, 1], [1, 1]))
    assert not tz.is_simple(tz.f_t(0))


def _unit(*idx):
    T = np.zeros((2, 2, 2))
    T[idx] = 1.0
    return T


def test_dsvd_to_slope():
    d = tz.DSVD((3.0, 1.0), (_unit(0, 0, 0), _unit(1, 1, 1)))
    dec = tz.dsvd_to_slope(d)
    np.testing.assert_allclose(sum(dec.components), d.tensor())
    assert dec.pareto_points() == [(0, 3), (2, 1), (4, 0)]


def test_dsvd_rejects_nonorthogonal():
    v = tz.outer([1, 0], [1, 0], np.array([1, 1]) / math.sqrt(2))
    with pytest.raises(PreconditionError):
        tz.dsvd_to_slope(tz.DSVD((2.0, 1.0), (_unit(0, 0, 0), v)))
    with pytest.raises(PreconditionError):
        tz.dsvd_to_slope(tz.DSVD((1.0,), (tz.f_t(0) / math.sqrt(3),)))
    with pytest.raises(InputError):
        tz.dsvd_to_slope(tz.DSVD((1.0, 2.0), (_unit(0, 0, 0), _unit(1, 1, 1))))


def test_t_orthogonality():
    vs = [_unit(0, 0, 0), _unit(0, 0, 1)]
    r1 = tz.t_orthogonality_check(vs, 1.0)
    assert r1.passed and r1.max_found == pytest.approx(1, abs=1e-9)
    r2 = tz.t_orthogonality_check(vs, 2.0)
    assert not r2.passed and r2.max_found == pytest.approx(math.sqrt(2), abs=1e-6)
    with pytest.raises(InputError):
        tz.t_orthogonality_check(vs, 0.5)


def test_t_orthogonality_disjoint_supports():
    vs = [_unit(0, 0, 0), _unit(1, 1, 1)]
    assert tz.t_orthogonality_check(vs, 2.0).passed


def _cyclic_table(n):
    return np.add.outer(np.arange(n), np.arange(n)) % n


def _s3_table():
    perms = list(itertools.permutations(range(3)))
    idx = {p: i for i, p in enumerate(perms)}
    return np.array([[idx[tuple(g[h[k]] for k in range(3))] for h in perms] for g in perms])


@pytest.mark.parametrize("n", [2, 3, 5])
def test_cyclic_group_tensor(n):
    T = tz.group_tensor(_cyclic_table(n))
    r = tz.group_algebra_bars([(1, n)], n)
    assert tz.spectral_norm(T, starts=16).value == pytest.approx(r.height, abs=1e-6)
    assert r.integral_2y() == pytest.approx(np.sum(T ** 2))


def test_s3_group_tensor():
    T = tz.group_tensor(_s3_table())
    r = tz.group_algebra_bars([(1, 2), (2, 1)], 6)
    assert r.bars == [(math.sqrt(6), 2.0), (math.sqrt(3), 8.0)]
    assert tz.spectral_norm(T, starts=32).value == pytest.approx(math.sqrt(6), abs=1e-6)
    assert r.integral_2y() == pytest.approx(np.sum(T ** 2))


def test_group_frontier_d6():
    r = tz.group_algebra_bars([(1, 4), (2, 2)], 12)
    assert r.bars == [(math.sqrt(12), 4.0), (math.sqrt(6), 16.0)]
    f = tz.group_algebra_frontier([(1, 4), (2, 2)], 12)
    assert f.points[-1][0] == pytest.approx(4 * math.sqrt(12) + 16 * math.sqrt(6))


def test_group_order_mismatch():
    with pytest.raises(InputError):
        tz.group_algebra_frontier([(1, 1), (1, 1), (2, 1), (3, 1), (3, 1)], 12)
    with pytest.raises(InputError):
        tz.group_tensor([[1, 0], [1, 0]])
