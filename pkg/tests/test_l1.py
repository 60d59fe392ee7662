import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import minimize

from dualpareto import l1
from dualpareto.core import InputError

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False, allow_subnormal=False)


def test_golden_example(example_c):
    d = l1.soft_threshold(example_c, 1.5)
    np.testing.assert_allclose(d.a, [0, 0.5, 2.5, 0, -0.5, 0, 0])
    assert d.x == 3.5 and d.y == 1.5 and d.gap == 0 and d.certified
    dec = l1.l1_slope_decomposition(example_c)
    np.testing.assert_allclose(dec.components[0], [0, 0, 2, 0, 0, 0, 0])
    np.testing.assert_allclose(dec.components[1], [0, 1, 1, 0, -1, 0, 0])
    np.testing.assert_allclose(dec.components[2], [-1, 1, 1, 1, -1, 1, -1])
    assert dec.slopes == [1.0, 1 / 3, 1 / 7]
    assert dec.pareto_points() == [(0, 4), (2, 2), (5, 1), (12, 0)]


def test_levels(example_c):
    lv = l1.l1_levels(example_c)
    assert lv.lambdas == (4.0, 2.0, 1.0) and lv.mults == (1, 2, 4)


def test_frontier_points(example_c):
    f = l1.l1_frontier(example_c)
    np.testing.assert_allclose(f.points, [[0, 4], [2, 2], [5, 1], [12, 0]])


def test_negative_level_rejected():
    with pytest.raises(InputError):
        l1.soft_threshold([1.0], -1)
    with pytest.raises(InputError):
        l1.l1_slope_decomposition([0.0, 0.0])


def test_pair_dimension_guard():
    with pytest.raises(InputError):
        l1.l1_pair(3).norm_x([1.0, 2.0])
    with pytest.raises(InputError):
        l1.l1_pair(0)


def test_dual_argmax_tie_break():
    w = l1.l1_pair().dual_argmax([1.0, -1.0, 0.5])
    # lexicographically smallest maximizer
    np.testing.assert_array_equal(w, [0, -1, 0])


def _proj_oracle(c, x):
    # independent route: split a = p - q with p, q >= 0 and minimize with SLSQP
    n = c.size
    obj = lambda z: 0.5 * np.sum((z[:n] - z[n:] - c) ** 2)
    jac = lambda z: np.concatenate([z[:n] - z[n:] - c, -(z[:n] - z[n:] - c)])
    cons = [{"type": "ineq", "fun": lambda z: x - z.sum(), "jac": lambda z: -np.ones(2 * n)}]
    res = minimize(obj, np.zeros(2 * n), jac=jac, bounds=[(0, None)] * (2 * n),
                   constraints=cons, method="SLSQP", options={"ftol": 1e-14, "maxiter": 500})
    return res.x[:n] - res.x[n:]


def test_projection_matches_qp_oracle(rng):
    for _ in range(30):
        c = rng.normal(size=6) * 3
        x = rng.uniform(0, np.abs(c).sum())
        np.testing.assert_allclose(l1.project_l1_ball(c, [x])[0], _proj_oracle(c, x), atol=1e-6)


@given(c=arrays(float, 6, elements=finite), y=st.floats(0, 12))
def test_soft_threshold_certified(c, y):
    d = l1.soft_threshold(c, y)
    assert d.certified
    np.testing.assert_allclose(d.a + d.b, c)


@given(c=arrays(float, 6, elements=finite))
def test_slope_decomposition_properties(c):
    if not np.any(c):
        return
    dec = l1.l1_slope_decomposition(c)
    np.testing.assert_allclose(sum(dec.components), c, atol=1e-12)
    assert all(np.diff(dec.slopes) < 0)
    assert dec.gram_residual(l1.l1_pair()) <= 1e-9 * (1 + np.abs(c).sum() ** 2)


@given(c=arrays(float, 6, elements=finite), radii=st.lists(st.floats(0, 70), min_size=1, max_size=5))
def test_vectorized_projection_matches_single(c, radii):
    many = l1.project_l1_ball(c, radii)
    for r, row in zip(radii, many):
        np.testing.assert_allclose(row, l1.l1_pair().proj_x(c, r), atol=1e-12)
        assert np.abs(row).sum() <= r + 1e-9


def test_golden_is_fast(example_c):
    t0 = time.perf_counter()
    for _ in range(100):
        l1.soft_threshold(example_c, 1.5)
    assert (time.perf_counter() - t0) / 100 < 1e-3
