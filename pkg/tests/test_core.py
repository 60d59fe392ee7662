import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dualpareto import core
from dualpareto.core import InputError
from dualpareto.l1 import l1_pair
from dualpareto.matrix import nuclear_spectral_pair
from dualpareto.tv1d import tv_pair

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
vec2 = arrays(float, 2, elements=finite)
vec5 = arrays(float, 5, elements=finite)

PAIRS_2D = {
    "l1": l1_pair(2),
    "ellipse": core.gallery_ellipse_pair(),
    "skew": core.gallery_skew_pair(),
    "tv": tv_pair(2),
}


def test_inner_examples():
    assert core.inner([1, 0], [0, 1]) == 0
    assert core.inner([2, 1], [1, 2]) == 4
    assert core.inner([1, 1, 1], [1, 1, 1]) == 3


def test_inner_dimension_mismatch():
    with pytest.raises(InputError):
        core.inner([1, 2], [1, 2, 3])


def test_as_vec_rejects_empty_and_nonfinite():
    with pytest.raises(InputError):
        core.as_vec([])
    with pytest.raises(InputError):
        core.as_vec([1.0, np.nan])


def test_slope_mu():
    p = l1_pair()
    assert core.slope_mu(p, np.eye(7)[0]) == 1
    assert core.slope_mu(p, np.ones(7)) == pytest.approx(1 / 7)
    assert core.slope_mu(nuclear_spectral_pair(), np.eye(2)) == pytest.approx(0.5)
    with pytest.raises(InputError):
        core.slope_mu(p, np.zeros(3))


def test_is_unitangent():
    p = l1_pair()
    assert core.is_unitangent(p, np.ones(6))
    assert not core.is_unitangent(p, [2.0, 1.0])
    q, _ = np.linalg.qr(np.random.default_rng(0).normal(size=(3, 3)))
    assert core.is_unitangent(nuclear_spectral_pair(), 2.5 * q)


def test_check_x2_examples():
    e = core.gallery_ellipse_pair()
    d = core.check_x2(e, [2, 1], [1, 2])
    assert d.gap == pytest.approx(0, abs=1e-12) and d.certified
    d = core.check_x2(l1_pair(), [3.0, 4.0], [0.0, 0.0])
    assert d.certified
    d = core.check_x2(l1_pair(), [1, 0], [0, 1])
    assert d.gap == 1 and not d.certified
    np.testing.assert_array_equal(d.c, [1, 1])


def test_gsparse_examples():
    assert core.gsparse("l1_X", [-1, 2, 4, 1, -2, 1, -1]) == 7
    assert core.gsparse("l1_Y", [2, 0, 0]) == 3
    assert core.gsparse("tv_Y", [1, 1, 2, 2, 2, 5]) == 3
    with pytest.raises(InputError):
        core.gsparse("nuclear_X", [1.0])


def test_gallery_values():
    e = core.gallery_ellipse_pair()
    s = core.gallery_skew_pair()
    assert e.norm_x([3, 3]) == pytest.approx(np.sqrt(22.5))
    assert s.norm_x([3, 12]) == 21
    assert s.norm_y([3, 12]) == 21


@pytest.mark.parametrize("name", list(PAIRS_2D))
@given(u=vec2, v=vec2)
def test_generalized_cauchy_schwarz(name, u, v):
    p = PAIRS_2D[name]
    assert u @ v <= p.norm_x(u) * p.norm_y(v) + 1e-9 * (1 + np.abs(u).sum() * np.abs(v).sum())


@pytest.mark.parametrize("name", list(PAIRS_2D))
@given(g=vec2)
def test_dual_argmax_attains(name, g):
    p = PAIRS_2D[name]
    w = p.dual_argmax(g)
    assert p.norm_x(w) == pytest.approx(1, abs=1e-10)
    assert g @ w == pytest.approx(p.norm_y(g), abs=1e-10 * (1 + np.abs(g).sum()))


@pytest.mark.parametrize("name", list(PAIRS_2D))
@given(v=vec2)
def test_euclid_below_product(name, v):
    p = PAIRS_2D[name]
    assert v @ v <= p.norm_x(v) * p.norm_y(v) * (1 + 1e-12) + 1e-12


@pytest.mark.parametrize("name", list(PAIRS_2D))
@given(v=vec2, w=vec2, s=st.floats(-3, 3))
def test_norm_axioms(name, v, w, s):
    p = PAIRS_2D[name]
    for f in (p.norm_x, p.norm_y):
        assert f(s * v) == pytest.approx(abs(s) * f(v), rel=1e-9, abs=1e-9)
        assert f(v + w) <= f(v) + f(w) + 1e-9
        assert f(v) >= 0


@pytest.mark.parametrize("name", list(PAIRS_2D))
@given(c=vec2, frac=st.just(0.0) | st.floats(1e-6, 1.5))
def test_proj_x_idempotent(name, c, frac):
    p = PAIRS_2D[name]
    x = frac * max(p.norm_x(c), 1e-3)
    a = p.proj_x(c, x)
    assert p.norm_x(a) <= x * (1 + 1e-9) + 1e-12
    np.testing.assert_allclose(p.proj_x(a, x), a, atol=1e-9 * (1 + np.abs(c).max()))


@pytest.mark.parametrize("name", list(PAIRS_2D))
@given(v=vec2, w=vec2, x=st.floats(0.01, 5))
def test_proj_x_nonexpansive(name, v, w, x):
    p = PAIRS_2D[name]
    d = np.linalg.norm(p.proj_x(v, x) - p.proj_x(w, x))
    assert d <= np.linalg.norm(v - w) * (1 + 1e-9) + 1e-9


@pytest.mark.parametrize("name", ["ellipse", "skew", "l1"])
def test_proj_x_matches_boundary_grid(name, rng):
    # brute force: the projection of an outside point lies on the sphere
    # of radius x, which we sample densely in angle
    p = PAIRS_2D[name]
    th = np.linspace(0, 2 * np.pi, 200_001)
    dirs = np.column_stack([np.cos(th), np.sin(th)])
    unit = dirs / np.array([p.norm_x(d) for d in dirs])[:, None]
    for _ in range(10):
        c = rng.normal(size=2) * 4
        x = 0.3 * p.norm_x(c)
        pts = x * unit
        k = np.argmin(((pts - c) ** 2).sum(axis=1))
        a = p.proj_x(c, x)
        assert np.linalg.norm(a - c) <= np.linalg.norm(pts[k] - c) + 1e-9
        assert np.linalg.norm(a - pts[k]) <= 1e-3 * x


def test_polygon_dual_argmax_tie_is_lex_smallest():
    s = core.gallery_skew_pair()
    # g = (0, 1) is maximized by the vertices (3,1), (1,1): the edge between them
    w = s.dual_argmax([0.0, 1.0])
    np.testing.assert_array_equal(w, [1.0, 1.0])


def test_sparseness_report_bound():
    from dualpareto.l1 import soft_threshold
    c = np.array([-1, 2, 4, 1, -2, 1, -1.0])
    for y in (0.5, 1.5, 3.0):
        d = soft_threshold(c, y)
        rep = core.sparseness_report(d.a, d.b)
        assert rep.holds and rep.bound == 8


@given(c=vec5, y=st.floats(0.01, 10))
def test_sparseness_bound_l1(c, y):
    from dualpareto.l1 import soft_threshold
    if not np.any(c):
        return
    d = soft_threshold(c, y)
    rep = core.sparseness_report(d.a, d.b)
    assert rep.gsparse_x + rep.gsparse_y <= rep.bound
