"""Jet evaluation against exact values and the finite-difference oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finslerkit import diffcore as dc
from finslerkit import gallery
from finslerkit.errors import OrderCapError

from conftest import GALLERY_SPECS, sample_sites


def test_quadratic_form_second_derivative():
    f = lambda x, y: y[0] * y[0] + y[1] * y[1]
    req = dc.JetRequest((0.0, 0.0), (0.3, -0.2), (0, 0), (2, 0))
    assert dc.jet_eval(f, req).partial((0, 0), (2, 0)) == pytest.approx(2.0, abs=1e-14)


def test_polynomial_mixed_partial():
    f = lambda x, y: x[0] * y[0] * y[0]
    req = dc.JetRequest((1.0, 0.0), (3.0, 0.0), (1, 0), (1, 0))
    assert dc.jet_eval(f, req).partial((1, 0), (1, 0)) == pytest.approx(6.0, abs=1e-14)


def test_funk_mixed_partials_match_fd():
    F = gallery.funk(2).metric
    x, y = (0.21, -0.13), (0.8, 0.55)
    for ox, oy in [((1, 0), (1, 0)), ((0, 1), (0, 2)), ((2, 0), (0, 0)), ((0, 0), (2, 1))]:
        req = dc.JetRequest(x, y, ox, oy)
        jv = dc.jet_eval(F.func, req)
        fv = dc.fd_oracle(F.func, req)
        for key in jv.partials:
            assert jv.partials[key] == pytest.approx(fv.partials[key], abs=1e-6)


def test_fd_quadratic_with_explicit_step():
    f = lambda x, y: y[0] * y[0] + y[1] * y[1]
    req = dc.JetRequest((0.0, 0.0), (1.0, 2.0), (0, 0), (2, 0))
    got = dc.fd_oracle(f, req, step=1e-3).partial((0, 0), (2, 0))
    assert got == pytest.approx(2.0, abs=1e-8)


def test_fd_slab_fourth_order_partials():
    F2 = gallery.slab_kappa(0.5).metric.squared
    th = math.pi / 3.0
    y = (math.cos(th), math.sin(th))
    for oy in [(4, 0), (3, 1), (2, 2), (1, 3), (0, 4)]:
        req = dc.JetRequest((0.0, 0.0), y, (0, 0), oy)
        jv = dc.jet_eval(F2, req).partial((0, 0), oy)
        fv = dc.fd_oracle(F2, req).partial((0, 0), oy)
        assert jv == pytest.approx(fv, abs=1e-5)


def test_fd_constant_field_is_flat():
    f = lambda x, y: 3.25
    req = dc.JetRequest((0.1,), (0.7,), (2,), (2,))
    out = dc.fd_oracle(f, req)
    for key, val in out.partials.items():
        if key != ((0,), (0,)):
            assert val == pytest.approx(0.0, abs=1e-10)


def test_schwarz_symmetry_exact_for_jets():
    F = gallery.funk(2).metric
    x, y = [0.2, 0.1], [0.6, -0.9]
    e0, e1 = [1.0, 0.0], [0.0, 1.0]
    a = dc.directional_derivatives(F.func, x, y, y_dirs=[(e0, 1), (e1, 1)]).partial([1, 1])
    b = dc.directional_derivatives(F.func, x, y, y_dirs=[(e1, 1), (e0, 1)]).partial([1, 1])
    assert a == b


def test_order_caps_rejected():
    with pytest.raises(OrderCapError):
        dc.JetRequest((0.0,), (1.0,), (3,), (0,))
    with pytest.raises(OrderCapError):
        dc.JetRequest((0.0,), (1.0,), (0,), (5,))
    with pytest.raises(ValueError):
        dc.JetRequest((0.0,), (1.0,), (-1,), (0,))


@pytest.mark.parametrize("name,params", GALLERY_SPECS)
def test_euler_homogeneity_on_gallery(name, params):
    entry = gallery.make(name, **params)
    pts, dirs = sample_sites(entry, 100, seed=5)
    for x, y in zip(pts, dirs):
        fv = float(entry.metric(list(x), list(y)))
        res = dc.directional_derivatives(entry.metric.func, list(x), list(y), y_dirs=[(list(y), 1)])
        assert float(res.partial([1])) == pytest.approx(fv, rel=1e-12)


@pytest.mark.parametrize("name,params", GALLERY_SPECS)
def test_jet_matches_fd_on_downstream_orders(name, params):
    # sampled away from the chart boundary, where the metrics are O(1)-scaled
    entry = gallery.make(name, **params)
    pts = entry.metric.domain.sample_points(5, seed=11, shrink=0.5)
    rng = np.random.default_rng([11, 77])
    dirs = rng.normal(size=(5, entry.dim))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    n = entry.dim
    order_sets = [((0,) * n, (2,) + (0,) * (n - 1)),
                  ((0,) * n, (4,) + (0,) * (n - 1)),
                  ((1,) + (0,) * (n - 1), (1,) + (0,) * (n - 1)),
                  ((2,) + (0,) * (n - 1), (0,) * n),
                  ((1,) + (0,) * (n - 1), (0, 2) + (0,) * (n - 2))]
    F2 = entry.metric.squared
    for x, y in zip(pts, dirs):
        for ox, oy in order_sets:
            req = dc.JetRequest(tuple(x), tuple(y), ox, oy)
            jv = dc.jet_eval(F2, req)
            fv = dc.fd_oracle(F2, req)
            for key in jv.partials:
                assert jv.partials[key] == pytest.approx(fv.partials[key], abs=1e-5)


coeff = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


@given(cs=st.lists(coeff, min_size=6, max_size=6),
       x0=st.floats(min_value=-1.0, max_value=1.0),
       y0=st.floats(min_value=-1.0, max_value=1.0))
@settings(max_examples=30, deadline=None)
def test_jets_reproduce_polynomial_partials(cs, x0, y0):
    c0, c1, c2, c3, c4, c5 = cs

    def f(x, y):
        return (c0 + c1 * x[0] + c2 * y[0] + c3 * x[0] * y[0]
                + c4 * y[0] * y[0] + c5 * x[0] * x[0] * y[0])

    req = dc.JetRequest((x0,), (y0,), (2,), (2,))
    jv = dc.jet_eval(f, req)
    assert jv.partial((1,), (0,)) == pytest.approx(c1 + c3 * y0 + 2 * c5 * x0 * y0, abs=1e-12)
    assert jv.partial((0,), (1,)) == pytest.approx(c2 + c3 * x0 + 2 * c4 * y0 + c5 * x0 * x0, abs=1e-12)
    assert jv.partial((1,), (1,)) == pytest.approx(c3 + 2 * c5 * x0, abs=1e-12)
    assert jv.partial((0,), (2,)) == pytest.approx(2 * c4, abs=1e-12)
    assert jv.partial((2,), (1,)) == pytest.approx(2 * c5, abs=1e-12)


@given(a=st.floats(min_value=0.3, max_value=3.0), b=st.floats(min_value=-1.0, max_value=1.0))
@settings(max_examples=30, deadline=None)
def test_jet_analytic_functions_match_derivatives(a, b):
    # d/dt [exp(b t) * sqrt(a + t^2) ] family, checked against fd
    def f(x, y):
        t = y[0]
        return dc.exp(b * t) * dc.sqrt(a + t * t) + dc.log(a + t * t) + dc.sin(b * t) * dc.cos(t)

    req = dc.JetRequest((0.0,), (0.4,), (0,), (3,))
    jv = dc.jet_eval(f, req)
    fv = dc.fd_oracle(f, req)
    for key in jv.partials:
        assert jv.partials[key] == pytest.approx(fv.partials[key], abs=2e-5)


def test_partials_dict_covers_sub_multi_indices():
    f = lambda x, y: x[0] * x[1] * y[0] * y[1]
    req = dc.JetRequest((1.0, 2.0), (3.0, 4.0), (1, 1), (1, 1))
    jv = dc.jet_eval(f, req)
    assert set(jv.partials) == {(ox, oy) for ox in [(0, 0), (0, 1), (1, 0), (1, 1)]
                                for oy in [(0, 0), (0, 1), (1, 0), (1, 1)]}
    assert jv.partial((1, 1), (1, 1)) == pytest.approx(1.0, abs=1e-14)
    assert jv.value == pytest.approx(1.0 * 2.0 * 3.0 * 4.0, abs=1e-14)


def test_domain_failure_propagates_with_location():
    from finslerkit.errors import DomainError

    def field(x, y):
        raise DomainError("outside")

    req = dc.JetRequest((0.25, 0.5), (1.0, 0.0), (1, 0), (0, 0))
    with pytest.raises(DomainError, match=r"x=\(0\.25, 0\.5\)"):
        dc.jet_eval(field, req)


def test_batched_array_coordinates():
    f = lambda x, y: dc.sqrt(y[0] * y[0] + y[1] * y[1])
    ys = [np.linspace(1.0, 2.0, 7), np.full(7, 0.5)]
    xs = [np.zeros(7), np.zeros(7)]
    res = dc.directional_derivatives(f, xs, ys, y_dirs=[([1.0, 0.0], 2)])
    d2 = res.partial([2])
    expect = 0.25 / (ys[0] ** 2 + 0.25) ** 1.5
    np.testing.assert_allclose(d2, expect, atol=1e-12)
