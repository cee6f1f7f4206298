import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from logspectra.errors import DimensionError
from logspectra.testlab import (
    domain_delta,
    fourier_pairing,
    inner,
    l1s_norm,
    laplacian_l2,
    lp_norm,
    make_bump,
    make_domain,
    radial_bessel,
    zero_function,
)


def test_smooth_bump_values(smooth_bump):
    assert float(smooth_bump(0.0)) == pytest.approx(1.0)
    assert float(smooth_bump(1.0)) == 0.0
    assert float(smooth_bump(-1.0)) == 0.0
    assert float(smooth_bump.gradient(0.0)[0]) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("kind", ["smooth-bump", "polynomial-C2-bump", "hat"])
def test_support_is_compact(kind):
    rng = np.random.default_rng(1)
    u = make_bump(kind, [0.2, -0.1], 0.7)
    directions = rng.normal(size=(1000, 2))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    points = np.array([0.2, -0.1]) + directions * rng.uniform(0.7, 3.0, size=(1000, 1))
    assert np.all(u(points) == 0.0)


@pytest.mark.parametrize("kind", ["smooth-bump", "polynomial-C2-bump"])
@pytest.mark.parametrize("x", [0.13, -0.42, 0.71])
def test_laplacian_matches_finite_difference(kind, x):
    u = make_bump(kind, 0.05, 1.0)
    h = 1e-4
    fd = (float(u(x + h)) - 2.0 * float(u(x)) + float(u(x - h))) / h**2
    assert float(u.laplacian(x)) == pytest.approx(fd, abs=1e-6)


def test_laplacian_in_two_dimensions_matches_finite_difference():
    u = make_bump("polynomial-C2-bump", [0.0, 0.0], 1.0)
    x = np.array([0.3, -0.2])
    h = 1e-4
    fd = 0.0
    for e in np.eye(2):
        fd += (float(u(x + h * e)) - 2.0 * float(u(x)) + float(u(x - h * e))) / h**2
    assert float(u.laplacian(x)) == pytest.approx(fd, abs=1e-6)


def test_polynomial_bump_laplacian_is_continuous_at_support_boundary():
    u = make_bump("polynomial-C2-bump", 0.0, 1.0)
    inside = float(u.laplacian(1.0 - 1e-7))
    assert abs(inside) < 1e-5
    assert float(u.laplacian(1.0 + 1e-7)) == 0.0


def test_radial_bessel_limits():
    assert radial_bessel(2, np.array([0.0]))[0] == pytest.approx(1.0)
    assert radial_bessel(1, np.array([math.pi]))[0] == pytest.approx(-1.0)
    # Λ_3(z) = sin z / z
    assert radial_bessel(3, np.array([2.0]))[0] == pytest.approx(math.sin(2.0) / 2.0)


def test_polynomial_fourier_transform_at_origin_is_integral():
    u = make_bump("polynomial-C2-bump", 0.3, 0.6, 2.0)
    assert float(u.fourier_transform(np.array([0.0]))[0]) == pytest.approx(lp_norm(u, 1.0), rel=1e-10)


@pytest.mark.parametrize("rho", [0.5, 3.0, 12.0])
def test_polynomial_transform_matches_quadrature(rho):
    u = make_bump("polynomial-C2-bump", 0.0, 1.0)
    x = np.linspace(-1.0, 1.0, 20001)
    numeric = trapezoid(u(x) * np.cos(rho * x), x)
    assert float(u.fourier_transform(np.array([rho]))[0]) == pytest.approx(numeric, abs=1e-7)


def test_smooth_transform_at_origin_is_integral(smooth_bump):
    assert float(smooth_bump.fourier_transform(np.array([0.0]))[0]) == pytest.approx(lp_norm(smooth_bump, 1.0), rel=1e-10)


def test_hat_transform_is_squared_sinc():
    u = make_bump("hat", 0.0, 0.5)
    rho = 3.0
    expected = 0.5 * (math.sin(rho * 0.25) / (rho * 0.25)) ** 2
    assert float(u.fourier_transform(np.array([rho]))[0]) == pytest.approx(expected)


def test_norms_of_polynomial_bump():
    u = make_bump("polynomial-C2-bump", 0.0, 1.0)
    # ∫(1−x²)³ = 32/35 and ∫(1−x²)⁶ = 2048/3003
    assert lp_norm(u, 1.0) == pytest.approx(32.0 / 35.0, rel=1e-12)
    assert lp_norm(u, 2.0) ** 2 == pytest.approx(2048.0 / 3003.0, rel=1e-12)
    assert inner(u, u) == pytest.approx(2048.0 / 3003.0, rel=1e-12)
    assert laplacian_l2(u) > 0.0


def test_inner_of_disjoint_bumps_is_zero():
    u = make_bump("smooth-bump", -2.0, 0.5)
    v = make_bump("smooth-bump", 2.0, 0.5)
    assert inner(u, v) == 0.0


def test_fourier_pairing_reproduces_inner_product():
    u = make_bump("polynomial-C2-bump", 0.0, 1.0)
    v = make_bump("polynomial-C2-bump", 0.4, 0.8)
    value = fourier_pairing(u, v, lambda rho: np.ones_like(rho))
    assert value == pytest.approx(inner(u, v), abs=1e-8)


def test_l1s_norm_basic_properties(smooth_bump):
    assert l1s_norm(zero_function(1), 0.2) == 0.0
    assert l1s_norm(smooth_bump.scaled(3.0), 0.2) == pytest.approx(3.0 * l1s_norm(smooth_bump, 0.2), rel=1e-12)
    assert l1s_norm(smooth_bump, 0.3) <= l1s_norm(smooth_bump, 0.1)


def test_l1s_norm_of_tiny_bump_is_its_mass():
    u = make_bump("polynomial-C2-bump", 0.0, 1e-4)
    assert l1s_norm(u, 0.25) == pytest.approx(lp_norm(u, 1.0), rel=1e-3)


def test_l1s_norm_two_dimensions_is_monotone():
    u = make_bump("polynomial-C2-bump", [0.5, 0.0], 0.5)
    assert l1s_norm(u, 0.4) <= l1s_norm(u, 0.1) <= lp_norm(u, 1.0)


def test_interval_delta():
    dom = make_domain({"kind": "interval", "a": -1.0, "b": 1.0})
    assert domain_delta(dom, 0.0) == pytest.approx(1.0)
    assert domain_delta(dom, 0.75) == pytest.approx(0.25)
    assert domain_delta(dom, 1.5) == 0.0
    assert dom.diameter == pytest.approx(2.0)


def test_delta_of_node_arrays_is_one_value_per_node():
    interval = make_domain({"kind": "interval", "a": -1.0, "b": 1.0})
    nodes = np.array([[-0.5], [0.0], [0.75]])
    assert interval.delta(nodes).tolist() == pytest.approx([0.5, 1.0, 0.25])
    assert interval.delta(nodes[:, 0]).shape == (3,)
    square = make_domain({"kind": "rectangle", "x": [0.0, 1.0], "y": [0.0, 1.0]})
    assert square.delta(np.array([[0.5, 0.5], [0.1, 0.6]])).tolist() == pytest.approx([0.5, 0.1])


def test_rectangle_delta():
    dom = make_domain({"kind": "rectangle", "x": [0.0, 2.0], "y": [0.0, 1.0]})
    assert domain_delta(dom, [1.0, 0.3]) == pytest.approx(0.3)
    assert domain_delta(dom, [3.0, 0.3]) == 0.0
    values = dom.delta(np.random.default_rng(0).uniform(0.0, 1.0, size=(100, 2)))
    assert np.all(values <= 0.5)
    assert dom.volume == pytest.approx(2.0)


def test_domain_rejects_bad_bounds():
    with pytest.raises(ValueError):
        make_domain({"kind": "interval", "a": 1.0, "b": -1.0})
    with pytest.raises(ValueError):
        make_domain({"kind": "rectangle", "x": [0.0, 1.0]})


def test_make_bump_validation():
    with pytest.raises(ValueError):
        make_bump("smooth-bump", 0.0, 0.0)
    with pytest.raises(ValueError):
        make_bump("gaussian", 0.0, 1.0)
    with pytest.raises(DimensionError):
        make_bump("smooth-bump", [0.0] * 4, 1.0)


def test_dilation_and_shift():
    u = make_bump("smooth-bump", 0.2, 0.5)
    assert float(u.dilated(2.0)(0.8)) == pytest.approx(float(u(0.4)))
    assert float(u.shifted(0.3)(0.5)) == pytest.approx(float(u(0.2)))
