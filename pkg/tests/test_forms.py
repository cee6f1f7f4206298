import math

import numpy as np
import pytest

from logspectra.constants import kappa_delta
from logspectra.forms import (
    delta_split,
    elementary_bounds_check,
    elementary_slacks,
    energy_log,
    energy_s,
    expansion_residuals,
    fourier_form,
    h00_product,
    kernel_mass_check,
)
from logspectra.testlab import inner, make_bump, zero_function


def test_zero_function_has_zero_energy(smooth_bump):
    assert energy_s(zero_function(1), smooth_bump, 0.2).value == 0.0
    assert energy_log(smooth_bump, zero_function(1)).value == 0.0


@pytest.mark.parametrize("s", [0.05, 0.25, 0.6])
def test_energy_is_nonnegative_and_matches_fourier(smooth_bump, s):
    value = energy_s(smooth_bump, smooth_bump, s).value
    assert value > 0.0
    assert value == pytest.approx(fourier_form(smooth_bump, smooth_bump, "power", s), rel=1e-7)


def test_energy_of_distinct_bumps_matches_fourier(smooth_bump, poly_bump):
    value = energy_s(smooth_bump, poly_bump, 0.15).value
    assert value == pytest.approx(fourier_form(smooth_bump, poly_bump, "power", 0.15), abs=1e-7)


def test_energy_is_symmetric(smooth_bump, poly_bump):
    a = energy_s(smooth_bump, poly_bump, 0.2).value
    b = energy_s(poly_bump, smooth_bump, 0.2).value
    assert a == pytest.approx(b, abs=1e-10)


def test_energy_is_bilinear(smooth_bump, poly_bump):
    s = 0.1
    combined = energy_s(smooth_bump.scaled(2.0), poly_bump, s).value
    assert combined == pytest.approx(2.0 * energy_s(smooth_bump, poly_bump, s).value, abs=1e-8)


def test_energy_of_disjoint_supports_is_negative():
    u = make_bump("smooth-bump", -1.0, 0.5)
    v = make_bump("polynomial-C2-bump", 1.5, 0.5)
    assert energy_s(u, v, 0.2).value < 0.0
    assert energy_log(u, v).value < 0.0


def test_energy_tends_to_l2_norm_as_s_vanishes(poly_bump):
    mass = inner(poly_bump, poly_bump)
    assert energy_s(poly_bump, poly_bump, 1e-4).value == pytest.approx(mass, rel=1e-3)


def test_log_energy_matches_fourier(smooth_bump, poly_bump):
    for u, v in [(smooth_bump, smooth_bump), (smooth_bump, poly_bump)]:
        value = energy_log(u, v).value
        assert value == pytest.approx(fourier_form(u, v, "log"), abs=1e-7)


def test_log_energy_parts_add_up(poly_bump):
    result = energy_log(poly_bump, poly_bump)
    assert sum(result.parts.values()) == pytest.approx(result.value)
    assert result.parts["h00"] == pytest.approx(h00_product(poly_bump, poly_bump).value, abs=1e-7)


def test_log_energy_is_the_derivative_of_the_energy(smooth_bump):
    s = 1e-4
    quotient = (energy_s(smooth_bump, smooth_bump, s).value - inner(smooth_bump, smooth_bump)) / s
    assert quotient == pytest.approx(energy_log(smooth_bump, smooth_bump).value, rel=1e-2)


def test_log_energy_in_two_dimensions_uses_fourier_side():
    u = make_bump("polynomial-C2-bump", [0.0, 0.0], 1.0)
    result = energy_log(u, u)
    assert result.value == pytest.approx(fourier_form(u, u, "log"))
    assert "fourier" in result.parts


@pytest.mark.parametrize("delta", [0.1, 0.3, 0.9])
@pytest.mark.parametrize("s", [0.05, 0.25])
def test_delta_split_reconstructs_energy(smooth_bump, poly_bump, s, delta):
    split = delta_split(smooth_bump, poly_bump, s, delta)
    assert split.kappa_mass == pytest.approx(kappa_delta(1, s, delta))
    assert split.reconstruct() == pytest.approx(energy_s(smooth_bump, poly_bump, s).value, abs=1e-8)


def test_delta_split_rejects_bad_delta(smooth_bump):
    with pytest.raises(ValueError):
        delta_split(smooth_bump, smooth_bump, 0.1, 1.0)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_kernel_mass_matches_closed_form(N):
    numeric, closed = kernel_mass_check(N, 0.2, 0.4)
    assert numeric == pytest.approx(closed, rel=1e-10)


def test_kappa_delta_in_one_dimension():
    assert kappa_delta(1, 0.5, 1.0) == pytest.approx(2.0 / math.pi)


@pytest.mark.parametrize("kind", ["smooth-bump", "polynomial-C2-bump"])
@pytest.mark.parametrize("s", [0.01, 0.05, 0.1])
def test_expansion_residuals_are_nonnegative(kind, s):
    first, second = expansion_residuals(make_bump(kind, 0.2, 0.7), s)
    assert first >= 0.0
    assert second >= 0.0


def test_expansion_residuals_need_a_c2_function():
    with pytest.raises(ValueError):
        expansion_residuals(make_bump("hat", 0.0, 1.0), 0.1)


def test_elementary_slacks_vanish_at_one():
    first, second = elementary_slacks([1.0], 0.2)
    assert first[0] == 0.0
    assert second[0] == 0.0


def test_elementary_quotient_outside_unit_ball():
    s, r = 0.25, math.e
    first, _ = elementary_slacks([r], s)
    quotient = math.expm1(2.0 * s) / s
    assert quotient == pytest.approx(2.5948851, abs=1e-6)
    assert first[0] == pytest.approx(2.0 * r**4 - quotient)


@pytest.mark.parametrize("s", [0.01, 0.05, 0.1, 0.2, 0.25])
def test_elementary_bounds_hold_on_random_radii(s):
    r = 10.0 ** np.random.default_rng(3).uniform(-3.0, 3.0, size=1000)
    assert elementary_bounds_check(r, s) >= 0.0


def test_elementary_slacks_reject_nonpositive_radii():
    with pytest.raises(ValueError):
        elementary_slacks([0.0, 1.0], 0.1)
