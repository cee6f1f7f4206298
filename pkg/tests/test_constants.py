import math

import mpmath
import numpy as np
import pytest

from logspectra.constants import (
    EULER_GAMMA,
    ball_constant,
    ball_radius_r0,
    ball_radius_r1,
    bk_bound,
    constant_set,
    estimate_d_bound,
    frac_constant,
    frac_ratio,
    frac_ratio_defect,
    gamma_min,
    kappa_delta,
    kappa_form,
    kernel_l2_norm,
    log_constants,
    riesz_constant,
)

mpmath.mp.dps = 40

GRID = [(N, s) for N in (1, 2, 3, 4) for s in (0.01, 0.1, 0.25, 0.5, 0.9)]


def oracle_frac(N, s):
    N, s = mpmath.mpf(N), mpmath.mpf(s)
    return s * 4**s * mpmath.gamma(N / 2 + s) / (mpmath.pi ** (N / 2) * mpmath.gamma(1 - s))


def oracle_riesz(N, s):
    N, s = mpmath.mpf(N), mpmath.mpf(s)
    return s * mpmath.gamma(N / 2 - s) / (4**s * mpmath.pi ** (N / 2) * mpmath.gamma(1 + s))


@pytest.mark.parametrize("N,s", GRID)
def test_frac_constant_matches_oracle(N, s):
    assert frac_constant(N, s) == pytest.approx(float(oracle_frac(N, s)), rel=1e-12)


@pytest.mark.parametrize("N,s", [(N, s) for N, s in GRID if s < N / 2])
def test_riesz_constant_matches_oracle(N, s):
    assert riesz_constant(N, s) == pytest.approx(float(oracle_riesz(N, s)), rel=1e-12)


def test_frac_constant_closed_values():
    assert frac_constant(1, 0.5) == pytest.approx(1.0 / math.pi, rel=1e-14)
    assert frac_constant(2, 0.5) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-14)


def test_log_constants_closed_values():
    c_log, rho, omega = log_constants(1)
    assert c_log == pytest.approx(1.0, rel=1e-14)
    assert omega == pytest.approx(2.0, rel=1e-14)
    assert rho == pytest.approx(-2.0 * EULER_GAMMA, rel=1e-13)
    assert rho == pytest.approx(-1.1544313298, abs=1e-10)

    c_log, rho, _ = log_constants(2)
    assert c_log == pytest.approx(1.0 / math.pi, rel=1e-14)
    assert rho == pytest.approx(2.0 * math.log(2.0) - 2.0 * EULER_GAMMA, rel=1e-13)


@pytest.mark.parametrize("N", [1, 2, 3, 4, 5])
def test_log_constants_match_oracle(N):
    c_log, rho, omega = log_constants(N)
    expected_rho = 2 * mpmath.log(2) + mpmath.digamma(mpmath.mpf(N) / 2) - mpmath.euler
    assert c_log == pytest.approx(float(mpmath.gamma(mpmath.mpf(N) / 2) / mpmath.pi ** (mpmath.mpf(N) / 2)), rel=1e-12)
    assert rho == pytest.approx(float(expected_rho), rel=1e-12, abs=1e-14)
    assert omega * c_log == pytest.approx(2.0, abs=1e-14)


def test_riesz_constant_closed_values():
    assert riesz_constant(1, 0.25) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-13)
    assert riesz_constant(2, 0.5) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-13)


def test_riesz_constant_rejects_order_above_half_dimension():
    with pytest.raises(ValueError):
        riesz_constant(1, 0.5)


@pytest.mark.parametrize("s", [0.0, 1.0, -0.1])
def test_frac_constant_rejects_order_outside_unit_interval(s):
    with pytest.raises(ValueError):
        frac_constant(1, s)


def test_kappa_form_values():
    assert kappa_form(1) == pytest.approx(2.0 / math.pi, rel=1e-14)
    # (2π)^{-2}·2π·2/8
    assert kappa_form(2) == pytest.approx(1.0 / (8.0 * math.pi), rel=1e-14)


@pytest.mark.parametrize("N", [1, 2])
def test_frac_ratio_expansion_is_quadratic(N):
    rho = log_constants(N)[1]
    remainders = [abs(-frac_ratio_defect(N, s) - s * rho) / s**2 for s in (1e-2, 1e-3, 1e-4)]
    # the fitted constant K stays put as s shrinks
    assert max(remainders) / min(remainders) < 2.0
    assert frac_ratio_defect(N, 1e-3) == pytest.approx(1.0 - frac_ratio(N, 1e-3), rel=1e-9)


def test_frac_ratio_tends_to_one():
    assert frac_ratio(1, 1e-8) == pytest.approx(1.0, abs=1e-7)


def test_estimate_d_bound_converges_to_rho():
    N = 2
    rho = abs(log_constants(N)[1])
    estimates = [abs(frac_ratio_defect(N, 0.25 / 2**j)) / (0.25 / 2**j) for j in range(12)]
    assert estimates[-1] == pytest.approx(rho, rel=1e-3)
    assert estimate_d_bound(N, [0.25 / 2**j for j in range(12)]) == pytest.approx(max(estimates))


def test_estimate_d_bound_single_point_is_positive():
    assert estimate_d_bound(1, [0.25]) > 0.0


def test_estimate_d_bound_rejects_bad_grids():
    with pytest.raises(ValueError):
        estimate_d_bound(1, [])
    with pytest.raises(ValueError):
        estimate_d_bound(1, [0.3])


def test_kappa_delta_and_kernel_norm():
    assert kappa_delta(1, 0.5, 1.0) == pytest.approx(2.0 / math.pi, rel=1e-14)
    s, delta = 0.2, 0.3
    expected = frac_constant(2, s) * math.sqrt(2.0 * math.pi) * delta ** (-1.0 - 2.0 * s) / math.sqrt(2.0 + 4.0 * s)
    assert kernel_l2_norm(2, s, delta) == pytest.approx(expected, rel=1e-13)


def test_ball_constant_first_order_expansion():
    N, r, s = 1, 0.7, 1e-5
    rho = log_constants(N)[1]
    assert ball_constant(N, s, r) == pytest.approx(1.0 + (rho - 2.0 * math.log(r)) * s, abs=1e-8)


def test_bk_bound_values():
    assert bk_bound(1, 0.5) == pytest.approx(1.0, rel=1e-14)
    s = 0.1
    expected = 4**s * math.gamma(1 + s) * math.gamma(0.5 + s) / math.gamma(0.5)
    assert bk_bound(1, s) == pytest.approx(expected, rel=1e-13)


def test_ball_radius_r0_in_one_dimension():
    assert ball_radius_r0(1) == pytest.approx(math.exp(-EULER_GAMMA), rel=1e-13)
    assert ball_radius_r0(1) == pytest.approx(0.5614594, abs=1e-7)


def test_bk_bound_at_r0_tends_to_one():
    # (2/r0)^{2s} Γ(1+s)Γ(N/2+s)/Γ(N/2) = 1 + O(s²)
    for N in (1, 2, 3):
        r0 = ball_radius_r0(N)
        assert abs(bk_bound(N, 1e-4, r0) - 1.0) < 1e-6


def test_gamma_min_and_r1():
    assert gamma_min() == pytest.approx(0.8856031944, abs=1e-9)
    r1 = ball_radius_r1(1, 0.1)
    assert bk_bound(1, 0.1, r1) >= 1.0 - 1e-9


def test_constant_set_fields():
    result = constant_set(1, 0.25, d_grid=[0.25, 0.125])
    assert result.c_frac == pytest.approx(frac_constant(1, 0.25))
    assert result.kappa_riesz == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-13)
    assert result.omega * result.c_log == pytest.approx(2.0)
    assert result.d_bound >= 0.0


def test_constant_set_omits_riesz_constant_at_half_dimension():
    result = constant_set(1, 0.5)
    assert result.kappa_riesz is None
    assert result.c_frac == pytest.approx(1.0 / math.pi)


def test_constant_set_uses_grid_from_settings(monkeypatch):
    from logspectra.config import get_settings

    monkeypatch.setenv("D_BOUND_GRID", "0.25")
    get_settings.cache_clear()
    assert constant_set(1).d_bound == pytest.approx(estimate_d_bound(1, [0.25]))
    assert np.isfinite(constant_set(2).d_bound)
