"""Normalisation constants of the fractional and logarithmic Laplacians.

All functions are pure. Gamma-type functions come from :mod:`scipy.special`
in double precision; the test suite checks them against mpmath.
"""
import logging
import math
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import digamma, gamma, gammaln

from .config import get_settings
from .schemas import ConstantSet

logger = logging.getLogger(__name__)

EULER_GAMMA = float(np.euler_gamma)


def _check_dimension(N: int) -> None:
    if int(N) != N or N < 1:
        raise ValueError("dimension N must be a positive integer")


def _check_order(s: float) -> None:
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")


def frac_constant(N: int, s: float) -> float:
    """C_{N,s} = s 4^s Γ(N/2+s) / (π^{N/2} Γ(1−s))."""
    _check_dimension(N)
    _check_order(s)
    return float(s * 4.0**s * gamma(N / 2 + s) / (math.pi ** (N / 2) * gamma(1.0 - s)))


def log_constants(N: int) -> tuple[float, float, float]:
    """Return (C_N, ρ_N, ω_{N−1}) with ω_{N−1} = 2/C_N."""
    _check_dimension(N)
    c_log = float(gamma(N / 2) / math.pi ** (N / 2))
    rho = float(2.0 * math.log(2.0) + digamma(N / 2) - EULER_GAMMA)
    omega = 2.0 / c_log
    return c_log, rho, omega


def riesz_constant(N: int, s: float) -> float:
    """κ_{N,s} of the Riesz kernel F_s(z) = κ_{N,s}|z|^{2s−N}."""
    _check_dimension(N)
    if not 0.0 < s < N / 2:
        raise ValueError("the Riesz kernel needs 0 < s < N/2")
    return float(s * gamma(N / 2 - s) / (4.0**s * math.pi ** (N / 2) * gamma(1.0 + s)))


def kappa_form(N: int) -> float:
    """κ_N = (2π)^{−N} ∫_{B_1} ln²|ξ| dξ; the radial integral ∫_0^1 r^{N−1} ln² r dr is 2/N³."""
    _check_dimension(N)
    omega = log_constants(N)[2]
    return omega * 2.0 / N**3 / (2.0 * math.pi) ** N


def frac_ratio(N: int, s: float) -> float:
    """C_{N,s}/(s C_N) = 4^s Γ(N/2+s)/(Γ(N/2)Γ(1−s)), evaluated through logarithms."""
    _check_dimension(N)
    _check_order(s)
    return float(np.exp(_log_frac_ratio(N, s)))


def frac_ratio_defect(N: int, s: float) -> float:
    return float(-np.expm1(_log_frac_ratio(N, s)))


def _log_frac_ratio(N: int, s: float) -> float:
    return s * math.log(4.0) + gammaln(N / 2 + s) - gammaln(N / 2) - gammaln(1.0 - s)


def estimate_d_bound(N: int, s_grid: Sequence[float]) -> float:
    _check_dimension(N)
    grid = list(s_grid)
    if not grid:
        raise ValueError("s_grid must not be empty")
    if any(not 0.0 < s <= 0.25 for s in grid):
        raise ValueError("s_grid entries must lie in (0, 1/4]")
    return max(abs(frac_ratio_defect(N, s)) / s for s in grid)


def kappa_delta(N: int, s: float, delta: float) -> float:
    """Mass coefficient κ_{δ,s} = C_{N,s} ω_{N−1} δ^{−2s}/(2s) of the δ-decomposition."""
    if not 0.0 < delta:
        raise ValueError("delta must be positive")
    omega = log_constants(N)[2]
    return frac_constant(N, s) * omega * delta ** (-2.0 * s) / (2.0 * s)


def kernel_l2_norm(N: int, s: float, delta: float) -> float:
    if not 0.0 < delta:
        raise ValueError("delta must be positive")
    omega = log_constants(N)[2]
    return frac_constant(N, s) * math.sqrt(omega) * delta ** (-N / 2 - 2.0 * s) / math.sqrt(N + 4.0 * s)


def ball_constant(N: int, s: float, r: float) -> float:
    """D_{r,N}(s) = C_{N,s} ω_{N−1} r^{−2s}/(2s); tends to 1 + (ρ_N − 2 ln r)s."""
    return kappa_delta(N, s, r)


def bk_bound(N: int, s: float, r: float = 1.0) -> float:
    """Lower bound (2/r)^{2s} Γ(1+s)Γ(N/2+s)/Γ(N/2) for λ_{1,s}(B_r)."""
    _check_dimension(N)
    _check_order(s)
    if r <= 0.0:
        raise ValueError("radius must be positive")
    return float((2.0 / r) ** (2.0 * s) * gamma(1.0 + s) * gamma(N / 2 + s) / gamma(N / 2))


def ball_radius_r0(N: int) -> float:
    """r_0 = 2 exp((ψ(N/2) − γ)/2); for N = 1 this is e^{−γ}."""
    _check_dimension(N)
    return float(2.0 * math.exp(0.5 * (digamma(N / 2) - EULER_GAMMA)))


@lru_cache
def gamma_min() -> float:
    result = minimize_scalar(gamma, bounds=(1.0, 2.0), method="bounded", options={"xatol": 1e-12})
    return float(result.fun)


def ball_radius_r1(N: int, s0: float) -> float:
    _check_dimension(N)
    _check_order(s0)
    return float(2.0 * (gamma_min() / gamma(N / 2)) ** (1.0 / (2.0 * s0)))


def constant_set(N: int, s: float | None = None, *, d_grid: Sequence[float] | None = None) -> ConstantSet:
    c_log, rho, omega = log_constants(N)
    grid = list(d_grid) if d_grid is not None else get_settings().d_bound_grid
    result = ConstantSet(
        N=N,
        s=s,
        c_log=c_log,
        rho=rho,
        omega=omega,
        kappa_form=kappa_form(N),
        d_bound=estimate_d_bound(N, grid),
    )
    if s is not None:
        result.c_frac = frac_constant(N, s)
        if s < N / 2:
            result.kappa_riesz = riesz_constant(N, s)
    logger.debug("constants N=%s s=%s: %s", N, s, result)
    return result
