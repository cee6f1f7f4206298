"""Quadratic forms E_s, E_0, the H^0_0 product and the δ-decomposition.

In one dimension the double integrals are reduced to radial integrals of

    D(z) = ∫ (u(x) − u(x+z))(v(x) − v(x+z)) dx = 2⟨u,v⟩ − X(z) − X(−z),
    X(z) = ∫ u(x) v(x+z) dx,

both evaluated with Gauss-Legendre panels split at every kink of the
integrand. In two dimensions the forms are evaluated on the Fourier side.
"""
import logging
import math
from typing import Sequence

import numpy as np

from .config import get_settings
from .constants import frac_constant, kappa_delta, kappa_form, log_constants
from .errors import DimensionError
from .quadrature import integrate, integrate_pieces, panel_rule
from .schemas import DeltaSplit, FormValue
from .testlab import TestFunction, fourier_pairing, inner, laplacian_l2, lp_norm

logger = logging.getLogger(__name__)

# below this fraction of the smaller radius D(ρ)/ρ² is replaced by ∫u'v'
TAYLOR_FRACTION = 1e-5


class _Correlation:
    """Difference and cross correlations of two one-dimensional test functions."""

    def __init__(self, u: TestFunction, v: TestFunction):
        if u.dim != 1 or v.dim != 1:
            raise DimensionError("spatial form evaluation is implemented for N = 1")
        self.u = u
        self.v = v
        self.kinks = sorted(set(u.breakpoints + v.breakpoints))
        self.panel = min(u.radius, v.radius) / 8.0
        self.mass = inner(u, v)
        self.small = TAYLOR_FRACTION * min(u.radius, v.radius)
        x, w = self._rule(self.kinks)
        self.grad_pairing = float(np.sum(w * u.gradient(x)[..., 0] * v.gradient(x)[..., 0]))

    def _rule(self, cuts: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        cuts = sorted(set(cuts))
        edges: list[float] = [cuts[0]]
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b - a <= 0.0:
                continue
            count = max(1, int(math.ceil((b - a) / self.panel)))
            edges.extend(np.linspace(a, b, count + 1)[1:].tolist())
        return panel_rule(edges)

    def d(self, z: float) -> float:
        cuts = self.kinks + [p - z for p in self.kinks]
        x, w = self._rule(cuts)
        du = self.u.value(x) - self.u.value(x + z)
        dv = self.v.value(x) - self.v.value(x + z)
        return float(np.sum(w * du * dv))

    def d_over_sq(self, z: float) -> float:
        if z < self.small:
            return self.grad_pairing
        return self.d(z) / z**2

    def x(self, z: float) -> float:
        lo = max(self.u.center[0] - self.u.radius, self.v.center[0] - self.v.radius - z)
        hi = min(self.u.center[0] + self.u.radius, self.v.center[0] + self.v.radius - z)
        if hi <= lo:
            return 0.0
        cuts = [lo, hi] + [p for p in self.kinks + [q - z for q in self.v.breakpoints] if lo < p < hi]
        x, w = self._rule(cuts)
        return float(np.sum(w * self.u.value(x) * self.v.value(x + z)))

    def x_even(self, z: float) -> float:
        return self.x(z) + self.x(-z)

    def breaks(self, *extra: float, upper: float | None = None) -> list[float]:
        gaps = {abs(p - q) for p in self.kinks for q in self.kinks}
        reach = max(gaps)
        top = reach if upper is None else upper
        cuts = {0.0, top, *[g for g in gaps if 0.0 < g < top], *[e for e in extra if 0.0 < e < top]}
        return sorted(cuts)

    @property
    def reach(self) -> float:
        return max(abs(p - q) for p in self.kinks for q in self.kinks)


def _check_order(s: float) -> None:
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")


def _is_zero(u: TestFunction, v: TestFunction) -> bool:
    return u.amplitude == 0.0 or v.amplitude == 0.0


def fourier_form(u: TestFunction, v: TestFunction, symbol: str = "power", s: float = 0.0, *, cutoff: float | None = None) -> float:
    """(2π)^{−N}∫ m(|ξ|) û v̂ dξ with m = |ξ|^{2s} (``power``) or 2 log|ξ| (``log``)."""
    if symbol == "log":
        return fourier_pairing(u, v, lambda rho: 2.0 * np.log(np.maximum(rho, 1e-300)), cutoff=cutoff)
    return fourier_pairing(u, v, lambda rho: np.power(rho, 2.0 * s), cutoff=cutoff)


def energy_s(u: TestFunction, v: TestFunction, s: float, tol: float | None = None) -> FormValue:
    """E_s(u, v) = C_{N,s}/2 ∬ (u(x)−u(y))(v(x)−v(y))/|x−y|^{N+2s} dx dy."""
    _check_order(s)
    tol = tol if tol is not None else get_settings().quad_tol
    if _is_zero(u, v):
        return FormValue(value=0.0, parts={"near": 0.0, "far": 0.0})
    if u.dim != v.dim:
        raise DimensionError("test functions live in different dimensions")
    if u.dim > 1:
        value = fourier_form(u, v, "power", s)
        return FormValue(value=value, parts={"fourier": value})
    c = frac_constant(1, s)
    corr = _Correlation(u, v)
    breaks = corr.breaks()
    near, err = integrate_pieces(
        lambda z: z ** (-1.0 - 2.0 * s) * corr.d(z),
        breaks,
        tol=tol / c,
        first=corr.d_over_sq,
        first_power=1.0 - 2.0 * s,
        what="E_s near part",
    )
    far = 2.0 * corr.mass * corr.reach ** (-2.0 * s) / (2.0 * s)
    return FormValue(value=c * near + c * far, parts={"near": c * near, "far": c * far}, est_error=c * err)


def h00_product(u: TestFunction, v: TestFunction, tol: float | None = None) -> FormValue:
    """⟨u, v⟩_{H^0_0} = C_N/2 ∬_{|x−y|<1} (u(x)−u(y))(v(x)−v(y))/|x−y|^N dx dy."""
    tol = tol if tol is not None else get_settings().quad_tol
    if _is_zero(u, v):
        return FormValue(value=0.0, parts={"near": 0.0})
    corr = _Correlation(u, v)
    c_log = log_constants(1)[0]
    value, err = integrate_pieces(
        lambda z: corr.d(z) / z,
        corr.breaks(1.0, upper=1.0),
        tol=tol / c_log,
        first=corr.d_over_sq,
        first_power=1.0,
        what="H00 product",
    )
    return FormValue(value=c_log * value, parts={"near": c_log * value}, est_error=c_log * err)


def energy_log(u: TestFunction, v: TestFunction, tol: float | None = None) -> FormValue:
    """E_0(u, v) = ⟨u,v⟩_{H^0_0} − C_N ∬_{|x−y|≥1} u(x)v(y)/|x−y|^N + ρ_N ∫uv."""
    tol = tol if tol is not None else get_settings().quad_tol
    if _is_zero(u, v):
        return FormValue(value=0.0, parts={"h00": 0.0, "far": 0.0, "mass": 0.0})
    if u.dim != v.dim:
        raise DimensionError("test functions live in different dimensions")
    N = u.dim
    c_log, rho_n, _ = log_constants(N)
    if N > 1:
        mass = rho_n * inner(u, v)
        value = fourier_form(u, v, "log")
        return FormValue(value=value, parts={"fourier": value - mass, "mass": mass})
    h00 = h00_product(u, v, tol / 2.0)
    corr = _Correlation(u, v)
    far, err_far = 0.0, 0.0
    if corr.reach > 1.0:
        far, err_far = integrate_pieces(
            lambda z: corr.x_even(z) / z,
            [b for b in corr.breaks(1.0) if b >= 1.0],
            tol=tol / (2.0 * c_log),
            what="E_0 far part",
        )
    far_part = -c_log * far
    mass = rho_n * corr.mass
    return FormValue(
        value=h00.value + far_part + mass,
        parts={"h00": h00.value, "far": far_part, "mass": mass},
        est_error=h00.est_error + c_log * err_far,
    )


def delta_split(u: TestFunction, v: TestFunction, s: float, delta: float, tol: float | None = None) -> DeltaSplit:
    """E_s = E_s^δ + κ_{δ,s}⟨u,v⟩ − ⟨k_{δ,s} * u, v⟩ with k_{δ,s} = C_{N,s} 1_{|z|>δ}|z|^{−N−2s}."""
    _check_order(s)
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    tol = tol if tol is not None else get_settings().quad_tol
    kappa = kappa_delta(u.dim, s, delta)
    if _is_zero(u, v):
        return DeltaSplit(delta=delta, e_near=0.0, kappa_mass=kappa, conv_term=0.0, mass=0.0)
    c = frac_constant(1, s)
    corr = _Correlation(u, v)
    near, err_near = integrate_pieces(
        lambda z: z ** (-1.0 - 2.0 * s) * corr.d(z),
        corr.breaks(delta, upper=delta),
        tol=tol / (2.0 * c),
        first=corr.d_over_sq,
        first_power=1.0 - 2.0 * s,
        what="E_s^delta",
    )
    conv, err_conv = 0.0, 0.0
    if corr.reach > delta:
        conv, err_conv = integrate_pieces(
            lambda z: z ** (-1.0 - 2.0 * s) * corr.x_even(z),
            [b for b in corr.breaks(delta) if b >= delta],
            tol=tol / (2.0 * c),
            what="kernel convolution",
        )
    return DeltaSplit(
        delta=delta,
        e_near=c * near,
        kappa_mass=kappa,
        conv_term=c * conv,
        mass=corr.mass,
        est_error=c * (err_near + err_conv),
    )


def kernel_mass_check(N: int, s: float, delta: float) -> tuple[float, float]:
    omega = log_constants(N)[2]
    c = frac_constant(N, s)
    value, _ = integrate(lambda rho: rho ** (-1.0 - 2.0 * s), delta, math.inf, tol=1e-14)
    return c * omega * value, kappa_delta(N, s, delta)


def expansion_residuals(u: TestFunction, s: float, tol: float | None = None) -> tuple[float, float]:
    """Slacks of |E_s(u,u) − ‖u‖²| ≤ 2sB and |E_s(u,u) − ‖u‖² − sE_0(u,u)| ≤ 4s²B,
    B = κ_N‖u‖²_{L¹} + ‖Δu‖²_{L²}."""
    _check_order(s)
    if u.amplitude == 0.0:
        return 0.0, 0.0
    if not u.has_laplacian:
        raise ValueError("the expansion bounds need a C² test function")
    bound = kappa_form(u.dim) * lp_norm(u, 1.0) ** 2 + laplacian_l2(u) ** 2
    mass = lp_norm(u, 2.0) ** 2
    e_s = energy_s(u, u, s, tol).value
    e_0 = energy_log(u, u, tol).value
    slack1 = 2.0 * s * bound - abs(e_s - mass)
    slack2 = 4.0 * s**2 * bound - abs(e_s - mass - s * e_0)
    return slack1, slack2


def elementary_slacks(r_samples: Sequence[float] | np.ndarray, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample slacks of the first- and second-order bounds on (r^{2s} − 1)/s."""
    _check_order(s)
    r = np.asarray(r_samples, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("r_samples must be positive")
    log_r = np.log(r)
    quotient = np.expm1(2.0 * s * log_r) / s
    inside = r <= 1.0
    first = 2.0 * np.where(inside, np.abs(log_r), r**4) - np.abs(quotient)
    second = 4.0 * s * np.where(inside, log_r**2, r**4) - np.abs(quotient - 2.0 * log_r)
    return first, second


def elementary_bounds_check(r_samples: Sequence[float] | np.ndarray, s: float) -> float:
    first, second = elementary_slacks(r_samples, s)
    return float(min(first.min(), second.min()))
