"""Pointwise evaluation of (−Δ)^s and L_Δ on test functions.

Spatial evaluation uses the second-difference form

    (−Δ)^s u(x) = C_{N,s} ∫_0^∞ ρ^{−1−2s} G(ρ) dρ,
    G(ρ) = ∫_{S^{N−1}} u(x) − ½(u(x+ρθ) + u(x−ρθ)) dσ(θ),

with G(ρ) = O(ρ²) at the origin and G(ρ) = ω_{N−1} u(x) once x ± ρθ leaves
the support. Fourier evaluation integrates the radial symbol against û.
"""
import logging
import math
from typing import Callable, Iterable, Sequence

import numpy as np

from .config import get_settings
from .constants import frac_constant, log_constants, riesz_constant
from .errors import CutoffError, DimensionError, QuadratureError
from .models import Method, SymbolKind
from .quadrature import integrate, integrate_pieces, panel_rule, sphere_rule
from .schemas import OperatorEval, OpEvalRequest
from .testlab import Point, TestFunction, as_points, make_bump, radial_bessel

logger = logging.getLogger(__name__)

# below this fraction of the radius G(ρ)/ρ² is replaced by its Taylor limit
TAYLOR_FRACTION = 1e-3
MAX_CUTOFF_DOUBLINGS = 16


def _flat(pts: np.ndarray, N: int) -> np.ndarray:
    return pts[..., 0] if N == 1 else pts


def _point(x: Point, N: int) -> np.ndarray:
    pts = as_points(x, N)
    if pts.shape != (N,) and pts.shape != (1, N):
        raise DimensionError("expected a single evaluation point")
    return pts.reshape(N)


def _check_smooth(u: TestFunction) -> None:
    if not u.has_laplacian:
        raise ValueError("spatial operator evaluation needs a C² test function")
    if u.dim > 2:
        raise DimensionError("spatial operator evaluation is implemented for N = 1 and N = 2")


class _SecondDifference:
    """G(ρ), G(ρ)/ρ² and the spherical mean H(ρ) = ω u(x) − G(ρ) about a fixed point."""

    def __init__(self, u: TestFunction, x: np.ndarray):
        self.u = u
        self.x = x
        self.dirs, self.weights = sphere_rule(u.dim, get_settings().angular_nodes, symmetric=True)
        self.omega = float(np.sum(self.weights))
        self.ux = float(u.value(_flat(x, u.dim)))
        self.taylor = -self.omega * float(u.laplacian(_flat(x, u.dim))) / (2.0 * u.dim)
        self.small = TAYLOR_FRACTION * u.radius

    def mean(self, rho: float) -> float:
        plus = self.u.value(_flat(self.x + rho * self.dirs, self.u.dim))
        minus = self.u.value(_flat(self.x - rho * self.dirs, self.u.dim))
        return float(np.sum(self.weights * 0.5 * (plus + minus)))

    def g(self, rho: float) -> float:
        return self.omega * self.ux - self.mean(rho)

    def g_over_sq(self, rho: float) -> float:
        if rho < self.small:
            return self.taylor
        return self.g(rho) / rho**2

    def breaks(self) -> list[float]:
        d = float(np.linalg.norm(self.x - np.asarray(self.u.center)))
        r = self.u.radius
        return sorted({0.0, abs(r - d), d + r})


def frac_lap_point(u: TestFunction, s: float, x: Point, tol: float | None = None) -> OperatorEval:
    """(−Δ)^s u(x) from the symmetrised singular integral."""
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    tol = tol if tol is not None else get_settings().operator_tol
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if u.amplitude == 0.0:
        return OperatorEval(value=0.0, est_error=0.0, method=Method.spatial, s=s)
    _check_smooth(u)
    N = u.dim
    point = _point(x, N)
    c = frac_constant(N, s)
    sd = _SecondDifference(u, point)
    breaks = sd.breaks()
    reach = breaks[-1]
    near, err = integrate_pieces(
        lambda rho: rho ** (-1.0 - 2.0 * s) * sd.g(rho),
        breaks,
        tol=tol / c,
        first=sd.g_over_sq,
        first_power=1.0 - 2.0 * s,
        what="fractional Laplacian near field",
    )
    tail = sd.omega * sd.ux * reach ** (-2.0 * s) / (2.0 * s)
    return OperatorEval(value=c * (near + tail), est_error=c * err, method=Method.spatial, s=s)


def log_lap_point(u: TestFunction, x: Point, tol: float | None = None) -> OperatorEval:
    """L_Δ u(x) = C_N ∫_{B_1}(u(x) − u(x+y))|y|^{−N} − C_N ∫_{|y|≥1} u(x+y)|y|^{−N} + ρ_N u(x)."""
    tol = tol if tol is not None else get_settings().operator_tol
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if u.amplitude == 0.0:
        return OperatorEval(value=0.0, est_error=0.0, method=Method.spatial, s="log")
    _check_smooth(u)
    N = u.dim
    point = _point(x, N)
    c_log, rho_n, _ = log_constants(N)
    sd = _SecondDifference(u, point)
    cuts = sd.breaks()
    reach = cuts[-1]
    near_breaks = sorted({0.0, 1.0, *[b for b in cuts if b < 1.0]})
    near, err_near = integrate_pieces(
        lambda rho: sd.g(rho) / rho,
        near_breaks,
        tol=tol / (2.0 * c_log),
        first=sd.g_over_sq,
        first_power=1.0,
        what="logarithmic Laplacian near field",
    )
    far, err_far = 0.0, 0.0
    if reach > 1.0:
        far_breaks = sorted({1.0, reach, *[b for b in cuts if 1.0 < b < reach]})
        far, err_far = integrate_pieces(
            lambda rho: sd.mean(rho) / rho,
            far_breaks,
            tol=tol / (2.0 * c_log),
            what="logarithmic Laplacian far field",
        )
    value = c_log * (near - far) + rho_n * sd.ux
    return OperatorEval(value=value, est_error=c_log * (err_near + err_far), method=Method.spatial, s="log")


def _symbol(kind: SymbolKind | str, s: float) -> Callable[[np.ndarray], np.ndarray]:
    kind = SymbolKind(kind)
    if kind == SymbolKind.log:
        return lambda rho: 2.0 * np.log(np.maximum(rho, 1e-300))
    if s < 0.0:
        raise ValueError("power symbols need s >= 0")
    return lambda rho: np.power(rho, 2.0 * s)


def _tail_bound(u: TestFunction, symbol: Callable[[np.ndarray], np.ndarray], cutoff: float) -> float:
    """Bound for (2π)^{−N} ω ∫_Ξ^∞ |m(ρ)| |û(ρ)| ρ^{N−1} dρ from the family's decay law.

    The decay constant is calibrated on [Ξ/2, Ξ]; |Λ_N| ≤ 1 bounds the phase.
    """
    N = u.dim
    omega = log_constants(N)[2]
    sample = np.linspace(0.5 * cutoff, cutoff, 65)
    values = np.abs(u.fourier_transform(sample))
    floor = 1e-14 * abs(float(u.fourier_transform(np.array([0.0]))[0]))
    if np.max(values) <= floor:
        return 0.0
    scale = 2.0 * float(np.max(values / u.fourier_envelope(sample)))
    tail, _ = integrate(
        lambda rho: abs(float(symbol(np.array(rho)))) * float(u.fourier_envelope(np.array(rho))) * rho ** (N - 1),
        cutoff,
        math.inf,
        tol=1e-16,
    )
    return omega * scale * tail / (2.0 * math.pi) ** N


def fourier_cutoff(u: TestFunction, symbol: SymbolKind | str = SymbolKind.power, s: float = 0.0, tol: float | None = None) -> float:
    tol = tol if tol is not None else get_settings().operator_tol
    m = _symbol(symbol, s)
    cutoff = 32.0 / u.radius
    for _ in range(MAX_CUTOFF_DOUBLINGS):
        if _tail_bound(u, m, cutoff) <= 0.5 * tol:
            return cutoff
        cutoff *= 2.0
    raise CutoffError("no admissible Fourier cutoff found", achieved=_tail_bound(u, m, cutoff), tol=tol)


def _inverse_radial(u: TestFunction, symbol: Callable[[np.ndarray], np.ndarray], d: float, cutoff: float, order: int) -> float:
    N = u.dim
    omega = log_constants(N)[2]
    width = math.pi / (u.radius + d + 1e-3)
    panels = int(math.ceil(cutoff / width))
    first = min(width, cutoff)
    edges = np.concatenate([[0.0], first * np.geomspace(1e-10, 1.0, 30), np.linspace(first, cutoff, max(panels, 1) + 1)[1:]])
    rho, w = panel_rule(edges, order)
    integrand = symbol(rho) * u.fourier_transform(rho) * radial_bessel(N, rho * d) * rho ** (N - 1)
    return float(omega * np.sum(w * integrand) / (2.0 * math.pi) ** N)


def symbol_point(
    u: TestFunction,
    symbol: SymbolKind | str,
    x: Point,
    *,
    s: float = 0.0,
    cutoff: float | None = None,
    tol: float | None = None,
) -> OperatorEval:
    """Inverse Fourier transform of m(|ξ|) û(ξ) at x, truncated to |ξ| ≤ cutoff.

    ``symbol`` is ``power`` for |ξ|^{2s} or ``log`` for 2 log|ξ|.
    """
    tol = tol if tol is not None else get_settings().operator_tol
    kind = SymbolKind(symbol)
    tag: float | str = "log" if kind == SymbolKind.log else s
    if u.amplitude == 0.0:
        return OperatorEval(value=0.0, est_error=0.0, method=Method.fourier, s=tag)
    m = _symbol(kind, s)
    if cutoff is None:
        cutoff = fourier_cutoff(u, kind, s, tol)
    tail = _tail_bound(u, m, cutoff)
    if tail > tol:
        raise CutoffError(f"Fourier tail beyond cutoff {cutoff:g} is too large; increase the cutoff", achieved=tail, tol=tol)
    point = _point(x, u.dim)
    d = float(np.linalg.norm(point - np.asarray(u.center)))
    value = _inverse_radial(u, m, d, cutoff, 20)
    check = _inverse_radial(u, m, d, cutoff, 16)
    return OperatorEval(value=value, est_error=tail + abs(value - check), method=Method.fourier, s=tag)


def diff_quotient_sup(u: TestFunction, s: float, points: Iterable[Point], tol: float | None = None) -> float:
    """max over A of |((−Δ)^s u(x) − u(x))/s − L_Δ u(x)|."""
    if not 0.0 < s <= 0.25:
        raise ValueError("s must lie in (0, 1/4]")
    tol = tol if tol is not None else get_settings().operator_tol
    worst = 0.0
    for x in points:
        if u.amplitude == 0.0:
            continue
        frac = frac_lap_point(u, s, x, tol * s / 2.0).value
        log = log_lap_point(u, x, tol / 2.0).value
        ux = float(u.value(_flat(_point(x, u.dim), u.dim)))
        worst = max(worst, abs((frac - ux) / s - log))
    return worst


def _ray_segment(x: np.ndarray, theta: np.ndarray, r: float) -> tuple[float, float] | None:
    b = float(np.dot(x, theta))
    disc = b * b - float(np.dot(x, x)) + r * r
    if disc <= 0.0:
        return None
    root = math.sqrt(disc)
    hi = -b + root
    if hi <= 0.0:
        return None
    return max(0.0, -b - root), hi


def riesz_potential(
    f: TestFunction | Callable[[np.ndarray], np.ndarray],
    r: float,
    s: float,
    x: Point,
    tol: float | None = None,
) -> float:
    """u_f(x) = ∫_{B_r} κ_{N,s}|x − y|^{2s−N} f(y) dy, integrated along rays from x."""
    if not 0.0 < s <= 0.25:
        raise ValueError("s must lie in (0, 1/4]")
    if not 0.0 < r <= 1.0:
        raise ValueError("r must lie in (0, 1]")
    tol = tol if tol is not None else get_settings().operator_tol
    if isinstance(f, TestFunction):
        if f.amplitude == 0.0:
            return 0.0
        N = f.dim
        func = f.value
    else:
        N = np.atleast_1d(np.asarray(x, dtype=float)).size
        func = f
    if N > 2:
        raise DimensionError("Riesz potentials are implemented for N = 1 and N = 2")
    point = _point(x, N)
    kappa = riesz_constant(N, s)
    dirs, weights = sphere_rule(N, get_settings().angular_nodes)
    total, err_total = 0.0, 0.0
    for theta, weight in zip(dirs, weights):
        segment = _ray_segment(point, theta, r)
        if segment is None:
            continue
        lo, hi = segment
        cuts = [lo, hi]
        if isinstance(f, TestFunction):
            inner = _ray_segment(point - np.asarray(f.center), theta, f.radius)
            if inner is not None:
                cuts += [c for c in inner if lo < c < hi]
        cuts = sorted(set(cuts))

        def along(rho: float, theta: np.ndarray = theta) -> float:
            return float(func(_flat(point + rho * theta, N)))

        piece_tol = tol / (kappa * len(weights) * 2.0)
        if lo == 0.0:
            value, err = integrate_pieces(
                lambda rho: rho ** (2.0 * s - 1.0) * along(rho),
                cuts,
                tol=piece_tol,
                first=along,
                first_power=2.0 * s - 1.0,
                what="Riesz potential",
            )
        else:
            value, err = integrate_pieces(lambda rho: rho ** (2.0 * s - 1.0) * along(rho), cuts, tol=piece_tol, what="Riesz potential")
        total += weight * value
        err_total += weight * err
    if kappa * err_total > tol:
        raise QuadratureError("Riesz potential did not converge", achieved=kappa * err_total, tol=tol)
    return kappa * total


def riesz_sup_bound(N: int, s: float, r: float, f_sup: float) -> float:
    """κ_{N,s} ω_{N−1} r^{2s} ‖f‖_∞ /(2s) bounds ‖u_f‖_∞."""
    omega = log_constants(N)[2]
    return riesz_constant(N, s) * omega * r ** (2.0 * s) * f_sup / (2.0 * s)


def riesz_holder_constant(N: int, s: float) -> float:
    """2 ω_{N−1} κ_{N,s}/s, the s-Hölder constant of u_f per unit ‖f‖_∞."""
    omega = log_constants(N)[2]
    return 2.0 * omega * riesz_constant(N, s) / s


def holder_fit(values: Sequence[float], points: Sequence[Point], exponent: float, scale: float = 1.0) -> float:
    """Smallest C with |v_i − v_j| ≤ C·scale·|x_i − x_j|^exponent over all sampled pairs."""
    pts = np.asarray(points, dtype=float).reshape(len(values), -1)
    vals = np.asarray(values, dtype=float)
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    diff = np.abs(vals[:, None] - vals[None, :])
    mask = dist > 0.0
    if not np.any(mask):
        return 0.0
    return float(np.max(diff[mask] / (scale * dist[mask] ** exponent)))


def evaluate_request(req: OpEvalRequest) -> OperatorEval:
    u = make_bump(req.bump, req.center, req.radius, req.amplitude)
    if len(req.at) != u.dim:
        raise DimensionError("evaluation point and bump centre differ in dimension")
    x = req.at if u.dim > 1 else req.at[0]
    if req.method == Method.fourier:
        symbol = SymbolKind.log if req.op == "log" else SymbolKind.power
        return symbol_point(u, symbol, x, s=req.s, tol=req.tol)
    if req.op == "log":
        return log_lap_point(u, x, req.tol)
    return frac_lap_point(u, req.s, x, req.tol)
