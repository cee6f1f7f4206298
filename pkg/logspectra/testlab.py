"""Compactly supported test functions and computational domains."""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import gamma, jv

from .constants import log_constants
from .errors import DimensionError
from .models import BumpKind, DomainKind
from .quadrature import integrate_pieces, panel_rule, sphere_rule
from .schemas import DomainConfig

logger = logging.getLogger(__name__)

Point = float | Sequence[float] | np.ndarray


def as_points(x: Point | np.ndarray, N: int) -> np.ndarray:
    """Return x as an array of points with a trailing axis of length N.

    In one dimension every entry of x is a point; otherwise the last axis of
    x holds the coordinates.
    """
    arr = np.asarray(x, dtype=float)
    if N == 1:
        return arr[..., None]
    if arr.shape[-1:] != (N,):
        raise DimensionError(f"points must have a trailing axis of length {N}")
    return arr


def radial_bessel(N: int, z: np.ndarray) -> np.ndarray:
    """Λ_N(z) = Γ(N/2)(2/z)^{N/2−1} J_{N/2−1}(z), the sphere average of e^{iz·θ}; Λ_N(0) = 1."""
    z = np.abs(np.asarray(z, dtype=float))
    if N == 1:
        return np.cos(z)
    if N == 3:
        return np.sinc(z / math.pi)
    nu = N / 2 - 1
    small = z < 1e-6
    safe = np.where(small, 1.0, z)
    out = gamma(N / 2) * (2.0 / safe) ** nu * jv(nu, safe)
    return np.where(small, 1.0 - z**2 / (2.0 * N), out)


@dataclass(frozen=True)
class TestFunction:
    """Radial test function a·φ(|x − c|/r) supported in the closed ball B_r(c)."""

    __test__ = False

    kind: BumpKind
    center: tuple[float, ...]
    radius: float
    amplitude: float = 1.0

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def has_closed_fourier(self) -> bool:
        if self.kind == BumpKind.polynomial:
            return True
        return self.kind == BumpKind.hat and self.dim == 1

    @property
    def has_laplacian(self) -> bool:
        return self.kind != BumpKind.hat

    @property
    def breakpoints(self) -> list[float]:
        c = self.center[0]
        if self.kind == BumpKind.hat:
            return [c - self.radius, c, c + self.radius]
        return [c - self.radius, c + self.radius]

    def _offsets(self, x: Point) -> np.ndarray:
        return as_points(x, self.dim) - np.asarray(self.center)

    def _profile(self, q: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Values and first two derivatives of the profile as functions of q = |x−c|²/r²."""
        inside = q < 1.0
        qi = np.where(inside, q, 0.0)
        a = self.amplitude
        if self.kind == BumpKind.smooth:
            gap = 1.0 - qi
            f = np.where(inside, a * np.exp(1.0 - 1.0 / gap), 0.0)
            df = np.where(inside, -f / gap**2, 0.0)
            ddf = np.where(inside, f * (2.0 * qi - 1.0) / gap**4, 0.0)
            return f, df, ddf
        if self.kind == BumpKind.polynomial:
            gap = np.where(inside, 1.0 - qi, 0.0)
            return a * gap**3, -3.0 * a * gap**2, 6.0 * a * gap
        raise ValueError("hat functions are not differentiable in q")

    def radial(self, t: np.ndarray) -> np.ndarray:
        t = np.abs(np.asarray(t, dtype=float))
        if self.kind == BumpKind.hat:
            return self.amplitude * np.clip(1.0 - t / self.radius, 0.0, None)
        return self._profile((t / self.radius) ** 2)[0]

    def radial_laplacian(self, t: np.ndarray) -> np.ndarray:
        if not self.has_laplacian:
            raise ValueError("hat functions have no pointwise Laplacian")
        q = (np.asarray(t, dtype=float) / self.radius) ** 2
        _, df, ddf = self._profile(q)
        return (4.0 * q * ddf + 2.0 * self.dim * df) / self.radius**2

    def value(self, x: Point) -> np.ndarray:
        d = self._offsets(x)
        return self.radial(np.linalg.norm(d, axis=-1))

    def __call__(self, x: Point) -> np.ndarray:
        return self.value(x)

    def gradient(self, x: Point) -> np.ndarray:
        d = self._offsets(x)
        if self.kind == BumpKind.hat:
            t = np.linalg.norm(d, axis=-1, keepdims=True)
            inside = (t > 0.0) & (t < self.radius)
            return np.where(inside, -self.amplitude * d / (self.radius * np.where(t > 0.0, t, 1.0)), 0.0)
        q = np.sum(d**2, axis=-1) / self.radius**2
        df = self._profile(q)[1]
        return 2.0 * df[..., None] * d / self.radius**2

    def laplacian(self, x: Point) -> np.ndarray:
        d = self._offsets(x)
        return self.radial_laplacian(np.linalg.norm(d, axis=-1))

    def fourier_transform(self, rho: np.ndarray) -> np.ndarray:
        """Radial Fourier transform ∫ e^{−i y·ξ} u(c + y) dy at |ξ| = rho."""
        rho = np.abs(np.asarray(rho, dtype=float))
        N, r, a = self.dim, self.radius, self.amplitude
        z = r * rho
        if self.kind == BumpKind.polynomial:
            nu = N / 2 + 3
            limit = math.pi ** (N / 2) * 6.0 / gamma(nu + 1)
            small = z < 1e-4
            safe = np.where(small, 1.0, z)
            closed = math.pi ** (N / 2) * 6.0 * (2.0 / safe) ** nu * jv(nu, safe)
            unit = np.where(small, limit * (1.0 - z**2 / (4.0 * (nu + 1))), closed)
            return a * r**N * unit
        if self.kind == BumpKind.hat and N == 1:
            return a * r * np.sinc(z / (2.0 * math.pi)) ** 2
        return a * r**N * self._unit_transform(z)

    def _unit_transform(self, z: np.ndarray) -> np.ndarray:
        N = self.dim
        omega = log_constants(N)[2]
        zmax = float(np.max(z)) if z.size else 0.0
        panels = max(24, int(math.ceil(zmax / math.pi)) + 8)
        t, w = panel_rule(np.linspace(0.0, 1.0, panels + 1))
        profile = self.radial(t * self.radius) / self.amplitude
        weights = w * profile * t ** (N - 1)
        flat = z.ravel()
        out = np.empty_like(flat)
        # chunks keep the (z, t) matrix small
        for start in range(0, flat.size, 2048):
            chunk = flat[start : start + 2048]
            out[start : start + 2048] = radial_bessel(N, chunk[:, None] * t[None, :]) @ weights
        return omega * out.reshape(z.shape)

    def fourier_envelope(self, rho: np.ndarray) -> np.ndarray:
        """Decay law of |û| in |ξ| for this family, up to a constant factor."""
        z = np.maximum(self.radius * np.asarray(rho, dtype=float), 1e-300)
        N = self.dim
        if self.kind == BumpKind.polynomial:
            return z ** (-(N + 7) / 2)
        if self.kind == BumpKind.hat:
            return z ** (-(N + 3) / 2)
        return z ** (-0.75 - (N - 1) / 2) * np.exp(-np.sqrt(2.0 * z))

    def shifted(self, h: Point) -> "TestFunction":
        offset = np.atleast_1d(np.asarray(h, dtype=float))
        return TestFunction(self.kind, tuple(float(c) for c in np.asarray(self.center) + offset), self.radius, self.amplitude)

    def dilated(self, r: float) -> "TestFunction":
        if r <= 0.0:
            raise ValueError("dilation factor must be positive")
        return TestFunction(self.kind, tuple(r * c for c in self.center), r * self.radius, self.amplitude)

    def scaled(self, alpha: float) -> "TestFunction":
        return TestFunction(self.kind, self.center, self.radius, alpha * self.amplitude)


def make_bump(kind: BumpKind | str, center: Point = 0.0, radius: float = 1.0, amplitude: float = 1.0) -> TestFunction:
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    kind = BumpKind(kind)
    c = tuple(float(v) for v in np.atleast_1d(np.asarray(center, dtype=float)))
    if len(c) > 3:
        raise DimensionError("test functions are provided for N <= 3")
    return TestFunction(kind, c, float(radius), float(amplitude))


def zero_function(N: int = 1, kind: BumpKind | str = BumpKind.smooth) -> TestFunction:
    return make_bump(kind, [0.0] * N, 1.0, 0.0)


def radial_integral(u: TestFunction, g: Callable[[np.ndarray], np.ndarray]) -> float:
    """ω_{N−1}∫_0^r g(t) t^{N−1} dt with a panel rule matched to the profile."""
    omega = log_constants(u.dim)[2]
    t, w = panel_rule(np.linspace(0.0, u.radius, 41))
    return float(omega * np.sum(w * g(t) * t ** (u.dim - 1)))


def lp_norm(u: TestFunction, p: float = 2.0) -> float:
    if p < 1.0:
        raise ValueError("p must be at least 1")
    return radial_integral(u, lambda t: np.abs(u.radial(t)) ** p) ** (1.0 / p)


def laplacian_l2(u: TestFunction) -> float:
    return math.sqrt(radial_integral(u, lambda t: u.radial_laplacian(t) ** 2))


def inner(u: TestFunction, v: TestFunction) -> float:
    if u.dim != v.dim:
        raise DimensionError("test functions live in different dimensions")
    if u.dim == 1:
        lo = max(u.center[0] - u.radius, v.center[0] - v.radius)
        hi = min(u.center[0] + u.radius, v.center[0] + v.radius)
        if hi <= lo:
            return 0.0
        cuts = sorted({lo, hi, *[p for p in u.breakpoints + v.breakpoints if lo < p < hi]})
        edges = np.concatenate([np.linspace(a, b, 9)[:-1] for a, b in zip(cuts[:-1], cuts[1:])] + [[hi]])
        x, w = panel_rule(edges)
        return float(np.sum(w * u.value(x) * v.value(x)))
    if u.center == v.center:
        return radial_integral(u, lambda t: u.radial(t) * v.radial(t))
    return fourier_pairing(u, v, lambda rho: np.ones_like(rho))


def fourier_pairing(
    u: TestFunction,
    v: TestFunction,
    symbol: Callable[[np.ndarray], np.ndarray],
    *,
    cutoff: float | None = None,
) -> float:
    """(2π)^{−N}∫ m(|ξ|) û(ξ) conj(v̂(ξ)) dξ for radial test functions.

    The phase from the two centres integrates over the sphere to Λ_N(|ξ||c_u − c_v|).
    """
    if u.dim != v.dim:
        raise DimensionError("test functions live in different dimensions")
    N = u.dim
    omega = log_constants(N)[2]
    d = float(np.linalg.norm(np.asarray(u.center) - np.asarray(v.center)))
    rmin = min(u.radius, v.radius)
    xi_max = cutoff if cutoff is not None else 400.0 / rmin
    width = math.pi / (max(u.radius, v.radius) + d + 1.0)
    panels = int(math.ceil(xi_max / width))
    edges = np.concatenate([[0.0], np.geomspace(1e-8 * width, width, 24), width + width * np.arange(1, panels)])
    rho, w = panel_rule(edges)
    integrand = symbol(rho) * u.fourier_transform(rho) * v.fourier_transform(rho) * radial_bessel(N, rho * d)
    return float(omega * np.sum(w * integrand * rho ** (N - 1)) / (2.0 * math.pi) ** N)


def l1s_norm(u: TestFunction, s: float, *, tol: float = 1e-8) -> float:
    """‖u‖_{L¹_s} = ∫ |u(x)| (1 + |x|)^{−N−2s} dx."""
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    if u.amplitude == 0.0:
        return 0.0
    N = u.dim
    if N == 1:
        c, r = u.center[0], u.radius
        cuts = sorted({c - r, c + r, *[p for p in (c, 0.0) if c - r < p < c + r]})

        def integrand(x: float) -> float:
            return float(abs(u.value(x)) / (1.0 + abs(x)) ** (1.0 + 2.0 * s))

        scale = max(lp_norm(u, 1.0), 1e-300)
        return integrate_pieces(integrand, cuts, tol=tol * scale, what="l1s_norm")[0]
    if N != 2:
        raise DimensionError("l1s_norm is implemented for N = 1 and N = 2")
    dirs, weights = sphere_rule(2, 512)
    center = np.asarray(u.center)

    def shell(t: float) -> float:
        pts = center + t * dirs
        w = (1.0 + np.linalg.norm(pts, axis=-1)) ** (-(2.0 + 2.0 * s))
        return float(abs(u.radial(t)) * t * np.sum(weights * w))

    scale = max(lp_norm(u, 1.0), 1e-300)
    return integrate_pieces(shell, [0.0, u.radius], tol=tol * scale, what="l1s_norm")[0]


@dataclass(frozen=True)
class Domain:
    kind: DomainKind
    bounds: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def delta(self, x: Point) -> np.ndarray:
        """dist(x, Ω^c): zero outside the open set.

        Node arrays of shape (m, N) give m distances in every dimension.
        """
        pts = np.asarray(x, dtype=float)
        if not (pts.ndim == 2 and pts.shape[1] == self.dim):
            pts = as_points(pts, self.dim)
        gaps = np.minimum(pts - self.lower, self.upper - pts)
        return np.clip(np.min(gaps, axis=-1), 0.0, None)

    def scaled(self, r: float) -> "Domain":
        return Domain(self.kind, tuple((r * lo, r * hi) for lo, hi in self.bounds))

    def label(self) -> str:
        return "x".join(f"({lo:g},{hi:g})" for lo, hi in self.bounds)


def make_domain(cfg: DomainConfig | dict) -> Domain:
    if isinstance(cfg, dict):
        cfg = DomainConfig.model_validate(cfg)
    bounds = tuple((float(lo), float(hi)) for lo, hi in cfg.bounds())
    if any(hi <= lo for lo, hi in bounds):
        raise ValueError("domain bounds must satisfy min < max")
    return Domain(cfg.kind, bounds)


def domain_delta(dom: Domain, x: Point) -> float | np.ndarray:
    value = dom.delta(x)
    return float(value) if np.ndim(value) == 0 else value
