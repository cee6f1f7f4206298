"""Piecewise-linear Galerkin matrices of E_s, E_0 and the L² pairing.

Interior hat functions are extended by zero, so every entry is a full-space
form value. In one dimension each hat is a combination of ramps (x − x_l)_+,
and the Fourier symbol |ξ|^{2s} paired with ξ^{−4} gives

    E_s(φ_i, φ_j) = Σ_{l,l'} w_{il} w_{jl'} K_s |x_l − x_{l'}|^{3−2s},
    K_s = 1 / (2 cos(πs) Γ(4−2s)),

with the ramp weights w annihilating affine functions. The logarithmic
matrix is the s-derivative of this expression at s = 0. On rectangles the
Q1 entries are radial integrals of the hat cross-correlation per grid offset.
"""
import logging
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import toeplitz
from scipy.special import binom, digamma, gamma

from .config import get_settings
from .constants import frac_constant, log_constants
from .errors import DimensionError, MatrixFormatError, QuadratureError
from .models import FORM_KIND_CODES, DomainKind, FormKind
from .quadrature import gauss_legendre, integrate_pieces
from .testlab import Domain, TestFunction, make_domain

logger = logging.getLogger(__name__)

NLFM_MAGIC = b"NLFM"
NLFM_VERSION = 1
NLFM_HEADER = struct.Struct("<4sIBIdQ")

# below this fraction of the finer step g(ρ)/ρ² is replaced by its limit
TAYLOR_FRACTION = 1e-5

# offsets from which the fourth difference is summed as a series
SERIES_OFFSET = 8
SERIES_TERMS = 64
STENCIL = np.array([1.0, -4.0, 6.0, -4.0, 1.0])
STENCIL_SHIFTS = np.arange(-2, 3)


@dataclass(frozen=True)
class Mesh:
    domain: Domain
    axes: tuple[np.ndarray, ...]
    interior_index: list[int] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def panels(self) -> tuple[int, ...]:
        return tuple(len(axis) - 1 for axis in self.axes)

    @property
    def size(self) -> int:
        return len(self.interior_index)

    @property
    def widths(self) -> tuple[np.ndarray, ...]:
        return tuple(np.diff(axis) for axis in self.axes)

    @property
    def is_uniform(self) -> bool:
        return all(np.allclose(w, w[0], rtol=1e-12, atol=0.0) for w in self.widths)

    @property
    def h(self) -> tuple[float, ...]:
        return tuple(float(w.mean()) for w in self.widths)

    def interior_axes(self) -> tuple[np.ndarray, ...]:
        return tuple(axis[1:-1] for axis in self.axes)

    def interior_nodes(self) -> np.ndarray:
        grids = np.meshgrid(*self.interior_axes(), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def scaled(self, r: float) -> "Mesh":
        return Mesh(self.domain.scaled(r), tuple(r * axis for axis in self.axes), list(self.interior_index))


@dataclass
class FormMatrix:
    kind: FormKind
    entries: np.ndarray
    s: float | None = None
    quad_tol: float = 0.0
    dim: int = 1
    mesh: Mesh | None = None

    @property
    def size(self) -> int:
        return int(self.entries.shape[0])

    def symmetry_defect(self) -> float:
        scale = float(np.max(np.abs(self.entries))) or 1.0
        return float(np.max(np.abs(self.entries - self.entries.T))) / scale


def _interior(panels: tuple[int, ...]) -> list[int]:
    return list(range(int(np.prod([n - 1 for n in panels]))))


def mesh_interval(a: float, b: float, n: int) -> Mesh:
    if not a < b:
        raise ValueError("interval needs a < b")
    if n < 2:
        raise ValueError("an interval mesh needs at least 2 panels")
    nodes = np.linspace(a, b, n + 1)
    domain = Domain(DomainKind.interval, ((float(a), float(b)),))
    return Mesh(domain, (nodes,), _interior((n,)))


def mesh_from_nodes(nodes: np.ndarray) -> Mesh:
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < 3 or np.any(np.diff(nodes) <= 0.0):
        raise ValueError("nodes must be strictly increasing with at least 3 entries")
    domain = Domain(DomainKind.interval, ((float(nodes[0]), float(nodes[-1])),))
    return Mesh(domain, (nodes,), _interior((nodes.size - 1,)))


def mesh_rect(x_bounds: tuple[float, float], y_bounds: tuple[float, float], nx: int, ny: int | None = None) -> Mesh:
    ny = nx if ny is None else ny
    if nx < 2 or ny < 2:
        raise ValueError("a rectangle mesh needs at least 2 panels per axis")
    domain = Domain(DomainKind.rectangle, ((float(x_bounds[0]), float(x_bounds[1])), (float(y_bounds[0]), float(y_bounds[1]))))
    if any(hi <= lo for lo, hi in domain.bounds):
        raise ValueError("rectangle bounds must satisfy min < max")
    axes = (np.linspace(*domain.bounds[0], nx + 1), np.linspace(*domain.bounds[1], ny + 1))
    return Mesh(domain, axes, _interior((nx, ny)))


def mesh_for(domain: Domain | dict, n: int) -> Mesh:
    if not isinstance(domain, Domain):
        domain = make_domain(domain)
    if domain.kind == DomainKind.interval:
        return mesh_interval(*domain.bounds[0], n)
    return mesh_rect(domain.bounds[0], domain.bounds[1], n, n)


def _mass_1d(nodes: np.ndarray) -> np.ndarray:
    h = np.diff(nodes)
    diag = (h[:-1] + h[1:]) / 3.0
    off = h[1:-1] / 6.0
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def assemble_mass(mesh: Mesh) -> FormMatrix:
    blocks = [_mass_1d(axis) for axis in mesh.axes]
    entries = blocks[0] if mesh.dim == 1 else np.kron(blocks[0], blocks[1])
    return FormMatrix(FormKind.mass, entries, dim=mesh.dim, mesh=mesh)


def _frac_scale(s: float) -> float:
    return 1.0 / (2.0 * math.cos(math.pi * s) * gamma(4.0 - 2.0 * s))


def _is_half(s: float) -> bool:
    return abs(s - 0.5) < 1e-9


def _power_kernel(t: np.ndarray, s: float) -> np.ndarray:
    """Ramp-pair kernel of E_s, defined up to cubic polynomials."""
    t = np.abs(t)
    if _is_half(s):
        return np.where(t > 0.0, t**2 * np.log(np.where(t > 0.0, t, 1.0)), 0.0) / (2.0 * math.pi)
    return _frac_scale(s) * t ** (3.0 - 2.0 * s)


def _log_kernel(t: np.ndarray) -> np.ndarray:
    """s-derivative at 0 of the ramp-pair kernel: |t|³(2ψ(4) − 2 ln|t|)/12."""
    t = np.abs(t)
    logt = np.log(np.where(t > 0.0, t, 1.0))
    return t**3 * (2.0 * digamma(4.0) - 2.0 * logt) / 12.0


def _ramp_weights(nodes: np.ndarray) -> np.ndarray:
    h = np.diff(nodes)
    size = nodes.size - 2
    weights = np.zeros((size, nodes.size))
    rows = np.arange(size)
    weights[rows, rows] = 1.0 / h[:-1]
    weights[rows, rows + 1] = -(1.0 / h[:-1] + 1.0 / h[1:])
    weights[rows, rows + 2] = 1.0 / h[1:]
    return weights


def _log_series(power: int, terms: int) -> np.ndarray:
    log_coeffs = np.zeros(terms + 1)
    j = np.arange(1, terms + 1)
    log_coeffs[1:] = (-1.0) ** (j + 1) / j
    out = np.zeros(terms + 1)
    for i in range(power + 1):
        out[i:] += binom(power, i) * log_coeffs[: terms + 1 - i]
    return out


def _stencil_moments(terms: int) -> np.ndarray:
    j = np.arange(terms + 1)
    return np.array([np.sum(STENCIL * STENCIL_SHIFTS.astype(float) ** jj) for jj in j])


def _fourth_difference(offsets: np.ndarray, f: Callable[[np.ndarray], np.ndarray], coeffs: np.ndarray, degree: float) -> np.ndarray:
    """Σ_k c_k f(m + k) for integer offsets m ≥ 0.

    Far offsets use m^degree Σ_j coeffs_j·(Σ_k c_k k^j)·m^{−j}, which avoids the
    cancellation of the direct sum.
    """
    m = np.asarray(offsets, dtype=float)
    direct = np.array([np.sum(STENCIL * f(mm + STENCIL_SHIFTS)) for mm in m])
    far = m >= SERIES_OFFSET
    if np.any(far):
        moments = _stencil_moments(coeffs.size - 1)
        powers = m[far, None] ** (-np.arange(coeffs.size)[None, :])
        direct[far] = m[far] ** degree * (powers @ (coeffs * moments))
    return direct


def _uniform_frac_row(size: int, h: float, s: float) -> np.ndarray:
    m = np.arange(size)
    if _is_half(s):
        f = lambda t: _power_kernel(t, s)  # noqa: E731
        # t² ln t = m²(1+x)²(ln m + ln(1+x)); the ln m part is a quadratic
        row = _fourth_difference(m, f, _log_series(2, SERIES_TERMS) / (2.0 * math.pi), 2.0)
        return row
    p = 3.0 - 2.0 * s
    coeffs = binom(p, np.arange(SERIES_TERMS + 1))
    row = _fourth_difference(m, lambda t: np.abs(t) ** p, coeffs, p)
    return h ** (1.0 - 2.0 * s) * _frac_scale(s) * row


def _uniform_log_row(size: int, h: float) -> np.ndarray:
    m = np.arange(size)
    cubic = _fourth_difference(m, lambda t: np.abs(t) ** 3, np.zeros(SERIES_TERMS + 1), 3.0)
    cubic_log = _fourth_difference(
        m,
        lambda t: np.where(t != 0, np.abs(t) ** 3 * np.log(np.where(t != 0, np.abs(t), 1.0)), 0.0),
        _log_series(3, SERIES_TERMS),
        3.0,
    )
    return h * ((2.0 * digamma(4.0) - 2.0 * math.log(h)) * cubic - 2.0 * cubic_log) / 12.0


def _assemble_1d(mesh: Mesh, kind: FormKind, s: float | None) -> np.ndarray:
    nodes = mesh.axes[0]
    size = nodes.size - 2
    if mesh.is_uniform:
        h = mesh.h[0]
        row = _uniform_log_row(size, h) if kind == FormKind.log else _uniform_frac_row(size, h, s)
        return toeplitz(row)
    weights = _ramp_weights(nodes)
    gaps = nodes[:, None] - nodes[None, :]
    kernel = _log_kernel(gaps) if kind == FormKind.log else _power_kernel(gaps, s)
    entries = weights @ kernel @ weights.T
    return 0.5 * (entries + entries.T)


class _HatCorrelation:
    """Products of hat autocorrelations h·B(t/h), B the cubic B-spline, on a uniform grid."""

    def __init__(self, hx: float, hy: float, mx: int, my: int):
        self.hx, self.hy, self.mx, self.my = hx, hy, mx, my
        self.mass = self.auto(mx * hx, hx) * self.auto(my * hy, hy)
        self.lines_x = np.array([sign * (mx + k) * hx for sign in (1, -1) for k in range(-2, 3)])
        self.lines_y = np.array([sign * (my + k) * hy for sign in (1, -1) for k in range(-2, 3)])
        self.reach = math.hypot((mx + 2) * hx, (my + 2) * hy)
        self.small = TAYLOR_FRACTION * min(hx, hy)

    @staticmethod
    def auto(t: np.ndarray | float, h: float) -> np.ndarray:
        tau = np.abs(np.asarray(t, dtype=float)) / h
        inner = 2.0 / 3.0 - tau**2 + 0.5 * tau**3
        outer = np.clip(2.0 - tau, 0.0, None) ** 3 / 6.0
        return h * np.where(tau <= 1.0, inner, outer)

    @staticmethod
    def curvature(t: float, h: float) -> float:
        tau = abs(t) / h
        return (3.0 * tau - 2.0 if tau <= 1.0 else max(2.0 - tau, 0.0)) / h

    def cross(self, z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
        return self.auto(z1 - self.mx * self.hx, self.hx) * self.auto(z2 - self.my * self.hy, self.hy)

    def _arcs(self, rho: float) -> np.ndarray:
        angles = [0.0, 2.0 * math.pi]
        for c in self.lines_x:
            if abs(c) < rho:
                a = math.acos(c / rho)
                angles += [a, 2.0 * math.pi - a]
        for c in self.lines_y:
            if abs(c) < rho:
                a = math.asin(c / rho) % (2.0 * math.pi)
                angles += [a, (math.pi - a) % (2.0 * math.pi)]
        edges = np.unique(np.asarray(angles))
        # split long arcs so every panel spans at most π/8
        refined = [edges[0]]
        for a, b in zip(edges[:-1], edges[1:]):
            count = max(1, int(math.ceil((b - a) / (math.pi / 8.0))))
            refined.extend(np.linspace(a, b, count + 1)[1:].tolist())
        return np.asarray(refined)

    def defect(self, rho: float) -> float:
        """g(ρ) = ∫_0^{2π} M − ½(X(ρθ) + X(−ρθ)) dθ."""
        nodes, weights = gauss_legendre(8)
        edges = self._arcs(rho)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        theta = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        w = (half[:, None] * weights[None, :]).ravel()
        z1, z2 = rho * np.cos(theta), rho * np.sin(theta)
        sym = 0.5 * (self.cross(z1, z2) + self.cross(-z1, -z2))
        return float(np.sum(w * (self.mass - sym)))

    def defect_over_sq(self, rho: float) -> float:
        if rho < self.small:
            # −π/2 times the Laplacian of the correlation at zero offset
            ax, ay = self.auto(self.mx * self.hx, self.hx), self.auto(self.my * self.hy, self.hy)
            lap = self.curvature(self.mx * self.hx, self.hx) * ay + ax * self.curvature(self.my * self.hy, self.hy)
            return float(-0.5 * math.pi * lap)
        return self.defect(rho) / rho**2

    def radial_breaks(self, *extra: float) -> list[float]:
        cuts = {0.0, self.reach}
        cuts.update(abs(c) for c in self.lines_x)
        cuts.update(abs(c) for c in self.lines_y)
        cuts.update(math.hypot(a, b) for a in self.lines_x for b in self.lines_y)
        cuts.update(extra)
        return sorted(c for c in cuts if 0.0 <= c <= self.reach)


def _rect_entry(hx: float, hy: float, mx: int, my: int, kind: FormKind, s: float | None, tol: float) -> float:
    corr = _HatCorrelation(hx, hy, mx, my)
    if kind == FormKind.frac:
        c = frac_constant(2, s)
        near, _ = integrate_pieces(
            lambda rho: rho ** (-1.0 - 2.0 * s) * corr.defect(rho),
            corr.radial_breaks(),
            tol=tol / c,
            first=corr.defect_over_sq,
            first_power=1.0 - 2.0 * s,
            what=f"Q1 frac entry {mx},{my}",
        )
        tail = 2.0 * math.pi * corr.mass * corr.reach ** (-2.0 * s) / (2.0 * s)
        return c * (near + tail)
    c_log, rho_n, _ = log_constants(2)
    breaks = corr.radial_breaks(1.0)
    near_breaks = [b for b in breaks if b <= 1.0] + ([1.0] if corr.reach < 1.0 else [])
    near, _ = integrate_pieces(
        lambda rho: corr.defect(rho) / rho,
        sorted(set(near_breaks)),
        tol=tol / (2.0 * c_log),
        first=corr.defect_over_sq,
        first_power=1.0,
        what=f"Q1 log near entry {mx},{my}",
    )
    far = 0.0
    if corr.reach > 1.0:
        far, _ = integrate_pieces(
            lambda rho: (2.0 * math.pi * corr.mass - corr.defect(rho)) / rho,
            [b for b in breaks if b >= 1.0],
            tol=tol / (2.0 * c_log),
            what=f"Q1 log far entry {mx},{my}",
        )
    return c_log * (near - far) + rho_n * corr.mass


def _assemble_rect(mesh: Mesh, kind: FormKind, s: float | None, tol: float, workers: int | None) -> np.ndarray:
    if not mesh.is_uniform:
        raise DimensionError("rectangle assembly needs uniform axes")
    hx, hy = mesh.h
    nx, ny = (n - 1 for n in mesh.panels)
    offsets = [(mx, my) for mx in range(nx) for my in range(ny)]

    def entry(offset: tuple[int, int]) -> float:
        try:
            return _rect_entry(hx, hy, offset[0], offset[1], kind, s, tol)
        except QuadratureError as exc:
            raise QuadratureError(f"entry at grid offset {offset}: {exc}", achieved=exc.achieved, tol=exc.tol) from exc

    with ThreadPoolExecutor(max_workers=workers) as pool:
        values = list(pool.map(entry, offsets))
    table = np.asarray(values).reshape(nx, ny)
    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    ix, iy = ix.ravel(), iy.ravel()
    return table[np.abs(ix[:, None] - ix[None, :]), np.abs(iy[:, None] - iy[None, :])]


def assemble_frac(mesh: Mesh, s: float, quad_tol: float | None = None, *, workers: int | None = None) -> FormMatrix:
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    quad_tol = quad_tol if quad_tol is not None else get_settings().quad_tol
    if mesh.dim == 1:
        entries = _assemble_1d(mesh, FormKind.frac, s)
    else:
        entries = _assemble_rect(mesh, FormKind.frac, s, quad_tol, workers)
    logger.debug("assembled frac matrix s=%s size=%d", s, entries.shape[0])
    return FormMatrix(FormKind.frac, entries, s=s, quad_tol=quad_tol, dim=mesh.dim, mesh=mesh)


def assemble_log(mesh: Mesh, quad_tol: float | None = None, *, workers: int | None = None) -> FormMatrix:
    """Matrix of E_0(φ_i, φ_j), split at the fixed radius 1 in the rectangle case."""
    quad_tol = quad_tol if quad_tol is not None else get_settings().quad_tol
    if mesh.dim == 1:
        entries = _assemble_1d(mesh, FormKind.log, None)
    else:
        entries = _assemble_rect(mesh, FormKind.log, None, quad_tol, workers)
    logger.debug("assembled log matrix size=%d", entries.shape[0])
    return FormMatrix(FormKind.log, entries, quad_tol=quad_tol, dim=mesh.dim, mesh=mesh)


def assemble_rect(
    meshx: np.ndarray,
    meshy: np.ndarray,
    kind: FormKind | str,
    s: float | None = None,
    quad_tol: float | None = None,
    *,
    workers: int | None = None,
) -> FormMatrix:
    """Q1 matrix on the tensor grid meshx × meshy."""
    x, y = np.asarray(meshx, dtype=float), np.asarray(meshy, dtype=float)
    domain = Domain(DomainKind.rectangle, ((float(x[0]), float(x[-1])), (float(y[0]), float(y[-1]))))
    mesh = Mesh(domain, (x, y), _interior((x.size - 1, y.size - 1)))
    kind = FormKind(kind)
    if kind == FormKind.mass:
        return assemble_mass(mesh)
    if kind == FormKind.frac:
        if s is None:
            raise ValueError("fractional assembly needs s")
        return assemble_frac(mesh, s, quad_tol, workers=workers)
    return assemble_log(mesh, quad_tol, workers=workers)


def assemble(mesh: Mesh, kind: FormKind | str, s: float | None = None, quad_tol: float | None = None) -> FormMatrix:
    kind = FormKind(kind)
    if kind == FormKind.mass:
        return assemble_mass(mesh)
    if kind == FormKind.log:
        return assemble_log(mesh, quad_tol)
    if s is None:
        raise ValueError("fractional assembly needs s")
    return assemble_frac(mesh, s, quad_tol)


def interpolate(mesh: Mesh, u: TestFunction | Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    nodes = mesh.interior_nodes()
    return np.asarray(u(nodes[:, 0] if mesh.dim == 1 else nodes), dtype=float)


def nodal_interpolant(mesh: Mesh, values: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Piecewise-(bi)linear function with the given interior values, zero outside Ω."""
    values = np.asarray(values, dtype=float)
    if values.size != mesh.size:
        raise DimensionError("one value per interior node expected")
    if mesh.dim == 1:
        nodes = mesh.axes[0]
        full = np.concatenate([[0.0], values, [0.0]])
        return lambda x: np.interp(np.asarray(x, dtype=float), nodes, full, left=0.0, right=0.0)
    nx, ny = (n - 1 for n in mesh.panels)
    full = np.zeros((nx + 2, ny + 2))
    full[1:-1, 1:-1] = values.reshape(nx, ny)
    interp = RegularGridInterpolator(mesh.axes, full, bounds_error=False, fill_value=0.0)
    return lambda x: interp(np.asarray(x, dtype=float))


def save_matrix(matrix: FormMatrix, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = NLFM_HEADER.pack(
        NLFM_MAGIC,
        NLFM_VERSION,
        FORM_KIND_CODES[matrix.kind],
        matrix.dim,
        float(matrix.s) if matrix.s is not None else 0.0,
        matrix.size,
    )
    with path.open("wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(matrix.entries, dtype="<f8").tobytes(order="C"))
    return path


def load_matrix(path: str | Path) -> FormMatrix:
    data = Path(path).read_bytes()
    if len(data) < NLFM_HEADER.size:
        raise MatrixFormatError("file too short for an NLFM header")
    magic, version, code, dim, s, size = NLFM_HEADER.unpack_from(data)
    if magic != NLFM_MAGIC:
        raise MatrixFormatError("missing NLFM magic")
    if version != NLFM_VERSION:
        raise MatrixFormatError(f"unsupported NLFM version {version}")
    kinds = {value: key for key, value in FORM_KIND_CODES.items()}
    if code not in kinds:
        raise MatrixFormatError(f"unknown matrix kind code {code}")
    payload = data[NLFM_HEADER.size :]
    if len(payload) != 8 * size * size:
        raise MatrixFormatError("payload length does not match the header size")
    entries = np.frombuffer(payload, dtype="<f8").reshape(size, size).astype(float)
    kind = kinds[code]
    return FormMatrix(kind, entries, s=s if kind == FormKind.frac else None, dim=dim)
