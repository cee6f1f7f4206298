"""Experiment driver for the small-order asymptotics of Dirichlet eigenpairs.

A sweep assembles the log matrix once and the fractional matrix for every
order of the grid on one shared mesh, then derives slopes, eigenfunction
distances and the pointwise diagnostics from the discrete eigenpairs.
"""
import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .config import get_settings
from .constants import bk_bound, ball_radius_r0, ball_radius_r1, frac_constant, kappa_delta, kernel_l2_norm, log_constants
from .fem import FormMatrix, Mesh, assemble_frac, assemble_log, assemble_mass, mesh_for, mesh_interval, nodal_interpolant
from .operators import holder_fit
from .schemas import BoundReport, BoundRow, CheckResult, SlopeRecord, SweepConfig
from .spectra import Spectrum, solve_generalized, subspace_distance
from .testlab import Domain, make_domain

logger = logging.getLogger(__name__)

MASS_NORM_TOL = 1e-10
MONOTONE_SLACK = 0.1
EIGFUN_DISTANCE_TOL = 0.05
ZYGMUND_MAX_DOUBLINGS = 64
ZYGMUND_ROUNDING = 1e-12
# doubled offsets stay within this many domain diameters
ZYGMUND_REACH = 4.0


@dataclass
class SweepResult:
    domain: Domain
    mesh: Mesh
    s_grid: list[float]
    k: int
    quad_tol: float
    mass: FormMatrix
    log_spectrum: Spectrum
    spectra: list[Spectrum]

    def eigenvalues(self, k: int) -> np.ndarray:
        self._check_index(k)
        return np.array([sp.eigenvalues[k - 1] for sp in self.spectra])

    def diff_quotients(self, k: int) -> np.ndarray:
        return (self.eigenvalues(k) - 1.0) / np.asarray(self.s_grid)

    def lambda_log(self, k: int) -> float:
        self._check_index(k)
        return float(self.log_spectrum.eigenvalues[k - 1])

    def _check_index(self, k: int) -> None:
        if not 1 <= k <= self.k:
            raise ValueError(f"k must lie in 1..{self.k}")


@dataclass
class SweepReport:
    config: SweepConfig
    result: SweepResult
    slopes: list[SlopeRecord] = field(default_factory=list)
    diagnostics: list[dict] = field(default_factory=list)
    checks: list[CheckResult] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


def _stage(name: str, s: float | None = None) -> str:
    return name if s is None else f"{name} s={s:g}"


def sweep(
    domain: Domain | dict,
    n: int,
    s_grid: Sequence[float] | None = None,
    k: int = 4,
    quad_tol: float | None = None,
    *,
    workers: int | None = None,
) -> SweepResult:
    """Eigenpairs of the fractional problem along s_grid and of the log problem, on one mesh."""
    settings = get_settings()
    dom = domain if isinstance(domain, Domain) else make_domain(domain)
    grid = sorted(s_grid if s_grid is not None else settings.s_grid, reverse=True)
    if not grid or any(not 0.0 < s <= 0.25 for s in grid):
        raise ValueError("s_grid entries must lie in (0, 1/4]")
    quad_tol = quad_tol if quad_tol is not None else settings.quad_tol
    workers = workers if workers is not None else settings.workers
    mesh = mesh_for(dom, n)
    if not 1 <= k <= mesh.size:
        raise ValueError(f"k must lie in 1..{mesh.size}")

    logger.info("stage begin: %s (%s, n=%d, %d dofs)", _stage("log"), dom.label(), n, mesh.size)
    mass = assemble_mass(mesh)
    log_spectrum = solve_generalized(assemble_log(mesh, quad_tol, workers=workers), mass, k)
    logger.info("stage end: %s lambda_L=%s", _stage("log"), np.array2string(log_spectrum.eigenvalues, precision=8))

    def stage(s: float) -> Spectrum:
        logger.info("stage begin: %s", _stage("frac", s))
        try:
            spectrum = solve_generalized(assemble_frac(mesh, s, quad_tol, workers=workers), mass, k)
        except ValueError as exc:
            exc.add_note(f"while processing s = {s}")
            raise
        logger.info("stage end: %s lambda_1=%.12f", _stage("frac", s), spectrum.eigenvalues[0])
        return spectrum

    with ThreadPoolExecutor(max_workers=workers) as pool:
        spectra = list(pool.map(stage, grid))
    return SweepResult(dom, mesh, grid, k, quad_tol, mass, log_spectrum, spectra)


def richardson_slope(s_values: Sequence[float], eigenvalues: Sequence[float]) -> tuple[float, float]:
    """Extrapolate (λ_s − 1)/s to s = 0 through the three smallest orders.

    The residual is the spread between the quadratic and linear extrapolants.
    """
    s = np.asarray(s_values, dtype=float)
    lam = np.asarray(eigenvalues, dtype=float)
    if s.size != lam.size:
        raise ValueError("s_values and eigenvalues differ in length")
    if s.size < 3:
        raise ValueError("slope fit needs at least 3 grid points")
    order = np.argsort(s)[:3]
    s, q = s[order], (lam[order] - 1.0) / s[order]
    # Neville tableau at s = 0
    table = [q.copy()]
    for level in range(1, 3):
        prev = table[-1]
        table.append(np.array([
            (s[i + level] * prev[i] - s[i] * prev[i + 1]) / (s[i + level] - s[i])
            for i in range(prev.size - 1)
        ]))
    limit = float(table[2][0])
    return limit, abs(limit - float(table[1][0]))


def slope_fit(res: SweepResult, k: int) -> tuple[float, float]:
    return richardson_slope(res.s_grid, res.eigenvalues(k))


def slope_records(res: SweepResult, ks: Sequence[int] | None = None) -> list[SlopeRecord]:
    records = []
    for k in ks or range(1, res.k + 1):
        slope, residual = slope_fit(res, k)
        lam = res.lambda_log(k)
        relerr = abs(slope - lam) / max(abs(lam), 1e-300)
        records.append(SlopeRecord(k=k, slope=slope, residual=residual, lambda_L=lam, relerr=relerr))
    return records


def upper_line(res: SweepResult, k: int) -> float:
    """C_k = max_s (λ_{k,s} − 1)/s, so λ_{k,s} ≤ 1 + s·C_k on the grid."""
    return float(np.max(res.diff_quotients(k)))


def eigfun_convergence(res: SweepResult, k: int) -> list[float | None]:
    log_cluster = res.log_spectrum.cluster_of(k)
    log_block = res.log_spectrum.block(log_cluster)
    distances: list[float | None] = []
    for s, spectrum in zip(res.s_grid, res.spectra):
        cluster = spectrum.cluster_of(k)
        if len(cluster) != len(log_cluster):
            logger.warning("k=%d at s=%g: cluster sizes %d and %d are incomparable", k, s, len(cluster), len(log_cluster))
            distances.append(None)
            continue
        distances.append(subspace_distance(spectrum.block(cluster), log_block, res.mass))
    return distances


def aligned_distance(res: SweepResult, k: int = 1) -> np.ndarray:
    target = res.log_spectrum.eigenvectors[:, k - 1]
    out = []
    for spectrum in res.spectra:
        diff = spectrum.eigenvectors[:, k - 1] - target
        out.append(math.sqrt(max(float(diff @ res.mass.entries @ diff), 0.0)))
    return np.asarray(out)


def sup_distance(res: SweepResult, k: int = 1) -> np.ndarray:
    """Nodal max |φ_{k,s} − φ_{k,L}|, each φ_{k,s} flipped to a nonnegative M-pairing with φ_{k,L}."""
    target = res.log_spectrum.eigenvectors[:, k - 1]
    out = []
    for v in _vectors(res, k):
        sign = 1.0 if float(v @ res.mass.entries @ target) >= 0.0 else -1.0
        out.append(float(np.max(np.abs(sign * v - target))))
    return np.asarray(out)


def is_decreasing(values: Sequence[float | None], slack: float = 0.0) -> bool:
    seq = [v for v in values if v is not None]
    return all(b <= (1.0 + slack) * a for a, b in zip(seq[:-1], seq[1:]))


def uniform_ratio(values: Sequence[float]) -> float:
    arr = np.asarray([v for v in values if v is not None], dtype=float)
    if arr.size == 0:
        return float("nan")
    low = float(np.min(np.abs(arr)))
    return float(np.max(np.abs(arr))) / low if low > 0.0 else math.inf


def _vectors(res: SweepResult, k: int) -> list[np.ndarray]:
    res._check_index(k)
    return [spectrum.eigenvectors[:, k - 1] for spectrum in res.spectra]


def linfty_profile(res: SweepResult, k: int) -> np.ndarray:
    return np.array([float(np.max(np.abs(v))) for v in _vectors(res, k)])


def decay_profile(res: SweepResult, k: int) -> np.ndarray:
    """max over interior nodes of |φ_{k,s}(x)| / δ_Ω(x)^s."""
    delta = res.domain.delta(res.mesh.interior_nodes())
    return np.array([float(np.max(np.abs(v) / delta**s)) for s, v in zip(res.s_grid, _vectors(res, k))])


def log_decay_profile(res: SweepResult, k: int, tau: float = 0.5) -> np.ndarray:
    """max over nodes with δ_Ω < 1 of |φ_{k,s}(x)|·(−ln δ_Ω(x))^τ; reported only."""
    delta = res.domain.delta(res.mesh.interior_nodes())
    near = delta < 1.0
    if not np.any(near):
        return np.zeros(len(res.s_grid))
    weight = (-np.log(delta[near])) ** tau
    return np.array([float(np.max(np.abs(v[near]) * weight)) for v in _vectors(res, k)])


def oscillation_modulus(
    res: SweepResult,
    k: int,
    x0: Sequence[float] | float,
    radii: Sequence[float],
) -> tuple[np.ndarray, np.ndarray]:
    """Nodal oscillation over B_r(x0) per order and radius, plus the 3s-Hölder quotient on B_{r/8}(x0).

    The quotient uses the largest radius.
    """
    point = np.atleast_1d(np.asarray(x0, dtype=float))
    if point.size != res.domain.dim:
        raise ValueError("x0 has the wrong dimension")
    radii = list(radii)
    if not radii or any(r <= 0.0 for r in radii):
        raise ValueError("radii must be positive")
    reach = float(res.domain.delta(point[None, :])[0])
    if max(radii) > reach:
        raise ValueError(f"radius {max(radii):g} exceeds the distance {reach:g} from x0 to the boundary")
    nodes = res.mesh.interior_nodes()
    dist = np.linalg.norm(nodes - point[None, :], axis=-1)
    osc = np.zeros((len(res.s_grid), len(radii)))
    holder = np.zeros(len(res.s_grid))
    inner = dist < max(radii) / 8.0
    for i, (s, v) in enumerate(zip(res.s_grid, _vectors(res, k))):
        for j, r in enumerate(radii):
            ball = v[dist < r]
            osc[i, j] = float(np.max(ball) - np.min(ball)) if ball.size else 0.0
        if np.count_nonzero(inner) >= 2:
            holder[i] = holder_fit(v[inner], nodes[inner], 3.0 * s)
    return osc, holder


def _power_integrals(ya: np.ndarray, yb: np.ndarray, s: float) -> tuple[np.ndarray, np.ndarray]:
    safe = np.where(ya > 0.0, ya, 1.0)
    i0 = np.where(ya > 0.0, (safe ** (-2.0 * s) - yb ** (-2.0 * s)) / (2.0 * s), 0.0)
    i1 = (yb ** (1.0 - 2.0 * s) - ya ** (1.0 - 2.0 * s)) / (1.0 - 2.0 * s)
    return i0, i1


def _piecewise_integral(values: np.ndarray, breaks: np.ndarray, s: float) -> float:
    """Exact ∫ D(y) y^{−1−2s} dy for D linear between breaks, given at the breaks."""
    ya, yb = breaks[:-1], breaks[1:]
    beta = (values[1:] - values[:-1]) / (yb - ya)
    alpha = values[:-1] - beta * ya
    i0, i1 = _power_integrals(ya, yb, s)
    return float(np.sum(alpha * i0 + beta * i1))


def _truncated_at_node(phi: Callable, nodes: np.ndarray, x: float, t0: float, s: float) -> tuple[float, float]:
    """(∫_0^{t0}, ∫_{t0}^∞) of the symmetric second difference of φ at x against y^{−1−2s}."""
    offsets = np.unique(np.abs(nodes - x))
    center = float(phi(x))
    near = np.unique(np.concatenate([[0.0, t0], offsets[(offsets > 0.0) & (offsets < t0)]]))
    d_near = 2.0 * center - phi(x + near) - phi(x - near)
    d_near[0] = 0.0
    truncated = _piecewise_integral(d_near, near, s)
    far_breaks = np.unique(np.concatenate([[t0], offsets[offsets > t0]]))
    if far_breaks.size < 2:
        return truncated, 0.0
    f_far = phi(x + far_breaks) + phi(x - far_breaks)
    return truncated, _piecewise_integral(f_far, far_breaks, s)


def truncated_kernel_stat(res: SweepResult, k: int, t0: float, r: float) -> dict:
    """Truncated-kernel integral of the piecewise-linear φ_{k,s} at nodes with δ_Ω > r.

    Returns per-order maxima ``values`` and ``residuals``, the relative defect
    of C_{1,s}(truncated + far-field completion) against λ_{k,s}φ_{k,s}.
    Both lists are None for rectangle domains.
    """
    if t0 <= 0.0 or r <= 0.0:
        raise ValueError("t0 and r must be positive")
    if res.domain.dim != 1:
        return {"values": None, "residuals": None}
    nodes = res.mesh.interior_nodes()[:, 0]
    qualifying = nodes[res.domain.delta(nodes) > r]
    if qualifying.size == 0:
        logger.warning("no interior node has distance above %g to the boundary", r)
        return {"values": [], "residuals": []}
    values, residuals = [], []
    for s, spectrum, v in zip(res.s_grid, res.spectra, _vectors(res, k)):
        phi = nodal_interpolant(res.mesh, v)
        c = frac_constant(1, s)
        lam = spectrum.eigenvalues[k - 1]
        stat, defect = 0.0, 0.0
        for x in qualifying:
            truncated, far = _truncated_at_node(phi, res.mesh.axes[0], float(x), t0, s)
            center = float(phi(x))
            completed = c * (truncated + 2.0 * center * t0 ** (-2.0 * s) / (2.0 * s) - far)
            stat = max(stat, abs(truncated))
            defect = max(defect, abs(completed - lam * center))
        values.append(stat)
        residuals.append(defect / max(float(np.max(np.abs(v))), 1e-300))
    return {"values": values, "residuals": residuals}


def _evaluate(v: Callable, pts: np.ndarray) -> np.ndarray:
    arg = pts[:, 0] if pts.shape[1] == 1 else pts
    return np.asarray(v(arg), dtype=float).reshape(-1)


def zygmund_check(
    v: Callable,
    tau: float,
    sample: Sequence[tuple],
    *,
    reach: float | None = None,
) -> tuple[float, float]:
    """Sampled Hölder-Zygmund seminorm v_τ and the worst first-difference violation.

    Every pair (x, h) is completed dyadically with (x, 2^j h) until the
    remainder |v(x + 2^J h) − v(x)|/2^J is below the running bound, so for
    bounded v the telescoped estimate |v(x+h) − v(x)| ≤ v_τ|h|^τ/(1 − 2^{τ−1})
    holds for every sampled pair. Offsets 2^{j+1}|h| never exceed ``reach``,
    which defaults to twice the diameter of the sampled points x and x + h.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    if not sample:
        raise ValueError("sample must not be empty")
    pairs = []
    for x, h in sample:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        h = np.atleast_1d(np.asarray(h, dtype=float))
        pairs.append((x, h, float(np.linalg.norm(h))))
    if reach is None:
        cloud = np.concatenate([np.stack([x, x + h]) for x, h, _ in pairs])
        reach = 2.0 * float(np.linalg.norm(np.ptp(cloud, axis=0)))
    if reach <= 0.0:
        raise ValueError("reach must be positive")
    factor = 1.0 / (1.0 - 2.0 ** (tau - 1.0))
    v_tau = 0.0
    firsts: list[tuple[float, float]] = []
    for x, h, size in pairs:
        if size == 0.0 or 2.0 * size > reach:
            continue
        base = _evaluate(v, x[None, :])[0]
        first = None
        for j in range(ZYGMUND_MAX_DOUBLINGS):
            step = 2.0**j
            if 2.0 * step * size > reach:
                break
            vals = _evaluate(v, np.stack([x + step * h, x + 2.0 * step * h]))
            second = abs(2.0 * vals[0] - vals[1] - base)
            v_tau = max(v_tau, second / (step * size) ** tau)
            if first is None:
                first = abs(vals[0] - base)
            remainder = abs(vals[0] - base) / step
            if step * size >= min(1.0, 0.5 * reach) and remainder <= 0.5 * factor * v_tau * size**tau:
                break
        firsts.append((first, size))
    worst = max((first - factor * v_tau * size**tau for first, size in firsts), default=0.0)
    return v_tau, worst


def bound_checks(
    N: int,
    s_grid: Sequence[float],
    *,
    n: int = 512,
    k: int = 4,
    r: float = 2.0,
    refine: bool = True,
    galerkin: bool = True,
    quad_tol: float | None = None,
) -> BoundReport:
    """Ball bounds, the radius r_0 and, for N = 1, the Galerkin comparisons on (−1, 1)."""
    grid = sorted(s_grid, reverse=True)
    report = BoundReport(N=N, r0=ball_radius_r0(N))
    if grid:
        report.r1 = ball_radius_r1(N, min(grid))
    report.rows = [BoundRow(s=s, bk_bound=bk_bound(N, s)) for s in grid]
    if N != 1 or not grid or not galerkin:
        return report

    mesh = mesh_interval(-1.0, 1.0, n)
    scaled = mesh.scaled(r)
    k = min(k, mesh.size)
    mass, mass_r = assemble_mass(mesh), assemble_mass(scaled)
    lam_L = solve_generalized(assemble_log(mesh, quad_tol), mass, k).eigenvalues
    lam_L_r = solve_generalized(assemble_log(scaled, quad_tol), mass_r, k).eigenvalues
    report.log_shift_gap = float(np.max(np.abs(lam_L_r + 2.0 * math.log(r) - lam_L)))

    bk_ok, scale_ok, monotone_ok = True, True, True
    fine = mesh_interval(-1.0, 1.0, 2 * n) if refine else None
    for row in report.rows:
        lam = solve_generalized(assemble_frac(mesh, row.s, quad_tol), mass, k).eigenvalues
        lam_r = solve_generalized(assemble_frac(scaled, row.s, quad_tol), mass_r, k).eigenvalues
        row.lambda_1 = float(lam[0])
        row.scaled_gap = float(np.max(np.abs(lam_r * r ** (2.0 * row.s) - lam) / lam))
        bk_ok &= row.lambda_1 >= row.bk_bound
        scale_ok &= row.scaled_gap <= 1e-8
        if fine is not None:
            kk = min(k, 8)
            lam_fine = solve_generalized(assemble_frac(fine, row.s, quad_tol), assemble_mass(fine), kk).eigenvalues
            monotone_ok &= bool(np.all(lam_fine <= lam[:kk] * (1.0 + 1e-10)))
    report.checks.append(CheckResult(name="bk-lower-bound", passed=bk_ok, detail="lambda_1,s((-1,1)) >= BK bound"))
    report.checks.append(CheckResult(name="frac-scaling", passed=scale_ok, detail=f"r = {r:g}"))
    report.checks.append(
        CheckResult(
            name="log-shift",
            passed=report.log_shift_gap <= 1e-8 * max(1.0, float(np.max(np.abs(lam_L)))),
            value=report.log_shift_gap,
            detail=f"lambda_L(r Omega) + 2 ln r vs lambda_L(Omega), r = {r:g}",
        )
    )
    if refine:
        report.checks.append(CheckResult(name="galerkin-monotone", passed=monotone_ok, detail=f"n = {n} -> {2 * n}"))
    return report


def linfty_report(res: SweepResult, delta: float) -> dict:
    """g_δ(s) = λ_{1,s} − κ_{δ,s} against its first-order model and the kernel norms per order."""
    N = res.domain.dim
    _, rho, _ = log_constants(N)
    lam_L = res.lambda_log(1)
    coefficient = lam_L - rho + 2.0 * math.log(delta)
    rows = []
    for s, lam in zip(res.s_grid, res.eigenvalues(1)):
        rows.append(
            {
                "s": s,
                "g_delta": float(lam - kappa_delta(N, s, delta)),
                "model": coefficient * s,
                "kernel_norm_over_s": kernel_l2_norm(N, s, delta) / s,
            }
        )
    return {
        "delta": delta,
        "coefficient": coefficient,
        "recommended_delta": math.exp(0.5 * (rho - lam_L - 2.0)),
        "d_tilde": max(row["kernel_norm_over_s"] for row in rows),
        "rows": rows,
    }


def _default_x0(dom: Domain) -> list[float]:
    return (0.5 * (dom.lower + dom.upper)).tolist()


def _zygmund_sample(res: SweepResult, seed: int, count: int = 1000) -> list[tuple[np.ndarray, np.ndarray]]:
    rng = np.random.default_rng(seed)
    lower, upper = res.domain.lower, res.domain.upper
    xs = rng.uniform(lower, upper, size=(count, res.domain.dim))
    hs = rng.uniform(-1.0, 1.0, size=(count, res.domain.dim)) * 10.0 ** rng.uniform(-3.0, 0.0, size=(count, 1))
    return list(zip(xs, hs))


def run_sweep(cfg: SweepConfig | dict, *, workers: int | None = None) -> SweepReport:
    if isinstance(cfg, dict):
        cfg = SweepConfig.model_validate(cfg)
    settings = get_settings()
    workers = workers if workers is not None else cfg.workers
    res = sweep(cfg.domain.model_dump(), cfg.n, cfg.s_grid, cfg.k, cfg.quad_tol, workers=workers)
    report = SweepReport(config=cfg, result=res)
    factor = settings.uniformity_factor
    ks = range(1, res.k + 1)
    checks = report.checks

    logger.info("stage begin: diagnostics")
    ascending = all(bool(np.all(np.diff(sp.eigenvalues) >= 0.0)) for sp in res.spectra + [res.log_spectrum])
    checks.append(CheckResult(name="eigenvalues-ascending", passed=ascending))
    simple = all(len(sp.cluster_of(1)) == 1 for sp in res.spectra)
    checks.append(CheckResult(name="lambda1-simple", passed=simple))
    gram = max(
        float(np.max(np.abs(sp.eigenvectors.T @ res.mass.entries @ sp.eigenvectors - np.eye(res.k))))
        for sp in res.spectra + [res.log_spectrum]
    )
    checks.append(CheckResult(name="mass-normalized", passed=gram <= MASS_NORM_TOL, value=gram))

    first_ks = [k for k in ks if k <= 4]
    approach = all(is_decreasing(np.abs(res.eigenvalues(k) - 1.0)) for k in first_ks)
    checks.append(CheckResult(name="approach-one", passed=approach, detail="|lambda_k,s - 1| decreasing as s decreases"))

    lower_ok, upper_ok = True, True
    for k in ks:
        tol = settings.slope_rel_tol * max(1.0, abs(res.lambda_log(k)))
        quotients = res.diff_quotients(k)
        lower_ok &= bool(np.all(quotients >= res.lambda_log(1) - tol))
        upper_ok &= bool(quotients[-1] <= res.lambda_log(k) + tol)
    checks.append(CheckResult(name="bracket-lower", passed=lower_ok))
    checks.append(CheckResult(name="bracket-upper", passed=upper_ok, detail="checked at the smallest s"))

    if len(res.s_grid) >= 3:
        report.slopes = slope_records(res)
        worst = max(rec.relerr for rec in report.slopes if rec.k <= 4)
        checks.append(CheckResult(name="slope-relerr", passed=worst <= settings.slope_rel_tol, value=worst))

    distances = {k: eigfun_convergence(res, k) for k in ks}
    final = [d[-1] for k, d in distances.items() if k <= 4 and d[-1] is not None]
    checks.append(
        CheckResult(name="eigfun-distance", passed=all(d <= EIGFUN_DISTANCE_TOL for d in final), value=max(final, default=0.0))
    )
    for k, seq in distances.items():
        if k > 1 and not is_decreasing(seq, MONOTONE_SLACK):
            logger.warning("eigenfunction distances for k=%d are not monotone along the grid", k)
    aligned = aligned_distance(res, 1)
    checks.append(CheckResult(name="eigfun-aligned-monotone", passed=is_decreasing(aligned, MONOTONE_SLACK)))

    x0 = cfg.x0 if cfg.x0 is not None else _default_x0(res.domain)
    supnorms = {k: linfty_profile(res, k) for k in ks}
    decays = {k: decay_profile(res, k) for k in ks}
    kernels = {k: truncated_kernel_stat(res, k, cfg.t0, cfg.r_margin) for k in ks}
    oscs = {k: oscillation_modulus(res, k, x0, cfg.radii) for k in ks}
    ratios = {
        "supnorm": max(uniform_ratio(supnorms[k]) for k in first_ks),
        "decaystat": max(uniform_ratio(decays[k]) for k in first_ks),
    }
    for name, ratio in ratios.items():
        checks.append(CheckResult(name=f"uniform-{name}", passed=ratio <= factor, value=ratio))
    if res.domain.dim == 1 and all(kernels[k]["values"] for k in first_ks):
        ratio = max(uniform_ratio(kernels[k]["values"]) for k in first_ks)
        checks.append(CheckResult(name="uniform-kernelstat", passed=ratio <= factor, value=ratio))
    sorted_radii = np.argsort(cfg.radii)[::-1]
    osc_ok = all(bool(np.all(np.diff(oscs[k][0][:, sorted_radii], axis=1) <= 0.0)) for k in ks)
    checks.append(CheckResult(name="osc-monotone", passed=osc_ok))

    v_tau, violation = zygmund_check(
        nodal_interpolant(res.mesh, res.spectra[-1].eigenvectors[:, 0]),
        cfg.tau,
        _zygmund_sample(res, cfg.seed),
        reach=ZYGMUND_REACH * res.domain.diameter,
    )
    checks.append(CheckResult(name="zygmund-bound", passed=violation <= ZYGMUND_ROUNDING, value=violation, detail=f"v_tau = {v_tau!r}"))

    for s_index, s in enumerate(res.s_grid):
        for k in ks:
            row = {"s": s, "k": k, "supnorm": supnorms[k][s_index], "decaystat": decays[k][s_index]}
            for j, value in enumerate(oscs[k][0][s_index]):
                row[f"osc_r{j + 1}"] = value
            values = kernels[k]["values"]
            row["kernelstat"] = values[s_index] if values else None
            report.diagnostics.append(row)

    report.extras = {
        "upper_line": {str(k): upper_line(res, k) for k in ks},
        "eigfun_distance": {str(k): d for k, d in distances.items()},
        "aligned_distance": aligned.tolist(),
        "sup_distance": {str(k): sup_distance(res, k).tolist() for k in ks},
        "first_sign_definite": [bool(np.all(sp.eigenvectors[:, 0] > 0.0)) for sp in res.spectra],
        "holder_constant": {str(k): float(np.max(oscs[k][1])) for k in ks},
        "eigen_residual": {str(k): kernels[k]["residuals"] for k in ks},
        "log_decay": {str(k): log_decay_profile(res, k, cfg.tau).tolist() for k in ks},
        "linfty": linfty_report(res, cfg.delta),
    }
    logger.info("stage end: diagnostics (%d checks, passed=%s)", len(checks), report.passed)
    return report


def load_config(path: str | Path) -> SweepConfig:
    with Path(path).open(encoding="utf-8") as f:
        return SweepConfig.model_validate(json.load(f))


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def write_outputs(report: SweepReport, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    res = report.result
    ks = range(1, res.k + 1)
    paths = [
        _write_csv(
            out / "eigenvalues.csv",
            ["s", "k", "lambda", "diffquot"],
            [[s, k, res.eigenvalues(k)[i], res.diff_quotients(k)[i]] for i, s in enumerate(res.s_grid) for k in ks],
        ),
        _write_csv(out / "logeigs.csv", ["k", "lambda_L"], [[k, res.lambda_log(k)] for k in ks]),
        _write_csv(
            out / "slopes.csv",
            ["k", "slope", "residual", "lambda_L", "relerr"],
            [[r.k, r.slope, r.residual, r.lambda_L, r.relerr] for r in report.slopes],
        ),
    ]
    osc_cols = [f"osc_r{j + 1}" for j in range(len(report.config.radii))]
    columns = ["s", "k", "supnorm", "decaystat", *osc_cols, "kernelstat"]
    paths.append(_write_csv(out / "diagnostics.csv", columns, [[row[c] for c in columns] for row in report.diagnostics]))
    payload = {
        "config": report.config.model_dump(mode="json"),
        "passed": report.passed,
        "checks": [check.model_dump() for check in report.checks],
        **report.extras,
    }
    report_path = out / "report.json"
    report_path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    paths.append(report_path)
    logger.info("wrote %d files to %s", len(paths), out)
    return paths
