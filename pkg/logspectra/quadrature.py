"""Shared quadrature helpers: Gauss-Legendre panels, sphere rules and a
checked wrapper around :func:`scipy.integrate.quad`."""
import logging
import math
import warnings
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import QuadratureError

logger = logging.getLogger(__name__)

PANEL_ORDER = 16
ROUNDING_FLOOR = 1e-13


@lru_cache
def gauss_legendre(order: int = PANEL_ORDER) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_rule(breaks: Sequence[float], order: int = PANEL_ORDER) -> tuple[np.ndarray, np.ndarray]:
    edges = np.asarray(breaks, dtype=float)
    if edges.size < 2:
        return np.zeros(0), np.zeros(0)
    nodes, weights = gauss_legendre(order)
    left, right = edges[:-1], edges[1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


def sphere_rule(N: int, nodes: int = 256, *, symmetric: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Directions and weights for integrals over the unit sphere S^{N−1}.

    With ``symmetric`` the integrand is assumed even, g(−θ) = g(θ), and only
    half of the sphere is sampled.
    """
    if N == 1:
        if symmetric:
            return np.array([[1.0]]), np.array([2.0])
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if N == 2:
        span = math.pi if symmetric else 2.0 * math.pi
        theta = span * np.arange(nodes) / nodes
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return dirs, np.full(nodes, 2.0 * math.pi / nodes)
    raise ValueError("sphere rules are implemented for N = 1 and N = 2")


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    tol: float,
    power: float | None = None,
    points: Sequence[float] | None = None,
    limit: int = 400,
) -> tuple[float, float]:
    """Adaptive quadrature of f over [a, b]; ``power`` multiplies f by (x−a)^power.

    Returns the value and the error estimate reported by QUADPACK.
    """
    if b <= a:
        return 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        if power is not None:
            value, err = quad(f, a, b, weight="alg", wvar=(power, 0.0), epsabs=tol, epsrel=1e-13, limit=limit)
        else:
            inner = [p for p in (points or []) if a < p < b]
            value, err = quad(f, a, b, epsabs=tol, epsrel=1e-13, limit=limit, points=inner or None)
    return float(value), float(err)


def integrate_pieces(
    f: Callable[[float], float],
    breaks: Sequence[float],
    *,
    tol: float,
    first: Callable[[float], float] | None = None,
    first_power: float | None = None,
    what: str = "integral",
) -> tuple[float, float]:
    """Sum of adaptive integrals over consecutive breakpoints.

    The first piece may use its own integrand ``first`` carrying the algebraic
    weight (x − breaks[0])^first_power.
    Raises QuadratureError when the summed error estimate exceeds ``tol``.
    """
    edges = [float(x) for x in breaks]
    pieces = max(len(edges) - 1, 1)
    total, err_total = 0.0, 0.0
    for index, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        if index == 0 and first is not None:
            value, err = integrate(first, a, b, tol=tol / (2 * pieces), power=first_power)
        else:
            value, err = integrate(f, a, b, tol=tol / (2 * pieces), power=first_power if index == 0 else None)
        total += value
        err_total += err
    logger.debug("%s: %d pieces, value %.6e, error %.2e", what, pieces, total, err_total)
    # the requested tolerance cannot go below the rounding floor of the result
    if err_total > max(tol, ROUNDING_FLOOR * abs(total)):
        raise QuadratureError(f"{what} did not converge", achieved=err_total, tol=tol)
    return total, err_total
