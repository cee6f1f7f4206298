"""Dense generalized symmetric eigensolver for Galerkin pairs (A, M)."""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cholesky, eigh, solve_triangular, subspace_angles

from .config import get_settings
from .errors import DimensionError, MassMatrixError
from .fem import FormMatrix

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10


def _entries(matrix: FormMatrix | np.ndarray) -> np.ndarray:
    return np.asarray(matrix.entries if isinstance(matrix, FormMatrix) else matrix, dtype=float)


def _check_symmetric(a: np.ndarray, name: str) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be a square matrix")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if scale and float(np.max(np.abs(a - a.T))) > SYMMETRY_TOL * scale:
        raise ValueError(f"{name} is not symmetric")


def _mass_factor(m: np.ndarray) -> np.ndarray:
    try:
        return cholesky(m, lower=True)
    except LinAlgError as exc:
        raise MassMatrixError("mass matrix is not positive definite") from exc


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    rows = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[rows, np.arange(vectors.shape[1])])
    signs[signs == 0.0] = 1.0
    return vectors * signs


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    cluster_tol: float = field(default_factory=lambda: get_settings().cluster_tol)

    @property
    def count(self) -> int:
        return int(self.eigenvalues.size)

    def clusters(self, rel_tol: float | None = None) -> list[list[int]]:
        """Groups of 0-based indices whose eigenvalues agree to relative rel_tol."""
        rel_tol = self.cluster_tol if rel_tol is None else rel_tol
        groups: list[list[int]] = []
        for index, value in enumerate(self.eigenvalues):
            if groups:
                anchor = self.eigenvalues[groups[-1][-1]]
                if abs(value - anchor) <= rel_tol * max(abs(value), abs(anchor), 1e-300):
                    groups[-1].append(index)
                    continue
            groups.append([index])
        return groups

    def cluster_of(self, k: int, rel_tol: float | None = None) -> list[int]:
        if not 1 <= k <= self.count:
            raise ValueError(f"k must lie in 1..{self.count}")
        for group in self.clusters(rel_tol):
            if k - 1 in group:
                return group
        raise AssertionError("every index belongs to a cluster")

    def block(self, indices: list[int]) -> np.ndarray:
        return self.eigenvectors[:, indices]

    def to_dict(self) -> dict:
        return {"eigenvalues": self.eigenvalues.tolist(), "residuals": self.residuals.tolist()}


def solve_generalized(A: FormMatrix | np.ndarray, M: FormMatrix | np.ndarray, k: int) -> Spectrum:
    """First k eigenpairs of A v = λ M v, M-orthonormal and sign-normalized.

    Reduced to C = L⁻¹ A L⁻ᵀ with M = L Lᵀ, so v = L⁻ᵀ y.
    """
    a, m = _entries(A), _entries(M)
    _check_symmetric(a, "A")
    _check_symmetric(m, "M")
    if a.shape != m.shape:
        raise DimensionError("A and M must have the same shape")
    size = a.shape[0]
    if not 1 <= k <= size:
        raise ValueError(f"k must lie in 1..{size}")
    factor = _mass_factor(m)
    half = solve_triangular(factor, a, lower=True)
    reduced = solve_triangular(factor, half.T, lower=True)
    reduced = 0.5 * (reduced + reduced.T)
    values, y = eigh(reduced, subset_by_index=[0, k - 1])
    vectors = _fix_signs(solve_triangular(factor.T, y, lower=False))
    residual = a @ vectors - (m @ vectors) * values[None, :]
    residuals = np.linalg.norm(residual, axis=0)
    bound = 1e-9 * max(np.linalg.norm(a, 2), 1.0)
    if np.any(residuals > bound):
        logger.warning("eigen-residual %.3e above %.3e", float(residuals.max()), bound)
    return Spectrum(values, vectors, residuals)


def rayleigh(A: FormMatrix | np.ndarray, M: FormMatrix | np.ndarray, x: np.ndarray) -> float:
    a, m = _entries(A), _entries(M)
    x = np.asarray(x, dtype=float)
    if x.shape != (a.shape[0],):
        raise DimensionError("coordinate vector does not match the matrix size")
    denominator = float(x @ m @ x)
    if not np.any(x) or denominator <= 0.0:
        raise ValueError("Rayleigh quotient of the zero vector is undefined")
    return float(x @ a @ x) / denominator


def subspace_distance(U: np.ndarray, V: np.ndarray, M: FormMatrix | np.ndarray) -> float:
    """Sine of the largest M-principal angle between span(U) and span(V)."""
    m = _entries(M)
    U = np.atleast_2d(np.asarray(U, dtype=float).T).T
    V = np.atleast_2d(np.asarray(V, dtype=float).T).T
    if U.shape != V.shape:
        raise DimensionError("blocks must have the same shape")
    if U.shape[0] != m.shape[0]:
        raise DimensionError("blocks do not match the mass matrix")
    factor = _mass_factor(m)
    angles = subspace_angles(factor.T @ U, factor.T @ V)
    return float(np.clip(np.sin(np.max(angles)), 0.0, 1.0))
