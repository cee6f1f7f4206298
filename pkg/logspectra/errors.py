class QuadratureError(ValueError):
    """Adaptive quadrature stopped before reaching the requested tolerance."""

    def __init__(self, message: str, *, achieved: float, tol: float):
        super().__init__(f"{message} (achieved {achieved:.3e}, requested {tol:.3e})")
        self.achieved = achieved
        self.tol = tol


class CutoffError(QuadratureError):
    """The Fourier tail beyond the cutoff is larger than the tolerance."""


class MassMatrixError(ValueError):
    pass


class DimensionError(ValueError):
    pass


class MatrixFormatError(ValueError):
    pass
