"""Exception types shared across the library."""


class G2CalError(Exception):
    """Base class for all library errors."""


class DegenerateBasis(G2CalError):
    """Plane basis is (numerically) linearly dependent."""


class InvalidResolution(G2CalError):
    """Grid resolution below the supported minimum."""


class MeshQualityError(G2CalError):
    """Mesh contains degenerate or inverted cells."""


class NonClosedSurface(G2CalError):
    """Surface has edges not shared by exactly two triangles."""


class MissingFrames(G2CalError):
    """Domain lacks the tangent/normal frames required by an operator."""


class MissingCurvatureData(G2CalError):
    """Boundary surface lacks principal-curvature fields."""


class DegenerateCell(G2CalError):
    """Tangent triple of a cell is numerically dependent."""


class AmbiguousKernel(G2CalError):
    """No clear spectral gap separates kernel from nonzero modes."""

    def __init__(self, message, candidates=None):
        super().__init__(message)
        self.candidates = candidates or []


class SolverNoConvergence(G2CalError):
    """Iterative eigensolver failed to converge."""


class HolonomyResidualTooLarge(G2CalError):
    """Holonomy sum too far from an integer multiple of 2*pi."""


class InvalidNormal(G2CalError):
    """Supplied vector is not a valid unit normal-bundle direction."""


class NonWellCenteredMesh(G2CalError):
    """Dual volume came out non-positive."""


class ConfigError(G2CalError):
    """Invalid CLI / run configuration."""
