"""Zeta-regularized vacuum stress-energy of a massless scalar field around a
point impurity in three dimensions."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BesselOverflowError,
    DomainError,
    IntegrandNaNError,
    PointZetaError,
    PoleError,
    QuadratureError,
)
from .kernels import CartesianPoint, ImpurityConfig, SphericalPoint  # noqa: E402
from .stress import (  # noqa: E402
    ConformalSplit,
    LaurentAtOrigin,
    StressTensorDiagonal,
    conformal_parts,
    t00_continuation,
    t00_laurent_at_zero,
    t_regularized,
    t_renormalized,
)

__all__ = [
    "__version__",
    "BesselOverflowError",
    "DomainError",
    "IntegrandNaNError",
    "PointZetaError",
    "PoleError",
    "QuadratureError",
    "CartesianPoint",
    "ImpurityConfig",
    "SphericalPoint",
    "ConformalSplit",
    "LaurentAtOrigin",
    "StressTensorDiagonal",
    "conformal_parts",
    "t00_continuation",
    "t00_laurent_at_zero",
    "t_regularized",
    "t_renormalized",
]
