"""Chart-based computational engine for Finsler metrics.

Evaluates the differential-geometric quantities of a Finsler metric given as
an evaluable norm on a single chart: fundamental tensor, Cartan torsions,
geodesic spray, Riemann / Ricci / flag curvature, S-curvature, Busemann-
Hausdorff volume, and the shortest-time (navigation) deformation by a drift
field.  A gallery of metrics with closed-form reference data and a `finsler`
command-line tool for verification, queries and traces sit on top.
"""

from . import curvature, diffcore, gallery, measures, metrics, navigation, spray, verify
from .errors import (
    ConvergenceError,
    DegenerateFlagError,
    DomainError,
    DriftError,
    FinslerError,
    IntegrationError,
    MetricError,
    OrderCapError,
)

__version__ = "0.1.0"

__all__ = [
    "curvature",
    "diffcore",
    "gallery",
    "measures",
    "metrics",
    "navigation",
    "spray",
    "verify",
    "FinslerError",
    "OrderCapError",
    "DomainError",
    "MetricError",
    "DegenerateFlagError",
    "DriftError",
    "ConvergenceError",
    "IntegrationError",
    "__version__",
]
