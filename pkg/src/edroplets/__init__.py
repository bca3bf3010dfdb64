"""Exact solutions of the electrified-droplet free-boundary problem.

Closed-form solution families (conformal maps, Schwarz functions, field
functions), numerical verification of their defining identities, boundary
geometry (curvature, convexity and univalency thresholds), quadratic
differentials on the sphere, and annulus-case diagnostics for two-component
candidates.
"""

__version__ = "0.1.0"

from .families import (
    DropletFamily,
    DropletModel,
    BoundaryTrace,
    circle,
    mcleod,
    ksv,
    twopole,
    mpole,
    twopole_general,
    make_model,
    boundary_trace,
)

__all__ = [
    "__version__",
    "DropletFamily",
    "DropletModel",
    "BoundaryTrace",
    "circle",
    "mcleod",
    "ksv",
    "twopole",
    "mpole",
    "twopole_general",
    "make_model",
    "boundary_trace",
]
