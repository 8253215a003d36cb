"""Uniform perfectness, conformal capacity and Whitney decompositions in the plane.

The subpackages are plain modules:

``geom``       points, annuli, chordal distance
``specfun``    dimensional constants, elliptic integrals, Teichmüller function
``sets``       sampled compact sets, Cantor constructions, the UP estimator
``bounds``     explicit dimension / content / capacity bounds
``domain``     dyadic raster domains with exact boundary distances
``whitney``    Whitney decomposition and its verification
``capacity2d`` discrete Dirichlet-energy capacity solver
``metrics``    distance-ratio and quasihyperbolic metrics
``testfn``     the capacity test function and the Whitney-square test
"""

__version__ = "0.1.0"

from .errors import CrossValidationError, DegenerateCondenserError, DomainError, NonConvergenceError

__all__ = ["CrossValidationError", "DegenerateCondenserError", "DomainError", "NonConvergenceError",
           "__version__"]
