"""recurrence-lab: recurrence statistics of piecewise-affine expanding maps.

Simulates beta, diagonal, and integer-matrix maps on the half-open unit
cube; computes exact and Monte Carlo measures of the recurrence events
T^n x near x with rectangle or hyperboloid targets; runs seeded zero-one-law
and mixing experiments; and evaluates the closed-form Hausdorff-dimension
exponents together with a numeric cover-cost estimator and a full-cylinder
subshift construction.
"""

from . import dimension, geometry, maps, measures, recurrence, subshift
from .kernels import backend_name

__version__ = "0.1.0"

__all__ = ["maps", "geometry", "measures", "recurrence", "dimension",
           "subshift", "backend_name", "__version__"]
