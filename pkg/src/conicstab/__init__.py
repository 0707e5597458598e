"""conicstab — stability of multivariate complex polynomials over convex cones.

A polynomial f in C[z_1, ..., z_n] is *stable relative to a cone* K when f
has no root whose imaginary-part vector lies in the interior of K.  The
package provides exact certificates where they exist (linear polynomials,
determinantal constructions from semidefinite block matrices), sampling
falsifiers for everything else, the univariate engines they reduce to
(root finding, interlacing, Wronskian tests), and cone descriptors for
orthants, finitely generated cones, semidefinite cones and products.
"""

from .tolerances import DEFAULT_TOL, ToleranceProfile

__version__ = "0.1.0"

__all__ = ["DEFAULT_TOL", "ToleranceProfile", "__version__"]
