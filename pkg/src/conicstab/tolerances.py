"""Shared numerical tolerances.

Every module takes an optional :class:`ToleranceProfile`; the defaults below
are tuned for double precision at desk scale (matrix dimensions in the tens,
polynomial degrees in the single digits).  Tolerances are grouped here rather
than scattered through the code so that a caller who needs a looser or
tighter regime can thread one object through the whole pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class ToleranceProfile:
    """Numerical slack used across the package.

    Attributes
    ----------
    hermitian_tol : float
        Relative slack when validating Hermitian symmetry of a matrix.
    eig_tol : float
        Acceptable eigendecomposition residual relative to the Frobenius
        norm of the input; also the half-width of the semidefinite
        classification band around zero.
    pivot_tol : float
        LU pivot threshold (relative to the largest input entry) below
        which a matrix is declared singular and its determinant exactly 0.
    coeff_zero_tol : float
        Polynomial coefficients with modulus at or below this are dropped
        during canonicalization.
    root_tol : float
        Univariate root acceptance: |p(r)| <= root_tol * ||p||_1 * max(1,|r|)^deg.
    root_merge_tol : float
        Distance below which two real roots are treated as one cluster when
        classifying interlacing patterns.
    stability_im_tol : float
        One-sided slack on imaginary parts when testing root locations:
        a root with Im(r) <= stability_im_tol does not disprove stability.
    real_root_im_tol : float
        Two-sided |Im| slack when testing real-rootedness.
    sign_tol : float
        Relative slack when testing nonpositivity of a sampled function.
    residual_tol : float
        Witness acceptance: |f(z)| <= residual_tol * sum|coeff| * max(1,|z|)^deg.
    interior_tol : float
        Strict-inequality slack for cone interior membership queries.
    sample_margin : float
        Offset pushing interior samples away from the cone boundary; also
        the unit of the witness margin requirement (margin >= sample_margin/2).
    sample_sigma : float
        Standard deviation of the Gaussian real-part draws in the samplers.
    """

    hermitian_tol: float = 1e-10
    eig_tol: float = 1e-10
    pivot_tol: float = 1e-12
    coeff_zero_tol: float = 1e-12
    root_tol: float = 1e-8
    root_merge_tol: float = 1e-7
    stability_im_tol: float = 1e-9
    real_root_im_tol: float = 1e-9
    sign_tol: float = 1e-9
    residual_tol: float = 1e-6
    interior_tol: float = 1e-9
    sample_margin: float = 1e-3
    sample_sigma: float = 2.0

    def with_overrides(self, **kwargs: float) -> "ToleranceProfile":
        """Return a copy with the named fields replaced."""
        return replace(self, **kwargs)


#: Default profile shared by all modules.
DEFAULT_TOL = ToleranceProfile()
