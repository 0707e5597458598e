"""Univariate root location: stability, real-rootedness, interlacing.

Everything downstream reduces multivariate questions to polynomials in one
variable, so this module carries the numerical workhorses: an
Aberth–Ehrlich simultaneous root finder (with a companion-matrix fallback
start), the half-plane stability test (no root with positive imaginary
part; the zero polynomial counts as unstable by convention), real-rooted
detection, classification of interlacing patterns between two real-rooted
polynomials, and a sampled nonpositivity test for the Wronskian
``f' g - g' f``.

A :class:`UniPoly` stores coefficients in ascending degree order and is
canonicalized on construction: trailing coefficients with modulus at or
below ``coeff_zero_tol`` are dropped, so the zero polynomial has an empty
coefficient tuple and degree -1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tolerances import DEFAULT_TOL, ToleranceProfile

__all__ = [
    "UniPoly",
    "InterlaceReport",
    "roots",
    "is_stable_univariate",
    "is_real_rooted",
    "interlacing",
    "wronskian_uni",
    "wronskian_sign_leq0",
]

# Interlacing kinds reported by :func:`interlacing`.
KIND_STRICT = "strict"
KIND_NON_STRICT = "non_strict"
KIND_PROPER = "proper"
KIND_PROPER_REVERSED = "proper_reversed"
KIND_NONE = "none"
KIND_IDENTICAL = "identical_roots"


@dataclass(frozen=True)
class UniPoly:
    """Univariate polynomial with ascending complex coefficients.

    ``UniPoly((c0, c1, c2))`` is ``c0 + c1 t + c2 t^2``.  The public
    constructor canonicalizes: trailing near-zero coefficients are trimmed
    at ``tol.coeff_zero_tol`` (absolute), so ``degree`` of the zero
    polynomial is -1 and ``bool(p)`` tells whether p is nonzero.
    """

    coeffs: tuple[complex, ...]

    def __init__(self, coeffs, tol: ToleranceProfile = DEFAULT_TOL):
        cs = [complex(c) for c in coeffs]
        while cs and abs(cs[-1]) <= tol.coeff_zero_tol:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    # -- basic queries -------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def is_real(self, tol: ToleranceProfile = DEFAULT_TOL) -> bool:
        return all(abs(c.imag) <= tol.coeff_zero_tol for c in self.coeffs)

    @property
    def lead(self) -> complex:
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other: "UniPoly") -> "UniPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for k, c in enumerate(b):
            out[k] += c
        return UniPoly(out)

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        return self + other.scale(-1.0)

    def __mul__(self, other: "UniPoly") -> "UniPoly":
        if not self.coeffs or not other.coeffs:
            return UniPoly(())
        return UniPoly(np.convolve(self.coeffs, other.coeffs))

    def scale(self, factor: complex) -> "UniPoly":
        return UniPoly([factor * c for c in self.coeffs])

    def derivative(self) -> "UniPoly":
        return UniPoly([k * c for k, c in enumerate(self.coeffs)][1:])

    def __call__(self, t):
        """Evaluate by Horner's rule; accepts scalars or arrays."""
        t = np.asarray(t, dtype=complex)
        val = np.zeros_like(t)
        for c in reversed(self.coeffs):
            val = val * t + c
        return val if val.ndim else complex(val)

    @staticmethod
    def from_roots(root_list, lead: complex = 1.0) -> "UniPoly":
        coeffs = np.array([lead], dtype=complex)
        for r in root_list:
            coeffs = np.convolve(coeffs, [-r, 1.0])
        return UniPoly(coeffs)


@dataclass(frozen=True)
class InterlaceReport:
    """Outcome of :func:`interlacing`.

    ``kind`` is one of ``strict``, ``non_strict``, ``proper``,
    ``proper_reversed``, ``identical_roots`` or ``none``; the root arrays
    are the (real parts of the) computed roots, sorted ascending.
    """

    kind: str
    roots_f: np.ndarray = field(repr=False)
    roots_g: np.ndarray = field(repr=False)


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------


def _horner_batch(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    val = np.zeros_like(z)
    for j in range(coeffs.shape[1] - 1, -1, -1):
        val = val * z + coeffs[:, j : j + 1]
    return val


def _batch_quadratic(c: np.ndarray) -> np.ndarray:
    """Roots of c0 + c1 t + c2 t^2 rows, cancellation-safe."""
    c0, c1, c2 = c[:, 0], c[:, 1], c[:, 2]
    disc = c1 * c1 - 4.0 * c2 * c0
    sq = np.sqrt(disc.astype(complex))
    # pick the sign that enlarges |c1 + sq| to avoid cancellation
    flip = np.real(np.conj(c1) * sq) < 0.0
    sq = np.where(flip, -sq, sq)
    q = -0.5 * (c1 + sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(q != 0, q / c2, 0.0)
        r2 = np.where(q != 0, c0 / q, 0.0)
    return np.stack([r1, r2], axis=1)


def _aberth_batch(
    coeffs: np.ndarray,
    max_iter: int = 80,
    start: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Aberth–Ehrlich iteration on a batch of same-degree polynomials.

    Parameters
    ----------
    coeffs : ndarray, shape (B, d+1)
        Ascending coefficients, last column nonzero.
    start : ndarray, optional
        Initial root guesses, shape (B, d); defaults to points on the
        per-row Cauchy-bound circle with an angular offset.

    Returns
    -------
    (z, converged) : tuple
        Root estimates, shape (B, d), and a per-row convergence flag based
        on a backward-stable residual test.
    """
    b, d1 = coeffs.shape
    d = d1 - 1
    monic = coeffs / coeffs[:, -1:]
    dcoeffs = monic[:, 1:] * np.arange(1, d + 1)[np.newaxis, :]

    if start is None:
        radius = 1.0 + np.max(np.abs(monic[:, :-1]), axis=1)
        angles = 2.0 * np.pi * (np.arange(d) + 0.5) / d + 0.43
        z = radius[:, np.newaxis] * np.exp(1j * angles)[np.newaxis, :]
    else:
        z = start.astype(complex).copy()

    eps = np.finfo(float).eps
    active = np.ones(b, dtype=bool)
    for _ in range(max_iter):
        za = z[active]
        ca = monic[active]
        pv = _horner_batch(ca, za)
        dv = _horner_batch(dcoeffs[active], za)
        # residual scale: sum |c_j| |z|^j, evaluated by Horner on moduli
        sv = _horner_batch(np.abs(ca), np.abs(za).astype(complex)).real
        tiny = dv == 0
        if np.any(tiny):
            dv = np.where(tiny, eps, dv)
        w = pv / dv
        diff = za[:, :, np.newaxis] - za[:, np.newaxis, :]
        np.einsum("kii->ki", diff)[...] = 1.0
        s = np.sum(1.0 / diff, axis=2) - 1.0  # subtract the diagonal 1/1 terms
        denom = 1.0 - w * s
        small = np.abs(denom) < 1e-290
        denom = np.where(small, 1.0, denom)
        step = w / denom
        z_new = za - step
        done_rows = np.all(
            (np.abs(pv) <= 16.0 * eps * np.maximum(sv, eps))
            | (np.abs(step) <= 4.0 * eps * (1.0 + np.abs(za))),
            axis=1,
        )
        z[active] = z_new
        still = np.flatnonzero(active)
        active[still[done_rows]] = False
        if not active.any():
            break

    # final residual verdict per row
    pv = _horner_batch(monic, z)
    sv = _horner_batch(np.abs(monic), np.abs(z).astype(complex)).real
    converged = np.all(np.abs(pv) <= 1e6 * eps * np.maximum(sv, eps), axis=1)
    return z, converged


def _roots_batch(coeffs: np.ndarray, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    """All roots for a batch of same-degree polynomials, shape (B, d).

    Rows that resist the circle start are retried from companion-matrix
    eigenvalues (``np.roots``).  No ordering guarantee inside a row.
    """
    b, d1 = coeffs.shape
    d = d1 - 1
    if d <= 0:
        return np.zeros((b, 0), dtype=complex)
    if d == 1:
        return (-coeffs[:, :1] / coeffs[:, 1:]).astype(complex)
    if d == 2:
        return _batch_quadratic(coeffs.astype(complex))
    z, converged = _aberth_batch(coeffs.astype(complex))
    if not np.all(converged):
        for row in np.flatnonzero(~converged):
            comp = np.roots(coeffs[row, ::-1])
            z_row, ok = _aberth_batch(
                coeffs[row : row + 1].astype(complex),
                start=comp[np.newaxis, :],
                max_iter=60,
            )
            z[row] = z_row[0]
    return z


def roots(p: UniPoly, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    """All complex roots of ``p`` with multiplicity, deterministically ordered.

    Uses Aberth–Ehrlich simultaneous iteration started on the Cauchy-bound
    circle, falling back to companion-matrix eigenvalues as the start when
    the first pass stalls.  Each accepted root satisfies
    ``|p(r)| <= tol.root_tol * ||p||_1 * max(1, |r|)^deg``; violation
    raises ``ArithmeticError``.  Roots are sorted by (real, imaginary).

    Raises
    ------
    ValueError
        If ``p`` is the zero polynomial (its root set is all of C).
    """
    if not p:
        raise ValueError("the zero polynomial does not have a root list")
    if p.degree == 0:
        return np.zeros(0, dtype=complex)
    z = _roots_batch(np.array([p.coeffs]), tol=tol)[0]
    norm1 = sum(abs(c) for c in p.coeffs)
    resid = np.abs(p(z))
    bound = tol.root_tol * norm1 * np.maximum(1.0, np.abs(z)) ** p.degree
    if np.any(resid > bound):
        raise ArithmeticError(
            f"root residual {float(np.max(resid)):.3e} exceeds the acceptance bound"
        )
    order = np.lexsort((z.imag, z.real))
    return z[order]


# ---------------------------------------------------------------------------
# Stability and real-rootedness
# ---------------------------------------------------------------------------


def is_stable_univariate(
    p: UniPoly,
    tol: ToleranceProfile = DEFAULT_TOL,
    im_tol: float | None = None,
) -> bool:
    """True iff ``p`` is nonzero and no root lies above the real axis.

    A root ``r`` disproves stability only when ``Im(r) > im_tol`` (default
    ``tol.stability_im_tol``); the slack is one-sided so real roots
    computed with rounding noise never flip the verdict.  The zero
    polynomial is *not* stable, by convention.
    """
    if not p:
        return False
    if p.degree == 0:
        return True
    cut = tol.stability_im_tol if im_tol is None else im_tol
    return bool(np.all(roots(p, tol=tol).imag <= cut))


def is_real_rooted(
    p: UniPoly,
    tol: ToleranceProfile = DEFAULT_TOL,
    im_tol: float | None = None,
) -> bool:
    """True iff every root of ``p`` satisfies ``|Im(r)| <= im_tol``.

    Nonzero constants are vacuously real-rooted; the zero polynomial is
    not (it has no root list).
    """
    if not p:
        return False
    if p.degree == 0:
        return True
    cut = tol.real_root_im_tol if im_tol is None else im_tol
    return bool(np.all(np.abs(roots(p, tol=tol).imag) <= cut))


# ---------------------------------------------------------------------------
# Interlacing
# ---------------------------------------------------------------------------


def _alternates(lo: np.ndarray, hi: np.ndarray, slack: float) -> bool:
    """Weak alternation lo_1 <= hi_1 <= lo_2 <= hi_2 ... for |lo| = |hi| or |lo| = |hi|+1."""
    merged = []
    for k in range(len(hi)):
        if k < len(lo):
            merged.append(lo[k])
        merged.append(hi[k])
    if len(lo) > len(hi):
        merged.append(lo[-1])
    arr = np.asarray(merged)
    return bool(np.all(np.diff(arr) >= -slack))


def _weakly_interlaced(a: np.ndarray, b: np.ndarray, slack: float) -> bool:
    """Roots alternate on the line, in either phase."""
    if len(a) > len(b):
        a, b = b, a
    if len(b) - len(a) > 1:
        return False
    if len(b) == len(a):
        return _alternates(a, b, slack) or _alternates(b, a, slack)
    # |b| = |a| + 1: b must take both extremes
    return _alternates_outer(a, b, slack)


def _alternates_outer(inner: np.ndarray, outer: np.ndarray, slack: float) -> bool:
    """outer_1 <= inner_1 <= outer_2 <= ... <= inner_p <= outer_{p+1}."""
    merged = []
    for k in range(len(inner)):
        merged.append(outer[k])
        merged.append(inner[k])
    merged.append(outer[-1])
    return bool(np.all(np.diff(np.asarray(merged)) >= -slack))


def _descending_chain(first: np.ndarray, second: np.ndarray, slack: float) -> bool:
    """first_1 >= second_1 >= first_2 >= second_2 >= ... on descending-sorted inputs."""
    if not (len(first) == len(second) or len(first) == len(second) + 1):
        return False
    merged = []
    for k in range(len(first)):
        merged.append(first[k])
        if k < len(second):
            merged.append(second[k])
    arr = np.asarray(merged)
    return bool(np.all(np.diff(arr) <= slack))


def _proper_pair(
    rf: np.ndarray, rg: np.ndarray, lead_f: float, lead_g: float, slack: float
) -> bool:
    """Sign-aware alternation making ``g + i f`` a stable combination.

    With agreeing leading signs the top root must belong to g and the
    descending chain alternates g-root, f-root, ...; with opposing signs
    the chain starts from f.  Both comparisons are within ``slack``.
    """
    f_desc = rf[::-1]
    g_desc = rg[::-1]
    if lead_f * lead_g > 0:
        return _descending_chain(g_desc, f_desc, slack)
    return _descending_chain(f_desc, g_desc, slack)


def interlacing(
    f: UniPoly,
    g: UniPoly,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> InterlaceReport:
    """Classify the root pattern of two real, real-rooted polynomials.

    Returns an :class:`InterlaceReport` whose ``kind`` is ``none`` when
    either input is zero, not real, not real-rooted within tolerance, or
    the degrees differ by more than one; ``identical_roots`` when the
    sorted root lists agree within ``tol.root_merge_tol``; ``proper`` /
    ``proper_reversed`` for the sign-aware orientations (f into g,
    respectively g into f); otherwise ``strict`` or ``non_strict`` plain
    alternation.  Roots closer than ``tol.root_merge_tol`` are treated as
    coincident throughout.
    """
    empty = np.zeros(0)
    if not f or not g or not f.is_real(tol) or not g.is_real(tol):
        return InterlaceReport(KIND_NONE, empty, empty)
    if not is_real_rooted(f, tol) or not is_real_rooted(g, tol):
        return InterlaceReport(KIND_NONE, empty, empty)
    rf = np.sort(roots(f, tol).real) if f.degree > 0 else empty
    rg = np.sort(roots(g, tol).real) if g.degree > 0 else empty
    if abs(f.degree - g.degree) > 1:
        return InterlaceReport(KIND_NONE, rf, rg)

    slack = tol.root_merge_tol
    if f.degree == g.degree and (
        f.degree == 0 or bool(np.all(np.abs(rf - rg) <= slack))
    ):
        return InterlaceReport(KIND_IDENTICAL, rf, rg)
    if not _weakly_interlaced(rf, rg, slack):
        return InterlaceReport(KIND_NONE, rf, rg)

    lead_f = float(f.lead.real)
    lead_g = float(g.lead.real)
    if _proper_pair(rf, rg, lead_f, lead_g, slack):
        return InterlaceReport(KIND_PROPER, rf, rg)
    if _proper_pair(rg, rf, lead_g, lead_f, slack):
        return InterlaceReport(KIND_PROPER_REVERSED, rf, rg)

    both = np.sort(np.concatenate([rf, rg]))
    gaps = np.diff(both)
    if len(gaps) == 0 or np.all(gaps > slack):
        return InterlaceReport(KIND_STRICT, rf, rg)
    return InterlaceReport(KIND_NON_STRICT, rf, rg)


# ---------------------------------------------------------------------------
# Wronskian
# ---------------------------------------------------------------------------


def wronskian_uni(f: UniPoly, g: UniPoly) -> UniPoly:
    """The univariate Wronskian ``f' g - g' f``."""
    return f.derivative() * g - g.derivative() * f


def wronskian_sign_leq0(
    f: UniPoly,
    g: UniPoly,
    n_grid: int = 256,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> bool:
    """Decide (numerically) whether ``f' g - g' f <= 0`` holds on all of R.

    The tail behaviour is read off the leading coefficient exactly: an odd
    degree or a positive even-degree leading coefficient forces positive
    values.  The interior is sampled on Chebyshev nodes over ``[-R, R]``
    with ``R`` one plus the Wronskian's root bound, augmented with the
    real critical points (roots of the derivative), so an interior
    positive bump cannot hide between nodes.  Values are accepted while
    ``W(x) <= tol.sign_tol * scale(x)`` with the usual coefficient-mass
    scale.
    """
    if not f.is_real(tol) or not g.is_real(tol):
        raise ValueError("Wronskian sign test expects real polynomials")
    w = wronskian_uni(f, g)
    if not w:
        return True
    lead = w.lead.real
    if w.degree % 2 == 1:
        return False
    if lead > 0:
        return False
    if w.degree == 0:
        return w.coeffs[0].real <= tol.sign_tol

    bound = 1.0 + max(abs(c) for c in w.coeffs[:-1]) / abs(lead)
    nodes = np.cos(np.pi * (np.arange(n_grid) + 0.5) / n_grid) * bound
    crit = roots(w.derivative(), tol)
    crit_real = crit[np.abs(crit.imag) <= tol.real_root_im_tol].real
    xs = np.concatenate([nodes, crit_real, [-bound, bound]])
    vals = w(xs).real
    scale = np.zeros_like(xs)
    ax = np.maximum(1.0, np.abs(xs))
    for j, c in enumerate(w.coeffs):
        scale += abs(c) * ax**j
    return bool(np.all(vals <= tol.sign_tol * np.maximum(scale, 1.0)))
