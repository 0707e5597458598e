"""Decision procedures for cone-relative stability of complex polynomials.

A polynomial f is stable relative to a proper convex cone K when f(z) is
never zero for Im(z) in the interior of K.  Exact decisions exist only in
special situations (degree at most one: `linear_k_stability`); everything
else here is a *falsifier*: it can prove instability by producing a zero
with interior imaginary part, or report that a sampling budget found
nothing.  The Verdict type keeps that asymmetry explicit — sampling never
returns "certified_stable".

Two search probes share every draw (x, y) with x Gaussian and y an
interior sample of K:

* line probe — the univariate restriction t -> f(x + t y).  A root
  t = alpha + i beta with beta > 0 gives the zero z = x + t y whose
  imaginary part beta*y is interior.  This covers everything whose
  instability is visible on a positive-measure set of lines.
* fiber probe — fix all variables but one at x_j + i y_j and solve the
  remaining univariate coordinate fiber exactly.  The resulting zero has
  its imaginary part pinned to y off the solved coordinate, which lands
  exactly on instability sets of measure zero (products of real linear
  forms, difference-of-squares factorizations, ...) that the line probe
  provably cannot hit: their line restrictions are real-rooted for every
  (x, y), so only the fiber probe can exhibit the witness.

Witnesses are always confirmed at scalar precision before a verdict is
issued: the candidate root is re-solved, polished by a single damped
Newton step along its line or fiber (never in the full variable space),
and accepted only if |f(z)| <= residual_tol * sum|coeff| * max(1,|z|)^deg
and the imaginary part clears an interior margin of half the sampling
margin.  Batch screening (vectorized roots, vectorized cone margins) only
selects candidates and can never flip a verdict on its own.

Determinism: sampling operations take an integer seed (the ``rng``
argument).  Draw j is a pure function of (seed, j) — blocks of fixed size
are generated from per-block generators seeded by (seed, block index) —
so enlarging the budget replays the same prefix, parallel evaluation
cannot reorder draws, and the first confirmed witness (lowest draw index,
line probe before fiber probe, roots in lexicographic order) is the same
on every run.

The zero polynomial is unstable by convention everywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cones import Cone, Orthant, Polyhedral, product
from .poly import MultiPoly, wronskian_v
from .tolerances import DEFAULT_TOL, ToleranceProfile
from .unistab import UniPoly, _roots_batch, roots

__all__ = [
    "CERTIFIED_STABLE",
    "CERTIFIED_UNSTABLE",
    "FALSIFIED",
    "NOT_FALSIFIED",
    "Verdict",
    "HbLiftReport",
    "PencilEntry",
    "PencilReport",
    "DirectionReport",
    "WronskianReport",
    "DecomposeReport",
    "linear_k_stability",
    "falsify_k_stability",
    "hyperbolicity_check",
    "hb_lift_check",
    "pencil_hko_check",
    "wronskian_certificate",
    "decompose_check",
    "imaginary_projection_sample",
    "specialize_stability_check",
]

CERTIFIED_STABLE = "certified_stable"
CERTIFIED_UNSTABLE = "certified_unstable"
FALSIFIED = "falsified"
NOT_FALSIFIED = "not_falsified"

_BLOCK = 2048
_DIR_SALT = 0x5EED_D12  # sub-stream tags for derived generators
_PTS_SALT = 0x5EED_901
_LIN_SALT = 0x11EA_4


@dataclass(frozen=True)
class Verdict:
    """Outcome of a stability decision or falsification attempt.

    ``status`` is one of the four module constants.  ``witness`` (when
    present) is a complex vector with f(witness) ~ 0 and Im(witness)
    strictly interior to the cone; ``residual`` is |f(witness)|.
    ``samples`` counts the draws consumed (0 for exact routes), ``seed``
    echoes the root seed of sampling routes (None for exact ones).
    """

    status: str
    witness: np.ndarray | None = None
    certificate: str | None = None
    samples: int = 0
    seed: int | None = None
    residual: float | None = None

    @property
    def falsified(self) -> bool:
        return self.status in (FALSIFIED, CERTIFIED_UNSTABLE)


@dataclass(frozen=True)
class HbLiftReport:
    """Paired verdicts for g+if over K and g+wf over K x halfline."""

    direct: Verdict
    lifted: Verdict
    consistent: bool


@dataclass(frozen=True)
class PencilEntry:
    lam: float
    mu: float
    zero: bool
    verdict: Verdict | None


@dataclass(frozen=True)
class PencilReport:
    """Both sides of the pencil equivalence, for consistency analysis.

    ``pencil_clean`` — no nonzero member lam*f + mu*g was falsified;
    ``combo_clean`` — at least one of f+ig, g+if survived falsification.
    The theorem predicts the two flags agree; disagreements are listed
    (they can only ever be sampling misses, never hard counterexamples,
    since falsification is one-sided).
    """

    entries: tuple[PencilEntry, ...]
    f_plus_ig: Verdict
    g_plus_if: Verdict
    pencil_clean: bool
    combo_clean: bool
    inconsistencies: tuple[str, ...]

    @property
    def consistent(self) -> bool:
        return not self.inconsistencies


@dataclass(frozen=True)
class DirectionReport:
    direction: np.ndarray
    holds: bool
    max_violation: float
    disproof_points: tuple[tuple[np.ndarray, float], ...]


@dataclass(frozen=True)
class WronskianReport:
    directions: tuple[DirectionReport, ...]

    @property
    def holds_all(self) -> bool:
        return all(d.holds for d in self.directions)


@dataclass(frozen=True)
class DecomposeReport:
    whole: Verdict
    real_part: Verdict | None
    imag_part: Verdict | None
    consistent: bool


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------


def _as_seed(rng) -> int:
    if isinstance(rng, (bool, float)) or not isinstance(rng, (int, np.integer)):
        raise TypeError(
            "sampling routines take an integer seed (per-draw streams are "
            "derived from it); got " + type(rng).__name__
        )
    if rng < 0:
        raise ValueError("seed must be nonnegative")
    return int(rng)


def _check_fit(f: MultiPoly, K: Cone) -> None:
    if f.nvars != K.dim:
        raise ValueError(
            f"polynomial in {f.nvars} variables does not fit a cone of dimension {K.dim}"
        )


def _coeff_scale(f: MultiPoly, z: np.ndarray) -> float:
    grow = max(1.0, float(np.max(np.abs(z)))) if z.size else 1.0
    return f.coeff_norm1() * grow ** max(f.degree, 0)


def _blocks(seed: int, n: int, K: Cone, sigma: float, n_samples: int, margin: float):
    """Yield (start_index, x, y) blocks; content depends only on (seed, block)."""
    bi = 0
    while bi * _BLOCK < n_samples:
        gen = np.random.default_rng((seed, bi))
        x = gen.normal(0.0, sigma, (_BLOCK, n))
        u = gen.standard_normal((_BLOCK, K.draw_dim))
        y = K.interior_from_normals(u, margin)
        take = min(n_samples - bi * _BLOCK, _BLOCK)
        yield bi * _BLOCK, x[:take], y[:take]
        bi += 1


def _restriction_batch(f: MultiPoly, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Coefficients of t -> f(x_row + t y_row) for every row, shape (B, deg+1)."""
    B = x.shape[0]
    out = np.zeros((B, max(f.degree, 0) + 1), dtype=complex)
    for e, c in f.terms.items():
        fac = np.full((B, 1), c, dtype=complex)
        for k, a in enumerate(e):
            if a == 0:
                continue
            xk = x[:, k : k + 1]
            yk = y[:, k : k + 1]
            for _ in range(a):
                nxt = np.zeros((B, fac.shape[1] + 1), dtype=complex)
                nxt[:, :-1] = fac * xk
                nxt[:, 1:] += fac * yk
                fac = nxt
        out[:, : fac.shape[1]] += fac
    return out


def _uni_from_onevar(p: MultiPoly, tol: ToleranceProfile) -> UniPoly:
    return UniPoly([p.coefficient((d,)) for d in range(max(p.degree, 0) + 1)], tol=tol)


def _newton_once(p: UniPoly, t: complex) -> complex:
    """One damped Newton step on p; keeps the better of old and new."""
    dp = p.derivative()
    d = dp(t)
    if d == 0:
        return t
    step = p(t) / d
    best, best_val = t, abs(p(t))
    for damp in (1.0, 0.5, 0.25, 0.125):
        cand = t - damp * step
        v = abs(p(cand))
        if v < best_val:
            return cand
    return best


def _fiber_poly(f: MultiPoly, k: int, values: np.ndarray, tol: ToleranceProfile) -> MultiPoly:
    """f with every variable except k fixed; univariate in variable k."""
    assignments = {j: values[j] for j in range(f.nvars) if j != k}
    return f.substitute_partial(assignments)


def _confirm_line(f, K, x_j, y_j, tol, floor):
    """Re-solve the line restriction at scalar precision; return a witness or None."""
    p = f.restrict_line(x_j, y_j, tol=tol)
    if p.degree < 1:
        return None
    try:
        rts = roots(p, tol)
    except (ValueError, ArithmeticError):
        return None
    for t0 in rts:
        if not np.isfinite(t0) or t0.imag <= tol.stability_im_tol:
            continue
        t1 = _newton_once(p, complex(t0))
        if t1.imag <= tol.stability_im_tol:
            t1 = complex(t0)
        z = x_j + t1 * y_j.astype(complex)
        if K.interior_margin(z.imag) < floor:
            continue
        res = abs(f(z))
        if res <= tol.residual_tol * _coeff_scale(f, z):
            return z, res
    return None


def _confirm_fiber(f, K, k, x_j, y_j, tol, floor):
    """Solve the coordinate fiber exactly at scalar precision."""
    w = x_j + 1j * y_j
    fib = _fiber_poly(f, k, w, tol)
    if not fib:
        # f vanishes identically on this fiber; the draw itself is a zero.
        z = w.copy()
        if K.interior_margin(y_j) < floor:
            return None
        return z, abs(f(z))
    p = _uni_from_onevar(fib, tol)
    if p.degree < 1:
        return None
    try:
        rts = roots(p, tol)
    except (ValueError, ArithmeticError):
        return None
    for r0 in rts:
        if not np.isfinite(r0) or r0.imag <= tol.stability_im_tol:
            continue
        r1 = _newton_once(p, complex(r0))
        if r1.imag <= tol.stability_im_tol:
            r1 = complex(r0)
        yc = y_j.copy()
        yc[k] = r1.imag
        if K.interior_margin(yc) < floor:
            continue
        z = w.copy()
        z[k] = r1
        res = abs(f(z))
        if res <= tol.residual_tol * _coeff_scale(f, z):
            return z, res
    return None


def _screen_margins(K: Cone, points: np.ndarray, floor: float) -> np.ndarray:
    """Boolean keep-mask for candidate points; generous to avoid false drops."""
    if points.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    m = K.interior_margin_batch(points)
    if m is None:
        return np.ones(points.shape[0], dtype=bool)
    return m >= 0.5 * floor


# ---------------------------------------------------------------------------
# Exact route for degree <= 1
# ---------------------------------------------------------------------------


def _interior_pair_hunt(K: Cone, a: np.ndarray, tol: ToleranceProfile):
    """Deterministically find interior y', y'' with <a,y'> < 0 < <a,y''>."""
    gen = np.random.default_rng((_LIN_SALT, K.dim))
    neg = pos = None
    floor = tol.sample_margin / 2
    for _ in range(128):
        batch = K.interior_from_normals(gen.standard_normal((64, K.draw_dim)))
        vals = batch @ a
        for row, v in zip(batch, vals):
            if v < 0 and neg is None and K.interior_margin(row) >= floor:
                neg = row
            elif v > 0 and pos is None and K.interior_margin(row) >= floor:
                pos = row
        if neg is not None and pos is not None:
            return neg, pos
    raise ArithmeticError("could not locate sign-splitting interior directions")


def _linear_witness(K: Cone, a: np.ndarray, b: complex, tol: ToleranceProfile) -> np.ndarray:
    """A zero of <a,z>+b with Im(z) interior, for a outside both dual halves."""
    target = -b.imag  # need <a, y> = target with y interior
    dm_pos = K.dual_margin(a)
    dm_neg = K.dual_margin(-a)
    gen = np.random.default_rng((_LIN_SALT, K.dim, 1))
    if dm_pos >= -tol.interior_tol or dm_neg >= -tol.interior_tol:
        # One-sided case (only reachable with a complex constant): <a, .>
        # has a fixed sign on the interior, so scale a single sample.
        y0 = K.interior_from_normals(gen.standard_normal((1, K.draw_dim)))[0]
        s = target / float(a @ y0)
        if s <= 0:
            raise ArithmeticError("no witness on this side (polynomial is stable)")
        y = s * y0
    else:
        neg, pos = _interior_pair_hunt(K, a, tol)
        lo, hi = 0.0, 1.0  # y(s) = (1-s)*neg + s*pos crosses zero
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if float(a @ ((1 - mid) * neg + mid * pos)) < 0:
                lo = mid
            else:
                hi = mid
        y = (1 - hi) * neg + hi * pos
        if abs(target) > 0:
            # Shift along whichever endpoint direction matches the sign.
            d = pos if target > 0 else neg
            y = y + (target / float(a @ d)) * d
    x = -(b.real / float(a @ a)) * a
    return x + 1j * y


def linear_k_stability(
    f: MultiPoly,
    K: Cone,
    allow_complex_constant: bool = False,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> Verdict:
    """Exact stability decision for polynomials of degree at most one.

    For f = <a, z> + b with a real, stability relative to K holds exactly
    when a or -a lies in the dual cone K* (minus the origin) — membership
    in the closed dual suffices: any nonzero dual functional is strictly
    positive on the interior, so the imaginary part of f cannot vanish
    there.  On the dual boundary the decision is exact but numerically
    fragile; the certificate says so.

    The constant term must be real unless ``allow_complex_constant`` is
    set; with the flag, stability additionally requires Im(b) to have the
    matching sign (Im(b) >= 0 for a in K*, <= 0 for -a in K*).

    Unstable inputs come back with a constructed witness: an interior y
    with <a, y> = -Im(b), found by scaling or bisecting between interior
    points of opposite sign, and x solving <a, x> = -Re(b).
    """
    _check_fit(f, K)
    if f.degree > 1:
        raise ValueError("linear_k_stability requires degree <= 1")
    if not f:
        return Verdict(CERTIFIED_UNSTABLE, certificate="zero polynomial")
    b = f.coefficient(tuple([0] * f.nvars))
    a_cplx = np.array(
        [f.coefficient(tuple(int(j == k) for j in range(f.nvars))) for k in range(f.nvars)]
    )
    if np.max(np.abs(a_cplx.imag), initial=0.0) > tol.coeff_zero_tol:
        raise ValueError("linear part must have real coefficients")
    a = a_cplx.real.astype(float)
    if f.degree == 0:
        return Verdict(CERTIFIED_STABLE, certificate="nonvanishing constant")
    if abs(b.imag) > tol.coeff_zero_tol and not allow_complex_constant:
        raise ValueError(
            "complex constant term: pass allow_complex_constant=True to use "
            "the sign-matched extension of the linear criterion"
        )

    band = tol.interior_tol
    dm_pos = K.dual_margin(a)
    dm_neg = K.dual_margin(-a)
    side = None
    if dm_pos >= -band and (b.imag >= -tol.coeff_zero_tol):
        side = ("a", dm_pos)
    elif dm_neg >= -band and (b.imag <= tol.coeff_zero_tol):
        side = ("-a", dm_neg)
    if side is not None:
        name, margin = side
        if margin > band:
            cert = f"{name} ∈ int K*"
        else:
            cert = f"{name} ∈ ∂K* ∖ {{0}} (boundary of the dual: exact but fragile)"
        return Verdict(CERTIFIED_STABLE, certificate=cert)

    witness = _linear_witness(K, a, complex(b), tol)
    res = abs(f(witness))
    return Verdict(
        CERTIFIED_UNSTABLE,
        witness=witness,
        certificate="neither a nor -a lies in the dual cone (sign-splitting witness)",
        residual=res,
    )


# ---------------------------------------------------------------------------
# Sampling falsifier
# ---------------------------------------------------------------------------


def falsify_k_stability(
    f: MultiPoly,
    K: Cone,
    n_samples: int = 10_000,
    rng: int = 0,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> Verdict:
    """Search for a zero of f with imaginary part interior to K.

    Runs the two-probe portfolio described in the module docstring over
    ``n_samples`` shared draws.  Returns ``falsified`` with a confirmed
    witness, or ``not_falsified`` after a clean budget.  The zero
    polynomial short-circuits to ``certified_unstable`` and nonzero
    constants to ``not_falsified``.
    """
    seed = _as_seed(rng)
    _check_fit(f, K)
    if not f:
        return Verdict(CERTIFIED_UNSTABLE, certificate="zero polynomial", seed=seed)
    if f.degree == 0:
        return Verdict(NOT_FALSIFIED, certificate="nonvanishing constant", seed=seed)

    n = f.nvars
    active = [k for k in range(n) if f.degree_in(k) >= 1]
    fibers = {k: f.as_univariate_in(k) for k in active}
    floor = tol.sample_margin / 2

    for lo, x, y in _blocks(seed, n, K, tol.sample_sigma, n_samples, tol.sample_margin):
        B = x.shape[0]
        hits: dict[int, list] = {}

        # Line probe: batch roots of all restrictions, screened on Im > 0.
        line_roots = _roots_batch(_restriction_batch(f, x, y), tol)
        if line_roots.size:
            up = np.where(np.isfinite(line_roots), line_roots.imag, -1.0)
            for row in np.nonzero(np.any(up > tol.stability_im_tol, axis=1))[0]:
                hits.setdefault(int(row), []).append((0, None))

        # Fiber probe: draw j solves coordinate active[j mod #active].
        ks_local = (lo + np.arange(B)) % len(active)
        for ki, k in enumerate(active):
            rows = np.nonzero(ks_local == ki)[0]
            if rows.size == 0:
                continue
            keep = [j for j in range(n) if j != k]
            W = x[rows][:, keep] + 1j * y[rows][:, keep]
            cols = [np.broadcast_to(c(W), (rows.size,)) for c in fibers[k]]
            froots = _roots_batch(np.column_stack(cols).astype(complex), tol)
            if froots.size == 0:
                # Constant fiber: flag rows whose fiber vanishes identically.
                fib_val = cols[0]
                for idx in np.nonzero(np.abs(fib_val) <= tol.coeff_zero_tol)[0]:
                    hits.setdefault(int(rows[idx]), []).append((1, k))
                continue
            flat = froots.reshape(-1)
            owner = np.repeat(rows, froots.shape[1])
            ok = np.isfinite(flat) & (flat.imag > tol.stability_im_tol)
            if not np.any(ok):
                continue
            owner, flat = owner[ok], flat[ok]
            comp = y[owner].copy()
            comp[:, k] = flat.imag
            for idx in np.nonzero(_screen_margins(K, comp, floor))[0]:
                hits.setdefault(int(owner[idx]), []).append((1, k))

        # Confirm candidates in draw order, line probe first.
        for row in sorted(hits):
            j = lo + row
            for probe, k in sorted(set(hits[row])):
                if probe == 0:
                    got = _confirm_line(f, K, x[row], y[row], tol, floor)
                    cert = "zero on a sampled line with interior imaginary direction"
                else:
                    got = _confirm_fiber(f, K, k, x[row], y[row], tol, floor)
                    cert = (
                        f"zero on the {f.var_names[k]} coordinate fiber "
                        "with interior imaginary part"
                    )
                if got is not None:
                    z, res = got
                    return Verdict(
                        FALSIFIED,
                        witness=z,
                        certificate=cert,
                        samples=j + 1,
                        seed=seed,
                        residual=res,
                    )
    return Verdict(NOT_FALSIFIED, samples=n_samples, seed=seed)


# ---------------------------------------------------------------------------
# Hyperbolicity (homogeneous polynomials)
# ---------------------------------------------------------------------------


def hyperbolicity_check(
    f: MultiPoly,
    K: Cone,
    n_samples: int = 10_000,
    rng: int = 0,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> Verdict:
    """Falsify "f is hyperbolic with respect to every interior direction".

    For homogeneous f this is equivalent to stability relative to K, and
    the check mirrors the falsifier's structure: per draw (x, e) it
    requires the restriction t -> f(x + t e) to be real-rooted, and hunts
    (through real coordinate fibers) for interior real points where f
    itself vanishes.  Either failure converts to a stability witness: a
    non-real restriction root t gives z = x + t e (negated for roots in
    the lower half-plane, using homogeneity f(-z) = ±f(z)), and a real
    interior zero e' gives z = i e'.
    """
    seed = _as_seed(rng)
    _check_fit(f, K)
    if not f.is_homogeneous():
        raise ValueError("hyperbolicity_check requires a homogeneous polynomial")
    if not f:
        return Verdict(CERTIFIED_UNSTABLE, certificate="zero polynomial", seed=seed)
    if f.degree == 0:
        return Verdict(NOT_FALSIFIED, certificate="nonvanishing constant", seed=seed)

    n = f.nvars
    active = [k for k in range(n) if f.degree_in(k) >= 1]
    fibers = {k: f.as_univariate_in(k) for k in active}
    floor = tol.sample_margin / 2

    for lo, x, e in _blocks(seed, n, K, tol.sample_sigma, n_samples, tol.sample_margin):
        B = x.shape[0]
        hits: dict[int, list] = {}

        # Non-real roots of the restriction along the interior direction.
        line_roots = _roots_batch(_restriction_batch(f, x, e), tol)
        if line_roots.size:
            mag = np.where(np.isfinite(line_roots), np.abs(line_roots.imag), 0.0)
            bound = tol.real_root_im_tol * np.maximum(1.0, np.abs(line_roots))
            bound = np.where(np.isfinite(bound), bound, np.inf)
            for row in np.nonzero(np.any(mag > np.maximum(bound, tol.stability_im_tol), axis=1))[0]:
                hits.setdefault(int(row), []).append((0, None))

        # Real interior zeros of f found through real coordinate fibers.
        ks_local = (lo + np.arange(B)) % len(active)
        for ki, k in enumerate(active):
            rows = np.nonzero(ks_local == ki)[0]
            if rows.size == 0:
                continue
            keep = [j for j in range(n) if j != k]
            Wr = e[rows][:, keep].astype(complex)
            cols = [np.broadcast_to(c(Wr), (rows.size,)) for c in fibers[k]]
            froots = _roots_batch(np.column_stack(cols).astype(complex), tol)
            if froots.size == 0:
                continue
            flat = froots.reshape(-1)
            owner = np.repeat(rows, froots.shape[1])
            near_real = np.isfinite(flat) & (
                np.abs(flat.imag) <= 1e-4 * np.maximum(1.0, np.abs(flat))
            )
            if not np.any(near_real):
                continue
            owner, flat = owner[near_real], flat[near_real]
            comp = e[owner].copy()
            comp[:, k] = flat.real
            for idx in np.nonzero(_screen_margins(K, comp, floor))[0]:
                hits.setdefault(int(owner[idx]), []).append((1, k))

        for row in sorted(hits):
            j = lo + row
            for probe, k in sorted(set(hits[row])):
                if probe == 0:
                    got = _confirm_hyper_line(f, K, x[row], e[row], tol, floor)
                    cert = "restriction along an interior direction has a non-real root"
                else:
                    got = _confirm_interior_zero(f, K, k, e[row], tol, floor)
                    cert = "vanishes at a real interior point (not hyperbolic there)"
                if got is not None:
                    z, res = got
                    return Verdict(
                        FALSIFIED,
                        witness=z,
                        certificate=cert,
                        samples=j + 1,
                        seed=seed,
                        residual=res,
                    )
    return Verdict(NOT_FALSIFIED, samples=n_samples, seed=seed)


def _confirm_hyper_line(f, K, x_j, e_j, tol, floor):
    p = f.restrict_line(x_j, e_j, tol=tol)
    if p.degree < 1:
        return None
    try:
        rts = roots(p, tol)
    except (ValueError, ArithmeticError):
        return None
    for t0 in rts:
        if not np.isfinite(t0):
            continue
        lim = max(tol.real_root_im_tol * max(1.0, abs(t0)), tol.stability_im_tol)
        if abs(t0.imag) <= lim:
            continue
        t1 = _newton_once(p, complex(t0))
        if abs(t1.imag) <= lim:
            t1 = complex(t0)
        z = x_j + t1 * e_j.astype(complex)
        if t1.imag < 0:
            z = -z  # homogeneity: f(-z) = (-1)^deg f(z) = 0 as well
        if K.interior_margin(z.imag) < floor:
            continue
        res = abs(f(z))
        if res <= tol.residual_tol * _coeff_scale(f, z):
            return z, res
    return None


def _confirm_interior_zero(f, K, k, e_j, tol, floor):
    fib = _fiber_poly(f, k, e_j.astype(complex), tol)
    if not fib:
        if K.interior_margin(e_j) < floor:
            return None
        z = 1j * e_j.astype(complex)
        return z, abs(f(z))
    p = _uni_from_onevar(fib, tol)
    if p.degree < 1:
        return None
    try:
        rts = roots(p, tol)
    except (ValueError, ArithmeticError):
        return None
    for r0 in rts:
        if not np.isfinite(r0):
            continue
        if abs(r0.imag) > tol.real_root_im_tol * max(1.0, abs(r0)):
            continue
        r1 = _newton_once(p, complex(r0.real))
        real_pt = e_j.copy()
        real_pt[k] = r1.real
        if K.interior_margin(real_pt) < floor:
            continue
        z = 1j * real_pt.astype(complex)
        res = abs(f(z))
        if res <= tol.residual_tol * _coeff_scale(f, z):
            return z, res
    return None


# ---------------------------------------------------------------------------
# Structure theorems as experiments
# ---------------------------------------------------------------------------


def _require_real_pair(f: MultiPoly, g: MultiPoly, tol: ToleranceProfile) -> None:
    if f.var_names != g.var_names:
        raise ValueError("polynomials must share one variable tuple")
    if not f.is_real(tol) or not g.is_real(tol):
        raise ValueError("expected real polynomials")


def _append_variable(p: MultiPoly, name: str, power: int) -> MultiPoly:
    names = p.var_names + (name,)
    return MultiPoly(names, {e + (power,): c for e, c in p.terms.items()})


def hb_lift_check(
    f: MultiPoly,
    g: MultiPoly,
    K: Cone,
    n_samples: int = 10_000,
    rng: int = 0,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> HbLiftReport:
    """Compare stability of g + i f over K with g + w f over K x R>=0.

    The two are equivalent (the new variable w plays the role of the
    imaginary unit), so a falsification on exactly one side at equal
    budget and seed flags an implementation inconsistency.
    """
    _require_real_pair(f, g, tol)
    _check_fit(f, K)
    w_name = "w" if "w" not in f.var_names else "_w_lift"
    direct = falsify_k_stability(g + f.scale(1j), K, n_samples, rng, tol)
    lifted_poly = _append_variable(g, w_name, 0) + _append_variable(f, w_name, 1)
    lifted = falsify_k_stability(lifted_poly, product(K, Orthant(1)), n_samples, rng, tol)
    consistent = direct.falsified == lifted.falsified
    return HbLiftReport(direct=direct, lifted=lifted, consistent=consistent)


def _default_pencil_grid() -> list[tuple[float, float]]:
    # 32 directions through the upper half of the unit circle; includes
    # both axes (k = 0 and k = 16).
    return [
        (float(np.cos(np.pi * k / 32)), float(np.sin(np.pi * k / 32))) for k in range(32)
    ]


def pencil_hko_check(
    f: MultiPoly,
    g: MultiPoly,
    K: Cone,
    grid=None,
    n_samples: int = 2_000,
    rng: int = 0,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> PencilReport:
    """Probe the pencil equivalence on a grid of real combinations.

    Side one: every lam*f + mu*g on the grid is stable or identically
    zero.  Side two: f + i g or g + i f is stable.  Both sides are probed
    by falsification at the same budget; the report records each verdict
    and the two aggregate flags.
    """
    _require_real_pair(f, g, tol)
    _check_fit(f, K)
    if not f and not g:
        raise ValueError("pencil of two zero polynomials")
    pts = _default_pencil_grid() if grid is None else list(grid)
    entries = []
    any_falsified = False
    for lam, mu in pts:
        member = f.scale(lam) + g.scale(mu)
        if not member:
            entries.append(PencilEntry(lam=lam, mu=mu, zero=True, verdict=None))
            continue
        v = falsify_k_stability(member, K, n_samples, rng, tol)
        any_falsified = any_falsified or v.falsified
        entries.append(PencilEntry(lam=lam, mu=mu, zero=False, verdict=v))
    v_fg = falsify_k_stability(f + g.scale(1j), K, n_samples, rng, tol)
    v_gf = falsify_k_stability(g + f.scale(1j), K, n_samples, rng, tol)
    pencil_clean = not any_falsified
    combo_clean = (not v_fg.falsified) or (not v_gf.falsified)
    problems = []
    if pencil_clean and not combo_clean:
        problems.append(
            "all pencil members survived but both complex combinations were falsified"
        )
    if not pencil_clean and combo_clean:
        problems.append(
            "a pencil member was falsified but a complex combination survived"
        )
    return PencilReport(
        entries=tuple(entries),
        f_plus_ig=v_fg,
        g_plus_if=v_gf,
        pencil_clean=pencil_clean,
        combo_clean=combo_clean,
        inconsistencies=tuple(problems),
    )


def wronskian_certificate(
    f: MultiPoly,
    g: MultiPoly,
    K: Cone,
    n_points: int = 2_000,
    rng: int = 0,
    tol: ToleranceProfile = DEFAULT_TOL,
    n_directions: int = 8,
) -> WronskianReport:
    """Test the sign condition W_v(f, g) <= 0 on R^n along interior directions.

    For the orthant and finitely generated cones the directions are the
    generators themselves (checking them suffices, since W_v is linear in
    v); otherwise ``n_directions`` interior directions are sampled.  Each
    W_v is evaluated on ``n_points`` Gaussian sample points; positive
    values beyond the scaled sign tolerance are disproof witnesses and
    the worst few are recorded.  Falsification-only: a clean report is
    evidence, not proof, except in the finitely generated case where the
    direction set is complete (the sample points still make it a probe).
    """
    seed = _as_seed(rng)
    _require_real_pair(f, g, tol)
    _check_fit(f, K)
    n = f.nvars
    if isinstance(K, Orthant):
        dirs = [np.eye(n)[k] for k in range(n)]
    elif isinstance(K, Polyhedral):
        dirs = [row.copy() for row in K.generators]
    else:
        gen = np.random.default_rng((seed, _DIR_SALT))
        dirs = list(K.interior_from_normals(gen.standard_normal((n_directions, K.draw_dim))))
    pts = np.random.default_rng((seed, _PTS_SALT)).normal(0.0, tol.sample_sigma, (n_points, n))
    reports = []
    for v in dirs:
        w = wronskian_v(f, g, v)
        if not w:
            reports.append(
                DirectionReport(direction=v, holds=True, max_violation=0.0, disproof_points=())
            )
            continue
        vals = np.real(w(pts))
        scales = w.coeff_norm1() * np.maximum(1.0, np.max(np.abs(pts), axis=1)) ** max(
            w.degree, 0
        )
        excess = vals - tol.sign_tol * scales
        bad = np.nonzero(excess > 0)[0]
        worst = bad[np.argsort(excess[bad])[::-1][:5]]
        reports.append(
            DirectionReport(
                direction=v,
                holds=bad.size == 0,
                max_violation=float(np.max(excess)) if bad.size else 0.0,
                disproof_points=tuple((pts[i].copy(), float(vals[i])) for i in worst),
            )
        )
    return WronskianReport(directions=tuple(reports))


def decompose_check(
    h: MultiPoly,
    K: Cone,
    n_samples: int = 10_000,
    rng: int = 0,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> DecomposeReport:
    """Check that the real and imaginary parts of a surviving h survive too.

    Writes h = g + i f with g, f real.  If h itself is falsified the
    parts are not probed (nothing is claimed about them).  If h survives
    its budget, each nonzero part must survive as well; a falsified part
    would disprove the implementation, not the underlying fact.
    """
    _check_fit(h, K)
    whole = falsify_k_stability(h, K, n_samples, rng, tol)
    if whole.falsified:
        return DecomposeReport(whole=whole, real_part=None, imag_part=None, consistent=True)
    g, f = h.real_imag_parts()
    vg = falsify_k_stability(g, K, n_samples, rng, tol) if g else None
    vf = falsify_k_stability(f, K, n_samples, rng, tol) if f else None
    consistent = not ((vg is not None and vg.status == FALSIFIED) or
                      (vf is not None and vf.status == FALSIFIED))
    return DecomposeReport(whole=whole, real_part=vg, imag_part=vf, consistent=consistent)


# ---------------------------------------------------------------------------
# Imaginary projection sampling and specialization
# ---------------------------------------------------------------------------


def imaginary_projection_sample(
    f: MultiPoly,
    n_points: int = 2_000,
    box: tuple[float, float] = (-2.0, 2.0),
    rng: int = 0,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> np.ndarray:
    """Sample the set of imaginary parts of zeros of f (a point cloud).

    Repeatedly fixes all but one variable to random complex values with
    real and imaginary parts uniform in ``box``, solves the remaining
    univariate fiber, and records Im(z) of every verified solution.
    Returns an (m, nvars) float array with m <= n_points (fibers that
    degenerate or fail verification contribute nothing).
    """
    seed = _as_seed(rng)
    if f.degree < 1:
        raise ValueError("imaginary projection needs a nonconstant polynomial")
    lo, hi = float(box[0]), float(box[1])
    if not lo < hi:
        raise ValueError("box must be an increasing interval")
    n = f.nvars
    active = [k for k in range(n) if f.degree_in(k) >= 1]
    fibers = {k: f.as_univariate_in(k) for k in active}
    out: list[np.ndarray] = []
    total = 0
    bi = 0
    max_blocks = 2 + 20 * (n_points // _BLOCK + 1)
    while total < n_points and bi < max_blocks:
        gen = np.random.default_rng((seed, bi))
        re = gen.uniform(lo, hi, (_BLOCK, n))
        im = gen.uniform(lo, hi, (_BLOCK, n))
        ks_local = (bi * _BLOCK + np.arange(_BLOCK)) % len(active)
        for ki, k in enumerate(active):
            rows = np.nonzero(ks_local == ki)[0]
            if rows.size == 0:
                continue
            keep = [j for j in range(n) if j != k]
            W = re[rows][:, keep] + 1j * im[rows][:, keep]
            cols = [np.broadcast_to(c(W), (rows.size,)) for c in fibers[k]]
            froots = _roots_batch(np.column_stack(cols).astype(complex), tol)
            if froots.size == 0:
                continue
            d = froots.shape[1]
            flat = froots.reshape(-1)
            owner = np.repeat(rows, d)
            good = np.isfinite(flat)
            if not np.any(good):
                continue
            owner, flat = owner[good], flat[good]
            Z = (re[owner] + 1j * im[owner]).astype(complex)
            Z[:, k] = flat
            resid = np.abs(f(Z))
            scale = f.coeff_norm1() * np.maximum(1.0, np.max(np.abs(Z), axis=1)) ** max(
                f.degree, 0
            )
            ok = resid <= tol.residual_tol * scale
            if not np.any(ok):
                continue
            cloud = im[owner[ok]].copy()
            cloud[:, k] = flat[ok].imag
            out.append(cloud)
            total += cloud.shape[0]
        bi += 1
    if not out:
        return np.zeros((0, n))
    return np.concatenate(out, axis=0)[:n_points]


def specialize_stability_check(
    f: MultiPoly,
    fixed_vars,
    a,
    b,
    K1: Cone,
    K2: Cone,
    n_samples: int = 10_000,
    rng: int = 0,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> Verdict:
    """Falsify stability of f after pinning a variable block to a + i b.

    ``fixed_vars`` are the indices being substituted; ``b`` must be
    interior to ``K1`` (the cone of the pinned block) — stability of f
    relative to K1 x K2 then passes to the specialization relative to
    K2, so a falsified specialization of a presumed-stable f is a
    finding.  The remaining variables must match ``K2``.
    """
    fixed = [int(k) for k in fixed_vars]
    if len(set(fixed)) != len(fixed):
        raise ValueError("fixed variable indices must be distinct")
    for k in fixed:
        if not 0 <= k < f.nvars:
            raise ValueError(f"variable index {k} out of range")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != (len(fixed),) or b.shape != (len(fixed),):
        raise ValueError("a and b must match the fixed block length")
    if K1.dim != len(fixed):
        raise ValueError("K1 dimension must match the fixed block")
    if K2.dim != f.nvars - len(fixed):
        raise ValueError("K2 dimension must match the remaining variables")
    if not K1.contains_interior(b, tol.interior_tol):
        raise ValueError("imaginary offset b must be interior to K1")
    sub = f.substitute_partial({k: complex(a[i], b[i]) for i, k in enumerate(fixed)})
    return falsify_k_stability(sub, K2, n_samples, rng, tol)
