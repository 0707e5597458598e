"""Block matrices and determinantal stability certificates.

The semidefinite half of the package works with polynomials of the form

    f(Z) = det( sum_{i,j} A_ij * z_ij + B ),

where A is an n x n grid of d x d blocks, B is a d x d Hermitian matrix,
and Z = (z_ij) ranges over symmetric matrix variables.  When the flattened
block matrix is positive semidefinite, f is stable relative to the PSD
cone (or vanishes identically) — that is a *sufficient* certificate, and
the machinery here makes it checkable:

* :class:`BlockMatrix` stores the uniform block grid and flattens it,
* :func:`khatri_rao` takes blockwise Kronecker products, whose
  PSD-preservation facts (:func:`liu_psd_check`) drive the argument,
* :func:`assemble_coefficient` forms sum y_ij A_ij and cross-checks it
  against the flanked Khatri-Rao identity
  (1 x n of I_d) (Y * A) (n x 1 of I_d),
* :func:`thm54_certify` issues the certificate itself,
* :func:`expand_det_polynomial` expands f symbolically for small sizes so
  the certificate can be cross-checked against the sampling falsifier,
* :func:`perturbed_certify` walks a singular PSD matrix through the
  definite approximations A + eps * I used to reach the boundary case,
* :func:`prop56_diagonal_criterion` handles grids of *diagonal* blocks,
  where semidefiniteness splits into d independent n x n conditions under
  an explicit permutation.

Everything here is pure linear algebra on small matrices; the sampling
counterpart lives in :mod:`conicstab.constab`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
import numpy as np

from .linalg import (
    INDEFINITE,
    POSITIVE_DEFINITE,
    POSITIVE_SEMIDEFINITE,
    hermitian_eigenvalues,
    is_hermitian,
    psd_classify,
)
from .poly import MatrixVarIndex, MultiPoly
from .tolerances import DEFAULT_TOL, ToleranceProfile

CERTIFIED_STABLE = "certified_stable"
NOT_CERTIFIED = "not_certified"
IDENTICALLY_ZERO = "identically_zero"

_EXPAND_N_CAP = 4
_EXPAND_D_CAP = 4


# ---------------------------------------------------------------------------
# Block matrices
# ---------------------------------------------------------------------------


class BlockMatrix:
    """An n1 x n2 grid of p x q complex blocks with a uniform shape.

    Stored as a read-only (n1, n2, p, q) array.  ``flatten`` produces the
    ordinary (n1*p) x (n2*q) matrix; ``is_hermitian`` checks the blockwise
    condition A_ij = A_ji^H (equivalent to the flattened matrix being
    Hermitian, but phrased on blocks so failures localize).
    """

    __slots__ = ("blocks",)

    def __init__(self, blocks) -> None:
        arr = np.asarray(blocks, dtype=complex)
        if arr.ndim != 4:
            raise ValueError("blocks must form an (n1, n2, p, q) array")
        if min(arr.shape) < 1:
            raise ValueError("block grid and block shape must be nonempty")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "blocks", arr)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("BlockMatrix is immutable")

    @property
    def n1(self) -> int:
        return self.blocks.shape[0]

    @property
    def n2(self) -> int:
        return self.blocks.shape[1]

    @property
    def p(self) -> int:
        return self.blocks.shape[2]

    @property
    def q(self) -> int:
        return self.blocks.shape[3]

    @property
    def grid(self) -> tuple[int, int]:
        return (self.n1, self.n2)

    def block(self, i: int, j: int) -> np.ndarray:
        return np.array(self.blocks[i, j])

    def flatten(self) -> np.ndarray:
        n1, n2, p, q = self.blocks.shape
        return self.blocks.transpose(0, 2, 1, 3).reshape(n1 * p, n2 * q).copy()

    def is_hermitian(self, tol: ToleranceProfile = DEFAULT_TOL) -> bool:
        if self.n1 != self.n2 or self.p != self.q:
            return False
        swapped = np.conj(self.blocks.transpose(1, 0, 3, 2))
        scale = max(1.0, float(np.max(np.abs(self.blocks))))
        return float(np.max(np.abs(self.blocks - swapped))) <= tol.hermitian_tol * scale

    def is_real(self, tol: ToleranceProfile = DEFAULT_TOL) -> bool:
        return float(np.max(np.abs(self.blocks.imag))) <= tol.coeff_zero_tol

    @staticmethod
    def from_flat(m, n1: int, n2: int) -> "BlockMatrix":
        """Cut an ordinary matrix into an n1 x n2 grid of equal blocks."""
        arr = np.asarray(m, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] % n1 or arr.shape[1] % n2:
            raise ValueError("matrix shape is not divisible into the requested grid")
        p, q = arr.shape[0] // n1, arr.shape[1] // n2
        return BlockMatrix(arr.reshape(n1, p, n2, q).transpose(0, 2, 1, 3))

    @staticmethod
    def scalar(m) -> "BlockMatrix":
        """View an ordinary matrix as a grid of 1 x 1 blocks."""
        arr = np.asarray(m, dtype=complex)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        return BlockMatrix(arr[:, :, None, None])

    def __eq__(self, other) -> bool:
        return isinstance(other, BlockMatrix) and np.array_equal(self.blocks, other.blocks)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"BlockMatrix(grid={self.n1}x{self.n2}, block={self.p}x{self.q})"


def block_matrix_to_json(A: BlockMatrix) -> str:
    """Serialize a square-grid, square-block matrix.

    Complex grids set ``re_im`` and store every entry as an [re, im] pair;
    real grids store plain floats.
    """
    if A.n1 != A.n2 or A.p != A.q:
        raise ValueError("JSON format covers square grids of square blocks")
    complex_entries = bool(np.max(np.abs(A.blocks.imag)) > 0.0)
    if complex_entries:
        paired = np.stack([A.blocks.real, A.blocks.imag], axis=-1)
        payload = paired.tolist()
    else:
        payload = A.blocks.real.tolist()
    return json.dumps(
        {"n": A.n1, "d": A.p, "re_im": complex_entries, "blocks": payload}
    )


def block_matrix_from_json(text: str) -> BlockMatrix:
    data = json.loads(text)
    n, d = int(data["n"]), int(data["d"])
    raw = np.asarray(data["blocks"], dtype=float)
    if data.get("re_im", False):
        if raw.shape != (n, n, d, d, 2):
            raise ValueError("paired blocks must have shape (n, n, d, d, 2)")
        arr = raw[..., 0] + 1j * raw[..., 1]
    else:
        if raw.shape != (n, n, d, d):
            raise ValueError("blocks must have shape (n, n, d, d)")
        arr = raw.astype(complex)
    return BlockMatrix(arr)


# ---------------------------------------------------------------------------
# Kronecker and Khatri-Rao products
# ---------------------------------------------------------------------------


def kronecker(A, B) -> np.ndarray:
    """Kronecker product of two dense matrices (blocks a_ij * B)."""
    a = np.asarray(A, dtype=complex)
    b = np.asarray(B, dtype=complex)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("kronecker expects 2-D matrices")
    return np.kron(a, b)


def khatri_rao(A: BlockMatrix, B: BlockMatrix) -> BlockMatrix:
    """Blockwise Kronecker product (A * B)_ij = A_ij (x) B_ij.

    The grids must agree; block shapes may differ and multiply.
    """
    if A.grid != B.grid:
        raise ValueError(f"block grids differ: {A.grid} vs {B.grid}")
    n1, n2 = A.grid
    prod = np.einsum("ijab,ijcd->ijacbd", A.blocks, B.blocks)
    return BlockMatrix(prod.reshape(n1, n2, A.p * B.p, A.q * B.q))


@dataclass(frozen=True)
class LiuReport:
    """Outcome of the two PSD-preservation implications for A * B."""

    a_class: str
    b_class: str
    a_diagonal_definite: bool
    product_class: str
    psd_implication_ok: bool | None
    pd_implication_ok: bool | None

    @property
    def holds_all(self) -> bool:
        return self.psd_implication_ok is not False and self.pd_implication_ok is not False


def liu_psd_check(A: BlockMatrix, B: BlockMatrix, tol: ToleranceProfile = DEFAULT_TOL) -> LiuReport:
    """Check the Khatri-Rao semidefiniteness implications on a pair.

    Implication one: A, B both PSD forces A * B PSD.  Implication two:
    A PSD with positive definite diagonal blocks and B positive definite
    force A * B positive definite.  ``None`` marks an implication whose
    premise does not apply; ``False`` would disprove the implementation.
    """
    if A.grid != B.grid:
        raise ValueError(f"block grids differ: {A.grid} vs {B.grid}")
    if not A.is_hermitian(tol) or not B.is_hermitian(tol):
        raise ValueError("liu_psd_check expects Hermitian block matrices")
    a_class = psd_classify(A.flatten(), tol)
    b_class = psd_classify(B.flatten(), tol)
    diag_definite = all(
        psd_classify(A.blocks[i, i], tol) == POSITIVE_DEFINITE for i in range(A.n1)
    )
    product_class = psd_classify(khatri_rao(A, B).flatten(), tol)

    semidef = (POSITIVE_DEFINITE, POSITIVE_SEMIDEFINITE)
    psd_ok: bool | None = None
    if a_class in semidef and b_class in semidef:
        psd_ok = product_class in semidef
    pd_ok: bool | None = None
    if a_class in semidef and diag_definite and b_class == POSITIVE_DEFINITE:
        pd_ok = product_class == POSITIVE_DEFINITE
    return LiuReport(
        a_class=a_class,
        b_class=b_class,
        a_diagonal_definite=diag_definite,
        product_class=product_class,
        psd_implication_ok=psd_ok,
        pd_implication_ok=pd_ok,
    )


def assemble_coefficient(Y, A: BlockMatrix, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    """Form sum_ij y_ij A_ij for a real symmetric Y.

    The same matrix equals (1 x n of I_d) (Y * A) (n x 1 of I_d) with Y
    read as a grid of scalar blocks; the identity is asserted in debug
    builds because it is the hinge the definite-coefficient argument
    turns on.
    """
    y = np.asarray(Y, dtype=float)
    if A.n1 != A.n2 or A.p != A.q:
        raise ValueError("expected a square grid of square blocks")
    n, d = A.n1, A.p
    if y.shape != (n, n):
        raise ValueError(f"Y must be {n} x {n}")
    if float(np.max(np.abs(y - y.T))) > tol.hermitian_tol * max(1.0, float(np.max(np.abs(y)))):
        raise ValueError("Y must be symmetric")
    out = np.einsum("ij,ijab->ab", y, A.blocks)

    if __debug__:
        left = np.kron(np.ones((1, n)), np.eye(d))
        right = np.kron(np.ones((n, 1)), np.eye(d))
        flanked = left @ khatri_rao(BlockMatrix.scalar(y), A).flatten() @ right
        scale = max(1.0, float(np.max(np.abs(out))))
        assert float(np.max(np.abs(out - flanked))) <= 1e-10 * scale
    return out


# ---------------------------------------------------------------------------
# Symbolic expansion of det(sum A_ij z_ij + B)
# ---------------------------------------------------------------------------


def _entry_polynomials(A: BlockMatrix, B: np.ndarray, tol: ToleranceProfile) -> list[list[MultiPoly]]:
    """The d x d grid of affine-linear entries in the symmetric variables.

    The variables are the upper-triangle entries of a symmetric Z, so the
    coefficient of z_ij with i < j collects both A_ij and A_ji.
    """
    n, d = A.n1, A.p
    index = MatrixVarIndex(n)
    names = index.names
    nvars = len(names)
    entries: list[list[MultiPoly]] = []
    zero_exp = (0,) * nvars
    for k in range(d):
        row = []
        for l in range(d):
            terms: dict[tuple[int, ...], complex] = {}
            const = complex(B[k, l])
            if const:
                terms[zero_exp] = const
            for i in range(n):
                for j in range(i, n):
                    coeff = A.blocks[i, j, k, l]
                    if i != j:
                        coeff = coeff + A.blocks[j, i, k, l]
                    if coeff:
                        exp = [0] * nvars
                        exp[index.flat(i, j)] = 1
                        terms[tuple(exp)] = complex(coeff)
            row.append(MultiPoly(names, terms, tol=tol))
        entries.append(row)
    return entries


def _det_cofactor(rows: list[list[MultiPoly]], names: tuple[str, ...], tol: ToleranceProfile) -> MultiPoly:
    d = len(rows)
    if d == 1:
        return rows[0][0]
    total = MultiPoly.zero(names)
    for col in range(d):
        entry = rows[0][col]
        if not entry:
            continue
        minor = [[rows[r][c] for c in range(d) if c != col] for r in range(1, d)]
        term = entry * _det_cofactor(minor, names, tol)
        total = total + (term if col % 2 == 0 else -term)
    return total


def expand_det_polynomial(
    A: BlockMatrix,
    B,
    tol: ToleranceProfile = DEFAULT_TOL,
    n_cap: int = _EXPAND_N_CAP,
    d_cap: int = _EXPAND_D_CAP,
) -> MultiPoly:
    """Exact expansion of det(sum A_ij z_ij + B) in symmetric variables.

    Works over the upper-triangle variable set z_ij (i <= j) of the n x n
    symmetric argument, so off-diagonal pairs contribute A_ij + A_ji.
    Sizes are capped because cofactor expansion is exponential in d.
    """
    if A.n1 != A.n2 or A.p != A.q:
        raise ValueError("expected a square grid of square blocks")
    n, d = A.n1, A.p
    if n > n_cap or d > d_cap:
        raise ValueError(f"expansion capped at grid {n_cap}, block {d_cap} (got {n}, {d})")
    b = np.asarray(B, dtype=complex)
    if b.shape != (d, d):
        raise ValueError(f"B must be {d} x {d}")
    entries = _entry_polynomials(A, b, tol)
    names = MatrixVarIndex(n).names
    return _det_cofactor(entries, names, tol)


# ---------------------------------------------------------------------------
# The sufficient stability certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DetCertificate:
    """Result of the semidefinite coefficient test.

    ``certified_stable`` — the flattened block matrix is PSD and the
    polynomial is not identically zero, which makes det(sum A_ij z_ij + B)
    stable relative to the PSD cone.  ``not_certified`` — the flattened
    matrix is indefinite; the criterion is sufficient only, so nothing is
    claimed about stability either way.  ``identically_zero`` — the
    coefficient structure makes the determinant vanish as a polynomial.
    """

    outcome: str
    lambda_min: float
    certificate: str
    nonzero_method: str | None = None


def _poly_is_nonzero(A: BlockMatrix, B: np.ndarray, tol: ToleranceProfile,
                     n_cap: int, d_cap: int) -> tuple[bool, str]:
    n, d = A.n1, A.p
    if n <= n_cap and d <= d_cap:
        f = expand_det_polynomial(A, B, tol, n_cap=n_cap, d_cap=d_cap)
        return bool(f), "expansion"
    # Above the cap: randomized evaluation.  A nonzero value is proof; a
    # run of zeros at generic points leaves only the zero polynomial as a
    # realistic possibility.
    gen = np.random.default_rng(0x5E7_D47)
    index = MatrixVarIndex(n)
    for _ in range(8):
        flat = gen.normal(size=index.dim) + 1j * gen.normal(size=index.dim)
        Z = index.mat_from_flat(flat)
        M = np.einsum("ijab,ij->ab", A.blocks, Z) + B
        if abs(np.linalg.det(M)) > 1e-9:
            return True, "evaluation"
    return False, "evaluation"


def thm54_certify(
    A: BlockMatrix,
    B,
    tol: ToleranceProfile = DEFAULT_TOL,
    n_cap: int = _EXPAND_N_CAP,
    d_cap: int = _EXPAND_D_CAP,
) -> DetCertificate:
    """Sufficient stability certificate for det(sum A_ij z_ij + B).

    A positive semidefinite flattened block matrix certifies stability of
    the determinant polynomial relative to PSD(n) — unless the polynomial
    vanishes identically, which is reported separately.  An indefinite
    flattening yields ``not_certified``: the test is one-sided and never
    claims instability (there are indefinite examples whose polynomial is
    stable regardless).
    """
    if A.n1 != A.n2 or A.p != A.q:
        raise ValueError("expected a square grid of square blocks")
    d = A.p
    b = np.asarray(B, dtype=complex)
    if b.shape != (d, d):
        raise ValueError(f"B must be {d} x {d}")
    if not A.is_hermitian(tol):
        raise ValueError("block matrix must be Hermitian (A_ij = A_ji^H)")
    if not is_hermitian(b, tol):
        raise ValueError("B must be Hermitian")

    flat = A.flatten()
    lam_min = float(hermitian_eigenvalues(flat, tol)[0])
    classification = psd_classify(flat, tol)
    b_residual = float(np.max(np.abs(b - b.conj().T))) if d else 0.0

    if classification == INDEFINITE:
        return DetCertificate(
            outcome=NOT_CERTIFIED,
            lambda_min=lam_min,
            certificate=(
                f"flattened coefficient matrix is indefinite (lambda_min = {lam_min:.6g}); "
                "the semidefinite test is sufficient only"
            ),
        )

    nonzero, method = _poly_is_nonzero(A, b, tol, n_cap, d_cap)
    if not nonzero:
        return DetCertificate(
            outcome=IDENTICALLY_ZERO,
            lambda_min=lam_min,
            certificate="determinant vanishes identically",
            nonzero_method=method,
        )
    return DetCertificate(
        outcome=CERTIFIED_STABLE,
        lambda_min=lam_min,
        certificate=(
            f"flattened coefficient matrix is {classification} "
            f"(lambda_min = {lam_min:.6g}); B Hermitian residual {b_residual:.2g}"
        ),
        nonzero_method=method,
    )


# ---------------------------------------------------------------------------
# Boundary approximation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PerturbEntry:
    eps: float
    flat_class: str
    diagonal_definite: bool
    outcome: str
    coeff_diff: float


@dataclass(frozen=True)
class PerturbReport:
    entries: tuple[PerturbEntry, ...]
    trivial: bool
    converged: bool

    @property
    def all_certified(self) -> bool:
        return all(e.outcome == CERTIFIED_STABLE for e in self.entries)


def perturbed_certify(
    A: BlockMatrix,
    B,
    schedule=None,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> PerturbReport:
    """Approximate a singular PSD coefficient matrix from the definite side.

    Adds eps * I to every diagonal block (equivalently eps * I to the
    flattening), checks each perturbation is PSD with definite diagonal
    blocks, certifies it, and tracks coefficientwise convergence of the
    expanded polynomials back to the unperturbed one.  Definite input
    needs no approximation and reports a trivial pass; indefinite input
    is rejected.
    """
    if A.n1 != A.n2 or A.p != A.q:
        raise ValueError("expected a square grid of square blocks")
    n, d = A.n1, A.p
    b = np.asarray(B, dtype=complex)
    if b.shape != (d, d):
        raise ValueError(f"B must be {d} x {d}")
    classification = psd_classify(A.flatten(), tol)
    if classification == INDEFINITE:
        raise ValueError("perturbed_certify requires a semidefinite block matrix")
    if classification == POSITIVE_DEFINITE:
        base = thm54_certify(A, b, tol)
        entry = PerturbEntry(
            eps=0.0,
            flat_class=classification,
            diagonal_definite=True,
            outcome=base.outcome,
            coeff_diff=0.0,
        )
        return PerturbReport(entries=(entry,), trivial=True, converged=True)

    if schedule is None:
        schedule = [2.0 ** -k for k in range(1, 21)]
    eps_list = [float(e) for e in schedule]
    if any(e <= 0 for e in eps_list):
        raise ValueError("schedule entries must be positive")

    base_poly = expand_det_polynomial(A, b, tol)
    eye = np.eye(d)
    entries = []
    for eps in eps_list:
        blocks = np.array(A.blocks)
        for i in range(n):
            blocks[i, i] += eps * eye
        Ak = BlockMatrix(blocks)
        flat_class = psd_classify(Ak.flatten(), tol)
        diag_def = all(
            psd_classify(Ak.blocks[i, i], tol) == POSITIVE_DEFINITE for i in range(n)
        )
        cert = thm54_certify(Ak, b, tol)
        diff = expand_det_polynomial(Ak, b, tol).max_coeff_diff(base_poly)
        entries.append(
            PerturbEntry(
                eps=eps,
                flat_class=flat_class,
                diagonal_definite=diag_def,
                outcome=cert.outcome,
                coeff_diff=diff,
            )
        )

    diffs = [e.coeff_diff for e in entries]
    scale = max(1.0, base_poly.coeff_norm1())
    converged = diffs[-1] <= 1e-4 * scale and diffs[-1] <= diffs[0] + tol.coeff_zero_tol
    return PerturbReport(entries=tuple(entries), trivial=False, converged=converged)


# ---------------------------------------------------------------------------
# Diagonal-block reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagonalReport:
    """Per-slice semidefiniteness of a grid of diagonal blocks.

    ``block_classes[k]`` classifies the n x n matrix collecting entry
    (k, k) of every block; the permutation that block-diagonalizes the
    flattening into exactly those slices is verified entry-for-entry.
    """

    block_classes: tuple[str, ...]
    overall_class: str
    permutation_ok: bool
    consistent: bool
    scalar_conditions: tuple[bool, ...] | None


def prop56_diagonal_criterion(A: BlockMatrix, tol: ToleranceProfile = DEFAULT_TOL) -> DiagonalReport:
    """Split a grid of diagonal blocks into d independent n x n tests.

    When every block A_ij is diagonal, the flattening is similar (by the
    permutation sending grid position (i, k) to k*n + i) to the direct
    sum of the slice matrices A_k = (A_ij[k, k])_ij, so semidefiniteness
    holds exactly when every slice is semidefinite.  For 2 x 2 grids the
    slice conditions are also reported as the explicit scalar
    inequalities (diagonal nonnegativity plus determinant).
    """
    if A.n1 != A.n2 or A.p != A.q:
        raise ValueError("expected a square grid of square blocks")
    n, d = A.n1, A.p
    off_mask = ~np.eye(d, dtype=bool)
    worst = float(np.max(np.abs(A.blocks[:, :, off_mask]))) if d > 1 else 0.0
    if worst > tol.hermitian_tol:
        raise ValueError("all blocks must be diagonal for the slice reduction")

    slices = [np.array(A.blocks[:, :, k, k]) for k in range(d)]
    block_classes = tuple(psd_classify(s, tol) for s in slices)
    flat = A.flatten()
    overall = psd_classify(flat, tol)

    # Permutation check: P[i*d + k, k*n + i] = 1 block-diagonalizes flat.
    P = np.zeros((n * d, n * d))
    for i in range(n):
        for k in range(d):
            P[i * d + k, k * n + i] = 1.0
    conjugated = P.T @ flat @ P
    expected = np.zeros_like(conjugated)
    for k in range(d):
        expected[k * n:(k + 1) * n, k * n:(k + 1) * n] = slices[k]
    permutation_ok = np.array_equal(conjugated, expected)

    semidef = (POSITIVE_DEFINITE, POSITIVE_SEMIDEFINITE)
    consistent = (overall in semidef) == all(c in semidef for c in block_classes)

    scalar_conditions = None
    if n == 2:
        conds = []
        for s in slices:
            ok = (
                s[0, 0].real >= -tol.eig_tol
                and s[1, 1].real >= -tol.eig_tol
                and (s[0, 0].real * s[1, 1].real - abs(s[0, 1]) ** 2) >= -tol.eig_tol
            )
            conds.append(bool(ok))
        scalar_conditions = tuple(conds)

    return DiagonalReport(
        block_classes=block_classes,
        overall_class=overall,
        permutation_ok=permutation_ok,
        consistent=consistent,
        scalar_conditions=scalar_conditions,
    )
