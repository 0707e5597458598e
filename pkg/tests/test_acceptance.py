"""Acceptance suite: one end-to-end check per shipped guarantee.

Each ``test_criterion_*`` function is an independent, seeded scenario
with pinned tolerances; ``pytest -v`` prints one pass/fail line per
criterion.  The whole module is budgeted to run in well under a minute.

Criteria covered, in order:

 1. the split quadric falsifies over the orthant (witness on one of the
    two planes, strictly interior) but survives on matrix variables;
 2. the exact linear certificate and the sampling falsifier agree on a
    200-instance random sweep across cone families;
 3. determinant polynomials pass the hyperbolicity probe, and every
    sampled restriction is real-rooted under an independent re-check;
 4. the direct i-form and the lifted extra-variable form of the pair
    test agree on constructed-stable pairs;
 5. the pencil grid, the two combined-form falsifiers, and the
    directional sign test never land in a logically forbidden pattern;
 6. the coupled block matrix certifies and expands to the split
    quadric, while the decoupled indefinite example is declined even
    though its determinant is positive on sampled definite matrices;
 7. blockwise products preserve semidefinite / definite classes;
 8. the flanked-product identity for weighted block sums holds to
    near machine precision;
 9. diagonal-block matrices classify consistently slice by slice;
10. the univariate engine's two equivalences hold on 200 seeded cases
    each, and linear imaginary projections lie on their hyperplane.
"""

import json

import numpy as np

from conicstab.cli import main
from conicstab.cones import Orthant, Polyhedral, PSD
from conicstab.constab import (
    FALSIFIED,
    NOT_FALSIFIED,
    _blocks,
    falsify_k_stability,
    hb_lift_check,
    hyperbolicity_check,
    imaginary_projection_sample,
    linear_k_stability,
    pencil_hko_check,
    wronskian_certificate,
)
from conicstab.det import (
    CERTIFIED_STABLE,
    NOT_CERTIFIED,
    BlockMatrix,
    assemble_coefficient,
    expand_det_polynomial,
    khatri_rao,
    liu_psd_check,
    prop56_diagonal_criterion,
    thm54_certify,
)
from conicstab.linalg import (
    INDEFINITE,
    POSITIVE_DEFINITE,
    POSITIVE_SEMIDEFINITE,
    hermitian_eigenvalues,
    psd_classify,
)
from conicstab.poly import MatrixVarIndex, MultiPoly, parse
from conicstab.tolerances import DEFAULT_TOL
from conicstab.unistab import (
    KIND_NONE,
    UniPoly,
    interlacing,
    is_real_rooted,
    is_stable_univariate,
    wronskian_sign_leq0,
)

# ---------------------------------------------------------------------------
# Shared generators
# ---------------------------------------------------------------------------


def _names(K):
    if isinstance(K, PSD):
        return MatrixVarIndex(K.n).names
    return tuple(f"z{j + 1}" for j in range(K.dim))


def _random_linear(gen, names, floor=0.1):
    """Random real linear polynomial with every coefficient bounded away
    from zero (tiny coefficients make the stable/unstable decision hinge
    on a coordinate the sampler cannot resolve)."""
    n = len(names)
    while True:
        a = gen.normal(size=n)
        if np.min(np.abs(a)) < floor:
            continue
        terms = {(0,) * n: complex(gen.normal())}
        for j in range(n):
            e = [0] * n
            e[j] = 1
            terms[tuple(e)] = complex(a[j])
        return MultiPoly(names, terms), a


def _random_cone(gen):
    r = int(gen.integers(0, 3))
    if r == 0:
        return Orthant(int(gen.integers(1, 5)))
    if r == 1:
        n = int(gen.integers(2, 5))
        m = int(gen.integers(n, 6))
        while True:
            G = gen.normal(size=(m, n))
            G[:, 0] = np.abs(G[:, 0]) + 0.5  # keep the cone solid and pointed
            try:
                return Polyhedral(G)
            except ValueError:
                continue
    return PSD(2)


def _dual_interior(gen, K):
    """Linear form strictly positive on K minus the origin (rejection)."""
    while True:
        a = gen.normal(size=K.dim)
        if K.dual_margin(a) > 0.15 * np.linalg.norm(a):
            return a


def _stable_pair(gen, K, names, n_factors):
    """Real pair (f, g) with g + i f stable relative to K by construction.

    Expand a product of linear factors <a_j, z> + beta_j with a_j in the
    interior of the dual cone and Im(beta_j) >= 0: each factor, hence the
    product H, cannot vanish when Im(z) is interior.  Splitting H's
    coefficients into real and imaginary parts gives the pair.
    """
    n = len(names)
    H = MultiPoly(names, {(0,) * n: 1.0 + 0j})
    for _ in range(n_factors):
        a = _dual_interior(gen, K)
        beta = complex(gen.uniform(-1.5, 1.5), gen.uniform(0.2, 1.5))
        terms = {(0,) * n: beta}
        for j in range(n):
            e = [0] * n
            e[j] = 1
            terms[tuple(e)] = complex(a[j])
        H = H * MultiPoly(names, terms)
    f = MultiPoly(names, {e: complex(c.imag) for e, c in H.terms.items()})
    g = MultiPoly(names, {e: complex(c.real) for e, c in H.terms.items()})
    return f, g


def _random_pair(gen, K, names, deg):
    n = len(names)

    def one():
        terms = {}
        for _ in range(int(gen.integers(2, 6))):
            total = int(gen.integers(0, deg + 1))
            e = tuple(int(x) for x in gen.multinomial(total, [1.0 / n] * n))
            terms[e] = terms.get(e, 0.0) + complex(gen.normal())
        return MultiPoly(names, terms)

    return one(), one()


def _det_polynomial(n):
    """det of the symmetric matrix of variables, expanded by cofactors."""
    mvx = MatrixVarIndex(n)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            e = [0] * mvx.dim
            e[mvx.flat(i, j)] = 1
            row.append(MultiPoly(mvx.names, {tuple(e): 1.0 + 0j}))
        rows.append(row)

    def det(rs):
        if len(rs) == 1:
            return rs[0][0]
        acc = MultiPoly.zero(mvx.names)
        for c in range(len(rs)):
            minor = [r[:c] + r[c + 1 :] for r in rs[1:]]
            term = rs[0][c] * det(minor)
            acc = acc + (term if c % 2 == 0 else term.scale(-1))
        return acc

    return det(rows), mvx


COUPLED_OFF = np.array([[0.0, 0.5], [0.5, 0.0]])


def _coupled_blocks():
    return BlockMatrix([[np.eye(2), COUPLED_OFF], [COUPLED_OFF, np.eye(2)]])


def _decoupled_indefinite_blocks():
    off = np.array([[0.0, 2.0], [2.0, 0.0]])
    return BlockMatrix([[np.diag([1.0, 5.0]), off], [off, np.diag([5.0, 1.0])]])


def _interleaved_uni_pair(gen, deg):
    """(f, g) real-rooted with strictly interleaved roots."""
    pts = np.sort(gen.uniform(-4.0, 4.0, 2 * deg + 1))
    pts = pts + np.arange(pts.size) * 0.15  # enforce separation
    g_roots, f_roots = pts[0::2], pts[1::2]
    lf = float(gen.choice([-1.0, 1.0]) * gen.uniform(0.5, 2.0))
    lg = float(gen.choice([-1.0, 1.0]) * gen.uniform(0.5, 2.0))
    return UniPoly.from_roots(f_roots, lead=lf), UniPoly.from_roots(g_roots, lead=lg)


def _non_interlacing_uni_pair(gen, deg):
    """(f, g) real-rooted but with two f-roots inside one wide g-gap."""
    g_roots = np.sort(gen.uniform(-4.0, 4.0, deg)) + np.arange(deg)
    gap = int(gen.integers(0, deg - 1))
    lo, hi = g_roots[gap], g_roots[gap + 1]
    inner = gen.uniform(lo + 0.3 * (hi - lo), lo + 0.7 * (hi - lo), 2)
    rest = [g_roots[0] - 1.0 - k for k in range(deg - 2)]
    f_roots = np.concatenate([inner, np.array(rest)])
    return UniPoly.from_roots(f_roots), UniPoly.from_roots(g_roots)


def _run_cli_json(capsys, *argv):
    code = main([*argv, "--output", "json"])
    return code, json.loads(capsys.readouterr().out)


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------


def test_criterion_01_split_quadric_verdicts(capsys):
    """Orthant: falsified with an interior witness on one of the two
    planes; matrix variables: the same form survives 10^4 draws."""
    code, data = _run_cli_json(
        capsys,
        "stab", "-e", "(z1 + z3)^2 - z2^2", "--cone", "orthant:3",
        "--samples", "10000", "--seed", "0",
    )
    assert code == 1 and data["status"] == "falsified"
    y = np.array([im for _, im in data["witness"]])
    assert min(abs(y[0] - y[1] + y[2]), abs(y[0] + y[1] + y[2])) <= 1e-6
    assert np.all(y > 0)

    code, data = _run_cli_json(
        capsys,
        "stab", "-e", "(z11 + z22)^2 - z12^2", "--cone", "psd:2",
        "--samples", "10000", "--seed", "0",
    )
    assert code == 0 and data["status"] == "not_falsified"
    assert data["samples"] == 10_000


def test_criterion_02_linear_certificates_agree_with_sampling():
    """200 random real linear polynomials over orthant / polyhedral
    (<= 5 generators, n <= 4) / PSD(2) cones: exact decision == 10^4-draw
    falsifier verdict, 200/200.  Instances whose linear form sits within
    a 5e-2 band of the dual boundary are redrawn (the exact decision is
    still correct there, but no finite sample budget can confirm it)."""
    gen = np.random.default_rng(2024)
    trials = agreements = 0
    while trials < 200:
        K = _random_cone(gen)
        f, a = _random_linear(gen, _names(K))
        if max(K.dual_margin(a), K.dual_margin(-a)) < 5e-2:
            continue
        trials += 1
        exact = linear_k_stability(f, K, allow_complex_constant=True)
        sampled = falsify_k_stability(f, K, n_samples=10_000, rng=trials)
        stable_exact = exact.status == "certified_stable"
        stable_sampled = sampled.status == NOT_FALSIFIED
        agreements += stable_exact == stable_sampled
    assert agreements == 200


def test_criterion_03_determinant_hyperbolicity():
    """det of the n x n symmetric variable matrix (n = 2, 3) survives
    10^3 direction/offset draws, and an independent re-check of the very
    same draws (interpolate t -> det(X + tE), then root-find) sees only
    real roots, |Im| <= 1e-7."""
    for n in (2, 3):
        dp, mvx = _det_polynomial(n)
        K = PSD(n)
        verdict = hyperbolicity_check(dp, K, n_samples=1_000, rng=11)
        assert verdict.status == NOT_FALSIFIED

        nodes = np.cos(np.pi * (np.arange(n + 1) + 0.5) / (n + 1)) * 2.0
        for _, xs, es in _blocks(
            11, mvx.dim, K, DEFAULT_TOL.sample_sigma, 1_000, DEFAULT_TOL.sample_margin
        ):
            for x_row, e_row in zip(xs, es):
                X = mvx.mat_from_flat(x_row)
                E = mvx.mat_from_flat(e_row)
                vals = np.array([np.linalg.det(X + t * E) for t in nodes])
                coef = np.polynomial.polynomial.polyfit(nodes, vals, n)
                roots = np.polynomial.polynomial.polyroots(coef)
                assert np.max(np.abs(roots.imag), initial=0.0) <= 1e-7


def test_criterion_04_lift_agrees_with_direct_form():
    """50 constructed-stable pairs: the direct combined form over K and
    the lifted form with one extra ray variable give consistent verdicts
    at equal budgets, 50/50 (and both sides actually survive)."""
    gen = np.random.default_rng(42)
    cones = [Orthant(2), Orthant(3), PSD(2)]
    consistent = surviving = 0
    for trial in range(50):
        K = cones[trial % 3]
        f, g = _stable_pair(gen, K, _names(K), int(gen.integers(1, 4)))
        report = hb_lift_check(f, g, K, n_samples=2_000, rng=trial)
        consistent += report.consistent
        surviving += (not report.direct.falsified) and (not report.lifted.falsified)
    assert consistent == 50
    assert surviving == 50


def test_criterion_05_no_forbidden_probe_combination():
    """50 pairs (constructed-stable and random alternating): the pencil
    grid, the two combined-form falsifiers, and the directional sign
    test never produce a logically impossible pattern at shared seeds:
    a clean pencil with both combined forms falsified, or a falsified
    pencil alongside a sign-certified side whose combined form survived."""
    gen = np.random.default_rng(4242)
    cones = [Orthant(2), Orthant(3), PSD(2)]
    for trial in range(50):
        K = cones[trial % 3]
        names = _names(K)
        if trial % 2 == 0:
            f, g = _stable_pair(gen, K, names, int(gen.integers(1, 3)))
        else:
            f, g = _random_pair(gen, K, names, deg=3)
        pencil = pencil_hko_check(f, g, K, n_samples=600, rng=trial)
        w_fg = wronskian_certificate(f, g, K, n_points=600, rng=trial)
        w_gf = wronskian_certificate(g, f, K, n_points=600, rng=trial)

        both_combos_fell = pencil.g_plus_if.falsified and pencil.f_plus_ig.falsified
        assert not (pencil.pencil_clean and both_combos_fell)
        if not pencil.pencil_clean:
            assert not (w_fg.holds_all and not pencil.g_plus_if.falsified)
            assert not (w_gf.holds_all and not pencil.f_plus_ig.falsified)


def test_criterion_06_block_certificates():
    """The coupled block matrix certifies (flattening eigenvalues
    {1/2, 1/2, 3/2, 3/2}) and expands to the split quadric; the
    decoupled example has lambda_min = -1 so certification is declined,
    yet its determinant is positive on 10^3 sampled definite matrices
    and the falsifier finds no witness in 10^4 draws."""
    A = _coupled_blocks()
    eigs = np.sort(hermitian_eigenvalues(A.flatten()))
    assert np.max(np.abs(eigs - np.array([0.5, 0.5, 1.5, 1.5]))) <= 1e-9
    cert = thm54_certify(A, np.zeros((2, 2)))
    assert cert.outcome == CERTIFIED_STABLE
    target = parse("(z11 + z22)^2 - z12^2", var_names=("z11", "z12", "z22"))
    f_a = expand_det_polynomial(A, np.zeros((2, 2)))
    assert f_a.max_coeff_diff(target) <= 1e-12

    B = _decoupled_indefinite_blocks()
    cert = thm54_certify(B, np.zeros((2, 2)))
    assert cert.outcome == NOT_CERTIFIED
    assert cert.lambda_min <= -1.0 + 1e-9

    f_b = expand_det_polynomial(B, np.zeros((2, 2)))
    mvx = MatrixVarIndex(2)
    gen = np.random.default_rng(55)
    for _ in range(1_000):
        G = gen.normal(size=(2, 2))
        Y = G.T @ G + 0.05 * np.eye(2)
        val = f_b(mvx.flat_from_mat(Y))
        assert val.real > 0 and abs(val.imag) <= 1e-12
    verdict = falsify_k_stability(f_b, PSD(2), n_samples=10_000, rng=55)
    assert verdict.status == NOT_FALSIFIED


def test_criterion_07_blockwise_products_preserve_classes():
    """100 Gram-constructed semidefinite pairs: the blockwise product is
    semidefinite 100/100.  100 definite pairs with definite diagonal
    blocks: the product is definite 100/100 with a positive reported
    eigenvalue margin."""
    gen = np.random.default_rng(77)

    def gram(n, d, ridge=0.0):
        m = n * d
        G = gen.normal(size=(m, m)) + 1j * gen.normal(size=(m, m))
        return BlockMatrix.from_flat(G.conj().T @ G + ridge * np.eye(m), n, n)

    for _ in range(100):
        n, d = int(gen.integers(1, 4)), int(gen.integers(1, 4))
        A, B = gram(n, d), gram(n, d)
        prod = khatri_rao(A, B)
        assert psd_classify(prod.flatten()) in (
            POSITIVE_DEFINITE,
            POSITIVE_SEMIDEFINITE,
        )

    worst_margin = np.inf
    for _ in range(100):
        n, d = int(gen.integers(1, 4)), int(gen.integers(1, 4))
        A, B = gram(n, d, ridge=0.5), gram(n, d, ridge=0.5)
        report = liu_psd_check(A, B)
        assert report.a_class == POSITIVE_DEFINITE
        assert report.a_diagonal_definite
        assert report.product_class == POSITIVE_DEFINITE
        assert report.pd_implication_ok
        margin = hermitian_eigenvalues(khatri_rao(A, B).flatten())[0]
        assert margin > 0
        worst_margin = min(worst_margin, margin)
    assert worst_margin > 0


def test_criterion_08_flanked_product_identity():
    """Weighted block sums factor through the blockwise product flanked
    by stacked identities, to 1e-12 on 100 random instances, n, d <= 4."""
    gen = np.random.default_rng(88)
    for _ in range(100):
        n, d = int(gen.integers(1, 5)), int(gen.integers(1, 5))
        blocks = gen.normal(size=(n, n, d, d)) + 1j * gen.normal(size=(n, n, d, d))
        A = BlockMatrix(blocks)
        Y = gen.normal(size=(n, n))
        Y = Y + Y.T
        direct = assemble_coefficient(Y, A)
        left = np.kron(np.ones((1, n)), np.eye(d))
        right = np.kron(np.ones((n, 1)), np.eye(d))
        flanked = left @ khatri_rao(BlockMatrix.scalar(Y), A).flatten() @ right
        scale = max(1.0, float(np.max(np.abs(direct))))
        assert np.max(np.abs(direct - flanked)) <= 1e-12 * scale


def test_criterion_09_diagonal_blocks_classify_sliceways():
    """100 random matrices with diagonal blocks (n <= 3, d <= 3, slices
    drawn semidefinite or indefinite): the per-slice classification
    matches direct classification of each slice, the permutation
    decouples exactly, and slice verdicts are consistent with the whole
    flattening, 100/100."""
    gen = np.random.default_rng(99)
    for _ in range(100):
        n, d = int(gen.integers(1, 4)), int(gen.integers(1, 4))
        slices = []
        for _k in range(d):
            S = gen.normal(size=(n, n))
            if gen.random() < 0.5:
                S = S.T @ S  # semidefinite slice
            else:
                S = S + S.T  # generically indefinite slice
            slices.append(S)
        blocks = np.zeros((n, n, d, d))
        for i in range(n):
            for j in range(n):
                blocks[i, j] = np.diag([slices[k][i, j] for k in range(d)])
        report = prop56_diagonal_criterion(BlockMatrix(blocks))
        assert report.permutation_ok
        assert report.consistent
        for k in range(d):
            assert report.block_classes[k] == psd_classify(slices[k])


def test_criterion_10_univariate_engine():
    """200 seeded cases each (degrees <= 8): (a) the combined form
    g + i f is stable exactly when f and g are real-rooted with the
    pair's derivative-cross condition nonpositive on the line; (b) every
    real combination of the pair is stable-or-zero exactly when the
    roots interlace.  Plus: the imaginary projection of a linear
    polynomial lies on its hyperplane to 1e-8."""
    gen = np.random.default_rng(1010)
    hb_mismatches = 0
    for trial in range(200):
        deg = int(gen.integers(1, 9))
        if trial % 2 == 0:
            f, g = _interleaved_uni_pair(gen, deg)
        else:
            f, g = _non_interlacing_uni_pair(gen, max(3, deg))
        direct = is_stable_univariate(g + f.scale(1j))
        characterized = (
            is_real_rooted(f) and is_real_rooted(g) and wronskian_sign_leq0(f, g)
        )
        hb_mismatches += direct != characterized
    assert hb_mismatches == 0

    grid = [(np.cos(np.pi * k / 32), np.sin(np.pi * k / 32)) for k in range(32)]
    hko_mismatches = 0
    for trial in range(200):
        deg = int(gen.integers(2, 9))
        if trial % 2 == 0:
            f, g = _interleaved_uni_pair(gen, deg)
        else:
            f, g = _non_interlacing_uni_pair(gen, max(3, deg))
        members_ok = True
        for lam, mu in grid:
            member = f.scale(lam) + g.scale(mu)
            if member and not is_stable_univariate(member):
                members_ok = False
                break
        interlace = interlacing(f, g).kind != KIND_NONE
        hko_mismatches += members_ok != interlace
    assert hko_mismatches == 0

    lin = MultiPoly(
        ("z1", "z2"), {(0, 0): 1.0 + 0.5j, (1, 0): 2.0 + 0j, (0, 1): -1.0 + 0j}
    )
    cloud = imaginary_projection_sample(lin, n_points=500, rng=0)
    assert cloud.shape[0] >= 250
    assert np.max(np.abs(2.0 * cloud[:, 0] - cloud[:, 1] + 0.5)) <= 1e-8
