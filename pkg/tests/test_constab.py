"""Tests for the conic stability procedures in conicstab.constab.

Expected values come from hand analysis of small instances:

* ``z1 - z2`` over the orthant: neither (1, -1) nor (-1, 1) is
  coordinatewise nonnegative, and <(1,-1), y> = 0 at y = (1, 1), so the
  polynomial vanishes at x + i(1, 1) for an x with x1 - x2 = 0.
* ``(z1+z3)^2 - z2^2`` over Orthant(3) factors as a product of
  z1 - z2 + z3 and z1 + z2 + z3; the first factor kills stability on the
  interior plane y1 - y2 + y3 = 0 while the matrix version
  ``(z11+z22)^2 - z12^2`` stays zero-free when Im is positive definite
  (trace(Y) > |y12| for Y > 0).
* ``z1 + i`` in one variable has its only root at -i, whose imaginary
  part is not in the open half-line, so sampling must come back clean.
"""

import numpy as np
import pytest

from conicstab.cones import Orthant, Polyhedral, PSD, product
from conicstab.constab import (
    CERTIFIED_STABLE,
    CERTIFIED_UNSTABLE,
    FALSIFIED,
    NOT_FALSIFIED,
    decompose_check,
    falsify_k_stability,
    hb_lift_check,
    hyperbolicity_check,
    imaginary_projection_sample,
    linear_k_stability,
    pencil_hko_check,
    specialize_stability_check,
    wronskian_certificate,
)
from conicstab.poly import MultiPoly, parse
from conicstab.tolerances import DEFAULT_TOL


def _assert_valid_witness(verdict, f, K, tol=DEFAULT_TOL):
    """The confirmation contract every falsified verdict must meet."""
    z = verdict.witness
    assert z is not None
    val = abs(complex(f(z)))
    scale = f.coeff_norm1() * max(1.0, float(np.max(np.abs(z)))) ** f.degree
    assert val <= tol.residual_tol * scale
    margin = K.interior_margin(np.asarray(z).imag)
    assert margin >= tol.sample_margin / 2.0


# ---------------------------------------------------------------------------
# linear_k_stability
# ---------------------------------------------------------------------------


class TestLinearStability:
    def test_positive_orthant_certificate(self):
        v = linear_k_stability(parse("z1 + z2 + 1"), Orthant(2))
        assert v.status == CERTIFIED_STABLE
        assert v.certificate is not None and "K*" in v.certificate

    def test_negative_side_is_also_stable(self):
        v = linear_k_stability(parse("-z1 - z2 + 3"), Orthant(2))
        assert v.status == CERTIFIED_STABLE

    def test_mixed_signs_unstable_with_witness(self):
        f = parse("z1 - z2")
        v = linear_k_stability(f, Orthant(2))
        assert v.status == CERTIFIED_UNSTABLE
        _assert_valid_witness(v, f, Orthant(2))

    def test_psd_positive_definite_functional(self):
        # <A, Z> + 2 with A = diag(5, 1): flat coefficients (5, 0, 1).
        f = parse("5*z11 + z22 + 2", var_names=("z11", "z12", "z22"))
        v = linear_k_stability(f, PSD(2))
        assert v.status == CERTIFIED_STABLE

    def test_psd_indefinite_functional(self):
        f = parse("z11 - z22", var_names=("z11", "z12", "z22"))
        v = linear_k_stability(f, PSD(2))
        assert v.status == CERTIFIED_UNSTABLE
        _assert_valid_witness(v, f, PSD(2))

    def test_boundary_dual_functional_is_exact_but_flagged(self):
        # a = (1, 0) pairs to zero against (0, 1) but is a nonzero dual
        # vector, so z1 + b never vanishes with y1 > 0.
        v = linear_k_stability(parse("z1 + 1", var_names=("z1", "z2")), Orthant(2))
        assert v.status == CERTIFIED_STABLE
        assert "boundary" in v.certificate

    def test_wedge_cone_sign_split(self):
        # K = cone{(1,0), (1,1)}; a = (1, -3) pairs negatively with (1,1)
        # and -a pairs negatively with (1,0), so neither side is dual.
        K = Polyhedral([[1.0, 0.0], [1.0, 1.0]])
        f = parse("z1 - 3*z2")
        v = linear_k_stability(f, K)
        assert v.status == CERTIFIED_UNSTABLE
        _assert_valid_witness(v, f, K)
        assert linear_k_stability(parse("z1 + z2"), K).status == CERTIFIED_STABLE

    def test_zero_polynomial_is_unstable_by_convention(self):
        v = linear_k_stability(MultiPoly.zero(("z1", "z2")), Orthant(2))
        assert v.status == CERTIFIED_UNSTABLE
        assert "zero" in v.certificate

    def test_nonzero_constant_is_stable(self):
        v = linear_k_stability(parse("7", var_names=("z1",)), Orthant(1))
        assert v.status == CERTIFIED_STABLE

    def test_rejects_higher_degree(self):
        with pytest.raises(ValueError):
            linear_k_stability(parse("z1^2"), Orthant(1))

    def test_rejects_imaginary_linear_part(self):
        with pytest.raises(ValueError):
            linear_k_stability(parse("i*z1 + 1"), Orthant(1))

    def test_rejects_complex_constant_without_flag(self):
        with pytest.raises(ValueError):
            linear_k_stability(parse("z1 + z2 + i"), Orthant(2))

    def test_complex_constant_flag_cases(self):
        stable = parse("z1 + z2 + 1 + 2*i")
        v = linear_k_stability(stable, Orthant(2), allow_complex_constant=True)
        assert v.status == CERTIFIED_STABLE

        # Im(b) < 0 pulls a zero into the open upper set: solve
        # y1 + y2 = 2 with y interior, x1 + x2 = -1.
        f = parse("z1 + z2 + 1 - 2*i")
        v = linear_k_stability(f, Orthant(2), allow_complex_constant=True)
        assert v.status == CERTIFIED_UNSTABLE
        _assert_valid_witness(v, f, Orthant(2))

        flipped = parse("-z1 - z2 + 1 - 2*i")
        v = linear_k_stability(flipped, Orthant(2), allow_complex_constant=True)
        assert v.status == CERTIFIED_STABLE

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            linear_k_stability(parse("z1 + z2"), Orthant(3))


# ---------------------------------------------------------------------------
# falsify_k_stability
# ---------------------------------------------------------------------------


class TestFalsifier:
    def test_plane_witness_product_of_linear_forms(self):
        f = parse("(z1 + z3)^2 - z2^2")
        K = Orthant(3)
        v = falsify_k_stability(f, K, n_samples=2_000, rng=0)
        assert v.status == FALSIFIED
        _assert_valid_witness(v, f, K)
        y = np.asarray(v.witness).imag
        # Im(witness) must land on one of the two zero-set planes.
        planes = (abs(y[0] - y[1] + y[2]), abs(y[0] + y[1] + y[2]))
        assert min(planes) <= 1e-6 * float(np.linalg.norm(y))

    def test_matrix_variant_survives(self):
        f = parse("(z11 + z22)^2 - z12^2", var_names=("z11", "z12", "z22"))
        v = falsify_k_stability(f, PSD(2), n_samples=2_000, rng=0)
        assert v.status == NOT_FALSIFIED
        assert v.samples == 2_000

    def test_root_below_the_cone_is_not_a_witness(self):
        v = falsify_k_stability(parse("z1 + i"), Orthant(1), n_samples=2_000, rng=0)
        assert v.status == NOT_FALSIFIED

    def test_zero_polynomial_short_circuits(self):
        v = falsify_k_stability(MultiPoly.zero(("z1",)), Orthant(1), n_samples=100, rng=0)
        assert v.status == CERTIFIED_UNSTABLE

    def test_nonzero_constant_survives_without_sampling(self):
        v = falsify_k_stability(parse("3", var_names=("z1",)), Orthant(1), n_samples=100, rng=0)
        assert v.status == NOT_FALSIFIED

    @pytest.mark.parametrize(
        "text",
        [
            "z1 - z2",
            "z1^2 - z2^2",
            "(z1 - z2)*(z1 + z2 + 1)",
        ],
    )
    def test_witness_contract_on_unstable_instances(self, text):
        f = parse(text)
        K = Orthant(2)
        v = falsify_k_stability(f, K, n_samples=3_000, rng=7)
        assert v.status == FALSIFIED
        _assert_valid_witness(v, f, K)
        assert v.residual is not None and v.residual >= 0.0

    def test_determinism_bit_for_bit(self):
        f = parse("(z1 + z3)^2 - z2^2")
        a = falsify_k_stability(f, Orthant(3), n_samples=1_000, rng=11)
        b = falsify_k_stability(f, Orthant(3), n_samples=1_000, rng=11)
        assert a.status == b.status == FALSIFIED
        assert a.samples == b.samples
        assert np.array_equal(np.asarray(a.witness), np.asarray(b.witness))

    def test_budget_extension_preserves_first_witness(self):
        f = parse("z1^2 - z2^2")
        small = falsify_k_stability(f, Orthant(2), n_samples=500, rng=3)
        large = falsify_k_stability(f, Orthant(2), n_samples=5_000, rng=3)
        assert small.status == large.status == FALSIFIED
        assert small.samples == large.samples
        assert np.array_equal(np.asarray(small.witness), np.asarray(large.witness))

    def test_seed_echoed_in_verdict(self):
        v = falsify_k_stability(parse("z1 - z2"), Orthant(2), n_samples=500, rng=42)
        assert v.seed == 42

    def test_product_of_survivors_survives(self):
        K = Orthant(2)
        f = parse("z1 + z2 + 1")
        g = parse("(z1 + 2*z2)*(3*z1 + z2 + 5)")
        n = 1_500
        assert falsify_k_stability(f, K, n_samples=n, rng=5).status == NOT_FALSIFIED
        assert falsify_k_stability(g, K, n_samples=n, rng=5).status == NOT_FALSIFIED
        assert falsify_k_stability(f * g, K, n_samples=n, rng=5).status == NOT_FALSIFIED

    def test_product_witness_kills_a_factor(self):
        K = Orthant(2)
        bad = parse("z1 - z2")
        good = parse("z1 + z2 + 1")
        prod = bad * good
        v = falsify_k_stability(prod, K, n_samples=3_000, rng=1)
        assert v.status == FALSIFIED
        z = np.asarray(v.witness)
        vals = [abs(complex(bad(z))), abs(complex(good(z)))]
        scale = prod.coeff_norm1() * max(1.0, float(np.max(np.abs(z)))) ** prod.degree
        assert min(vals) <= 1e-4 * scale

    def test_rejects_generator_seeds(self):
        with pytest.raises(TypeError):
            falsify_k_stability(parse("z1"), Orthant(1), rng=np.random.default_rng(0))

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError):
            falsify_k_stability(parse("z1 + z2"), Orthant(3), n_samples=10)


# ---------------------------------------------------------------------------
# hyperbolicity_check
# ---------------------------------------------------------------------------


class TestHyperbolicity:
    def test_determinant_polynomial_is_hyperbolic(self):
        f = parse("z11*z22 - z12^2", var_names=("z11", "z12", "z22"))
        v = hyperbolicity_check(f, PSD(2), n_samples=1_000, rng=0)
        assert v.status == NOT_FALSIFIED

    def test_sum_of_squares_fails(self):
        f = parse("z1^2 + z2^2")
        K = Orthant(2)
        v = hyperbolicity_check(f, K, n_samples=1_000, rng=0)
        assert v.status == FALSIFIED
        _assert_valid_witness(v, f, K)

    def test_monomial_is_hyperbolic(self):
        v = hyperbolicity_check(parse("z1*z2"), Orthant(2), n_samples=1_000, rng=0)
        assert v.status == NOT_FALSIFIED

    def test_rejects_inhomogeneous_input(self):
        with pytest.raises(ValueError):
            hyperbolicity_check(parse("z1 + 1"), Orthant(1))

    @pytest.mark.parametrize("text,expect", [
        ("z1 - z2", FALSIFIED),
        ("z1 + z2", NOT_FALSIFIED),
        ("z1^2 - z2^2", FALSIFIED),
    ])
    def test_agrees_with_direct_falsifier(self, text, expect):
        f = parse(text)
        K = Orthant(2)
        hv = hyperbolicity_check(f, K, n_samples=1_000, rng=9)
        fv = falsify_k_stability(f, K, n_samples=1_000, rng=9)
        assert hv.status == expect
        assert (hv.status == FALSIFIED) == (fv.status == FALSIFIED)
        if hv.status == FALSIFIED:
            _assert_valid_witness(hv, f, K)


# ---------------------------------------------------------------------------
# hb_lift_check
# ---------------------------------------------------------------------------


class TestHbLift:
    def test_coordinate_pair_is_unstable_on_both_sides(self):
        # z1 + i z2 vanishes at (1+i, -1+i) whose imaginary part (1, 1)
        # is interior, so the direct side must be falsified; the lifted
        # side z1 + w z2 vanishes at w = 1+i, z1 = -1+i, z2 = 1 with
        # imaginary parts (1, 0, 1)... scaled into the interior by the
        # sampler. Both dirty is the consistent outcome.
        rep = hb_lift_check(
            parse("z2", var_names=("z1", "z2")), parse("z1", var_names=("z1", "z2")),
            Orthant(2), n_samples=3_000, rng=0,
        )
        assert rep.direct.status == FALSIFIED
        assert rep.lifted.status == FALSIFIED
        assert rep.consistent

    def test_sign_flip_still_dirty(self):
        rep = hb_lift_check(
            parse("-z2", var_names=("z1", "z2")), parse("z1", var_names=("z1", "z2")),
            Orthant(2), n_samples=3_000, rng=0,
        )
        assert rep.direct.status == FALSIFIED
        assert rep.lifted.status == FALSIFIED
        assert rep.consistent

    def test_zero_f_reduces_to_g(self):
        rep = hb_lift_check(
            MultiPoly.zero(("z1", "z2")), parse("z1", var_names=("z1", "z2")),
            Orthant(2), n_samples=1_000, rng=0,
        )
        assert rep.direct.status == NOT_FALSIFIED
        assert rep.lifted.status == NOT_FALSIFIED
        assert rep.consistent

    def test_constructed_stable_pair_clean_on_both_sides(self):
        # g + i f = (z1+z2+1) * (z1+z2+2+i): both factors have dual-cone
        # coefficient vectors and upper-half constants, so the product
        # never vanishes on the open set.
        base = parse("z1 + z2 + 1")
        g = base * parse("z1 + z2 + 2")
        rep = hb_lift_check(base, g, Orthant(2), n_samples=2_000, rng=4)
        assert rep.direct.status == NOT_FALSIFIED
        assert rep.lifted.status == NOT_FALSIFIED
        assert rep.consistent

    def test_rejects_complex_inputs(self):
        with pytest.raises(ValueError):
            hb_lift_check(parse("i*z1"), parse("z1"), Orthant(1))


# ---------------------------------------------------------------------------
# pencil_hko_check
# ---------------------------------------------------------------------------


class TestPencil:
    def test_proportional_pair_is_clean_and_consistent(self):
        f = parse("z1 + z2")
        rep = pencil_hko_check(f, f, Orthant(2), n_samples=800, rng=0)
        assert rep.pencil_clean
        assert rep.combo_clean
        assert rep.consistent
        # The direction lam + mu = 0 hits the zero member exactly.
        assert any(e.zero for e in rep.entries)

    def test_coordinate_pair_dirty_on_both_sides(self):
        rep = pencil_hko_check(
            parse("z2", var_names=("z1", "z2")), parse("z1", var_names=("z1", "z2")),
            Orthant(2), n_samples=800, rng=0,
        )
        assert not rep.pencil_clean
        assert not rep.combo_clean
        assert rep.consistent
        assert rep.f_plus_ig.status == FALSIFIED
        assert rep.g_plus_if.status == FALSIFIED

    def test_opposite_multiples_stay_clean(self):
        f = parse("z1")
        g = f.scale(-1.0)
        rep = pencil_hko_check(f, g, Orthant(1), n_samples=800, rng=0)
        assert rep.pencil_clean
        assert rep.combo_clean
        assert rep.consistent
        assert any(e.zero for e in rep.entries)

    def test_custom_grid_is_respected(self):
        rep = pencil_hko_check(
            parse("z1 + z2"), parse("z1 + z2"), Orthant(2),
            grid=[(1.0, 0.0), (0.0, 1.0)], n_samples=300, rng=0,
        )
        assert len(rep.entries) == 2
        assert [(e.lam, e.mu) for e in rep.entries] == [(1.0, 0.0), (0.0, 1.0)]

    def test_default_grid_contains_axes(self):
        rep = pencil_hko_check(parse("z1"), parse("z1"), Orthant(1), n_samples=200, rng=0)
        pts = [(round(e.lam, 12), round(e.mu, 12)) for e in rep.entries]
        assert (1.0, 0.0) in pts and (0.0, 1.0) in pts
        assert len(rep.entries) == 32


# ---------------------------------------------------------------------------
# wronskian_certificate
# ---------------------------------------------------------------------------


class TestWronskian:
    def test_coordinate_pair_fails_with_disproof_points(self):
        # W_{e1}(z2, z1) = 0*z1 - z2*1 = -z2: positive whenever z2 < 0.
        rep = wronskian_certificate(
            parse("z2", var_names=("z1", "z2")), parse("z1", var_names=("z1", "z2")),
            Orthant(2), n_points=800, rng=0,
        )
        assert not rep.holds_all
        failing = [d for d in rep.directions if not d.holds]
        assert failing
        for d in failing:
            assert d.max_violation > 0.0
            assert len(d.disproof_points) >= 1

    def test_constant_numerator_passes(self):
        # W(1, z1) = 0*z1 - 1*1 = -1 everywhere.
        rep = wronskian_certificate(
            parse("1", var_names=("z1",)), parse("z1"), Orthant(1), n_points=500, rng=0
        )
        assert rep.holds_all

    def test_equal_pair_passes(self):
        f = parse("z1*z2 + z1")
        rep = wronskian_certificate(f, f, Orthant(2), n_points=500, rng=0)
        assert rep.holds_all

    def test_interlacing_style_pair_passes(self):
        # W_v(1, z1+z2) = -(v1 + v2) < 0 for interior v.
        rep = wronskian_certificate(
            parse("1", var_names=("z1", "z2")), parse("z1 + z2"),
            Orthant(2), n_points=500, rng=0,
        )
        assert rep.holds_all

    def test_polyhedral_cone_uses_generators(self):
        K = Polyhedral([[1.0, 0.0], [1.0, 1.0]])
        rep = wronskian_certificate(
            parse("1", var_names=("z1", "z2")), parse("z1 + z2"), K, n_points=400, rng=0
        )
        assert rep.holds_all
        dirs = np.array([d.direction for d in rep.directions])
        assert dirs.shape == (2, 2)

    def test_psd_cone_samples_interior_directions(self):
        f = parse("1", var_names=("z11", "z12", "z22"))
        g = parse("z11 + z22", var_names=("z11", "z12", "z22"))
        rep = wronskian_certificate(f, g, PSD(2), n_points=400, rng=0, n_directions=4)
        assert len(rep.directions) == 4
        assert rep.holds_all


# ---------------------------------------------------------------------------
# decompose_check
# ---------------------------------------------------------------------------


class TestDecompose:
    def test_falsified_whole_skips_parts(self):
        h = parse("(z1 + i*z2)^2")
        rep = decompose_check(h, Orthant(2), n_samples=1_500, rng=0)
        assert rep.whole.status == FALSIFIED
        assert rep.real_part is None and rep.imag_part is None
        assert rep.consistent

    def test_real_input_checks_only_real_part(self):
        h = parse("z11*z22 - z12^2", var_names=("z11", "z12", "z22"))
        rep = decompose_check(h, PSD(2), n_samples=1_000, rng=0)
        assert rep.whole.status == NOT_FALSIFIED
        assert rep.real_part is not None and rep.real_part.status == NOT_FALSIFIED
        assert rep.imag_part is None
        assert rep.consistent

    def test_stable_complex_multiple_has_clean_parts(self):
        h = parse("(1 + i)*(z1 + z2 + 1)")
        rep = decompose_check(h, Orthant(2), n_samples=1_000, rng=0)
        assert rep.whole.status == NOT_FALSIFIED
        assert rep.real_part.status == NOT_FALSIFIED
        assert rep.imag_part.status == NOT_FALSIFIED
        assert rep.consistent


# ---------------------------------------------------------------------------
# imaginary_projection_sample
# ---------------------------------------------------------------------------


class TestImaginaryProjection:
    def test_linear_cloud_lies_on_hyperplane(self):
        cloud = imaginary_projection_sample(parse("z1 + z2 + 1"), n_points=400, rng=0)
        assert cloud.shape[0] >= 200
        assert cloud.shape[1] == 2
        assert np.max(np.abs(cloud[:, 0] + cloud[:, 1])) <= 1e-8

    def test_univariate_two_point_projection(self):
        cloud = imaginary_projection_sample(parse("z1^2 + 1"), n_points=200, rng=0)
        assert cloud.shape[0] >= 100
        assert np.max(np.abs(np.abs(cloud[:, 0]) - 1.0)) <= 1e-8

    def test_quadric_cloud_on_plane_union(self):
        cloud = imaginary_projection_sample(parse("(z1 + z3)^2 - z2^2"), n_points=400, rng=0)
        assert cloud.shape[0] >= 200
        d1 = np.abs(cloud[:, 0] - cloud[:, 1] + cloud[:, 2])
        d2 = np.abs(cloud[:, 0] + cloud[:, 1] + cloud[:, 2])
        assert np.max(np.minimum(d1, d2)) <= 1e-8

    def test_requested_count_is_honored_when_available(self):
        cloud = imaginary_projection_sample(parse("z1 + z2 + 1"), n_points=150, rng=0)
        assert cloud.shape[0] == 150

    def test_rejects_constants(self):
        with pytest.raises(ValueError):
            imaginary_projection_sample(parse("4", var_names=("z1",)))

    def test_deterministic(self):
        a = imaginary_projection_sample(parse("z1^2 + 1"), n_points=100, rng=5)
        b = imaginary_projection_sample(parse("z1^2 + 1"), n_points=100, rng=5)
        assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# specialize_stability_check
# ---------------------------------------------------------------------------


class TestSpecialization:
    def test_monomial_specialization_survives(self):
        v = specialize_stability_check(
            parse("z1*z2"), [0], [0.0], [1.0], Orthant(1), Orthant(1),
            n_samples=500, rng=0,
        )
        assert v.status == NOT_FALSIFIED

    def test_linear_specialization_survives(self):
        v = specialize_stability_check(
            parse("z1 + z2"), [0], [1.0], [1.0], Orthant(1), Orthant(1),
            n_samples=500, rng=0,
        )
        assert v.status == NOT_FALSIFIED

    def test_lifted_pair_specializes_cleanly(self):
        # h = g + w f over K x R>=0 with a stable construction; pinning
        # w to 0.7 + i must stay clean over the base cone.
        base = parse("z1 + z2 + 1", var_names=("z1", "z2", "w"))
        g = base * parse("z1 + z2 + 2", var_names=("z1", "z2", "w"))
        w = parse("w", var_names=("z1", "z2", "w"))
        h = g + w * base
        v = specialize_stability_check(
            h, [2], [0.7], [1.0], Orthant(1), Orthant(2), n_samples=800, rng=0
        )
        assert v.status == NOT_FALSIFIED

    def test_unstable_specialization_is_caught(self):
        # f = z2*(z1 - z3): pin z2 to 1 + i; the remaining factor is the
        # sign-split linear form z1 - z3.
        f = parse("z2*(z1 - z3)")
        v = specialize_stability_check(
            f, [1], [1.0], [1.0], Orthant(1), Orthant(2), n_samples=2_000, rng=0
        )
        assert v.status == FALSIFIED

    def test_rejects_non_interior_shift(self):
        with pytest.raises(ValueError):
            specialize_stability_check(
                parse("z1*z2"), [0], [0.0], [0.0], Orthant(1), Orthant(1)
            )

    def test_rejects_duplicate_indices(self):
        with pytest.raises(ValueError):
            specialize_stability_check(
                parse("z1*z2"), [0, 0], [0.0, 0.0], [1.0, 1.0],
                Orthant(2), Orthant(1),
            )

    def test_rejects_cone_size_mismatch(self):
        with pytest.raises(ValueError):
            specialize_stability_check(
                parse("z1*z2"), [0], [0.0], [1.0], Orthant(2), Orthant(1)
            )


# ---------------------------------------------------------------------------
# Cross-procedure properties
# ---------------------------------------------------------------------------


class TestCrossChecks:
    def test_linear_oracle_sample(self):
        # A small in-line version of the exact-vs-sampling agreement sweep.
        rng = np.random.default_rng(2024)
        K = Orthant(3)
        for trial in range(20):
            a = np.round(rng.normal(0.0, 1.0, 3), 3)
            if np.min(np.abs(a)) < 0.1:
                continue
            b = float(np.round(rng.normal(), 3))
            text_terms = [f"({a[j]})*z{j + 1}" for j in range(3)]
            f = parse(" + ".join(text_terms) + f" + ({b})")
            exact = linear_k_stability(f, K)
            sampled = falsify_k_stability(f, K, n_samples=4_000, rng=trial)
            if exact.status == CERTIFIED_STABLE:
                assert sampled.status == NOT_FALSIFIED
            else:
                assert sampled.status == FALSIFIED
                _assert_valid_witness(sampled, f, K)

    def test_product_cone_falsification(self):
        # Mixed cone: orthant x PSD(2). z1 - z11 splits signs across the
        # blocks (positive on the first, negative on the diagonal entry).
        K = product(Orthant(1), PSD(2))
        names = ("z1", "z11", "z12", "z22")
        f = parse("z1 - z11", var_names=names)
        v = falsify_k_stability(f, K, n_samples=2_000, rng=0)
        assert v.status == FALSIFIED
        _assert_valid_witness(v, f, K)

    def test_verdict_residual_matches_reevaluation(self):
        f = parse("z1^2 - z2^2")
        v = falsify_k_stability(f, Orthant(2), n_samples=1_000, rng=0)
        assert v.status == FALSIFIED
        assert abs(v.residual - abs(complex(f(np.asarray(v.witness))))) <= 1e-12
