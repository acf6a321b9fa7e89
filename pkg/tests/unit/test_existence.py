import math
from types import SimpleNamespace

import numpy as np
import pytest

from frontlab.errors import GridError, NoConvergence, NoFoldFound, PreconditionError, RegimeError
from frontlab.existence import (
    Construction,
    TypeD,
    TypeE,
    build_composite_front,
    classify_destabilization_type,
    default_half_width,
    existence_residual,
    far_field_tolerance,
    find_branches,
    find_fold,
    refine_front_bvp,
    regular_front_v_peak,
    takeoff_curve,
)
from frontlab.model import ModelParams, ReactionSpec, Regular, SuperSlow
from frontlab.spectrum.evans import t2_closed_form, t2_jump_matching

V1 = 0.8153
V2 = 5.410


# =============================================================================
# find_branches()
# =============================================================================


class TestFindBranches:
    def test_two_fronts_at_gamma_two(self, superslow_params, quadratic_spec):
        branches = find_branches(superslow_params, quadratic_spec)
        assert [b.branch_index for b in branches] == [1, 2]
        assert branches[0].v0 == pytest.approx(V1, abs=1e-4)
        assert branches[1].v0 == pytest.approx(V2, abs=1e-3)
        assert all(b.transversal for b in branches)
        assert all(b.residual < 1e-8 for b in branches)
        # lower branch crosses upwards, upper branch downwards
        assert branches[0].slope > 0 > branches[1].slope

    def test_roots_solve_existence_equation(self, superslow_params, quadratic_spec):
        for b in find_branches(superslow_params, quadratic_spec):
            assert existence_residual(b.v0, 2.0, quadratic_spec) == pytest.approx(0.0, abs=1e-8)
            # H = U^2: sqrt(gamma) v = J/2 reduces to 3 v = (1 + v)^(3/2)
            assert 3.0 * b.v0 == pytest.approx((1.0 + b.v0) ** 1.5, rel=1e-8)

    @pytest.mark.parametrize("gamma, count", [(1.4, 0), (1.6, 2), (8.0, 2)])
    def test_count_across_fold(self, gamma, count):
        params = ModelParams(epsilon=0.1, tau=1.0, regime=SuperSlow(gamma=gamma))
        spec = ReactionSpec.power(1.0, g1=params.g1)
        assert len(find_branches(params, spec)) == count

    def test_v_max_cuts_upper_branch(self, superslow_params, quadratic_spec):
        branches = find_branches(superslow_params, quadratic_spec, v_max=3.0)
        assert len(branches) == 1

    def test_regular_regime_rejected(self, regular_params, regular_spec):
        with pytest.raises(RegimeError):
            find_branches(regular_params, regular_spec)

    def test_non_positive_gamma_rejected(self):
        params = ModelParams(epsilon=0.1, tau=1.0, regime=SuperSlow(gamma=-0.1))
        with pytest.raises(PreconditionError):
            find_branches(params, ReactionSpec.power(1.0, g1=params.g1))

    def test_v_max_range(self, superslow_params, quadratic_spec):
        with pytest.raises(PreconditionError):
            find_branches(superslow_params, quadratic_spec, v_max=60.0)


def test_takeoff_curve(superslow_params, quadratic_spec):
    samples = takeoff_curve(superslow_params, quadratic_spec, [0.0, V1, 2.0])
    assert samples[0].half_jump == pytest.approx(math.sqrt(2.0) / 3.0, rel=1e-10)
    assert samples[0].slow_line == 0.0
    assert abs(samples[1].residual) < 1e-3
    assert samples[2].slow_line == pytest.approx(2.0 * math.sqrt(2.0))


# =============================================================================
# find_fold()
# =============================================================================


class TestFindFold:
    def test_quadratic_fold(self, superslow_params, quadratic_spec):
        fold = find_fold(superslow_params, quadratic_spec)
        assert fold.gamma_double == pytest.approx(1.5, abs=1e-6)
        assert fold.v_fold == pytest.approx(2.0, abs=1e-5)
        assert fold.contact_order == 2

    def test_fold_scales_with_h0_squared(self, superslow_params):
        fold = find_fold(superslow_params, ReactionSpec.power(2.0, g1=superslow_params.g1))
        assert fold.gamma_double == pytest.approx(6.0, abs=1e-5)

    @pytest.mark.parametrize("h0", [0.0, -1.0])
    def test_no_fold(self, superslow_params, h0):
        with pytest.raises(NoFoldFound):
            find_fold(superslow_params, ReactionSpec.power(h0, g1=superslow_params.g1))

    def test_empty_window(self, superslow_params, quadratic_spec):
        with pytest.raises(PreconditionError):
            find_fold(superslow_params, quadratic_spec, v_window=(3.0, 1.0))

    @pytest.mark.parametrize("h0", [1.0, 2.0])
    def test_slow_transmission_vanishes_at_computed_fold(self, superslow_params, h0):
        spec = ReactionSpec.power(h0, g1=superslow_params.g1)
        fold = find_fold(superslow_params, spec)
        at_fold = superslow_params.with_gamma(fold.gamma_double)
        assert abs(t2_jump_matching(0.0, fold.v_fold, at_fold, spec)) < 1e-6
        assert abs(t2_closed_form(0.0, fold.v_fold, at_fold, spec)) < 1e-6


# =============================================================================
# fronts
# =============================================================================


class TestCompositeFront:
    def test_symmetry_and_limits(self, superslow_params, quadratic_spec):
        front = build_composite_front(V1, superslow_params, quadratic_spec)
        assert front.construction is Construction.COMPOSITE
        assert np.allclose(front.U, -front.U[::-1], atol=1e-12)
        assert np.allclose(front.V, front.V[::-1], atol=1e-12)
        u_mid, v_mid = front.evaluate(0.0)
        assert u_mid == pytest.approx(0.0, abs=1e-12)
        assert v_mid == pytest.approx(V1)
        assert abs(front.U[-1] - 1.0) < 1e-4
        assert abs(front.U[0] + 1.0) < 1e-4

    def test_default_half_width(self, superslow_params, quadratic_spec):
        front = build_composite_front(V1, superslow_params, quadratic_spec)
        rate = 0.1 * math.sqrt(2.0)
        assert front.half_width == pytest.approx(12.0 / rate)
        assert front.metadata()["points"] == 2048

    def test_core_follows_fast_front(self, superslow_params, quadratic_spec):
        front = build_composite_front(V1, superslow_params, quadratic_spec)
        u, _ = front.evaluate(0.05)
        assert u == pytest.approx(math.sqrt(1 + V1) * math.tanh(math.sqrt((1 + V1) / 2) * 0.5), rel=1e-3)

    def test_too_few_points(self, superslow_params, quadratic_spec):
        with pytest.raises(GridError):
            build_composite_front(V1, superslow_params, quadratic_spec, N=256)

    def test_short_domain(self, superslow_params, quadratic_spec):
        with pytest.raises(GridError):
            build_composite_front(V1, superslow_params, quadratic_spec, L=10.0)

    def test_level_below_minus_one(self, superslow_params, quadratic_spec):
        with pytest.raises(PreconditionError):
            build_composite_front(-1.0, superslow_params, quadratic_spec)


class TestRegularFront:
    def test_v_peak(self, regular_params, regular_spec):
        assert regular_front_v_peak(regular_params, regular_spec) == pytest.approx(0.04714, abs=1e-5)

    def test_needs_regular_regime(self, superslow_params, quadratic_spec):
        with pytest.raises(RegimeError):
            regular_front_v_peak(superslow_params, quadratic_spec)

    def test_small_slope_is_super_slow(self):
        params = ModelParams(epsilon=0.1, tau=1.0, regime=Regular(g1=-0.05))
        with pytest.raises(RegimeError):
            regular_front_v_peak(params, ReactionSpec.power(1.0, g1=-0.05))

    @pytest.mark.slow
    def test_refined_peak_matches_leading_order(self, regular_params, regular_spec):
        v_peak = regular_front_v_peak(regular_params, regular_spec)
        seed = build_composite_front(v_peak, regular_params, regular_spec)
        refined = refine_front_bvp(seed, regular_params, regular_spec)
        assert refined.construction is Construction.REFINED
        assert refined.v0 == pytest.approx(0.0471, abs=5e-3)
        u_end, v_end = refined.evaluate(refined.half_width)
        assert abs(u_end - 1.0) < 1e-3 and abs(v_end) < 1e-3
        assert np.allclose(refined.U, -refined.U[::-1], atol=1e-8)


class TestRefinedFront:
    def test_far_field_tolerance_follows_the_slow_tail(self, superslow_params, regular_params):
        L = default_half_width(superslow_params)
        # (1 + v1) exp(-12), ten times over
        assert far_field_tolerance(superslow_params, V1, L) == pytest.approx(10.0 * 1.8153 * math.exp(-12.0), rel=1e-3)
        assert far_field_tolerance(superslow_params, V1, L) < 1e-3
        assert far_field_tolerance(regular_params, 0.05, default_half_width(regular_params)) == 1e-6

    def test_loose_far_field_is_rejected(self, superslow_params, quadratic_spec, mocker):
        """An orbit ending 5e-4 away from (1, 0) is not a front at the default width."""
        end = np.array([1.0, 0.0, 5e-4, 0.0])
        mocker.patch(
            "frontlab.existence.solve_bvp",
            return_value=SimpleNamespace(success=True, message="", rms_residuals=np.array([1e-9]), sol=lambda x: end),
        )
        seed = build_composite_front(V1, superslow_params, quadratic_spec)
        with pytest.raises(NoConvergence, match="does not connect"):
            refine_front_bvp(seed, superslow_params, quadratic_spec)

    @pytest.mark.slow
    def test_upper_branch(self, superslow_params, quadratic_spec):
        seed = build_composite_front(V2, superslow_params, quadratic_spec)
        refined = refine_front_bvp(seed, superslow_params, quadratic_spec)
        _, v_mid = refined.evaluate(0.0)
        assert refined.v0 == pytest.approx(V2, rel=0.05)
        assert v_mid == pytest.approx(refined.v0, rel=1e-6)
        u_end, v_end = refined.evaluate(refined.half_width)
        tolerance = far_field_tolerance(superslow_params, refined.v0, refined.half_width)
        assert abs(u_end - 1.0) <= tolerance and abs(v_end) <= tolerance

    @pytest.mark.slow
    def test_no_front_below_fold(self):
        params = ModelParams(epsilon=0.1, tau=1.0, regime=SuperSlow(gamma=1.0))
        spec = ReactionSpec.power(1.0, g1=params.g1)
        assert find_branches(params, spec) == []
        seed = build_composite_front(2.0, params, spec)
        with pytest.raises(NoConvergence):
            refine_front_bvp(seed, params, spec, max_nodes=50000)


# =============================================================================
# classify_destabilization_type()
# =============================================================================


class TestClassify:
    def test_fold_type(self, superslow_params, quadratic_spec):
        verdict = classify_destabilization_type(quadratic_spec, superslow_params)
        assert isinstance(verdict, TypeD)
        assert verdict.fold.gamma_double == pytest.approx(1.5, abs=1e-5)

    def test_essential_type(self, superslow_params):
        spec = ReactionSpec.power(-1.0, g1=superslow_params.g1)
        verdict = classify_destabilization_type(spec, superslow_params)
        assert isinstance(verdict, TypeE)
        assert verdict.gamma_min <= 1e-4 * 1.001
        assert -1.0 < verdict.v0_at_gamma_min < 0.0

    def test_constant_h_is_essential_type(self, superslow_params):
        spec = ReactionSpec.power(1.0, m=0, g1=superslow_params.g1)
        verdict = classify_destabilization_type(spec, superslow_params)
        assert isinstance(verdict, TypeE)
        assert verdict.gamma_min <= 1e-4 * 1.001
        # sqrt(gamma) v = sqrt(2 (1 + v)) keeps v0 finite, growing like 2 / gamma
        assert verdict.v0_at_gamma_min > 1e3

    def test_scan_must_descend(self, superslow_params, quadratic_spec):
        with pytest.raises(PreconditionError):
            classify_destabilization_type(quadratic_spec, superslow_params, gamma_scan=[1.0, 10.0])
