import numpy as np
import pytest

from frontlab.errors import PreconditionError
from frontlab.model import ModelParams, ReactionSpec, SuperSlow
from frontlab.spectrum.essential import (
    char_roots,
    classify_regime,
    discriminant,
    dispersion_table,
    distance_to_essential_spectrum,
    merge_threshold,
    stability_verdict,
    tip_lambda_superslow,
)
from frontlab.spectrum.types import SpectralRegime


def _spec(h0: float) -> ReactionSpec:
    return ReactionSpec.power(h0, g1=-1.0)


def test_merge_threshold(regular_params):
    assert merge_threshold(regular_params) == pytest.approx(0.17157, abs=1e-5)


def test_roots_at_zero_wavenumber(regular_params):
    # k = 0 with tau = 1, G1 = -1, H0 = 1: (lambda + 2) lambda + 2 = 0
    lam1, lam2 = char_roots(0.0, regular_params, _spec(1.0))
    assert lam1 == pytest.approx(-1 + 1j)
    assert lam2 == pytest.approx(-1 - 1j)


def test_real_roots_descending(regular_params):
    lam1, lam2 = char_roots(0.0, regular_params, _spec(0.0))
    assert lam1 == pytest.approx(-1.0)
    assert lam2 == pytest.approx(-2.0)


def test_dispersion_table_symmetric(regular_params):
    table = dispersion_table(regular_params, _spec(0.1))
    assert len(table) == 4001
    assert table[0].k == -5.0 and table[-1].k == 5.0
    assert table[0].lambda1 == pytest.approx(table[-1].lambda1)
    assert all(p.lambda1.real >= p.lambda2.real for p in table)


class TestStability:
    def test_stable_background(self, regular_params):
        stable, margins = stability_verdict(regular_params, _spec(1.0))
        assert stable
        assert margins.h_margin == pytest.approx(-2.0)
        assert margins.max_re_lambda < 0

    @pytest.mark.parametrize("h0, expected", [(3.0 - 1e-6, True), (3.0 + 1e-6, False)])
    def test_turing_threshold(self, regular_params, h0, expected):
        stable, _ = stability_verdict(regular_params, _spec(h0))
        assert stable is expected

    def test_growing_slow_reaction_is_unstable(self):
        params = ModelParams(epsilon=0.1, tau=1.0, regime=SuperSlow(gamma=-0.5))
        stable, margins = stability_verdict(params, ReactionSpec.power(1.0, g1=params.g1))
        assert not stable
        assert margins.g1 > 0

    def test_classify_rejects_unstable(self, regular_params):
        with pytest.raises(PreconditionError):
            classify_regime(regular_params, _spec(3.0 + 1e-6))


class TestRegimes:
    @pytest.mark.parametrize("h0, regime", [
        (-0.5, SpectralRegime.ALL_REAL),
        (0.0, SpectralRegime.BOUNDARY_H0_ZERO),
        (0.1, SpectralRegime.TWO_COMPLEX_BANDS),
        (1.0, SpectralRegime.MERGED_COMPLEX_BAND),
    ])
    def test_regime(self, regular_params, h0, regime):
        assert classify_regime(regular_params, _spec(h0)).regime is regime

    @pytest.mark.parametrize("offset, regime", [
        (-1e-6, SpectralRegime.TWO_COMPLEX_BANDS),
        (1e-6, SpectralRegime.MERGED_COMPLEX_BAND),
    ])
    def test_either_side_of_merge(self, regular_params, offset, regime):
        h0 = merge_threshold(regular_params) + offset
        assert classify_regime(regular_params, _spec(h0)).regime is regime

    def test_merge_boundary(self, regular_params):
        report = classify_regime(regular_params, _spec(merge_threshold(regular_params)))
        assert report.regime is SpectralRegime.BOUNDARY_KMINUS_ZERO
        assert report.k_minus == 0.0

    def test_all_real_has_no_band(self, regular_params):
        report = classify_regime(regular_params, _spec(-0.5))
        assert report.k_minus is None and report.k_plus is None
        assert np.all(discriminant(np.linspace(-5, 5, 401), regular_params, _spec(-0.5)) >= 0)

    def test_two_bands_edges(self, regular_params):
        report = classify_regime(regular_params, _spec(0.1))
        assert 0.0 < report.k_minus < report.k_plus
        mid = 0.5 * (report.k_minus + report.k_plus)
        assert discriminant(np.array([mid]), regular_params, _spec(0.1))[0] < 0
        assert discriminant(np.array([0.0]), regular_params, _spec(0.1))[0] > 0

    def test_merged_band_contains_origin(self, regular_params):
        report = classify_regime(regular_params, _spec(1.0))
        assert report.k_minus is None
        assert report.k_plus > 0
        assert report.tip_lambda_plus == pytest.approx(-1 + 1j)
        assert report.margin < 0


class TestTip:
    def test_superslow_tip(self, superslow_params, quadratic_spec):
        assert tip_lambda_superslow(superslow_params, quadratic_spec) == pytest.approx(-4.0)

    def test_tip_needs_superslow(self, regular_params):
        with pytest.raises(PreconditionError):
            tip_lambda_superslow(regular_params, _spec(1.0))

    def test_tip_needs_gap(self, superslow_params):
        with pytest.raises(PreconditionError):
            tip_lambda_superslow(superslow_params, ReactionSpec.power(1.995, g1=superslow_params.g1))


def test_distance_vanishes_on_spectrum(regular_params):
    spec = _spec(1.0)
    on_curve = char_roots(0.3, regular_params, spec)[0]
    assert distance_to_essential_spectrum(on_curve, regular_params, spec) == pytest.approx(0.0, abs=1e-6)


def test_distance_off_spectrum(regular_params):
    spec = _spec(1.0)
    assert distance_to_essential_spectrum(1.0, regular_params, spec) > 1.0
