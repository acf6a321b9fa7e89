"""Oracle eigenvalues of refined super-slow fronts against the closed-form edge prediction."""

import pytest

from frontlab.existence import build_composite_front, find_branches, refine_front_bvp
from frontlab.model import ModelParams, ReactionSpec, SuperSlow
from frontlab.spectrum.evans import LinearizationContext, lambda_edge_predict
from frontlab.spectrum.oracle import discrete_spectrum_oracle
from frontlab.spectrum.types import ParityClass

pytestmark = pytest.mark.slow


def _first_branch_oracle(epsilon, gamma=2.0, h0=1.0, tau=1.0):
    params = ModelParams(epsilon=epsilon, tau=tau, regime=SuperSlow(gamma=gamma))
    spec = ReactionSpec.power(h0, g1=params.g1)
    v1 = find_branches(params, spec)[0].v0
    edge = lambda_edge_predict(v1, params, spec)
    front = refine_front_bvp(build_composite_front(v1, params, spec), params, spec)
    ctx = LinearizationContext.build(front, params, spec)
    N = 8192 if epsilon <= 0.05 else 4096
    eigenvalues = discrete_spectrum_oracle(ctx, N=N, shifts=(edge.lambda_edge, 0.01))
    return edge, eigenvalues


def _nearest_point(eigenvalues, target):
    points = [e for e in eigenvalues if e.label == "point"]
    return min(points, key=lambda e: abs(e.value - target))


class TestEdgeEigenvalue:
    """Isolated edge eigenvalue of the stable branch, H = U^2, gamma = 2, tau = 1."""

    @pytest.fixture(scope="class")
    def runs(self):
        return {eps: _first_branch_oracle(eps) for eps in (0.1, 0.05)}

    @pytest.mark.parametrize("eps", [0.1, 0.05])
    def test_matches_prediction(self, runs, eps):
        edge, eigenvalues = runs[eps]
        assert edge.lambda_tilde_edge == pytest.approx(-2.1847, abs=1e-3)
        found = _nearest_point(eigenvalues, edge.lambda_edge)
        assert abs(found.value.imag) <= max(found.error_estimate, 1e-8)
        assert found.value.real == pytest.approx(edge.lambda_edge, rel=0.3)
        assert found.parity is ParityClass.U_ODD_V_EVEN

    @pytest.mark.parametrize("eps", [0.1, 0.05])
    def test_separated_from_essential_spectrum(self, runs, eps):
        edge, eigenvalues = runs[eps]
        found = _nearest_point(eigenvalues, edge.lambda_edge)
        # tip of the essential spectrum at eps^2 * (-4)
        assert found.value.real > -3.0 * eps**2
        assert found.distance_to_essential > 0.5 * eps**2

    def test_relative_error_shrinks_with_eps(self, runs):
        errors = []
        for eps in (0.1, 0.05):
            edge, eigenvalues = runs[eps]
            found = _nearest_point(eigenvalues, edge.lambda_edge)
            errors.append(abs(found.value - edge.lambda_edge) / abs(edge.lambda_edge))
        assert errors[1] < errors[0]
        assert errors[0] < 0.05


class TestNoHopfNearOrigin:
    """Point eigenvalues within 10 eps^2 of the origin stay on the real axis."""

    @pytest.mark.parametrize("h0, gamma", [(1.0, 2.0), (1.0, 3.0), (-1.0, 2.0)])
    def test_small_eigenvalues_are_real(self, h0, gamma):
        eps = 0.1
        _, eigenvalues = _first_branch_oracle(eps, gamma=gamma, h0=h0)
        small = [e for e in eigenvalues if e.label == "point" and abs(e.value) <= 10.0 * eps**2]
        assert small, "translation eigenvalue missing"
        for e in small:
            assert abs(e.value.imag) <= max(e.error_estimate, 1e-8), e
