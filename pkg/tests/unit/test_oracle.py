import numpy as np
import pytest

from frontlab.errors import GridError
from frontlab.existence import build_composite_front
from frontlab.spectrum.evans import LinearizationContext
from frontlab.spectrum.oracle import discrete_spectrum_oracle, parity_check
from frontlab.spectrum.types import ParityClass

X = np.linspace(-10.0, 10.0, 201)
SECH = 1.0 / np.cosh(X)


class TestParity:
    def test_translation_mode(self):
        vec = np.concatenate([SECH**2, np.zeros_like(X)])
        assert parity_check(vec) is ParityClass.U_EVEN_V_ODD

    def test_odd_u_even_v(self):
        vec = np.concatenate([SECH * np.tanh(X), 0.1 * SECH])
        assert parity_check(vec) is ParityClass.U_ODD_V_EVEN

    def test_even_u_odd_v(self):
        vec = np.concatenate([SECH, 0.3 * np.tanh(X) * SECH])
        assert parity_check(vec) is ParityClass.U_EVEN_V_ODD

    def test_complex_phase_is_ignored(self):
        vec = np.exp(0.7j) * np.concatenate([SECH * np.tanh(X), SECH])
        assert parity_check(vec) is ParityClass.U_ODD_V_EVEN

    def test_mixed(self, caplog):
        vec = np.concatenate([SECH + np.tanh(X) * SECH, SECH])
        assert parity_check(vec) is ParityClass.MIXED
        assert "Mixed parity" in caplog.text


def test_domain_wider_than_front(superslow_params, quadratic_spec):
    front = build_composite_front(0.8153, superslow_params, quadratic_spec)
    ctx = LinearizationContext.build(front, superslow_params, quadratic_spec)
    with pytest.raises(GridError):
        discrete_spectrum_oracle(ctx, L=front.half_width + 1.0)


@pytest.mark.slow
class TestScalarLimitOracle:
    @pytest.fixture(scope="class")
    def eigenvalues(self, scalar_ctx):
        return discrete_spectrum_oracle(scalar_ctx)

    def _nearest(self, eigenvalues, target):
        points = [e for e in eigenvalues if e.label == "point"]
        return min(points, key=lambda e: abs(e.value - target))

    def test_translation_eigenvalue(self, eigenvalues):
        found = self._nearest(eigenvalues, 0.0)
        assert found.value == pytest.approx(0.0, abs=5e-3)
        assert found.parity is ParityClass.U_EVEN_V_ODD
        assert found.error_estimate < 5e-3

    def test_translation_eigenvalue_within_error_estimate(self, eigenvalues):
        """The kink is exact, so the reported value must sit inside its own error bar."""
        found = self._nearest(eigenvalues, 0.0)
        assert found.error_estimate > 0.0
        assert abs(found.value) <= 10.0 * found.error_estimate
        assert found.value.real <= found.error_estimate

    def test_second_bound_state(self, eigenvalues):
        found = self._nearest(eigenvalues, -1.5)
        assert found.value == pytest.approx(-1.5, abs=5e-2)
        assert found.parity is ParityClass.U_ODD_V_EVEN

    def test_nothing_unstable(self, eigenvalues):
        assert all(e.value.real < 5e-3 for e in eigenvalues)
        assert all(e.value.real > -2.0 for e in eigenvalues)
