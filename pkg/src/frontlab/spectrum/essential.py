"""
Essential spectrum of the background states (+-1, 0).

Perturbations e^{ikx + lambda t} of a background state satisfy

    Q(lambda, k) = (lambda + k^2 + 2)(eps^2 tau lambda + k^2 - eps^2 (H0 + G1)) + 2 eps^2 H0 = 0,

with k the wavenumber on the fast scale. Writing a = eps^2 tau and K = k^2,
Q/a is the monic quadratic lambda^2 + (b/a) lambda + c/a with

    b = K (1 + a) + eps^2 (2 tau - H0 - G1)
    c = K^2 + K (2 - eps^2 (H0 + G1)) - 2 eps^2 G1
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from frontlab.errors import PreconditionError
from frontlab.model import ModelParams, ReactionSpec
from frontlab.spectrum.types import DispersionPoint, SpectralRegime, SpectrumReport, StabilityMargins

logger = logging.getLogger("frontlab.spectrum.essential")

REGIME_TOL = 1e-8
BISECTION_TOL = 1e-10
TIP_GAP_MIN = 0.01


def default_k_grid() -> np.ndarray:
    return np.linspace(-5.0, 5.0, 4001)


def _coefficients(k, params: ModelParams, spec: ReactionSpec):
    eps2 = params.epsilon**2
    h0, g1, tau = spec.H0, params.g1, params.tau
    K = np.asarray(k, dtype=float) ** 2
    a = eps2 * tau
    b = K * (1.0 + a) + eps2 * (2.0 * tau - h0 - g1)
    c = K * K + K * (2.0 - eps2 * (h0 + g1)) - 2.0 * eps2 * g1
    return a, b, c


def discriminant(k, params: ModelParams, spec: ReactionSpec):
    """b^2 - 4ac; negative exactly where the two roots are a complex pair."""
    a, b, c = _coefficients(k, params, spec)
    return b * b - 4.0 * a * c


def _roots(k, params: ModelParams, spec: ReactionSpec) -> tuple[np.ndarray, np.ndarray]:
    a, b, c = _coefficients(k, params, spec)
    disc = b * b - 4.0 * a * c
    real = disc >= 0

    sq = np.sqrt(np.where(real, disc, 0.0))
    # cancellation-free pair
    q = -0.5 * (b + np.where(b >= 0, 1.0, -1.0) * sq)
    safe_q = np.where(q != 0, q, 1.0)
    r_big = q / a
    r_small = np.where(q != 0, c / safe_q, 0.0)
    hi = np.maximum(r_big, r_small)
    lo = np.minimum(r_big, r_small)

    re = -b / (2.0 * a)
    im = np.sqrt(np.where(real, 0.0, -disc)) / (2.0 * a)
    lam1 = np.where(real, hi + 0j, re + 1j * im)
    lam2 = np.where(real, lo + 0j, re - 1j * im)
    return lam1, lam2


def char_roots(k: float, params: ModelParams, spec: ReactionSpec) -> tuple[complex, complex]:
    """Roots of Q(., k) ordered by descending real part (positive imaginary part first)."""
    lam1, lam2 = _roots(np.array([k]), params, spec)
    return complex(lam1[0]), complex(lam2[0])


def dispersion_table(params: ModelParams, spec: ReactionSpec, k_grid=None) -> list[DispersionPoint]:
    k = np.asarray(default_k_grid() if k_grid is None else k_grid, dtype=float)
    lam1, lam2 = _roots(k, params, spec)
    return [DispersionPoint(float(ki), complex(l1), complex(l2)) for ki, l1, l2 in zip(k, lam1, lam2)]


def stability_verdict(params: ModelParams, spec: ReactionSpec, k_grid=None) -> tuple[bool, StabilityMargins]:
    """Stable iff G1 < 0 and H0 + G1 - 2 tau < 0."""
    g1 = params.g1
    h_margin = spec.H0 + g1 - 2.0 * params.tau
    stable = g1 < 0 and h_margin < 0

    k = np.asarray(default_k_grid() if k_grid is None else k_grid, dtype=float)
    lam1, _ = _roots(k, params, spec)
    max_re = float(np.max(lam1.real))
    if stable != (max_re < 0):
        logger.warning(
            f"Threshold verdict stable={stable} disagrees with sampled max Re lambda={max_re:.3e}"
        )
    return stable, StabilityMargins(g1=g1, h_margin=h_margin, max_re_lambda=max_re)


def _scan_k(params: ModelParams, k_grid) -> np.ndarray:
    k = np.abs(np.asarray(k_grid, dtype=float))
    fine = params.epsilon * np.linspace(0.0, 10.0, 2001)
    return np.unique(np.concatenate([k, fine]))


def _band_edges(params: ModelParams, spec: ReactionSpec, k_grid) -> tuple[float | None, float | None]:
    """Bisected endpoints of the k-band where the roots are complex."""
    k = _scan_k(params, k_grid)
    disc = discriminant(k, params, spec)

    def f(x: float) -> float:
        return float(discriminant(np.array([x]), params, spec)[0])

    k_minus = k_plus = None
    for i in np.flatnonzero(np.sign(disc[:-1]) != np.sign(disc[1:])):
        if disc[i] == 0.0:
            edge = float(k[i])
        else:
            edge = brentq(f, k[i], k[i + 1], xtol=BISECTION_TOL)
        if disc[i] > 0 or (disc[i] == 0 and disc[i + 1] < 0):
            k_minus = edge if k_minus is None else k_minus
        else:
            k_plus = edge
    if k_plus is None and disc[0] < 0:
        logger.warning("Complex band extends past the k-grid")
    _check_band_closed_form(params, spec, k_minus, k_plus)
    return k_minus, k_plus


def _check_band_closed_form(params: ModelParams, spec: ReactionSpec, k_minus, k_plus) -> None:
    # the discriminant is a quadratic in K = k^2
    eps2 = params.epsilon**2
    a = eps2 * params.tau
    beta = eps2 * (2.0 * params.tau - spec.H0 - params.g1)
    coeffs = [
        (1.0 - a) ** 2,
        2.0 * (1.0 + a) * beta - 4.0 * a * (2.0 - eps2 * (spec.H0 + params.g1)),
        beta * beta + 8.0 * a * eps2 * params.g1,
    ]
    roots = np.roots(coeffs)
    closed = sorted(math.sqrt(r.real) for r in roots if abs(r.imag) < 1e-14 and r.real > 0)
    found = sorted(e for e in (k_minus, k_plus) if e is not None and e > 0)
    if len(found) == len(closed) and np.allclose(found, closed, rtol=1e-6, atol=1e-9):
        return
    logger.warning(f"Band edges {found} disagree with the closed-form roots {closed}")


def merge_threshold(params: ModelParams) -> float:
    """H0 at which the two complex bands merge through k = 0."""
    return (math.sqrt(2.0 * params.tau) - math.sqrt(-params.g1)) ** 2


def classify_regime(params: ModelParams, spec: ReactionSpec, k_grid=None) -> SpectrumReport:
    k_grid = default_k_grid() if k_grid is None else k_grid
    stable, margins = stability_verdict(params, spec, k_grid)
    if not stable:
        raise PreconditionError(
            f"regime classification needs a stable background (G1={margins.g1:.4g}, "
            f"H0+G1-2tau={margins.h_margin:.4g})"
        )
    h0 = spec.H0
    h_merge = merge_threshold(params)
    if h0 < -REGIME_TOL:
        regime = SpectralRegime.ALL_REAL
    elif abs(h0) <= REGIME_TOL:
        regime = SpectralRegime.BOUNDARY_H0_ZERO
    elif h0 < h_merge - REGIME_TOL:
        regime = SpectralRegime.TWO_COMPLEX_BANDS
    elif abs(h0 - h_merge) <= REGIME_TOL:
        regime = SpectralRegime.BOUNDARY_KMINUS_ZERO
    else:
        regime = SpectralRegime.MERGED_COMPLEX_BAND

    k_minus, k_plus = (None, None)
    if regime not in (SpectralRegime.ALL_REAL, SpectralRegime.BOUNDARY_H0_ZERO):
        k_minus, k_plus = _band_edges(params, spec, k_grid)
    if regime is SpectralRegime.MERGED_COMPLEX_BAND:
        k_minus = None
    elif regime is SpectralRegime.BOUNDARY_KMINUS_ZERO:
        k_minus = 0.0

    tip_plus, tip_minus = char_roots(0.0, params, spec)
    logger.info(f"Essential spectrum: {regime.value}, k-={k_minus}, k+={k_plus}, tip={tip_plus:.6g}")
    return SpectrumReport(
        stable=stable,
        regime=regime,
        k_minus=k_minus,
        k_plus=k_plus,
        tip_lambda_plus=tip_plus,
        tip_lambda_minus=tip_minus,
        margin=margins.max_re_lambda,
    )


def tip_lambda_superslow(params: ModelParams, spec: ReactionSpec) -> float:
    """Scaled tip -2 gamma / (2 tau - H0); the true tip is eps^2 times this."""
    if not params.is_super_slow:
        raise PreconditionError("tip_lambda_superslow needs the super-slow regime")
    gap = 2.0 * params.tau - spec.H0
    if gap <= TIP_GAP_MIN:
        raise PreconditionError(f"2 tau - H0 = {gap:.4g} is not positive and O(1)")
    tip = -2.0 * params.gamma / gap + 0.0

    eps2 = params.epsilon**2
    exact = char_roots(0.0, params, spec)[0].real / eps2
    if abs(exact - tip) > 10.0 * eps2 * max(1.0, abs(tip)):
        logger.warning(f"Scaled tip {tip:.6g} differs from the k=0 root {exact:.6g} beyond O(eps^2)")
    return tip


def distance_to_essential_spectrum(lam: complex, params: ModelParams, spec: ReactionSpec) -> float:
    """Distance from lam to the curves lambda_{1,2}(k), k real."""
    lam = complex(lam)
    k_max = max(10.0, 3.0 * math.sqrt(abs(lam) + 1.0))
    k = np.unique(np.concatenate([
        params.epsilon * np.linspace(0.0, 10.0, 2001),
        np.linspace(0.0, k_max, 4001),
    ]))

    def dist(x):
        l1, l2 = _roots(np.atleast_1d(x), params, spec)
        return np.minimum(np.abs(lam - l1), np.abs(lam - l2))

    d = dist(k)
    i = int(np.argmin(d))
    lo, hi = k[max(i - 1, 0)], k[min(i + 1, k.size - 1)]
    if hi > lo:
        res = minimize_scalar(lambda x: float(dist(x)[0]), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        return float(min(res.fun, d[i]))
    return float(d[i])
