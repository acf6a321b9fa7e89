"""
Evans function of the linearized front problem.

On the fast scale xi = x / eps the eigenvalue problem for a perturbation
(u, v) e^{lambda t} of a front (U, V) is the first-order system
phi' = A(xi; lambda) phi, phi = (u, p, v, q), with

    A = [[0,           1, 0,                  0  ],
         [lambda - f_u, 0, -U,                0  ],
         [0,           0, 0,                  eps],
         [eps c_u,     0, eps (c_v + tau lambda), 0]]

    f_u = 1 + V - 3 U^2
    c_u = 2 [H - (1 + V - U^2) H_U2] U
    c_v = -[H + (1 + V - U^2) H_V + G'(V)]

D(lambda) = det[phi1, phi2, phi3, phi4] is evaluated with the compound
matrix method: the 2-planes span{phi1, phi2} (decaying at -inf) and
span{phi3, phi4} (decaying at +inf) are carried as 6-vectors of the
exterior square and wedged together at xi = 0.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from itertools import pairwise
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from frontlab.errors import (
    BranchCutError,
    ContourTooCoarse,
    NearMinusTwo,
    OrderingBreakdown,
    PrecisionLoss,
    PreconditionError,
    StiffnessFailure,
)
from frontlab.existence import FrontProfile
from frontlab.fast_field import stability_integrals
from frontlab.grids import stretched_grid
from frontlab.model import ModelParams, ReactionSpec
from frontlab.spectrum.essential import TIP_GAP_MIN, distance_to_essential_spectrum, tip_lambda_superslow
from frontlab.spectrum.types import AsymptoticSystem, EdgePrediction, EvansEvaluation, EvansMethod

logger = logging.getLogger("frontlab.spectrum.evans")

COEFF_TOL = 1e-8
RTOL = 1e-10
ATOL = 1e-13
SEGMENT = 2.0
NORM_BAND = (1e-3, 1e3)
COLLAPSE_RATIO = 1e-13
ORDER_TOL = 1e-12
BRANCH_CUT_TOL = 1e-8
TIP_WINDOW = 10.0                   # in units of eps^2
MAX_CONTOUR_POINTS = 10_000
CONTOUR_MARGIN = 1e-4

_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
_ENTRIES = ((0, 1), (1, 0), (1, 2), (2, 3), (3, 0), (3, 2))


def compound(A: np.ndarray) -> np.ndarray:
    """Induced action of A on the exterior square, basis e_i ^ e_j (i < j)."""
    out = np.zeros((6, 6), dtype=complex)
    for r, (i, j) in enumerate(_PAIRS):
        for c, (k, l) in enumerate(_PAIRS):
            out[r, c] = (
                A[i, k] * (j == l) + A[j, l] * (i == k)
                - A[i, l] * (j == k) - A[j, k] * (i == l)
            )
    return out


def _unit(i: int, j: int) -> np.ndarray:
    e = np.zeros((4, 4))
    e[i, j] = 1.0
    return e


_COMPOUND_BASIS = {entry: compound(_unit(*entry)) for entry in _ENTRIES}


def wedge2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.array([a[i] * b[j] - a[j] * b[i] for i, j in _PAIRS])


def wedge4(y: np.ndarray, z: np.ndarray) -> complex:
    """(y ^ z) as a multiple of e1 ^ e2 ^ e3 ^ e4."""
    return complex(
        y[0] * z[5] - y[1] * z[4] + y[2] * z[3]
        + y[3] * z[2] - y[4] * z[1] + y[5] * z[0]
    )


# =============================================================================
# Linearization
# =============================================================================


@dataclass(frozen=True, eq=False)
class LinearizationContext:
    front: FrontProfile
    params: ModelParams
    spec: ReactionSpec
    xi: np.ndarray                  # coefficient nodes on the fast scale
    coefficients: np.ndarray        # columns f_u, U, c_u, c_v
    spline: CubicSpline
    xi_start: float                 # shooting starts at -xi_start and +xi_start

    @classmethod
    def build(
        cls,
        front: FrontProfile,
        params: ModelParams,
        spec: ReactionSpec,
        n: int = 4001,
        core_spacing: float | None = None,
    ) -> LinearizationContext:
        eps = params.epsilon
        x = stretched_grid(front.half_width, n, core_spacing or eps / 20.0)
        U, V = front.evaluate(x)
        coefficients = linearization_coefficients(U, V, spec)
        xi = x / eps

        sign = np.sign(xi)
        limit = np.column_stack([
            np.full_like(xi, -2.0), sign, 2.0 * spec.H0 * sign, np.full_like(xi, -(spec.H0 + spec.G1)),
        ])
        deviation = np.max(np.abs(coefficients - limit), axis=1)
        bad = np.abs(xi[deviation >= COEFF_TOL])
        beyond = np.abs(xi)[np.abs(xi) > (bad.max() if bad.size else 0.0)]
        if beyond.size:
            xi_start = float(beyond.min())
        else:
            xi_start = float(np.abs(xi).max())
            logger.debug(
                f"Coefficients reach only {deviation[-1]:.2e} of their limits; shooting from the grid end"
            )
        spline = CubicSpline(xi, coefficients, axis=0)
        logger.debug(f"Linearization on {n} nodes, shooting span |xi| <= {xi_start:.4g}")
        return cls(front, params, spec, xi, coefficients, spline, xi_start)

    def coefficients_at(self, xi: float) -> np.ndarray:
        return self.spline(min(max(xi, self.xi[0]), self.xi[-1]))


def linearization_coefficients(U, V, spec: ReactionSpec) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    u_sq = U * U
    r = 1.0 + V - u_sq
    ones = np.ones_like(U)
    h = np.asarray(spec.H(u_sq, V), float) * ones
    h_u = np.asarray(spec.dH_dUsq(u_sq, V), float) * ones
    h_v = np.asarray(spec.dH_dV(u_sq, V), float) * ones
    dg = np.asarray(spec.dG_dV(V), float) * ones
    f_u = 1.0 + V - 3.0 * u_sq
    c_u = 2.0 * (h - r * h_u) * U
    c_v = -(h + r * h_v + dg)
    return np.column_stack([f_u, U, c_u, c_v])


def _entries(coeff: np.ndarray, lam: complex, params: ModelParams) -> dict[tuple[int, int], complex]:
    f_u, U, c_u, c_v = coeff
    eps = params.epsilon
    return {
        (0, 1): 1.0,
        (1, 0): lam - f_u,
        (1, 2): -U,
        (2, 3): eps,
        (3, 0): eps * c_u,
        (3, 2): eps * (c_v + params.tau * lam),
    }


def assemble_A(xi: float, lam: complex, ctx: LinearizationContext) -> np.ndarray:
    A = np.zeros((4, 4), dtype=complex)
    for (i, j), value in _entries(ctx.coefficients_at(xi), lam, ctx.params).items():
        A[i, j] = value
    return A


def _compound_at(xi: float, lam: complex, ctx: LinearizationContext) -> np.ndarray:
    out = np.zeros((6, 6), dtype=complex)
    for entry, value in _entries(ctx.coefficients_at(xi), lam, ctx.params).items():
        out += value * _COMPOUND_BASIS[entry]
    return out


# =============================================================================
# Asymptotic system
# =============================================================================


def _eigenvector(mu: complex, exponent: complex, lam: complex, sign: float, eps: float, fast: bool) -> np.ndarray:
    gap = 2.0 + lam - mu
    if fast:
        v = sign * gap
        return np.array([1.0, exponent, v, exponent * v / eps], dtype=complex)
    u = sign / gap
    return np.array([u, exponent * u, 1.0, exponent / eps], dtype=complex)


def asymptotic_system(lam: complex, params: ModelParams, spec: ReactionSpec) -> AsymptoticSystem:
    """
    Exponents and eigenvectors of A at xi -> -inf (U = -1) and +inf (U = +1).
    mu = Lambda^2 solves (lambda + 2 - mu)(eps^2 (tau lambda - H0 - G1) - mu) + 2 eps^2 H0 = 0.
    """
    lam = complex(lam)
    eps = params.epsilon
    if abs(lam + 2.0) <= 10.0 * eps:
        raise NearMinusTwo(f"|lambda + 2| = {abs(lam + 2.0):.3g} is within 10 eps of the fast edge")

    s = lam + 2.0
    X = eps**2 * (params.tau * lam - spec.H0 - params.g1)
    product = s * X + 2.0 * eps**2 * spec.H0
    root = cmath.sqrt((s - X) ** 2 - 8.0 * eps**2 * spec.H0)
    candidates = ((s + X + root) / 2.0, (s + X - root) / 2.0)
    mu_big = max(candidates, key=abs)
    mu_small = product / mu_big if mu_big != 0 else 0j
    if abs(mu_big - s) <= abs(mu_small - s):
        mu_fast, mu_slow = mu_big, mu_small
    else:
        mu_fast, mu_slow = mu_small, mu_big

    if abs(mu_slow) < 1e-14 * max(1.0, abs(mu_fast)) or abs(mu_fast) < 1e-14:
        raise OrderingBreakdown(f"lambda={lam} lies on the essential spectrum (zero spatial exponent)")
    lam_fast, lam_slow = cmath.sqrt(mu_fast), cmath.sqrt(mu_slow)
    if min(lam_fast.real, lam_slow.real) < ORDER_TOL or abs(lam_fast.real - lam_slow.real) < ORDER_TOL:
        raise OrderingBreakdown(
            f"exponent real parts {lam_fast.real:.3e}, {lam_slow.real:.3e} cannot be ordered at lambda={lam}"
        )

    modes = [(lam_fast, mu_fast, True), (lam_slow, mu_slow, False)]
    modes.sort(key=lambda m: m[0].real, reverse=True)
    (l1, mu1, fast1), (l2, mu2, fast2) = modes
    exponents = (l1, l2, -l2, -l1)
    layout = ((l1, mu1, fast1), (l2, mu2, fast2), (-l2, mu2, fast2), (-l1, mu1, fast1))

    def basis(sign: float) -> np.ndarray:
        return np.column_stack([_eigenvector(mu, ex, lam, sign, eps, fast) for ex, mu, fast in layout])

    return AsymptoticSystem(lam=lam, exponents=exponents, minus=basis(-1.0), plus=basis(1.0))


def limit_matrix(lam: complex, params: ModelParams, spec: ReactionSpec, sign: float) -> np.ndarray:
    """A(xi; lambda) at the background state U = sign, V = 0."""
    coeff = np.array([-2.0, sign, 2.0 * spec.H0 * sign, -(spec.H0 + spec.G1)])
    A = np.zeros((4, 4), dtype=complex)
    for (i, j), value in _entries(coeff, complex(lam), params).items():
        A[i, j] = value
    return A


# =============================================================================
# Compound-matrix shooting
# =============================================================================


def _integrate(rhs: Callable, y0: np.ndarray, start: float, stop: float, label: str) -> tuple[np.ndarray, float]:
    """Integrate with renormalization; returns (direction, log of the removed scale)."""
    scale = np.linalg.norm(y0)
    y = y0 / scale
    log_scale = math.log(scale)
    segments = max(1, math.ceil(abs(stop - start) / SEGMENT))
    for a, b in pairwise(np.linspace(start, stop, segments + 1)):
        sol = solve_ivp(rhs, (a, b), y, method="DOP853", rtol=RTOL, atol=ATOL)
        if not sol.success:
            raise StiffnessFailure(f"{label}: {sol.message} on [{a:.4g}, {b:.4g}]")
        y_new = sol.y[:, -1]
        norm = float(np.linalg.norm(y_new))
        if not math.isfinite(norm):
            raise StiffnessFailure(f"{label}: non-finite state at xi={b:.4g}")
        if norm < COLLAPSE_RATIO * np.linalg.norm(y):
            raise PrecisionLoss(f"{label}: norm collapsed by {norm:.2e} on [{a:.4g}, {b:.4g}]")
        y = y_new
        if not NORM_BAND[0] <= norm <= NORM_BAND[1]:
            y = y / norm
            log_scale += math.log(norm)
    return y, log_scale


def evans_compound(lam: complex, ctx: LinearizationContext, transmission: bool = False) -> EvansEvaluation:
    """D(lambda) by compound-matrix shooting; optionally the factors t1, t2 with D = t1 t2 det[E+]."""
    lam = complex(lam)
    system = asymptotic_system(lam, ctx.params, ctx.spec)
    growth = system.growth
    eye = np.eye(6)

    def forward(xi, y):
        return (_compound_at(xi, lam, ctx) - growth * eye) @ y

    def backward(xi, z):
        return (_compound_at(xi, lam, ctx) + growth * eye) @ z

    span = ctx.xi_start
    y0 = wedge2(system.minus[:, 0], system.minus[:, 1])
    z0 = wedge2(system.plus[:, 2], system.plus[:, 3])
    y, log_y = _integrate(forward, y0, -span, 0.0, "unstable plane")
    z, log_z = _integrate(backward, z0, span, 0.0, "stable plane")
    mantissa = wedge4(y, z)
    rescale_log = log_y + log_z

    t1 = t2 = complex("nan")
    if transmission:
        t1, t2 = _transmission(lam, ctx, system, y, log_y)

    logger.debug(f"D({lam:.6g}) = {mantissa:.6e} * exp({rescale_log:.4f})")
    return EvansEvaluation(lam, mantissa, rescale_log, EvansMethod.COMPOUND_MATRIX, t1, t2)


def _transmission(lam, ctx, system: AsymptoticSystem, y_mid, log_mid) -> tuple[complex, complex]:
    span = ctx.xi_start
    exponent = system.exponents[0]
    growth = system.growth
    eye = np.eye(6)

    def plane(xi, y):
        return (_compound_at(xi, lam, ctx) - growth * eye) @ y

    def fastest(xi, phi):
        return (assemble_A(xi, lam, ctx) - exponent * np.eye(4)) @ phi

    y_end, log_y = _integrate(plane, y_mid, 0.0, span, "unstable plane (continued)")
    phi_end, log_phi = _integrate(fastest, system.minus[:, 0], -span, span, "fastest solution")

    plus = system.plus
    wedge_basis = np.column_stack([wedge2(plus[:, i], plus[:, j]) for i, j in _PAIRS])
    t1t2 = np.linalg.solve(wedge_basis, y_end)[0] * math.exp(log_mid + log_y)
    t1 = np.linalg.solve(plus, phi_end)[0] * math.exp(log_phi)
    if t1 == 0:
        return 0j, complex("nan")
    return complex(t1), complex(t1t2 / t1)


# =============================================================================
# Slow transmission function (super-slow regime)
# =============================================================================


def _t2_argument(lam_tilde: complex, params: ModelParams, spec: ReactionSpec) -> complex:
    z = complex(lam_tilde) * (params.tau - 0.5 * spec.H0) + params.gamma
    distance = abs(z.imag) if z.real <= 0 else abs(z)
    if distance < BRANCH_CUT_TOL:
        raise BranchCutError(f"lambda~(tau - H0/2) + gamma = {z} is on the branch cut")
    return z


def _require_super_slow(params: ModelParams, name: str) -> None:
    if not params.is_super_slow:
        raise PreconditionError(f"{name} needs the super-slow regime")


def t2_jump_matching(lam_tilde: complex, v0: float, params: ModelParams, spec: ReactionSpec) -> complex:
    """
    t2 = 1 - (I1 + 2 I2) / (4 sqrt(z) (1 + v0)),  z = lambda~ (tau - H0/2) + gamma.

    For a general H the slow problem has non-constant coefficients away from
    lambda~ = 0, so only that point is admitted there.
    """
    _require_super_slow(params, "t2_jump_matching")
    if lam_tilde != 0 and not spec.is_quadratic_h:
        raise PreconditionError("t2 for a general H is only available at lambda~ = 0")
    z = _t2_argument(lam_tilde, params, spec)
    i1, i2, _ = stability_integrals(v0, spec)
    return 1.0 - (i1 + 2.0 * i2) / (4.0 * cmath.sqrt(z) * (1.0 + v0))


def t2_closed_form(lam_tilde: complex, v0: float, params: ModelParams, spec: ReactionSpec) -> complex:
    """t2 = 1 - H0 sqrt((1 + v0) / (2 z)) for H = H0 U^2."""
    _require_super_slow(params, "t2_closed_form")
    if not spec.is_quadratic_h:
        raise PreconditionError("closed-form t2 needs H = H0 U^2")
    z = _t2_argument(lam_tilde, params, spec)
    return 1.0 - spec.H0 * cmath.sqrt((1.0 + v0) / (2.0 * z))


def lambda_edge_predict(v0: float, params: ModelParams, spec: ReactionSpec) -> EdgePrediction:
    """Zero of the closed-form t2: lambda~_edge = (-2 gamma + H0^2 (1 + v0)) / (2 tau - H0)."""
    _require_super_slow(params, "lambda_edge_predict")
    if not spec.is_quadratic_h:
        raise PreconditionError("edge prediction needs H = H0 U^2")
    gap = 2.0 * params.tau - spec.H0
    if gap <= TIP_GAP_MIN:
        raise PreconditionError(f"2 tau - H0 = {gap:.4g} is not positive and O(1)")
    h0 = spec.H0
    lam_tilde = (-2.0 * params.gamma + h0 * h0 * (1.0 + v0)) / gap
    exists = h0 > 0
    if exists and not lam_tilde > -2.0 * params.gamma / gap:
        raise PreconditionError(f"edge prediction {lam_tilde} does not lie right of the tip")
    return EdgePrediction(
        v0=v0, lambda_tilde_edge=lam_tilde, lambda_edge=params.epsilon**2 * lam_tilde, exists=exists,
    )


def gamma_double_from_stability(v0: float, spec: ReactionSpec) -> float:
    """gamma at which t2(0) vanishes for a front at level v0: ((I1 + 2 I2) / (4 (1 + v0)))^2."""
    i1, i2, _ = stability_integrals(v0, spec)
    return ((i1 + 2.0 * i2) / (4.0 * (1.0 + v0))) ** 2


# =============================================================================
# Router, scans and winding numbers
# =============================================================================


def evaluate_evans(lam: complex, ctx: LinearizationContext) -> EvansEvaluation:
    """Compound-matrix evaluation, or jump matching within 10 eps^2 of the super-slow tip."""
    lam = complex(lam)
    params, spec = ctx.params, ctx.spec
    if params.is_super_slow and 2.0 * params.tau - spec.H0 > TIP_GAP_MIN:
        eps2 = params.epsilon**2
        tip = eps2 * tip_lambda_superslow(params, spec)
        if abs(lam - tip) < TIP_WINDOW * eps2:
            lam_tilde = lam / eps2
            if lam_tilde.imag == 0:
                lam_tilde = lam_tilde.real
            if spec.is_quadratic_h:
                t2, method = t2_closed_form(lam_tilde, ctx.front.v0, params, spec), EvansMethod.ANALYTIC_LEADING_ORDER
            else:
                t2, method = t2_jump_matching(lam_tilde, ctx.front.v0, params, spec), EvansMethod.JUMP_MATCHING
            return EvansEvaluation(lam, complex(t2), 0.0, method, t2=complex(t2))
    return evans_compound(lam, ctx)


def evans_scan(lam_grid: Sequence[complex], ctx: LinearizationContext) -> list[EvansEvaluation]:
    results = [evaluate_evans(lam, ctx) for lam in lam_grid]
    logger.info(f"Evaluated D at {len(results)} points")
    return results


def circle_contour(center: complex, radius: float, n: int = 32) -> np.ndarray:
    theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    return complex(center) + radius * np.exp(1j * theta)


def winding_count(contour: Sequence[complex], ctx: LinearizationContext) -> int:
    """Number of zeros of D inside a closed polyline (argument principle)."""
    points = [complex(p) for p in contour]
    if len(points) < 3:
        raise PreconditionError("contour needs at least three points")
    if points[0] != points[-1]:
        points.append(points[0])

    def phase(lam: complex) -> float:
        margin = distance_to_essential_spectrum(lam, ctx.params, ctx.spec)
        if margin < CONTOUR_MARGIN:
            raise PreconditionError(f"contour point {lam} is within {margin:.2e} of the essential spectrum")
        value = evans_compound(lam, ctx).mantissa
        if value == 0:
            raise PreconditionError(f"D vanishes on the contour at {lam}")
        return cmath.phase(value)

    phases = [phase(p) for p in points[:-1]]
    phases.append(phases[0])
    total = 0.0
    i = 0
    while i < len(points) - 1:
        step = (phases[i + 1] - phases[i] + math.pi) % (2.0 * math.pi) - math.pi
        if abs(step) >= math.pi / 2.0:
            if len(points) >= MAX_CONTOUR_POINTS:
                raise ContourTooCoarse(f"argument still turns by {abs(step):.2f} per segment at {len(points)} points")
            mid = 0.5 * (points[i] + points[i + 1])
            points.insert(i + 1, mid)
            phases.insert(i + 1, phase(mid))
            continue
        total += step
        i += 1
    winding = round(total / (2.0 * math.pi))
    logger.info(f"Winding number {winding} over {len(points) - 1} contour points")
    return winding
