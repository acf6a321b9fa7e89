"""
Closed-form fast-field objects and the quadratures over the fast jump.

Inside the jump the slow level V is frozen at v0 and U follows the
heteroclinic orbit of u'' + (1 + v0 - u^2) u = 0,

    u0(xi; v0) = sqrt(1+v0) tanh(k xi),   p0 = u0' = (1+v0)/sqrt(2) sech^2(k xi),

with k = sqrt((1+v0)/2). Every existence and stability quantity reduces to
integrals of the form  int (1 + v0 - u0^2) f(u0^2) dxi  over this orbit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad

from frontlab.errors import DomainError, QuadratureFailure
from frontlab.model import ReactionSpec

logger = logging.getLogger("frontlab.fast_field")

QUAD_ABS_TOL = 1e-10
QUAD_REL_TOL = 1e-12
QUAD_LIMIT = 200
IDENTITY_TOL = 1e-7
_CUTOFF_SCALE = 40.0                # |xi| <= 40 / sqrt(1 + v0)
_MAPPED_NODES = 96


@dataclass(frozen=True)
class FastQuadratureResult:
    value: float
    truncation_bound: float
    abs_tol: float


class StabilityIntegrals(NamedTuple):
    i1: float
    i2: float
    i3: float


def _require_level(v0: float) -> None:
    if not v0 > -1.0:
        raise DomainError(f"fast front needs v0 > -1, got {v0}")


def _sech_sq(z):
    # overflow-free sech^2
    e = np.exp(-2.0 * np.abs(z))
    return 4.0 * e / (1.0 + e) ** 2


def fast_front_eval(xi, v0: float):
    """Return (u0, p0) at xi (scalar or array)."""
    _require_level(v0)
    k = math.sqrt((1.0 + v0) / 2.0)
    z = k * np.asarray(xi, dtype=float)
    u0 = math.sqrt(1.0 + v0) * np.tanh(z)
    p0 = (1.0 + v0) / math.sqrt(2.0) * _sech_sq(z)
    return u0[()], p0[()]


def fast_hamiltonian(xi, v0: float):
    """1/2 p0^2 + 1/2 (1+v0) u0^2 - 1/4 u0^4; equals (1+v0)^2 / 4 on the orbit."""
    u0, p0 = fast_front_eval(xi, v0)
    return 0.5 * p0**2 + 0.5 * (1.0 + v0) * u0**2 - 0.25 * u0**4


def u_inhomogeneous(xi, v0: float):
    """Bounded solution of u'' + (1 + v0 - 3 u0^2) u + u0 = 0."""
    u0, p0 = fast_front_eval(xi, v0)
    return (u0 + np.asarray(xi, dtype=float) * p0) / (2.0 * (1.0 + v0))


def fast_eigenvalues(v0: float) -> tuple[float, float, float]:
    """(translation eigenvalue, second bound state, edge of the fast essential spectrum)."""
    _require_level(v0)
    return 0.0, -1.5 * (1.0 + v0), -2.0 * (1.0 + v0)


def melnikov_splitting(q0: float) -> float:
    """Signed distance between the unstable and stable fast fibres at q = q0."""
    return -q0 * math.sqrt(2.0)


def quadrature_cutoff(v0: float) -> float:
    return _CUTOFF_SCALE / math.sqrt(1.0 + v0)


def _half_line_integral(integrand, v0: float, label: str) -> FastQuadratureResult:
    """2 * int_0^cutoff of an even integrand."""
    cutoff = quadrature_cutoff(v0)
    out = quad(
        integrand, 0.0, cutoff,
        epsabs=QUAD_ABS_TOL / 2.0, epsrel=QUAD_REL_TOL, limit=QUAD_LIMIT, full_output=1,
    )
    value, abserr = out[0], out[1]
    budget = max(QUAD_ABS_TOL, 10.0 * QUAD_REL_TOL * abs(value))
    if abserr > budget:
        message = out[3] if len(out) > 3 else "error estimate above tolerance"
        raise QuadratureFailure(f"{label} at v0={v0}: {message} (abserr {abserr:.2e})")
    if len(out) > 3:
        logger.debug(f"{label} at v0={v0}: quad reported '{out[3]}' with acceptable abserr {abserr:.2e}")
    # tail decays like exp(-2 k xi)
    k = math.sqrt((1.0 + v0) / 2.0)
    tail = 2.0 * abs(integrand(cutoff)) / (2.0 * k)
    return FastQuadratureResult(value=2.0 * value, truncation_bound=tail, abs_tol=QUAD_ABS_TOL)


def jump_integral_J(v0: float, spec: ReactionSpec) -> FastQuadratureResult:
    """J(v0) = int (1 + v0 - u0^2) H(u0^2, v0) dxi over the fast jump."""
    _require_level(v0)

    def integrand(xi: float) -> float:
        u0, _ = fast_front_eval(xi, v0)
        u_sq = u0 * u0
        return (1.0 + v0 - u_sq) * float(spec.H(u_sq, v0))

    return _half_line_integral(integrand, v0, "J")


def stability_integrals(v0: float, spec: ReactionSpec) -> StabilityIntegrals:
    """
    I1 = J(v0)
    I2 = int (1+v0-u0^2) [u0^2 H_U2 + (1+v0) H_V] dxi
    I3 = int [(1+v0-u0^2) H_U2 - H] xi u0 u0' dxi     (= -I1/2 by parts)
    """
    _require_level(v0)

    def i2_integrand(xi: float) -> float:
        u0, _ = fast_front_eval(xi, v0)
        u_sq = u0 * u0
        weight = u_sq * float(spec.dH_dUsq(u_sq, v0)) + (1.0 + v0) * float(spec.dH_dV(u_sq, v0))
        return (1.0 + v0 - u_sq) * weight

    def i3_integrand(xi: float) -> float:
        u0, p0 = fast_front_eval(xi, v0)
        u_sq = u0 * u0
        bracket = (1.0 + v0 - u_sq) * float(spec.dH_dUsq(u_sq, v0)) - float(spec.H(u_sq, v0))
        return bracket * xi * u0 * p0

    i1 = jump_integral_J(v0, spec).value
    i2 = _half_line_integral(i2_integrand, v0, "I2").value
    i3 = _half_line_integral(i3_integrand, v0, "I3").value

    gap = abs(i3 + 0.5 * i1)
    if gap > IDENTITY_TOL * (1.0 + abs(i1)):
        raise QuadratureFailure(f"I3 = -I1/2 violated at v0={v0}: |I3 + I1/2| = {gap:.2e}")
    logger.debug(f"Stability integrals at v0={v0}: I1={i1:.10g}, I2={i2:.10g}, I3={i3:.10g}")
    return StabilityIntegrals(i1, i2, i3)


def jump_derivative(v0: float, spec: ReactionSpec) -> float:
    """dJ/dv0 = (I1 + 2 I2) / (2 (1 + v0))."""
    i1, i2, _ = stability_integrals(v0, spec)
    return (i1 + 2.0 * i2) / (2.0 * (1.0 + v0))


@lru_cache(maxsize=8)
def _legendre(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    # Gauss-Legendre on [0, 1]
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def jump_integrals_mapped(v, spec: ReactionSpec, nodes: int = _MAPPED_NODES):
    """
    Vectorized (J, J') on an array of levels.

    With s = tanh(k xi) the weight (1 + v - u0^2) dxi becomes
    sqrt(2) sqrt(1+v) ds and u0^2 = (1+v) s^2, so both integrals are smooth
    integrals over s in [-1, 1] (even integrands, folded onto [0, 1]).
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if np.any(v <= -1.0):
        raise DomainError("jump integrals need v > -1")
    s, w = _legendre(nodes)
    level = (1.0 + v)[:, None]
    u_sq = level * s[None, :] ** 2
    v_col = np.broadcast_to(v[:, None], u_sq.shape)

    h = np.asarray(spec.H(u_sq, v_col), dtype=float) * np.ones_like(u_sq)
    h_u = np.asarray(spec.dH_dUsq(u_sq, v_col), dtype=float) * np.ones_like(u_sq)
    h_v = np.asarray(spec.dH_dV(u_sq, v_col), dtype=float) * np.ones_like(u_sq)

    scale = 2.0 * math.sqrt(2.0) * np.sqrt(1.0 + v)
    i1 = scale * (h @ w)
    i2 = scale * ((u_sq * h_u + level * h_v) @ w)
    dj = (i1 + 2.0 * i2) / (2.0 * (1.0 + v))
    return i1, dj
