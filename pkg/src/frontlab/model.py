"""
Model family for singularly perturbed bi-stable fronts.

    U_t = eps^2 U_xx + (1 + V - U^2) U
    tau V_t = V_xx + F(U^2, V)

with the reaction of the slow component written as

    F(U^2, V) = (1 + V - U^2) H(U^2, V) + G(V)

so that G(V) = F(1 + V, V) carries the slow dynamics on the manifolds
U^2 = 1 + V and H carries the forcing felt inside the fast jump.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from typing import Any, Protocol

import numpy as np
from numpy.polynomial import polynomial as P

from frontlab.errors import NonFiniteEvaluation, ParameterError, ValidationError

logger = logging.getLogger("frontlab.model")

EPSILON_MAX = 0.5
EPSILON_WARN = 0.2
TAU_MIN, TAU_MAX = 1e-2, 1e2
V_FLOOR = -0.9                      # validity floor for the slow level v

_G_ZERO_TOL = 1e-12
_DERIVATIVE_RTOL = 1e-6
_NONDEGENERACY_TOL = 1e-10
_FD_STEP = 1e-5

# 5 x 4 probe set inside [0, 9] x [-0.9, 9]
_PROBE_USQ = (0.25, 2.25, 4.5, 6.75, 8.75)
_PROBE_V = (-0.85, 0.5, 4.0, 8.5)


# =============================================================================
# Parameters
# =============================================================================


@dataclass(frozen=True)
class Regular:
    g1: float


@dataclass(frozen=True)
class SuperSlow:
    gamma: float


Regime = Regular | SuperSlow


@dataclass(frozen=True)
class ModelParams:
    epsilon: float
    tau: float
    regime: Regime

    def __post_init__(self):
        if not (0.0 < self.epsilon <= EPSILON_MAX):
            raise ParameterError(
                f"epsilon must lie in (0, {EPSILON_MAX}], got {self.epsilon}"
            )
        if self.epsilon > EPSILON_WARN:
            logger.warning(
                f"epsilon={self.epsilon} is above {EPSILON_WARN}; asymptotic predictions degrade"
            )
        if not (TAU_MIN <= self.tau <= TAU_MAX):
            raise ParameterError(f"tau must lie in [{TAU_MIN}, {TAU_MAX}], got {self.tau}")
        if isinstance(self.regime, Regular) and not self.regime.g1 < 0:
            raise ParameterError(f"regular regime requires G1 < 0, got {self.regime.g1}")

    @property
    def is_super_slow(self) -> bool:
        return isinstance(self.regime, SuperSlow)

    @property
    def g1(self) -> float:
        """G'(0); in the super-slow regime this is -eps^2 gamma."""
        if isinstance(self.regime, SuperSlow):
            return -self.epsilon**2 * self.regime.gamma
        return self.regime.g1

    @property
    def gamma(self) -> float:
        if isinstance(self.regime, SuperSlow):
            return self.regime.gamma
        return -self.regime.g1 / self.epsilon**2

    def with_gamma(self, gamma: float) -> ModelParams:
        return replace(self, regime=SuperSlow(gamma=gamma))

    def to_dict(self) -> dict[str, Any]:
        if isinstance(self.regime, SuperSlow):
            regime = {"super_slow": {"gamma": self.regime.gamma}}
        else:
            regime = {"regular": {"g1": self.regime.g1}}
        return {"epsilon": self.epsilon, "tau": self.tau, "regime": regime}


# =============================================================================
# Nonlinearity building blocks
# =============================================================================


class HTerm(Protocol):
    def value(self, u_sq, v): ...
    def d_usq(self, u_sq, v): ...
    def d_v(self, u_sq, v): ...


class GTerm(Protocol):
    def value(self, v): ...
    def d_v(self, v): ...


def _shaped(result, *args):
    """Broadcast a scalar-valued result against array arguments."""
    shape = np.broadcast_shapes(*(np.shape(a) for a in args))
    out = np.broadcast_to(np.asarray(result, dtype=float), shape)
    return out[()] if out.ndim == 0 else np.array(out)


@dataclass(frozen=True)
class PolynomialSurface:
    """Sum of c[i][j] * a^i * b^j."""

    coefficients: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.ndim != 2 or c.size == 0:
            raise ParameterError("polynomial coefficients must be a non-empty 2D table")
        object.__setattr__(self, "coefficients", tuple(tuple(float(x) for x in row) for row in c))

    @property
    def _c(self) -> np.ndarray:
        return np.asarray(self.coefficients, dtype=float)

    def value(self, a, b):
        return _shaped(P.polyval2d(np.asarray(a, float), np.asarray(b, float), self._c), a, b)

    def d_a(self, a, b):
        c = self._c
        if c.shape[0] == 1:
            return _shaped(0.0, a, b)
        return _shaped(P.polyval2d(np.asarray(a, float), np.asarray(b, float), P.polyder(c, axis=0)), a, b)

    def d_b(self, a, b):
        c = self._c
        if c.shape[1] == 1:
            return _shaped(0.0, a, b)
        return _shaped(P.polyval2d(np.asarray(a, float), np.asarray(b, float), P.polyder(c, axis=1)), a, b)


@dataclass(frozen=True)
class PowerH:
    """H = h0 * (U^2)^m."""

    h0: float
    m: int = 1

    def __post_init__(self):
        if self.m not in (0, 1, 2):
            raise ParameterError(f"PowerH exponent must be 0, 1 or 2, got {self.m}")

    def value(self, u_sq, v):
        return _shaped(self.h0 * np.asarray(u_sq, float) ** self.m, u_sq, v)

    def d_usq(self, u_sq, v):
        if self.m == 0:
            return _shaped(0.0, u_sq, v)
        return _shaped(self.h0 * self.m * np.asarray(u_sq, float) ** (self.m - 1), u_sq, v)

    def d_v(self, u_sq, v):
        return _shaped(0.0, u_sq, v)


@dataclass(frozen=True)
class PolynomialH:
    """Tabulated polynomial H = sum c[i][j] (U^2)^i V^j."""

    surface: PolynomialSurface

    @classmethod
    def from_table(cls, coefficients) -> PolynomialH:
        return cls(PolynomialSurface(tuple(tuple(row) for row in coefficients)))

    def value(self, u_sq, v):
        return self.surface.value(u_sq, v)

    def d_usq(self, u_sq, v):
        return self.surface.d_a(u_sq, v)

    def d_v(self, u_sq, v):
        return self.surface.d_b(u_sq, v)


@dataclass(frozen=True)
class LinearG:
    g1: float

    def value(self, v):
        return self.g1 * np.asarray(v, float)[()]

    def d_v(self, v):
        return _shaped(self.g1, v)


@dataclass(frozen=True)
class CubicG:
    g1: float
    g3: float

    def value(self, v):
        v = np.asarray(v, float)
        return (self.g1 * v + self.g3 * v**3)[()]

    def d_v(self, v):
        v = np.asarray(v, float)
        return (self.g1 + 3.0 * self.g3 * v**2)[()]


@dataclass(frozen=True)
class CallableH:
    func: Callable
    d_usq_func: Callable
    d_v_func: Callable

    def value(self, u_sq, v):
        return self.func(u_sq, v)

    def d_usq(self, u_sq, v):
        return self.d_usq_func(u_sq, v)

    def d_v(self, u_sq, v):
        return self.d_v_func(u_sq, v)


@dataclass(frozen=True)
class CallableG:
    func: Callable
    d_func: Callable

    def value(self, v):
        return self.func(v)

    def d_v(self, v):
        return self.d_func(v)


# =============================================================================
# ReactionSpec
# =============================================================================


@dataclass(frozen=True)
class ReactionSpec:
    h: HTerm
    g: GTerm
    H0: float = field(init=False)
    G1: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "H0", float(self.h.value(1.0, 0.0)))
        object.__setattr__(self, "G1", float(self.g.d_v(0.0)))

    # Evaluators. All accept scalars or numpy arrays.
    def H(self, u_sq, v):
        return self.h.value(u_sq, v)

    def dH_dUsq(self, u_sq, v):
        return self.h.d_usq(u_sq, v)

    def dH_dV(self, u_sq, v):
        return self.h.d_v(u_sq, v)

    def G(self, v):
        return self.g.value(v)

    def dG_dV(self, v):
        return self.g.d_v(v)

    def F(self, u_sq, v):
        u_sq = np.asarray(u_sq, float)
        v = np.asarray(v, float)
        return ((1.0 + v - u_sq) * self.H(u_sq, v) + self.G(v))[()]

    @property
    def is_quadratic_h(self) -> bool:
        """True for H = H0 U^2, the case with closed-form transmission functions."""
        return isinstance(self.h, PowerH) and self.h.m == 1

    @classmethod
    def power(cls, h0: float, m: int = 1, g1: float = -1.0, g3: float | None = None) -> ReactionSpec:
        g: GTerm = LinearG(g1) if g3 is None else CubicG(g1, g3)
        return cls(h=PowerH(h0, m), g=g)

    @classmethod
    def from_callables(
        cls,
        H: Callable,
        dH_dUsq: Callable,
        dH_dV: Callable,
        G: Callable,
        dG_dV: Callable,
    ) -> ReactionSpec:
        return cls(h=CallableH(H, dH_dUsq, dH_dV), g=CallableG(G, dG_dV))

    def describe(self) -> dict[str, Any]:
        return {"H": _describe_term(self.h), "G": _describe_term(self.g), "H0": self.H0, "G1": self.G1}


def _describe_term(term) -> dict[str, Any]:
    if isinstance(term, PowerH):
        return {"kind": "power", "h0": term.h0, "m": term.m}
    if isinstance(term, PolynomialH):
        return {"kind": "table", "coefficients": [list(r) for r in term.surface.coefficients]}
    if isinstance(term, LinearG):
        return {"kind": "linear", "g1": term.g1}
    if isinstance(term, CubicG):
        return {"kind": "cubic", "g1": term.g1, "g3": term.g3}
    if isinstance(term, (DecomposedH, DecomposedG)):
        return {"kind": "decomposed"}
    return {"kind": "callable"}


def require_consistent(params: ModelParams, spec: ReactionSpec, rtol: float = 1e-12) -> None:
    """The regime's G1 and the reaction's G'(0) must agree."""
    if abs(spec.G1 - params.g1) > rtol * (1.0 + abs(params.g1)):
        raise ParameterError(
            f"reaction G'(0)={spec.G1} disagrees with the regime's G1={params.g1}"
        )


# =============================================================================
# Validation
# =============================================================================


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "residual": c.residual, "detail": c.detail}
                for c in self.checks
            ],
        }

    def raise_if_failed(self) -> None:
        if not self.passed:
            names = ", ".join(c.name for c in self.failures())
            raise ValidationError(f"reaction spec failed validation: {names}", report=self)


def probe_points() -> list[tuple[float, float]]:
    return [(u, v) for u in _PROBE_USQ for v in _PROBE_V]


def _finite(name: str, value, where: str) -> float:
    x = float(value)
    if not math.isfinite(x):
        raise NonFiniteEvaluation(f"{name} returned {x} at {where}")
    return x


def _central(f: Callable[[float], float], x: float) -> float:
    h = _FD_STEP * max(1.0, abs(x))
    return (f(x + h) - f(x - h)) / (2.0 * h)


def _rel_mismatch(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1.0, abs(numeric))


def validate_reaction_spec(spec: ReactionSpec) -> ValidationReport:
    """Check the structural assumptions on H and G at a fixed probe set."""
    report = ValidationReport()

    g0 = _finite("G", spec.G(0.0), "v=0")
    report.checks.append(
        CheckResult("G(0)=0", abs(g0) <= _G_ZERO_TOL, abs(g0), "background states must be equilibria")
    )

    worst_h = worst_g = 0.0
    for u_sq, v in probe_points():
        where = f"(u_sq={u_sq}, v={v})"
        _finite("H", spec.H(u_sq, v), where)
        d_usq = _finite("dH_dUsq", spec.dH_dUsq(u_sq, v), where)
        d_v = _finite("dH_dV", spec.dH_dV(u_sq, v), where)
        fd_usq = _central(lambda a: float(spec.H(a, v)), u_sq)
        fd_v = _central(lambda b: float(spec.H(u_sq, b)), v)
        worst_h = max(worst_h, _rel_mismatch(d_usq, fd_usq), _rel_mismatch(d_v, fd_v))
    for v in _PROBE_V + (0.0,):
        _finite("G", spec.G(v), f"v={v}")
        dg = _finite("dG_dV", spec.dG_dV(v), f"v={v}")
        worst_g = max(worst_g, _rel_mismatch(dg, _central(lambda b: float(spec.G(b)), v)))

    report.checks.append(CheckResult("dH derivatives", worst_h <= _DERIVATIVE_RTOL, worst_h))
    report.checks.append(CheckResult("dG derivative", worst_g <= _DERIVATIVE_RTOL, worst_g))

    v_line = np.linspace(V_FLOOR, 9.0, 199)
    h_line = np.asarray(spec.H(1.0 + v_line, v_line), dtype=float) * np.ones_like(v_line)
    if not np.all(np.isfinite(h_line)):
        raise NonFiniteEvaluation("H returned non-finite values on U^2 = 1 + V")
    peak = float(np.max(np.abs(h_line)))
    report.checks.append(
        CheckResult("non-degeneracy", peak > _NONDEGENERACY_TOL, peak, "max |H(1+v, v)| over v in [-0.9, 9]")
    )

    h0_gap = abs(spec.H0 - float(spec.H(1.0, 0.0)))
    g1_gap = abs(spec.G1 - float(spec.dG_dV(0.0)))
    report.checks.append(CheckResult("H0 cache", h0_gap == 0.0, h0_gap))
    report.checks.append(CheckResult("G1 cache", g1_gap == 0.0, g1_gap))

    for check in report.failures():
        logger.warning(f"Validation check failed: {check.name} (residual {check.residual:.3e})")
    return report


# =============================================================================
# F -> (H, G) decomposition
# =============================================================================

SINGULAR_GAP = 1e-6
LIMIT_STEP = 1e-5


def decompose_F(F: Callable, v: float, u_sq: float) -> tuple[float, float]:
    """Return (H, G) at (u_sq, v) for the reaction F."""
    g = float(F(1.0 + v, v))
    gap = 1.0 + v - u_sq
    if abs(gap) > SINGULAR_GAP:
        h = (float(F(u_sq, v)) - g) / gap
    else:
        # removable singularity on U^2 = 1 + V
        s = 1.0 + v
        h = -(float(F(s + LIMIT_STEP, v)) - float(F(s - LIMIT_STEP, v))) / (2.0 * LIMIT_STEP)
    return h, g


@dataclass(frozen=True)
class DecomposedReaction:
    F: Callable

    def G(self, v):
        v = np.asarray(v, float)
        return np.asarray(self.F(1.0 + v, v), float)[()]

    def H(self, u_sq, v):
        u_sq, v = np.broadcast_arrays(np.asarray(u_sq, float), np.asarray(v, float))
        gap = 1.0 + v - u_sq
        near = np.abs(gap) <= SINGULAR_GAP
        g = np.asarray(self.F(1.0 + v, v), float)
        quotient = (np.asarray(self.F(u_sq, v), float) - g) / np.where(near, 1.0, gap)
        s = 1.0 + v
        limit = -(np.asarray(self.F(s + LIMIT_STEP, v), float) - np.asarray(self.F(s - LIMIT_STEP, v), float)) / (
            2.0 * LIMIT_STEP
        )
        return np.where(near, limit, quotient)[()]

    def reconstruction_residual(self, points: list[tuple[float, float]] | None = None) -> float:
        """max |(1+V-U^2) H + G - F| over points away from U^2 = 1 + V."""
        worst = 0.0
        for u_sq, v in points or probe_points():
            if abs(1.0 + v - u_sq) <= SINGULAR_GAP:
                continue
            rebuilt = (1.0 + v - u_sq) * float(self.H(u_sq, v)) + float(self.G(v))
            worst = max(worst, abs(rebuilt - float(self.F(u_sq, v))))
        return worst

    def to_spec(self) -> ReactionSpec:
        return ReactionSpec(h=DecomposedH(self), g=DecomposedG(self))


_DECOMPOSED_FD = 1e-4


@dataclass(frozen=True)
class DecomposedH:
    source: DecomposedReaction

    def value(self, u_sq, v):
        return self.source.H(u_sq, v)

    def d_usq(self, u_sq, v):
        u_sq = np.asarray(u_sq, float)
        h = _DECOMPOSED_FD * np.maximum(1.0, np.abs(u_sq))
        return ((self.source.H(u_sq + h, v) - self.source.H(u_sq - h, v)) / (2.0 * h))[()]

    def d_v(self, u_sq, v):
        v = np.asarray(v, float)
        h = _DECOMPOSED_FD * np.maximum(1.0, np.abs(v))
        return ((self.source.H(u_sq, v + h) - self.source.H(u_sq, v - h)) / (2.0 * h))[()]


@dataclass(frozen=True)
class DecomposedG:
    source: DecomposedReaction

    def value(self, v):
        return self.source.G(v)

    def d_v(self, v):
        v = np.asarray(v, float)
        h = _DECOMPOSED_FD * np.maximum(1.0, np.abs(v))
        return ((self.source.G(v + h) - self.source.G(v - h)) / (2.0 * h))[()]
